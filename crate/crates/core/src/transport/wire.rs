//! Binary frame codec.
//!
//! A frame is a 4-byte little-endian length `L` followed by `L` bytes: a
//! one-byte kind tag and the kind-specific body. All integers are
//! little-endian. A node record is written as four `(count, items)` sections
//! in the order long, int, char, float, followed by the depth (u64) and the
//! unexplored flag (u8).

use std::io::{self, Read, Write};

use thiserror::Error;

use super::{JobResult, JobStatus, Message, StreamId};
use crate::engine::{Budget, PruneMode};
use crate::node::NodeRecord;

/// Upper bound on a single frame, to reject garbage lengths early.
pub const MAX_FRAME: usize = 1 << 30;

#[derive(Debug, Error)]
pub enum WireError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("frame truncated while reading {0}")]
    Truncated(&'static str),
    #[error("unknown message kind tag {0}")]
    UnknownKind(u8),
    #[error("invalid {what}: {value}")]
    Invalid { what: &'static str, value: u64 },
    #[error("frame length {0} exceeds limit")]
    TooLarge(usize),
    #[error("{0} trailing bytes after message body")]
    Trailing(usize),
    #[error("invalid utf-8 in {0}")]
    Utf8(&'static str),
}

mod tag {
    pub const JOB_ASSIGN: u8 = 1;
    pub const JOB_RESULT: u8 = 2;
    pub const UNEXPLORED_BATCH: u8 = 3;
    pub const OUTPUT_CHUNK: u8 = 4;
    pub const SHARED_DATA: u8 = 5;
    pub const CHECKPOINT_ACK: u8 = 6;
    pub const CLEAN_STOP: u8 = 7;
    pub const TERMINATE: u8 = 8;
    pub const INIT: u8 = 9;
}

struct Writer<'a>(&'a mut Vec<u8>);

impl Writer<'_> {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn len(&mut self, n: usize) {
        self.u32(u32::try_from(n).expect("section longer than u32::MAX"));
    }
    fn bytes(&mut self, b: &[u8]) {
        self.len(b.len());
        self.0.extend_from_slice(b);
    }
    fn string(&mut self, s: &str) {
        self.bytes(s.as_bytes());
    }
    fn budget(&mut self, b: &Budget) {
        // zero encodes an unbounded limit
        self.u64(b.max_depth().unwrap_or(0));
        self.u64(b.max_nodes().unwrap_or(0));
    }
    fn prune(&mut self, p: PruneMode) {
        self.u8(match p {
            PruneMode::Off => 0,
            PruneMode::Leaves => 1,
            PruneMode::Paths => 2,
        });
    }
    fn node(&mut self, r: &NodeRecord) {
        self.len(r.vlong.len());
        for v in &r.vlong {
            self.0.extend_from_slice(&v.to_le_bytes());
        }
        self.len(r.vint.len());
        for v in &r.vint {
            self.0.extend_from_slice(&v.to_le_bytes());
        }
        self.bytes(&r.vchar);
        self.len(r.vfloat.len());
        for v in &r.vfloat {
            self.0.extend_from_slice(&v.to_le_bytes());
        }
        self.u64(r.depth);
        self.u8(r.unexplored as u8);
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8], WireError> {
        let end = self.pos.checked_add(n).ok_or(WireError::Truncated(what))?;
        let s = self.buf.get(self.pos..end).ok_or(WireError::Truncated(what))?;
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self, what: &'static str) -> Result<u8, WireError> {
        Ok(self.take(1, what)?[0])
    }
    fn u32(&mut self, what: &'static str) -> Result<u32, WireError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
    fn u64(&mut self, what: &'static str) -> Result<u64, WireError> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
    fn count(&mut self, elem: usize, what: &'static str) -> Result<usize, WireError> {
        let n = self.u32(what)? as usize;
        // a count that cannot fit in the remaining bytes is a truncation
        if n.saturating_mul(elem) > self.buf.len() - self.pos {
            return Err(WireError::Truncated(what));
        }
        Ok(n)
    }
    fn bytes(&mut self, what: &'static str) -> Result<Vec<u8>, WireError> {
        let n = self.count(1, what)?;
        Ok(self.take(n, what)?.to_vec())
    }
    fn string(&mut self, what: &'static str) -> Result<String, WireError> {
        String::from_utf8(self.bytes(what)?).map_err(|_| WireError::Utf8(what))
    }
    fn flag(&mut self, what: &'static str) -> Result<bool, WireError> {
        match self.u8(what)? {
            0 => Ok(false),
            1 => Ok(true),
            v => Err(WireError::Invalid { what, value: v as u64 }),
        }
    }
    fn budget(&mut self) -> Result<Budget, WireError> {
        let d = self.u64("budget depth")?;
        let n = self.u64("budget nodes")?;
        Ok(Budget::new((d != 0).then_some(d), (n != 0).then_some(n)).expect("zero already mapped to unbounded"))
    }
    fn prune(&mut self) -> Result<PruneMode, WireError> {
        match self.u8("prune mode")? {
            0 => Ok(PruneMode::Off),
            1 => Ok(PruneMode::Leaves),
            2 => Ok(PruneMode::Paths),
            v => Err(WireError::Invalid {
                what: "prune mode",
                value: v as u64,
            }),
        }
    }
    fn node(&mut self) -> Result<NodeRecord, WireError> {
        let n = self.count(8, "vlong")?;
        let vlong = self
            .take(n * 8, "vlong")?
            .chunks_exact(8)
            .map(|c| i64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let n = self.count(4, "vint")?;
        let vint = self
            .take(n * 4, "vint")?
            .chunks_exact(4)
            .map(|c| i32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let vchar = self.bytes("vchar")?;
        let n = self.count(4, "vfloat")?;
        let vfloat = self
            .take(n * 4, "vfloat")?
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let depth = self.u64("depth")?;
        let unexplored = self.flag("unexplored flag")?;
        Ok(NodeRecord {
            vlong,
            vint,
            vchar,
            vfloat,
            depth,
            unexplored,
        })
    }
    fn finish(&self) -> Result<(), WireError> {
        match self.buf.len() - self.pos {
            0 => Ok(()),
            n => Err(WireError::Trailing(n)),
        }
    }
}

/// Encodes a node record on its own (no frame header).
pub fn encode_node(r: &NodeRecord) -> Vec<u8> {
    let mut buf = Vec::new();
    Writer(&mut buf).node(r);
    buf
}

pub fn decode_node(buf: &[u8]) -> Result<NodeRecord, WireError> {
    let mut r = Reader::new(buf);
    let node = r.node()?;
    r.finish()?;
    Ok(node)
}

/// Encodes the message body: kind tag plus fields, without the length prefix.
pub fn encode_body(m: &Message) -> Vec<u8> {
    let mut buf = Vec::new();
    let mut w = Writer(&mut buf);
    match m {
        Message::JobAssign { job, budget, prune } => {
            w.u8(tag::JOB_ASSIGN);
            w.budget(budget);
            w.prune(*prune);
            w.node(job);
        }
        Message::JobResult(res) => {
            w.u8(tag::JOB_RESULT);
            w.u64(res.count);
            w.u64(res.unexplored_emitted);
            match &res.status {
                JobStatus::Ok => w.u8(0),
                JobStatus::Failed(msg) => {
                    w.u8(1);
                    w.string(msg);
                }
                JobStatus::EmergencyStop(msg) => {
                    w.u8(2);
                    w.string(msg);
                }
            }
        }
        Message::UnexploredBatch(nodes) => {
            w.u8(tag::UNEXPLORED_BATCH);
            w.len(nodes.len());
            for n in nodes {
                w.node(n);
            }
        }
        Message::OutputChunk { stream, block, bytes } => {
            w.u8(tag::OUTPUT_CHUNK);
            w.u8(match stream {
                StreamId::Out => 0,
                StreamId::Err => 1,
            });
            w.u8(*block as u8);
            w.bytes(bytes);
        }
        Message::SharedDataStub(blob) => {
            w.u8(tag::SHARED_DATA);
            w.bytes(blob);
        }
        Message::CheckpointAck => w.u8(tag::CHECKPOINT_ACK),
        Message::CleanStopRequest => w.u8(tag::CLEAN_STOP),
        Message::Terminate => w.u8(tag::TERMINATE),
        Message::Init {
            app,
            args,
            input,
            maxbuf,
        } => {
            w.u8(tag::INIT);
            w.string(app);
            w.len(args.len());
            for a in args {
                w.string(a);
            }
            w.bytes(input);
            w.u64(*maxbuf as u64);
        }
    }
    buf
}

pub fn decode_body(buf: &[u8]) -> Result<Message, WireError> {
    let mut r = Reader::new(buf);
    let m = match r.u8("kind tag")? {
        tag::JOB_ASSIGN => {
            let budget = r.budget()?;
            let prune = r.prune()?;
            let job = r.node()?;
            Message::JobAssign { job, budget, prune }
        }
        tag::JOB_RESULT => {
            let count = r.u64("count")?;
            let unexplored_emitted = r.u64("unexplored count")?;
            let status = match r.u8("job status")? {
                0 => JobStatus::Ok,
                1 => JobStatus::Failed(r.string("failure message")?),
                2 => JobStatus::EmergencyStop(r.string("stop message")?),
                v => {
                    return Err(WireError::Invalid {
                        what: "job status",
                        value: v as u64,
                    })
                }
            };
            Message::JobResult(JobResult {
                count,
                unexplored_emitted,
                status,
            })
        }
        tag::UNEXPLORED_BATCH => {
            // every node needs at least 4 * 4 + 8 + 1 bytes
            let n = r.count(25, "batch size")?;
            let nodes = (0..n).map(|_| r.node()).collect::<Result<_, _>>()?;
            Message::UnexploredBatch(nodes)
        }
        tag::OUTPUT_CHUNK => {
            let stream = match r.u8("stream id")? {
                0 => StreamId::Out,
                1 => StreamId::Err,
                v => {
                    return Err(WireError::Invalid {
                        what: "stream id",
                        value: v as u64,
                    })
                }
            };
            let block = r.flag("block flag")?;
            let bytes = r.bytes("chunk bytes")?;
            Message::OutputChunk { stream, block, bytes }
        }
        tag::SHARED_DATA => Message::SharedDataStub(r.bytes("shared data")?),
        tag::CHECKPOINT_ACK => Message::CheckpointAck,
        tag::CLEAN_STOP => Message::CleanStopRequest,
        tag::TERMINATE => Message::Terminate,
        tag::INIT => {
            let app = r.string("application id")?;
            let n = r.count(4, "argument count")?;
            let args = (0..n).map(|_| r.string("argument")).collect::<Result<_, _>>()?;
            let input = r.bytes("input blob")?;
            let maxbuf = r.u64("maxbuf")? as usize;
            Message::Init {
                app,
                args,
                input,
                maxbuf,
            }
        }
        t => return Err(WireError::UnknownKind(t)),
    };
    r.finish()?;
    Ok(m)
}

/// Full frame: length prefix plus body.
pub fn encode_frame(m: &Message) -> Vec<u8> {
    let body = encode_body(m);
    let mut out = Vec::with_capacity(body.len() + 4);
    out.extend_from_slice(&(body.len() as u32).to_le_bytes());
    out.extend_from_slice(&body);
    out
}

pub fn write_frame(w: &mut impl Write, m: &Message) -> Result<(), WireError> {
    w.write_all(&encode_frame(m))?;
    Ok(())
}

/// Reads one frame. `Ok(None)` signals a clean end of stream before any
/// byte of a new frame.
pub fn read_frame(r: &mut impl Read) -> Result<Option<Message>, WireError> {
    let mut len = [0u8; 4];
    let mut got = 0;
    while got < 4 {
        match r.read(&mut len[got..]) {
            Ok(0) if got == 0 => return Ok(None),
            Ok(0) => return Err(WireError::Truncated("frame length")),
            Ok(n) => got += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    let len = u32::from_le_bytes(len) as usize;
    if len > MAX_FRAME {
        return Err(WireError::TooLarge(len));
    }
    let mut body = vec![0u8; len];
    r.read_exact(&mut body).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => WireError::Truncated("frame body"),
        _ => WireError::Io(e),
    })?;
    decode_body(&body).map(Some)
}
