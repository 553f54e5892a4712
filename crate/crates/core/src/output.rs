//! Buffered application output, output blocks and stop requests.

use std::fmt;
use std::io::{self, Write};

use thiserror::Error;

use crate::transport::StreamId;

/// Where application output ends up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    /// Single process, output goes straight to the caller's writers.
    Standalone,
    /// Output travels to the master as chunks.
    Parallel,
}

/// Receives flushed output.
pub trait ChunkSink {
    fn chunk(&mut self, stream: StreamId, block: bool, bytes: Vec<u8>) -> io::Result<()>;
}

/// Sink writing straight to a pair of writers.
pub struct WriterSink<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

impl ChunkSink for WriterSink<'_> {
    fn chunk(&mut self, stream: StreamId, _block: bool, bytes: Vec<u8>) -> io::Result<()> {
        match stream {
            StreamId::Out => self.out.write_all(&bytes),
            StreamId::Err => self.err.write_all(&bytes),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StopRequest {
    Clean,
    Emergency(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BlockError {
    #[error("output block opened while another block is open")]
    Nested,
}

/// Appends `bytes` to `buf` and hands back the whole buffer when it has
/// grown past `maxbuf` and ends in a newline.
pub fn buffer_output(buf: &mut Vec<u8>, bytes: &[u8], maxbuf: usize) -> Option<Vec<u8>> {
    buf.extend_from_slice(bytes);
    if buf.len() > maxbuf && buf.last() == Some(&b'\n') {
        Some(std::mem::take(buf))
    } else {
        None
    }
}

/// Output context handed to applications while they print nodes.
///
/// Implements [`fmt::Write`] for the output stream; [`Output::err`] gives the
/// error stream. Sink failures are sticky and surface in [`Output::finish`].
pub struct Output<'a> {
    mode: RunMode,
    maxbuf: usize,
    out: Vec<u8>,
    err: Vec<u8>,
    in_block: bool,
    sink: &'a mut dyn ChunkSink,
    stop: Option<StopRequest>,
    failure: Option<io::Error>,
}

impl<'a> Output<'a> {
    pub fn new(mode: RunMode, maxbuf: usize, sink: &'a mut dyn ChunkSink) -> Self {
        Output {
            mode,
            maxbuf: maxbuf.max(1),
            out: Vec::new(),
            err: Vec::new(),
            in_block: false,
            sink,
            stop: None,
            failure: None,
        }
    }

    pub fn mode(&self) -> RunMode {
        self.mode
    }

    pub fn is_parallel(&self) -> bool {
        self.mode == RunMode::Parallel
    }

    pub fn write_bytes(&mut self, bytes: &[u8]) {
        if self.in_block {
            self.out.extend_from_slice(bytes);
        } else if let Some(chunk) = buffer_output(&mut self.out, bytes, self.maxbuf) {
            self.send(StreamId::Out, false, chunk);
        }
    }

    pub fn write_err(&mut self, bytes: &[u8]) {
        if let Some(chunk) = buffer_output(&mut self.err, bytes, self.maxbuf) {
            self.send(StreamId::Err, false, chunk);
        }
    }

    /// Writer for the error stream.
    pub fn err(&mut self) -> ErrStream<'_, 'a> {
        ErrStream(self)
    }

    /// Opens an output block: everything written to the output stream until
    /// [`Output::end_block`] (or the end of the job) is printed contiguously.
    pub fn begin_block(&mut self) -> Result<(), BlockError> {
        if self.in_block {
            return Err(BlockError::Nested);
        }
        self.flush_stream(StreamId::Out);
        self.in_block = true;
        Ok(())
    }

    pub fn end_block(&mut self) {
        if !self.in_block {
            return;
        }
        self.in_block = false;
        if !self.out.is_empty() {
            let chunk = std::mem::take(&mut self.out);
            self.send(StreamId::Out, true, chunk);
        }
    }

    pub fn in_block(&self) -> bool {
        self.in_block
    }

    /// Asks for the whole run to wind down cleanly. The current job hands
    /// its remaining subtrees back to the master, which checkpoints and
    /// exits.
    pub fn clean_stop(&mut self) {
        if self.stop.is_none() {
            self.stop = Some(StopRequest::Clean);
        }
    }

    /// Aborts the whole run with a diagnostic.
    pub fn emergency_stop(&mut self, reason: impl Into<String>) {
        self.stop = Some(StopRequest::Emergency(reason.into()));
    }

    pub fn take_stop(&mut self) -> Option<StopRequest> {
        self.stop.take()
    }

    /// Flushes both streams regardless of size.
    pub fn flush(&mut self) {
        if !self.in_block {
            self.flush_stream(StreamId::Out);
        }
        self.flush_stream(StreamId::Err);
    }

    /// Closes an open block and flushes everything.
    pub fn finish(mut self) -> io::Result<()> {
        self.end_block();
        self.flush();
        match self.failure.take() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// The first sink error seen so far, if any.
    pub fn failure(&self) -> Option<&io::Error> {
        self.failure.as_ref()
    }

    fn flush_stream(&mut self, stream: StreamId) {
        let buf = match stream {
            StreamId::Out => &mut self.out,
            StreamId::Err => &mut self.err,
        };
        if !buf.is_empty() {
            let chunk = std::mem::take(buf);
            self.send(stream, false, chunk);
        }
    }

    fn send(&mut self, stream: StreamId, block: bool, bytes: Vec<u8>) {
        if self.failure.is_some() {
            return;
        }
        if let Err(e) = self.sink.chunk(stream, block, bytes) {
            self.failure = Some(e);
        }
    }
}

impl fmt::Write for Output<'_> {
    fn write_str(&mut self, s: &str) -> fmt::Result {
        self.write_bytes(s.as_bytes());
        Ok(())
    }
}

pub struct ErrStream<'o, 'a>(&'o mut Output<'a>);

impl fmt::Write for ErrStream<'_, '_> {
    fn write_str(&mut self, s: &str) -> fmt::Result {
        self.0.write_err(s.as_bytes());
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fmt::Write as _;

    #[derive(Default)]
    struct Collect(Vec<(StreamId, bool, Vec<u8>)>);

    impl ChunkSink for Collect {
        fn chunk(&mut self, s: StreamId, b: bool, bytes: Vec<u8>) -> io::Result<()> {
            self.0.push((s, b, bytes));
            Ok(())
        }
    }

    #[test]
    fn flush_rule() {
        let mut buf = Vec::new();
        assert_eq!(buffer_output(&mut buf, b"abc\n", 8), None);
        assert_eq!(
            buffer_output(&mut buf, b"defgh\n", 8).as_deref(),
            Some(&b"abc\ndefgh\n"[..])
        );
        assert!(buf.is_empty());
        assert_eq!(buffer_output(&mut buf, b"abcdefghij", 8), None);
        assert_eq!(buf, b"abcdefghij");
        assert!(buffer_output(&mut buf, b"\n", 8).is_some());
    }

    #[test]
    fn finish_flushes_remaining_output() {
        let mut sink = Collect::default();
        let mut out = Output::new(RunMode::Parallel, 8, &mut sink);
        write!(out, "abc").unwrap();
        writeln!(out.err(), "oops").unwrap();
        out.finish().unwrap();
        assert_eq!(
            sink.0,
            vec![
                (StreamId::Out, false, b"abc".to_vec()),
                (StreamId::Err, false, b"oops\n".to_vec())
            ]
        );
    }

    #[test]
    fn blocks_are_single_chunks() {
        let mut sink = Collect::default();
        let mut out = Output::new(RunMode::Parallel, 2, &mut sink);
        out.write_bytes(b"x");
        out.begin_block().unwrap();
        assert_eq!(out.begin_block(), Err(BlockError::Nested));
        for line in ["one\n", "two\n", "three\n"] {
            out.write_bytes(line.as_bytes());
        }
        out.end_block();
        out.write_bytes(b"after\n");
        out.finish().unwrap();
        assert_eq!(
            sink.0,
            vec![
                (StreamId::Out, false, b"x".to_vec()),
                (StreamId::Out, true, b"one\ntwo\nthree\n".to_vec()),
                (StreamId::Out, false, b"after\n".to_vec()),
            ]
        );
    }

    #[test]
    fn empty_and_unclosed_blocks() {
        let mut sink = Collect::default();
        let mut out = Output::new(RunMode::Parallel, 100, &mut sink);
        out.begin_block().unwrap();
        out.end_block();
        out.begin_block().unwrap();
        out.write_bytes(b"a\nb\n");
        out.finish().unwrap();
        assert_eq!(sink.0, vec![(StreamId::Out, true, b"a\nb\n".to_vec())]);
    }

    #[test]
    fn stop_requests() {
        let mut sink = Collect::default();
        let mut out = Output::new(RunMode::Standalone, 100, &mut sink);
        out.clean_stop();
        out.emergency_stop("bad state");
        assert_eq!(out.take_stop(), Some(StopRequest::Emergency("bad state".into())));
        assert_eq!(out.take_stop(), None);
    }
}
