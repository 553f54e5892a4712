//! Checkpoint files.
//!
//! ```text
//! mts-checkpoint 1
//! maxd 2            (or "inf")
//! maxnodes 5000
//! scale 40
//! lmin 1
//! lmax 3
//! maxbuf 1048576
//! app topsort
//! appargs <k>       followed by k lines, one token each
//! input <len>       followed by len raw bytes and a newline
//! nodes <n>
//! jobs_created <n>
//! shared <len>      followed by one line of hex
//! joblist <k>       followed by k lines, each a hex-encoded node record
//! ```

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use thiserror::Error;

use super::Params;
use crate::node::NodeRecord;
use crate::transport::wire::{decode_node, encode_node};

pub const HEADER: &str = "mts-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("not a checkpoint file (header {0:?})")]
    BadHeader(String),
    #[error("unsupported checkpoint version {0} (expected {VERSION})")]
    Version(String),
    #[error("checkpoint truncated while reading {0}")]
    Truncated(&'static str),
    #[error("malformed checkpoint at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("cannot store application argument {0:?}")]
    BadArgument(String),
}

/// Everything needed to resume a stopped run.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    /// Numeric parameters only; file paths are not stored.
    pub params: Params,
    pub app: String,
    pub args: Vec<String>,
    pub input: Vec<u8>,
    /// Nodes output so far, root included.
    pub nodes: u64,
    pub jobs_created: u64,
    pub shared: Vec<u8>,
    pub jobs: Vec<NodeRecord>,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Result<Vec<u8>, CheckpointError> {
        let p = &self.params;
        let mut s = format!("{HEADER} {VERSION}\n");
        match p.max_depth {
            Some(d) => s += &format!("maxd {d}\n"),
            None => s += "maxd inf\n",
        }
        s += &format!(
            "maxnodes {}\nscale {}\nlmin {}\nlmax {}\nmaxbuf {}\n",
            p.max_nodes, p.scale, p.lmin, p.lmax, p.maxbuf
        );
        if self.app.is_empty() || self.app.contains(char::is_whitespace) {
            return Err(CheckpointError::BadArgument(self.app.clone()));
        }
        s += &format!("app {}\nappargs {}\n", self.app, self.args.len());
        for a in &self.args {
            if a.contains('\n') {
                return Err(CheckpointError::BadArgument(a.clone()));
            }
            s += a;
            s.push('\n');
        }
        s += &format!("input {}\n", self.input.len());
        let mut out = s.into_bytes();
        out.extend_from_slice(&self.input);
        let mut s = String::from("\n");
        s += &format!("nodes {}\njobs_created {}\n", self.nodes, self.jobs_created);
        s += &format!("shared {}\n{}\n", self.shared.len(), hex::encode(&self.shared));
        s += &format!("joblist {}\n", self.jobs.len());
        for j in &self.jobs {
            s += &hex::encode(encode_node(j));
            s.push('\n');
        }
        out.extend_from_slice(s.as_bytes());
        Ok(out)
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self, CheckpointError> {
        let mut r = Reader { data, pos: 0, line: 0 };
        let header = r.line("header")?;
        let mut parts = header.split(' ');
        if parts.next() != Some(HEADER) {
            return Err(CheckpointError::BadHeader(header.chars().take(40).collect()));
        }
        let version = parts.next().unwrap_or("");
        if version != VERSION.to_string() || parts.next().is_some() {
            return Err(CheckpointError::Version(version.to_string()));
        }
        let maxd = r.field("maxd")?;
        let max_depth = if maxd == "inf" { None } else { Some(r.number(&maxd)?) };
        let mut params = Params {
            max_depth,
            ..Params::default()
        };
        params.max_nodes = r.numeric_field("maxnodes")?;
        params.scale = r.numeric_field("scale")?;
        params.lmin = r.numeric_field("lmin")?;
        params.lmax = r.numeric_field("lmax")?;
        params.maxbuf = r.numeric_field("maxbuf")? as usize;
        params.validate().map_err(|e| r.malformed(e.to_string()))?;
        let app = r.field("app")?;
        let nargs = r.numeric_field("appargs")?;
        let mut args = Vec::new();
        for _ in 0..nargs {
            args.push(r.line("application arguments")?);
        }
        let len = r.numeric_field("input")? as usize;
        let input = r.take(len, "input")?.to_vec();
        if !r.line("input")?.is_empty() {
            return Err(r.malformed("input longer than its stated length".into()));
        }
        let nodes = r.numeric_field("nodes")?;
        let jobs_created = r.numeric_field("jobs_created")?;
        let shared_len = r.numeric_field("shared")? as usize;
        let shared = r.hex_line("shared data")?;
        if shared.len() != shared_len {
            return Err(r.malformed(format!("shared data is {} bytes, expected {shared_len}", shared.len())));
        }
        let njobs = r.numeric_field("joblist")?;
        let mut jobs = Vec::new();
        for _ in 0..njobs {
            let bytes = r.hex_line("job list")?;
            jobs.push(decode_node(&bytes).map_err(|e| r.malformed(e.to_string()))?);
        }
        if r.pos != data.len() {
            return Err(r.malformed("unexpected data after job list".into()));
        }
        if (jobs.len() as u64) > jobs_created {
            return Err(r.malformed("job list longer than jobs_created".into()));
        }
        Ok(Checkpoint {
            params,
            app,
            args,
            input,
            nodes,
            jobs_created,
            shared,
            jobs,
        })
    }

    /// Writes via a temporary file and rename, so an existing checkpoint is
    /// never left half-written.
    pub fn write(&self, path: &Path) -> Result<(), CheckpointError> {
        let bytes = self.to_bytes()?;
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        let tmp = std::path::PathBuf::from(tmp);
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&bytes)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, CheckpointError> {
        Checkpoint::from_bytes(&fs::read(path)?)
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
    line: usize,
}

impl Reader<'_> {
    fn malformed(&self, reason: String) -> CheckpointError {
        CheckpointError::Malformed {
            line: self.line,
            reason,
        }
    }

    fn line(&mut self, what: &'static str) -> Result<String, CheckpointError> {
        let rest = &self.data[self.pos..];
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or(CheckpointError::Truncated(what))?;
        self.pos += end + 1;
        self.line += 1;
        String::from_utf8(rest[..end].to_vec()).map_err(|_| self.malformed("invalid utf-8".into()))
    }

    fn take(&mut self, len: usize, what: &'static str) -> Result<&[u8], CheckpointError> {
        if self.data.len() - self.pos < len {
            return Err(CheckpointError::Truncated(what));
        }
        let s = &self.data[self.pos..self.pos + len];
        self.line += s.iter().filter(|&&b| b == b'\n').count();
        self.pos += len;
        Ok(s)
    }

    fn field(&mut self, key: &'static str) -> Result<String, CheckpointError> {
        let l = self.line(key)?;
        match l.split_once(' ') {
            Some((k, v)) if k == key => Ok(v.to_string()),
            _ => Err(self.malformed(format!("expected \"{key} ...\", found {l:?}"))),
        }
    }

    fn number(&self, s: &str) -> Result<u64, CheckpointError> {
        s.parse()
            .map_err(|_| self.malformed(format!("expected a number, found {s:?}")))
    }

    fn numeric_field(&mut self, key: &'static str) -> Result<u64, CheckpointError> {
        let v = self.field(key)?;
        self.number(&v)
    }

    fn hex_line(&mut self, what: &'static str) -> Result<Vec<u8>, CheckpointError> {
        let l = self.line(what)?;
        hex::decode(&l).map_err(|e| self.malformed(format!("bad hex in {what}: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(jobs: usize) -> Checkpoint {
        Checkpoint {
            params: Params {
                max_depth: None,
                max_nodes: 13,
                ..Params::default()
            },
            app: "topsort".into(),
            args: vec!["-prune".into(), "0".into()],
            input: b"3 1\n1 2\n".to_vec(),
            nodes: 7,
            jobs_created: 9,
            shared: vec![1, 2, 255],
            jobs: (0..jobs)
                .map(|i| NodeRecord::from_longs(vec![i as i64, 2, 3]).with_depth(i as u64 + 1))
                .collect(),
        }
    }

    #[test]
    fn round_trip() {
        for k in [0, 3] {
            let c = sample(k);
            let bytes = c.to_bytes().unwrap();
            let back = Checkpoint::from_bytes(&bytes).unwrap();
            assert_eq!(back, c);
            assert_eq!(back.to_bytes().unwrap(), bytes);
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck");
        let c = sample(2);
        c.write(&path).unwrap();
        assert_eq!(Checkpoint::read(&path).unwrap(), c);
        assert!(std::fs::read_to_string(&path)
            .unwrap()
            .starts_with("mts-checkpoint 1\nmaxd inf\n"));
    }

    #[test]
    fn distinct_errors() {
        let good = sample(2).to_bytes().unwrap();
        assert!(matches!(
            Checkpoint::from_bytes(b"hello\n"),
            Err(CheckpointError::BadHeader(_))
        ));
        assert!(matches!(
            Checkpoint::from_bytes(b"mts-checkpoint 2\n"),
            Err(CheckpointError::Version(v)) if v == "2"
        ));
        assert!(matches!(
            Checkpoint::from_bytes(&good[..good.len() - 3]),
            Err(CheckpointError::Truncated(_))
        ));
        let text = String::from_utf8(good.clone()).unwrap();
        let bad = text.replace("scale 40", "scale x");
        assert!(matches!(
            Checkpoint::from_bytes(bad.as_bytes()),
            Err(CheckpointError::Malformed { line: 4, .. })
        ));
        let bad = text.replacen("joblist 2", "joblist 1", 1);
        assert!(matches!(
            Checkpoint::from_bytes(bad.as_bytes()),
            Err(CheckpointError::Malformed { .. })
        ));
    }

    #[test]
    fn raw_input_may_contain_anything() {
        let mut c = sample(1);
        c.input = b"nodes 3\n\njoblist 9\n".to_vec();
        assert_eq!(Checkpoint::from_bytes(&c.to_bytes().unwrap()).unwrap(), c);
    }
}
