//! Master/worker message vocabulary and the backends that deliver it.
//!
//! Every backend gives reliable FIFO delivery per (master, worker) pair and
//! a single multiplexed receive on the master side. Three backends exist:
//!
//! * [`deterministic`]: master and workers are cooperatively scheduled on
//!   the calling thread by a seeded scheduler, so transcripts replay exactly.
//! * [`threads`]: one OS thread per worker, channels in between.
//! * [`process`]: one child process per worker, speaking [`wire`] frames over
//!   its stdin/stdout.

pub mod deterministic;
pub mod process;
pub mod threads;
pub mod wire;

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use thiserror::Error;

use crate::engine::{Budget, PruneMode};
use crate::node::NodeRecord;

/// Zero-based worker index.
pub type PeerId = usize;

/// Default cap on output bytes a worker may have in flight to the master.
pub const DEFAULT_INFLIGHT_CAP: usize = 16 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamId {
    Out,
    Err,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JobStatus {
    Ok,
    /// Application failure; the run is aborted.
    Failed(String),
    /// The application requested an immediate abort of the whole run.
    EmergencyStop(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobResult {
    pub count: u64,
    pub unexplored_emitted: u64,
    pub status: JobStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    /// master -> worker: explore the subtree below `job`.
    JobAssign {
        job: NodeRecord,
        budget: Budget,
        prune: PruneMode,
    },
    /// worker -> master: the job is finished; always the job's last message.
    JobResult(JobResult),
    /// worker -> master: roots of subtrees left unexplored by the current job.
    UnexploredBatch(Vec<NodeRecord>),
    /// worker -> master: application output.
    OutputChunk {
        stream: StreamId,
        /// The chunk is a complete output block and must not be interleaved.
        block: bool,
        bytes: Vec<u8>,
    },
    /// Opaque shared data, carried but never interpreted.
    SharedDataStub(Vec<u8>),
    /// master -> worker: a checkpoint has been written; shutdown follows.
    CheckpointAck,
    /// worker -> master: the application asked for a clean stop.
    CleanStopRequest,
    /// master -> worker: exit.
    Terminate,
    /// master -> worker process: application setup, sent once before any job.
    Init {
        app: String,
        args: Vec<String>,
        input: Vec<u8>,
        maxbuf: usize,
    },
}

impl Message {
    pub fn kind(&self) -> &'static str {
        match self {
            Message::JobAssign { .. } => "JobAssign",
            Message::JobResult(_) => "JobResult",
            Message::UnexploredBatch(_) => "UnexploredBatch",
            Message::OutputChunk { .. } => "OutputChunk",
            Message::SharedDataStub(_) => "SharedDataStub",
            Message::CheckpointAck => "CheckpointAck",
            Message::CleanStopRequest => "CleanStopRequest",
            Message::Terminate => "Terminate",
            Message::Init { .. } => "Init",
        }
    }

    pub(crate) fn output_bytes(&self) -> usize {
        match self {
            Message::OutputChunk { bytes, .. } => bytes.len(),
            _ => 0,
        }
    }
}

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("channel to worker {0} is closed")]
    Closed(PeerId),
    #[error("no such worker {0}")]
    UnknownPeer(PeerId),
    #[error("all worker channels are closed")]
    AllClosed,
    #[error("worker {peer}: {source}")]
    Wire {
        peer: PeerId,
        #[source]
        source: wire::WireError,
    },
    #[error("failed to launch worker: {0}")]
    Spawn(#[source] std::io::Error),
    #[error("worker {peer} failed: {reason}")]
    WorkerFailed { peer: PeerId, reason: String },
}

/// Outcome of a receive.
#[derive(Debug)]
pub enum Received {
    Message(PeerId, Message),
    Timeout,
}

/// The master's view of a backend.
pub trait Transport {
    fn worker_count(&self) -> usize;

    /// Enqueues `msg` for worker `to`.
    fn send(&mut self, to: PeerId, msg: Message) -> Result<(), TransportError>;

    /// Next message from any worker, or `Timeout` if none arrives within
    /// `timeout` (`None` waits indefinitely).
    fn receive(&mut self, timeout: Option<Duration>) -> Result<Received, TransportError>;

    /// Waits for workers to exit after `Terminate`.
    fn shutdown(&mut self) -> Result<(), TransportError> {
        Ok(())
    }
}

/// Byte credit limiting how much output one worker may have queued at the
/// master. A sender blocks while the cap would be exceeded, unless nothing
/// is in flight (so a single oversized chunk still goes through).
#[derive(Debug)]
pub struct FlowControl {
    cap: usize,
    inflight: Mutex<usize>,
    drained: Condvar,
}

impl FlowControl {
    pub fn new(cap: usize) -> Self {
        FlowControl {
            cap,
            inflight: Mutex::new(0),
            drained: Condvar::new(),
        }
    }

    pub fn acquire(&self, bytes: usize) {
        if bytes == 0 {
            return;
        }
        let mut cur = self.inflight.lock().unwrap();
        while *cur > 0 && *cur + bytes > self.cap {
            cur = self.drained.wait(cur).unwrap();
        }
        *cur += bytes;
    }

    pub fn release(&self, bytes: usize) {
        if bytes == 0 {
            return;
        }
        let mut cur = self.inflight.lock().unwrap();
        *cur = cur.saturating_sub(bytes);
        self.drained.notify_all();
    }

    pub fn inflight(&self) -> usize {
        *self.inflight.lock().unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;
    use std::thread;

    #[test]
    fn flow_control_blocks_until_released() {
        let fc = Arc::new(FlowControl::new(10));
        fc.acquire(8);
        let fc2 = Arc::clone(&fc);
        let h = thread::spawn(move || {
            fc2.acquire(5);
            fc2.inflight()
        });
        thread::sleep(Duration::from_millis(20));
        assert_eq!(fc.inflight(), 8);
        fc.release(8);
        assert_eq!(h.join().unwrap(), 5);
    }

    #[test]
    fn oversized_chunk_passes_when_idle() {
        let fc = FlowControl::new(4);
        fc.acquire(100);
        assert_eq!(fc.inflight(), 100);
        fc.release(100);
        assert_eq!(fc.inflight(), 0);
    }
}
