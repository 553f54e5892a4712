//! Worker side: runs one budgeted job at a time and reports back.

use std::cell::RefCell;
use std::io::{self, Write};

use log::debug;
use thiserror::Error;

use crate::app::{AppError, Application};
use crate::engine::{budgeted_search, Budget, Flow, PruneMode};
use crate::node::NodeRecord;
use crate::output::{ChunkSink, Output, RunMode, StopRequest, WriterSink};
use crate::transport::{JobResult, JobStatus, Message, StreamId, TransportError};

/// Unexplored nodes are shipped in batches of this size.
pub const UNEXPLORED_BATCH: usize = 256;

/// Whether a worker keeps serving after a message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorkerControl {
    Continue,
    Exit,
}

enum Interrupt {
    Emergency(String),
    Transport,
}

struct Outbox<'s> {
    send: &'s mut dyn FnMut(Message) -> Result<(), TransportError>,
    failed: Option<TransportError>,
}

impl Outbox<'_> {
    fn send(&mut self, m: Message) {
        if self.failed.is_none() {
            if let Err(e) = (self.send)(m) {
                self.failed = Some(e);
            }
        }
    }
}

struct OutboxSink<'c, 's>(&'c RefCell<Outbox<'s>>);

impl ChunkSink for OutboxSink<'_, '_> {
    fn chunk(&mut self, stream: StreamId, block: bool, bytes: Vec<u8>) -> io::Result<()> {
        let mut ob = self.0.borrow_mut();
        ob.send(Message::OutputChunk { stream, block, bytes });
        match &ob.failed {
            Some(e) => Err(io::Error::new(io::ErrorKind::BrokenPipe, e.to_string())),
            None => Ok(()),
        }
    }
}

/// A worker owns one application instance, built once from the input blob.
pub struct Worker<A: Application> {
    app: A,
    maxbuf: usize,
}

impl<A: Application> Worker<A> {
    pub fn new(app: A, maxbuf: usize) -> Self {
        Worker { app, maxbuf }
    }

    pub fn app(&self) -> &A {
        &self.app
    }

    /// Handles one message from the master, sending any replies via `send`.
    pub fn handle(
        &mut self,
        msg: Message,
        send: &mut dyn FnMut(Message) -> Result<(), TransportError>,
    ) -> Result<WorkerControl, TransportError> {
        match msg {
            Message::JobAssign { job, budget, prune } => {
                self.run_job(&job, budget, prune, send)?;
                Ok(WorkerControl::Continue)
            }
            Message::Terminate => Ok(WorkerControl::Exit),
            Message::CheckpointAck => {
                debug!("master wrote a checkpoint");
                Ok(WorkerControl::Continue)
            }
            other => {
                debug!("worker ignoring unexpected {}", other.kind());
                Ok(WorkerControl::Continue)
            }
        }
    }

    /// Explores the subtree below `job` within `budget`.
    ///
    /// Output and unexplored nodes are sent as they are produced; the final
    /// message is always the job's `JobResult`, which is also returned.
    pub fn run_job(
        &self,
        job: &NodeRecord,
        budget: Budget,
        prune: PruneMode,
        send: &mut dyn FnMut(Message) -> Result<(), TransportError>,
    ) -> Result<JobResult, TransportError> {
        let outbox = RefCell::new(Outbox { send, failed: None });
        let mut sink = OutboxSink(&outbox);
        let mut output = Output::new(RunMode::Parallel, self.maxbuf, &mut sink);

        let result = match self.app.decode(job) {
            Err(e) => Err(e.to_string()),
            Ok(start) => {
                let base = job.depth;
                let mut batch = Vec::new();
                let mut stop_sent = false;
                let res = budgeted_search(&self.app, &start, budget, prune, |v, d, unexplored| {
                    let depth = base + d;
                    self.app.put_output(v, depth, unexplored, &mut output);
                    if unexplored {
                        batch.push(self.app.encode(v).with_depth(depth).with_unexplored(true));
                        if batch.len() >= UNEXPLORED_BATCH {
                            let full = std::mem::take(&mut batch);
                            outbox.borrow_mut().send(Message::UnexploredBatch(full));
                        }
                    }
                    if outbox.borrow().failed.is_some() {
                        return Err(Interrupt::Transport);
                    }
                    match output.take_stop() {
                        Some(StopRequest::Emergency(reason)) => Err(Interrupt::Emergency(reason)),
                        Some(StopRequest::Clean) if !stop_sent => {
                            stop_sent = true;
                            output.flush();
                            outbox.borrow_mut().send(Message::CleanStopRequest);
                            Ok(Flow::Exhaust)
                        }
                        _ => Ok(Flow::Continue),
                    }
                });
                if !batch.is_empty() {
                    outbox.borrow_mut().send(Message::UnexploredBatch(batch));
                }
                match res {
                    Ok(r) => Ok(JobResult {
                        count: r.count,
                        unexplored_emitted: r.unexplored_emitted,
                        status: JobStatus::Ok,
                    }),
                    Err(Interrupt::Emergency(reason)) => Ok(JobResult {
                        count: 0,
                        unexplored_emitted: 0,
                        status: JobStatus::EmergencyStop(reason),
                    }),
                    Err(Interrupt::Transport) => Ok(JobResult {
                        count: 0,
                        unexplored_emitted: 0,
                        status: JobStatus::Failed("transport failure".into()),
                    }),
                }
            }
        };
        let result = result.unwrap_or_else(|msg| {
            use std::fmt::Write;
            let _ = writeln!(output.err(), "{msg}");
            JobResult {
                count: 0,
                unexplored_emitted: 0,
                status: JobStatus::Failed(msg),
            }
        });
        let _ = output.finish();
        let mut outbox = outbox.into_inner();
        outbox.send(Message::JobResult(result.clone()));
        match outbox.failed {
            Some(e) => Err(e),
            None => Ok(result),
        }
    }
}

#[derive(Debug, Error)]
pub enum StandaloneError {
    #[error(transparent)]
    App(#[from] AppError),
    #[error("emergency stop: {0}")]
    Emergency(String),
    #[error("output error: {0}")]
    Io(#[from] io::Error),
}

/// Outcome of a standalone run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StandaloneSummary {
    /// Nodes output, root included.
    pub total_nodes: u64,
    pub unexplored: u64,
    pub clean_stop: bool,
}

/// Single-process run: print the root, then run one budgeted search from it,
/// marking unexplored nodes in the output. The application's summary line is
/// printed only if nothing was left unexplored.
pub fn run_standalone<A: Application>(
    app: &A,
    budget: Budget,
    maxbuf: usize,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<StandaloneSummary, StandaloneError> {
    let mut sink = WriterSink { out, err };
    let mut output = Output::new(RunMode::Standalone, maxbuf, &mut sink);
    let root = app.root();
    app.put_output(&root, 0, false, &mut output);
    let mut clean_stop = matches!(output.take_stop(), Some(StopRequest::Clean));
    let res = budgeted_search(app, &root, budget, app.prune(), |v, d, unexplored| {
        app.put_output(v, d, unexplored, &mut output);
        match output.take_stop() {
            Some(StopRequest::Emergency(reason)) => Err(reason),
            Some(StopRequest::Clean) => {
                clean_stop = true;
                Ok(Flow::Exhaust)
            }
            None if clean_stop => Ok(Flow::Exhaust),
            None => Ok(Flow::Continue),
        }
    });
    let res = match res {
        Ok(r) => r,
        Err(reason) => {
            let _ = output.finish();
            return Err(StandaloneError::Emergency(reason));
        }
    };
    let total = res.count + 1;
    let complete = res.unexplored_emitted == 0 && !clean_stop;
    if let Some(line) = app.summary(total).filter(|_| complete) {
        output.write_bytes(format!("{line}\n").as_bytes());
    }
    output.finish()?;
    Ok(StandaloneSummary {
        total_nodes: total,
        unexplored: res.unexplored_emitted,
        clean_stop,
    })
}
