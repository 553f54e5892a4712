use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::{Duration, Instant};

use log::{debug, warn};
use thiserror::Error;

use super::{next_budget, Checkpoint, CheckpointError, HistogramSample, JobList, Params};
use crate::app::Application;
use crate::output::{Output, RunMode, WriterSink};
use crate::transport::{JobStatus, Message, PeerId, Received, StreamId, Transport};

#[derive(Debug, Error)]
pub enum MasterError {
    #[error("writing output failed: {0}")]
    Output(#[from] io::Error),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}

/// How the run started.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum Start {
    Fresh,
    Restart(Checkpoint),
}

/// What a checkpoint needs to rebuild the application.
#[derive(Debug, Clone, Default)]
pub struct RunContext {
    pub app: String,
    pub args: Vec<String>,
    pub input: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Complete,
    /// Stop file or clean stop honored; a checkpoint was written if requested.
    Stopped,
    /// Emergency stop, worker failure or lost channel.
    Aborted(String),
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Complete => 0,
            Outcome::Aborted(_) => 2,
            Outcome::Stopped => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSummary {
    /// Nodes output over all runs so far, root included.
    pub total_nodes: u64,
    pub nodes_this_run: u64,
    /// Jobs completed in this run.
    pub jobs: u64,
    pub outcome: Outcome,
    pub checkpoint_written: bool,
}

/// Line-oriented instrumentation file that disables itself after the
/// first write error.
struct Recorder {
    name: &'static str,
    w: Option<BufWriter<File>>,
}

impl Recorder {
    fn open(name: &'static str, path: Option<&Path>) -> Self {
        let w = path.and_then(|p| match File::create(p) {
            Ok(f) => Some(BufWriter::new(f)),
            Err(e) => {
                warn!("cannot create {name} file {}: {e}; {name} disabled", p.display());
                None
            }
        });
        Recorder { name, w }
    }

    fn line(&mut self, s: &dyn std::fmt::Display) {
        if let Some(w) = &mut self.w {
            if let Err(e) = writeln!(w, "{s}") {
                warn!("writing {} file failed: {e}; {} disabled", self.name, self.name);
                self.w = None;
            }
        }
    }

    fn finish(&mut self) {
        if let Some(w) = &mut self.w {
            if let Err(e) = w.flush() {
                warn!("writing {} file failed: {e}", self.name);
            }
        }
    }
}

struct Histogram {
    rec: Recorder,
    started: Instant,
    interval: Duration,
    next: Duration,
    last_us: Option<u128>,
}

impl Histogram {
    fn sample(&mut self, jl: &JobList, busy: u64, force: bool) {
        if self.rec.w.is_none() {
            return;
        }
        let t = self.started.elapsed();
        if !force && t < self.next {
            return;
        }
        // column 1 must strictly increase at the printed precision
        let us = t.as_micros();
        if self.last_us.is_some_and(|l| us <= l) {
            return;
        }
        self.last_us = Some(us);
        while self.next <= t {
            self.next += self.interval;
        }
        self.rec.line(&HistogramSample {
            t: us as f64 / 1e6,
            busy,
            joblist: jl.jobs.len() as u64,
            owing: busy,
            reserved1: 0,
            reserved2: 0,
            total_jobs: jl.total_jobs_created,
        });
    }
}

/// Runs the master loop until the job list is exhausted, a stop is
/// honored, or the run is aborted.
///
/// Worker failures do not produce an `Err`: they end the run with
/// [`Outcome::Aborted`]. `Err` is reserved for failures writing the merged
/// output or the checkpoint.
pub fn run_master<A: Application>(
    app: &A,
    params: &Params,
    start: Start,
    ctx: &RunContext,
    transport: &mut dyn Transport,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<RunSummary, MasterError> {
    let workers = transport.worker_count();
    assert!(workers >= 1, "at least one worker is required");
    let started = Instant::now();
    let mut freq = Recorder::open("frequency", params.freq_path.as_deref());
    let mut hist = Histogram {
        rec: Recorder::open("histogram", params.hist_path.as_deref()),
        started,
        interval: params.hist_interval,
        next: params.hist_interval,
        last_us: None,
    };

    let mut jl = JobList::default();
    let mut shared = Vec::new();
    let prior_nodes;
    let mut nodes_this_run = 0u64;
    match start {
        Start::Fresh => {
            let root = app.root();
            let mut sink = WriterSink {
                out: &mut *out,
                err: &mut *err,
            };
            let mut o = Output::new(RunMode::Parallel, params.maxbuf, &mut sink);
            app.put_output(&root, 0, false, &mut o);
            o.finish()?;
            prior_nodes = 0;
            nodes_this_run = 1;
            jl.jobs.push(app.encode(&root).with_depth(0));
            jl.total_jobs_created = 1;
        }
        Start::Restart(ck) => {
            prior_nodes = ck.nodes;
            jl.total_jobs_created = ck.jobs_created;
            jl.jobs_done = ck.jobs_created - ck.jobs.len() as u64;
            jl.jobs = ck.jobs;
            shared = ck.shared;
        }
    }

    let mut idle: Vec<PeerId> = (0..workers).rev().collect();
    let mut jobs_completed = 0u64;
    let mut stopping = false;
    let mut abort: Option<String> = None;
    let mut last_poll: Option<Instant> = None;
    let tick = params.stop_poll_interval.min(params.hist_interval);

    loop {
        debug_assert!(jl.balanced(), "job conservation violated: {jl:?}");
        if !stopping && abort.is_none() {
            if let Some(p) = &params.stop_path {
                if last_poll.is_none_or(|t| t.elapsed() >= params.stop_poll_interval) {
                    last_poll = Some(Instant::now());
                    if p.exists() {
                        debug!("stop file {} found", p.display());
                        stopping = true;
                    }
                }
            }
        }
        if !stopping && abort.is_none() {
            while !jl.jobs.is_empty() {
                let Some(&w) = idle.last() else { break };
                let budget = next_budget(jl.jobs.len(), workers, params);
                let job = jl.jobs.pop().expect("non-empty job list");
                let msg = Message::JobAssign {
                    job,
                    budget,
                    prune: app.prune(),
                };
                if let Err(e) = transport.send(w, msg) {
                    abort = Some(e.to_string());
                    break;
                }
                idle.pop();
                jl.jobs_running += 1;
            }
        }
        if jl.jobs_running == 0 && (jl.jobs.is_empty() || stopping || abort.is_some()) {
            break;
        }
        if abort.is_some() {
            // outstanding jobs cannot be trusted once a worker has failed
            break;
        }

        match transport.receive(Some(tick)) {
            Ok(Received::Timeout) => {}
            Ok(Received::Message(peer, msg)) => match msg {
                Message::OutputChunk { stream, bytes, .. } => match stream {
                    StreamId::Out => out.write_all(&bytes)?,
                    StreamId::Err => err.write_all(&bytes)?,
                },
                Message::UnexploredBatch(batch) => {
                    jl.total_jobs_created += batch.len() as u64;
                    jl.jobs.extend(batch);
                }
                Message::JobResult(r) => {
                    jl.jobs_running -= 1;
                    jl.jobs_done += 1;
                    jobs_completed += 1;
                    idle.push(peer);
                    match r.status {
                        JobStatus::Ok => {
                            nodes_this_run += r.count;
                            freq.line(&r.count);
                        }
                        JobStatus::Failed(reason) => {
                            abort.get_or_insert(format!("worker {peer} failed: {reason}"));
                        }
                        JobStatus::EmergencyStop(reason) => {
                            abort.get_or_insert(format!("emergency stop: {reason}"));
                        }
                    }
                }
                Message::CleanStopRequest => {
                    debug!("worker {peer} requested a clean stop");
                    stopping = true;
                }
                Message::SharedDataStub(blob) => shared = blob,
                other => warn!("unexpected {} from worker {peer}", other.kind()),
            },
            Err(e) => {
                abort.get_or_insert(e.to_string());
            }
        }
        hist.sample(&jl, jl.jobs_running, false);
    }

    hist.sample(&jl, jl.jobs_running, true);
    hist.rec.finish();
    freq.finish();
    let total_nodes = prior_nodes + nodes_this_run;

    let mut checkpoint_written = false;
    let outcome = if let Some(reason) = abort {
        writeln!(err, "mts: run aborted: {reason}; output may be incomplete")?;
        Outcome::Aborted(reason)
    } else if stopping {
        if let Some(path) = &params.checkp_path {
            let ck = Checkpoint {
                params: params.numeric_only(),
                app: ctx.app.clone(),
                args: ctx.args.clone(),
                input: ctx.input.clone(),
                nodes: total_nodes,
                jobs_created: jl.total_jobs_created,
                shared,
                jobs: jl.jobs.clone(),
            };
            if let Err(e) = ck.write(path) {
                terminate_all(transport);
                return Err(e.into());
            }
            checkpoint_written = true;
            for w in 0..workers {
                let _ = transport.send(w, Message::CheckpointAck);
            }
        }
        Outcome::Stopped
    } else {
        if let Some(line) = app.summary(total_nodes) {
            writeln!(out, "{line}")?;
        }
        Outcome::Complete
    };
    out.flush()?;
    terminate_all(transport);
    if let Err(e) = transport.shutdown() {
        warn!("worker shutdown: {e}");
    }
    Ok(RunSummary {
        total_nodes,
        nodes_this_run,
        jobs: jobs_completed,
        outcome,
        checkpoint_written,
    })
}

fn terminate_all(transport: &mut dyn Transport) {
    for w in 0..transport.worker_count() {
        let _ = transport.send(w, Message::Terminate);
    }
}
