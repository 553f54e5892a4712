//! One OS thread per worker, connected by channels.

use std::panic::{self, AssertUnwindSafe};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Duration;

use log::warn;

use crate::app::Application;
use crate::transport::{FlowControl, JobResult, JobStatus, Message, PeerId, Received, Transport, TransportError};
use crate::worker::{Worker, WorkerControl};

pub struct Threads {
    senders: Vec<Option<Sender<Message>>>,
    rx: Receiver<(PeerId, Message)>,
    flow: Vec<Arc<FlowControl>>,
    handles: Vec<Option<JoinHandle<()>>>,
}

impl Threads {
    /// Starts one worker thread per application instance. Output in flight
    /// from each worker is capped at `inflight_cap` bytes.
    pub fn spawn<A: Application>(apps: Vec<A>, maxbuf: usize, inflight_cap: usize) -> Self {
        let (tx, rx) = mpsc::channel();
        let mut senders = Vec::new();
        let mut flow = Vec::new();
        let mut handles = Vec::new();
        for (id, app) in apps.into_iter().enumerate() {
            let (wtx, wrx) = mpsc::channel::<Message>();
            let fc = Arc::new(FlowControl::new(inflight_cap));
            let (tx, fc2) = (tx.clone(), Arc::clone(&fc));
            let h = thread::Builder::new()
                .name(format!("mts-worker-{id}"))
                .spawn(move || serve(id, Worker::new(app, maxbuf), wrx, tx, fc2))
                .expect("failed to spawn worker thread");
            senders.push(Some(wtx));
            flow.push(fc);
            handles.push(Some(h));
        }
        Threads {
            senders,
            rx,
            flow,
            handles,
        }
    }
}

fn serve<A: Application>(
    id: PeerId,
    mut worker: Worker<A>,
    rx: Receiver<Message>,
    tx: Sender<(PeerId, Message)>,
    fc: Arc<FlowControl>,
) {
    let mut send = |m: Message| {
        fc.acquire(m.output_bytes());
        tx.send((id, m)).map_err(|_| TransportError::Closed(id))
    };
    let outcome = panic::catch_unwind(AssertUnwindSafe(|| {
        while let Ok(msg) = rx.recv() {
            match worker.handle(msg, &mut send) {
                Ok(WorkerControl::Continue) => {}
                Ok(WorkerControl::Exit) | Err(_) => break,
            }
        }
    }));
    if let Err(payload) = outcome {
        let reason = payload
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| payload.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "unknown panic".into());
        warn!("worker {id} panicked: {reason}");
        let _ = tx.send((
            id,
            Message::JobResult(JobResult {
                count: 0,
                unexplored_emitted: 0,
                status: JobStatus::Failed(format!("worker panicked: {reason}")),
            }),
        ));
    }
}

impl Transport for Threads {
    fn worker_count(&self) -> usize {
        self.senders.len()
    }

    fn send(&mut self, to: PeerId, msg: Message) -> Result<(), TransportError> {
        let s = self.senders.get(to).ok_or(TransportError::UnknownPeer(to))?;
        let s = s.as_ref().ok_or(TransportError::Closed(to))?;
        let terminate = matches!(msg, Message::Terminate);
        s.send(msg).map_err(|_| TransportError::Closed(to))?;
        if terminate {
            self.senders[to] = None;
        }
        Ok(())
    }

    fn receive(&mut self, timeout: Option<Duration>) -> Result<Received, TransportError> {
        let got = match timeout {
            None => self.rx.recv().map_err(|_| RecvTimeoutError::Disconnected),
            Some(t) => self.rx.recv_timeout(t),
        };
        match got {
            Ok((id, m)) => {
                self.flow[id].release(m.output_bytes());
                Ok(Received::Message(id, m))
            }
            Err(RecvTimeoutError::Timeout) => Ok(Received::Timeout),
            Err(RecvTimeoutError::Disconnected) => Err(TransportError::AllClosed),
        }
    }

    fn shutdown(&mut self) -> Result<(), TransportError> {
        for s in &mut self.senders {
            s.take();
        }
        // drain so no worker stays blocked on flow control
        while let Ok((id, m)) = self.rx.try_recv() {
            self.flow[id].release(m.output_bytes());
        }
        for (id, h) in self.handles.iter_mut().enumerate() {
            if let Some(h) = h.take() {
                while !h.is_finished() {
                    if let Ok((i, m)) = self.rx.recv_timeout(Duration::from_millis(10)) {
                        self.flow[i].release(m.output_bytes());
                    }
                }
                if h.join().is_err() {
                    return Err(TransportError::WorkerFailed {
                        peer: id,
                        reason: "thread panicked".into(),
                    });
                }
            }
        }
        Ok(())
    }
}

impl Drop for Threads {
    fn drop(&mut self) {
        let _ = self.shutdown();
    }
}
