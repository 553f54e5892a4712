//! One child process per worker, speaking length-prefixed frames over its
//! stdin and stdout. The child's stderr is inherited.

use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use crate::app::Application;
use crate::transport::wire::{read_frame, write_frame, WireError};
use crate::transport::{FlowControl, Message, PeerId, Received, Transport, TransportError};
use crate::worker::{Worker, WorkerControl};

enum Event {
    Msg(Message),
    Eof,
    Error(WireError),
}

pub struct Processes {
    children: Vec<Child>,
    stdins: Vec<Option<BufWriter<ChildStdin>>>,
    rx: Receiver<(PeerId, Event)>,
    flow: Vec<Arc<FlowControl>>,
    terminated: Vec<bool>,
    live: usize,
}

impl Processes {
    /// Launches `workers` copies of `program args...` and sends each the
    /// `init` message.
    pub fn spawn<S: AsRef<std::ffi::OsStr>>(
        program: &Path,
        args: &[S],
        workers: usize,
        init: &Message,
        inflight_cap: usize,
    ) -> Result<Self, TransportError> {
        let (tx, rx) = mpsc::channel();
        let mut p = Processes {
            children: Vec::new(),
            stdins: Vec::new(),
            rx,
            flow: Vec::new(),
            terminated: vec![false; workers],
            live: workers,
        };
        for id in 0..workers {
            let mut child = Command::new(program)
                .args(args)
                .stdin(Stdio::piped())
                .stdout(Stdio::piped())
                .stderr(Stdio::inherit())
                .spawn()
                .map_err(TransportError::Spawn)?;
            let stdout = child.stdout.take().expect("piped stdout");
            let stdin = child.stdin.take().expect("piped stdin");
            let fc = Arc::new(FlowControl::new(inflight_cap));
            let (tx, fc2) = (tx.clone(), Arc::clone(&fc));
            thread::spawn(move || {
                let mut r = BufReader::new(stdout);
                loop {
                    let ev = match read_frame(&mut r) {
                        Ok(Some(m)) => {
                            fc2.acquire(m.output_bytes());
                            Event::Msg(m)
                        }
                        Ok(None) => Event::Eof,
                        Err(e) => Event::Error(e),
                    };
                    let last = !matches!(ev, Event::Msg(_));
                    if tx.send((id, ev)).is_err() || last {
                        break;
                    }
                }
            });
            p.children.push(child);
            p.stdins.push(Some(BufWriter::new(stdin)));
            p.flow.push(fc);
        }
        for id in 0..workers {
            p.send(id, init.clone())?;
        }
        Ok(p)
    }
}

impl Transport for Processes {
    fn worker_count(&self) -> usize {
        self.children.len()
    }

    fn send(&mut self, to: PeerId, msg: Message) -> Result<(), TransportError> {
        let w = self.stdins.get_mut(to).ok_or(TransportError::UnknownPeer(to))?;
        let w = w.as_mut().ok_or(TransportError::Closed(to))?;
        let wire = |source| TransportError::Wire { peer: to, source };
        write_frame(w, &msg).map_err(wire)?;
        w.flush().map_err(|e| wire(e.into()))?;
        if matches!(msg, Message::Terminate) {
            self.terminated[to] = true;
            self.stdins[to] = None;
        }
        Ok(())
    }

    fn receive(&mut self, timeout: Option<Duration>) -> Result<Received, TransportError> {
        loop {
            if self.live == 0 {
                return Err(TransportError::AllClosed);
            }
            let got = match timeout {
                None => self.rx.recv().map_err(|_| RecvTimeoutError::Disconnected),
                Some(t) => self.rx.recv_timeout(t),
            };
            let (id, ev) = match got {
                Ok(x) => x,
                Err(RecvTimeoutError::Timeout) => return Ok(Received::Timeout),
                Err(RecvTimeoutError::Disconnected) => return Err(TransportError::AllClosed),
            };
            match ev {
                Event::Msg(m) => {
                    self.flow[id].release(m.output_bytes());
                    return Ok(Received::Message(id, m));
                }
                Event::Eof => {
                    self.live -= 1;
                    if !self.terminated[id] {
                        return Err(TransportError::WorkerFailed {
                            peer: id,
                            reason: "exited unexpectedly".into(),
                        });
                    }
                }
                Event::Error(source) => {
                    self.live -= 1;
                    return Err(TransportError::Wire { peer: id, source });
                }
            }
        }
    }

    fn shutdown(&mut self) -> Result<(), TransportError> {
        for s in &mut self.stdins {
            s.take();
        }
        // keep draining so readers blocked on flow control can finish
        while self.live > 0 {
            match self.rx.recv_timeout(Duration::from_millis(50)) {
                Ok((id, Event::Msg(m))) => self.flow[id].release(m.output_bytes()),
                Ok(_) => self.live -= 1,
                Err(RecvTimeoutError::Timeout) => {
                    if self.children.iter_mut().all(|c| matches!(c.try_wait(), Ok(Some(_)))) {
                        break;
                    }
                }
                Err(RecvTimeoutError::Disconnected) => break,
            }
        }
        let mut result = Ok(());
        for (id, c) in self.children.iter_mut().enumerate() {
            match c.wait() {
                Ok(st) if st.success() || self.terminated[id] => {}
                Ok(st) => {
                    result = Err(TransportError::WorkerFailed {
                        peer: id,
                        reason: format!("exit status {st}"),
                    })
                }
                Err(e) => result = Err(TransportError::Spawn(e)),
            }
        }
        result
    }
}

impl Drop for Processes {
    fn drop(&mut self) {
        for s in &mut self.stdins {
            s.take();
        }
        for c in &mut self.children {
            if let Ok(None) = c.try_wait() {
                let _ = c.kill();
            }
            let _ = c.wait();
        }
    }
}

/// Worker process main loop: handles frames from `input` until `Terminate`
/// or end of stream, writing replies to `output`.
pub fn serve<A: Application>(mut worker: Worker<A>, input: impl Read, output: impl Write) -> Result<(), WireError> {
    let mut input = BufReader::new(input);
    let mut output = BufWriter::new(output);
    while let Some(msg) = read_frame(&mut input)? {
        let mut err = None;
        let ctl = worker.handle(msg, &mut |m| {
            write_frame(&mut output, &m).map_err(|e| {
                let shown = TransportError::Closed(0);
                err = Some(e);
                shown
            })
        });
        if let Some(e) = err {
            return Err(e);
        }
        output.flush()?;
        if matches!(ctl, Ok(WorkerControl::Exit)) {
            break;
        }
    }
    Ok(())
}
