//! Single-threaded backend driven by a seeded scheduler.
//!
//! Each `receive` call picks, uniformly at random among what is possible,
//! either a worker with queued input (which then handles one message to
//! completion) or a worker with queued output (whose oldest message is
//! delivered). The same seed always yields the same interleaving.

use std::collections::VecDeque;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::app::Application;
use crate::transport::{Message, PeerId, Received, Transport, TransportError};
use crate::worker::{Worker, WorkerControl};

struct Slot<A: Application> {
    worker: Worker<A>,
    inbox: VecDeque<Message>,
    outbox: VecDeque<Message>,
    closed: bool,
}

#[derive(Clone, Copy)]
enum Step {
    Run(PeerId),
    Deliver(PeerId),
}

pub struct Deterministic<A: Application> {
    slots: Vec<Slot<A>>,
    rng: ChaCha8Rng,
    trace: Vec<(PeerId, &'static str)>,
}

impl<A: Application> Deterministic<A> {
    /// One worker per application instance.
    pub fn new(apps: Vec<A>, maxbuf: usize, seed: u64) -> Self {
        let slots = apps
            .into_iter()
            .map(|app| Slot {
                worker: Worker::new(app, maxbuf),
                inbox: VecDeque::new(),
                outbox: VecDeque::new(),
                closed: false,
            })
            .collect();
        Deterministic {
            slots,
            rng: ChaCha8Rng::seed_from_u64(seed),
            trace: Vec::new(),
        }
    }

    /// Sender and kind of every message delivered so far.
    pub fn trace(&self) -> &[(PeerId, &'static str)] {
        &self.trace
    }

    fn run_one(&mut self, id: PeerId) -> Result<(), TransportError> {
        let Slot {
            worker,
            inbox,
            outbox,
            closed,
        } = &mut self.slots[id];
        let Some(msg) = inbox.pop_front() else {
            return Ok(());
        };
        let ctl = worker.handle(msg, &mut |m| {
            outbox.push_back(m);
            Ok(())
        })?;
        if ctl == WorkerControl::Exit {
            *closed = true;
            inbox.clear();
        }
        Ok(())
    }
}

impl<A: Application> Transport for Deterministic<A> {
    fn worker_count(&self) -> usize {
        self.slots.len()
    }

    fn send(&mut self, to: PeerId, msg: Message) -> Result<(), TransportError> {
        let slot = self.slots.get_mut(to).ok_or(TransportError::UnknownPeer(to))?;
        if slot.closed {
            return Err(TransportError::Closed(to));
        }
        slot.inbox.push_back(msg);
        Ok(())
    }

    fn receive(&mut self, _timeout: Option<Duration>) -> Result<Received, TransportError> {
        loop {
            let mut steps = Vec::new();
            for (id, s) in self.slots.iter().enumerate() {
                if !s.outbox.is_empty() {
                    steps.push(Step::Deliver(id));
                }
                if !s.closed && !s.inbox.is_empty() {
                    steps.push(Step::Run(id));
                }
            }
            if steps.is_empty() {
                return Ok(Received::Timeout);
            }
            match steps[self.rng.gen_range(0..steps.len())] {
                Step::Run(id) => self.run_one(id)?,
                Step::Deliver(id) => {
                    let m = self.slots[id].outbox.pop_front().expect("non-empty outbox");
                    self.trace.push((id, m.kind()));
                    return Ok(Received::Message(id, m));
                }
            }
        }
    }

    fn shutdown(&mut self) -> Result<(), TransportError> {
        for id in 0..self.slots.len() {
            while !self.slots[id].closed && !self.slots[id].inbox.is_empty() {
                self.run_one(id)?;
            }
        }
        Ok(())
    }
}
