//! In-process message bus. Envelopes are delivered in FIFO send order; the
//! threaded schedule gives every party its own thread and keeps the bus as
//! the only channel between them.

use std::collections::VecDeque;
use std::sync::mpsc;
use std::thread;

use super::config::Schedule;
use super::message::{Destination, Envelope, Phase, Role};
use super::parties::Node;
use super::transcript::Transcript;
use crate::error::{Error, Result};

pub struct BusRun {
    pub nodes: Vec<Node>,
    pub transcript: Transcript,
    pub dropped: Vec<Envelope>,
    pub error: Option<Error>,
}

impl BusRun {
    pub fn node(&self, id: &super::message::PartyId) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id() == id)
    }
}

struct Outbox {
    queue: VecDeque<Envelope>,
    transcript: Transcript,
    drop_phase: Option<Phase>,
    dropped: Vec<Envelope>,
}

impl Outbox {
    fn send(&mut self, env: Envelope) {
        if self.drop_phase == Some(env.phase) && self.dropped.is_empty() {
            self.dropped.push(env);
            return;
        }
        self.transcript.push(&env);
        self.queue.push_back(env);
    }
}

fn recipients(env: &Envelope, nodes: &[&super::message::PartyId]) -> Vec<usize> {
    match &env.to {
        Destination::Party(p) => nodes.iter().position(|id| *id == p).into_iter().collect(),
        Destination::Broadcast => nodes
            .iter()
            .enumerate()
            .filter(|(_, id)| **id != &env.from)
            .filter(|(_, id)| match env.phase {
                Phase::Round1Broadcast => matches!(id.role, Role::Signer | Role::Combiner),
                _ => true,
            })
            .map(|(i, _)| i)
            .collect(),
    }
}

fn wrap(node: &Node, phase: Phase, err: Error) -> Error {
    Error::Party {
        party: node.id().clone(),
        phase,
        source: Box::new(err),
    }
}

/// Starts every node in order, then delivers until the queue drains. The
/// first envelope of `drop_phase`, if any, is silently lost.
pub fn run(mut nodes: Vec<Node>, schedule: Schedule, drop_phase: Option<Phase>) -> BusRun {
    let mut outbox = Outbox {
        queue: VecDeque::new(),
        transcript: Transcript::default(),
        drop_phase,
        dropped: Vec::new(),
    };
    let mut error = None;
    for node in nodes.iter_mut() {
        match node.start() {
            Ok(out) => out.into_iter().for_each(|e| outbox.send(e)),
            Err(e) => {
                let phase = if node.id().role == Role::Sdc {
                    Phase::Dealing
                } else {
                    Phase::Round1Broadcast
                };
                error = Some(wrap(node, phase, e));
                break;
            }
        }
    }
    if error.is_none() {
        match schedule {
            Schedule::Sequential => error = run_sequential(&mut nodes, &mut outbox),
            Schedule::Threaded => {
                let (back, err) = run_threaded(nodes, &mut outbox);
                nodes = back;
                error = err;
            }
        }
    }
    BusRun {
        nodes,
        transcript: outbox.transcript,
        dropped: outbox.dropped,
        error,
    }
}

fn run_sequential(nodes: &mut [Node], outbox: &mut Outbox) -> Option<Error> {
    while let Some(env) = outbox.queue.pop_front() {
        let targets = {
            let ids: Vec<_> = nodes.iter().map(Node::id).collect();
            recipients(&env, &ids)
        };
        for idx in targets {
            match nodes[idx].handle(&env) {
                Ok(out) => out.into_iter().for_each(|e| outbox.send(e)),
                Err(e) => return Some(wrap(&nodes[idx], env.phase, e)),
            }
        }
    }
    None
}

fn run_threaded(nodes: Vec<Node>, outbox: &mut Outbox) -> (Vec<Node>, Option<Error>) {
    let ids: Vec<_> = nodes.iter().map(|n| n.id().clone()).collect();
    let (reply_tx, reply_rx) = mpsc::channel::<Result<Vec<Envelope>>>();
    let mut inboxes = Vec::with_capacity(nodes.len());
    let mut handles = Vec::with_capacity(nodes.len());
    for mut node in nodes {
        let (tx, rx) = mpsc::channel::<Envelope>();
        let reply = reply_tx.clone();
        inboxes.push(tx);
        handles.push(thread::spawn(move || {
            while let Ok(env) = rx.recv() {
                let result = node.handle(&env).map_err(|e| wrap(&node, env.phase, e));
                if reply.send(result).is_err() {
                    break;
                }
            }
            node
        }));
    }
    drop(reply_tx);

    let id_refs: Vec<_> = ids.iter().collect();
    let mut in_flight = 0usize;
    let mut error = None;
    loop {
        while let Some(env) = outbox.queue.pop_front() {
            for idx in recipients(&env, &id_refs) {
                if inboxes[idx].send(env.clone()).is_ok() {
                    in_flight += 1;
                }
            }
        }
        if in_flight == 0 {
            break;
        }
        match reply_rx.recv() {
            Ok(Ok(out)) => {
                if error.is_none() {
                    out.into_iter().for_each(|e| outbox.send(e));
                }
            }
            Ok(Err(e)) => {
                error.get_or_insert(e);
            }
            Err(_) => break,
        }
        in_flight -= 1;
    }
    drop(inboxes);
    let nodes = handles
        .into_iter()
        .map(|h| h.join().expect("party thread panicked"))
        .collect();
    (nodes, error)
}
