//! Per-client outbound queue. When a slow client lets the queue fill up,
//! older state and cue snapshots are dropped in favor of the newest one;
//! everything else is delivered, and relative order is never changed.

use std::collections::VecDeque;

use crate::protocol::{MessageKind, WireMessage};

#[derive(Debug, Clone)]
pub struct Outbox {
    queue: VecDeque<WireMessage>,
    capacity: usize,
    coalesced: u64,
}

fn coalescible(kind: MessageKind) -> bool {
    matches!(kind, MessageKind::StateUpdate | MessageKind::CueUpdate)
}

impl Outbox {
    pub fn new(capacity: usize) -> Self {
        Self {
            queue: VecDeque::new(),
            capacity: capacity.max(2),
            coalesced: 0,
        }
    }

    pub fn push(&mut self, msg: WireMessage) {
        if coalescible(msg.kind) && self.queue.len() >= self.capacity {
            let before = self.queue.len();
            self.queue.retain(|m| m.kind != msg.kind);
            self.coalesced += (before - self.queue.len()) as u64;
        }
        self.queue.push_back(msg);
    }

    pub fn drain(&mut self) -> Vec<WireMessage> {
        self.queue.drain(..).collect()
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    /// Snapshots dropped so far.
    pub fn coalesced(&self) -> u64 {
        self.coalesced
    }
}
