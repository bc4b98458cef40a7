//! Event queue for the discrete-event core.
//!
//! Events execute in `(time, insertion sequence)` order. The sequence
//! component makes simultaneous events deterministic: whoever was
//! scheduled first runs first, on every platform, every run.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::entity::EntityId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind {
    /// A sampled application packet leaves its source node.
    PacketGeneration { flow: u32, src: EntityId },
    /// Periodic advance of ground-node trajectories.
    MobilityTick,
    /// Fleet redistribution toward node-dense cells.
    UavReposition { epoch: u32 },
    /// Validators run one commit round over pending receipts.
    ConsensusRound { round: u32 },
    /// Metrics are finalized into the run report.
    MetricsSnapshot,
}

impl EventKind {
    pub fn subject(&self) -> Option<EntityId> {
        match self {
            EventKind::PacketGeneration { src, .. } => Some(*src),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub time_us: u64,
    pub kind: EventKind,
}

#[derive(Debug)]
pub struct EventQueue {
    heap: BinaryHeap<Reverse<Entry>>,
    next_seq: u64,
    last_popped_us: u64,
}

#[derive(Debug)]
struct Entry {
    time_us: u64,
    seq: u64,
    kind: EventKind,
}

// Ordered by (time, seq) only; seq is unique so the ordering is total.
impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        (self.time_us, self.seq) == (other.time_us, other.seq)
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.time_us, self.seq).cmp(&(other.time_us, other.seq))
    }
}

impl EventQueue {
    pub fn new() -> Self {
        EventQueue { heap: BinaryHeap::new(), next_seq: 0, last_popped_us: 0 }
    }

    pub fn push(&mut self, event: Event) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(Entry { time_us: event.time_us, seq, kind: event.kind }));
    }

    /// Pops the earliest event. Panics if time would run backwards, which
    /// would mean an event was scheduled in the past.
    pub fn pop(&mut self) -> Option<Event> {
        let Reverse(entry) = self.heap.pop()?;
        assert!(
            entry.time_us >= self.last_popped_us,
            "event clock moved backwards: {} < {}",
            entry.time_us,
            self.last_popped_us
        );
        self.last_popped_us = entry.time_us;
        Some(Event { time_us: entry.time_us, kind: entry.kind })
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }
}

impl Default for EventQueue {
    fn default() -> Self {
        Self::new()
    }
}
