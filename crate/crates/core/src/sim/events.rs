use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::traffic::{Millis, PacketSpec};
use crate::topology::NodeId;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Event {
    /// Packet creation; the flag marks packets drawn from the traffic source.
    Create(PacketSpec, bool),
    /// A packet finished crossing the link `from -> to`.
    TxComplete { from: NodeId, to: NodeId, packet: usize },
    /// Neighbor queue advertisements refresh.
    Refresh,
}

#[derive(Debug)]
struct Scheduled {
    time: Millis,
    seq: u64,
    event: Event,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Pending events ordered by `(time, insertion sequence)`.
#[derive(Debug, Default)]
pub(crate) struct EventQueue {
    heap: BinaryHeap<Scheduled>,
    next_seq: u64,
}

impl EventQueue {
    pub fn push(&mut self, time: Millis, event: Event) {
        self.heap.push(Scheduled {
            time,
            seq: self.next_seq,
            event,
        });
        self.next_seq += 1;
    }

    pub fn peek_time(&self) -> Option<Millis> {
        self.heap.peek().map(|s| s.time)
    }

    pub fn pop(&mut self) -> Option<(Millis, Event)> {
        self.heap.pop().map(|s| (s.time, s.event))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_then_insertion_order() {
        let mut q = EventQueue::default();
        q.push(2.0, Event::Refresh);
        let a = tx(0);
        let b = tx(1);
        q.push(1.0, a);
        q.push(1.0, b);
        q.push(0.5, Event::Refresh);
        let order: Vec<_> = std::iter::from_fn(|| q.pop()).collect();
        assert_eq!(order, vec![(0.5, Event::Refresh), (1.0, a), (1.0, b), (2.0, Event::Refresh)]);
    }

    fn tx(packet: usize) -> Event {
        Event::TxComplete {
            from: NodeId(0),
            to: NodeId(1),
            packet,
        }
    }
}
