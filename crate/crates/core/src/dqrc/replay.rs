use std::collections::VecDeque;

use rand::seq::index;

use super::encode::EncodedState;
use crate::nn::HiddenState;
use crate::rng::SimRng;
use crate::topology::NodeId;

/// One stored hop, from the sending agent's point of view.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub s: EncodedState,
    pub h: HiddenState,
    /// Index of the chosen neighbor in the sender's adjacency.
    pub action: usize,
    pub reward: f64,
    pub next: NodeId,
    pub s_next: EncodedState,
    pub h_next: HiddenState,
    pub terminal: bool,
}

/// Fixed-capacity ring buffer; oldest entries are evicted first.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: VecDeque<Transition>,
    inserted: u64,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            items: VecDeque::with_capacity(capacity),
            inserted: 0,
        }
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
        self.inserted += 1;
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Total insertions ever made.
    pub fn inserted(&self) -> u64 {
        self.inserted
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.items.iter()
    }

    /// `batch` distinct entries chosen uniformly; `None` if too few stored.
    pub fn sample(&self, batch: usize, rng: &mut SimRng) -> Option<Vec<&Transition>> {
        if self.items.len() < batch {
            return None;
        }
        Some(
            index::sample(rng, self.items.len(), batch)
                .into_iter()
                .map(|i| &self.items[i])
                .collect(),
        )
    }

    pub fn clear(&mut self) {
        self.items.clear();
    }
}
