use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Candidate pair; `Ord` ranks worse candidates higher so the heap top is
/// the first to evict. Better means higher score, then smaller pair.
#[derive(Clone, Copy, Debug)]
struct Candidate {
    score: f64,
    pair: (usize, usize),
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .score
            .total_cmp(&self.score)
            .then_with(|| self.pair.cmp(&other.pair))
    }
}

/// Keeps the `capacity` best-scoring pairs seen so far.
pub(crate) struct TopPairs {
    capacity: usize,
    heap: BinaryHeap<Candidate>,
}

impl TopPairs {
    pub(crate) fn new(capacity: usize) -> Self {
        TopPairs {
            capacity,
            heap: BinaryHeap::with_capacity(capacity.saturating_add(1).min(1 << 20)),
        }
    }

    pub(crate) fn offer(&mut self, score: f64, pair: (usize, usize)) {
        if self.capacity == 0 {
            return;
        }
        let c = Candidate { score, pair };
        if self.heap.len() < self.capacity {
            self.heap.push(c);
        } else if let Some(worst) = self.heap.peek() {
            if c < *worst {
                self.heap.pop();
                self.heap.push(c);
            }
        }
    }

    /// Selected pairs with their scores, best first.
    pub(crate) fn into_sorted(self) -> Vec<((usize, usize), f64)> {
        self.heap
            .into_sorted_vec()
            .into_iter()
            .map(|c| (c.pair, c.score))
            .collect()
    }
}
