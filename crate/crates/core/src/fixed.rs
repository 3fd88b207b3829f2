use std::collections::VecDeque;

use crate::graph::UnionMultigraph;

/// FIFO of edge ids pinned into `z` when a neighbor cover is built.
///
/// Two rules hold after every push: at most `capacity` entries (the front
/// is evicted first), and no vertex is saturated beyond what a cycle cover
/// allows (two incident entries undirected; one outgoing and one incoming
/// directed). A push that would saturate a vertex evicts the oldest entry
/// conflicting with it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedEdgeQueue {
    entries: VecDeque<usize>,
    capacity: usize,
}

impl FixedEdgeQueue {
    pub fn new(capacity: usize) -> Self {
        FixedEdgeQueue {
            entries: VecDeque::new(),
            capacity,
        }
    }

    /// Replays `ids` through an unbounded queue, keeping only a conflict-free suffix.
    pub fn sanitize(g: &UnionMultigraph, ids: &[usize]) -> Vec<usize> {
        let mut q = FixedEdgeQueue::new(usize::MAX);
        for &id in ids {
            q.push(g, id);
        }
        q.entries.into()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, id: usize) -> bool {
        self.entries.contains(&id)
    }

    /// Entries from oldest to newest.
    pub fn entries(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().copied()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.entries.iter().copied().collect()
    }

    /// Pushes `id` as the newest entry; an existing copy of `id` is moved to the back.
    pub fn push(&mut self, g: &UnionMultigraph, id: usize) {
        self.entries.retain(|&e| e != id);
        self.entries.push_back(id);
        let e = *g.edge(id);
        if g.is_directed() {
            self.evict_oldest_while(
                |q| q.count(|x| g.edge(x).tail == e.tail) > 1,
                |x| g.edge(x).tail == e.tail,
            );
            self.evict_oldest_while(
                |q| q.count(|x| g.edge(x).head == e.head) > 1,
                |x| g.edge(x).head == e.head,
            );
        } else {
            for v in [e.tail, e.head] {
                let touches = |x: usize| {
                    let f = g.edge(x);
                    usize::from(f.tail == v) + usize::from(f.head == v)
                };
                while self.entries.iter().map(|&x| touches(x)).sum::<usize>() > 2 {
                    let pos = self
                        .entries
                        .iter()
                        .position(|&x| touches(x) > 0)
                        .expect("a conflicting entry exists");
                    self.entries.remove(pos);
                }
            }
        }
        while self.entries.len() > self.capacity {
            self.entries.pop_front();
        }
    }

    fn count(&self, pred: impl Fn(usize) -> bool) -> usize {
        self.entries.iter().filter(|&&x| pred(x)).count()
    }

    fn evict_oldest_while(
        &mut self,
        over: impl Fn(&Self) -> bool,
        conflicting: impl Fn(usize) -> bool,
    ) {
        while over(self) {
            let pos = self
                .entries
                .iter()
                .position(|&x| conflicting(x))
                .expect("a conflicting entry exists");
            self.entries.remove(pos);
        }
    }

    pub fn retain(&mut self, keep: impl FnMut(&usize) -> bool) {
        self.entries.retain(keep);
    }

    /// Replaces the contents with `ids` (oldest first), truncating from the front.
    pub fn replace(&mut self, ids: &[usize]) {
        self.entries.clear();
        let skip = ids.len().saturating_sub(self.capacity);
        self.entries.extend(&ids[skip..]);
    }
}
