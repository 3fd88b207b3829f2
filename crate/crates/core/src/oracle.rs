//! Ground truth for small instances and the witness validator every
//! `NotAdjacent` answer must pass.
//!
//! The exhaustive search decides the sufficient nonadjacency condition
//! exactly ("condition holds" / "condition fails"); it says nothing about
//! true polytope adjacency when the condition fails.

use thiserror::Error;

use crate::graph::{
    is_hamiltonian, subset_equals_tour, CoverPair, EdgeSubset, Tour, UnionMultigraph,
};
use crate::instances::Instance;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("exhaustive search is limited to n <= {bound}, got n = {n}")]
    BoundExceeded { n: usize, bound: usize },
    #[error("exhaustive search gave up after {0} nodes")]
    NodeLimit(u64),
}

pub const DEFAULT_BOUND: usize = 12;

/// `z` and `w` partition the edge ids, both are Hamiltonian, and neither
/// equals `x` or `y` by endpoints.
pub fn validate_witness(
    x: &Tour,
    y: &Tour,
    z: &EdgeSubset,
    w: &EdgeSubset,
    g: &UnionMultigraph,
) -> bool {
    validate_graph_witness(z, w, g)
        && [z, w]
            .iter()
            .all(|s| !subset_equals_tour(s, g, x) && !subset_equals_tour(s, g, y))
}

/// Raw-graph variant: any two complementary Hamiltonian tours qualify.
pub fn validate_graph_witness(z: &EdgeSubset, w: &EdgeSubset, g: &UnionMultigraph) -> bool {
    z.universe() == g.edge_count()
        && w.universe() == g.edge_count()
        && z.is_disjoint(w)
        && z.union_len(w) == g.edge_count()
        && is_hamiltonian(z, g)
        && is_hamiltonian(w, g)
}

/// Validates against the instance's tours when it has them.
pub fn validate_instance_witness(inst: &Instance, z: &EdgeSubset, w: &EdgeSubset) -> bool {
    match inst.tours() {
        Some((x, y)) => validate_witness(x, y, z, w, inst.graph()),
        None => validate_graph_witness(z, w, inst.graph()),
    }
}

/// Union-find without path compression, so unions can be undone in LIFO order.
struct RollbackSets {
    parent: Vec<usize>,
    size: Vec<usize>,
    history: Vec<Option<usize>>,
}

impl RollbackSets {
    fn new(n: usize) -> Self {
        RollbackSets {
            parent: (0..n).collect(),
            size: vec![1; n],
            history: Vec::new(),
        }
    }

    fn find(&self, mut v: usize) -> usize {
        while self.parent[v] != v {
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            self.history.push(None);
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        self.history.push(Some(b));
    }

    fn undo(&mut self) {
        if let Some(b) = self.history.pop().expect("undo without union") {
            let a = self.parent[b];
            self.size[a] -= self.size[b];
            self.parent[b] = b;
        }
    }
}

struct Side {
    out_deg: Vec<u8>,
    in_deg: Vec<u8>,
    edges: usize,
    sets: RollbackSets,
    member: EdgeSubset,
}

struct Search<'a> {
    g: &'a UnionMultigraph,
    tours: Option<(&'a Tour, &'a Tour)>,
    sides: [Side; 2],
    /// Edge ids in branching order: grouped by vertex so degrees close early.
    order: Vec<usize>,
    /// Unassigned edges leaving / entering each vertex (both counts for
    /// undirected graphs, where only their sum matters).
    out_left: Vec<u8>,
    in_left: Vec<u8>,
    nodes: u64,
    node_limit: u64,
}

/// Breadth-first vertex ranks from vertex 0, then edges by their later endpoint.
fn branching_order(g: &UnionMultigraph) -> Vec<usize> {
    let n = g.n();
    let mut rank = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::from([0]);
    rank[0] = 0;
    let mut next = 1;
    while let Some(v) = queue.pop_front() {
        for &id in g.incident(v) {
            let u = g.edge(id).other(v);
            if rank[u] == usize::MAX {
                rank[u] = next;
                next += 1;
                queue.push_back(u);
            }
        }
    }
    let mut order: Vec<usize> = (0..g.edge_count()).collect();
    order.sort_by_key(|&id| {
        let (a, b) = g.edge(id).endpoints();
        (rank[a].max(rank[b]), rank[a].min(rank[b]), id)
    });
    order
}

impl Search<'_> {
    fn admits(&self, s: usize, id: usize) -> bool {
        let g = self.g;
        let e = g.edge(id);
        let side = &self.sides[s];
        let other = &self.sides[1 - s];
        let n = g.n();
        if side.edges == n {
            return false;
        }
        let (t, h) = (e.tail, e.head);
        let feasible = if g.is_directed() {
            // the other side must still find its out-arc at t and in-arc at h
            side.out_deg[t] == 0
                && side.in_deg[h] == 0
                && other.out_deg[t] + self.out_left[t] > 1
                && other.in_deg[h] + self.in_left[h] > 1
        } else {
            let d = |x: &Side, v: usize| x.out_deg[v] + x.in_deg[v];
            let left = |v: usize| self.out_left[v] + self.in_left[v];
            d(side, t) < 2
                && d(side, h) < 2
                && if t == h {
                    false
                } else {
                    d(other, t) + left(t) > 2 && d(other, h) + left(h) > 2
                }
        };
        // a cycle may only close on the n-th edge of a side
        feasible && (side.edges + 1 == n || side.sets.find(t) != side.sets.find(h))
    }

    fn assign(&mut self, s: usize, id: usize) {
        let e = *self.g.edge(id);
        self.out_left[e.tail] -= 1;
        self.in_left[e.head] -= 1;
        let side = &mut self.sides[s];
        side.out_deg[e.tail] += 1;
        side.in_deg[e.head] += 1;
        side.edges += 1;
        side.sets.union(e.tail, e.head);
        side.member.insert(id);
    }

    fn unassign(&mut self, s: usize, id: usize) {
        let e = *self.g.edge(id);
        self.out_left[e.tail] += 1;
        self.in_left[e.head] += 1;
        let side = &mut self.sides[s];
        side.out_deg[e.tail] -= 1;
        side.in_deg[e.head] -= 1;
        side.edges -= 1;
        side.sets.undo();
        side.member.remove(id);
    }

    fn accepts_leaf(&self) -> bool {
        let (z, w) = (&self.sides[0].member, &self.sides[1].member);
        match self.tours {
            Some((x, y)) => validate_witness(x, y, z, w, self.g),
            None => validate_graph_witness(z, w, self.g),
        }
    }

    /// `Err` once the node budget is spent.
    fn run(&mut self, pos: usize) -> Result<bool, OracleError> {
        self.nodes += 1;
        if self.nodes > self.node_limit {
            return Err(OracleError::NodeLimit(self.node_limit));
        }
        if pos == self.order.len() {
            return Ok(self.accepts_leaf());
        }
        let id = self.order[pos];
        // (z, w) and (w, z) are equivalent, so the first edge always goes to z.
        let sides: &[usize] = if pos == 0 { &[0] } else { &[0, 1] };
        for &s in sides {
            if self.admits(s, id) {
                self.assign(s, id);
                if self.run(pos + 1)? {
                    return Ok(true);
                }
                self.unassign(s, id);
            }
        }
        Ok(false)
    }
}

/// Exact search for two complementary Hamiltonian tours in the union,
/// different from the input tours when the instance has them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExhaustiveSearch {
    pub max_n: usize,
    /// Search nodes visited before giving up with [`OracleError::NodeLimit`].
    pub node_limit: u64,
}

impl Default for ExhaustiveSearch {
    fn default() -> Self {
        ExhaustiveSearch {
            max_n: DEFAULT_BOUND,
            node_limit: u64::MAX,
        }
    }
}

impl ExhaustiveSearch {
    pub fn search(&self, inst: &Instance) -> Result<Option<CoverPair>, OracleError> {
        let g = inst.graph();
        let n = g.n();
        if n > self.max_n {
            return Err(OracleError::BoundExceeded {
                n,
                bound: self.max_n,
            });
        }
        let side = || Side {
            out_deg: vec![0; n],
            in_deg: vec![0; n],
            edges: 0,
            sets: RollbackSets::new(n),
            member: EdgeSubset::empty(g),
        };
        let mut out_left = vec![0u8; n];
        let mut in_left = vec![0u8; n];
        for e in g.edges() {
            out_left[e.tail] += 1;
            in_left[e.head] += 1;
        }
        let mut search = Search {
            g,
            tours: inst.tours(),
            sides: [side(), side()],
            order: branching_order(g),
            out_left,
            in_left,
            nodes: 0,
            node_limit: self.node_limit,
        };
        if !search.run(0)? {
            return Ok(None);
        }
        let [z, w] = search.sides.map(|s| s.member);
        let pair = CoverPair { z, w };
        debug_assert!(validate_instance_witness(inst, &pair.z, &pair.w));
        Ok(Some(pair))
    }
}

/// [`ExhaustiveSearch`] with the default bound on a pair of tours.
pub fn find_complementary_exhaustive(
    x: &Tour,
    y: &Tour,
) -> Result<Option<CoverPair>, crate::Error> {
    let inst = Instance::from_tours(x.clone(), y.clone())?;
    Ok(ExhaustiveSearch::default().search(&inst)?)
}
