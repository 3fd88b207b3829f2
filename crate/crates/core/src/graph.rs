//! Tours, the union multigraph `x ∪ y`, edge subsets over it, and the
//! structural queries the rest of the crate is built on.
//!
//! Vertex labels are 1-based at every external boundary (permutations,
//! files, `Display`) and 0-based inside the crate.

use std::fmt;

use fixedbitset::FixedBitSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("tour must have at least 3 vertices, got {0}")]
    TooSmall(usize),
    #[error("not a permutation of 1..={n}: {reason}")]
    NotAPermutation { n: usize, reason: String },
    #[error("tours differ in size or directedness")]
    MismatchedInstances,
    #[error("tours are identical")]
    IdenticalTours,
    #[error("expected {expected} edges, got {found}")]
    WrongEdgeCount { expected: usize, found: usize },
    #[error("edge ({0}, {1}) references a vertex outside 1..={2}")]
    VertexOutOfRange(usize, usize, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {vertex} violates regularity: {detail}")]
    RegularityViolation { vertex: usize, detail: String },
    #[error("graph is disconnected")]
    Disconnected,
}

/// A Hamiltonian cycle (undirected) or tour (directed) on `n` vertices,
/// stored in canonical form: rotated to start at vertex 1 and, when
/// undirected, oriented so that the second vertex is smaller than the last.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tour {
    order: Vec<usize>,
    directed: bool,
}

impl Tour {
    /// Builds a tour from 1-based labels.
    pub fn from_permutation(labels: &[usize], directed: bool) -> Result<Tour, GraphError> {
        let zero_based = labels
            .iter()
            .map(|&l| {
                l.checked_sub(1).ok_or_else(|| GraphError::NotAPermutation {
                    n: labels.len(),
                    reason: "label 0 is not allowed".into(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Tour::from_vertices(zero_based, directed)
    }

    /// Builds a tour from 0-based vertex indices.
    pub fn from_vertices(mut order: Vec<usize>, directed: bool) -> Result<Tour, GraphError> {
        let n = order.len();
        if n < 3 {
            return Err(GraphError::TooSmall(n));
        }
        let mut seen = vec![false; n];
        for &v in &order {
            if v >= n {
                return Err(GraphError::NotAPermutation {
                    n,
                    reason: format!("label {} out of range", v + 1),
                });
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(GraphError::NotAPermutation {
                    n,
                    reason: format!("label {} repeated", v + 1),
                });
            }
        }
        let start = order
            .iter()
            .position(|&v| v == 0)
            .expect("permutation contains 0");
        order.rotate_left(start);
        if !directed && order[1] > order[n - 1] {
            order[1..].reverse();
        }
        Ok(Tour { order, directed })
    }

    pub fn n(&self) -> usize {
        self.order.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// 0-based vertex sequence.
    pub fn vertices(&self) -> &[usize] {
        &self.order
    }

    /// 1-based vertex labels.
    pub fn labels(&self) -> Vec<usize> {
        self.order.iter().map(|v| v + 1).collect()
    }

    /// Consecutive vertex pairs, including the closing pair, 0-based.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.order.len();
        (0..n).map(move |i| (self.order[i], self.order[(i + 1) % n]))
    }

    /// Edge endpoint keys, sorted; unordered pairs are normalized when undirected.
    fn edge_keys(&self) -> Vec<(usize, usize)> {
        let mut keys: Vec<_> = self
            .edges()
            .map(|(u, v)| edge_key(u, v, self.directed))
            .collect();
        keys.sort_unstable();
        keys
    }
}

impl fmt::Display for Tour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.order.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", v + 1)?;
        }
        Ok(())
    }
}

fn edge_key(u: usize, v: usize, directed: bool) -> (usize, usize) {
    if directed || u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeOrigin {
    FromX,
    FromY,
    Unattributed,
}

/// One edge of a [`UnionMultigraph`]. Undirected edges keep `tail <= head`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeRef {
    pub id: usize,
    pub tail: usize,
    pub head: usize,
    pub origin: EdgeOrigin,
}

impl EdgeRef {
    pub fn endpoints(&self) -> (usize, usize) {
        (self.tail, self.head)
    }

    pub fn other(&self, v: usize) -> usize {
        if v == self.tail {
            self.head
        } else {
            self.tail
        }
    }
}

/// The multigraph union of two tours: `2n` edges with dense ids, every
/// vertex of degree 4 (undirected) or in/out degree 2 (directed). Edges
/// shared by both tours appear twice, with distinct ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnionMultigraph {
    n: usize,
    directed: bool,
    edges: Vec<EdgeRef>,
    incidence: Vec<Vec<usize>>,
    outgoing: Vec<Vec<usize>>,
    incoming: Vec<Vec<usize>>,
}

impl UnionMultigraph {
    /// Union of two distinct tours; the first `n` ids come from `x`.
    pub fn from_tours(x: &Tour, y: &Tour) -> Result<UnionMultigraph, GraphError> {
        if x.n() != y.n() || x.directed != y.directed {
            return Err(GraphError::MismatchedInstances);
        }
        if x == y {
            return Err(GraphError::IdenticalTours);
        }
        let pairs = x.edges().map(|e| (e, EdgeOrigin::FromX));
        let pairs = pairs.chain(y.edges().map(|e| (e, EdgeOrigin::FromY)));
        Ok(Self::assemble(x.n(), x.directed, pairs))
    }

    /// A raw 4-regular (or 2-in/2-out) connected multigraph given as 0-based pairs.
    pub fn from_edges(
        n: usize,
        directed: bool,
        pairs: &[(usize, usize)],
    ) -> Result<UnionMultigraph, GraphError> {
        if n < 3 {
            return Err(GraphError::TooSmall(n));
        }
        if pairs.len() != 2 * n {
            return Err(GraphError::WrongEdgeCount {
                expected: 2 * n,
                found: pairs.len(),
            });
        }
        for &(u, v) in pairs {
            if u >= n || v >= n {
                return Err(GraphError::VertexOutOfRange(
                    u.saturating_add(1),
                    v.saturating_add(1),
                    n,
                ));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u + 1));
            }
        }
        let g = Self::assemble(
            n,
            directed,
            pairs.iter().map(|&e| (e, EdgeOrigin::Unattributed)),
        );
        for v in 0..n {
            let ok = if directed {
                g.outgoing[v].len() == 2 && g.incoming[v].len() == 2
            } else {
                g.incidence[v].len() == 4
            };
            if !ok {
                let detail = if directed {
                    format!(
                        "indegree {} and outdegree {}, expected 2 and 2",
                        g.incoming[v].len(),
                        g.outgoing[v].len()
                    )
                } else {
                    format!("degree {}, expected 4", g.incidence[v].len())
                };
                return Err(GraphError::RegularityViolation {
                    vertex: v + 1,
                    detail,
                });
            }
        }
        if components(&EdgeSubset::full(&g), &g).count != 1 {
            return Err(GraphError::Disconnected);
        }
        Ok(g)
    }

    fn assemble(
        n: usize,
        directed: bool,
        pairs: impl Iterator<Item = ((usize, usize), EdgeOrigin)>,
    ) -> UnionMultigraph {
        let mut g = UnionMultigraph {
            n,
            directed,
            edges: Vec::with_capacity(2 * n),
            incidence: vec![Vec::with_capacity(4); n],
            outgoing: vec![Vec::with_capacity(2); n],
            incoming: vec![Vec::with_capacity(2); n],
        };
        for ((u, v), origin) in pairs {
            let id = g.edges.len();
            let (tail, head) = edge_key(u, v, directed);
            g.edges.push(EdgeRef {
                id,
                tail,
                head,
                origin,
            });
            g.incidence[tail].push(id);
            g.incidence[head].push(id);
            g.outgoing[tail].push(id);
            g.incoming[head].push(id);
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[EdgeRef] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &EdgeRef {
        &self.edges[id]
    }

    /// Ids of all edges incident to `v`, in id order.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incidence[v]
    }

    /// Arcs leaving `v` (for undirected graphs: edges where `v` is the smaller endpoint).
    pub fn outgoing(&self, v: usize) -> &[usize] {
        &self.outgoing[v]
    }

    pub fn incoming(&self, v: usize) -> &[usize] {
        &self.incoming[v]
    }

    /// The same multigraph with origin tags erased, as read back from a raw graph file.
    pub fn unattributed(&self) -> UnionMultigraph {
        let mut g = self.clone();
        for e in &mut g.edges {
            e.origin = EdgeOrigin::Unattributed;
        }
        g
    }
}

/// A subset of the edge ids of one multigraph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeSubset {
    member: FixedBitSet,
}

impl EdgeSubset {
    pub fn empty(g: &UnionMultigraph) -> EdgeSubset {
        EdgeSubset {
            member: FixedBitSet::with_capacity(g.edge_count()),
        }
    }

    pub fn full(g: &UnionMultigraph) -> EdgeSubset {
        let mut s = Self::empty(g);
        s.member.insert_range(..);
        s
    }

    pub fn from_ids(g: &UnionMultigraph, ids: impl IntoIterator<Item = usize>) -> EdgeSubset {
        let mut s = Self::empty(g);
        for id in ids {
            s.member.insert(id);
        }
        s
    }

    /// Ids of the edges tagged with `origin`.
    pub fn with_origin(g: &UnionMultigraph, origin: EdgeOrigin) -> EdgeSubset {
        Self::from_ids(
            g,
            g.edges()
                .iter()
                .filter(|e| e.origin == origin)
                .map(|e| e.id),
        )
    }

    pub fn universe(&self) -> usize {
        self.member.len()
    }

    pub fn contains(&self, id: usize) -> bool {
        self.member.contains(id)
    }

    pub fn insert(&mut self, id: usize) {
        self.member.insert(id);
    }

    pub fn remove(&mut self, id: usize) {
        self.member.set(id, false);
    }

    pub fn len(&self) -> usize {
        self.member.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.member.is_clear()
    }

    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.member.ones()
    }

    pub fn complement(&self) -> EdgeSubset {
        let mut member = self.member.clone();
        member.toggle_range(..);
        EdgeSubset { member }
    }

    pub fn is_disjoint(&self, other: &EdgeSubset) -> bool {
        self.member.is_disjoint(&other.member)
    }

    pub fn union_len(&self, other: &EdgeSubset) -> usize {
        self.member.union_count(&other.member)
    }
}

/// Connected components of a spanning subgraph `(V, sub)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    pub count: usize,
    /// Dense component label per vertex, in `0..count`.
    pub label: Vec<usize>,
}

impl Components {
    pub fn same(&self, u: usize, v: usize) -> bool {
        self.label[u] == self.label[v]
    }
}

/// Union-find with path halving and union by size.
#[derive(Debug, Clone)]
pub(crate) struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
    sets: usize,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            size: vec![1; n],
            sets: n,
        }
    }

    pub(crate) fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        self.sets -= 1;
        true
    }
}

/// Counts components of `(V, sub)`; isolated vertices are components and
/// arcs are followed regardless of orientation.
pub fn components(sub: &EdgeSubset, g: &UnionMultigraph) -> Components {
    let mut dsu = DisjointSets::new(g.n());
    for id in sub.ids() {
        let e = g.edge(id);
        dsu.union(e.tail, e.head);
    }
    let mut label = vec![usize::MAX; g.n()];
    let mut root_label = vec![usize::MAX; g.n()];
    let mut count = 0;
    for v in 0..g.n() {
        let r = dsu.find(v);
        if root_label[r] == usize::MAX {
            root_label[r] = count;
            count += 1;
        }
        label[v] = root_label[r];
    }
    debug_assert_eq!(count, dsu.sets);
    Components { count, label }
}

/// Degree condition of a vertex-disjoint cycle cover: degree 2 everywhere
/// (undirected, with multiplicity) or in/out degree 1 (directed).
pub fn is_cycle_cover(sub: &EdgeSubset, g: &UnionMultigraph) -> bool {
    let n = g.n();
    let mut out = vec![0u8; n];
    let mut inc = vec![0u8; n];
    for id in sub.ids() {
        let e = g.edge(id);
        out[e.tail] += 1;
        inc[e.head] += 1;
    }
    if g.is_directed() {
        out.iter().all(|&d| d == 1) && inc.iter().all(|&d| d == 1)
    } else {
        out.iter().zip(&inc).all(|(&a, &b)| a + b == 2)
    }
}

pub fn is_hamiltonian(sub: &EdgeSubset, g: &UnionMultigraph) -> bool {
    sub.len() == g.n() && is_cycle_cover(sub, g) && components(sub, g).count == 1
}

/// Whether the endpoint multiset of `sub` equals the edge set of `t`; edge
/// ids and origin tags play no part.
pub fn subset_equals_tour(sub: &EdgeSubset, g: &UnionMultigraph, t: &Tour) -> bool {
    if t.n() != g.n() || t.is_directed() != g.is_directed() || sub.len() != t.n() {
        return false;
    }
    let mut keys: Vec<_> = sub
        .ids()
        .map(|id| {
            let e = g.edge(id);
            edge_key(e.tail, e.head, g.is_directed())
        })
        .collect();
    keys.sort_unstable();
    keys == t.edge_keys()
}

/// Reads a Hamiltonian subset back as a canonical tour.
pub fn subset_to_tour(sub: &EdgeSubset, g: &UnionMultigraph) -> Option<Tour> {
    if !is_hamiltonian(sub, g) {
        return None;
    }
    let n = g.n();
    let mut order = Vec::with_capacity(n);
    let mut v = 0;
    let mut came_by = usize::MAX;
    for _ in 0..n {
        order.push(v);
        let next = if g.is_directed() {
            g.outgoing(v).iter().copied().find(|&id| sub.contains(id))?
        } else {
            g.incident(v)
                .iter()
                .copied()
                .find(|&id| id != came_by && sub.contains(id))?
        };
        came_by = next;
        v = g.edge(next).other(v);
    }
    Tour::from_vertices(order, g.is_directed()).ok()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoverError {
    #[error("cover halves do not partition the edge set")]
    NotAPartition,
    #[error("z is not a vertex-disjoint cycle cover")]
    ZNotCover,
    #[error("w is not a vertex-disjoint cycle cover")]
    WNotCover,
}

/// A split of the union's edges into two vertex-disjoint cycle covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverPair {
    pub z: EdgeSubset,
    pub w: EdgeSubset,
}

impl CoverPair {
    /// Pairs `z` with its complement.
    pub fn from_z(z: EdgeSubset) -> CoverPair {
        let w = z.complement();
        CoverPair { z, w }
    }

    pub fn swap(&mut self) {
        std::mem::swap(&mut self.z, &mut self.w);
    }

    pub fn validate(&self, g: &UnionMultigraph) -> Result<(), CoverError> {
        if self.z.universe() != g.edge_count()
            || self.w.universe() != g.edge_count()
            || !self.z.is_disjoint(&self.w)
            || self.z.union_len(&self.w) != g.edge_count()
        {
            return Err(CoverError::NotAPartition);
        }
        if !is_cycle_cover(&self.z, g) {
            return Err(CoverError::ZNotCover);
        }
        if !is_cycle_cover(&self.w, g) {
            return Err(CoverError::WNotCover);
        }
        Ok(())
    }
}
