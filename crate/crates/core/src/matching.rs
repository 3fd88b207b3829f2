//! Perfect matching with forced edges: Edmonds' blossom algorithm for
//! general graphs and Hopcroft–Karp for bipartite ones.
//!
//! Forced edges are handled by matching their endpoints up front and
//! removing them from the search. Randomness enters only through
//! [`ScanOrder`], which permutes the root order, the greedy warm start and
//! every adjacency list, so a fixed seed always reproduces the same matching.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("forced edges share vertex {0}")]
    ForcedConflict(usize),
    #[error("forced pair ({0}, {1}) is not an edge of the graph")]
    ForcedNotEdge(usize, usize),
    #[error("graph has no bipartition")]
    NotBipartite,
    #[error("edge ({0}, {1}) is invalid: {2}")]
    InvalidEdge(usize, usize, &'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A simple undirected graph with an optional bipartition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchGraph {
    adj: Vec<Vec<usize>>,
    edge_count: usize,
    sides: Option<Vec<Side>>,
}

impl MatchGraph {
    pub fn new(vertex_count: usize) -> MatchGraph {
        MatchGraph {
            adj: vec![Vec::new(); vertex_count],
            edge_count: 0,
            sides: None,
        }
    }

    pub fn from_edges(
        vertex_count: usize,
        edges: &[(usize, usize)],
    ) -> Result<MatchGraph, MatchError> {
        let mut g = MatchGraph::new(vertex_count);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<(), MatchError> {
        let n = self.adj.len();
        if u >= n || v >= n {
            return Err(MatchError::InvalidEdge(u, v, "vertex out of range"));
        }
        if u == v {
            return Err(MatchError::InvalidEdge(u, v, "self-loop"));
        }
        if self.has_edge(u, v) {
            return Err(MatchError::InvalidEdge(u, v, "parallel edge"));
        }
        if let Some(sides) = &self.sides {
            if sides[u] == sides[v] {
                return Err(MatchError::NotBipartite);
            }
        }
        self.adj[u].push(v);
        self.adj[v].push(u);
        self.edge_count += 1;
        Ok(())
    }

    /// Declares `left` as the left side and everything else as the right side.
    pub fn with_bipartition(mut self, left: &[usize]) -> Result<MatchGraph, MatchError> {
        let mut sides = vec![Side::Right; self.adj.len()];
        for &v in left {
            if v >= sides.len() {
                return Err(MatchError::InvalidEdge(v, v, "vertex out of range"));
            }
            sides[v] = Side::Left;
        }
        for (u, nbrs) in self.adj.iter().enumerate() {
            if nbrs.iter().any(|&v| sides[v] == sides[u]) {
                return Err(MatchError::NotBipartite);
            }
        }
        self.sides = Some(sides);
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj.get(u).is_some_and(|nbrs| nbrs.contains(&v))
    }

    pub fn side(&self, v: usize) -> Option<Side> {
        self.sides.as_ref().map(|s| s[v])
    }

    pub fn is_bipartitioned(&self) -> bool {
        self.sides.is_some()
    }

    /// Each edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }
}

/// A set of vertex-disjoint edges, stored as a mate array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    mate: Vec<Option<usize>>,
}

impl Matching {
    fn from_raw(mate: &[usize]) -> Matching {
        Matching {
            mate: mate.iter().map(|&m| (m != NONE).then_some(m)).collect(),
        }
    }

    /// Builds a matching from explicit pairs; `None` if two pairs share a vertex.
    pub fn from_pairs(vertex_count: usize, pairs: &[(usize, usize)]) -> Option<Matching> {
        let mut mate = vec![None; vertex_count];
        for &(u, v) in pairs {
            if u == v || mate.get(u)?.is_some() || mate.get(v)?.is_some() {
                return None;
            }
            mate[u] = Some(v);
            mate[v] = Some(u);
        }
        Some(Matching { mate })
    }

    pub fn mate(&self, v: usize) -> Option<usize> {
        self.mate[v]
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.mate.get(u).copied().flatten() == Some(v)
    }

    /// Matched pairs `(u, v)` with `u < v`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.mate
            .iter()
            .enumerate()
            .filter_map(|(u, m)| m.filter(|&v| u < v).map(|v| (u, v)))
    }

    pub fn len(&self) -> usize {
        self.mate.iter().filter(|m| m.is_some()).count() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_perfect(&self) -> bool {
        self.mate.iter().all(Option::is_some)
    }

    /// Whether every pair is an edge of `g` and the mate relation is symmetric.
    pub fn is_valid_for(&self, g: &MatchGraph) -> bool {
        self.mate.len() == g.vertex_count()
            && self.mate.iter().enumerate().all(|(u, m)| match *m {
                None => true,
                Some(v) => self.mate[v] == Some(u) && g.has_edge(u, v),
            })
    }
}

/// Adjacency scan order for an engine run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScanOrder {
    #[default]
    Natural,
    Seeded(u64),
}

/// Buffers shared by both engines: the working adjacency (possibly
/// shuffled), root order and the forced-edge bookkeeping.
#[derive(Debug, Clone)]
struct Workspace {
    adj: Vec<Vec<usize>>,
    roots: Vec<usize>,
    mate: Vec<usize>,
    blocked: Vec<bool>,
}

impl Workspace {
    fn new(g: &MatchGraph) -> Workspace {
        let n = g.vertex_count();
        Workspace {
            adj: g.adj.clone(),
            roots: (0..n).collect(),
            mate: vec![NONE; n],
            blocked: vec![false; n],
        }
    }

    /// Resets state, applies `order`, seats the forced pairs and then every
    /// hint pair that is an edge between two still-free vertices.
    fn prepare(
        &mut self,
        g: &MatchGraph,
        forced: &[(usize, usize)],
        hint: &[(usize, usize)],
        order: ScanOrder,
    ) -> Result<(), MatchError> {
        self.mate.fill(NONE);
        self.blocked.fill(false);
        for &(u, v) in forced {
            if !g.has_edge(u, v) {
                return Err(MatchError::ForcedNotEdge(u, v));
            }
            for x in [u, v] {
                if self.blocked[x] {
                    return Err(MatchError::ForcedConflict(x));
                }
                self.blocked[x] = true;
            }
            self.mate[u] = v;
            self.mate[v] = u;
        }
        let n = self.mate.len();
        for &(u, v) in hint {
            if u < n && v < n && self.mate[u] == NONE && self.mate[v] == NONE && g.has_edge(u, v) {
                self.mate[u] = v;
                self.mate[v] = u;
            }
        }
        for (work, orig) in self.adj.iter_mut().zip(&g.adj) {
            work.clone_from(orig);
        }
        self.roots.clear();
        self.roots.extend(0..g.vertex_count());
        if let ScanOrder::Seeded(seed) = order {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            self.roots.shuffle(&mut rng);
            for work in &mut self.adj {
                work.shuffle(&mut rng);
            }
        }
        Ok(())
    }

    fn greedy(&mut self) {
        for &v in &self.roots {
            if self.mate[v] != NONE {
                continue;
            }
            if let Some(&to) = self.adj[v].iter().find(|&&to| self.mate[to] == NONE) {
                self.mate[v] = to;
                self.mate[to] = v;
            }
        }
    }
}

/// Edmonds' blossom algorithm with reusable buffers.
#[derive(Debug, Clone)]
pub struct BlossomMatcher<'g> {
    graph: &'g MatchGraph,
    ws: Workspace,
    parent: Vec<usize>,
    base: Vec<usize>,
    in_tree: Vec<bool>,
    in_blossom: Vec<bool>,
    lca_mark: Vec<u32>,
    lca_stamp: u32,
    queue: VecDeque<usize>,
}

impl<'g> BlossomMatcher<'g> {
    pub fn new(graph: &'g MatchGraph) -> Self {
        let n = graph.vertex_count();
        BlossomMatcher {
            graph,
            ws: Workspace::new(graph),
            parent: vec![NONE; n],
            base: (0..n).collect(),
            in_tree: vec![false; n],
            in_blossom: vec![false; n],
            lca_mark: vec![0; n],
            lca_stamp: 0,
            queue: VecDeque::with_capacity(n),
        }
    }

    /// A perfect matching containing every forced pair, or `None` if none exists.
    pub fn solve(
        &mut self,
        forced: &[(usize, usize)],
        order: ScanOrder,
    ) -> Result<Option<Matching>, MatchError> {
        self.solve_with_hint(forced, &[], order)
    }

    /// Like `solve`, but starts from `hint` (minus pairs clashing with
    /// `forced`) instead of an empty matching, so the result tends to
    /// keep most of it.
    pub fn solve_with_hint(
        &mut self,
        forced: &[(usize, usize)],
        hint: &[(usize, usize)],
        order: ScanOrder,
    ) -> Result<Option<Matching>, MatchError> {
        self.ws.prepare(self.graph, forced, hint, order)?;
        let free = self.ws.blocked.iter().filter(|&&b| !b).count();
        if free % 2 == 1 {
            return Ok(None);
        }
        self.ws.greedy();
        for i in 0..self.ws.roots.len() {
            let root = self.ws.roots[i];
            if self.ws.mate[root] != NONE {
                continue;
            }
            // An exposed vertex without an augmenting path stays exposed
            // in every maximum matching, so the graph has no perfect one.
            match self.find_path(root) {
                NONE => return Ok(None),
                end => self.augment(end),
            }
        }
        Ok(Some(Matching::from_raw(&self.ws.mate)))
    }

    fn lca(&mut self, mut a: usize, mut b: usize) -> usize {
        self.lca_stamp = self.lca_stamp.wrapping_add(1);
        if self.lca_stamp == 0 {
            self.lca_mark.fill(0);
            self.lca_stamp = 1;
        }
        loop {
            a = self.base[a];
            self.lca_mark[a] = self.lca_stamp;
            if self.ws.mate[a] == NONE {
                break;
            }
            a = self.parent[self.ws.mate[a]];
        }
        loop {
            b = self.base[b];
            if self.lca_mark[b] == self.lca_stamp {
                return b;
            }
            b = self.parent[self.ws.mate[b]];
        }
    }

    fn mark_path(&mut self, mut v: usize, b: usize, mut child: usize) {
        while self.base[v] != b {
            let m = self.ws.mate[v];
            self.in_blossom[self.base[v]] = true;
            self.in_blossom[self.base[m]] = true;
            self.parent[v] = child;
            child = m;
            v = self.parent[m];
        }
    }

    /// BFS over alternating paths from `root`; returns the exposed endpoint or `NONE`.
    fn find_path(&mut self, root: usize) -> usize {
        let n = self.graph.vertex_count();
        self.in_tree.fill(false);
        self.parent.fill(NONE);
        for (i, b) in self.base.iter_mut().enumerate() {
            *b = i;
        }
        self.queue.clear();
        self.in_tree[root] = true;
        self.queue.push_back(root);
        while let Some(v) = self.queue.pop_front() {
            for k in 0..self.ws.adj[v].len() {
                let to = self.ws.adj[v][k];
                if self.ws.blocked[to] || self.base[v] == self.base[to] || self.ws.mate[v] == to {
                    continue;
                }
                if to == root || (self.ws.mate[to] != NONE && self.parent[self.ws.mate[to]] != NONE)
                {
                    let cur = self.lca(v, to);
                    self.in_blossom.fill(false);
                    self.mark_path(v, cur, to);
                    self.mark_path(to, cur, v);
                    for i in 0..n {
                        if self.in_blossom[self.base[i]] {
                            self.base[i] = cur;
                            if !self.in_tree[i] {
                                self.in_tree[i] = true;
                                self.queue.push_back(i);
                            }
                        }
                    }
                } else if self.parent[to] == NONE {
                    self.parent[to] = v;
                    let m = self.ws.mate[to];
                    if m == NONE {
                        return to;
                    }
                    self.in_tree[m] = true;
                    self.queue.push_back(m);
                }
            }
        }
        NONE
    }

    fn augment(&mut self, mut v: usize) {
        while v != NONE {
            let pv = self.parent[v];
            let next = self.ws.mate[pv];
            self.ws.mate[v] = pv;
            self.ws.mate[pv] = v;
            v = next;
        }
    }
}

/// Hopcroft–Karp with reusable buffers; requires a bipartitioned graph.
#[derive(Debug, Clone)]
pub struct HopcroftKarpMatcher<'g> {
    graph: &'g MatchGraph,
    ws: Workspace,
    left: Vec<usize>,
    dist: Vec<usize>,
    cursor: Vec<usize>,
    queue: VecDeque<usize>,
}

impl<'g> HopcroftKarpMatcher<'g> {
    pub fn new(graph: &'g MatchGraph) -> Result<Self, MatchError> {
        if !graph.is_bipartitioned() {
            return Err(MatchError::NotBipartite);
        }
        let n = graph.vertex_count();
        Ok(HopcroftKarpMatcher {
            graph,
            ws: Workspace::new(graph),
            left: Vec::new(),
            dist: vec![NONE; n],
            cursor: vec![0; n],
            queue: VecDeque::with_capacity(n),
        })
    }

    pub fn solve(
        &mut self,
        forced: &[(usize, usize)],
        order: ScanOrder,
    ) -> Result<Option<Matching>, MatchError> {
        self.solve_with_hint(forced, &[], order)
    }

    /// Like `solve`, but starts from `hint` (minus pairs clashing with
    /// `forced`) instead of an empty matching, so the result tends to
    /// keep most of it.
    pub fn solve_with_hint(
        &mut self,
        forced: &[(usize, usize)],
        hint: &[(usize, usize)],
        order: ScanOrder,
    ) -> Result<Option<Matching>, MatchError> {
        self.ws.prepare(self.graph, forced, hint, order)?;
        let graph = self.graph;
        let blocked = &self.ws.blocked;
        self.left.clear();
        self.left.extend(
            self.ws
                .roots
                .iter()
                .copied()
                .filter(|&v| !blocked[v] && graph.side(v) == Some(Side::Left)),
        );
        let free = blocked.iter().filter(|&&b| !b).count();
        if 2 * self.left.len() != free {
            return Ok(None);
        }
        self.ws.greedy();
        while self.layer() {
            for i in 0..self.left.len() {
                let u = self.left[i];
                self.cursor[u] = 0;
            }
            for i in 0..self.left.len() {
                let u = self.left[i];
                if self.ws.mate[u] == NONE {
                    self.extend(u);
                }
            }
        }
        if self.left.iter().any(|&u| self.ws.mate[u] == NONE) {
            return Ok(None);
        }
        Ok(Some(Matching::from_raw(&self.ws.mate)))
    }

    /// BFS layering from the exposed left vertices; true if an augmenting path exists.
    fn layer(&mut self) -> bool {
        self.queue.clear();
        for &u in &self.left {
            if self.ws.mate[u] == NONE {
                self.dist[u] = 0;
                self.queue.push_back(u);
            } else {
                self.dist[u] = NONE;
            }
        }
        let mut found = false;
        while let Some(u) = self.queue.pop_front() {
            for &v in &self.ws.adj[u] {
                if self.ws.blocked[v] {
                    continue;
                }
                let w = self.ws.mate[v];
                if w == NONE {
                    found = true;
                } else if self.dist[w] == NONE {
                    self.dist[w] = self.dist[u] + 1;
                    self.queue.push_back(w);
                }
            }
        }
        found
    }

    fn extend(&mut self, u: usize) -> bool {
        while self.cursor[u] < self.ws.adj[u].len() {
            let v = self.ws.adj[u][self.cursor[u]];
            self.cursor[u] += 1;
            if self.ws.blocked[v] {
                continue;
            }
            let w = self.ws.mate[v];
            if w == NONE || (self.dist[w] == self.dist[u].wrapping_add(1) && self.extend(w)) {
                self.ws.mate[u] = v;
                self.ws.mate[v] = u;
                return true;
            }
        }
        self.dist[u] = NONE;
        false
    }
}

/// One-shot general perfect matching; see [`BlossomMatcher`].
pub fn perfect_matching_general(
    g: &MatchGraph,
    forced: &[(usize, usize)],
    order: ScanOrder,
) -> Result<Option<Matching>, MatchError> {
    BlossomMatcher::new(g).solve(forced, order)
}

/// One-shot bipartite perfect matching; see [`HopcroftKarpMatcher`].
pub fn perfect_matching_bipartite(
    g: &MatchGraph,
    forced: &[(usize, usize)],
    order: ScanOrder,
) -> Result<Option<Matching>, MatchError> {
    HopcroftKarpMatcher::new(g)?.solve(forced, order)
}
