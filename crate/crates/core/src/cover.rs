//! Cycle covers of the union multigraph via perfect matching.
//!
//! Undirected unions use a `K_{4,2}` gadget per vertex: four ports (one per
//! incident edge id) and two inner vertices joined to every port. The inner
//! vertices absorb exactly two ports, so the two ports matched across
//! gadgets name the vertex's two cover edges. Directed unions split every
//! vertex into a left and right copy and map arc `u -> v` to `(u_L, v_R)`.

use thiserror::Error;

use crate::fixed::FixedEdgeQueue;
use crate::graph::{CoverPair, EdgeSubset, UnionMultigraph};
use crate::matching::{
    BlossomMatcher, HopcroftKarpMatcher, MatchError, MatchGraph, Matching, ScanOrder,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("matching is not perfect")]
    NotPerfect,
    #[error("the {0} reduction needs a {1} multigraph")]
    WrongOrientation(&'static str, &'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    UndirectedGadget,
    DirectedBipartite,
}

/// A matching graph derived from a union multigraph, together with the
/// matching-graph pair that stands for each multigraph edge id.
#[derive(Debug, Clone)]
pub struct MatchInstance {
    graph: MatchGraph,
    port_of: Vec<(usize, usize)>,
    kind: InstanceKind,
}

pub const GADGET_SIZE: usize = 6;

/// Port vertex of multigraph vertex `v` for its `slot`-th incident edge.
pub fn gadget_port(v: usize, slot: usize) -> usize {
    GADGET_SIZE * v + slot
}

/// The two inner vertices of `v`'s gadget.
pub fn gadget_inner(v: usize) -> [usize; 2] {
    [GADGET_SIZE * v + 4, GADGET_SIZE * v + 5]
}

impl MatchInstance {
    pub fn for_graph(g: &UnionMultigraph) -> MatchInstance {
        if g.is_directed() {
            build_bipartite_instance(g).expect("directed")
        } else {
            build_gadget_instance(g).expect("undirected")
        }
    }

    pub fn graph(&self) -> &MatchGraph {
        &self.graph
    }

    pub fn kind(&self) -> InstanceKind {
        self.kind
    }

    /// Matching-graph pair standing for multigraph edge `id`.
    /// The matching whose extracted cover is `z`. Pairs are only
    /// meaningful when `z` is a cycle cover of `g`.
    pub fn matching_of(&self, z: &EdgeSubset, g: &UnionMultigraph) -> Vec<(usize, usize)> {
        let mut pairs: Vec<(usize, usize)> = z.ids().map(|id| self.port_of[id]).collect();
        if self.kind == InstanceKind::UndirectedGadget {
            for v in 0..g.n() {
                let inner = gadget_inner(v);
                let outside = g
                    .incident(v)
                    .iter()
                    .enumerate()
                    .filter(|&(_, &id)| !z.contains(id))
                    .map(|(slot, _)| gadget_port(v, slot));
                pairs.extend(outside.zip(inner));
            }
        }
        pairs
    }

    pub fn port_of(&self, id: usize) -> (usize, usize) {
        self.port_of[id]
    }
}

pub fn build_gadget_instance(g: &UnionMultigraph) -> Result<MatchInstance, ReductionError> {
    if g.is_directed() {
        return Err(ReductionError::WrongOrientation("gadget", "undirected"));
    }
    let n = g.n();
    let mut graph = MatchGraph::new(GADGET_SIZE * n);
    for v in 0..n {
        for inner in gadget_inner(v) {
            for slot in 0..4 {
                graph
                    .add_edge(inner, gadget_port(v, slot))
                    .expect("gadget edges are distinct");
            }
        }
    }
    let slot_of = |v: usize, id: usize| {
        g.incident(v)
            .iter()
            .position(|&e| e == id)
            .expect("edge is incident")
    };
    let mut port_of = Vec::with_capacity(g.edge_count());
    for e in g.edges() {
        let a = gadget_port(e.tail, slot_of(e.tail, e.id));
        let b = gadget_port(e.head, slot_of(e.head, e.id));
        graph.add_edge(a, b).expect("ports are used once");
        port_of.push((a, b));
    }
    Ok(MatchInstance {
        graph,
        port_of,
        kind: InstanceKind::UndirectedGadget,
    })
}

/// Parallel arcs share one bipartite edge; extraction assigns that edge to one copy.
pub fn build_bipartite_instance(g: &UnionMultigraph) -> Result<MatchInstance, ReductionError> {
    if !g.is_directed() {
        return Err(ReductionError::WrongOrientation("bipartite", "directed"));
    }
    let n = g.n();
    let mut graph = MatchGraph::new(2 * n)
        .with_bipartition(&(0..n).collect::<Vec<_>>())
        .expect("empty graph");
    let mut port_of = Vec::with_capacity(g.edge_count());
    for e in g.edges() {
        let pair = (e.tail, n + e.head);
        if !graph.has_edge(pair.0, pair.1) {
            graph.add_edge(pair.0, pair.1).expect("edge crosses sides");
        }
        port_of.push(pair);
    }
    Ok(MatchInstance {
        graph,
        port_of,
        kind: InstanceKind::DirectedBipartite,
    })
}

/// Reads the cover `z` off a perfect matching; `w` is its complement.
pub fn extract_cover(
    m: &Matching,
    inst: &MatchInstance,
    g: &UnionMultigraph,
) -> Result<CoverPair, ReductionError> {
    extract_preferring(m, inst, g, &[])
}

/// Like [`extract_cover`], but when parallel arcs share a matched pair the
/// copy listed in `preferred` goes to `z`.
fn extract_preferring(
    m: &Matching,
    inst: &MatchInstance,
    g: &UnionMultigraph,
    preferred: &[usize],
) -> Result<CoverPair, ReductionError> {
    if !m.is_perfect() {
        return Err(ReductionError::NotPerfect);
    }
    let mut z = EdgeSubset::empty(g);
    let mut claimed = vec![false; inst.graph.vertex_count()];
    for id in preferred.iter().copied().chain(0..g.edge_count()) {
        let (a, b) = inst.port_of[id];
        if m.contains(a, b) && !claimed[a] {
            claimed[a] = true;
            z.insert(id);
        }
    }
    Ok(CoverPair::from_z(z))
}

#[derive(Debug, Clone)]
enum Engine<'a> {
    Blossom(BlossomMatcher<'a>),
    HopcroftKarp(HopcroftKarpMatcher<'a>),
}

impl Engine<'_> {
    fn solve(
        &mut self,
        forced: &[(usize, usize)],
        hint: &[(usize, usize)],
        order: ScanOrder,
    ) -> Result<Option<Matching>, MatchError> {
        match self {
            Engine::Blossom(e) => e.solve_with_hint(forced, hint, order),
            Engine::HopcroftKarp(e) => e.solve_with_hint(forced, hint, order),
        }
    }
}

/// A matching engine bound to one instance, reused across SA iterations.
#[derive(Debug, Clone)]
pub struct CoverSolver<'a> {
    g: &'a UnionMultigraph,
    inst: &'a MatchInstance,
    engine: Engine<'a>,
    forced: Vec<(usize, usize)>,
}

impl<'a> CoverSolver<'a> {
    pub fn new(g: &'a UnionMultigraph, inst: &'a MatchInstance) -> Self {
        let engine = match inst.kind {
            InstanceKind::UndirectedGadget => Engine::Blossom(BlossomMatcher::new(&inst.graph)),
            InstanceKind::DirectedBipartite => Engine::HopcroftKarp(
                HopcroftKarpMatcher::new(&inst.graph).expect("bipartition is set"),
            ),
        };
        CoverSolver {
            g,
            inst,
            engine,
            forced: Vec::new(),
        }
    }

    /// A cover whose `z` contains every surviving fixed edge. Conflicting
    /// entries are evicted first; if the rest admits no cover the oldest
    /// entry is dropped and the matcher rerun. Returns the ids actually used.
    pub fn cover_with_fixed(
        &mut self,
        fixed: &[usize],
        order: ScanOrder,
    ) -> (CoverPair, Vec<usize>) {
        self.solve(fixed, None, order)
    }

    /// [`Self::cover_with_fixed`] with the matcher started from the matching
    /// of `near`, so the result differs from `near` mostly around the fixed
    /// edges.
    pub fn cover_near(
        &mut self,
        near: &EdgeSubset,
        fixed: &[usize],
        order: ScanOrder,
    ) -> (CoverPair, Vec<usize>) {
        self.solve(fixed, Some(near), order)
    }

    fn solve(
        &mut self,
        fixed: &[usize],
        near: Option<&EdgeSubset>,
        order: ScanOrder,
    ) -> (CoverPair, Vec<usize>) {
        let hint = near.map_or_else(Vec::new, |z| self.inst.matching_of(z, self.g));
        let mut surviving = FixedEdgeQueue::sanitize(self.g, fixed);
        loop {
            self.forced.clear();
            self.forced
                .extend(surviving.iter().map(|&id| self.inst.port_of[id]));
            let m = self
                .engine
                .solve(&self.forced, &hint, order)
                .expect("sanitized fixed edges never conflict");
            if let Some(m) = m {
                let pair = extract_preferring(&m, self.inst, self.g, &surviving)
                    .expect("engine returned a perfect matching");
                debug_assert!(surviving.iter().all(|&id| pair.z.contains(id)));
                return (pair, surviving);
            }
            assert!(
                !surviving.is_empty(),
                "union multigraph has no cycle cover; regularity invariant broken"
            );
            surviving.remove(0);
        }
    }
}

/// One-shot [`CoverSolver::cover_with_fixed`].
pub fn cover_with_fixed(
    g: &UnionMultigraph,
    inst: &MatchInstance,
    fixed: &[usize],
    order: ScanOrder,
) -> (CoverPair, Vec<usize>) {
    CoverSolver::new(g, inst).cover_with_fixed(fixed, order)
}
