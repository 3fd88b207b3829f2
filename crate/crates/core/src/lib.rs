//! One-sided testing of vertex nonadjacency in the symmetric and asymmetric
//! traveling salesperson polytopes.
//!
//! Two tours `x` and `y` are certainly nonadjacent when the edges of the
//! multigraph `x ∪ y` split into two other complementary Hamiltonian tours.
//! The [`annealer`] searches for such a split with simulated annealing over
//! pairs of vertex-disjoint cycle covers, built by perfect matching
//! ([`cover`], [`matching`]). A `NotAdjacent` verdict always carries a
//! validated witness; `ProbablyAdjacent` may be a miss.

pub mod annealer;
pub mod cli;
pub mod cover;
pub mod fixed;
pub mod graph;
pub mod instances;
pub mod matching;
pub mod oracle;

pub use annealer::{anneal, multistart, solve, AnnealConfig, Mode, Outcome, Verdict, Witness};
pub use graph::{CoverPair, EdgeSubset, Tour, UnionMultigraph};
pub use instances::{parse_instance, Instance};

use thiserror::Error;

/// Union of the per-module errors, for callers that cross module lines.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] graph::GraphError),
    #[error(transparent)]
    Instance(#[from] instances::InstanceError),
    #[error(transparent)]
    Oracle(#[from] oracle::OracleError),
    #[error(transparent)]
    Config(#[from] annealer::ConfigError),
}

#[cfg(test)]
pub(crate) mod test_util {
    use rand::Rng;

    use crate::graph::{EdgeSubset, UnionMultigraph};
    use crate::instances::{random_pair, TourKind};

    /// Ids of `g` whose endpoints match the given 1-based pairs, each id used at most once.
    pub fn pick(g: &UnionMultigraph, pairs: &[(usize, usize)]) -> EdgeSubset {
        let mut used = vec![false; g.edge_count()];
        let mut s = EdgeSubset::empty(g);
        for &(a, b) in pairs {
            let (a, b) = (a - 1, b - 1);
            let key = if g.is_directed() || a <= b {
                (a, b)
            } else {
                (b, a)
            };
            let id = g
                .edges()
                .iter()
                .find(|e| !used[e.id] && e.endpoints() == key)
                .unwrap_or_else(|| panic!("edge {}-{} not in graph", a + 1, b + 1))
                .id;
            used[id] = true;
            s.insert(id);
        }
        s
    }

    pub fn random_union(rng: &mut impl Rng, n: usize, directed: bool) -> UnionMultigraph {
        let n = if directed { n.max(3) } else { n.max(4) };
        let kind = if rng.gen_bool(0.5) {
            TourKind::Random
        } else {
            TourKind::Pyramidal
        };
        let (x, y) = random_pair(kind, n, directed, rng).unwrap();
        UnionMultigraph::from_tours(&x, &y).unwrap()
    }
}
