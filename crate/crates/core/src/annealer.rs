//! Simulated annealing over pairs of complementary cycle covers.
//!
//! The state is a [`CoverPair`] of the union multigraph and the energy is the
//! total number of cycles in both halves, so energy 2 means two
//! complementary Hamiltonian tours.

use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cover::{CoverSolver, MatchInstance};
use crate::fixed::FixedEdgeQueue;
use crate::graph::{
    components, is_cycle_cover, subset_equals_tour, subset_to_tour, CoverPair, EdgeSubset, Tour,
    UnionMultigraph,
};
use crate::instances::Instance;
use crate::matching::ScanOrder;
use crate::oracle::validate_instance_witness;

/// Default initial temperature per vertex. With T = initT / k the walk
/// stays warm (T above 1) for the first 10n iterations.
pub const INIT_T_PER_VERTEX: f64 = 10.0;

/// Resampling budget for one random exchange.
const RANDOM_ATTEMPTS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Neighbors from perfect matchings with a queue of fixed edges.
    #[default]
    Match,
    /// Neighbors from random edge exchanges between `z` and `w`.
    Random,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("initT must be positive and finite, got {0}")]
    Temperature(f64),
    #[error("iterN must be at least 1")]
    NoIterations,
    #[error("fixEdgesN = {fix} exceeds the {edges} edges of the instance")]
    TooManyFixed { fix: usize, edges: usize },
    #[error("exEdgesN must be in 1..={n}, got {ex}")]
    Exchange { ex: usize, n: usize },
    #[error("ansN must be at least 1")]
    NoRuns,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealConfig {
    pub init_t: f64,
    pub iter_n: usize,
    pub fix_edges_n: usize,
    pub mode: Mode,
    pub ex_edges_n: usize,
    pub ans_n: usize,
    pub seed: u64,
}

impl AnnealConfig {
    /// Defaults for an instance on `n` vertices: initT = 10n, iterN = 8000,
    /// fixEdgesN = n / 3.
    pub fn for_size(n: usize) -> AnnealConfig {
        AnnealConfig {
            init_t: INIT_T_PER_VERTEX * n as f64,
            iter_n: 8000,
            fix_edges_n: n / 3,
            mode: Mode::Match,
            ex_edges_n: 3,
            ans_n: 1,
            seed: 0,
        }
    }

    pub fn validate(&self, g: &UnionMultigraph) -> Result<(), ConfigError> {
        if !(self.init_t > 0.0 && self.init_t.is_finite()) {
            return Err(ConfigError::Temperature(self.init_t));
        }
        if self.iter_n == 0 {
            return Err(ConfigError::NoIterations);
        }
        if self.fix_edges_n > g.edge_count() {
            return Err(ConfigError::TooManyFixed {
                fix: self.fix_edges_n,
                edges: g.edge_count(),
            });
        }
        if self.mode == Mode::Random {
            if self.ex_edges_n == 0 || self.ex_edges_n > g.n() {
                return Err(ConfigError::Exchange {
                    ex: self.ex_edges_n,
                    n: g.n(),
                });
            }
            if self.ans_n == 0 {
                return Err(ConfigError::NoRuns);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct AnnealState {
    pub pair: CoverPair,
    pub energy: usize,
    pub queue: FixedEdgeQueue,
    pub iteration: usize,
    pub temperature: f64,
}

/// Two complementary Hamiltonian tours found in the union.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub z: Tour,
    pub w: Tour,
    pub z_edges: EdgeSubset,
    pub w_edges: EdgeSubset,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    NotAdjacent(Witness),
    ProbablyAdjacent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub outcome: Outcome,
    /// Candidate states generated before stopping.
    pub iterations: usize,
    pub elapsed: Duration,
}

impl Verdict {
    pub fn is_not_adjacent(&self) -> bool {
        matches!(self.outcome, Outcome::NotAdjacent(_))
    }

    pub fn witness(&self) -> Option<&Witness> {
        match &self.outcome {
            Outcome::NotAdjacent(w) => Some(w),
            Outcome::ProbablyAdjacent => None,
        }
    }
}

pub fn energy(pair: &CoverPair, g: &UnionMultigraph) -> usize {
    components(&pair.z, g).count + components(&pair.w, g).count
}

pub fn cooling(init_t: f64, k: usize) -> f64 {
    debug_assert!(k >= 1);
    init_t / k as f64
}

/// Metropolis rule: improvements always pass, otherwise one uniform draw
/// against exp(-(candE - currE) / T).
pub fn accept<R: Rng + ?Sized>(curr_e: usize, cand_e: usize, t: f64, rng: &mut R) -> bool {
    if cand_e < curr_e {
        return true;
    }
    let delta = (cand_e - curr_e) as f64;
    rng.gen::<f64>() < (-delta / t).exp()
}

/// Matching-mode neighbor. Mutates `state.queue` (and may swap `state.pair`)
/// whether or not the candidate is later accepted.
pub fn neighbor_match<R: Rng + ?Sized>(
    state: &mut AnnealState,
    g: &UnionMultigraph,
    solver: &mut CoverSolver<'_>,
    rng: &mut R,
) -> CoverPair {
    let cz = components(&state.pair.z, g);
    let mut cw = None;
    if cz.count == 1 {
        let c = components(&state.pair.w, g);
        if c.count > 1 {
            state.pair.swap();
            let z = &state.pair.z;
            state.queue.retain(|&id| z.contains(id));
            cw = Some(c);
        }
    }
    // after a swap the old w components are the new z components
    let cz = cw.unwrap_or(cz);
    let crossing: Vec<usize> = state
        .pair
        .w
        .ids()
        .filter(|&id| {
            let (u, v) = g.edge(id).endpoints();
            !cz.same(u, v)
        })
        .collect();
    let pushed = if crossing.is_empty() {
        // z is Hamiltonian and so is w: the pair is {x, y} itself
        let w: Vec<usize> = state.pair.w.ids().collect();
        w[rng.gen_range(0..w.len())]
    } else {
        crossing[rng.gen_range(0..crossing.len())]
    };
    state.queue.push(g, pushed);
    let (cand, surviving) = solver.cover_near(
        &state.pair.z,
        &state.queue.to_vec(),
        ScanOrder::Seeded(rng.gen()),
    );
    state.queue.replace(&surviving);
    cand
}

/// Random-exchange neighbor: trade `ex` random edges of `z` for `ex` random
/// edges of `w`, keeping both halves cycle covers. Falls back to the
/// unchanged pair after a bounded number of attempts.
pub fn neighbor_random<R: Rng + ?Sized>(
    pair: &CoverPair,
    g: &UnionMultigraph,
    ex: usize,
    rng: &mut R,
) -> CoverPair {
    if ex == 0 {
        return pair.clone();
    }
    let z: Vec<usize> = pair.z.ids().collect();
    let w: Vec<usize> = pair.w.ids().collect();
    let ex = ex.min(z.len());
    for _ in 0..RANDOM_ATTEMPTS {
        let mut cand = pair.clone();
        for i in sample(rng, z.len(), ex) {
            cand.z.remove(z[i]);
            cand.w.insert(z[i]);
        }
        for i in sample(rng, w.len(), ex) {
            cand.w.remove(w[i]);
            cand.z.insert(w[i]);
        }
        if is_cycle_cover(&cand.z, g) && is_cycle_cover(&cand.w, g) {
            return cand;
        }
    }
    pair.clone()
}

fn is_success(pair: &CoverPair, inst: &Instance, energy: usize) -> bool {
    if energy != 2 {
        return false;
    }
    match inst.tours() {
        None => true,
        Some((x, y)) => [&pair.z, &pair.w].iter().all(|s| {
            !subset_equals_tour(s, inst.graph(), x) && !subset_equals_tour(s, inst.graph(), y)
        }),
    }
}

fn witness(pair: &CoverPair, inst: &Instance) -> Witness {
    let g = inst.graph();
    assert!(
        validate_instance_witness(inst, &pair.z, &pair.w),
        "annealer produced an invalid witness"
    );
    Witness {
        z: subset_to_tour(&pair.z, g).expect("validated Hamiltonian"),
        w: subset_to_tour(&pair.w, g).expect("validated Hamiltonian"),
        z_edges: pair.z.clone(),
        w_edges: pair.w.clone(),
    }
}

/// One annealing run driven by `rng`.
pub fn anneal_with_rng<R: Rng + ?Sized>(
    inst: &Instance,
    cfg: &AnnealConfig,
    rng: &mut R,
) -> Verdict {
    let start = Instant::now();
    let g = inst.graph();
    let minst = MatchInstance::for_graph(g);
    let mut solver = CoverSolver::new(g, &minst);
    let (pair, _) = solver.cover_with_fixed(&[], ScanOrder::Seeded(rng.gen()));
    let e = energy(&pair, g);
    let mut state = AnnealState {
        pair,
        energy: e,
        queue: FixedEdgeQueue::new(cfg.fix_edges_n),
        iteration: 0,
        temperature: cfg.init_t,
    };
    let done = |state: &AnnealState| Verdict {
        outcome: if is_success(&state.pair, inst, state.energy) {
            Outcome::NotAdjacent(witness(&state.pair, inst))
        } else {
            Outcome::ProbablyAdjacent
        },
        iterations: state.iteration,
        elapsed: start.elapsed(),
    };

    for k in 1..=cfg.iter_n {
        debug_assert_eq!(state.pair.validate(g), Ok(()));
        if is_success(&state.pair, inst, state.energy) {
            return done(&state);
        }
        let cand = match cfg.mode {
            Mode::Match => neighbor_match(&mut state, g, &mut solver, rng),
            Mode::Random => neighbor_random(&state.pair, g, cfg.ex_edges_n, rng),
        };
        state.iteration = k;
        let cand_e = energy(&cand, g);
        if accept(state.energy, cand_e, state.temperature, rng) {
            state.pair = cand;
            state.energy = cand_e;
        }
        state.temperature = cooling(cfg.init_t, k);
    }
    done(&state)
}

/// A single run seeded from `cfg.seed`.
pub fn anneal(inst: &Instance, cfg: &AnnealConfig) -> Result<Verdict, ConfigError> {
    cfg.validate(inst.graph())?;
    Ok(anneal_with_rng(inst, cfg, &mut run_rng(cfg.seed, 0)))
}

fn run_rng(seed: u64, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run);
    rng
}

/// Up to `ansN` independent runs, each on its own stream of `cfg.seed`;
/// stops at the first success.
pub fn multistart(inst: &Instance, cfg: &AnnealConfig) -> Result<Verdict, ConfigError> {
    cfg.validate(inst.graph())?;
    let mut elapsed = Duration::ZERO;
    let mut iterations = 0;
    for run in 0..cfg.ans_n.max(1) {
        let v = anneal_with_rng(inst, cfg, &mut run_rng(cfg.seed, run as u64));
        elapsed += v.elapsed;
        iterations += v.iterations;
        if v.is_not_adjacent() {
            return Ok(Verdict {
                outcome: v.outcome,
                iterations,
                elapsed,
            });
        }
    }
    Ok(Verdict {
        outcome: Outcome::ProbablyAdjacent,
        iterations,
        elapsed,
    })
}

/// [`anneal`] in match mode, [`multistart`] in random mode.
pub fn solve(inst: &Instance, cfg: &AnnealConfig) -> Result<Verdict, ConfigError> {
    match cfg.mode {
        Mode::Match => anneal(inst, cfg),
        Mode::Random => multistart(inst, cfg),
    }
}
