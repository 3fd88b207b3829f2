//! Command-line front end and the experiment harness behind it.

use std::fmt::{self, Write as _};
use std::io::{self, Read, Write};
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::annealer::{solve, AnnealConfig, ConfigError, Mode};
use crate::graph::Tour;
use crate::instances::{parse_instance, random_pair, Instance, InstanceError, TourKind};
use crate::oracle::{validate_instance_witness, ExhaustiveSearch};

/// Resampling budget when looking for an oracle-confirmed pyramidal pair.
const FILTER_ATTEMPTS: usize = 10_000;
/// Search nodes the oracle may spend on one candidate pair before the pair
/// is discarded as undecided.
const FILTER_NODES: u64 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateCandidate {
    Match,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TourType {
    Random,
    Pyramidal,
}

#[derive(Debug, Parser)]
#[command(
    name = "tsp-adjacency",
    version,
    about = "Test vertex nonadjacency on the (A)TSP polytope by simulated annealing"
)]
struct Args {
    /// Number of vertices; a comma-separated list runs one row per size.
    #[arg(long = "N", value_delimiter = ',')]
    n: Vec<usize>,
    /// Trials per size.
    #[arg(long)]
    times: Option<usize>,
    #[arg(long = "iterN", default_value_t = 8000)]
    iter_n: usize,
    #[arg(long = "stateCandidate", value_enum, default_value_t = StateCandidate::Match)]
    state_candidate: StateCandidate,
    /// Edges exchanged per step (random mode only).
    #[arg(long = "exEdgesN")]
    ex_edges_n: Option<usize>,
    /// Multistart runs (random mode only).
    #[arg(long = "ansN")]
    ans_n: Option<usize>,
    /// Fixed-edge queue size, default N/3 (match mode only).
    #[arg(long = "fixEdgesN")]
    fix_edges_n: Option<usize>,
    #[arg(long)]
    directed: bool,
    #[arg(long = "tourType", value_enum)]
    tour_type: Option<TourType>,
    /// Initial temperature, default 10N.
    #[arg(long = "initT")]
    init_t: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Instance file instead of generated tours.
    #[arg(long)]
    input: Option<PathBuf>,
    /// CSV destination.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Generated {
        sizes: Vec<usize>,
        directed: bool,
        kind: TourKind,
    },
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub source: Source,
    pub times: usize,
    pub iter_n: usize,
    pub mode: Mode,
    pub ex_edges_n: usize,
    pub ans_n: usize,
    pub fix_edges_n: Option<usize>,
    pub init_t: Option<f64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl RunPlan {
    /// Annealer settings for an instance on `n` vertices.
    pub fn config(&self, n: usize, seed: u64) -> AnnealConfig {
        let base = AnnealConfig::for_size(n);
        AnnealConfig {
            init_t: self.init_t.unwrap_or(base.init_t),
            iter_n: self.iter_n,
            fix_edges_n: self.fix_edges_n.unwrap_or(base.fix_edges_n),
            mode: self.mode,
            ex_edges_n: self.ex_edges_n,
            ans_n: self.ans_n,
            seed,
        }
    }

    pub fn label(&self) -> RateLabel {
        match self.source {
            Source::Generated {
                kind: TourKind::Pyramidal,
                ..
            } => RateLabel::Accuracy,
            _ => RateLabel::Found,
        }
    }
}

#[derive(Debug, Error)]
pub enum UsageError {
    #[error(transparent)]
    Clap(#[from] clap::Error),
    #[error("{0}")]
    Invalid(String),
}

impl UsageError {
    /// `--help` and `--version` surface as errors but are not failures.
    pub fn is_informational(&self) -> bool {
        use clap::error::ErrorKind;
        matches!(self, UsageError::Clap(e)
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion))
    }
}

fn invalid(msg: impl Into<String>) -> UsageError {
    UsageError::Invalid(msg.into())
}

/// Parses a full argv, program name first.
pub fn parse_args<I, T>(argv: I) -> Result<RunPlan, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let a = Args::try_parse_from(argv)?;
    let mode = match a.state_candidate {
        StateCandidate::Match => Mode::Match,
        StateCandidate::Random => Mode::Random,
    };
    match mode {
        Mode::Match if a.ex_edges_n.is_some() => {
            return Err(invalid(
                "--exEdgesN is used only with --stateCandidate=random",
            ))
        }
        Mode::Match if a.ans_n.is_some() => {
            return Err(invalid("--ansN is used only with --stateCandidate=random"))
        }
        Mode::Random if a.fix_edges_n.is_some() => {
            return Err(invalid(
                "--fixEdgesN is used only with --stateCandidate=match",
            ))
        }
        _ => {}
    }
    if a.iter_n == 0 {
        return Err(invalid("--iterN must be at least 1"));
    }
    if let Some(t) = a.init_t {
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid("--initT must be positive"));
        }
    }
    let ex_edges_n = a.ex_edges_n.unwrap_or(3);
    let ans_n = a.ans_n.unwrap_or(1);
    if ex_edges_n == 0 {
        return Err(invalid("--exEdgesN must be at least 1"));
    }
    if ans_n == 0 {
        return Err(invalid("--ansN must be at least 1"));
    }

    let (source, times) = match a.input {
        Some(path) => {
            if !a.n.is_empty() || a.directed || a.tour_type.is_some() {
                return Err(invalid(
                    "--input takes N and orientation from the file; drop --N, --directed and --tourType",
                ));
            }
            (Source::File(path), a.times.unwrap_or(1))
        }
        None => {
            if a.n.is_empty() {
                return Err(invalid("--N is required unless --input is given"));
            }
            let min = if a.directed { 3 } else { 4 };
            for &n in &a.n {
                if n < min {
                    return Err(invalid(format!(
                        "N = {n} admits no two distinct {} tours; need N >= {min}",
                        if a.directed { "directed" } else { "undirected" }
                    )));
                }
                if let Some(f) = a.fix_edges_n {
                    if f > 2 * n {
                        return Err(invalid(format!("--fixEdgesN {f} exceeds 2N = {}", 2 * n)));
                    }
                }
                if mode == Mode::Random && ex_edges_n > n {
                    return Err(invalid(format!("--exEdgesN {ex_edges_n} exceeds N = {n}")));
                }
            }
            let kind = match a.tour_type.unwrap_or(TourType::Random) {
                TourType::Random => TourKind::Random,
                TourType::Pyramidal => TourKind::Pyramidal,
            };
            (
                Source::Generated {
                    sizes: a.n,
                    directed: a.directed,
                    kind,
                },
                a.times.unwrap_or(50),
            )
        }
    };
    if times == 0 {
        return Err(invalid("--times must be at least 1"));
    }
    Ok(RunPlan {
        source,
        times,
        iter_n: a.iter_n,
        mode,
        ex_edges_n,
        ans_n,
        fix_edges_n: a.fix_edges_n,
        init_t: a.init_t,
        seed: a.seed,
        out: a.out,
    })
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Input {
        path: PathBuf,
        #[source]
        source: InstanceError,
    },
    #[error(transparent)]
    Generate(#[from] InstanceError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("no pair satisfying the complementary-tour condition found for N = {0}")]
    NoSatisfiablePair(usize),
    #[error("invalid witness at N = {n}, trial {trial}: {instance}")]
    WitnessValidation {
        n: usize,
        trial: usize,
        instance: String,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::WitnessValidation { .. } => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateLabel {
    /// Instances known to satisfy the condition.
    Accuracy,
    /// Ground truth unknown.
    Found,
}

impl fmt::Display for RateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateLabel::Accuracy => "Accuracy, %",
            RateLabel::Found => "Found, %",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialRecord {
    pub n: usize,
    pub trial: usize,
    pub instance: Instance,
    pub found: bool,
    pub iterations: usize,
    pub elapsed_ms: OrderedMs,
    pub witness: Option<(Tour, Tour)>,
}

/// Milliseconds, compared bitwise so records can derive `Eq`.
#[derive(Debug, Clone, Copy)]
pub struct OrderedMs(pub f64);

impl PartialEq for OrderedMs {
    fn eq(&self, other: &Self) -> bool {
        self.0.to_bits() == other.0.to_bits()
    }
}

impl Eq for OrderedMs {}

#[derive(Debug, Clone, PartialEq)]
pub struct StatsRow {
    pub n: usize,
    pub trials: usize,
    pub found: usize,
    pub not_found: usize,
    pub tnf_avg_ms: Option<f64>,
    pub tf_avg_ms: Option<f64>,
    pub t_avg_ms: f64,
    pub acc: f64,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    (count > 0).then(|| sum / count as f64)
}

impl StatsRow {
    /// Aggregates the trials of one size.
    pub fn from_trials(n: usize, trials: &[TrialRecord]) -> StatsRow {
        let found = trials.iter().filter(|t| t.found).count();
        let ms = |want: bool| {
            mean(
                trials
                    .iter()
                    .filter(|t| t.found == want)
                    .map(|t| t.elapsed_ms.0),
            )
        };
        StatsRow {
            n,
            trials: trials.len(),
            found,
            not_found: trials.len() - found,
            tnf_avg_ms: ms(false),
            tf_avg_ms: ms(true),
            t_avg_ms: mean(trials.iter().map(|t| t.elapsed_ms.0)).unwrap_or(0.0),
            acc: if trials.is_empty() {
                0.0
            } else {
                100.0 * found as f64 / trials.len() as f64
            },
        }
    }

    /// The row as written to CSV, timings and accuracy at two decimals.
    pub fn quantized(&self) -> StatsRow {
        let q = |x: f64| format!("{x:.2}").parse::<f64>().expect("formatted float");
        StatsRow {
            tnf_avg_ms: self.tnf_avg_ms.map(q),
            tf_avg_ms: self.tf_avg_ms.map(q),
            t_avg_ms: q(self.t_avg_ms),
            acc: q(self.acc),
            ..self.clone()
        }
    }
}

pub const CSV_HEADER: [&str; 8] = [
    "N",
    "trials",
    "found",
    "not_found",
    "TNF_avg_ms",
    "TF_avg_ms",
    "T_avg_ms",
    "Acc",
];

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"))
}

pub fn write_csv<W: Write>(rows: &[StatsRow], w: W) -> Result<(), csv::Error> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(CSV_HEADER)?;
    for r in rows {
        wr.write_record([
            r.n.to_string(),
            r.trials.to_string(),
            r.found.to_string(),
            r.not_found.to_string(),
            fmt_opt(r.tnf_avg_ms),
            fmt_opt(r.tf_avg_ms),
            format!("{:.2}", r.t_avg_ms),
            format!("{:.2}", r.acc),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

#[derive(Debug, Error)]
pub enum CsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Field { line: u64, message: String },
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<StatsRow>, CsvError> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(CsvError::Field {
            line: 1,
            message: format!("expected header {}", CSV_HEADER.join(",")),
        });
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let err = |field: &str, v: &str| CsvError::Field {
            line,
            message: format!("bad {field} value {v:?}"),
        };
        let int = |i: usize| {
            rec[i]
                .trim()
                .parse::<usize>()
                .map_err(|_| err(CSV_HEADER[i], &rec[i]))
        };
        let real = |i: usize| {
            rec[i]
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| err(CSV_HEADER[i], &rec[i]))
        };
        let opt = |i: usize| match rec[i].trim() {
            "-" => Ok(None),
            _ => real(i).map(Some),
        };
        let row = StatsRow {
            n: int(0)?,
            trials: int(1)?,
            found: int(2)?,
            not_found: int(3)?,
            tnf_avg_ms: opt(4)?,
            tf_avg_ms: opt(5)?,
            t_avg_ms: real(6)?,
            acc: real(7)?,
        };
        if row.found.checked_add(row.not_found) != Some(row.trials) {
            return Err(CsvError::Field {
                line,
                message: "found + not_found must equal trials".into(),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Fixed-width table for the terminal.
pub fn render_table(rows: &[StatsRow], label: RateLabel) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>6} {:>7} {:>7} {:>9} {:>12} {:>12} {:>12} {:>12}",
        "N", "trials", "found", "notFound", "TNF_avg, ms", "TF_avg, ms", "T_avg, ms", label
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:>6} {:>7} {:>7} {:>9} {:>12} {:>12} {:>12.2} {:>12.2}",
            r.n,
            r.trials,
            r.found,
            r.not_found,
            fmt_opt(r.tnf_avg_ms),
            fmt_opt(r.tf_avg_ms),
            r.t_avg_ms,
            r.acc
        );
    }
    s
}

#[derive(Debug, Clone)]
pub struct Report {
    pub rows: Vec<StatsRow>,
    pub trials: Vec<TrialRecord>,
    pub label: RateLabel,
}

fn trial_rng(seed: u64, n: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 32) | trial as u64);
    rng
}

/// A generated pair. Pyramidal pairs are resampled until the exhaustive
/// search confirms the condition; pairs it cannot decide within its node
/// budget are skipped too.
fn generate(
    kind: TourKind,
    n: usize,
    directed: bool,
    rng: &mut ChaCha8Rng,
) -> Result<Instance, RunError> {
    let oracle = ExhaustiveSearch {
        max_n: usize::MAX,
        node_limit: FILTER_NODES,
    };
    for _ in 0..FILTER_ATTEMPTS {
        let (x, y) = random_pair(kind, n, directed, rng)?;
        let inst = Instance::from_tours(x, y).map_err(InstanceError::from)?;
        if kind != TourKind::Pyramidal || matches!(oracle.search(&inst), Ok(Some(_))) {
            return Ok(inst);
        }
    }
    Err(RunError::NoSatisfiablePair(n))
}

fn run_trial(
    plan: &RunPlan,
    inst: Instance,
    trial: usize,
    seed: u64,
) -> Result<TrialRecord, RunError> {
    let n = inst.n();
    let v = solve(&inst, &plan.config(n, seed))?;
    let witness = match v.witness() {
        Some(w) if validate_instance_witness(&inst, &w.z_edges, &w.w_edges) => {
            Some((w.z.clone(), w.w.clone()))
        }
        Some(_) => {
            return Err(RunError::WitnessValidation {
                n,
                trial,
                instance: crate::instances::serialize_instance(&inst),
            })
        }
        None => None,
    };
    Ok(TrialRecord {
        n,
        trial,
        found: witness.is_some(),
        iterations: v.iterations,
        elapsed_ms: OrderedMs(v.elapsed.as_secs_f64() * 1e3),
        witness,
        instance: inst,
    })
}

/// Runs every trial of the plan. Trials run in parallel, each on its own
/// RNG stream of `plan.seed`, so results do not depend on scheduling.
pub fn run_experiment(plan: &RunPlan) -> Result<Report, RunError> {
    let mut rows = Vec::new();
    let mut all = Vec::new();
    let groups: Vec<(usize, Option<Instance>)> = match &plan.source {
        Source::Generated { sizes, .. } => sizes.iter().map(|&n| (n, None)).collect(),
        Source::File(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| RunError::Io {
                path: path.clone(),
                source,
            })?;
            let inst = parse_instance(&text).map_err(|source| RunError::Input {
                path: path.clone(),
                source,
            })?;
            vec![(inst.n(), Some(inst))]
        }
    };
    for (n, fixed) in groups {
        let trials = (0..plan.times)
            .into_par_iter()
            .map(|trial| {
                let mut rng = trial_rng(plan.seed, n, trial);
                let inst = match (&fixed, &plan.source) {
                    (Some(inst), _) => inst.clone(),
                    (None, Source::Generated { directed, kind, .. }) => {
                        generate(*kind, n, *directed, &mut rng)?
                    }
                    (None, Source::File(_)) => unreachable!("file instances are preloaded"),
                };
                let seed = rng.gen();
                run_trial(plan, inst, trial, seed)
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(StatsRow::from_trials(n, &trials));
        all.extend(trials);
    }
    Ok(Report {
        rows,
        trials: all,
        label: plan.label(),
    })
}
