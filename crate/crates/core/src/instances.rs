//! Instance generation (random and pyramidal tours) and the line-based
//! instance file format.
//!
//! ```text
//! # optional comments
//! tu 6            # tu | td | gu | gd, then n
//! 1 4 5 3 2 6     # t*: two permutation lines
//! 1 2 6 4 3 5
//! ```
//!
//! Graph files (`gu`/`gd`) carry `2n` lines `u v` instead; for `gd` each
//! line is an arc `tail head`.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::graph::{GraphError, Tour, UnionMultigraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("regularity violation: {0}")]
    RegularityViolation(String),
    #[error("graph is disconnected")]
    DisconnectedGraph,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("only one distinct {kind} tour exists on {n} vertices")]
    NoDistinctPair { kind: &'static str, n: usize },
}

impl InstanceError {
    fn parse(line: usize, message: impl Into<String>) -> Self {
        InstanceError::Parse {
            line,
            message: message.into(),
        }
    }
}

/// An adjacency question: two tours, or a raw regular multigraph whose
/// tours are unknown.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    tours: Option<(Tour, Tour)>,
    graph: UnionMultigraph,
}

impl Instance {
    pub fn from_tours(x: Tour, y: Tour) -> Result<Instance, GraphError> {
        let graph = UnionMultigraph::from_tours(&x, &y)?;
        Ok(Instance {
            tours: Some((x, y)),
            graph,
        })
    }

    pub fn from_graph(graph: UnionMultigraph) -> Instance {
        Instance { tours: None, graph }
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn is_directed(&self) -> bool {
        self.graph.is_directed()
    }

    pub fn graph(&self) -> &UnionMultigraph {
        &self.graph
    }

    pub fn tours(&self) -> Option<(&Tour, &Tour)> {
        self.tours.as_ref().map(|(x, y)| (x, y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TourKind {
    Random,
    Pyramidal,
}

/// Uniform over cyclic orders (and, when undirected, over reversal classes).
pub fn random_tour<R: Rng + ?Sized>(n: usize, directed: bool, rng: &mut R) -> Tour {
    assert!(n >= 3, "tours need at least 3 vertices");
    let mut order: Vec<usize> = (0..n).collect();
    order[1..].shuffle(rng);
    Tour::from_vertices(order, directed).expect("shuffled permutation")
}

/// `(1, ascending run, n, descending run)` with every middle vertex placed
/// on either run by a fair coin.
pub fn random_pyramidal<R: Rng + ?Sized>(n: usize, directed: bool, rng: &mut R) -> Tour {
    assert!(n >= 3, "tours need at least 3 vertices");
    let ascending: Vec<bool> = (1..n - 1).map(|_| rng.gen_bool(0.5)).collect();
    pyramidal_from_sides(n, directed, &ascending)
}

/// Pyramidal tour from an explicit side assignment of vertices `2..n-1`
/// (`sides[i]` true puts label `i + 2` on the ascending run).
pub fn pyramidal_from_sides(n: usize, directed: bool, sides: &[bool]) -> Tour {
    assert_eq!(sides.len(), n - 2);
    let mut order = Vec::with_capacity(n);
    order.push(0);
    order.extend((1..n - 1).filter(|&v| sides[v - 1]));
    order.push(n - 1);
    order.extend((1..n - 1).rev().filter(|&v| !sides[v - 1]));
    Tour::from_vertices(order, directed).expect("pyramidal order is a permutation")
}

/// Whether some rotation (or reflection, when undirected) of `t` reads as
/// `1, ascending..., n, descending...`.
pub fn is_pyramidal(t: &Tour) -> bool {
    let check = |order: &[usize]| {
        let n = order.len();
        let top = order.iter().position(|&v| v == n - 1).expect("n present");
        order[..top].windows(2).all(|w| w[0] < w[1]) && order[top..].windows(2).all(|w| w[0] > w[1])
    };
    let order = t.vertices();
    if check(order) {
        return true;
    }
    if t.is_directed() {
        return false;
    }
    let mut rev = vec![order[0]];
    rev.extend(order[1..].iter().rev());
    check(&rev)
}

/// Random tours number (n-1)! directed and (n-1)!/2 undirected; pyramidal
/// ones 2^(n-2) and 2^(n-3). Only undirected n = 3 leaves a single tour.
fn has_two_distinct_tours(n: usize, directed: bool) -> bool {
    n >= 4 || (directed && n >= 3)
}

/// Draws two distinct tours of the given kind, resampling `y` on collision.
pub fn random_pair<R: Rng + ?Sized>(
    kind: TourKind,
    n: usize,
    directed: bool,
    rng: &mut R,
) -> Result<(Tour, Tour), InstanceError> {
    if n < 3 {
        return Err(GraphError::TooSmall(n).into());
    }
    if !has_two_distinct_tours(n, directed) {
        return Err(InstanceError::NoDistinctPair {
            kind: match kind {
                TourKind::Random => "random",
                TourKind::Pyramidal => "pyramidal",
            },
            n,
        });
    }
    let draw = |rng: &mut R| match kind {
        TourKind::Random => random_tour(n, directed, rng),
        TourKind::Pyramidal => random_pyramidal(n, directed, rng),
    };
    let x = draw(rng);
    loop {
        let y = draw(rng);
        if y != x {
            return Ok((x, y));
        }
    }
}

/// Tokenizes one line of 1-based labels into a tour.
pub fn parse_tour_line(line: &str, directed: bool) -> Result<Tour, InstanceError> {
    let labels = line
        .split_whitespace()
        .map(|tok| {
            tok.parse::<usize>()
                .map_err(|_| InstanceError::parse(1, format!("invalid label {tok:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Tour::from_permutation(&labels, directed)?)
}

/// Largest vertex count accepted from a file.
pub const MAX_VERTICES: usize = 1 << 20;

pub fn parse_instance(text: &str) -> Result<Instance, InstanceError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines
        .next()
        .ok_or_else(|| InstanceError::parse(1, "missing header"))?;
    let mut head = header.split_whitespace();
    let tag = head.next().unwrap_or_default();
    let (is_graph, directed) = match tag {
        "tu" => (false, false),
        "td" => (false, true),
        "gu" => (true, false),
        "gd" => (true, true),
        other => {
            return Err(InstanceError::parse(
                hline,
                format!("unknown header {other:?}, expected tu, td, gu or gd"),
            ))
        }
    };
    let n: usize = head
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| InstanceError::parse(hline, "header needs a vertex count"))?;
    if head.next().is_some() {
        return Err(InstanceError::parse(hline, "trailing tokens in header"));
    }
    if !(3..=MAX_VERTICES).contains(&n) {
        return Err(InstanceError::parse(
            hline,
            format!("vertex count {n} outside 3..={MAX_VERTICES}"),
        ));
    }

    let labels = |lno: usize, line: &str| -> Result<Vec<usize>, InstanceError> {
        line.split_whitespace()
            .map(|tok| match tok.parse::<usize>() {
                Ok(v) if (1..=n).contains(&v) => Ok(v),
                _ => Err(InstanceError::parse(
                    lno,
                    format!("invalid vertex label {tok:?} (expected 1..={n})"),
                )),
            })
            .collect()
    };

    let instance = if is_graph {
        let mut pairs = Vec::with_capacity(2 * n);
        for _ in 0..2 * n {
            let (lno, line) = lines.next().ok_or_else(|| {
                InstanceError::parse(hline, format!("expected {} edge lines", 2 * n))
            })?;
            let vs = labels(lno, line)?;
            if vs.len() != 2 {
                return Err(InstanceError::parse(
                    lno,
                    "edge line needs exactly two labels",
                ));
            }
            if vs[0] == vs[1] {
                return Err(InstanceError::parse(lno, "self-loop"));
            }
            pairs.push((vs[0] - 1, vs[1] - 1));
        }
        let g = UnionMultigraph::from_edges(n, directed, &pairs).map_err(|e| match e {
            GraphError::RegularityViolation { .. } => {
                InstanceError::RegularityViolation(e.to_string())
            }
            GraphError::Disconnected => InstanceError::DisconnectedGraph,
            other => InstanceError::Graph(other),
        })?;
        Instance::from_graph(g)
    } else {
        let mut tours = Vec::with_capacity(2);
        for _ in 0..2 {
            let (lno, line) = lines
                .next()
                .ok_or_else(|| InstanceError::parse(hline, "expected two tour lines"))?;
            let vs = labels(lno, line)?;
            if vs.len() != n {
                return Err(InstanceError::parse(
                    lno,
                    format!("tour has {} labels, expected {n}", vs.len()),
                ));
            }
            let t = Tour::from_permutation(&vs, directed)
                .map_err(|e| InstanceError::parse(lno, e.to_string()))?;
            tours.push(t);
        }
        let y = tours.pop().expect("two tours");
        let x = tours.pop().expect("two tours");
        Instance::from_tours(x, y)?
    };
    if let Some((lno, _)) = lines.next() {
        return Err(InstanceError::parse(lno, "unexpected trailing content"));
    }
    Ok(instance)
}

/// Canonical text form; [`parse_instance`] reads it back to an equal instance.
pub fn serialize_instance(inst: &Instance) -> String {
    let d = if inst.is_directed() { 'd' } else { 'u' };
    let mut out = String::new();
    match inst.tours() {
        Some((x, y)) => {
            let _ = writeln!(out, "t{d} {}", inst.n());
            let _ = writeln!(out, "{x}");
            let _ = writeln!(out, "{y}");
        }
        None => {
            let _ = writeln!(out, "g{d} {}", inst.n());
            for e in inst.graph().edges() {
                let _ = writeln!(out, "{} {}", e.tail + 1, e.head + 1);
            }
        }
    }
    out
}

/// Two permutation lines, `z` then `w`.
pub fn serialize_witness(z: &Tour, w: &Tour) -> String {
    format!("{z}\n{w}\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::{HashMap, HashSet};

    #[test]
    fn three_vertices_undirected_has_one_tour() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            assert_eq!(random_tour(3, false, &mut rng).labels(), vec![1, 2, 3]);
        }
        assert!(matches!(
            random_pair(TourKind::Random, 3, false, &mut rng),
            Err(InstanceError::NoDistinctPair { .. })
        ));
        assert!(matches!(
            random_pair(TourKind::Pyramidal, 3, false, &mut rng),
            Err(InstanceError::NoDistinctPair { .. })
        ));
        assert!(random_pair(TourKind::Pyramidal, 4, false, &mut rng).is_ok());
        assert!(random_pair(TourKind::Random, 3, true, &mut rng).is_ok());
    }

    #[test]
    fn three_vertices_directed_is_a_fair_coin() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let hits = (0..4000)
            .filter(|_| random_tour(3, true, &mut rng).labels() == vec![1, 2, 3])
            .count();
        assert!((1800..2200).contains(&hits), "{hits}");
    }

    #[test]
    fn four_vertex_tours_are_uniform() {
        // (n-1)!/2 = 3 undirected tours; chi-square with 2 dof at 0.01 is 9.21.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        let draws = 10_000;
        for _ in 0..draws {
            *counts
                .entry(random_tour(4, false, &mut rng).labels())
                .or_default() += 1;
        }
        assert_eq!(counts.len(), 3);
        let expected = draws as f64 / 3.0;
        let chi2: f64 = counts
            .values()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 9.21, "chi2 = {chi2}");
    }

    #[test]
    fn pyramidal_definition() {
        // n=6, ascending {2,3}
        let t = pyramidal_from_sides(6, true, &[true, true, false, false]);
        assert_eq!(t.labels(), vec![1, 2, 3, 6, 5, 4]);
        let t = pyramidal_from_sides(4, true, &[false, false]);
        assert_eq!(t.labels(), vec![1, 4, 3, 2]);
        assert!(is_pyramidal(&t));
        let u = pyramidal_from_sides(4, false, &[false, false]);
        assert_eq!(u.labels(), vec![1, 2, 3, 4]);
        assert!(is_pyramidal(&u));
        assert!(!is_pyramidal(
            &Tour::from_permutation(&[1, 3, 2, 5, 4], true).unwrap()
        ));
    }

    #[test]
    fn all_directed_pyramidal_tours_on_six_are_reached() {
        let all: HashSet<_> = (0..16u32)
            .map(|mask| {
                let sides: Vec<bool> = (0..4).map(|i| mask >> i & 1 == 1).collect();
                pyramidal_from_sides(6, true, &sides)
            })
            .collect();
        assert_eq!(all.len(), 16);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let seen: HashSet<_> = (0..1000)
            .map(|_| random_pyramidal(6, true, &mut rng))
            .collect();
        assert_eq!(seen, all);
    }

    #[test]
    fn parse_tour_pair() {
        let inst = parse_instance("# example\ntu 8\n1 2 4 7 6 8 5 3\n1 2 3 4 6 7 8 5\n").unwrap();
        assert_eq!(inst.n(), 8);
        assert!(!inst.is_directed());
        let (x, _) = inst.tours().unwrap();
        assert_eq!(x.labels(), vec![1, 2, 4, 7, 6, 8, 5, 3]);
    }

    #[test]
    fn parse_directed_graph() {
        let text = "gd 6\n1 2\n1 5\n2 5\n2 6\n3 1\n3 2\n4 1\n4 3\n5 4\n5 6\n6 3\n6 4\n";
        let inst = parse_instance(text).unwrap();
        assert!(inst.tours().is_none());
        assert!(inst.is_directed());
        assert_eq!(inst.graph().edge_count(), 12);
        assert_eq!(serialize_instance(&inst), text);
    }

    #[test]
    fn degree_three_vertex_is_rejected() {
        // vertex 1 has degree 3, vertex 2 degree 5
        let text = "gu 5\n1 2\n2 3\n3 4\n4 5\n5 2\n1 3\n2 4\n3 5\n4 1\n5 2\n";
        assert!(matches!(
            parse_instance(text),
            Err(InstanceError::RegularityViolation(_))
        ));
    }

    #[test]
    fn disconnected_graph_is_rejected() {
        let text = "gu 6\n1 2\n2 3\n3 1\n1 2\n2 3\n3 1\n4 5\n5 6\n6 4\n4 5\n5 6\n6 4\n";
        assert_eq!(parse_instance(text), Err(InstanceError::DisconnectedGraph));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_instance("tu 4\n1 2 3 4\n1 2 x 3\n").unwrap_err();
        assert!(
            matches!(err, InstanceError::Parse { line: 3, .. }),
            "{err:?}"
        );
        let err = parse_instance("tq 4\n").unwrap_err();
        assert!(matches!(err, InstanceError::Parse { line: 1, .. }));
        let err = parse_instance("tu 4\n1 2 3 4\n1 2 2 3\n").unwrap_err();
        assert!(matches!(err, InstanceError::Parse { line: 3, .. }));
        let err = parse_instance("tu 4\n1 2 3 4\n1 2 4 3\n1 2 3 4\n").unwrap_err();
        assert!(matches!(err, InstanceError::Parse { line: 4, .. }));
        let err = parse_instance("tu 4\n1 2 3 4\n1 4 3 2\n").unwrap_err();
        assert_eq!(err, InstanceError::Graph(GraphError::IdenticalTours));
        assert!(parse_instance("").is_err());
        assert!(parse_instance("gu 4\n1 2\n").is_err());
    }

    #[test]
    fn witness_lines() {
        let z = Tour::from_permutation(&[1, 2, 4, 6, 7, 8, 5, 3], false).unwrap();
        let w = Tour::from_permutation(&[1, 2, 3, 4, 7, 6, 8, 5], false).unwrap();
        assert_eq!(
            serialize_witness(&z, &w),
            "1 2 4 6 7 8 5 3\n1 2 3 4 7 6 8 5\n"
        );
        let d = Tour::from_permutation(&[1, 3, 2], true).unwrap();
        assert_eq!(d.to_string(), "1 3 2");
    }

    #[test]
    fn parse_tour_line_accepts_whitespace() {
        let t = parse_tour_line("  3 1\t2 ", true).unwrap();
        assert_eq!(t.labels(), vec![1, 2, 3]);
        assert!(parse_tour_line("1 1 2", true).is_err());
    }

    proptest! {
        #[test]
        fn serialize_then_parse_is_identity(seed in any::<u64>(), n in 4usize..20, directed: bool, pyr: bool, raw: bool) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let kind = if pyr { TourKind::Pyramidal } else { TourKind::Random };
            let (x, y) = random_pair(kind, n, directed, &mut rng).unwrap();
            prop_assert!(!pyr || (is_pyramidal(&x) && is_pyramidal(&y)));
            let mut inst = Instance::from_tours(x, y).unwrap();
            if raw {
                inst = Instance::from_graph(inst.graph().unattributed());
            }
            let text = serialize_instance(&inst);
            let back = parse_instance(&text).unwrap();
            prop_assert_eq!(serialize_instance(&back), text);
            prop_assert_eq!(back, inst);
        }
    }
}
