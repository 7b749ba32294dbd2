//! Weighted Heisenberg-model instances.
//!
//! An instance is an edge list over `n` qubits. Each edge `(i, j)` carries a
//! weight `w >= 0` and coefficients `(alpha, beta, gamma)` in `[-1, 1]` and
//! stands for the two-qubit term
//!
//! ```text
//! w * (I - alpha X_i X_j - beta Y_i Y_j - gamma Z_i Z_j)
//! ```
//!
//! Parallel edges are allowed, which is what lets a general edge be split
//! into a convex combination of hypercube-corner edges.
//!
//! # File format
//!
//! ```text
//! # label: triangle
//! 3 3
//! 0 1 1 0 0 1
//! 1 2 1 0 0 1
//! 0 2 1 0 0 1
//! ```
//!
//! The first non-comment line is `n m`, followed by `m` lines of
//! `i j w alpha beta gamma`. Lines starting with `#` are comments; a leading
//! `# label: ...` comment carries the instance label.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{self, Domain};

/// Tolerance used when validating the `[-1, 1]` coefficient bound.
const COEFF_SLACK: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum InstanceError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: edge ({i}, {j}) out of range for n = {n} (need 0 <= i < j < n)")]
    IndexOutOfRange { line: usize, i: usize, j: usize, n: usize },
    #[error("line {line}: negative weight {w}")]
    NegativeWeight { line: usize, w: f64 },
    #[error("line {line}: coefficient {value} outside [-1, 1]")]
    CoefficientOutOfRange { line: usize, value: f64 },
    #[error("instance must have at least one qubit")]
    NoQubits,
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
}

/// One weighted two-qubit Heisenberg term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Edge {
    pub fn new(i: usize, j: usize, w: f64, coeffs: [f64; 3]) -> Self {
        Self {
            i,
            j,
            w,
            alpha: coeffs[0],
            beta: coeffs[1],
            gamma: coeffs[2],
        }
    }

    /// `(alpha, beta, gamma)` indexed by Pauli axis.
    #[inline]
    pub fn coeffs(&self) -> [f64; 3] {
        [self.alpha, self.beta, self.gamma]
    }
}

/// Which of `(alpha, beta, gamma)` are switched on for a family-uniform
/// instance with coefficients in `{0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FamilyTag {
    pub alpha: bool,
    pub beta: bool,
    pub gamma: bool,
}

impl FamilyTag {
    pub const MAX_CUT: FamilyTag = FamilyTag::new(false, false, true);
    pub const XY: FamilyTag = FamilyTag::new(true, true, false);
    pub const ANTIFERROMAGNET: FamilyTag = FamilyTag::new(true, true, true);

    pub const fn new(alpha: bool, beta: bool, gamma: bool) -> Self {
        Self { alpha, beta, gamma }
    }

    /// Parses a coefficient triple that must be exactly a nonzero `{0,1}^3` point.
    pub fn from_coeffs(c: [f64; 3]) -> Option<Self> {
        let bit = |x: f64| {
            if x == 0.0 {
                Some(false)
            } else if x == 1.0 {
                Some(true)
            } else {
                None
            }
        };
        let tag = Self::new(bit(c[0])?, bit(c[1])?, bit(c[2])?);
        (tag.rank() > 0).then_some(tag)
    }

    /// Number of switched-on Pauli families.
    pub fn rank(&self) -> usize {
        self.active().iter().filter(|&&a| a).count()
    }

    pub fn active(&self) -> [bool; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    pub fn coeffs(&self) -> [f64; 3] {
        self.active().map(|a| if a { 1.0 } else { 0.0 })
    }

    /// Axis indices of the switched-on families, in `(X, Y, Z)` order.
    pub fn active_axes(&self) -> Vec<usize> {
        (0..3).filter(|&k| self.active()[k]).collect()
    }
}

impl std::fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let b = |x: bool| if x { 1 } else { 0 };
        write!(f, "F_{{{},{},{}}}", b(self.alpha), b(self.beta), b(self.gamma))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub n: usize,
    pub edges: Vec<Edge>,
    pub label: String,
}

fn validate_edge(line: usize, n: usize, e: &Edge) -> Result<(), InstanceError> {
    if e.i >= e.j || e.j >= n {
        return Err(InstanceError::IndexOutOfRange {
            line,
            i: e.i,
            j: e.j,
            n,
        });
    }
    if !e.w.is_finite() {
        return Err(InstanceError::Malformed {
            line,
            msg: format!("non-finite weight {}", e.w),
        });
    }
    if e.w < 0.0 {
        return Err(InstanceError::NegativeWeight { line, w: e.w });
    }
    for value in e.coeffs() {
        if !value.is_finite() || value.abs() > 1.0 + COEFF_SLACK {
            return Err(InstanceError::CoefficientOutOfRange { line, value });
        }
    }
    Ok(())
}

impl Instance {
    /// Builds a validated instance. Edge errors report the 1-based edge
    /// position in place of a line number.
    pub fn new(n: usize, edges: Vec<Edge>, label: impl Into<String>) -> Result<Self, InstanceError> {
        if n == 0 {
            return Err(InstanceError::NoQubits);
        }
        for (k, e) in edges.iter().enumerate() {
            validate_edge(k + 1, n, e)?;
        }
        Ok(Self {
            n,
            edges,
            label: label.into(),
        })
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    /// Returns the family tag if every edge carries the same `{0,1}^3`
    /// coefficient triple.
    pub fn family(&self) -> Option<FamilyTag> {
        let first = self.edges.first()?;
        let tag = FamilyTag::from_coeffs(first.coeffs())?;
        self.edges.iter().all(|e| e.coeffs() == first.coeffs()).then_some(tag)
    }

    /// Which Pauli families carry at least one nonzero coefficient.
    pub fn nonzero_families(&self) -> [bool; 3] {
        let mut out = [false; 3];
        for e in &self.edges {
            for (k, c) in e.coeffs().into_iter().enumerate() {
                out[k] |= c != 0.0;
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, InstanceError> {
        let mut label = String::new();
        let mut header: Option<(usize, usize)> = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(comment) = trimmed.strip_prefix('#') {
                if header.is_none() && label.is_empty() {
                    if let Some(l) = comment.trim_start().strip_prefix("label:") {
                        label = l.trim().to_string();
                    }
                }
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            match header {
                None => {
                    if fields.len() != 2 {
                        return Err(malformed(line, "expected header `n m`"));
                    }
                    let n = parse_usize(line, fields[0])?;
                    let m = parse_usize(line, fields[1])?;
                    if n == 0 {
                        return Err(malformed(line, "n must be positive"));
                    }
                    header = Some((n, m));
                    edges.reserve(m);
                }
                Some((n, m)) => {
                    if edges.len() == m {
                        return Err(malformed(line, "more edge lines than declared"));
                    }
                    if fields.len() != 6 {
                        return Err(malformed(line, "expected `i j w alpha beta gamma`"));
                    }
                    let e = Edge {
                        i: parse_usize(line, fields[0])?,
                        j: parse_usize(line, fields[1])?,
                        w: parse_f64(line, fields[2])?,
                        alpha: parse_f64(line, fields[3])?,
                        beta: parse_f64(line, fields[4])?,
                        gamma: parse_f64(line, fields[5])?,
                    };
                    validate_edge(line, n, &e)?;
                    edges.push(e);
                }
            }
        }
        let (n, m) = header.ok_or_else(|| malformed(text.lines().count().max(1), "missing header"))?;
        if edges.len() != m {
            return Err(malformed(
                text.lines().count().max(1),
                &format!("declared {m} edges, found {}", edges.len()),
            ));
        }
        Ok(Self { n, edges, label })
    }

    /// Serializes with 17 significant digits so that `parse` round-trips exactly.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        if !self.label.is_empty() {
            let _ = writeln!(out, "# label: {}", self.label.replace('\n', " "));
        }
        let _ = writeln!(out, "{} {}", self.n, self.edges.len());
        for e in &self.edges {
            let _ = writeln!(
                out,
                "{} {} {:.16e} {:.16e} {:.16e} {:.16e}",
                e.i, e.j, e.w, e.alpha, e.beta, e.gamma
            );
        }
        out
    }
}

fn malformed(line: usize, msg: &str) -> InstanceError {
    InstanceError::Malformed {
        line,
        msg: msg.to_string(),
    }
}

fn parse_usize(line: usize, s: &str) -> Result<usize, InstanceError> {
    s.parse()
        .map_err(|_| malformed(line, &format!("expected a non-negative integer, got `{s}`")))
}

fn parse_f64(line: usize, s: &str) -> Result<f64, InstanceError> {
    s.parse()
        .map_err(|_| malformed(line, &format!("expected a number, got `{s}`")))
}

/// Graph topologies understood by [`generate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphKind {
    SingleEdge,
    Complete {
        n: usize,
    },
    Cycle {
        n: usize,
    },
    /// Complete bipartite graph `K_{left,right}`.
    Bipartite {
        left: usize,
        right: usize,
    },
    RandomGnp {
        n: usize,
        p: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerateParams {
    /// Coefficients placed on every edge.
    pub coeffs: [f64; 3],
    /// Draw weights uniformly from `[0, 1)` instead of using unit weights.
    pub random_weights: bool,
}

impl GenerateParams {
    pub fn family(tag: FamilyTag) -> Self {
        Self {
            coeffs: tag.coeffs(),
            random_weights: false,
        }
    }
}

/// Generates a family-uniform instance. Pure in `(kind, params, seed)`.
pub fn generate(kind: GraphKind, params: GenerateParams, seed: u64) -> Result<Instance, InstanceError> {
    let bad = |msg: &str| Err(InstanceError::InvalidParams(msg.to_string()));
    let (n, pairs, label): (usize, Vec<(usize, usize)>, String) = match kind {
        GraphKind::SingleEdge => (2, vec![(0, 1)], "single_edge".into()),
        GraphKind::Complete { n } => {
            if n < 2 {
                return bad("complete graph needs n >= 2");
            }
            let pairs = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
            (n, pairs, format!("complete_{n}"))
        }
        GraphKind::Cycle { n } => {
            if n < 3 {
                return bad("cycle needs n >= 3");
            }
            let pairs = (0..n)
                .map(|i| {
                    let j = (i + 1) % n;
                    (i.min(j), i.max(j))
                })
                .collect();
            (n, pairs, format!("cycle_{n}"))
        }
        GraphKind::Bipartite { left, right } => {
            if left == 0 || right == 0 {
                return bad("bipartite sides must be non-empty");
            }
            let pairs = (0..left).flat_map(|i| (0..right).map(move |j| (i, left + j))).collect();
            (left + right, pairs, format!("bipartite_{left}_{right}"))
        }
        GraphKind::RandomGnp { n, p } => {
            if n < 2 {
                return bad("random graph needs n >= 2");
            }
            if !(0.0..=1.0).contains(&p) {
                return bad("edge probability must lie in [0, 1]");
            }
            let mut rng = rng::stream(seed, Domain::Generator, 0);
            let mut pairs = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.random::<f64>() < p {
                        pairs.push((i, j));
                    }
                }
            }
            (n, pairs, format!("gnp_{n}_{p}_seed{seed}"))
        }
    };
    if params.coeffs.iter().any(|c| !c.is_finite() || c.abs() > 1.0) {
        return bad("coefficients must lie in [-1, 1]");
    }
    let mut wrng = rng::stream(seed, Domain::Generator, 1);
    let edges = pairs
        .into_iter()
        .map(|(i, j)| {
            let w = if params.random_weights {
                wrng.random::<f64>()
            } else {
                1.0
            };
            Edge::new(i, j, w, params.coeffs)
        })
        .collect();
    Instance::new(n, edges, label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_single_edge_antiferromagnet() {
        let inst = Instance::parse("2 1\n0 1 1.0 1 1 1").unwrap();
        assert_eq!(inst.n, 2);
        assert_eq!(inst.edges.len(), 1);
        assert_eq!(inst.family(), Some(FamilyTag::ANTIFERROMAGNET));
    }

    #[test]
    fn parses_triangle_with_comments() {
        let text = "# label: tri\n3 3\n# an edge\n0 1 1 0 0 1\n1 2 1 0 0 1\n\n0 2 1 0 0 1\n";
        let inst = Instance::parse(text).unwrap();
        assert_eq!(inst.label, "tri");
        assert_eq!(inst.edges.len(), 3);
        assert_eq!(inst.family(), Some(FamilyTag::MAX_CUT));
        assert_eq!(inst.family().unwrap().rank(), 1);
    }

    #[test]
    fn rejects_bad_lines_with_line_numbers() {
        assert_eq!(
            Instance::parse("2 1\n0 1 -1 0 0 1"),
            Err(InstanceError::NegativeWeight { line: 2, w: -1.0 })
        );
        assert!(matches!(
            Instance::parse("2 1\n0 2 1 0 0 1"),
            Err(InstanceError::IndexOutOfRange { line: 2, .. })
        ));
        assert!(matches!(
            Instance::parse("2 1\n1 0 1 0 0 1"),
            Err(InstanceError::IndexOutOfRange { line: 2, .. })
        ));
        assert!(matches!(
            Instance::parse("2 1\n# c\n0 1 1 0 1.5 1"),
            Err(InstanceError::CoefficientOutOfRange { line: 3, .. })
        ));
        assert!(matches!(
            Instance::parse("2 1\n0 1 1 0 x 1"),
            Err(InstanceError::Malformed { line: 2, .. })
        ));
        assert!(matches!(
            Instance::parse("2 2\n0 1 1 0 0 1"),
            Err(InstanceError::Malformed { .. })
        ));
        assert!(matches!(
            Instance::parse("0 0"),
            Err(InstanceError::Malformed { line: 1, .. })
        ));
        assert!(matches!(Instance::parse(""), Err(InstanceError::Malformed { .. })));
    }

    #[test]
    fn zero_weight_and_empty_instances_are_valid() {
        let inst = Instance::parse("3 1\n0 2 0 0.5 0 0").unwrap();
        assert_eq!(inst.edges[0].w, 0.0);
        let empty = Instance::parse("4 0").unwrap();
        assert!(empty.edges.is_empty());
        assert_eq!(empty.family(), None);
    }

    #[test]
    fn generator_shapes() {
        let cyc = generate(
            GraphKind::Cycle { n: 5 },
            GenerateParams::family(FamilyTag::ANTIFERROMAGNET),
            0,
        )
        .unwrap();
        assert_eq!(cyc.edges.len(), 5);
        let mut pairs: Vec<_> = cyc.edges.iter().map(|e| (e.i, e.j)).collect();
        pairs.sort();
        assert_eq!(pairs, vec![(0, 1), (0, 4), (1, 2), (2, 3), (3, 4)]);

        let k4 = generate(GraphKind::Complete { n: 4 }, GenerateParams::family(FamilyTag::XY), 0).unwrap();
        assert_eq!(k4.edges.len(), 6);
        assert_eq!(k4.family(), Some(FamilyTag::XY));

        let kb = generate(
            GraphKind::Bipartite { left: 2, right: 3 },
            GenerateParams::family(FamilyTag::MAX_CUT),
            0,
        )
        .unwrap();
        assert_eq!(kb.n, 5);
        assert_eq!(kb.edges.len(), 6);
    }

    #[test]
    fn gnp_is_deterministic_in_seed() {
        let kind = GraphKind::RandomGnp { n: 8, p: 0.5 };
        let params = GenerateParams {
            coeffs: [1.0, 1.0, 1.0],
            random_weights: true,
        };
        let a = generate(kind, params, 7).unwrap();
        let b = generate(kind, params, 7).unwrap();
        let c = generate(kind, params, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.edges, c.edges);
    }

    #[test]
    fn generator_rejects_invalid_params() {
        let p = GenerateParams::family(FamilyTag::MAX_CUT);
        assert!(generate(GraphKind::Complete { n: 1 }, p, 0).is_err());
        assert!(generate(GraphKind::Cycle { n: 2 }, p, 0).is_err());
        assert!(generate(GraphKind::RandomGnp { n: 5, p: 1.5 }, p, 0).is_err());
        assert!(generate(GraphKind::Bipartite { left: 0, right: 2 }, p, 0).is_err());
    }

    #[test]
    fn family_detection_matches_edge_scan() {
        let mixed = Instance::parse("3 2\n0 1 1 1 1 0\n1 2 1 1 1 1").unwrap();
        assert_eq!(mixed.family(), None);
        let fractional = Instance::parse("2 1\n0 1 1 0.5 0 0").unwrap();
        assert_eq!(fractional.family(), None);
        assert_eq!(fractional.nonzero_families(), [true, false, false]);
    }

    fn arb_instance() -> impl Strategy<Value = Instance> {
        (2usize..7)
            .prop_flat_map(|n| {
                let edge = (0..n, 0..n, 0.0f64..10.0, -1.0f64..=1.0, -1.0f64..=1.0, -1.0f64..=1.0)
                    .prop_filter("distinct endpoints", |(i, j, ..)| i != j)
                    .prop_map(|(i, j, w, a, b, g)| Edge::new(i.min(j), i.max(j), w, [a, b, g]));
                (Just(n), prop::collection::vec(edge, 0..12), "[a-z_0-9]{0,8}")
            })
            .prop_map(|(n, edges, label)| Instance::new(n, edges, label).unwrap())
    }

    proptest! {
        #[test]
        fn serialize_parse_round_trip(inst in arb_instance()) {
            let back = Instance::parse(&inst.serialize()).unwrap();
            prop_assert_eq!(back, inst);
        }
    }
}
