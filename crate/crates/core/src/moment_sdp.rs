//! Level-1 moment relaxation of `lambda_max(H)` in Gram-vector form.
//!
//! Each qubit `i` owns an orthonormal triad `v_{i,0}, v_{i,1}, v_{i,2}` in
//! `R^{3n}`; the moment matrix `M(ik, jl) = v_{i,k} . v_{j,l}` is PSD by
//! construction and never materialized. The objective is
//!
//! ```text
//! sum_e w (1 - alpha v_i0.v_j0 - beta v_i1.v_j1 - gamma v_i2.v_j2)
//! ```
//!
//! and is maximized by block-coordinate ascent: with every other triad fixed
//! the objective is linear in qubit `i`'s triad, and the best orthonormal
//! triad is the polar factor of the `3n x 3` field matrix.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVectorView, Matrix3};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::Instance;
use crate::oracle;
use crate::pauli::ProductState;
use crate::rng::{self, Domain};

const FEASIBILITY_TOL: f64 = 1e-8;
/// Restarts of the product search that seeds the warm start.
const WARM_START_RESTARTS: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum SdpError {
    #[error("solution has {got} qubits, instance has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub restarts: usize,
    /// Stop once a full sweep improves the objective by less than this
    /// fraction of its magnitude.
    pub sweep_tolerance: f64,
    pub max_sweeps: usize,
    pub seed: u64,
    /// Optional product state for the warm-start restart. When absent a short
    /// product search provides one.
    #[serde(skip)]
    pub warm_start: Option<ProductState>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            restarts: 5,
            sweep_tolerance: 1e-10,
            max_sweeps: 10_000,
            seed: 0,
            warm_start: None,
        }
    }
}

impl SolverConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), SdpError> {
        if self.restarts == 0 {
            return Err(SdpError::InvalidConfig("restarts must be positive".into()));
        }
        if self.sweep_tolerance.is_nan() || self.sweep_tolerance <= 0.0 {
            return Err(SdpError::InvalidConfig("sweep tolerance must be positive".into()));
        }
        if self.max_sweeps == 0 {
            return Err(SdpError::InvalidConfig("max_sweeps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub restarts: usize,
    /// Index of the restart that produced the returned solution.
    pub best_restart: usize,
    /// Sweeps taken by the best restart.
    pub sweeps: usize,
    /// Relative improvement of the best restart's final sweep.
    pub final_improvement: f64,
    pub converged: bool,
    /// Final objective of every restart, in restart order.
    pub restart_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentSolution {
    n: usize,
    /// `3n x 3n`; column `3i + k` holds `v_{i,k}`.
    vectors: DMatrix<f64>,
    pub value: f64,
    pub diagnostics: SolverDiagnostics,
}

impl MomentSolution {
    /// Wraps explicit Gram vectors (column `3i + k` is `v_{i,k}`). The value
    /// is left at zero; use [`sdp_objective`] to evaluate it.
    pub fn from_vectors(vectors: DMatrix<f64>) -> Result<Self, SdpError> {
        let cols = vectors.ncols();
        if cols == 0 || !cols.is_multiple_of(3) {
            return Err(SdpError::InvalidConfig(format!(
                "{cols} columns is not a positive multiple of 3"
            )));
        }
        Ok(Self {
            n: cols / 3,
            vectors,
            value: 0.0,
            diagnostics: SolverDiagnostics::default(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn v(&self, i: usize, k: usize) -> DVectorView<'_, f64> {
        self.vectors.column(3 * i + k)
    }

    /// `M(ik, jl) = v_{i,k} . v_{j,l}`.
    pub fn moment(&self, i: usize, k: usize, j: usize, l: usize) -> f64 {
        self.v(i, k).dot(&self.v(j, l))
    }

    /// Header `n value`, then one row `i k <components>` per vector.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {:.16e}\n", self.n, self.value);
        for i in 0..self.n {
            for k in 0..3 {
                write!(out, "{i} {k}").unwrap();
                for x in self.v(i, k).iter() {
                    write!(out, " {x:.16e}").unwrap();
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, SdpError> {
        let bad = |line: usize, msg: String| SdpError::Malformed { line, msg };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hl, header) = lines.next().ok_or_else(|| bad(1, "empty input".into()))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 2 {
            return Err(bad(hl + 1, "expected header `n value`".into()));
        }
        let n: usize = head[0].parse().map_err(|e| bad(hl + 1, format!("{e}")))?;
        let value: f64 = head[1].parse().map_err(|e| bad(hl + 1, format!("{e}")))?;
        if n == 0 {
            return Err(bad(hl + 1, "n must be positive".into()));
        }
        let dim = 3 * n;
        let mut vectors = DMatrix::zeros(dim, dim);
        let mut seen = vec![false; dim];
        for (ln, line) in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 + dim {
                return Err(bad(
                    ln + 1,
                    format!("expected {} fields, found {}", 2 + dim, fields.len()),
                ));
            }
            let i: usize = fields[0].parse().map_err(|e| bad(ln + 1, format!("{e}")))?;
            let k: usize = fields[1].parse().map_err(|e| bad(ln + 1, format!("{e}")))?;
            if i >= n || k >= 3 {
                return Err(bad(ln + 1, format!("index ({i}, {k}) out of range")));
            }
            for (r, f) in fields[2..].iter().enumerate() {
                vectors[(r, 3 * i + k)] = f.parse().map_err(|e| bad(ln + 1, format!("{e}")))?;
            }
            seen[3 * i + k] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(bad(0, format!("missing row for ({}, {})", missing / 3, missing % 3)));
        }
        Ok(Self {
            n,
            vectors,
            value,
            diagnostics: SolverDiagnostics::default(),
        })
    }
}

/// `sum_e w (1 - alpha v_i0.v_j0 - beta v_i1.v_j1 - gamma v_i2.v_j2)`.
pub fn sdp_objective(inst: &Instance, sol: &MomentSolution) -> Result<f64, SdpError> {
    if sol.n != inst.n {
        return Err(SdpError::DimensionMismatch {
            expected: inst.n,
            got: sol.n,
        });
    }
    Ok(objective(inst, &sol.vectors))
}

fn objective(inst: &Instance, v: &DMatrix<f64>) -> f64 {
    inst.edges
        .iter()
        .map(|e| {
            let c = e.coeffs();
            let corr: f64 = (0..3)
                .filter(|&k| c[k] != 0.0)
                .map(|k| c[k] * v.column(3 * e.i + k).dot(&v.column(3 * e.j + k)))
                .sum();
            e.w * (1.0 - corr)
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// `max | ||v_{i,k}|| - 1 |`.
    pub norm_deviation: f64,
    /// `max |v_{i,k} . v_{i,l}|` over `k != l`.
    pub orthogonality_deviation: f64,
    pub passed: bool,
}

pub fn check_feasibility(sol: &MomentSolution) -> FeasibilityReport {
    let mut norm_deviation: f64 = 0.0;
    let mut orthogonality_deviation: f64 = 0.0;
    for i in 0..sol.n {
        for k in 0..3 {
            norm_deviation = norm_deviation.max((sol.v(i, k).norm() - 1.0).abs());
            for l in k + 1..3 {
                orthogonality_deviation = orthogonality_deviation.max(sol.moment(i, k, i, l).abs());
            }
        }
    }
    FeasibilityReport {
        norm_deviation,
        orthogonality_deviation,
        passed: norm_deviation < FEASIBILITY_TOL && orthogonality_deviation < FEASIBILITY_TOL,
    }
}

/// Gram vectors realizing a product state: the moment of `(ik, jk)` for
/// `i != j` equals `r_ik r_jk`, so the objective equals the product energy.
///
/// `v_{i,k} = r_ik e_k + sqrt(1 - r_ik^2) f_{(i + k) mod N}` with `N = max(n, 3)`
/// and `e_*`, `f_*` mutually orthonormal; `3 + N <= 3n` whenever `n >= 2`.
pub fn embed_product_state(state: &ProductState) -> MomentSolution {
    let n = state.len();
    let dim = 3 * n;
    let mut v = DMatrix::zeros(dim, dim);
    if n == 1 {
        v.fill_with_identity();
    } else {
        let big_n = n.max(3);
        for (i, r) in state.bloch().iter().enumerate() {
            let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            for k in 0..3 {
                let rk = if norm > 0.0 { r[k] / norm } else { 0.0 };
                v[(k, 3 * i + k)] = rk;
                v[(3 + (i + k) % big_n, 3 * i + k)] = (1.0 - rk * rk).max(0.0).sqrt();
            }
        }
    }
    MomentSolution {
        n,
        vectors: v,
        value: 0.0,
        diagnostics: SolverDiagnostics::default(),
    }
}

/// Random orthonormal triads from QR of Gaussian `3n x 3` blocks.
fn random_start(n: usize, seed: u64, restart: usize) -> DMatrix<f64> {
    let dim = 3 * n;
    let mut rng = rng::stream(seed, Domain::SolverRestart, restart as u64);
    let mut v = DMatrix::zeros(dim, dim);
    for i in 0..n {
        let g = DMatrix::from_fn(dim, 3, |_, _| rng.sample::<f64, _>(StandardNormal));
        let q = g.qr().q();
        v.columns_mut(3 * i, 3).copy_from(&q);
    }
    v
}

/// Orthonormal polar factor of a tall `m x 3` matrix. The 3x3 SVD runs on the
/// fixed-size triangular factor: the dynamic SVD loses accuracy when entries
/// span many orders of magnitude.
fn polar_factor(g: &DMatrix<f64>) -> DMatrix<f64> {
    let qr = g.clone().qr();
    let r = Matrix3::from_iterator(qr.r().iter().copied());
    let svd = r.svd(true, true);
    let rot = svd.u.expect("requested") * svd.v_t.expect("requested");
    qr.q() * DMatrix::from_iterator(3, 3, rot.iter().copied())
}

struct Run {
    vectors: DMatrix<f64>,
    value: f64,
    sweeps: usize,
    final_improvement: f64,
    converged: bool,
}

/// Block-coordinate ascent from `v` until the relative sweep gain drops below
/// tolerance. The objective is nondecreasing sweep to sweep.
fn ascend(inst: &Instance, adj: &[Vec<usize>], mut v: DMatrix<f64>, cfg: &SolverConfig) -> Run {
    let dim = v.nrows();
    let mut value = objective(inst, &v);
    let mut field = DMatrix::zeros(dim, 3);
    let mut sweeps = 0;
    let mut final_improvement = f64::INFINITY;
    let mut converged = false;
    while sweeps < cfg.max_sweeps {
        sweeps += 1;
        for (i, edges) in adj.iter().enumerate() {
            field.fill(0.0);
            for &ei in edges {
                let e = &inst.edges[ei];
                let other = if e.i == i { e.j } else { e.i };
                let c = e.coeffs();
                for (k, &ck) in c.iter().enumerate() {
                    if ck != 0.0 {
                        field.column_mut(k).axpy(-e.w * ck, &v.column(3 * other + k), 1.0);
                    }
                }
            }
            let scale = field.norm();
            if scale == 0.0 {
                continue;
            }
            // A small proximal pull toward the current triad resolves the
            // polar factor when the field is rank deficient. Any maximizer of
            // tr(V^T (G + tau V_cur)) is at least as good as V_cur for G.
            field += v.columns(3 * i, 3) * (1e-9 * scale);
            let polar = polar_factor(&field);
            v.columns_mut(3 * i, 3).copy_from(&polar);
        }
        let next = objective(inst, &v);
        let gain = next - value;
        debug_assert!(
            gain >= -1e-9 * (1.0 + value.abs()),
            "sweep {sweeps} decreased the objective by {}",
            -gain
        );
        final_improvement = gain / value.abs().max(1.0);
        value = next;
        if final_improvement < cfg.sweep_tolerance {
            converged = true;
            break;
        }
    }
    Run {
        vectors: v,
        value,
        sweeps,
        final_improvement,
        converged,
    }
}

/// Best solution over `cfg.restarts` runs. Restart 0 starts from an embedded
/// product state; the rest from random triads. Runs are independent and
/// merged by value with the lowest restart index winning ties.
pub fn solve_moment_sdp(inst: &Instance, cfg: &SolverConfig) -> Result<MomentSolution, SdpError> {
    cfg.validate()?;
    let adj = oracle::adjacency(inst);
    let warm = match &cfg.warm_start {
        Some(state) => {
            if state.len() != inst.n {
                return Err(SdpError::DimensionMismatch {
                    expected: inst.n,
                    got: state.len(),
                });
            }
            state.clone()
        }
        None => oracle::product_search(inst, WARM_START_RESTARTS, cfg.seed, Domain::WarmStart).state,
    };
    let runs: Vec<Run> = (0..cfg.restarts)
        .into_par_iter()
        .map(|k| {
            let start = if k == 0 {
                embed_product_state(&warm).vectors
            } else {
                random_start(inst.n, cfg.seed, k)
            };
            ascend(inst, &adj, start, cfg)
        })
        .collect();
    let restart_values: Vec<f64> = runs.iter().map(|r| r.value).collect();
    let (best_restart, best) = runs
        .into_iter()
        .enumerate()
        .reduce(|a, b| if b.1.value > a.1.value { b } else { a })
        .expect("restarts > 0");
    Ok(MomentSolution {
        n: inst.n,
        vectors: best.vectors,
        value: best.value,
        diagnostics: SolverDiagnostics {
            restarts: cfg.restarts,
            best_restart,
            sweeps: best.sweeps,
            final_improvement: best.final_improvement,
            converged: best.converged,
            restart_values,
        },
    })
}
