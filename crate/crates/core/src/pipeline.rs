//! Solve, round, and compare against the oracles in one call.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::Instance;
use crate::moment_sdp::{solve_moment_sdp, SdpError, SolverConfig};
use crate::oracle::{self, ExactMethod, OracleError};
use crate::ratio_numerics::{approx_ratio_axis, approx_ratio_bfv, Rank};
use crate::rounding::{round, RoundingError, Scheme};

#[derive(Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Solver(#[from] SdpError),
    #[error(transparent)]
    Rounding(#[from] RoundingError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub scheme: Scheme,
    pub trials: usize,
    pub seed: u64,
    pub restarts: usize,
    pub oracle: bool,
    pub product_restarts: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Bfv,
            trials: 100,
            seed: 0,
            restarts: SolverConfig::default().restarts,
            oracle: true,
            product_restarts: oracle::DEFAULT_PRODUCT_RESTARTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub lambda_max: f64,
    pub method: ExactMethod,
    pub residual: f64,
    /// Best product energy found by coordinate ascent; a heuristic lower
    /// bound on the true product optimum.
    pub best_product_lower_bound: f64,
    /// `rounded_energy / lambda_max`.
    pub true_ratio: f64,
    /// `best_product_lower_bound / lambda_max`.
    pub product_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub label: String,
    pub n: usize,
    pub edges: usize,
    pub config: PipelineConfig,
    pub sdp_value: f64,
    pub sdp_converged: bool,
    pub sdp_sweeps: usize,
    pub rounded_energy: f64,
    pub rounded_mean_energy: f64,
    /// `rounded_energy / sdp_value`: a guarantee relative to `lambda_max`
    /// because the relaxation upper-bounds it.
    pub certified_ratio: f64,
    /// Bloch vectors of the best rounded state.
    pub rounded_state: Vec<[f64; 3]>,
    pub oracle: Option<OracleReport>,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

/// Runs product search and exact diagonalization (when enabled), the SDP
/// (warm-started from the product search result), and the rounding scheme.
///
/// Oracle limits are checked before any work is done.
pub fn run_pipeline(inst: &Instance, cfg: &PipelineConfig) -> Result<RatioReport, PipelineError> {
    if cfg.oracle && inst.n > oracle::MATRIX_FREE_MAX_QUBITS {
        return Err(OracleError::TooLarge {
            n: inst.n,
            limit: oracle::MATRIX_FREE_MAX_QUBITS,
            method: ExactMethod::Lanczos,
        }
        .into());
    }
    let product = cfg
        .oracle
        .then(|| oracle::best_product_state(inst, cfg.product_restarts, cfg.seed));
    let solver = SolverConfig {
        restarts: cfg.restarts,
        seed: cfg.seed,
        warm_start: product.as_ref().map(|p| p.state.clone()),
        ..SolverConfig::default()
    };
    let sol = solve_moment_sdp(inst, &solver)?;
    let outcome = round(cfg.scheme, inst, &sol, cfg.trials, cfg.seed)?;
    let oracle = match product {
        Some(p) => {
            let exact = oracle::exact_max_eigenvalue(inst)?;
            Some(OracleReport {
                lambda_max: exact.lambda_max,
                method: exact.method,
                residual: exact.residual,
                best_product_lower_bound: p.energy,
                true_ratio: ratio(outcome.energy, exact.lambda_max),
                product_ratio: ratio(p.energy, exact.lambda_max),
            })
        }
        None => None,
    };
    Ok(RatioReport {
        label: inst.label.clone(),
        n: inst.n,
        edges: inst.edges.len(),
        config: cfg.clone(),
        sdp_value: sol.value,
        sdp_converged: sol.diagnostics.converged,
        sdp_sweeps: sol.diagnostics.sweeps,
        rounded_energy: outcome.energy,
        rounded_mean_energy: outcome.mean_energy(),
        certified_ratio: ratio(outcome.energy, sol.value),
        rounded_state: outcome.state.bloch().to_vec(),
        oracle,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantRow {
    pub scheme: Scheme,
    pub rank: Rank,
    pub step: f64,
    pub t_star: f64,
    /// Sign of the minimizing edge for axis rounding.
    pub gamma_star: Option<f64>,
    pub ratio: f64,
}

/// Worst-case expected ratios of both schemes for ranks 1 to 3, at grid
/// steps 0.01 and 1e-4. Deterministic.
pub fn reproduce_constants() -> Vec<ConstantRow> {
    let mut rows = Vec::new();
    for step in [0.01, 1e-4] {
        for scheme in [Scheme::Bfv, Scheme::Axis] {
            for rank in Rank::ALL {
                let curve = match scheme {
                    Scheme::Bfv => approx_ratio_bfv(rank, step),
                    Scheme::Axis => approx_ratio_axis(rank, step),
                }
                .expect("positive step");
                rows.push(ConstantRow {
                    scheme,
                    rank,
                    step,
                    t_star: curve.minimum.0,
                    gamma_star: curve.minimizing_sign,
                    ratio: curve.minimum.1,
                });
            }
        }
    }
    rows
}
