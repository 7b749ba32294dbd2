//! Expected overlap of projection rounding and the per-edge ratio minimizations.
//!
//! For unit vectors `u, v` and a Gaussian `r x d` matrix `Z`,
//!
//! ```text
//! E[ Zu/|Zu| . Zv/|Zv| ] = g(r) t 2F1(1/2, 1/2; r/2 + 1; t^2),   t = u.v
//! g(r) = (2/r) (Gamma((r+1)/2) / Gamma(r/2))^2
//! ```
//!
//! Only ranks 1, 2 and 3 occur, so the Gamma ratios are exact constants.

use std::f64::consts::{FRAC_2_PI, LN_2, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NumericsError {
    #[error("rank must be 1, 2 or 3, got {0}")]
    InvalidRank(usize),
    #[error("argument {0} outside [0, 1]")]
    ArgumentOutOfRange(f64),
    #[error("grid step must be positive, got {0}")]
    InvalidStep(f64),
}

/// Number of nonzero Pauli families, or the target dimension of projection rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Rank(usize);

impl Rank {
    pub const ONE: Rank = Rank(1);
    pub const TWO: Rank = Rank(2);
    pub const THREE: Rank = Rank(3);
    pub const ALL: [Rank; 3] = [Rank::ONE, Rank::TWO, Rank::THREE];

    pub fn new(r: usize) -> Result<Self, NumericsError> {
        match r {
            1..=3 => Ok(Rank(r)),
            _ => Err(NumericsError::InvalidRank(r)),
        }
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// `g(r) = (2/r) (Gamma((r+1)/2) / Gamma(r/2))^2`.
    pub fn g(self) -> f64 {
        match self.0 {
            1 => 2.0 / PI,
            2 => PI / 4.0,
            _ => 8.0 / (3.0 * PI),
        }
    }
}

impl TryFrom<usize> for Rank {
    type Error = NumericsError;
    fn try_from(r: usize) -> Result<Self, Self::Error> {
        Rank::new(r)
    }
}

impl From<Rank> for usize {
    fn from(r: Rank) -> usize {
        r.0
    }
}

const SERIES_CAP: usize = 1_000_000;

/// Plain Gauss series `sum (a)_n (b)_n / (c)_n z^n / n!` for `|z| <= 1/2`.
fn gauss_series(a: f64, b: f64, c: f64, z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..SERIES_CAP {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// `2F1(1/2, 1/2; r/2 + 1; z)` for `z` in `[0, 1]`.
///
/// The defining series is used for `z <= 1/2`. Above that the series in
/// `1 - z` from the connection formula is used, since the direct series
/// converges only algebraically near `z = 1` (error ~ N^{-r/2}).
pub fn hyp2f1_half(r: Rank, z: f64) -> Result<f64, NumericsError> {
    if !(0.0..=1.0).contains(&z) {
        return Err(NumericsError::ArgumentOutOfRange(z));
    }
    let c = r.0 as f64 / 2.0 + 1.0;
    if z <= 0.5 {
        return Ok(gauss_series(0.5, 0.5, c, z));
    }
    let w = 1.0 - z;
    Ok(match r.0 {
        // c - a - b = 1/2
        1 => PI / 2.0 / z.sqrt() - w.sqrt() * gauss_series(1.0, 1.0, 1.5, w),
        // c - a - b = 1: logarithmic case
        2 => 4.0 / PI + w / PI * log_case_series(w),
        // c - a - b = 3/2
        _ => 3.0 * PI / 8.0 * gauss_series(0.5, 0.5, -0.5, w) + w.powf(1.5) * gauss_series(2.0, 2.0, 2.5, w),
    })
}

/// `sum_n (3/2)_n^2 / (n! (n+1)!) w^n [ln w - psi(n+1) - psi(n+2) + 2 psi(n+3/2)]`
/// with the Euler constant cancelled out of the digamma combination.
fn log_case_series(w: f64) -> f64 {
    if w == 0.0 {
        return 0.0;
    }
    let ln_w = w.ln();
    let mut coef = 1.0; // (3/2)_n^2 / (n! (n+1)!) w^n
    let mut h_n = 0.0; // H_n
    let mut odd = 1.0; // sum_{k=1}^{n+1} 1/(2k-1)
    let mut sum = 0.0;
    for n in 0..SERIES_CAP {
        let nf = n as f64;
        let h_n1 = h_n + 1.0 / (nf + 1.0);
        let term = coef * (ln_w - h_n - h_n1 + 4.0 * odd - 4.0 * LN_2);
        sum += term;
        if n > 0 && term.abs() < 1e-17 * sum.abs() {
            break;
        }
        coef *= (1.5 + nf) * (1.5 + nf) / ((nf + 1.0) * (nf + 2.0)) * w;
        h_n = h_n1;
        odd += 1.0 / (2.0 * nf + 3.0);
    }
    sum
}

/// Expected overlap `F(r, t)` of projection rounding for input overlap `t`.
pub fn bfv_expectation(r: Rank, t: f64) -> Result<f64, NumericsError> {
    if !(-1.0..=1.0).contains(&t) {
        return Err(NumericsError::ArgumentOutOfRange(t));
    }
    Ok(r.g() * t * hyp2f1_half(r, t * t)?)
}

/// Expected `r_i r_j` of hyperplane rounding: `2 arcsin(t) / pi`.
pub fn hyperplane_expectation(t: f64) -> f64 {
    FRAC_2_PI * t.asin()
}

/// A sampled ratio curve together with its smallest positive sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioCurve {
    pub rank: Rank,
    pub step: f64,
    pub samples: Vec<(f64, f64)>,
    /// `(t*, ratio*)`.
    pub minimum: (f64, f64),
    /// Sign `gamma` of the minimizing edge for axis rounding; `None` for projection rounding.
    pub minimizing_sign: Option<f64>,
}

impl RatioCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,ratio\n");
        for (t, v) in &self.samples {
            out.push_str(&format!("{t:.16e},{v:.16e}\n"));
        }
        out
    }
}

fn grid(step: f64, lo: f64, hi_inclusive: f64) -> impl Iterator<Item = f64> {
    (0..)
        .map(move |k| lo + k as f64 * step)
        .take_while(move |&t| t <= hi_inclusive + 1e-12 * step)
        .map(move |t| t.min(hi_inclusive))
}

fn check_step(step: f64) -> Result<(), NumericsError> {
    if step > 0.0 && step.is_finite() {
        Ok(())
    } else {
        Err(NumericsError::InvalidStep(step))
    }
}

/// Minimizes `(1 - F(r, t)) / (1 - r t)` over the grid `t = -1, -1 + step, ...`
/// restricted to `t < 1/r`, keeping positive values only.
pub fn approx_ratio_bfv(r: Rank, step: f64) -> Result<RatioCurve, NumericsError> {
    check_step(step)?;
    let rf = r.0 as f64;
    let mut samples = Vec::new();
    let mut minimum = (f64::NAN, f64::INFINITY);
    for t in grid(step, -1.0, 1.0) {
        if rf * t >= 1.0 {
            break;
        }
        let ratio = (1.0 - bfv_expectation(r, t)?) / (1.0 - rf * t);
        if ratio > 0.0 {
            samples.push((t, ratio));
            if ratio < minimum.1 {
                minimum = (t, ratio);
            }
        }
    }
    Ok(RatioCurve {
        rank: r,
        step,
        samples,
        minimum,
        minimizing_sign: None,
    })
}

/// Minimizes `(1 - g 2 arcsin(t)/pi) / (1 - r g t)` over `g` in `{-1, 1}` and
/// the grid `t = -1, ..., 1` with `r g t < 1`, keeping positive values only.
/// Samples hold the `g = -1` branch followed by the `g = 1` branch.
pub fn approx_ratio_axis(r: Rank, step: f64) -> Result<RatioCurve, NumericsError> {
    check_step(step)?;
    let rf = r.0 as f64;
    let mut samples = Vec::new();
    let mut minimum = (f64::NAN, f64::INFINITY);
    let mut minimizing_sign = None;
    for g in [-1.0, 1.0] {
        for t in grid(step, -1.0, 1.0) {
            if rf * g * t >= 1.0 {
                continue;
            }
            let ratio = (1.0 - g * hyperplane_expectation(t)) / (1.0 - rf * g * t);
            if ratio > 0.0 {
                samples.push((t, ratio));
                if ratio < minimum.1 {
                    minimum = (t, ratio);
                    minimizing_sign = Some(g);
                }
            }
        }
    }
    Ok(RatioCurve {
        rank: r,
        step,
        samples,
        minimum,
        minimizing_sign,
    })
}

/// Guaranteed expected ratio of projection rounding for a family of rank `r`
/// (grid step 0.01).
pub fn bfv_constant(r: Rank) -> f64 {
    approx_ratio_bfv(r, 0.01).expect("fixed step is valid").minimum.1
}

/// Guaranteed expected ratio of axis rounding with `r` nonzero families
/// (grid step 0.01).
pub fn axis_constant(r: Rank) -> f64 {
    approx_ratio_axis(r, 0.01).expect("fixed step is valid").minimum.1
}
