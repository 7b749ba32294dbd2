//! Closed-form optima for a single two-qubit edge.
//!
//! Two coefficient conventions appear here:
//!
//! * **coupling level**: `H = a XX + b YY + c ZZ` with no identity term
//!   ([`edge_opt`], [`edge_opt_prod`], [`edge_opt_states`]);
//! * **Heisenberg level**: `I - a XX - b YY - c ZZ`, the edge term of an
//!   [`Instance`](crate::instance::Instance)
//!   ([`heisenberg_edge_opt`], [`heisenberg_edge_opt_prod`], [`product_ratio_bound`]).
//!
//! Converting between them negates the coefficients and adds one.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// `(alpha, beta, gamma)` with no range restriction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeCoeffs {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EdgeCoeffs {
    pub const fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha, beta, gamma }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    pub fn negated(self) -> Self {
        Self::new(-self.alpha, -self.beta, -self.gamma)
    }
}

impl From<[f64; 3]> for EdgeCoeffs {
    fn from(c: [f64; 3]) -> Self {
        Self::new(c[0], c[1], c[2])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeOptimum {
    pub opt: f64,
    pub opt_prod: f64,
    /// `(1 + opt_prod) / (1 + opt)`: the product ratio of the edge term `I + H`.
    pub ratio_bound: f64,
    /// Amplitudes `(a, b, c, d)` of `a|00> + b|01> + c|10> + d|11>`.
    pub achieving_entangled: [Complex64; 4],
    /// `(a|0> + b|1>) (x) (c|0> + d|1>)`.
    pub achieving_product: ([Complex64; 2], [Complex64; 2]),
}

/// Largest eigenvalue of `alpha XX + beta YY + gamma ZZ`.
pub fn edge_opt(c: EdgeCoeffs) -> f64 {
    let EdgeCoeffs { alpha, beta, gamma } = c;
    ((alpha - beta).abs() + gamma).max((alpha + beta).abs() - gamma)
}

/// Best product-state value of `alpha XX + beta YY + gamma ZZ`:
/// `max(|alpha|, |beta|, |gamma|)`.
pub fn edge_opt_prod(c: EdgeCoeffs) -> f64 {
    c.alpha.abs().max(c.beta.abs()).max(c.gamma.abs())
}

/// Largest eigenvalue of `I - alpha XX - beta YY - gamma ZZ`.
pub fn heisenberg_edge_opt(c: EdgeCoeffs) -> f64 {
    1.0 + edge_opt(c.negated())
}

/// Best product-state value of `I - alpha XX - beta YY - gamma ZZ`.
pub fn heisenberg_edge_opt_prod(c: EdgeCoeffs) -> f64 {
    1.0 + edge_opt_prod(c)
}

/// Upper bound on the worst-case product ratio of a family whose edges are
/// `I - alpha XX - beta YY - gamma ZZ`:
///
/// `(1 + max(|a|,|b|,|c|)) / (1 + max(|a - b| - c, |a + b| + c))`.
pub fn product_ratio_bound(c: EdgeCoeffs) -> f64 {
    let EdgeCoeffs { alpha, beta, gamma } = c;
    let num = 1.0 + edge_opt_prod(c);
    let den = 1.0 + ((alpha - beta).abs() - gamma).max((alpha + beta).abs() + gamma);
    num / den
}

/// Optimal values for `alpha XX + beta YY + gamma ZZ` together with states
/// attaining them.
pub fn edge_opt_states(c: EdgeCoeffs) -> EdgeOptimum {
    let EdgeCoeffs { alpha, beta, gamma } = c;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let re = |x: f64| Complex64::new(x, 0.0);
    let im = |x: f64| Complex64::new(0.0, x);
    let zero = re(0.0);

    let opt = edge_opt(c);
    let achieving_entangled = if (alpha - beta).abs() + gamma > (alpha + beta).abs() - gamma {
        // a|00> + d|11>
        let d = if alpha >= beta { h } else { -h };
        [re(h), zero, zero, re(d)]
    } else {
        // b|01> + c|10>
        let cc = if alpha >= -beta { h } else { -h };
        [zero, re(h), re(cc), zero]
    };

    let opt_prod = edge_opt_prod(c);
    let achieving_product = if alpha.abs() == opt_prod {
        let d = if alpha >= 0.0 { h } else { -h };
        ([re(h), re(h)], [re(h), re(d)])
    } else if beta.abs() == opt_prod {
        let a = if beta >= 0.0 { im(h) } else { im(-h) };
        ([a, re(h)], [im(h), re(h)])
    } else if gamma >= 0.0 {
        ([re(1.0), zero], [re(1.0), zero])
    } else {
        ([re(1.0), zero], [zero, re(1.0)])
    };

    EdgeOptimum {
        opt,
        opt_prod,
        ratio_bound: (1.0 + opt_prod) / (1.0 + opt),
        achieving_entangled,
        achieving_product,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::coupling_matrix;
    use nalgebra::{DMatrix, Vector4};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn expect(c: EdgeCoeffs, psi: [Complex64; 4]) -> f64 {
        let v = Vector4::from(psi);
        v.dotc(&(coupling_matrix(c.to_array()) * v)).re
    }

    fn lambda_max(c: EdgeCoeffs) -> f64 {
        let m = coupling_matrix(c.to_array());
        DMatrix::from_column_slice(4, 4, m.as_slice())
            .symmetric_eigenvalues()
            .max()
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(edge_opt(EdgeCoeffs::new(0.0, 0.0, 1.0)), 1.0);
        assert_eq!(edge_opt(EdgeCoeffs::new(1.0, 1.0, 1.0)), 1.0);
        assert_eq!(edge_opt(EdgeCoeffs::new(1.0, 1.0, 0.0)), 2.0);
        // frozen from 4x4 eigendecomposition
        assert!((lambda_max(EdgeCoeffs::new(1.0, 1.0, 1.0)) - 1.0).abs() < 1e-12);
        assert!((lambda_max(EdgeCoeffs::new(1.0, 1.0, 0.0)) - 2.0).abs() < 1e-12);

        assert_eq!(edge_opt_prod(EdgeCoeffs::new(0.0, 0.0, -0.4)), 0.4);
        assert_eq!(edge_opt_prod(EdgeCoeffs::new(0.3, -0.7, 0.2)), 0.7);
        assert_eq!(edge_opt_prod(EdgeCoeffs::new(1.0, 1.0, 1.0)), 1.0);
    }

    #[test]
    fn ratio_bound_examples() {
        assert_eq!(product_ratio_bound(EdgeCoeffs::new(0.0, 0.0, 1.0)), 1.0);
        assert!((product_ratio_bound(EdgeCoeffs::new(1.0, 1.0, 0.0)) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(product_ratio_bound(EdgeCoeffs::new(1.0, 1.0, 1.0)), 0.5);
    }

    #[test]
    fn ratio_bound_on_corners_is_two_over_one_plus_rank() {
        for bits in 1..8u32 {
            let c = [bits & 1, (bits >> 1) & 1, (bits >> 2) & 1].map(|b| b as f64);
            let r: f64 = c.iter().sum();
            let got = product_ratio_bound(c.into());
            assert!((got - 2.0 / (1.0 + r)).abs() < 1e-15, "{c:?}");
        }
    }

    #[test]
    fn heisenberg_level_matches_dense() {
        for c in [[1.0, 1.0, 1.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.3, -0.8, 0.5]] {
            let ec = EdgeCoeffs::from(c);
            let h = crate::pauli::heisenberg_term(c);
            let top = DMatrix::from_column_slice(4, 4, h.as_slice())
                .symmetric_eigenvalues()
                .max();
            assert!((heisenberg_edge_opt(ec) - top).abs() < 1e-12);
        }
        assert_eq!(heisenberg_edge_opt(EdgeCoeffs::new(1.0, 1.0, 1.0)), 4.0);
        assert_eq!(heisenberg_edge_opt(EdgeCoeffs::new(1.0, 1.0, 0.0)), 3.0);
        assert_eq!(heisenberg_edge_opt_prod(EdgeCoeffs::new(1.0, 1.0, 0.0)), 2.0);
    }

    #[test]
    fn documented_achieving_states() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let afm = edge_opt_states(EdgeCoeffs::new(1.0, 1.0, 1.0));
        assert_eq!(afm.achieving_entangled[1].re, h);
        assert_eq!(afm.achieving_entangled[2].re, h);
        assert!((expect(EdgeCoeffs::new(1.0, 1.0, 1.0), afm.achieving_entangled) - 1.0).abs() < 1e-12);

        let x = edge_opt_states(EdgeCoeffs::new(1.0, 0.0, 0.0));
        let all_h = [Complex64::new(h, 0.0); 2];
        assert_eq!(x.achieving_product, (all_h, all_h));

        let z = edge_opt_states(EdgeCoeffs::new(0.0, 0.0, 1.0));
        let up = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        assert_eq!(z.achieving_product, (up, up));
    }

    fn product_vector(p: &([Complex64; 2], [Complex64; 2])) -> [Complex64; 4] {
        let ([a, b], [c, d]) = *p;
        [a * c, a * d, b * c, b * d]
    }

    #[test]
    fn achieving_states_attain_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut cases: Vec<EdgeCoeffs> = (0..1000)
            .map(|_| {
                EdgeCoeffs::new(
                    rng.random_range(-1.0..=1.0),
                    rng.random_range(-1.0..=1.0),
                    rng.random_range(-1.0..=1.0),
                )
            })
            .collect();
        for a in [-1.0, 0.0, 1.0] {
            for b in [-1.0, 0.0, 1.0] {
                for g in [-1.0, 0.0, 1.0] {
                    cases.push(EdgeCoeffs::new(a, b, g));
                }
            }
        }
        for c in cases {
            let o = edge_opt_states(c);
            let norm: f64 = o.achieving_entangled.iter().map(|z| z.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
            assert!((expect(c, o.achieving_entangled) - o.opt).abs() < 1e-12, "{c:?}");
            assert!(
                (expect(c, product_vector(&o.achieving_product)) - o.opt_prod).abs() < 1e-12,
                "{c:?}"
            );
            assert!(o.opt >= o.opt_prod - 1e-15);
        }
    }

    #[test]
    fn closed_form_opt_matches_dense_eigenvalue() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let c = EdgeCoeffs::new(
                rng.random_range(-1.0..=1.0),
                rng.random_range(-1.0..=1.0),
                rng.random_range(-1.0..=1.0),
            );
            assert!((edge_opt(c) - lambda_max(c)).abs() < 1e-9);
        }
    }
}
