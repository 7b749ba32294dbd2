//! Ground truth at desk scale: exact `lambda_max(H)` and a product-state search.
//!
//! Every Heisenberg term is a real symmetric matrix (`Y (x) Y` is real), so
//! both eigensolvers work in real arithmetic.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::Instance;
use crate::pauli::{self, PauliError, ProductState};
use crate::rng::{self, Domain};

/// Largest `n` routed to the dense solver by [`exact_max_eigenvalue`].
pub const DENSE_AUTO_MAX_QUBITS: usize = 10;
/// Largest `n` accepted by the matrix-free solver.
pub const MATRIX_FREE_MAX_QUBITS: usize = 20;

const LANCZOS_BASIS: usize = 40;
const LANCZOS_MAX_RESTARTS: usize = 2000;
const LANCZOS_TOL: f64 = 1e-11;

const ASCENT_TOL: f64 = 1e-12;
const ASCENT_MAX_SWEEPS: usize = 10_000;

/// Default restart count of [`best_product_state`].
pub const DEFAULT_PRODUCT_RESTARTS: usize = 50;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("{n} qubits exceeds the {method:?} limit of {limit}")]
    TooLarge {
        n: usize,
        limit: usize,
        method: ExactMethod,
    },
    #[error("eigensolver did not reach the residual target (residual {residual:e})")]
    NotConverged { residual: f64 },
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactMethod {
    FullDense,
    Lanczos,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactResult {
    pub lambda_max: f64,
    pub method: ExactMethod,
    /// `||H psi - lambda psi||` for the returned unit eigenvector.
    pub residual: f64,
}

/// `lambda_max(H)`: dense for `n <= 10`, matrix-free Lanczos for `n <= 20`.
pub fn exact_max_eigenvalue(inst: &Instance) -> Result<ExactResult, OracleError> {
    let method = if inst.n <= DENSE_AUTO_MAX_QUBITS {
        ExactMethod::FullDense
    } else {
        ExactMethod::Lanczos
    };
    exact_max_eigenvalue_with(inst, method)
}

/// Forces a method. Dense accepts up to [`pauli::DENSE_MAX_QUBITS`] qubits.
pub fn exact_max_eigenvalue_with(inst: &Instance, method: ExactMethod) -> Result<ExactResult, OracleError> {
    match method {
        ExactMethod::FullDense => dense_max(inst),
        ExactMethod::Lanczos => lanczos_max(inst),
    }
}

fn dense_max(inst: &Instance) -> Result<ExactResult, OracleError> {
    let h = pauli::build_dense(inst).map_err(|e| match e {
        PauliError::TooLarge { n, limit } => OracleError::TooLarge {
            n,
            limit,
            method: ExactMethod::FullDense,
        },
        other => other.into(),
    })?;
    let real: DMatrix<f64> = h.matrix().map(|z| z.re);
    let eig = SymmetricEigen::new(real.clone());
    let k = eig.eigenvalues.imax();
    let lambda = eig.eigenvalues[k];
    let psi = eig.eigenvectors.column(k);
    let residual = (&real * psi - psi * lambda).norm();
    Ok(ExactResult {
        lambda_max: lambda,
        method: ExactMethod::FullDense,
        residual,
    })
}

/// Matrix-free `H v` built from bit operations on basis indices.
pub struct HeisenbergOperator {
    n: usize,
    // (flip mask, i bit, j bit, w, alpha, beta, gamma)
    terms: Vec<(usize, usize, usize, f64, f64, f64, f64)>,
}

impl HeisenbergOperator {
    pub fn new(inst: &Instance) -> Self {
        let n = inst.n;
        let terms = inst
            .edges
            .iter()
            .map(|e| {
                let (bi, bj) = (n - 1 - e.i, n - 1 - e.j);
                ((1 << bi) | (1 << bj), bi, bj, e.w, e.alpha, e.beta, e.gamma)
            })
            .collect();
        Self { n, terms }
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// `out = H v`. With `z_i z_j = s` on basis state `b`:
    /// `ZZ|b> = s|b>`, `XX|b> = |b^m>`, `YY|b> = -s|b^m>`.
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        out.par_chunks_mut(1 << 12).enumerate().for_each(|(chunk, block)| {
            let base = chunk << 12;
            for (off, o) in block.iter_mut().enumerate() {
                let b = base + off;
                let mut acc = 0.0;
                for &(mask, bi, bj, w, alpha, beta, gamma) in &self.terms {
                    let s = if ((b >> bi) ^ (b >> bj)) & 1 == 0 { 1.0 } else { -1.0 };
                    acc += w * ((1.0 - gamma * s) * v[b] + (beta * s - alpha) * v[b ^ mask]);
                }
                *o = acc;
            }
        });
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn lanczos_max(inst: &Instance) -> Result<ExactResult, OracleError> {
    if inst.n > MATRIX_FREE_MAX_QUBITS {
        return Err(OracleError::TooLarge {
            n: inst.n,
            limit: MATRIX_FREE_MAX_QUBITS,
            method: ExactMethod::Lanczos,
        });
    }
    let op = HeisenbergOperator::new(inst);
    let dim = op.dim();
    let scale = 1.0
        + inst
            .edges
            .iter()
            .map(|e| e.w * (1.0 + e.alpha.abs() + e.beta.abs() + e.gamma.abs()))
            .sum::<f64>();
    let m = LANCZOS_BASIS.min(dim);

    let mut rng = rng::stream(0, Domain::Lanczos, inst.n as u64);
    let mut start: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let mut hv = vec![0.0; dim];
    let mut theta = 0.0;

    for _ in 0..LANCZOS_MAX_RESTARTS {
        let norm = dot(&start, &start).sqrt();
        start.iter_mut().for_each(|x| *x /= norm);
        // Lanczos with full reorthogonalization against the stored basis.
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alphas = Vec::with_capacity(m);
        let mut betas: Vec<f64> = Vec::with_capacity(m);
        let last_beta;
        loop {
            let k = basis.len() - 1;
            op.apply(&basis[k], &mut hv);
            let a = dot(&basis[k], &hv);
            alphas.push(a);
            let mut r = hv.clone();
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &r);
                    r.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                }
            }
            let beta = dot(&r, &r).sqrt();
            if basis.len() == m || beta <= 1e-13 * scale {
                last_beta = if basis.len() == dim { 0.0 } else { beta };
                break;
            }
            r.iter_mut().for_each(|x| *x /= beta);
            betas.push(beta);
            basis.push(r);
        }
        let k = alphas.len();
        let t = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                alphas[i]
            } else if i + 1 == j || j + 1 == i {
                betas[i.min(j)]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let top = eig.eigenvalues.imax();
        theta = eig.eigenvalues[top];
        let y = eig.eigenvectors.column(top);
        let mut ritz = vec![0.0; dim];
        for (q, &c) in basis.iter().zip(y.iter()) {
            ritz.iter_mut().zip(q).for_each(|(x, v)| *x += c * v);
        }
        start = ritz;
        if (last_beta * y[k - 1]).abs() <= LANCZOS_TOL * (1.0 + theta.abs()) {
            break;
        }
    }

    let norm = dot(&start, &start).sqrt();
    start.iter_mut().for_each(|x| *x /= norm);
    op.apply(&start, &mut hv);
    let lambda = dot(&start, &hv);
    let residual = hv
        .iter()
        .zip(&start)
        .map(|(h, x)| (h - lambda * x).powi(2))
        .sum::<f64>()
        .sqrt();
    if residual > 1e-8 * (1.0 + lambda.abs()) {
        return Err(OracleError::NotConverged { residual });
    }
    debug_assert!((lambda - theta).abs() <= 1e-8 * (1.0 + theta.abs()));
    Ok(ExactResult {
        lambda_max: lambda,
        method: ExactMethod::Lanczos,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductSearchResult {
    pub state: ProductState,
    pub energy: f64,
    pub restarts_used: usize,
}

/// Linear coefficient of `r_i` in the product energy: the energy equals
/// `const + r_i . c_i` with `c_i[k] = -sum_{e ~ i} w c_k r_{other,k}`.
pub(crate) fn local_fields(inst: &Instance, bloch: &[[f64; 3]], adjacency: &[Vec<usize>], i: usize) -> [f64; 3] {
    let mut c = [0.0; 3];
    for &ei in &adjacency[i] {
        let e = &inst.edges[ei];
        let other = if e.i == i { e.j } else { e.i };
        let coeffs = e.coeffs();
        for k in 0..3 {
            c[k] -= e.w * coeffs[k] * bloch[other][k];
        }
    }
    c
}

pub(crate) fn adjacency(inst: &Instance) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); inst.n];
    for (k, e) in inst.edges.iter().enumerate() {
        adj[e.i].push(k);
        adj[e.j].push(k);
    }
    adj
}

/// Coordinate ascent from `bloch` until the per-sweep gain drops below the
/// tolerance. Energy is nondecreasing along the way.
pub(crate) fn ascend_product(inst: &Instance, adj: &[Vec<usize>], bloch: &mut [[f64; 3]]) -> f64 {
    let mut energy = pauli::product_energy_unchecked(inst, bloch);
    for _ in 0..ASCENT_MAX_SWEEPS {
        for i in 0..inst.n {
            let c = local_fields(inst, bloch, adj, i);
            let norm = pauli::norm3(&c);
            if norm > 0.0 {
                bloch[i] = c.map(|x| x / norm);
            }
        }
        let next = pauli::product_energy_unchecked(inst, bloch);
        let gain = next - energy;
        debug_assert!(gain >= -1e-9 * (1.0 + energy.abs()), "coordinate ascent lost {gain}");
        energy = next;
        if gain < ASCENT_TOL * (1.0 + energy.abs()) {
            break;
        }
    }
    energy
}

fn random_bloch<R: Rng>(rng: &mut R) -> [f64; 3] {
    loop {
        let g: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let norm = pauli::norm3(&g);
        if norm > 1e-12 {
            return g.map(|x| x / norm);
        }
    }
}

/// Best pure product state found by coordinate ascent over `restarts`
/// random starts. A heuristic lower bound on the product optimum.
pub fn best_product_state(inst: &Instance, restarts: usize, seed: u64) -> ProductSearchResult {
    product_search(inst, restarts, seed, Domain::ProductSearch)
}

pub(crate) fn product_search(inst: &Instance, restarts: usize, seed: u64, domain: Domain) -> ProductSearchResult {
    let restarts = restarts.max(1);
    let adj = adjacency(inst);
    let runs: Vec<(f64, Vec<[f64; 3]>)> = (0..restarts)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng::stream(seed, domain, k as u64);
            let mut bloch: Vec<[f64; 3]> = (0..inst.n).map(|_| random_bloch(&mut rng)).collect();
            let energy = ascend_product(inst, &adj, &mut bloch);
            (energy, bloch)
        })
        .collect();
    // First index wins ties.
    let (energy, bloch) = runs
        .into_iter()
        .reduce(|best, run| if run.0 > best.0 { run } else { best })
        .expect("at least one restart");
    ProductSearchResult {
        state: ProductState::new(bloch).expect("unit Bloch vectors"),
        energy,
        restarts_used: restarts,
    }
}

/// The largest diagonal entry of `H` when every edge is `ZZ`-only: the
/// maximum over basis states. Returns `None` for other instances.
pub fn diagonal_max(inst: &Instance) -> Option<f64> {
    if inst.edges.iter().any(|e| e.alpha != 0.0 || e.beta != 0.0) || inst.n > MATRIX_FREE_MAX_QUBITS {
        return None;
    }
    let best = (0..1usize << inst.n)
        .into_par_iter()
        .map(|b| {
            inst.edges
                .iter()
                .map(|e| {
                    let s = if ((b >> (inst.n - 1 - e.i)) ^ (b >> (inst.n - 1 - e.j))) & 1 == 0 {
                        1.0
                    } else {
                        -1.0
                    };
                    e.w * (1.0 - e.gamma * s)
                })
                .sum::<f64>()
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    Some(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edge_analysis::{heisenberg_edge_opt, heisenberg_edge_opt_prod, EdgeCoeffs};
    use crate::instance::{generate, Edge, FamilyTag, GenerateParams, GraphKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single(coeffs: [f64; 3]) -> Instance {
        Instance::new(2, vec![Edge::new(0, 1, 1.0, coeffs)], "edge").unwrap()
    }

    fn triangle(coeffs: [f64; 3]) -> Instance {
        generate(
            GraphKind::Complete { n: 3 },
            GenerateParams {
                coeffs,
                random_weights: false,
            },
            0,
        )
        .unwrap()
    }

    fn random_instance(rng: &mut ChaCha8Rng, n: usize) -> Instance {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < 0.6 {
                    let c = [
                        rng.random_range(-1.0..=1.0),
                        rng.random_range(-1.0..=1.0),
                        rng.random_range(-1.0..=1.0),
                    ];
                    edges.push(Edge::new(i, j, rng.random::<f64>() * 2.0, c));
                }
            }
        }
        Instance::new(n, edges, "random").unwrap()
    }

    #[test]
    fn exact_examples() {
        for (inst, want) in [
            (single([1.0, 1.0, 1.0]), 4.0),
            (triangle([0.0, 0.0, 1.0]), 4.0),
            (single([1.0, 1.0, 0.0]), 3.0),
        ] {
            for method in [ExactMethod::FullDense, ExactMethod::Lanczos] {
                let r = exact_max_eigenvalue_with(&inst, method).unwrap();
                assert!((r.lambda_max - want).abs() < 1e-10, "{method:?}: {}", r.lambda_max);
                assert!(r.residual < 1e-8 * (1.0 + want));
            }
        }
    }

    #[test]
    fn dense_and_lanczos_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..40 {
            let n = 2 + trial % 7;
            let inst = random_instance(&mut rng, n);
            let d = exact_max_eigenvalue_with(&inst, ExactMethod::FullDense).unwrap();
            let l = exact_max_eigenvalue_with(&inst, ExactMethod::Lanczos).unwrap();
            assert!(
                (d.lambda_max - l.lambda_max).abs() < 1e-7,
                "n={n}: {} vs {}",
                d.lambda_max,
                l.lambda_max
            );
        }
    }

    #[test]
    fn operator_matches_dense_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let inst = random_instance(&mut rng, 5);
        let dense = pauli::build_dense(&inst).unwrap();
        let op = HeisenbergOperator::new(&inst);
        let v: Vec<f64> = (0..32).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut out = vec![0.0; 32];
        op.apply(&v, &mut out);
        for (r, got) in out.iter().enumerate() {
            let want: f64 = (0..32).map(|c| dense.matrix()[(r, c)].re * v[c]).sum();
            assert!((got - want).abs() < 1e-12);
            assert!(dense.matrix().row(r).iter().all(|z| z.im.abs() < 1e-15));
        }
    }

    #[test]
    fn size_limits() {
        let big = generate(
            GraphKind::Cycle { n: 21 },
            GenerateParams::family(FamilyTag::MAX_CUT),
            0,
        )
        .unwrap();
        assert!(matches!(
            exact_max_eigenvalue(&big),
            Err(OracleError::TooLarge { limit: 20, .. })
        ));
        let mid = generate(
            GraphKind::Cycle { n: 15 },
            GenerateParams::family(FamilyTag::MAX_CUT),
            0,
        )
        .unwrap();
        assert!(matches!(
            exact_max_eigenvalue_with(&mid, ExactMethod::FullDense),
            Err(OracleError::TooLarge { limit: 14, .. })
        ));
    }

    #[test]
    fn lanczos_on_a_larger_cycle() {
        // Even cycle with ZZ couplings: every edge can be cut.
        let inst = generate(
            GraphKind::Cycle { n: 14 },
            GenerateParams::family(FamilyTag::MAX_CUT),
            0,
        )
        .unwrap();
        let r = exact_max_eigenvalue(&inst).unwrap();
        assert_eq!(r.method, ExactMethod::Lanczos);
        assert!((r.lambda_max - 28.0).abs() < 1e-9);
        assert_eq!(diagonal_max(&inst), Some(28.0));
    }

    #[test]
    fn product_search_examples() {
        for (inst, want) in [
            (single([1.0, 1.0, 1.0]), 2.0),
            (single([1.0, 1.0, 0.0]), 2.0),
            (triangle([0.0, 0.0, 1.0]), 4.0),
        ] {
            let r = best_product_state(&inst, DEFAULT_PRODUCT_RESTARTS, 5);
            assert!((r.energy - want).abs() < 1e-9, "{}", r.energy);
            assert!(r.state.is_pure(1e-12));
            let direct = pauli::product_energy(&inst, &r.state).unwrap();
            assert!((direct - r.energy).abs() < 1e-12);
        }
    }

    #[test]
    fn product_search_matches_single_edge_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..300 {
            let c = [
                rng.random_range(-1.0..=1.0),
                rng.random_range(-1.0..=1.0),
                rng.random_range(-1.0..=1.0),
            ];
            let inst = single(c);
            let found = best_product_state(&inst, 20, 1).energy;
            let closed = heisenberg_edge_opt_prod(EdgeCoeffs::from(c));
            assert!(found <= closed + 1e-9);
            assert!((found - closed).abs() < 1e-6, "{c:?}: {found} vs {closed}");
            let exact = exact_max_eigenvalue(&inst).unwrap().lambda_max;
            assert!((exact - heisenberg_edge_opt(EdgeCoeffs::from(c))).abs() < 1e-9);
        }
    }

    #[test]
    fn product_energy_never_exceeds_lambda_max() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for trial in 0..30 {
            let inst = random_instance(&mut rng, 2 + trial % 6);
            let p = best_product_state(&inst, 10, trial as u64).energy;
            let l = exact_max_eigenvalue(&inst).unwrap().lambda_max;
            assert!(p <= l + 1e-9);
        }
    }

    #[test]
    fn search_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let inst = random_instance(&mut rng, 7);
        assert_eq!(best_product_state(&inst, 8, 3), best_product_state(&inst, 8, 3));
    }
}
