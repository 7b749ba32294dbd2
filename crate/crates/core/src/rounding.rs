//! Randomized rounding of Gram vectors to product states, and the corner
//! decomposition that turns a general edge into hypercube-corner edges.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{Edge, Instance};
use crate::moment_sdp::MomentSolution;
use crate::pauli::{product_energy_unchecked, ProductState};
use crate::rng::{self, Domain};

/// Below this norm a projected vector is treated as zero and the Gaussian
/// matrix is redrawn.
const DEGENERATE_NORM: f64 = 1e-300;

#[derive(Debug, Error, PartialEq)]
pub enum RoundingError {
    #[error("projection rounding needs a family-uniform instance with rank 1..=3")]
    NotFamilyUniform,
    #[error("solution has {got} qubits, instance has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("at least one trial is required")]
    NoTrials,
    #[error("coordinate {0} outside [-1, 1]")]
    CoordinateOutOfRange(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Projection onto a random `r`-dimensional subspace.
    Bfv,
    /// Random hyperplane on the dominant Pauli axis.
    Axis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundingOutcome {
    pub state: ProductState,
    pub energy: f64,
    pub trials_run: usize,
    pub per_trial_energies: Vec<f64>,
    pub seed: u64,
}

impl RoundingOutcome {
    pub fn mean_energy(&self) -> f64 {
        self.per_trial_energies.iter().sum::<f64>() / self.per_trial_energies.len() as f64
    }
}

fn check_dims(inst: &Instance, sol: &MomentSolution) -> Result<(), RoundingError> {
    if sol.n() != inst.n {
        return Err(RoundingError::DimensionMismatch {
            expected: inst.n,
            got: sol.n(),
        });
    }
    Ok(())
}

/// Runs `trials` independent trials, trial `t` drawing from its own stream,
/// and keeps the best (lowest index on ties).
fn best_of<F>(inst: &Instance, trials: usize, seed: u64, trial: F) -> Result<RoundingOutcome, RoundingError>
where
    F: Fn(&mut rand_chacha::ChaCha20Rng) -> Vec<[f64; 3]> + Sync,
{
    if trials == 0 {
        return Err(RoundingError::NoTrials);
    }
    let results: Vec<(f64, Vec<[f64; 3]>)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::stream(seed, Domain::Rounding, t as u64);
            let bloch = trial(&mut rng);
            (product_energy_unchecked(inst, &bloch), bloch)
        })
        .collect();
    let per_trial_energies: Vec<f64> = results.iter().map(|r| r.0).collect();
    let (energy, bloch) = results
        .into_iter()
        .reduce(|best, r| if r.0 > best.0 { r } else { best })
        .expect("trials > 0");
    Ok(RoundingOutcome {
        state: ProductState::new(bloch).expect("rounded Bloch vectors are unit or zero"),
        energy,
        trials_run: trials,
        per_trial_energies,
        seed,
    })
}

/// Projection rounding for a family-uniform instance of rank `r`.
///
/// `u_i` concatenates the active `v_{i,k}`, `x_i = u_i / sqrt(r)`, and each
/// trial draws a Gaussian `r x (3n r)` matrix `R` and sets
/// `y_i = R x_i / ||R x_i||`. Entry `m` of `y_i` becomes the Bloch component
/// of the `m`-th active axis.
pub fn bfv_round(
    inst: &Instance,
    sol: &MomentSolution,
    trials: usize,
    seed: u64,
) -> Result<RoundingOutcome, RoundingError> {
    check_dims(inst, sol)?;
    let family = inst.family().ok_or(RoundingError::NotFamilyUniform)?;
    let axes = family.active_axes();
    let r = axes.len();
    if r == 0 {
        return Err(RoundingError::NotFamilyUniform);
    }
    let dim = 3 * inst.n;
    let width = r * dim;
    let xs: Vec<Vec<f64>> = (0..inst.n)
        .map(|i| {
            let mut u: Vec<f64> = axes
                .iter()
                .flat_map(|&k| sol.v(i, k).iter().copied().collect::<Vec<_>>())
                .collect();
            let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                u.iter_mut().for_each(|x| *x /= norm);
            }
            u
        })
        .collect();
    best_of(inst, trials, seed, |rng| loop {
        // Row-major r x width Gaussian matrix.
        let proj: Vec<f64> = (0..r * width).map(|_| rng.sample(StandardNormal)).collect();
        let ys: Vec<Vec<f64>> = xs
            .iter()
            .map(|x| {
                (0..r)
                    .map(|row| {
                        proj[row * width..(row + 1) * width]
                            .iter()
                            .zip(x)
                            .map(|(a, b)| a * b)
                            .sum()
                    })
                    .collect()
            })
            .collect();
        let norms: Vec<f64> = ys
            .iter()
            .map(|y: &Vec<f64>| y.iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        if norms.iter().any(|&n| n < DEGENERATE_NORM) {
            continue;
        }
        break ys
            .iter()
            .zip(&norms)
            .map(|(y, &norm)| {
                let mut b = [0.0; 3];
                for (m, &k) in axes.iter().enumerate() {
                    b[k] = y[m] / norm;
                }
                b
            })
            .collect();
    })
}

/// `argmax_a -sum_e w c_a v_{i,a} . v_{j,a}`, lowest index on ties.
pub fn dominant_axis(inst: &Instance, sol: &MomentSolution) -> usize {
    let score = |a: usize| -> f64 {
        -inst
            .edges
            .iter()
            .map(|e| e.w * e.coeffs()[a] * sol.moment(e.i, a, e.j, a))
            .sum::<f64>()
    };
    let mut best = 0;
    let mut best_score = score(0);
    for a in 1..3 {
        let s = score(a);
        if s > best_score {
            best = a;
            best_score = s;
        }
    }
    best
}

/// Hyperplane rounding on the dominant axis `a`: each trial draws a Gaussian
/// `g` in `R^{3n}` and sets qubit `i` to `sign(g . v_{i,a}) e_a` (zero maps to
/// `+1`).
pub fn gw_axis_round(
    inst: &Instance,
    sol: &MomentSolution,
    trials: usize,
    seed: u64,
) -> Result<RoundingOutcome, RoundingError> {
    check_dims(inst, sol)?;
    let axis = dominant_axis(inst, sol);
    let dim = 3 * inst.n;
    best_of(inst, trials, seed, |rng| {
        let g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        (0..inst.n)
            .map(|i| {
                let d: f64 = sol.v(i, axis).iter().zip(&g).map(|(a, b)| a * b).sum();
                let mut b = [0.0; 3];
                b[axis] = if d < 0.0 { -1.0 } else { 1.0 };
                b
            })
            .collect()
    })
}

/// Rounds with the given scheme.
pub fn round(
    scheme: Scheme,
    inst: &Instance,
    sol: &MomentSolution,
    trials: usize,
    seed: u64,
) -> Result<RoundingOutcome, RoundingError> {
    match scheme {
        Scheme::Bfv => bfv_round(inst, sol, trials, seed),
        Scheme::Axis => gw_axis_round(inst, sol, trials, seed),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerDecomposition {
    /// `(lambda, corner)` pairs with positive weights.
    pub terms: Vec<(f64, [f64; 3])>,
}

impl CornerDecomposition {
    pub fn reconstruct(&self) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (lambda, corner) in &self.terms {
            for k in 0..3 {
                out[k] += lambda * corner[k];
            }
        }
        out
    }

    pub fn weight_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.0).sum()
    }
}

/// Writes `c` in `[-1, 1]^3` as a convex combination of at most four
/// corners of `{-1, 1}^3`.
///
/// With `p = (1 + c) / 2` sorted descending as `p_(1) >= p_(2) >= p_(3)`, the
/// chain of corners that switch on the top 0, 1, 2, 3 coordinates carries
/// weights `1 - p_(1)`, `p_(1) - p_(2)`, `p_(2) - p_(3)`, `p_(3)`. Zero weights
/// are dropped.
pub fn caratheodory_split(c: [f64; 3]) -> Result<CornerDecomposition, RoundingError> {
    if let Some(&bad) = c.iter().find(|x| !(-1.0..=1.0).contains(*x)) {
        return Err(RoundingError::CoordinateOutOfRange(bad));
    }
    let p = c.map(|x| (1.0 + x) / 2.0);
    let mut order = [0usize, 1, 2];
    // Stable sort: ties keep coordinate order.
    order.sort_by(|&a, &b| p[b].total_cmp(&p[a]));
    let mut terms = Vec::with_capacity(4);
    let mut corner = [-1.0; 3];
    let mut prev = 1.0;
    for &k in &order {
        let weight = prev - p[k];
        if weight > 0.0 {
            terms.push((weight, corner));
        }
        corner[k] = 1.0;
        prev = p[k];
    }
    if prev > 0.0 {
        terms.push((prev, corner));
    }
    Ok(CornerDecomposition { terms })
}

/// Replaces every edge by parallel corner edges with weights `w lambda_k`.
/// The Hamiltonian is unchanged.
pub fn split_instance(inst: &Instance) -> Instance {
    let edges = inst
        .edges
        .iter()
        .flat_map(|e| {
            let coeffs = e.coeffs().map(|x| x.clamp(-1.0, 1.0));
            caratheodory_split(coeffs)
                .expect("validated coefficients")
                .terms
                .into_iter()
                .map(move |(lambda, corner)| Edge::new(e.i, e.j, e.w * lambda, corner))
        })
        .collect();
    Instance::new(inst.n, edges, inst.label.clone()).expect("split of a valid instance is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate, FamilyTag, GenerateParams, GraphKind};
    use crate::moment_sdp::{solve_moment_sdp, SolverConfig};
    use crate::oracle;
    use crate::pauli::build_dense;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single(coeffs: [f64; 3]) -> Instance {
        Instance::new(2, vec![Edge::new(0, 1, 1.0, coeffs)], "edge").unwrap()
    }

    /// `v_{1,k} = -v_{0,k} = e_k`.
    fn antipodal() -> MomentSolution {
        let mut v = DMatrix::zeros(6, 6);
        for k in 0..3 {
            v[(k, k)] = 1.0;
            v[(k, 3 + k)] = -1.0;
        }
        MomentSolution::from_vectors(v).unwrap()
    }

    #[test]
    fn bfv_on_optimal_single_edges() {
        for coeffs in [[0.0, 0.0, 1.0], [1.0, 1.0, 1.0]] {
            let out = bfv_round(&single(coeffs), &antipodal(), 50, 7).unwrap();
            assert_eq!(out.trials_run, 50);
            assert!(out.per_trial_energies.iter().all(|&e| (e - 2.0).abs() < 1e-12));
            assert!(out.state.is_pure(1e-12));
        }
    }

    #[test]
    fn bfv_rejects_mixed_instances() {
        let inst = Instance::new(
            3,
            vec![
                Edge::new(0, 1, 1.0, [0.0, 0.0, 1.0]),
                Edge::new(1, 2, 1.0, [1.0, 1.0, 0.0]),
            ],
            "",
        )
        .unwrap();
        let sol = solve_moment_sdp(&inst, &SolverConfig::default()).unwrap();
        assert_eq!(bfv_round(&inst, &sol, 10, 0), Err(RoundingError::NotFamilyUniform));
        assert_eq!(
            bfv_round(&single([0.5, 0.0, 0.0]), &antipodal(), 10, 0),
            Err(RoundingError::NotFamilyUniform)
        );
        assert!(gw_axis_round(&inst, &sol, 10, 0).is_ok());
    }

    #[test]
    fn bfv_five_cycle_antiferromagnet() {
        let inst = generate(
            GraphKind::Cycle { n: 5 },
            GenerateParams::family(FamilyTag::ANTIFERROMAGNET),
            0,
        )
        .unwrap();
        let sol = solve_moment_sdp(&inst, &SolverConfig::default()).unwrap();
        let out = bfv_round(&inst, &sol, 200, 1).unwrap();
        assert!(out.energy / sol.value >= 0.498, "{}", out.energy / sol.value);
        let lambda = oracle::exact_max_eigenvalue(&inst).unwrap().lambda_max;
        assert!(out.per_trial_energies.iter().all(|&e| e <= lambda + 1e-9));
    }

    #[test]
    fn axis_rounding_examples() {
        let out = gw_axis_round(&single([0.0, 0.0, 1.0]), &antipodal(), 30, 3).unwrap();
        assert!(out.per_trial_energies.iter().all(|&e| (e - 2.0).abs() < 1e-12));

        let tri = generate(
            GraphKind::Complete { n: 3 },
            GenerateParams::family(FamilyTag::MAX_CUT),
            0,
        )
        .unwrap();
        let sol = solve_moment_sdp(&tri, &SolverConfig::default()).unwrap();
        let out = gw_axis_round(&tri, &sol, 200, 5).unwrap();
        assert_eq!(out.energy, 4.0);
        assert!(out.mean_energy() / 4.5 >= 0.878 - 3.0 * 0.05);
    }

    #[test]
    fn axis_rounding_of_mixed_sign_zz_is_diagonal() {
        let inst = Instance::new(
            4,
            vec![
                Edge::new(0, 1, 1.0, [0.0, 0.0, 0.7]),
                Edge::new(1, 2, 0.5, [0.0, 0.0, -0.4]),
                Edge::new(2, 3, 2.0, [0.0, 0.0, 1.0]),
                Edge::new(0, 3, 1.0, [0.0, 0.0, -1.0]),
            ],
            "",
        )
        .unwrap();
        let sol = solve_moment_sdp(&inst, &SolverConfig::default()).unwrap();
        let out = gw_axis_round(&inst, &sol, 20, 0).unwrap();
        for b in out.state.bloch() {
            assert_eq!((b[0], b[1]), (0.0, 0.0));
            assert_eq!(b[2].abs(), 1.0);
        }
    }

    #[test]
    fn rank_one_projection_matches_hyperplane_signs() {
        let inst = generate(
            GraphKind::RandomGnp { n: 8, p: 0.5 },
            GenerateParams {
                coeffs: [0.0, 0.0, 1.0],
                random_weights: true,
            },
            2,
        )
        .unwrap();
        let sol = solve_moment_sdp(&inst, &SolverConfig::default()).unwrap();
        assert_eq!(dominant_axis(&inst, &sol), 2);
        let a = bfv_round(&inst, &sol, 100, 9).unwrap();
        let b = gw_axis_round(&inst, &sol, 100, 9).unwrap();
        assert_eq!(a.per_trial_energies, b.per_trial_energies);
        for (x, y) in a.state.bloch().iter().zip(b.state.bloch()) {
            assert_eq!(x[2].signum(), y[2].signum());
        }
    }

    #[test]
    fn rounding_is_deterministic_and_trial_order_free() {
        let inst = generate(GraphKind::Complete { n: 5 }, GenerateParams::family(FamilyTag::XY), 0).unwrap();
        let sol = solve_moment_sdp(&inst, &SolverConfig::default()).unwrap();
        let a = bfv_round(&inst, &sol, 40, 12).unwrap();
        let b = bfv_round(&inst, &sol, 40, 12).unwrap();
        assert_eq!(a, b);
        // Trial t depends only on (seed, t): a shorter run is a prefix.
        let c = bfv_round(&inst, &sol, 10, 12).unwrap();
        assert_eq!(c.per_trial_energies[..], a.per_trial_energies[..10]);
        assert_eq!(bfv_round(&inst, &sol, 0, 12), Err(RoundingError::NoTrials));
    }

    #[test]
    fn split_examples() {
        let one = caratheodory_split([1.0, 1.0, 1.0]).unwrap();
        assert_eq!(one.terms, vec![(1.0, [1.0, 1.0, 1.0])]);

        let mut zero = caratheodory_split([0.0, 0.0, 0.0]).unwrap().terms;
        zero.sort_by(|a, b| b.1[0].total_cmp(&a.1[0]));
        assert_eq!(zero, vec![(0.5, [1.0, 1.0, 1.0]), (0.5, [-1.0, -1.0, -1.0])]);

        let mixed = caratheodory_split([0.5, -0.5, 0.0]).unwrap();
        assert_eq!(
            mixed.terms,
            vec![
                (0.25, [-1.0, -1.0, -1.0]),
                (0.25, [1.0, -1.0, -1.0]),
                (0.25, [1.0, -1.0, 1.0]),
                (0.25, [1.0, 1.0, 1.0]),
            ]
        );
        assert_eq!(
            caratheodory_split([1.5, 0.0, 0.0]),
            Err(RoundingError::CoordinateOutOfRange(1.5))
        );
    }

    #[test]
    fn split_holds_for_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100_000 {
            let mut c: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..=1.0));
            // Exercise ties and boundary values too.
            if rng.random::<f64>() < 0.2 {
                c[1] = c[0];
            }
            if rng.random::<f64>() < 0.1 {
                c[2] = if rng.random() { 1.0 } else { -1.0 };
            }
            let d = caratheodory_split(c).unwrap();
            assert!(!d.terms.is_empty() && d.terms.len() <= 4);
            assert!(d
                .terms
                .iter()
                .all(|(l, corner)| *l > 0.0 && *l <= 1.0 && corner.iter().all(|x| x.abs() == 1.0)));
            assert!((d.weight_sum() - 1.0).abs() < 1e-12);
            let back = d.reconstruct();
            assert!((0..3).all(|k| (back[k] - c[k]).abs() < 1e-12), "{c:?} -> {back:?}");
        }
    }

    #[test]
    fn split_instance_preserves_the_hamiltonian() {
        let e = split_instance(&single([0.5, -0.5, 0.0]));
        assert_eq!(e.edges.len(), 4);
        assert!(e.edges.iter().all(|x| x.w == 0.25));

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut edges = Vec::new();
        for i in 0..6 {
            for j in i + 1..6 {
                if rng.random::<f64>() < 0.5 {
                    let c = [
                        rng.random_range(-1.0..=1.0),
                        rng.random_range(-1.0..=1.0),
                        rng.random_range(-1.0..=1.0),
                    ];
                    edges.push(Edge::new(i, j, rng.random(), c));
                }
            }
        }
        let inst = Instance::new(6, edges, "").unwrap();
        let split = split_instance(&inst);
        let (a, b) = (build_dense(&inst).unwrap(), build_dense(&split).unwrap());
        assert!((a.matrix() - b.matrix()).map(|z| z.norm()).max() < 1e-10);
        for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues()) {
            assert!((x - y).abs() < 1e-9);
        }

        let fam = generate(GraphKind::Cycle { n: 4 }, GenerateParams::family(FamilyTag::MAX_CUT), 0).unwrap();
        let fam_split = split_instance(&fam);
        assert!(
            (build_dense(&fam).unwrap().matrix() - build_dense(&fam_split).unwrap().matrix())
                .map(|z| z.norm())
                .max()
                < 1e-12
        );
    }
}
