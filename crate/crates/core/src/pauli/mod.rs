//! Pauli algebra, dense Hamiltonians and product-state energies.
//!
//! Basis convention: qubit 0 is the most significant bit of a basis index,
//! so `|q0 q1 ... q_{n-1}>` has index `sum_q b_q 2^(n-1-q)`.

mod fano;
mod reduce;
mod su2;

pub use fano::FanoForm;
pub use reduce::{reduce_instance, Reduction, ReductionMode, TermEdge, TermGraph};
pub use su2::SingleQubitUnitary;

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4};
use num_complex::Complex64;
use thiserror::Error;

use crate::instance::Instance;

pub type C64 = Complex64;

/// Default qubit cap for materializing `2^n x 2^n` matrices.
pub const DENSE_MAX_QUBITS: usize = 14;

const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum PauliError {
    #[error("{n} qubits exceeds the dense limit of {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("Bloch vector {index} has norm {norm} > 1")]
    BlochNorm { index: usize, norm: f64 },
    #[error("rotation is not special orthogonal (orthogonality {orth:e}, det {det})")]
    NotSpecialOrthogonal { orth: f64, det: f64 },
    #[error("edge terms are not identical (edge {edge} differs by {deviation:e})")]
    NonIdenticalTerms { edge: usize, deviation: f64 },
    #[error("edge term has single-qubit components (max |r|,|s| = {0:e})")]
    LocalTerms(f64),
    #[error("correlation matrix is asymmetric (max |M - M^T| = {0:e})")]
    AsymmetricCorrelation(f64),
    #[error("invalid interaction graph: {0}")]
    InvalidGraph(String),
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Pauli matrix for axis `k` (0 = X, 1 = Y, 2 = Z).
pub fn sigma(k: usize) -> Matrix2<C64> {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    match k {
        0 => Matrix2::new(z, o, o, z),
        1 => Matrix2::new(z, -i, i, z),
        2 => Matrix2::new(o, z, z, -o),
        _ => panic!("Pauli axis {k} out of range"),
    }
}

pub fn kron2(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Matrix4<C64> {
    Matrix4::from_fn(|r, col| a[(r / 2, col / 2)] * b[(r % 2, col % 2)])
}

/// `alpha XX + beta YY + gamma ZZ`, no identity term.
pub fn coupling_matrix(coeffs: [f64; 3]) -> Matrix4<C64> {
    (0..3).fold(Matrix4::zeros(), |acc, k| {
        acc + kron2(&sigma(k), &sigma(k)) * c(coeffs[k], 0.0)
    })
}

/// `I - alpha XX - beta YY - gamma ZZ`.
pub fn heisenberg_term(coeffs: [f64; 3]) -> Matrix4<C64> {
    Matrix4::identity() - coupling_matrix(coeffs)
}

/// A Hermitian matrix on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseHermitian {
    n: usize,
    entries: DMatrix<C64>,
}

impl DenseHermitian {
    pub fn from_matrix(entries: DMatrix<C64>) -> Result<Self, PauliError> {
        let dim = entries.nrows();
        if entries.ncols() != dim {
            return Err(PauliError::DimensionMismatch {
                expected: dim,
                got: entries.ncols(),
            });
        }
        if !dim.is_power_of_two() {
            return Err(PauliError::NotPowerOfTwo(dim));
        }
        let deviation = hermitian_deviation(&entries);
        if deviation > HERMITIAN_TOL {
            return Err(PauliError::NotHermitian { deviation });
        }
        Ok(Self {
            n: dim.trailing_zeros() as usize,
            entries,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.entries
    }

    /// `<psi|H|psi>` for a normalized `psi`.
    pub fn expectation(&self, psi: &DVector<C64>) -> f64 {
        psi.dotc(&(&self.entries * psi)).re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.entries.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

pub(crate) fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    let mut dev: f64 = 0.0;
    for r in 0..m.nrows() {
        for col in r..m.ncols() {
            dev = dev.max((m[(r, col)] - m[(col, r)].conj()).norm());
        }
    }
    dev
}

/// Adds `w * term` acting on qubits `(i, j)` into a `2^n` matrix. The first
/// tensor factor of `term` acts on qubit `i`.
pub(crate) fn embed_two_qubit(h: &mut DMatrix<C64>, n: usize, i: usize, j: usize, w: f64, term: &Matrix4<C64>) {
    let bi = n - 1 - i;
    let bj = n - 1 - j;
    let mask = !((1usize << bi) | (1usize << bj));
    for x in 0..h.ncols() {
        let a = (((x >> bi) & 1) << 1) | ((x >> bj) & 1);
        let base = x & mask;
        for b in 0..4 {
            let v = term[(b, a)];
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            let y = base | ((b >> 1) << bi) | ((b & 1) << bj);
            h[(y, x)] += v * w;
        }
    }
}

/// Dense Hamiltonian `sum_e w_e (I - alpha XX - beta YY - gamma ZZ)`.
pub fn build_dense(inst: &Instance) -> Result<DenseHermitian, PauliError> {
    build_dense_with_limit(inst, DENSE_MAX_QUBITS)
}

pub fn build_dense_with_limit(inst: &Instance, limit: usize) -> Result<DenseHermitian, PauliError> {
    if inst.n > limit {
        return Err(PauliError::TooLarge { n: inst.n, limit });
    }
    let dim = 1usize << inst.n;
    let mut h = DMatrix::zeros(dim, dim);
    for e in &inst.edges {
        embed_two_qubit(&mut h, inst.n, e.i, e.j, e.w, &heisenberg_term(e.coeffs()));
    }
    Ok(DenseHermitian { n: inst.n, entries: h })
}

/// One Bloch vector per qubit, each of norm at most one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductState {
    bloch: Vec<[f64; 3]>,
}

impl ProductState {
    pub fn new(bloch: Vec<[f64; 3]>) -> Result<Self, PauliError> {
        for (index, r) in bloch.iter().enumerate() {
            let norm = norm3(r);
            if !norm.is_finite() || norm > 1.0 + 1e-12 {
                return Err(PauliError::BlochNorm { index, norm });
            }
        }
        Ok(Self { bloch })
    }

    /// The maximally mixed state.
    pub fn mixed(n: usize) -> Self {
        Self {
            bloch: vec![[0.0; 3]; n],
        }
    }

    pub fn bloch(&self) -> &[[f64; 3]] {
        &self.bloch
    }

    pub fn len(&self) -> usize {
        self.bloch.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bloch.is_empty()
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        self.bloch.iter().all(|r| (norm3(r) - 1.0).abs() <= tol)
    }

    /// State vector of a pure product state (Bloch norms are normalized away).
    pub fn state_vector(&self) -> DVector<C64> {
        let mut psi = DVector::from_element(1, c(1.0, 0.0));
        for r in &self.bloch {
            let q = qubit_amplitudes(r);
            let mut next = DVector::zeros(psi.len() * 2);
            for (k, amp) in psi.iter().enumerate() {
                next[2 * k] = amp * q[0];
                next[2 * k + 1] = amp * q[1];
            }
            psi = next;
        }
        psi
    }
}

pub(crate) fn norm3(r: &[f64; 3]) -> f64 {
    (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt()
}

/// Amplitudes `(cos(theta/2), e^{i phi} sin(theta/2))` of the pure state with
/// Bloch direction `r`.
pub fn qubit_amplitudes(r: &[f64; 3]) -> [C64; 2] {
    let norm = norm3(r);
    if norm == 0.0 {
        return [c(1.0, 0.0), c(0.0, 0.0)];
    }
    let z = (r[2] / norm).clamp(-1.0, 1.0);
    let theta = z.acos();
    let phi = r[1].atan2(r[0]);
    [c((theta / 2.0).cos(), 0.0), C64::from_polar((theta / 2.0).sin(), phi)]
}

/// `tr(H rho)` for a product state, i.e.
/// `sum_e w (1 - alpha r_i1 r_j1 - beta r_i2 r_j2 - gamma r_i3 r_j3)`.
pub fn product_energy(inst: &Instance, ps: &ProductState) -> Result<f64, PauliError> {
    if ps.len() != inst.n {
        return Err(PauliError::DimensionMismatch {
            expected: inst.n,
            got: ps.len(),
        });
    }
    Ok(product_energy_unchecked(inst, ps.bloch()))
}

pub(crate) fn product_energy_unchecked(inst: &Instance, bloch: &[[f64; 3]]) -> f64 {
    inst.edges
        .iter()
        .map(|e| {
            let (ri, rj) = (&bloch[e.i], &bloch[e.j]);
            e.w * (1.0 - e.alpha * ri[0] * rj[0] - e.beta * ri[1] * rj[1] - e.gamma * ri[2] * rj[2])
        })
        .sum()
}
