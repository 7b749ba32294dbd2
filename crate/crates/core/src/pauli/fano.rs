use nalgebra::{DMatrix, Matrix3, Matrix4, Vector3};

use super::{hermitian_deviation, kron2, sigma, PauliError, C64};

const HERMITIAN_TOL: f64 = 1e-12;

/// Pauli-basis expansion of a two-qubit Hermitian operator:
///
/// `kappa I + sum_ab m_ab s_a (x) s_b + sum_a r_a s_a (x) I + sum_b s_b I (x) s_b`.
///
/// `m` is the correlation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanoForm {
    pub kappa: f64,
    pub m: Matrix3<f64>,
    pub r: Vector3<f64>,
    pub s: Vector3<f64>,
}

impl FanoForm {
    /// The Heisenberg edge term `I - alpha XX - beta YY - gamma ZZ`.
    pub fn heisenberg(coeffs: [f64; 3]) -> Self {
        Self {
            kappa: 1.0,
            m: Matrix3::from_diagonal(&Vector3::from(coeffs.map(|x| -x))),
            r: Vector3::zeros(),
            s: Vector3::zeros(),
        }
    }

    pub fn decompose(h: &Matrix4<C64>) -> Result<Self, PauliError> {
        let deviation = hermitian_deviation(&DMatrix::from_column_slice(4, 4, h.as_slice()));
        if deviation > HERMITIAN_TOL {
            return Err(PauliError::NotHermitian { deviation });
        }
        let overlap = |p: &Matrix4<C64>| (p * h).trace().re / 4.0;
        let id = nalgebra::Matrix2::<C64>::identity();
        Ok(Self {
            kappa: h.trace().re / 4.0,
            m: Matrix3::from_fn(|a, b| overlap(&kron2(&sigma(a), &sigma(b)))),
            r: Vector3::from_fn(|a, _| overlap(&kron2(&sigma(a), &id))),
            s: Vector3::from_fn(|b, _| overlap(&kron2(&id, &sigma(b)))),
        })
    }

    pub fn reconstruct(&self) -> Matrix4<C64> {
        let id = nalgebra::Matrix2::<C64>::identity();
        let re = |x: f64| C64::new(x, 0.0);
        let mut out = Matrix4::identity() * re(self.kappa);
        for a in 0..3 {
            for b in 0..3 {
                out += kron2(&sigma(a), &sigma(b)) * re(self.m[(a, b)]);
            }
            out += kron2(&sigma(a), &id) * re(self.r[a]);
            out += kron2(&id, &sigma(a)) * re(self.s[a]);
        }
        out
    }

    /// Largest absolute coefficient difference.
    pub fn max_abs_diff(&self, other: &FanoForm) -> f64 {
        let mut d = (self.kappa - other.kappa).abs();
        d = d.max((self.m - other.m).amax());
        d = d.max((self.r - other.r).amax());
        d.max((self.s - other.s).amax())
    }
}
