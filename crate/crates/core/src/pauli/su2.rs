use nalgebra::{Matrix2, Matrix3, Vector3};

use super::{sigma, PauliError, C64};

const SO3_TOL: f64 = 1e-9;

/// A 2x2 unitary with unit determinant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleQubitUnitary(Matrix2<C64>);

impl SingleQubitUnitary {
    pub fn identity() -> Self {
        Self(Matrix2::identity())
    }

    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.0
    }

    /// `cos(theta/2) I - i sin(theta/2) (axis . sigma)`, the rotation by
    /// `theta` about the unit vector `axis`.
    pub fn from_axis_angle(axis: Vector3<f64>, theta: f64) -> Self {
        let (s, c) = ((theta / 2.0).sin(), (theta / 2.0).cos());
        Self::from_quaternion(c, axis * s)
    }

    fn from_quaternion(w: f64, v: Vector3<f64>) -> Self {
        // Canonical sign: w > 0, or the first nonzero vector component > 0.
        let flip = if w.abs() > 1e-15 {
            w < 0.0
        } else {
            v.iter().find(|x| x.abs() > 1e-15).is_some_and(|&x| x < 0.0)
        };
        let (w, v) = if flip { (-w, -v) } else { (w, v) };
        let mut u = Matrix2::identity() * C64::new(w, 0.0);
        for k in 0..3 {
            u -= sigma(k) * C64::new(0.0, v[k]);
        }
        Self(u)
    }

    /// Lifts a rotation `o` in SO(3) to `U` in SU(2) with
    /// `U s_a U^dag = sum_b o[(b, a)] s_b`.
    pub fn lift(o: &Matrix3<f64>) -> Result<Self, PauliError> {
        let orth = (o.transpose() * o - Matrix3::identity()).amax();
        let det = o.determinant();
        if orth > SO3_TOL || (det - 1.0).abs() > SO3_TOL {
            return Err(PauliError::NotSpecialOrthogonal { orth, det });
        }
        let anti = Vector3::new(o[(2, 1)] - o[(1, 2)], o[(0, 2)] - o[(2, 0)], o[(1, 0)] - o[(0, 1)]);
        let cos_t = ((o.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
        let theta = (anti.norm() / 2.0).atan2(cos_t);
        if cos_t > -0.5 {
            // Antisymmetric part is 2 sin(theta) axis and well conditioned here.
            let norm = anti.norm();
            if norm < 1e-300 {
                return Ok(Self::identity());
            }
            return Ok(Self::from_axis_angle(anti / norm, theta));
        }
        // Near theta = pi: symmetric part is (1 - cos theta) axis axis^T.
        let sym = (o + o.transpose()) / 2.0 - Matrix3::identity() * cos_t;
        let k = (0..3).max_by(|&a, &b| sym[(a, a)].total_cmp(&sym[(b, b)])).unwrap();
        let mut axis: Vector3<f64> = sym.column(k).into();
        axis /= axis.norm();
        if axis.dot(&anti) < 0.0 {
            axis = -axis;
        }
        Ok(Self::from_axis_angle(axis, theta))
    }

    /// Max entry error over the nine relations `U s_a U^dag = sum_b o_ba s_b`.
    pub fn conjugation_error(&self, o: &Matrix3<f64>) -> f64 {
        let u = &self.0;
        (0..3)
            .map(|a| {
                let lhs = u * sigma(a) * u.adjoint();
                let rhs = (0..3).fold(Matrix2::zeros(), |acc, b| acc + sigma(b) * C64::new(o[(b, a)], 0.0));
                (lhs - rhs).map(|z| z.norm()).max()
            })
            .fold(0.0, f64::max)
    }

    pub fn unitarity_error(&self) -> f64 {
        let uu = self.0.adjoint() * self.0 - Matrix2::identity();
        uu.map(|z| z.norm())
            .max()
            .max((self.0.determinant() - C64::new(1.0, 0.0)).norm())
    }

    /// Equal up to a global sign.
    pub fn approx_eq_up_to_sign(&self, other: &Self, tol: f64) -> bool {
        let d1 = (self.0 - other.0).map(|z| z.norm()).max();
        let d2 = (self.0 + other.0).map(|z| z.norm()).max();
        d1.min(d2) <= tol
    }
}
