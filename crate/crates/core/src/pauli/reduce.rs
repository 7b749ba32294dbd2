//! Local-unitary reduction of uniform two-qubit interactions to Heisenberg form.
//!
//! If every edge carries the same term with symmetric correlation matrix
//! `M = O D O^T` and no single-qubit parts, conjugating each qubit by the
//! SU(2) lift of `O` turns the Hamiltonian into a diagonal-coupling one:
//!
//! ```text
//! (U^dag)^{(x) n} H U^{(x) n} = H_reduced + offset * I
//! ```
//!
//! where `H_reduced` is an ordinary [`Instance`].

use nalgebra::{DMatrix, Matrix3, SymmetricEigen};

use super::{embed_two_qubit, DenseHermitian, FanoForm, PauliError, SingleQubitUnitary};
use crate::instance::{Edge, Instance};

const REDUCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermEdge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
    pub term: FanoForm,
}

/// A graph whose edges carry arbitrary two-qubit Hermitian terms.
#[derive(Debug, Clone, PartialEq)]
pub struct TermGraph {
    pub n: usize,
    pub edges: Vec<TermEdge>,
}

impl TermGraph {
    /// Same term on every `(i, j, w)`.
    pub fn uniform(n: usize, pairs: &[(usize, usize, f64)], term: FanoForm) -> Self {
        Self {
            n,
            edges: pairs.iter().map(|&(i, j, w)| TermEdge { i, j, w, term }).collect(),
        }
    }

    pub fn from_instance(inst: &Instance) -> Self {
        Self {
            n: inst.n,
            edges: inst
                .edges
                .iter()
                .map(|e| TermEdge {
                    i: e.i,
                    j: e.j,
                    w: e.w,
                    term: FanoForm::heisenberg(e.coeffs()),
                })
                .collect(),
        }
    }

    pub fn build_dense(&self, limit: usize) -> Result<DenseHermitian, PauliError> {
        if self.n > limit {
            return Err(PauliError::TooLarge { n: self.n, limit });
        }
        let dim = 1usize << self.n;
        let mut h = DMatrix::zeros(dim, dim);
        for e in &self.edges {
            embed_two_qubit(&mut h, self.n, e.i, e.j, e.w, &e.term.reconstruct());
        }
        DenseHermitian::from_matrix(h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionMode {
    /// `-M` is an orthogonal projection: the reduced edges lie in `{0,1}^3`.
    Projection,
    Symmetric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub instance: Instance,
    /// `U = lift(rotation)`; the reduced Hamiltonian is `(U^dag)^n H U^n - offset`.
    pub unitary: SingleQubitUnitary,
    pub rotation: Matrix3<f64>,
    pub mode: ReductionMode,
    /// Identity shift: spectrum(H) = spectrum(reduced) + offset.
    pub offset: f64,
    /// Factor by which coefficients were divided (and weights multiplied).
    pub scale: f64,
    /// Eigenvalues of the correlation matrix, in axis order of the reduced edges.
    pub eigenvalues: [f64; 3],
}

/// Orders eigenvector columns to match axes and fixes signs so that a
/// diagonal input yields the identity rotation.
fn canonical_rotation(eig: &SymmetricEigen<f64, nalgebra::U3>) -> (Matrix3<f64>, [f64; 3]) {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let v = &eig.eigenvectors;
    let perm = PERMS
        .iter()
        .max_by(|p, q| {
            let score = |p: &[usize; 3]| (0..3).map(|a| v[(a, p[a])].abs()).sum::<f64>();
            score(p).total_cmp(&score(q))
        })
        .unwrap();
    let mut o = Matrix3::zeros();
    let mut d = [0.0; 3];
    for a in 0..3 {
        let mut col = v.column(perm[a]).into_owned();
        if col[a] < 0.0 {
            col = -col;
        }
        o.set_column(a, &col);
        d[a] = eig.eigenvalues[perm[a]];
    }
    if o.determinant() < 0.0 {
        // D is diagonal, so negating one column leaves O D O^T unchanged.
        let a = (0..3)
            .min_by(|&x, &y| o[(x, x)].abs().total_cmp(&o[(y, y)].abs()))
            .unwrap();
        let col = -o.column(a).into_owned();
        o.set_column(a, &col);
    }
    (o, d)
}

pub fn reduce_instance(graph: &TermGraph) -> Result<Reduction, PauliError> {
    let Some(first) = graph.edges.first() else {
        return Ok(Reduction {
            instance: Instance::new(graph.n, vec![], "reduced").map_err(|e| PauliError::InvalidGraph(e.to_string()))?,
            unitary: SingleQubitUnitary::identity(),
            rotation: Matrix3::identity(),
            mode: ReductionMode::Projection,
            offset: 0.0,
            scale: 1.0,
            eigenvalues: [0.0; 3],
        });
    };
    let term = first.term;
    for (k, e) in graph.edges.iter().enumerate() {
        let deviation = e.term.max_abs_diff(&term);
        if deviation > REDUCE_TOL {
            return Err(PauliError::NonIdenticalTerms { edge: k, deviation });
        }
    }
    let local = term.r.amax().max(term.s.amax());
    if local > REDUCE_TOL {
        return Err(PauliError::LocalTerms(local));
    }
    let asym = (term.m - term.m.transpose()).amax();
    if asym > REDUCE_TOL {
        return Err(PauliError::AsymmetricCorrelation(asym));
    }

    let sym = (term.m + term.m.transpose()) / 2.0;
    let (rotation, d) = canonical_rotation(&SymmetricEigen::new(sym));
    let unitary = SingleQubitUnitary::lift(&rotation)?;

    let is_bit = |x: f64| x.abs() <= REDUCE_TOL || (x - 1.0).abs() <= REDUCE_TOL;
    let mode = if d.iter().all(|&x| is_bit(-x)) {
        ReductionMode::Projection
    } else {
        ReductionMode::Symmetric
    };

    // kappa I + sum_a d_a s_a s_a = scale (I - sum_a (-d_a / scale) s_a s_a) + (kappa - scale) I
    let scale = d.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
    let mut coeffs = d.map(|x| (-x / scale).clamp(-1.0, 1.0));
    if mode == ReductionMode::Projection {
        coeffs = coeffs.map(f64::round);
    }
    // Normalize -0.0 so serialized instances read cleanly.
    let coeffs = coeffs.map(|x| x + 0.0);
    let mut offset = 0.0;
    let edges = graph
        .edges
        .iter()
        .map(|e| {
            offset += e.w * (term.kappa - scale);
            Edge::new(e.i, e.j, e.w * scale, coeffs)
        })
        .collect();
    let instance = Instance::new(graph.n, edges, "reduced").map_err(|e| PauliError::InvalidGraph(e.to_string()))?;
    Ok(Reduction {
        instance,
        unitary,
        rotation,
        mode,
        offset,
        scale,
        eigenvalues: d,
    })
}
