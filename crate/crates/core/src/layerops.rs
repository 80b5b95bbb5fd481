//! Dense Nystrom matrices for the single and double layer operators, the
//! square roots of S, and the symmetrized operator A = S^(-1/2) K S^(1/2).
//!
//! All matrices are stored in the weight-symmetrized frame: if B acts on node
//! values and W = diag(w_j) holds the arc-length quadrature weights, the
//! stored matrix is W^(1/2) B W^(-1/2). In this frame the discrete weighted
//! inner product becomes the standard dot product, adjoints become plain
//! transposes, and S and A are literally symmetric matrices.
//!
//! The double layer kernel is smooth on a C^2 curve with diagonal limit
//! -kappa/(4 pi), so plain trapezoidal quadrature is spectrally accurate.
//! The single layer kernel splits as
//!   -(1/2 pi) log|x(t)-x(s)| =
//!       -(1/4 pi) log(4 sin^2((t-s)/2)) - (1/2 pi) log g(t,s)
//! with g smooth and positive; the first part is integrated with the exact
//! Fourier weights for the periodic log singularity and the remainder with
//! the trapezoidal rule.

use std::f64::consts::{PI, TAU};
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::geometry::DiscreteBoundary;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("curve is not normalized: node radius {max_radius:.6} reaches outside the unit disk")]
    NotNormalized { max_radius: f64 },
    #[error("matrix is not positive definite: eigenvalue range [{min:.3e}, {max:.3e}]")]
    NotPositiveDefinite { min: f64, max: f64 },
    #[error("symmetrization defect {defect:.3e} of A exceeds 1e-6; discretization is inconsistent")]
    AsymmetryTooLarge { defect: f64 },
    #[error("operators were assembled on different discretizations")]
    DifferentBoundaries,
    #[error("operator kind {0:?} is not valid for this operation")]
    WrongKind(OperatorKind),
    #[error("eigenvalue iteration failed to converge")]
    EigFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    SingleLayer,
    DoubleLayer,
    DoubleLayerAdjoint,
    SqrtSingleLayer,
    InvSqrtSingleLayer,
    Symmetrized,
}

/// A discretized boundary operator in the weight-symmetrized frame, together
/// with the discretization it was built on.
#[derive(Debug)]
pub struct DenseOperator {
    pub kind: OperatorKind,
    pub matrix: DMatrix<f64>,
    pub db: Arc<DiscreteBoundary>,
    /// Relative asymmetry recorded before forced symmetrization (kind A only).
    pub symmetrization_defect: f64,
    spectrum: OnceLock<Vec<f64>>,
}

impl DenseOperator {
    fn new(kind: OperatorKind, matrix: DMatrix<f64>, db: Arc<DiscreteBoundary>) -> Self {
        DenseOperator { kind, matrix, db, symmetrization_defect: 0.0, spectrum: OnceLock::new() }
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    /// Apply the operator to a vector of node values.
    pub fn apply_nodal(&self, v: &DVector<f64>) -> DVector<f64> {
        let w = to_weighted(&self.db, v);
        from_weighted(&self.db, &(&self.matrix * w))
    }

    /// Eigenvalues (real parts, sorted ascending), cached after first use.
    /// The imaginary parts vanish up to roundoff: the operators here are
    /// similar to symmetric matrices.
    pub fn spectrum(&self) -> &[f64] {
        self.spectrum.get_or_init(|| {
            let mut eigs: Vec<f64> = if self.is_symmetric_kind() {
                self.matrix.symmetric_eigenvalues().iter().copied().collect()
            } else {
                self.matrix.clone().complex_eigenvalues().iter().map(|z| z.re).collect()
            };
            eigs.sort_by(f64::total_cmp);
            eigs
        })
    }

    fn is_symmetric_kind(&self) -> bool {
        !matches!(self.kind, OperatorKind::DoubleLayer | OperatorKind::DoubleLayerAdjoint)
    }

    /// The adjoint with respect to the weighted inner product; a transpose in
    /// this frame.
    pub fn adjoint(&self) -> DenseOperator {
        let kind = match self.kind {
            OperatorKind::DoubleLayer => OperatorKind::DoubleLayerAdjoint,
            OperatorKind::DoubleLayerAdjoint => OperatorKind::DoubleLayer,
            k => k,
        };
        DenseOperator::new(kind, self.matrix.transpose(), self.db.clone())
    }
}

/// Map node values into the weighted frame: v -> W^(1/2) v.
pub fn to_weighted(db: &DiscreteBoundary, v: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(db.n, v.iter().zip(&db.weights).map(|(x, w)| x * w.sqrt()))
}

/// Map a weighted-frame vector back to node values: v -> W^(-1/2) v.
pub fn from_weighted(db: &DiscreteBoundary, v: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(db.n, v.iter().zip(&db.weights).map(|(x, w)| x / w.sqrt()))
}

/// Assemble the double layer operator K. Row sums of the nodal matrix
/// reproduce K 1 = -1/2 up to discretization error.
pub fn assemble_k(db: &Arc<DiscreteBoundary>) -> DenseOperator {
    let n = db.n;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let xi = db.points[i];
        for j in 0..n {
            let nodal = if i == j {
                -db.curvature[i] / (4.0 * PI) * db.weights[i]
            } else {
                let d = db.points[j] - xi;
                let r2 = d.norm_squared();
                -db.normals[j].dot(&d) / (TAU * r2) * db.weights[j]
            };
            m[(i, j)] = nodal * (db.weights[i] / db.weights[j]).sqrt();
        }
    }
    DenseOperator::new(OperatorKind::DoubleLayer, m, db.clone())
}

/// Quadrature weights R(k) for the periodic integrand log(4 sin^2((t-s)/2)),
/// exact on trigonometric polynomials of degree up to n/2.
fn log_weights(n: usize) -> Vec<f64> {
    let half = n / 2;
    (0..n)
        .map(|k| {
            let angle = TAU * k as f64 / n as f64;
            let mut sum = 0.0;
            for m in 1..half {
                sum += (m as f64 * angle).cos() / m as f64;
            }
            let nyquist = if k % 2 == 0 { 1.0 } else { -1.0 };
            -4.0 * PI / n as f64 * sum - 4.0 * PI / (n as f64 * n as f64) * nyquist
        })
        .collect()
}

/// Assemble the single layer operator S for a normalized curve (all nodes
/// strictly inside the unit disk, so that S is positive definite).
pub fn assemble_s(db: &Arc<DiscreteBoundary>) -> Result<DenseOperator, OperatorError> {
    let max_radius = db.max_radius();
    if max_radius >= 1.0 {
        return Err(OperatorError::NotNormalized { max_radius });
    }
    let n = db.n;
    let rho = log_weights(n);
    let speeds = db.speeds();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let log_g = if i == j {
                speeds[i].ln()
            } else {
                let chord = (db.points[i] - db.points[j]).norm();
                let gap = 2.0 * ((db.t[i] - db.t[j]) / 2.0).sin().abs();
                (chord / gap).ln()
            };
            let kernel = -rho[i - j] / (4.0 * PI) - log_g / n as f64;
            // Nodal entry is kernel * |x'_j|; conjugating by W^(1/2) turns the
            // speed factor into sqrt(|x'_i| |x'_j|), a symmetric matrix.
            let entry = kernel * (speeds[i] * speeds[j]).sqrt();
            m[(i, j)] = entry;
            m[(j, i)] = entry;
        }
    }
    Ok(DenseOperator::new(OperatorKind::SingleLayer, m, db.clone()))
}

/// Symmetric square root and inverse square root of a positive definite S.
pub fn sqrt_s(s: &DenseOperator) -> Result<(DenseOperator, DenseOperator), OperatorError> {
    if s.kind != OperatorKind::SingleLayer {
        return Err(OperatorError::WrongKind(s.kind));
    }
    let eig = nalgebra::SymmetricEigen::try_new(s.matrix.clone(), f64::EPSILON, 0)
        .ok_or(OperatorError::EigFailure)?;
    let min = eig.eigenvalues.min();
    let max = eig.eigenvalues.max();
    if min <= 1e-13 * max {
        return Err(OperatorError::NotPositiveDefinite { min, max });
    }
    let v = &eig.eigenvectors;
    let sqrt_vals = DVector::from_iterator(s.n(), eig.eigenvalues.iter().map(|l| l.sqrt()));
    let inv_vals = DVector::from_iterator(s.n(), eig.eigenvalues.iter().map(|l| 1.0 / l.sqrt()));
    let half = v * DMatrix::from_diagonal(&sqrt_vals) * v.transpose();
    let inv_half = v * DMatrix::from_diagonal(&inv_vals) * v.transpose();
    Ok((
        DenseOperator::new(OperatorKind::SqrtSingleLayer, half, s.db.clone()),
        DenseOperator::new(OperatorKind::InvSqrtSingleLayer, inv_half, s.db.clone()),
    ))
}

/// Largest allowed pre-symmetrization defect of A.
pub const MAX_ASYMMETRY: f64 = 1e-6;

/// Assemble A = S^(-1/2) K S^(1/2). The result is forced symmetric by
/// averaging with its transpose; the relative defect before averaging is
/// recorded and must stay below [`MAX_ASYMMETRY`].
pub fn assemble_a(
    k: &DenseOperator,
    s_half: &DenseOperator,
    s_inv_half: &DenseOperator,
) -> Result<DenseOperator, OperatorError> {
    if k.kind != OperatorKind::DoubleLayer
        || s_half.kind != OperatorKind::SqrtSingleLayer
        || s_inv_half.kind != OperatorKind::InvSqrtSingleLayer
    {
        return Err(OperatorError::WrongKind(k.kind));
    }
    if !Arc::ptr_eq(&k.db, &s_half.db) || !Arc::ptr_eq(&k.db, &s_inv_half.db) {
        return Err(OperatorError::DifferentBoundaries);
    }
    let raw = &s_inv_half.matrix * &k.matrix * &s_half.matrix;
    let defect = (&raw - raw.transpose()).norm() / raw.norm();
    if defect > MAX_ASYMMETRY {
        return Err(OperatorError::AsymmetryTooLarge { defect });
    }
    let sym = 0.5 * (&raw + raw.transpose());
    let mut op = DenseOperator::new(OperatorKind::Symmetrized, sym, k.db.clone());
    op.symmetrization_defect = defect;
    Ok(op)
}

/// Spectral differentiation matrix for 2 pi periodic functions on the uniform
/// grid (n even): exact for trigonometric polynomials of degree < n/2.
pub fn differentiation_matrix(n: usize) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                let angle = PI * (i as f64 - j as f64) / n as f64;
                d[(i, j)] = 0.5 * sign / angle.tan();
            }
        }
    }
    d
}

/// Arc-length derivative in the weighted frame:
/// W^(1/2) diag(1/|x'|) D W^(-1/2).
pub fn arclength_derivative(db: &DiscreteBoundary) -> DMatrix<f64> {
    let n = db.n;
    let mut d = differentiation_matrix(n);
    let speeds = db.speeds();
    for i in 0..n {
        for j in 0..n {
            d[(i, j)] *= (db.weights[i] / db.weights[j]).sqrt() / speeds[i];
        }
    }
    d
}

/// Relative Plemelj defect || K S - S K^T || / || K S ||; a consistency
/// diagnostic for the two independently assembled quadratures.
pub fn plemelj_defect(k: &DenseOperator, s: &DenseOperator) -> f64 {
    let ks = &k.matrix * &s.matrix;
    let skt = &s.matrix * k.matrix.transpose();
    (&ks - skt).norm() / ks.norm()
}
