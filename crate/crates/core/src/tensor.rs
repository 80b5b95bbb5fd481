//! Evaluation of the polarization tensor M(mu) by three independent routes:
//! a direct solve with (mu I - K), a dual solve with the adjoint restricted
//! to mean-free densities (which extends to mu = -1/2), and the rational sum
//! over the spectral measures.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use thiserror::Error;

use crate::geometry::DiscreteBoundary;
use crate::layerops::{to_weighted, DenseOperator, OperatorKind};
use crate::spectral::SpectralData;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("contrast {mu} is within {distance:.3e} of the operator eigenvalue {lambda:.8}")]
    ContrastNearSpectrum { mu: Complex64, lambda: f64, distance: f64 },
    #[error("linear solve failed (system numerically singular)")]
    SolveFailure,
    #[error("matrix is not orthogonal: defect {defect:.3e}")]
    NotOrthogonal { defect: f64 },
    #[error("operator has kind {0:?}, expected the double layer operator")]
    WrongKind(OperatorKind),
    #[error("tensor at mu = {mu} has imaginary residue {imag:.3e}, not a real tensor")]
    NotReal { mu: Complex64, imag: f64 },
}

/// Which route produced a tensor value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMethod {
    Direct,
    Dual,
    Spectral,
}

impl EvalMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            EvalMethod::Direct => "direct",
            EvalMethod::Dual => "dual",
            EvalMethod::Spectral => "spectral",
        }
    }
}

/// The polarization tensor at one contrast.
#[derive(Debug, Clone, Copy)]
pub struct PolTensor {
    pub mu: Complex64,
    /// Complex symmetric 2x2 value; m12 == m21 by construction.
    pub m: Matrix2<Complex64>,
    pub method: EvalMethod,
    /// Relative off-diagonal defect |m12 - m21| / ||m|| before symmetrization.
    pub symmetry_defect: f64,
    /// Set when the contrast is close enough to a pole that conditioning
    /// degrades (distance below 1000x the guard).
    pub condition_warning: bool,
}

impl PolTensor {
    /// The real part, provided the imaginary residue is negligible.
    pub fn real_matrix(&self) -> Result<Matrix2<f64>, TensorError> {
        let norm = matrix_norm(&self.m);
        let imag = self.m.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if imag > 1e-10 * norm.max(1.0) {
            return Err(TensorError::NotReal { mu: self.mu, imag });
        }
        Ok(self.m.map(|z| z.re))
    }
}

fn matrix_norm(m: &Matrix2<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Default minimum distance between the contrast and operator eigenvalues.
pub const DEFAULT_POLE_GUARD: f64 = 1e-6;
/// Warn when the distance to the spectrum is below this multiple of the guard.
const WARN_FACTOR: f64 = 1e3;

/// Distance from mu to the segment [-1/2, 1/2] on the real axis, a cheap
/// lower bound for the distance to the spectrum.
fn interval_distance(mu: Complex64) -> f64 {
    let dx = (mu.re.abs() - 0.5).max(0.0);
    (dx * dx + mu.im * mu.im).sqrt()
}

/// Distance from mu to a set of real eigenvalues, with the closest one.
fn spectrum_distance(mu: Complex64, eigenvalues: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut best = (f64::INFINITY, f64::NAN);
    for l in eigenvalues {
        let d = (mu - Complex64::new(l, 0.0)).norm();
        if d < best.0 {
            best = (d, l);
        }
    }
    best
}

struct GuardOutcome {
    warning: bool,
}

fn guard_against_spectrum(
    k: &DenseOperator,
    mu: Complex64,
    guard: f64,
    exclude_trivial: bool,
) -> Result<GuardOutcome, TensorError> {
    // Away from the band that contains the whole spectrum there is nothing to
    // check and no eigendecomposition is needed.
    if interval_distance(mu) >= guard * WARN_FACTOR {
        return Ok(GuardOutcome { warning: false });
    }
    let eigs = k.spectrum().iter().copied().filter(|l| !(exclude_trivial && (l + 0.5).abs() < 1e-6));
    let (distance, lambda) = spectrum_distance(mu, eigs);
    if distance < guard {
        return Err(TensorError::ContrastNearSpectrum { mu, lambda, distance });
    }
    Ok(GuardOutcome { warning: distance < guard * WARN_FACTOR })
}

fn weighted_coordinate(db: &DiscreteBoundary, component: usize) -> DVector<f64> {
    to_weighted(db, &DVector::from_iterator(db.n, db.points.iter().map(|p| p[component])))
}

fn weighted_normal(db: &DiscreteBoundary, component: usize) -> DVector<f64> {
    to_weighted(db, &DVector::from_iterator(db.n, db.normals.iter().map(|nu| nu[component])))
}

/// Solve (mu I - B) u = rhs for a real matrix B and complex mu, using a real
/// factorization when mu is real.
fn shifted_solve(
    b: &DMatrix<f64>,
    mu: Complex64,
    rhs: &[DVector<f64>],
) -> Result<Vec<DVector<Complex64>>, TensorError> {
    let n = b.nrows();
    if mu.im == 0.0 {
        let mut system = -b.clone();
        for i in 0..n {
            system[(i, i)] += mu.re;
        }
        let lu = system.lu();
        rhs.iter()
            .map(|r| {
                lu.solve(r)
                    .map(|sol| sol.map(|x| Complex64::new(x, 0.0)))
                    .ok_or(TensorError::SolveFailure)
            })
            .collect()
    } else {
        let mut system = DMatrix::from_iterator(n, n, b.iter().map(|&x| Complex64::new(-x, 0.0)));
        for i in 0..n {
            system[(i, i)] += mu;
        }
        let lu = system.lu();
        rhs.iter()
            .map(|r| {
                let rc = r.map(|x| Complex64::new(x, 0.0));
                lu.solve(&rc).ok_or(TensorError::SolveFailure)
            })
            .collect()
    }
}

fn finish_tensor(
    mu: Complex64,
    raw: Matrix2<Complex64>,
    method: EvalMethod,
    warning: bool,
) -> PolTensor {
    let norm = matrix_norm(&raw);
    let defect = if norm > 0.0 { (raw[(0, 1)] - raw[(1, 0)]).norm() / norm } else { 0.0 };
    let sym = 0.5 * (raw[(0, 1)] + raw[(1, 0)]);
    let m = Matrix2::new(raw[(0, 0)], sym, sym, raw[(1, 1)]);
    PolTensor { mu, m, method, symmetry_defect: defect, condition_warning: warning }
}

/// M_kl = integral of nu_l (mu I - K)^(-1) x_k over the boundary.
pub fn pol_direct(k: &DenseOperator, mu: Complex64) -> Result<PolTensor, TensorError> {
    pol_direct_guarded(k, mu, DEFAULT_POLE_GUARD)
}

pub fn pol_direct_guarded(
    k: &DenseOperator,
    mu: Complex64,
    guard: f64,
) -> Result<PolTensor, TensorError> {
    if k.kind != OperatorKind::DoubleLayer {
        return Err(TensorError::WrongKind(k.kind));
    }
    let outcome = guard_against_spectrum(k, mu, guard, false)?;
    let db = &k.db;
    let rhs = [weighted_coordinate(db, 0), weighted_coordinate(db, 1)];
    let sols = shifted_solve(&k.matrix, mu, &rhs)?;
    let nus = [weighted_normal(db, 0), weighted_normal(db, 1)];
    let mut raw = Matrix2::zeros();
    for (kk, sol) in sols.iter().enumerate() {
        for (ll, nu) in nus.iter().enumerate() {
            let val: Complex64 = sol.iter().zip(nu.iter()).map(|(s, w)| s * w).sum();
            raw[(kk, ll)] = val;
        }
    }
    Ok(finish_tensor(mu, raw, EvalMethod::Direct, outcome.warning))
}

/// Dual evaluation M_kl = integral of x_k (mu I - K')^(-1) nu_l with the
/// adjoint restricted to mean-free densities. Well-defined at mu = -1/2.
pub fn pol_dual(k: &DenseOperator, mu: Complex64) -> Result<PolTensor, TensorError> {
    pol_dual_guarded(k, mu, DEFAULT_POLE_GUARD)
}

pub fn pol_dual_guarded(
    k: &DenseOperator,
    mu: Complex64,
    guard: f64,
) -> Result<PolTensor, TensorError> {
    if k.kind != OperatorKind::DoubleLayer {
        return Err(TensorError::WrongKind(k.kind));
    }
    let near_trivial = (mu - Complex64::new(-0.5, 0.0)).norm() < guard * WARN_FACTOR;
    let outcome = if near_trivial {
        // -1/2 itself is admissible here; only the rest of the spectrum
        // limits the contrast.
        let eigs = k.spectrum().iter().copied().filter(|l| (l + 0.5).abs() >= 1e-6);
        let (distance, lambda) = spectrum_distance(mu, eigs);
        if distance < guard {
            return Err(TensorError::ContrastNearSpectrum { mu, lambda, distance });
        }
        GuardOutcome { warning: distance < guard * WARN_FACTOR }
    } else {
        guard_against_spectrum(k, mu, guard, true)?
    };

    let db = &k.db;
    let n = db.n;
    // Unit vector spanning the constants; the mean-free subspace is its
    // orthogonal complement in the weighted frame.
    let mut c = to_weighted(db, &DVector::from_element(n, 1.0));
    c /= c.norm();
    let project = |v: &DVector<f64>| -> DVector<f64> { v - &c * c.dot(v) };

    // Deflated adjoint system: mu P - P K^T P + c c^T, nonsingular on the
    // whole space whenever the restriction to the mean-free subspace is.
    let kt = k.matrix.transpose();
    let p_mat = DMatrix::identity(n, n) - &c * c.transpose();
    let deflected = &p_mat * &kt * &p_mat;
    let rhs = [project(&weighted_normal(db, 0)), project(&weighted_normal(db, 1))];
    let sols = solve_deflated(&deflected, &p_mat, &c, mu, &rhs)?;
    let xs = [weighted_coordinate(db, 0), weighted_coordinate(db, 1)];
    let mut raw = Matrix2::zeros();
    for (ll, sol) in sols.iter().enumerate() {
        // Project the solution back onto the mean-free subspace before the
        // final pairing.
        let sol_proj = {
            let dot: Complex64 = sol.iter().zip(c.iter()).map(|(s, ci)| s * ci).sum();
            DVector::from_iterator(n, sol.iter().zip(c.iter()).map(|(s, ci)| s - dot * ci))
        };
        for (kk, x) in xs.iter().enumerate() {
            let val: Complex64 = sol_proj.iter().zip(x.iter()).map(|(s, w)| s * w).sum();
            raw[(kk, ll)] = val;
        }
    }
    Ok(finish_tensor(mu, raw, EvalMethod::Dual, outcome.warning))
}

/// Solve [P (mu I - K^T) P + c c^T] chi = rhs.
fn solve_deflated(
    pkp: &DMatrix<f64>,
    p_mat: &DMatrix<f64>,
    c: &DVector<f64>,
    mu: Complex64,
    rhs: &[DVector<f64>],
) -> Result<Vec<DVector<Complex64>>, TensorError> {
    let n = pkp.nrows();
    if mu.im == 0.0 {
        let system = mu.re * p_mat - pkp + c * c.transpose();
        let lu = system.lu();
        rhs.iter()
            .map(|r| {
                lu.solve(r)
                    .map(|sol| sol.map(|x| Complex64::new(x, 0.0)))
                    .ok_or(TensorError::SolveFailure)
            })
            .collect()
    } else {
        let real_part = -pkp + c * c.transpose();
        let system = DMatrix::from_iterator(
            n,
            n,
            real_part.iter().zip(p_mat.iter()).map(|(&re, &p)| Complex64::new(re, 0.0) + mu * p),
        );
        let lu = system.lu();
        rhs.iter()
            .map(|r| {
                let rc = r.map(|x| Complex64::new(x, 0.0));
                lu.solve(&rc).ok_or(TensorError::SolveFailure)
            })
            .collect()
    }
}

/// Rational sum over the spectral measure clusters.
pub fn pol_spectral(sd: &SpectralData, mu: Complex64) -> Result<PolTensor, TensorError> {
    pol_spectral_guarded(sd, mu, DEFAULT_POLE_GUARD)
}

pub fn pol_spectral_guarded(
    sd: &SpectralData,
    mu: Complex64,
    guard: f64,
) -> Result<PolTensor, TensorError> {
    let (distance, lambda) = spectrum_distance(mu, sd.entries.iter().map(|e| e.lambda));
    if distance < guard {
        return Err(TensorError::ContrastNearSpectrum { mu, lambda, distance });
    }
    let mut m11 = Complex64::default();
    let mut m22 = Complex64::default();
    let mut m12 = Complex64::default();
    for e in &sd.entries {
        let denom = mu - Complex64::new(e.lambda, 0.0);
        m11 += e.alpha / denom;
        m22 += e.beta / denom;
        m12 += e.gamma / denom;
    }
    let m = Matrix2::new(m11, m12, m12, m22);
    Ok(PolTensor {
        mu,
        m,
        method: EvalMethod::Spectral,
        symmetry_defect: 0.0,
        condition_warning: distance < guard * WARN_FACTOR,
    })
}

/// Similarity transformation law: the tensor of c Q(Omega) is c^2 Q M Q^T.
pub fn transform_tensor(
    t: &PolTensor,
    q: &Matrix2<f64>,
    c: f64,
) -> Result<PolTensor, TensorError> {
    let defect = (q * q.transpose() - Matrix2::identity()).norm();
    if defect > 1e-12 {
        return Err(TensorError::NotOrthogonal { defect });
    }
    let qc = q.map(|x| Complex64::new(x, 0.0));
    let m = qc * t.m * qc.transpose() * Complex64::new(c * c, 0.0);
    Ok(PolTensor { m, ..*t })
}
