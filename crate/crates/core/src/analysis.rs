//! Audits of the Hashin-Shtrikman trace bounds and the large-contrast trace
//! law, with equality-case flagging (disk for the lower trace bound, ellipses
//! for the inverse-trace bound).

use nalgebra::Matrix2;
use num_complex::Complex64;
use thiserror::Error;

use crate::geometry;
use crate::layerops::DenseOperator;
use crate::tensor::{pol_direct, TensorError};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("contrast {0} lies inside (-1/2, 1/2); bounds hold for |mu| >= 1/2")]
    ContrastInBand(f64),
    #[error("tensor is numerically singular (det {det:.3e})")]
    SingularTensor { det: f64 },
    #[error("trace asymptotics need |mu| >= 10, got {0}")]
    ContrastTooSmall(f64),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Relative tolerance for flagging near-equality in the bounds.
pub const EQUALITY_FLAG_TOL: f64 = 1e-6;

/// One bounds audit at a single real contrast.
#[derive(Debug, Clone, Copy)]
pub struct BoundsReport {
    pub mu: f64,
    pub area: f64,
    pub trace_m: f64,
    pub trace_m_inv: f64,
    /// Lower bound of the trace inequality: 2 |Omega| / |mu|.
    pub lower1: f64,
    /// Strict upper bound: 8 |mu| |Omega| / (4 mu^2 - 1); infinite at |mu| = 1/2.
    pub upper1: f64,
    /// Bound on |Tr M^-1|: 2 |mu| / |Omega|.
    pub bound2: f64,
    pub margin_lower1: f64,
    pub margin_upper1: f64,
    pub margin_bound2: f64,
    /// Near-equality in the lower trace bound; the disk case.
    pub lower1_equality: bool,
    /// Near-equality in the inverse-trace bound; the ellipse case.
    pub bound2_equality: bool,
}

/// Audit both Hashin-Shtrikman inequalities for a real symmetric tensor at a
/// real contrast with |mu| >= 1/2.
pub fn hs_check(m: &Matrix2<f64>, mu: f64, area: f64) -> Result<BoundsReport, AnalysisError> {
    if mu.abs() < 0.5 {
        return Err(AnalysisError::ContrastInBand(mu));
    }
    let trace_m = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    if det.abs() <= 1e-14 * m.norm() * m.norm() {
        return Err(AnalysisError::SingularTensor { det });
    }
    let trace_m_inv = trace_m / det;

    let lower1 = 2.0 * area / mu.abs();
    let denom = 4.0 * mu * mu - 1.0;
    let upper1 = if denom > 0.0 { 8.0 * mu.abs() * area / denom } else { f64::INFINITY };
    let bound2 = 2.0 * mu.abs() / area;

    let margin_lower1 = trace_m.abs() - lower1;
    let margin_upper1 = upper1 - trace_m.abs();
    let margin_bound2 = bound2 - trace_m_inv.abs();

    Ok(BoundsReport {
        mu,
        area,
        trace_m,
        trace_m_inv,
        lower1,
        upper1,
        bound2,
        margin_lower1,
        margin_upper1,
        margin_bound2,
        lower1_equality: margin_lower1.abs() < EQUALITY_FLAG_TOL * lower1,
        bound2_equality: margin_bound2.abs() < EQUALITY_FLAG_TOL * bound2,
    })
}

/// One row of the large-contrast convergence table.
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticsRow {
    pub mu: f64,
    pub mu_m11: f64,
    pub mu_m22: f64,
    /// max_k |mu M_kk - area| / area.
    pub deviation: f64,
}

/// Evaluate mu * M_kk along a sequence of large real contrasts; the deviation
/// from the area must shrink like 1/|mu|.
pub fn trace_asymptotics(
    k: &DenseOperator,
    mus: &[f64],
) -> Result<Vec<AsymptoticsRow>, AnalysisError> {
    let area = geometry::area(&k.db);
    mus.iter()
        .map(|&mu| {
            if mu.abs() < 10.0 {
                return Err(AnalysisError::ContrastTooSmall(mu));
            }
            let t = pol_direct(k, Complex64::new(mu, 0.0))?;
            let mu_m11 = mu * t.m[(0, 0)].re;
            let mu_m22 = mu * t.m[(1, 1)].re;
            let deviation = ((mu_m11 - area).abs()).max((mu_m22 - area).abs()) / area;
            Ok(AsymptoticsRow { mu, mu_m11, mu_m22, deviation })
        })
        .collect()
}

/// Second differences of g(mu) = Tr(M(mu)^-1) on a real grid; g is concave
/// for mu >= 1/2, so the values should be nonpositive up to solver noise.
/// A diagnostic, not a gate.
pub fn concavity_diagnostic(
    k: &DenseOperator,
    mus: &[f64],
    step: f64,
) -> Result<Vec<(f64, f64)>, AnalysisError> {
    let g = |mu: f64| -> Result<f64, AnalysisError> {
        let t = pol_direct(k, Complex64::new(mu, 0.0))?;
        let m = t.m.map(|z| z.re);
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        if det.abs() <= 1e-14 * m.norm() * m.norm() {
            return Err(AnalysisError::SingularTensor { det });
        }
        Ok((m[(0, 0)] + m[(1, 1)]) / det)
    };
    mus.iter()
        .map(|&mu| {
            if mu < 0.5 + step {
                return Err(AnalysisError::ContrastInBand(mu));
            }
            let second = (g(mu - step)? - 2.0 * g(mu)? + g(mu + step)?) / (step * step);
            Ok((mu, second))
        })
        .collect()
}
