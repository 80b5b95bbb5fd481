//! Independent reference values for the test suites: analytic circle operator
//! spectra, the closed-form ellipse tensor, classical Fredholm eigenvalues of
//! the ellipse, and high-resolution self-convergence fixtures for domains
//! with no analytic answer.
//!
//! The closed forms here never call into the operator assembly; they are the
//! other side of the dual-route checks.

use std::fmt::Write as _;

use nalgebra::Matrix2;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("refinement did not converge: last delta {delta:.3e} exceeds {allowed:.3e}")]
    NoConvergence { delta: f64, allowed: f64 },
    #[error("refinement needs at least two resolutions")]
    TooFewResolutions,
    #[error("computation failed at n = {n}: {message}")]
    StepFailed { n: usize, message: String },
    #[error("malformed fixture: {0}")]
    BadFixture(String),
}

/// Eigenvalue of the single layer operator on a circle of the given radius:
/// -r log r for the constant mode, r / (2 m) for Fourier mode m >= 1.
pub fn circle_single_layer_eigenvalue(radius: f64, mode: usize) -> f64 {
    if mode == 0 {
        -radius * radius.ln()
    } else {
        radius / (2.0 * mode as f64)
    }
}

/// Expected spectra of the discretized S and K on a circle with n nodes,
/// sorted ascending. S: constant mode plus double Fourier modes up to the
/// simple Nyquist mode; K: {-1/2, 0, ..., 0}.
pub fn circle_spectra(radius: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut s = vec![circle_single_layer_eigenvalue(radius, 0)];
    for m in 1..n / 2 {
        let val = circle_single_layer_eigenvalue(radius, m);
        s.push(val);
        s.push(val);
    }
    s.push(circle_single_layer_eigenvalue(radius, n / 2));
    s.sort_by(f64::total_cmp);
    let mut k = vec![0.0; n];
    k[0] = -0.5;
    k.sort_by(f64::total_cmp);
    (s, k)
}

/// Fredholm eigenvalues of the ellipse with half axes a, b: the leading
/// `count` pairs +/- q^m / 2 with q = |a - b| / (a + b), largest first.
pub fn ellipse_fredholm_eigenvalues(a: f64, b: f64, count: usize) -> Vec<f64> {
    let q = ((a - b) / (a + b)).abs();
    (1..=count).map(|m| 0.5 * q.powi(m as i32)).collect()
}

/// Closed-form polarization tensor of an ellipse with half axes a (at angle
/// phi) and b. In the axis frame the diagonal entries are
/// pi a b / (mu - lambda) with poles lambda = -(a-b)/(2(a+b)) for the a-axis
/// and the negative of that for the b-axis.
pub fn ellipse_tensor(a: f64, b: f64, phi: f64, mu: Complex64) -> Matrix2<Complex64> {
    let pole_a = (b - a) / (2.0 * (a + b));
    let mass = std::f64::consts::PI * a * b;
    let m_a = mass / (mu - Complex64::new(pole_a, 0.0));
    let m_b = mass / (mu - Complex64::new(-pole_a, 0.0));
    let (s, c) = phi.sin_cos();
    let (cc, ss, cs) = (c * c, s * s, c * s);
    Matrix2::new(
        m_a * cc + m_b * ss,
        (m_a - m_b) * cs,
        (m_a - m_b) * cs,
        m_a * ss + m_b * cc,
    )
}

/// The same tensor through the classical conductivity-contrast formula
/// (k - 1) |E| (a + b) / (k a + b) per axis, with mu = (k + 1) / (2 (k - 1)).
/// An algebraically independent cross-check of [`ellipse_tensor`].
pub fn ellipse_tensor_conductivity(a: f64, b: f64, phi: f64, conductivity: f64) -> Matrix2<f64> {
    let k = conductivity;
    let area = std::f64::consts::PI * a * b;
    let m_a = (k - 1.0) * area * (a + b) / (k * a + b);
    let m_b = (k - 1.0) * area * (a + b) / (k * b + a);
    let (s, c) = phi.sin_cos();
    Matrix2::new(
        m_a * c * c + m_b * s * s,
        (m_a - m_b) * c * s,
        (m_a - m_b) * c * s,
        m_a * s * s + m_b * c * c,
    )
}

/// Exact disk tensor (pi r^2 / mu) I.
pub fn disk_tensor(radius: f64, mu: Complex64) -> Matrix2<Complex64> {
    let v = std::f64::consts::PI * radius * radius / mu;
    Matrix2::new(v, Complex64::default(), Complex64::default(), v)
}

/// A frozen reference value with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub name: String,
    pub inputs: String,
    pub value: f64,
    pub tolerance: f64,
    pub provenance: String,
}

impl Fixture {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "fixture v1");
        let _ = writeln!(out, "name = {}", self.name);
        let _ = writeln!(out, "inputs = {}", self.inputs);
        let _ = writeln!(out, "value = {:.17e}", self.value);
        let _ = writeln!(out, "tolerance = {:.3e}", self.tolerance);
        let _ = writeln!(out, "provenance = {}", self.provenance);
        out
    }

    pub fn from_text(text: &str) -> Result<Fixture, OracleError> {
        let mut lines = text.lines();
        match lines.next().map(str::trim) {
            Some("fixture v1") => {}
            other => return Err(OracleError::BadFixture(format!("bad header {other:?}"))),
        }
        let mut name = None;
        let mut inputs = None;
        let mut value = None;
        let mut tolerance = None;
        let mut provenance = None;
        for line in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, val)) = line.split_once('=') else {
                return Err(OracleError::BadFixture(format!("bad line {line:?}")));
            };
            let val = val.trim();
            match key.trim() {
                "name" => name = Some(val.to_string()),
                "inputs" => inputs = Some(val.to_string()),
                "value" => {
                    value = Some(val.parse().map_err(|_| {
                        OracleError::BadFixture(format!("bad value {val:?}"))
                    })?)
                }
                "tolerance" => {
                    tolerance = Some(val.parse().map_err(|_| {
                        OracleError::BadFixture(format!("bad tolerance {val:?}"))
                    })?)
                }
                "provenance" => provenance = Some(val.to_string()),
                other => return Err(OracleError::BadFixture(format!("unknown key {other:?}"))),
            }
        }
        Ok(Fixture {
            name: name.ok_or_else(|| OracleError::BadFixture("missing name".into()))?,
            inputs: inputs.unwrap_or_default(),
            value: value.ok_or_else(|| OracleError::BadFixture("missing value".into()))?,
            tolerance: tolerance.ok_or_else(|| OracleError::BadFixture("missing tolerance".into()))?,
            provenance: provenance.unwrap_or_default(),
        })
    }
}

/// Outcome of a self-convergence run.
#[derive(Debug, Clone)]
pub struct RefineResult {
    pub value: f64,
    pub error_bar: f64,
    /// (n, value) history, in the order evaluated.
    pub history: Vec<(usize, f64)>,
}

/// Evaluate a quantity at increasing resolutions and accept the finest value
/// if the last two agree within ten times the target tolerance.
pub fn refine(
    mut quantity: impl FnMut(usize) -> Result<f64, String>,
    resolutions: &[usize],
    target_tol: f64,
) -> Result<RefineResult, OracleError> {
    if resolutions.len() < 2 {
        return Err(OracleError::TooFewResolutions);
    }
    let mut history = Vec::with_capacity(resolutions.len());
    for &n in resolutions {
        let v = quantity(n).map_err(|message| OracleError::StepFailed { n, message })?;
        history.push((n, v));
    }
    let last = history[history.len() - 1].1;
    let prev = history[history.len() - 2].1;
    let delta = (last - prev).abs();
    let allowed = 10.0 * target_tol;
    if delta > allowed {
        return Err(OracleError::NoConvergence { delta, allowed });
    }
    Ok(RefineResult { value: last, error_bar: delta.max(f64::EPSILON * last.abs()), history })
}

/// Quantities supported by [`oracle_refine`].
#[derive(Debug, Clone, Copy)]
pub enum RefineQuantity {
    Area,
    /// The k-th largest positive eigenvalue of the double layer operator
    /// (k = 0 is the largest).
    PositiveEigenvalue(usize),
    /// Real part of a tensor entry at the given contrast, via the direct solve.
    TensorEntry { mu: Complex64, row: usize, col: usize },
}

/// Self-convergence references computed through the main pipeline at a
/// sequence of resolutions.
pub fn oracle_refine(
    curve: &crate::geometry::BoundaryCurve,
    quantity: RefineQuantity,
    resolutions: &[usize],
    target_tol: f64,
) -> Result<RefineResult, OracleError> {
    refine(
        |n| -> Result<f64, String> {
            let db = std::sync::Arc::new(
                crate::geometry::discretize(curve, n).map_err(|e| e.to_string())?,
            );
            match quantity {
                RefineQuantity::Area => Ok(crate::geometry::area(&db)),
                RefineQuantity::PositiveEigenvalue(k) => {
                    let op = crate::layerops::assemble_k(&db);
                    let mut pos: Vec<f64> =
                        op.spectrum().iter().copied().filter(|l| *l > 0.0).collect();
                    pos.sort_by(|a, b| b.total_cmp(a));
                    pos.get(k).copied().ok_or_else(|| format!("fewer than {} positive eigenvalues", k + 1))
                }
                RefineQuantity::TensorEntry { mu, row, col } => {
                    let op = crate::layerops::assemble_k(&db);
                    let t = crate::tensor::pol_direct(&op, mu).map_err(|e| e.to_string())?;
                    Ok(t.m[(row, col)].re)
                }
            }
        },
        resolutions,
        target_tol,
    )
}
