//! Eigendecomposition of the symmetrized operator and the discrete spectral
//! measures behind the rational structure of the polarization tensor.
//!
//! With phi solving (K - 1/2 I) phi = x_1 on the boundary, u = S^(-1/2) phi
//! and v = S^(1/2) d_s phi, each eigenvector psi of A at eigenvalue lambda
//! contributes masses
//!
//!   alpha += (1/4 - lambda^2)(1/2 - lambda) <psi, u>^2
//!   beta  += (1/2 + lambda)                 <psi, v>^2
//!   gamma += (lambda^2 - 1/4)               <psi, v> <psi, u>
//!
//! and M11, M22, M12 are the Cauchy transforms of alpha, beta, gamma. The
//! masses are computed on the normalized (unit-disk) domain and mapped back
//! through the recorded transform by the 1/scale^2 law. Numerically
//! degenerate eigenvalues are merged into clusters before the +/- pairing,
//! since per-eigenvector quantities are not well-defined under degeneracy
//! while cluster aggregates are.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::geometry::{self, DiscreteBoundary, NormalizationTransform};
use crate::layerops::{arclength_derivative, to_weighted, DenseOperator, OperatorError, OperatorKind};

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("eigenvalue decomposition failed to converge")]
    EigFailure,
    #[error("boundary system solve failed (matrix numerically singular)")]
    SolveFailure,
    #[error("density solve residual {residual:.3e} exceeds 1e-10 relative")]
    ResidualTooLarge { residual: f64 },
    #[error("trivial eigenvalue cluster at {lambda:.6} carries mass {mass:.3e} above tolerance")]
    TrivialMassNonzero { lambda: f64, mass: f64 },
    #[error("no eigenvalue near -1/2 found (closest: {closest:.6})")]
    MissingTrivialEigenvalue { closest: f64 },
    #[error("operator has kind {0:?}, which is not valid here")]
    WrongKind(OperatorKind),
    #[error("operators were built on different discretizations")]
    DifferentBoundaries,
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Geometry(#[from] geometry::GeometryError),
    #[error("malformed spectral record: {0}")]
    BadRecord(String),
}

/// Full eigendecomposition of a symmetric operator, sorted ascending.
/// Eigenvectors are the columns; orthonormal in the weighted inner product
/// (plain dot products in the stored frame).
#[derive(Debug, Clone)]
pub struct SymmetricSpectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
}

/// Eigendecomposition of A (or any symmetric-kind operator).
pub fn eig_a(a: &DenseOperator) -> Result<SymmetricSpectrum, SpectralError> {
    if matches!(a.kind, OperatorKind::DoubleLayer | OperatorKind::DoubleLayerAdjoint) {
        return Err(SpectralError::WrongKind(a.kind));
    }
    let eig = nalgebra::SymmetricEigen::try_new(a.matrix.clone(), f64::EPSILON, 0)
        .ok_or(SpectralError::EigFailure)?;
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        eigenvectors.set_column(col, &eig.eigenvectors.column(i));
    }
    Ok(SymmetricSpectrum { eigenvalues, eigenvectors })
}

/// Solve the second kind equation (K - 1/2 I) phi = x_1 for the double layer
/// density of the first coordinate. Input and output are in the weighted
/// frame of `k`.
pub fn dirichlet_density(k: &DenseOperator) -> Result<DVector<f64>, SpectralError> {
    if k.kind != OperatorKind::DoubleLayer {
        return Err(SpectralError::WrongKind(k.kind));
    }
    let n = k.n();
    let db = &k.db;
    let x1 = to_weighted(db, &DVector::from_iterator(n, db.points.iter().map(|p| p.x)));
    let mut system = k.matrix.clone();
    for i in 0..n {
        system[(i, i)] -= 0.5;
    }
    let phi = system.lu().solve(&x1).ok_or(SpectralError::SolveFailure)?;
    let residual = {
        let mut shifted = k.matrix.clone();
        for i in 0..n {
            shifted[(i, i)] -= 0.5;
        }
        (&shifted * &phi - &x1).norm() / x1.norm()
    };
    if residual > 1e-10 {
        return Err(SpectralError::ResidualTooLarge { residual });
    }
    Ok(phi)
}

/// One eigenvalue cluster with its measure masses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterEntry {
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Discrete spectral measures of a domain: one entry per eigenvalue cluster,
/// already mapped back to the original (unnormalized) domain.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub entries: Vec<ClusterEntry>,
    /// Area of the original domain.
    pub area: f64,
    /// Tolerance used to merge numerically degenerate eigenvalues.
    pub cluster_tol: f64,
}

/// A +/- pair of clusters (lambda >= 0; the zero cluster pairs with itself).
#[derive(Debug, Clone, Copy)]
pub struct PairedCluster {
    pub lambda: f64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub beta_plus: f64,
    pub beta_minus: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub is_zero: bool,
}

/// Pole/residue data of the smooth-case representation, one row per
/// nonnegative eigenvalue cluster.
#[derive(Debug, Clone, Copy)]
pub struct SmoothCoefficient {
    pub lambda: f64,
    pub r_plus_sq: f64,
    pub r_minus_sq: f64,
    /// Coupling cosine; zero and flagged undefined when the residue product
    /// is below threshold, and fixed to zero by convention at lambda = 0.
    pub c: f64,
    pub c_defined: bool,
}

impl SpectralData {
    pub fn total_alpha(&self) -> f64 {
        self.entries.iter().map(|e| e.alpha).sum()
    }

    /// Group entries into +/- pairs. A cluster with |lambda| <= pair
    /// tolerance is treated as the self-paired zero cluster; an unmatched
    /// cluster pairs with zero masses.
    pub fn paired_entries(&self) -> Vec<PairedCluster> {
        let tol = self.pairing_tol();
        let mut pairs = Vec::new();
        for e in &self.entries {
            if e.lambda < -tol {
                continue;
            }
            if e.lambda.abs() <= tol {
                pairs.push(PairedCluster {
                    lambda: e.lambda.abs(),
                    alpha_plus: e.alpha,
                    alpha_minus: e.alpha,
                    beta_plus: e.beta,
                    beta_minus: e.beta,
                    gamma_plus: e.gamma,
                    gamma_minus: e.gamma,
                    is_zero: true,
                });
                continue;
            }
            let partner = self
                .entries
                .iter()
                .filter(|p| (p.lambda + e.lambda).abs() <= tol.max(1e-6 * e.lambda.abs()))
                .min_by(|p, q| (p.lambda + e.lambda).abs().total_cmp(&(q.lambda + e.lambda).abs()));
            let (am, bm, gm) = match partner {
                Some(p) => (p.alpha, p.beta, p.gamma),
                None => (0.0, 0.0, 0.0),
            };
            pairs.push(PairedCluster {
                lambda: e.lambda,
                alpha_plus: e.alpha,
                alpha_minus: am,
                beta_plus: e.beta,
                beta_minus: bm,
                gamma_plus: e.gamma,
                gamma_minus: gm,
                is_zero: false,
            });
        }
        pairs
    }

    fn pairing_tol(&self) -> f64 {
        self.cluster_tol.max(1e-9)
    }

    /// Serialize to the versioned record format (one line per cluster).
    pub fn to_record(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "specmeasures v1");
        let _ = writeln!(out, "area = {:.17e}", self.area);
        let _ = writeln!(out, "cluster_tol = {:.17e}", self.cluster_tol);
        let _ = writeln!(out, "# lambda alpha beta gamma");
        for e in &self.entries {
            let _ = writeln!(out, "{:.17e} {:.17e} {:.17e} {:.17e}", e.lambda, e.alpha, e.beta, e.gamma);
        }
        out
    }

    pub fn from_record(text: &str) -> Result<SpectralData, SpectralError> {
        let mut lines = text.lines();
        match lines.next() {
            Some("specmeasures v1") => {}
            other => {
                return Err(SpectralError::BadRecord(format!(
                    "expected header `specmeasures v1`, got {other:?}"
                )))
            }
        }
        let mut area = None;
        let mut cluster_tol = None;
        let mut entries = Vec::new();
        for line in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(v) = line.strip_prefix("area =") {
                area = Some(v.trim().parse().map_err(|_| {
                    SpectralError::BadRecord(format!("bad area value {v:?}"))
                })?);
                continue;
            }
            if let Some(v) = line.strip_prefix("cluster_tol =") {
                cluster_tol = Some(v.trim().parse().map_err(|_| {
                    SpectralError::BadRecord(format!("bad cluster_tol value {v:?}"))
                })?);
                continue;
            }
            let vals: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse).collect();
            match vals {
                Ok(v) if v.len() == 4 => {
                    entries.push(ClusterEntry { lambda: v[0], alpha: v[1], beta: v[2], gamma: v[3] })
                }
                _ => return Err(SpectralError::BadRecord(format!("bad cluster line {line:?}"))),
            }
        }
        Ok(SpectralData {
            entries,
            area: area.ok_or_else(|| SpectralError::BadRecord("missing area".into()))?,
            cluster_tol: cluster_tol
                .ok_or_else(|| SpectralError::BadRecord("missing cluster_tol".into()))?,
        })
    }
}

/// Relative mass allowed in the trivial -1/2 cluster.
const TRIVIAL_MASS_TOL: f64 = 1e-10;
/// Clusters lighter than this (relative to area) are dropped as noise.
const MASS_FLOOR: f64 = 1e-12;

/// Build the spectral measures from the assembled operators on a normalized
/// discretization, mapping masses back to the original domain through
/// `transform`.
pub fn build_spectral_data(
    a: &DenseOperator,
    s_half: &DenseOperator,
    s_inv_half: &DenseOperator,
    phi: &DVector<f64>,
    transform: &NormalizationTransform,
) -> Result<SpectralData, SpectralError> {
    let eig = eig_a(a)?;
    build_spectral_data_from_eig(&eig, a, s_half, s_inv_half, phi, transform)
}

pub fn build_spectral_data_from_eig(
    eig: &SymmetricSpectrum,
    a: &DenseOperator,
    s_half: &DenseOperator,
    s_inv_half: &DenseOperator,
    phi: &DVector<f64>,
    transform: &NormalizationTransform,
) -> Result<SpectralData, SpectralError> {
    if !Arc::ptr_eq(&a.db, &s_half.db) || !Arc::ptr_eq(&a.db, &s_inv_half.db) {
        return Err(SpectralError::DifferentBoundaries);
    }
    let db = &a.db;
    let scaled_area = geometry::area(db);

    let u = &s_inv_half.matrix * phi;
    let v = &s_half.matrix * (arclength_derivative(db) * phi);
    let cu = eig.eigenvectors.transpose() * &u;
    let cv = eig.eigenvectors.transpose() * &v;

    let spectral_radius = eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, &l| acc.max(l.abs()));
    let cluster_tol = (1e-6 * spectral_radius).max(1e-8);

    // Merge adjacent eigenvalues into clusters.
    let mut clusters: Vec<(f64, f64, f64, f64, f64)> = Vec::new(); // (lambda_sum, count, alpha, beta, gamma)
    let mut start = 0;
    while start < eig.eigenvalues.len() {
        let mut end = start + 1;
        while end < eig.eigenvalues.len()
            && eig.eigenvalues[end] - eig.eigenvalues[end - 1] <= cluster_tol
        {
            end += 1;
        }
        let mut lambda_sum = 0.0;
        let mut alpha = 0.0;
        let mut beta = 0.0;
        let mut gamma = 0.0;
        for i in start..end {
            let l = eig.eigenvalues[i];
            lambda_sum += l;
            alpha += (0.25 - l * l) * (0.5 - l) * cu[i] * cu[i];
            beta += (0.5 + l) * cv[i] * cv[i];
            gamma += (l * l - 0.25) * cv[i] * cu[i];
        }
        clusters.push((lambda_sum, (end - start) as f64, alpha, beta, gamma));
        start = end;
    }

    // Locate and validate the trivial cluster at -1/2.
    let mut trivial_idx = None;
    let mut closest = f64::INFINITY;
    for (i, c) in clusters.iter().enumerate() {
        let lambda = c.0 / c.1;
        let dist = (lambda + 0.5).abs();
        if dist < closest {
            closest = dist;
        }
        if dist < 1e-4 {
            trivial_idx = Some(i);
        }
    }
    let trivial_idx = trivial_idx.ok_or(SpectralError::MissingTrivialEigenvalue {
        closest: -0.5 + closest,
    })?;
    {
        let c = &clusters[trivial_idx];
        let mass = c.2.abs().max(c.3.abs()).max(c.4.abs());
        if mass > TRIVIAL_MASS_TOL * scaled_area {
            return Err(SpectralError::TrivialMassNonzero { lambda: c.0 / c.1, mass });
        }
    }

    let inv_scale_sq = 1.0 / (transform.scale * transform.scale);
    let entries: Vec<ClusterEntry> = clusters
        .iter()
        .enumerate()
        .filter(|(i, c)| *i != trivial_idx && c.2 + c.3 > MASS_FLOOR * scaled_area)
        .map(|(_, c)| ClusterEntry {
            lambda: c.0 / c.1,
            alpha: c.2 * inv_scale_sq,
            beta: c.3 * inv_scale_sq,
            gamma: c.4 * inv_scale_sq,
        })
        .collect();

    Ok(SpectralData { entries, area: scaled_area * inv_scale_sq, cluster_tol })
}

/// Threshold below which the residue product leaves c undefined.
const C_PRODUCT_FLOOR: f64 = 1e-12;

/// Pole/residue coefficients of the smooth-case sum, one per nonnegative
/// cluster. c is fixed to 0 (flagged) at the zero cluster by the odd-function
/// convention, and left undefined when the residue product underflows.
pub fn smooth_coefficients(sd: &SpectralData) -> Vec<SmoothCoefficient> {
    sd.paired_entries()
        .iter()
        .map(|p| {
            let r_plus_sq = p.alpha_plus;
            let r_minus_sq = p.alpha_minus;
            let product = (r_plus_sq * r_minus_sq).max(0.0).sqrt();
            let (c, c_defined) = if p.is_zero || product <= C_PRODUCT_FLOOR {
                (0.0, false)
            } else {
                (p.gamma_plus / product, true)
            };
            SmoothCoefficient { lambda: p.lambda, r_plus_sq, r_minus_sq, c, c_defined }
        })
        .collect()
}

/// Everything the spectral route needs for one domain, assembled in one pass:
/// normalization, operators, eigendecomposition, density, and measures.
pub struct SpectralPipeline {
    pub db: Arc<DiscreteBoundary>,
    pub transform: NormalizationTransform,
    pub k: DenseOperator,
    pub s: DenseOperator,
    pub s_half: DenseOperator,
    pub s_inv_half: DenseOperator,
    pub a: DenseOperator,
    pub eig: SymmetricSpectrum,
    pub data: SpectralData,
}

pub fn spectral_pipeline(
    curve: &crate::geometry::BoundaryCurve,
    n: usize,
) -> Result<SpectralPipeline, SpectralError> {
    let (normalized, transform) = geometry::normalize(curve)?;
    let db = Arc::new(geometry::discretize(&normalized, n)?);
    let k = crate::layerops::assemble_k(&db);
    let s = crate::layerops::assemble_s(&db)?;
    let (s_half, s_inv_half) = crate::layerops::sqrt_s(&s)?;
    let a = crate::layerops::assemble_a(&k, &s_half, &s_inv_half)?;
    let eig = eig_a(&a)?;
    let phi = dirichlet_density(&k)?;
    let data = build_spectral_data_from_eig(&eig, &a, &s_half, &s_inv_half, &phi, &transform)?;
    Ok(SpectralPipeline { db, transform, k, s, s_half, s_inv_half, a, eig, data })
}
