//! Shared fixtures for the integration suites: the built-in domains with
//! their standard resolutions, assembled once and shared across tests.
#![allow(dead_code)] // each test binary uses its own subset

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::Matrix2;
use num_complex::Complex64;
use poltensor::geometry::{discretize, BoundaryCurve, DiscreteBoundary, Point};
use poltensor::layerops::{assemble_k, DenseOperator};
use poltensor::spectral::{spectral_pipeline, SpectralPipeline};

pub struct Domain {
    pub name: &'static str,
    pub n: usize,
    pub curve: BoundaryCurve,
    /// Discretization of the original (unnormalized) curve.
    pub db: Arc<DiscreteBoundary>,
    /// Double layer operator on the original curve, for direct/dual solves.
    pub k: DenseOperator,
    /// Normalized pipeline with measures and eigendecomposition.
    pub pipeline: SpectralPipeline,
    pub area: f64,
}

pub fn builtin(name: &'static str) -> Arc<Domain> {
    static CACHE: OnceLock<Mutex<HashMap<&'static str, Arc<Domain>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    if let Some(d) = guard.get(name) {
        return d.clone();
    }
    let (curve, n) = match name {
        "disk" => (BoundaryCurve::circle(1.0), 128),
        "ellipse21" => (BoundaryCurve::ellipse(2.0, 1.0, 0.0, Point::zeros()), 256),
        "kite" => (BoundaryCurve::kite(), 256),
        "star3" => (BoundaryCurve::star(1.0, 0.3, 3), 256),
        other => panic!("unknown builtin domain {other}"),
    };
    let db = Arc::new(discretize(&curve, n).unwrap());
    let k = assemble_k(&db);
    let pipeline = spectral_pipeline(&curve, n).unwrap();
    let area = poltensor::geometry::area(&db);
    let domain = Arc::new(Domain { name, n, curve, db, k, pipeline, area });
    guard.insert(name, domain.clone());
    domain
}

pub const BUILTINS: [&str; 4] = ["disk", "ellipse21", "kite", "star3"];

pub fn matrix_norm(m: &Matrix2<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn rel_diff(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> f64 {
    let scale = matrix_norm(a).max(matrix_norm(b)).max(1e-300);
    (a - b).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / scale
}

/// Runs one acceptance criterion, printing a PASS/FAIL line.
pub fn criterion<F: FnOnce() + std::panic::UnwindSafe>(number: usize, label: &str, body: F) {
    match std::panic::catch_unwind(body) {
        Ok(()) => println!("acceptance criterion {number:02}: PASS - {label}"),
        Err(payload) => {
            println!("acceptance criterion {number:02}: FAIL - {label}");
            std::panic::resume_unwind(payload);
        }
    }
}
