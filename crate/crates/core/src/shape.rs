//! Ellipse geometry from two-pole certificates, and per-contrast equivalent
//! ellipses.
//!
//! A certificate (lambda, r+^2, r-^2) determines an ellipse with half axes
//!   a = sqrt((r+^2 + r-^2)/pi) sqrt((1-2 lambda)/(1+2 lambda))
//!   b = sqrt((r+^2 + r-^2)/pi) sqrt((1+2 lambda)/(1-2 lambda))
//! at angles phi = arctan(r-/r+) and phi + pi/2 to the horizontal axis. The
//! reported parameters are canonicalized so that `a` is the major axis and
//! `phi` lies in [0, pi).

use nalgebra::Matrix2;
use thiserror::Error;

use crate::rational::{symmetric_eigen_2x2, TwoPoleCertificate};

#[derive(Debug, Error)]
pub enum ShapeError {
    #[error("certificate carries no mass (r+^2 + r-^2 = {0:.3e})")]
    DegenerateCertificate(f64),
    #[error("no equivalent ellipse: {reason}")]
    NoEquivalentEllipse { reason: String },
    #[error("tensor is numerically singular (det {det:.3e})")]
    SingularTensor { det: f64 },
    #[error("tensor is not symmetric (defect {defect:.3e})")]
    NotSymmetric { defect: f64 },
    #[error("contrast {0} lies inside (-1/2, 1/2); equivalent ellipses need |mu| >= 1/2")]
    ContrastInBand(f64),
}

/// Ellipse with half axis `a` along angle `phi` and `b` along `phi + pi/2`,
/// centered at the origin (tensors are blind to translations).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseParams {
    pub a: f64,
    pub b: f64,
    /// Angle of the `a` axis, in [0, pi).
    pub phi: f64,
    /// False for disks, where the angle is meaningless and reported as 0.
    pub angle_defined: bool,
}

const DISK_ECCENTRICITY_TOL: f64 = 1e-9;

impl EllipseParams {
    /// Normalize so that a >= b and phi is the major-axis angle in [0, pi);
    /// disks report phi = 0.
    pub fn canonical(&self) -> EllipseParams {
        let (mut a, mut b, mut phi) = (self.a, self.b, self.phi);
        if b > a {
            std::mem::swap(&mut a, &mut b);
            phi += std::f64::consts::FRAC_PI_2;
        }
        phi = phi.rem_euclid(std::f64::consts::PI);
        if (a - b).abs() <= DISK_ECCENTRICITY_TOL * a {
            return EllipseParams { a, b, phi: 0.0, angle_defined: false };
        }
        EllipseParams { a, b, phi, angle_defined: self.angle_defined }
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.a * self.b
    }

    /// Parameter distance to another ellipse, respecting the reporting
    /// symmetries (phi modulo pi, angle ignored for disks).
    pub fn distance(&self, other: &EllipseParams) -> f64 {
        let s = self.canonical();
        let o = other.canonical();
        let axis = (s.a - o.a).abs().max((s.b - o.b).abs());
        if !s.angle_defined || !o.angle_defined {
            return axis;
        }
        let raw = (s.phi - o.phi).rem_euclid(std::f64::consts::PI);
        let angle = raw.min(std::f64::consts::PI - raw);
        axis.max(angle)
    }
}

/// Recover the ellipse named by a certificate, composing its frame with an
/// extra rotation of the data frame.
pub fn recover_ellipse(
    cert: &TwoPoleCertificate,
    frame_angle: f64,
) -> Result<EllipseParams, ShapeError> {
    let mass = cert.r_plus_sq + cert.r_minus_sq;
    if !mass.is_finite() || mass <= 0.0 {
        return Err(ShapeError::DegenerateCertificate(mass));
    }
    let scale = (mass / std::f64::consts::PI).sqrt();
    if cert.lambda.abs() < DISK_ECCENTRICITY_TOL {
        return Ok(EllipseParams { a: scale, b: scale, phi: 0.0, angle_defined: false });
    }
    let ratio = ((1.0 - 2.0 * cert.lambda) / (1.0 + 2.0 * cert.lambda)).sqrt();
    let phi_canonical = cert.r_minus_sq.max(0.0).sqrt().atan2(cert.r_plus_sq.max(0.0).sqrt());
    let params = EllipseParams {
        a: scale * ratio,
        b: scale / ratio,
        phi: cert.frame + frame_angle + phi_canonical,
        angle_defined: true,
    };
    Ok(params.canonical())
}

/// The unique axis-aligned-in-eigenframe two-pole model matching a real
/// symmetric tensor at one contrast, as an ellipse. Errors when no ellipse
/// can produce this tensor at this contrast.
pub fn equivalent_ellipse(m: &Matrix2<f64>, mu: f64) -> Result<EllipseParams, ShapeError> {
    if mu.abs() < 0.5 {
        return Err(ShapeError::ContrastInBand(mu));
    }
    let norm = m.norm();
    let defect = (m[(0, 1)] - m[(1, 0)]).abs();
    if defect > 1e-10 * norm.max(1.0) {
        return Err(ShapeError::NotSymmetric { defect });
    }
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    if det.abs() <= 1e-14 * norm * norm {
        return Err(ShapeError::SingularTensor { det });
    }
    let (m1, m2, theta) = symmetric_eigen_2x2(m);
    if m1 + m2 == 0.0 {
        return Err(ShapeError::NoEquivalentEllipse {
            reason: "tensor trace vanishes".to_string(),
        });
    }
    // pi a b and the pole of the m1-direction entry.
    let pi_ab = 2.0 * mu * m1 * m2 / (m1 + m2);
    let ab = pi_ab / std::f64::consts::PI;
    if !ab.is_finite() || ab <= 0.0 {
        return Err(ShapeError::NoEquivalentEllipse {
            reason: format!("derived axis product {ab:.3e} is not positive"),
        });
    }
    let lambda = 0.5 * pi_ab * (1.0 / m2 - 1.0 / m1);
    if !lambda.is_finite() || lambda.abs() >= 0.5 {
        return Err(ShapeError::NoEquivalentEllipse {
            reason: format!("derived pole {lambda:.6} falls outside (-1/2, 1/2)"),
        });
    }
    let ratio = ((1.0 - 2.0 * lambda) / (1.0 + 2.0 * lambda)).sqrt();
    let a_along_m1 = (ab).sqrt() * ratio;
    let b_other = (ab).sqrt() / ratio;
    let params = EllipseParams {
        a: a_along_m1,
        b: b_other,
        phi: theta,
        angle_defined: (a_along_m1 - b_other).abs() > DISK_ECCENTRICITY_TOL * a_along_m1.max(b_other),
    };
    Ok(params.canonical())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn cert(lambda: f64, r_plus_sq: f64, r_minus_sq: f64) -> TwoPoleCertificate {
        TwoPoleCertificate {
            lambda,
            r_plus_sq,
            r_minus_sq,
            frame: 0.0,
            constraint_defect: 0.0,
            angle_degenerate: false,
        }
    }

    #[test]
    fn tall_ellipse_from_concentrated_certificate() {
        // All mass at the +lambda pole of M11: the x axis is the minor one.
        let e = recover_ellipse(&cert(1.0 / 6.0, 2.0 * PI, 0.0), 0.0).unwrap();
        assert_relative_eq!(e.a, 2.0, epsilon = 1e-12);
        assert_relative_eq!(e.b, 1.0, epsilon = 1e-12);
        assert_relative_eq!(e.phi, FRAC_PI_2, epsilon = 1e-12);
        // Forward tensor of the recovered ellipse reproduces the certificate
        // data: M11 = 2 pi / (mu - 1/6).
        let mu = num_complex::Complex64::new(1.0, 0.0);
        let m = crate::oracle::ellipse_tensor(1.0, 2.0, 0.0, mu);
        assert_relative_eq!(m[(0, 0)].re, 2.0 * PI / (1.0 - 1.0 / 6.0), epsilon = 1e-10);
    }

    #[test]
    fn disk_certificate() {
        let e = recover_ellipse(&cert(0.0, PI, 0.0), 0.0).unwrap();
        assert_relative_eq!(e.a, 1.0, epsilon = 1e-12);
        assert_relative_eq!(e.b, 1.0, epsilon = 1e-12);
        assert!(!e.angle_defined);
    }

    #[test]
    fn balanced_certificate_puts_major_axis_at_three_quarters_pi() {
        let e = recover_ellipse(&cert(1.0 / 6.0, PI, PI), 0.0).unwrap();
        assert_relative_eq!(e.a, 2.0, epsilon = 1e-12);
        assert_relative_eq!(e.b, 1.0, epsilon = 1e-12);
        assert_relative_eq!(e.phi, 3.0 * FRAC_PI_4, epsilon = 1e-12);
        // Cross-check: the oracle tensor of that ellipse has the +pole
        // residue structure [[pi, pi], [pi, pi]] in M's entries.
        let mu = num_complex::Complex64::new(1.0, 0.0);
        let m = crate::oracle::ellipse_tensor(2.0, 1.0, 3.0 * FRAC_PI_4, mu);
        let m12_residue_sign = m[(0, 1)].re;
        assert!(m12_residue_sign > 0.0);
    }

    #[test]
    fn degenerate_certificate_rejected() {
        assert!(matches!(
            recover_ellipse(&cert(0.1, 0.0, 0.0), 0.0),
            Err(ShapeError::DegenerateCertificate(_))
        ));
    }

    #[test]
    fn equivalent_ellipse_of_true_ellipse_tensor() {
        let m = Matrix2::new(12.0 * PI / 7.0, 0.0, 0.0, 12.0 * PI / 5.0);
        let e = equivalent_ellipse(&m, 1.0).unwrap();
        assert_relative_eq!(e.a, 2.0, epsilon = 1e-10);
        assert_relative_eq!(e.b, 1.0, epsilon = 1e-10);
        assert_relative_eq!(e.phi, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn equivalent_ellipse_of_isotropic_tensor_is_disk() {
        let m = Matrix2::new(PI, 0.0, 0.0, PI);
        let e = equivalent_ellipse(&m, 1.0).unwrap();
        assert_relative_eq!(e.a, 1.0, epsilon = 1e-12);
        assert_relative_eq!(e.b, 1.0, epsilon = 1e-12);
        assert!(!e.angle_defined);
    }

    #[test]
    fn equivalent_ellipse_respects_rotation() {
        let mu = num_complex::Complex64::new(2.0, 0.0);
        let m = crate::oracle::ellipse_tensor(2.0, 1.0, 0.7, mu).map(|z| z.re);
        let e = equivalent_ellipse(&m, 2.0).unwrap();
        assert_relative_eq!(e.a, 2.0, epsilon = 1e-9);
        assert_relative_eq!(e.b, 1.0, epsilon = 1e-9);
        assert_relative_eq!(e.phi, 0.7, epsilon = 1e-9);
    }

    #[test]
    fn contrast_in_band_rejected() {
        let m = Matrix2::new(PI, 0.0, 0.0, PI);
        assert!(matches!(equivalent_ellipse(&m, 0.3), Err(ShapeError::ContrastInBand(_))));
    }

    #[test]
    fn incompatible_tensor_rejected() {
        // Eigenvalues of opposite sign admit no positive axis product.
        let m = Matrix2::new(3.0, 0.0, 0.0, -1.0);
        assert!(matches!(
            equivalent_ellipse(&m, 1.0),
            Err(ShapeError::NoEquivalentEllipse { .. })
        ));
    }

    #[test]
    fn canonical_form_and_distance() {
        let e = EllipseParams { a: 1.0, b: 2.0, phi: 0.2, angle_defined: true };
        let c = e.canonical();
        assert_eq!(c.a, 2.0);
        assert_eq!(c.b, 1.0);
        assert_relative_eq!(c.phi, 0.2 + FRAC_PI_2, epsilon = 1e-15);
        assert!(e.distance(&c) < 1e-15);
        // Angle distance respects the mod-pi symmetry.
        let f = EllipseParams { a: 2.0, b: 1.0, phi: 0.2 + FRAC_PI_2 + PI - 1e-9, angle_defined: true };
        assert!(c.distance(&f) < 1e-8);
    }
}
