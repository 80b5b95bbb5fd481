//! Boundary curves, their Nystrom discretization, and the normalization
//! transform that places a domain inside the unit disk.
//!
//! All curves are counterclockwise, 2-pi-periodic and at least C^2; the
//! parametrizations below are analytic. Corner domains are rejected by the
//! regularity and simplicity checks in [`discretize`].

use std::f64::consts::TAU;

use nalgebra::Vector2;
use thiserror::Error;

pub type Point = Vector2<f64>;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("curve parametrization is not regular: |x'(t)| = {speed:.3e} at t = {t:.6}")]
    NonRegularCurve { t: f64, speed: f64 },
    #[error("curve appears to self-intersect: nodes {i} and {j} are {dist:.3e} apart (mesh width {mesh:.3e})")]
    SelfIntersection { i: usize, j: usize, dist: f64, mesh: f64 },
    #[error("node count {0} is below the minimum of 16")]
    TooFewNodes(usize),
    #[error("node count {0} must be even")]
    OddNodeCount(usize),
    #[error("curve orientation is clockwise (signed area {0:.3e} <= 0)")]
    ClockwiseOrientation(f64),
}

/// Shape of a boundary curve before any similarity transform is applied.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveShape {
    /// Axis-aligned ellipse with half axes `a` (horizontal) and `b` (vertical).
    Ellipse { a: f64, b: f64 },
    /// The standard kite contour (cos t + 0.65 cos 2t - 0.65, 1.5 sin t).
    Kite,
    /// Polar star r(t) = base_radius * (1 + amplitude cos(folds t)).
    Star { base_radius: f64, amplitude: f64, folds: u32 },
    /// Trigonometric curve. `x_cos[m]` multiplies cos(m t) (m starting at 0),
    /// `x_sin[m]` multiplies sin((m+1) t), and likewise for y.
    Fourier {
        x_cos: Vec<f64>,
        x_sin: Vec<f64>,
        y_cos: Vec<f64>,
        y_sin: Vec<f64>,
    },
}

/// A closed boundary curve: a base shape composed with rotation, scaling and
/// translation, parametrized counterclockwise over t in [0, 2 pi).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCurve {
    pub shape: CurveShape,
    /// Rotation angle applied to the base shape.
    pub rotation: f64,
    /// Uniform scale factor, > 0.
    pub scale: f64,
    /// Translation applied after rotation and scaling.
    pub center: Point,
}

impl BoundaryCurve {
    pub fn new(shape: CurveShape) -> Self {
        BoundaryCurve { shape, rotation: 0.0, scale: 1.0, center: Point::zeros() }
    }

    pub fn ellipse(a: f64, b: f64, phi: f64, center: Point) -> Self {
        BoundaryCurve { shape: CurveShape::Ellipse { a, b }, rotation: phi, scale: 1.0, center }
    }

    pub fn circle(radius: f64) -> Self {
        Self::ellipse(radius, radius, 0.0, Point::zeros())
    }

    pub fn kite() -> Self {
        Self::new(CurveShape::Kite)
    }

    pub fn star(base_radius: f64, amplitude: f64, folds: u32) -> Self {
        Self::new(CurveShape::Star { base_radius, amplitude, folds })
    }

    pub fn rotated(&self, angle: f64) -> Self {
        let rot = nalgebra::Rotation2::new(angle);
        BoundaryCurve {
            shape: self.shape.clone(),
            rotation: self.rotation + angle,
            scale: self.scale,
            center: rot * self.center,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        BoundaryCurve {
            shape: self.shape.clone(),
            rotation: self.rotation,
            scale: self.scale * factor,
            center: factor * self.center,
        }
    }

    pub fn translated(&self, shift: Point) -> Self {
        BoundaryCurve {
            shape: self.shape.clone(),
            rotation: self.rotation,
            scale: self.scale,
            center: self.center + shift,
        }
    }

    fn base_derivatives(&self, t: f64) -> (Point, Point, Point) {
        match &self.shape {
            CurveShape::Ellipse { a, b } => {
                let (s, c) = t.sin_cos();
                (
                    Point::new(a * c, b * s),
                    Point::new(-a * s, b * c),
                    Point::new(-a * c, -b * s),
                )
            }
            CurveShape::Kite => {
                let (s, c) = t.sin_cos();
                let (s2, c2) = (2.0 * t).sin_cos();
                (
                    Point::new(c + 0.65 * c2 - 0.65, 1.5 * s),
                    Point::new(-s - 1.3 * s2, 1.5 * c),
                    Point::new(-c - 2.6 * c2, -1.5 * s),
                )
            }
            CurveShape::Star { base_radius, amplitude, folds } => {
                let k = *folds as f64;
                let (s, c) = t.sin_cos();
                let (sk, ck) = (k * t).sin_cos();
                let r = base_radius * (1.0 + amplitude * ck);
                let dr = -base_radius * amplitude * k * sk;
                let ddr = -base_radius * amplitude * k * k * ck;
                (
                    Point::new(r * c, r * s),
                    Point::new(dr * c - r * s, dr * s + r * c),
                    Point::new(ddr * c - 2.0 * dr * s - r * c, ddr * s + 2.0 * dr * c - r * s),
                )
            }
            CurveShape::Fourier { x_cos, x_sin, y_cos, y_sin } => {
                let eval = |cos_c: &[f64], sin_c: &[f64]| {
                    let mut p = 0.0;
                    let mut dp = 0.0;
                    let mut ddp = 0.0;
                    for (m, &c) in cos_c.iter().enumerate() {
                        let mf = m as f64;
                        let (s_mt, c_mt) = (mf * t).sin_cos();
                        p += c * c_mt;
                        dp -= c * mf * s_mt;
                        ddp -= c * mf * mf * c_mt;
                    }
                    for (m, &c) in sin_c.iter().enumerate() {
                        let mf = (m + 1) as f64;
                        let (s_mt, c_mt) = (mf * t).sin_cos();
                        p += c * s_mt;
                        dp += c * mf * c_mt;
                        ddp -= c * mf * mf * s_mt;
                    }
                    (p, dp, ddp)
                };
                let (x, dx, ddx) = eval(x_cos, x_sin);
                let (y, dy, ddy) = eval(y_cos, y_sin);
                (Point::new(x, y), Point::new(dx, dy), Point::new(ddx, ddy))
            }
        }
    }

    /// Position x(t).
    pub fn position(&self, t: f64) -> Point {
        let (p, _, _) = self.base_derivatives(t);
        let rot = nalgebra::Rotation2::new(self.rotation);
        self.scale * (rot * p) + self.center
    }

    /// First derivative x'(t).
    pub fn velocity(&self, t: f64) -> Point {
        let (_, dp, _) = self.base_derivatives(t);
        let rot = nalgebra::Rotation2::new(self.rotation);
        self.scale * (rot * dp)
    }

    /// Second derivative x''(t).
    pub fn acceleration(&self, t: f64) -> Point {
        let (_, _, ddp) = self.base_derivatives(t);
        let rot = nalgebra::Rotation2::new(self.rotation);
        self.scale * (rot * ddp)
    }
}

/// Nystrom discretization of a boundary curve on a uniform parameter grid.
#[derive(Debug, Clone)]
pub struct DiscreteBoundary {
    pub n: usize,
    /// Parameter nodes t_j = 2 pi j / n.
    pub t: Vec<f64>,
    /// Points x(t_j).
    pub points: Vec<Point>,
    /// Derivatives x'(t_j).
    pub tangents: Vec<Point>,
    /// Unit outward normals.
    pub normals: Vec<Point>,
    /// Arc-length quadrature weights w_j = (2 pi / n) |x'(t_j)|.
    pub weights: Vec<f64>,
    /// Signed curvature at the nodes.
    pub curvature: Vec<f64>,
}

impl DiscreteBoundary {
    /// Total boundary length, sum of the quadrature weights.
    pub fn length(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Speeds |x'(t_j)|.
    pub fn speeds(&self) -> Vec<f64> {
        self.tangents.iter().map(|v| v.norm()).collect()
    }

    /// Largest node distance from the origin.
    pub fn max_radius(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }
}

const MIN_SPEED: f64 = 1e-12;

/// Discretize a curve with `n` uniform nodes (n even, n >= 16).
pub fn discretize(curve: &BoundaryCurve, n: usize) -> Result<DiscreteBoundary, GeometryError> {
    if n < 16 {
        return Err(GeometryError::TooFewNodes(n));
    }
    if !n.is_multiple_of(2) {
        return Err(GeometryError::OddNodeCount(n));
    }

    let t: Vec<f64> = (0..n).map(|j| TAU * j as f64 / n as f64).collect();
    let mut points = Vec::with_capacity(n);
    let mut tangents = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut curvature = Vec::with_capacity(n);

    for &tj in &t {
        let p = curve.position(tj);
        let dp = curve.velocity(tj);
        let ddp = curve.acceleration(tj);
        let speed = dp.norm();
        if speed < MIN_SPEED {
            return Err(GeometryError::NonRegularCurve { t: tj, speed });
        }
        // Outward normal for a counterclockwise curve.
        let nu = Point::new(dp.y, -dp.x) / speed;
        let cross = dp.x * ddp.y - dp.y * ddp.x;
        points.push(p);
        tangents.push(dp);
        normals.push(nu);
        weights.push(TAU / n as f64 * speed);
        curvature.push(cross / (speed * speed * speed));
    }

    let db = DiscreteBoundary { n, t, points, tangents, normals, weights, curvature };

    let signed = signed_area(&db);
    if signed <= 0.0 {
        return Err(GeometryError::ClockwiseOrientation(signed));
    }
    check_simplicity(&db)?;
    Ok(db)
}

fn signed_area(db: &DiscreteBoundary) -> f64 {
    // 1/2 * integral of x . nu ds; negative for clockwise curves.
    0.5 * db
        .points
        .iter()
        .zip(&db.normals)
        .zip(&db.weights)
        .map(|((p, nu), w)| p.dot(nu) * w)
        .sum::<f64>()
}

/// Reject curves where non-adjacent nodes come closer than a tenth of the
/// local mesh width.
fn check_simplicity(db: &DiscreteBoundary) -> Result<(), GeometryError> {
    let n = db.n;
    for i in 0..n {
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue; // adjacent across the seam
            }
            let dist = (db.points[i] - db.points[j]).norm();
            let mesh = 0.5 * (db.weights[i] + db.weights[j]);
            if dist < 0.1 * mesh {
                return Err(GeometryError::SelfIntersection { i, j, dist, mesh });
            }
        }
    }
    Ok(())
}

/// Enclosed area |Omega| = 1/2 * contour integral of x . nu ds.
pub fn area(db: &DiscreteBoundary) -> f64 {
    signed_area(db)
}

/// Area centroid of the enclosed domain, via contour integrals of x_k^2/2.
pub fn centroid(db: &DiscreteBoundary) -> Point {
    let a = signed_area(db);
    let mut c = Point::zeros();
    for ((p, nu), w) in db.points.iter().zip(&db.normals).zip(&db.weights) {
        c.x += 0.5 * p.x * p.x * nu.x * w;
        c.y += 0.5 * p.y * p.y * nu.y * w;
    }
    c / a
}

/// Similarity transform mapping a curve into the disk of radius 1/2:
/// x -> scale * (x - shift).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationTransform {
    pub shift: Point,
    pub scale: f64,
}

impl NormalizationTransform {
    pub fn apply(&self, p: Point) -> Point {
        self.scale * (p - self.shift)
    }

    pub fn invert(&self, p: Point) -> Point {
        p / self.scale + self.shift
    }
}

/// Resolution used to probe the centroid and radius of a curve during
/// normalization; fixed so that the transform does not depend on the caller's
/// node count.
const NORMALIZE_PROBE_NODES: usize = 512;

/// Translate the centroid to the origin and scale by 1/(2 R), where R is the
/// largest node distance from the centroid, so the result fits in the disk of
/// radius 1/2. The transform is recorded so that masses and tensors computed
/// on the normalized domain can be mapped back.
pub fn normalize(curve: &BoundaryCurve) -> Result<(BoundaryCurve, NormalizationTransform), GeometryError> {
    let db = discretize(curve, NORMALIZE_PROBE_NODES)?;
    let shift = centroid(&db);
    let radius = db.points.iter().map(|p| (p - shift).norm()).fold(0.0, f64::max);
    let scale = 0.5 / radius;
    let transform = NormalizationTransform { shift, scale };
    let normalized = curve.translated(-shift).scaled(scale);
    Ok((normalized, transform))
}

/// Perimeter of an ellipse by adaptive refinement of the trapezoidal rule,
/// used as an independent oracle for quadrature-weight sums.
pub fn ellipse_perimeter(a: f64, b: f64) -> f64 {
    let integrand = |t: f64| {
        let (s, c) = t.sin_cos();
        (a * a * s * s + b * b * c * c).sqrt()
    };
    let mut n = 64;
    let mut prev = f64::INFINITY;
    loop {
        let h = TAU / n as f64;
        let val: f64 = (0..n).map(|j| integrand(j as f64 * h)).sum::<f64>() * h;
        if (val - prev).abs() < 1e-14 * val || n > 1 << 20 {
            return val;
        }
        prev = val;
        n *= 2;
    }
}
