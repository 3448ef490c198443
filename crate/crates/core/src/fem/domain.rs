//! Bounded test domains in the Poincaré disk, described in geodesic units.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{boost_to_origin, disk_to_minkowski, minkowski_to_disk, LorentzBoost, MinkowskiPoint, SpaceParams};

/// Admissible margin to the ideal boundary, relative to `rho`.
const RIM: f64 = 1e-6;
/// Samples used to resolve a smooth boundary before arclength resampling.
const FINE_SAMPLES: usize = 8192;

/// Shape of a domain around its center.
///
/// Radial shapes are given by their geodesic distance from the center as a
/// function of the polar angle. Polygon vertices are geodesic normal
/// coordinates `(r cos phi, r sin phi)` around the center; edges are straight
/// in the disk model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Ball { radius: f64 },
    /// Geodesic polar ellipse `r(phi) = a b / sqrt((b cos phi)^2 + (a sin phi)^2)`.
    Ellipse { a: f64, b: f64 },
    /// `r(phi) = radius (1 + amplitude cos(frequency phi))`.
    BallWithBump { radius: f64, amplitude: f64, frequency: u32 },
    Polygon { vertices: Vec<[f64; 2]> },
}

impl Shape {
    fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                domain(format!("{name} must be positive and finite, got {v}"))
            }
        };
        match self {
            Shape::Ball { radius } => positive(*radius, "radius"),
            Shape::Ellipse { a, b } => {
                positive(*a, "semi-axis a")?;
                positive(*b, "semi-axis b")
            }
            Shape::BallWithBump { radius, amplitude, frequency } => {
                positive(*radius, "radius")?;
                if !(amplitude.abs() < 1.0) {
                    return domain(format!("bump amplitude must lie in (-1, 1), got {amplitude}"));
                }
                if *frequency == 0 {
                    return domain("bump frequency must be at least 1");
                }
                Ok(())
            }
            Shape::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return domain("polygon needs at least three vertices");
                }
                if vertices.iter().flatten().any(|v| !v.is_finite()) {
                    return domain("polygon vertices must be finite");
                }
                Ok(())
            }
        }
    }

    /// Geodesic distance from the center in direction `phi`, for radial shapes.
    fn radial(&self, phi: f64) -> Option<f64> {
        match *self {
            Shape::Ball { radius } => Some(radius),
            Shape::Ellipse { a, b } => Some(a * b / ((b * phi.cos()).powi(2) + (a * phi.sin()).powi(2)).sqrt()),
            Shape::BallWithBump { radius, amplitude, frequency } => {
                Some(radius * (1.0 + amplitude * (frequency as f64 * phi).cos()))
            }
            Shape::Polygon { .. } => None,
        }
    }
}

/// A domain in the Poincaré disk of radius `rho`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskDomain {
    pub shape: Shape,
    pub p: SpaceParams,
    /// Center in geodesic normal coordinates around the disk origin.
    pub center: [f64; 2],
}

/// Geodesic normal coordinates around the origin to disk coordinates.
fn normal_to_disk(v: [f64; 2], rho: f64) -> [f64; 2] {
    let r = (v[0] * v[0] + v[1] * v[1]).sqrt();
    if r == 0.0 {
        return [0.0, 0.0];
    }
    let s = rho * (r / (2.0 * rho)).tanh() / r;
    [s * v[0], s * v[1]]
}

/// Geodesic distance between two points of the disk of radius `rho`.
pub fn disk_distance(a: [f64; 2], b: [f64; 2], rho: f64) -> f64 {
    let r2 = rho * rho;
    let d2 = (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);
    let na = r2 - a[0] * a[0] - a[1] * a[1];
    let nb = r2 - b[0] * b[0] - b[1] * b[1];
    // cosh(d/rho) - 1 = 2 sinh^2(d / 2 rho) = 2 rho^2 |a-b|^2 / (na nb).
    let t = r2 * d2 / (na * nb);
    2.0 * rho * t.sqrt().asinh()
}

fn segments_cross(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let orient = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if d1 == 0.0 && d2 == 0.0 {
        // Collinear: overlap of the projections.
        let lo = |a: f64, b: f64| (a.min(b), a.max(b));
        let axis = if (p1[0] - p2[0]).abs() >= (p1[1] - p2[1]).abs() { 0 } else { 1 };
        let (a0, a1) = lo(p1[axis], p2[axis]);
        let (b0, b1) = lo(q1[axis], q2[axis]);
        return a0 <= b1 && b0 <= a1;
    }
    d1 * d2 <= 0.0 && d3 * d4 <= 0.0
}

impl DiskDomain {
    pub fn new(shape: Shape, p: SpaceParams) -> Result<Self> {
        Self::centered_at(shape, p, [0.0, 0.0])
    }

    pub fn centered_at(shape: Shape, p: SpaceParams, center: [f64; 2]) -> Result<Self> {
        if p.n() != 2 {
            return Err(Error::UnsupportedDimension(p.n()));
        }
        shape.validate()?;
        if center.iter().any(|c| !c.is_finite()) {
            return domain("center must be finite");
        }
        Ok(Self { shape, p, center })
    }

    pub fn ball(radius: f64, p: SpaceParams) -> Result<Self> {
        Self::new(Shape::Ball { radius }, p)
    }

    pub fn ellipse(a: f64, b: f64, p: SpaceParams) -> Result<Self> {
        Self::new(Shape::Ellipse { a, b }, p)
    }

    pub fn ball_with_bump(radius: f64, amplitude: f64, frequency: u32, p: SpaceParams) -> Result<Self> {
        Self::new(Shape::BallWithBump { radius, amplitude, frequency }, p)
    }

    pub fn polygon(vertices: Vec<[f64; 2]>, p: SpaceParams) -> Result<Self> {
        Self::new(Shape::Polygon { vertices }, p)
    }

    pub fn rho(&self) -> f64 {
        self.p.rho()
    }

    /// Isometry of the disk moving the origin to the center.
    pub fn placement(&self) -> LorentzBoost {
        let rho = self.rho();
        let c = normal_to_disk(self.center, rho);
        let z = disk_to_minkowski(&c, &self.p).unwrap_or_else(|_| MinkowskiPoint::origin(2));
        boost_to_origin(&z).inverse()
    }

    fn place(&self, boost: &LorentzBoost, x: [f64; 2]) -> Result<[f64; 2]> {
        if self.center == [0.0, 0.0] {
            return Ok(x);
        }
        let y = boost.apply(&disk_to_minkowski(&x, &self.p)?);
        let d = minkowski_to_disk(&y, &self.p);
        Ok([d[0], d[1]])
    }

    /// Closed boundary polyline in disk coordinates, counter-clockwise,
    /// with geodesic spacing at most `spacing`. The first point is not repeated.
    pub fn boundary(&self, spacing: f64) -> Result<Vec<[f64; 2]>> {
        if !(spacing > 0.0) {
            return domain(format!("boundary spacing must be positive, got {spacing}"));
        }
        let rho = self.rho();
        let boost = self.placement();
        let fine: Vec<[f64; 2]> = match &self.shape {
            Shape::Polygon { vertices } => {
                let mut pts = Vec::new();
                let disk: Vec<[f64; 2]> = vertices.iter().map(|&v| normal_to_disk(v, rho)).collect();
                let signed: f64 = (0..disk.len())
                    .map(|i| {
                        let (a, b) = (disk[i], disk[(i + 1) % disk.len()]);
                        a[0] * b[1] - a[1] * b[0]
                    })
                    .sum();
                let ordered: Vec<[f64; 2]> = if signed < 0.0 { disk.into_iter().rev().collect() } else { disk };
                for i in 0..ordered.len() {
                    let (a, b) = (ordered[i], ordered[(i + 1) % ordered.len()]);
                    let len = disk_distance(a, b, rho);
                    let pieces = ((len / spacing).ceil() as usize).max(1);
                    for k in 0..pieces {
                        let t = k as f64 / pieces as f64;
                        pts.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
                    }
                }
                pts.into_iter().map(|x| self.place(&boost, x)).collect::<Result<_>>()?
            }
            shape => {
                let point = |phi: f64| -> Result<[f64; 2]> {
                    let r = shape.radial(phi).unwrap();
                    self.place(&boost, normal_to_disk([r * phi.cos(), r * phi.sin()], rho))
                };
                let angles: Vec<f64> = (0..FINE_SAMPLES).map(|i| TAU * i as f64 / FINE_SAMPLES as f64).collect();
                let dense: Vec<[f64; 2]> = angles.iter().map(|&phi| point(phi)).collect::<Result<_>>()?;
                resample_angles(&dense, spacing, rho)
                    .into_iter()
                    .map(point)
                    .collect::<Result<_>>()?
            }
        };
        let limit = rho * (1.0 - RIM);
        if let Some(bad) = fine.iter().find(|x| (x[0] * x[0] + x[1] * x[1]).sqrt() >= limit) {
            return Err(Error::Mesh(format!("boundary point {bad:?} reaches the ideal boundary")));
        }
        check_simple(&fine)?;
        Ok(fine)
    }

    /// Whether a disk point lies inside the domain (even-odd rule on the boundary polyline).
    pub fn contains(&self, boundary: &[[f64; 2]], x: [f64; 2]) -> bool {
        let mut inside = false;
        let m = boundary.len();
        for i in 0..m {
            let (a, b) = (boundary[i], boundary[(i + 1) % m]);
            if (a[1] > x[1]) != (b[1] > x[1]) {
                let t = (x[1] - a[1]) / (b[1] - a[1]);
                if x[0] < a[0] + t * (b[0] - a[0]) {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

/// Polar angles giving equal geodesic arclength along a closed curve sampled
/// at equally spaced angles.
fn resample_angles(dense: &[[f64; 2]], spacing: f64, rho: f64) -> Vec<f64> {
    let m = dense.len();
    let step = TAU / m as f64;
    let mut cum = Vec::with_capacity(m + 1);
    cum.push(0.0);
    for i in 0..m {
        let d = disk_distance(dense[i], dense[(i + 1) % m], rho);
        cum.push(cum[i] + d);
    }
    let total = cum[m];
    let count = ((total / spacing).ceil() as usize).max(8);
    let mut out = Vec::with_capacity(count);
    let mut seg = 0;
    for k in 0..count {
        let s = total * k as f64 / count as f64;
        while cum[seg + 1] < s {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let t = if len > 0.0 { (s - cum[seg]) / len } else { 0.0 };
        out.push(step * (seg as f64 + t));
    }
    out
}

fn check_simple(pts: &[[f64; 2]]) -> Result<()> {
    let m = pts.len();
    for i in 0..m {
        let (a, b) = (pts[i], pts[(i + 1) % m]);
        for j in (i + 2)..m {
            if i == 0 && j == m - 1 {
                continue;
            }
            if segments_cross(a, b, pts[j], pts[(j + 1) % m]) {
                return Err(Error::Mesh(format!("boundary self-intersects near {a:?}")));
            }
        }
    }
    Ok(())
}
