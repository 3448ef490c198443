//! Hyperbolic-space primitives.
//!
//! `H^n` with curvature `-1/rho^2` is realized two ways: as the Poincaré ball
//! of Euclidean radius `rho`, where `x = rho tanh(theta / 2 rho) chi`, and as
//! the upper sheet of the unit hyperboloid `y_1^2 + ... + y_n^2 - y_{n+1}^2 = -1`
//! in Minkowski space. Hyperboloid coordinates are always unit-curvature;
//! lengths measured there are multiplied by `rho` to get geodesic lengths.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::quadrature;

/// Dimension and curvature radius of the ambient space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceParams {
    n: usize,
    rho: f64,
}

impl SpaceParams {
    pub fn new(n: usize, rho: f64) -> Result<Self> {
        if n < 2 {
            return domain(format!("dimension must be at least 2, got {n}"));
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return domain(format!("curvature radius must be positive, got {rho}"));
        }
        Ok(Self { n, rho })
    }

    /// Unit curvature (`rho = 1`) in dimension `n`.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(n, 1.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `n - 1`.
    pub fn nu(&self) -> f64 {
        (self.n - 1) as f64
    }

    /// Sectional curvature `-1/rho^2`.
    pub fn kappa(&self) -> f64 {
        -1.0 / (self.rho * self.rho)
    }

    /// Same dimension, curvature radius scaled by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.n, self.rho * c)
    }

    /// Bottom of the spectrum of `-Delta` on all of `H^n`, `(n-1)^2 / (4 rho^2)`.
    pub fn spectral_bottom(&self) -> f64 {
        let nu = self.nu();
        nu * nu / (4.0 * self.rho * self.rho)
    }
}

/// Area of the unit sphere `S^{n-1}` in `R^n`, i.e. `n C_n`.
pub fn unit_sphere_area(n: usize) -> f64 {
    // 2 pi^{n/2} / Gamma(n/2), with Gamma evaluated at integers / half-integers.
    let half = n as f64 / 2.0;
    let mut gamma = if n % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut x = if n % 2 == 0 { 1.0 } else { 0.5 };
    while x < half - 0.25 {
        gamma *= x;
        x += 1.0;
    }
    2.0 * PI.powf(half) / gamma
}

fn check_radius(theta: f64) -> Result<()> {
    if theta.is_nan() || theta < 0.0 {
        return domain(format!("radius must be non-negative, got {theta}"));
    }
    Ok(())
}

/// `sinh(2x) - 2x` without cancellation for small `x`.
fn sinh2x_minus_2x(x: f64) -> f64 {
    if x.abs() > 0.1 {
        return (2.0 * x).sinh() - 2.0 * x;
    }
    let t = 2.0 * x;
    let t2 = t * t;
    let mut term = t * t2 / 6.0;
    let mut sum = term;
    let mut k = 3.0;
    while term.abs() > 1e-18 * sum.abs() {
        term *= t2 / ((k + 1.0) * (k + 2.0));
        sum += term;
        k += 2.0;
    }
    sum
}

/// Hyperbolic volume `A_rho(theta)` of a geodesic ball of radius `theta`.
pub fn ball_volume(theta: f64, p: &SpaceParams) -> Result<f64> {
    check_radius(theta)?;
    let rho = p.rho();
    let x = theta / rho;
    let v = match p.n() {
        2 => {
            let s = (0.5 * x).sinh();
            4.0 * PI * rho * rho * s * s
        }
        3 => PI * rho.powi(3) * sinh2x_minus_2x(x),
        n => {
            let area = unit_sphere_area(n);
            let nu = (n - 1) as i32;
            let integral = quadrature::integrate(|t: f64| t.sinh().powi(nu), 0.0, x, 1e-12);
            area * rho.powi(n as i32) * integral
        }
    };
    Ok(v)
}

/// Area `A_rho'(theta)` of the geodesic sphere of radius `theta`.
pub fn ball_surface(theta: f64, p: &SpaceParams) -> Result<f64> {
    check_radius(theta)?;
    Ok(sphere_density(theta, p))
}

/// `A_rho'` without the domain check, for inner loops.
pub(crate) fn sphere_density(theta: f64, p: &SpaceParams) -> f64 {
    let rho = p.rho();
    unit_sphere_area(p.n()) * (rho * (theta / rho).sinh()).powi(p.n() as i32 - 1)
}

/// Inverse of [`ball_volume`].
pub fn radius_from_volume(v: f64, p: &SpaceParams) -> Result<f64> {
    if v.is_nan() || v < 0.0 {
        return domain(format!("volume must be non-negative, got {v}"));
    }
    if v == 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 1.0 * p.rho();
    while ball_volume(hi, p)? < v {
        lo = hi;
        hi *= 2.0;
        if hi > 1e4 * p.rho() {
            return domain(format!("volume {v} too large to invert"));
        }
    }
    // Bisection until Newton is safe, then Newton with bracket protection.
    let mut theta = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = ball_volume(theta, p)? - v;
        if f.abs() <= 1e-14 * v {
            return Ok(theta);
        }
        if f > 0.0 {
            hi = theta;
        } else {
            lo = theta;
        }
        let slope = sphere_density(theta, p);
        let newton = theta - f / slope;
        theta = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(theta)
}

/// Conformal factor `2 / (1 - |x|^2 / rho^2)` of the Poincaré ball metric.
pub fn conformal_factor(x: &[f64], p: &SpaceParams) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum::<f64>() / (p.rho() * p.rho());
    2.0 / (1.0 - r2)
}

/// Geodesic polar coordinates around the origin of the Poincaré ball.
#[derive(Debug, Clone, PartialEq)]
pub struct BallCoordinates {
    pub theta: f64,
    pub chi: Vec<f64>,
}

impl BallCoordinates {
    pub fn new(theta: f64, chi: Vec<f64>) -> Result<Self> {
        check_radius(theta)?;
        let norm = chi.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return domain(format!("direction must be a unit vector, |chi| = {norm}"));
        }
        Ok(Self { theta, chi })
    }

    pub fn from_disk(x: &[f64], p: &SpaceParams) -> Result<Self> {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r >= p.rho() {
            return domain(format!("point outside the Poincaré ball (|x| = {r})"));
        }
        let theta = 2.0 * p.rho() * (r / p.rho()).atanh();
        let chi = if r > 0.0 {
            x.iter().map(|v| v / r).collect()
        } else {
            let mut e = vec![0.0; x.len()];
            e[0] = 1.0;
            e
        };
        Ok(Self { theta, chi })
    }

    pub fn to_disk(&self, p: &SpaceParams) -> Vec<f64> {
        let r = p.rho() * (self.theta / (2.0 * p.rho())).tanh();
        self.chi.iter().map(|c| r * c).collect()
    }
}

/// A point on the unit hyperboloid in `R^{n,1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinkowskiPoint {
    y: Vec<f64>,
}

impl MinkowskiPoint {
    pub fn new(y: Vec<f64>) -> Result<Self> {
        if y.len() < 3 {
            return domain("hyperboloid points need at least 3 coordinates");
        }
        let last = *y.last().unwrap();
        let form = minkowski_form(&y, &y);
        if !(last >= 1.0) || (form + 1.0).abs() > 1e-12 * last * last {
            return domain(format!("not on the upper hyperboloid sheet (<y,y> = {form})"));
        }
        Ok(Self { y })
    }

    /// `(0, ..., 0, 1)` in `R^{n,1}`.
    pub fn origin(n: usize) -> Self {
        let mut y = vec![0.0; n + 1];
        y[n] = 1.0;
        Self { y }
    }

    /// Lift of a spatial vector, `(xi, sqrt(1 + |xi|^2))`.
    pub fn from_spatial(xi: &[f64]) -> Self {
        let mut y = xi.to_vec();
        let s2: f64 = xi.iter().map(|v| v * v).sum();
        y.push((1.0 + s2).sqrt());
        Self { y }
    }

    /// Point at unit-curvature distance `t` from the origin in direction `chi`.
    pub fn at_distance(t: f64, chi: &[f64]) -> Self {
        let s = t.sinh();
        Self::from_spatial(&chi.iter().map(|c| s * c).collect::<Vec<_>>())
    }

    pub fn coords(&self) -> &[f64] {
        &self.y
    }

    pub fn dim(&self) -> usize {
        self.y.len() - 1
    }

    /// The projection `Pi y = (y_1, ..., y_n)`.
    pub fn spatial(&self) -> &[f64] {
        &self.y[..self.dim()]
    }

    pub fn time(&self) -> f64 {
        self.y[self.dim()]
    }

    /// Unit-curvature distance from the hyperboloid origin.
    pub fn radius(&self) -> f64 {
        let s: f64 = self.spatial().iter().map(|v| v * v).sum::<f64>().sqrt();
        s.asinh()
    }
}

fn minkowski_form(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() - 1;
    a[..n].iter().zip(&b[..n]).map(|(x, y)| x * y).sum::<f64>() - a[n] * b[n]
}

/// Unit-curvature geodesic distance between hyperboloid points.
pub fn geodesic_distance(a: &MinkowskiPoint, b: &MinkowskiPoint) -> f64 {
    // |a - b|_M^2 = 2 (cosh d - 1) = 4 sinh^2(d/2); well conditioned for close points.
    let diff: Vec<f64> = a.y.iter().zip(&b.y).map(|(x, y)| x - y).collect();
    let s2 = minkowski_form(&diff, &diff).max(0.0);
    2.0 * (0.5 * s2.sqrt()).asinh()
}

/// Maps a point of the Poincaré ball of radius `rho` to the hyperboloid.
pub fn disk_to_minkowski(x: &[f64], p: &SpaceParams) -> Result<MinkowskiPoint> {
    let t2: f64 = x.iter().map(|v| v * v).sum::<f64>() / (p.rho() * p.rho());
    if !(t2 < 1.0) {
        return domain(format!("point outside the Poincaré ball (|x|/rho = {})", t2.sqrt()));
    }
    let denom = 1.0 - t2;
    let mut y: Vec<f64> = x.iter().map(|v| 2.0 * v / (p.rho() * denom)).collect();
    y.push((1.0 + t2) / denom);
    Ok(MinkowskiPoint { y })
}

/// Inverse of [`disk_to_minkowski`].
pub fn minkowski_to_disk(y: &MinkowskiPoint, p: &SpaceParams) -> Vec<f64> {
    let denom = 1.0 + y.time();
    y.spatial().iter().map(|v| p.rho() * v / denom).collect()
}

/// A Lorentz transformation of `R^{n,1}` preserving the upper sheet.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzBoost {
    m: DMatrix<f64>,
}

impl LorentzBoost {
    pub fn identity(n: usize) -> Self {
        Self {
            m: DMatrix::identity(n + 1, n + 1),
        }
    }

    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() < 3 {
            return domain("Lorentz matrix must be square of size >= 3");
        }
        let b = Self { m };
        if b.form_defect() > 1e-10 {
            return domain(format!("matrix does not preserve the Minkowski form (defect {:e})", b.form_defect()));
        }
        if b.m[(b.m.nrows() - 1, b.m.ncols() - 1)] < 0.0 {
            return domain("matrix swaps the hyperboloid sheets");
        }
        Ok(b)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.m.nrows() - 1
    }

    fn metric(&self) -> DMatrix<f64> {
        let k = self.m.nrows();
        let mut j = DMatrix::identity(k, k);
        j[(k - 1, k - 1)] = -1.0;
        j
    }

    /// Largest entry of `|m^T J m - J|`.
    pub fn form_defect(&self) -> f64 {
        let j = self.metric();
        let d = self.m.transpose() * &j * &self.m - &j;
        d.amax()
    }

    pub fn apply(&self, y: &MinkowskiPoint) -> MinkowskiPoint {
        let v = &self.m * DVector::from_column_slice(&y.y);
        let spatial: Vec<f64> = v.iter().take(self.dim()).copied().collect();
        MinkowskiPoint::from_spatial(&spatial)
    }

    /// Applies the matrix to an arbitrary vector of `R^{n,1}` (no projection).
    pub fn apply_vector(&self, v: &[f64]) -> Vec<f64> {
        (&self.m * DVector::from_column_slice(v)).iter().copied().collect()
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &LorentzBoost) -> LorentzBoost {
        LorentzBoost {
            m: &self.m * &first.m,
        }
    }

    pub fn inverse(&self) -> LorentzBoost {
        let j = self.metric();
        LorentzBoost {
            m: &j * self.m.transpose() * &j,
        }
    }

    /// Distance of the matrix from the identity (max entry).
    pub fn distance_from_identity(&self) -> f64 {
        let k = self.m.nrows();
        (&self.m - DMatrix::<f64>::identity(k, k)).amax()
    }
}

/// Lorentz transformation taking `z` to the hyperboloid origin.
///
/// Built as `H B H`, where `H` is the Householder reflection sending the
/// spatial direction of `z` to the first axis and `B` is the boost in the
/// `(1, n+1)` plane with rapidity `|z|`.
pub fn boost_to_origin(z: &MinkowskiPoint) -> LorentzBoost {
    let n = z.dim();
    let spatial = z.spatial();
    let s = spatial.iter().map(|v| v * v).sum::<f64>().sqrt();
    if s == 0.0 {
        return LorentzBoost::identity(n);
    }
    let k = n + 1;
    // Householder reflection in the spatial block taking u to e_1.
    let mut h = DMatrix::<f64>::identity(k, k);
    let mut w: Vec<f64> = spatial.iter().map(|v| v / s).collect();
    w[0] -= 1.0;
    let wn2: f64 = w.iter().map(|v| v * v).sum();
    if wn2 > 1e-30 {
        for i in 0..n {
            for j in 0..n {
                h[(i, j)] -= 2.0 * w[i] * w[j] / wn2;
            }
        }
    }
    let (sh, ch) = (s, (1.0 + s * s).sqrt());
    let mut b = DMatrix::<f64>::identity(k, k);
    b[(0, 0)] = ch;
    b[(n, n)] = ch;
    b[(0, n)] = -sh;
    b[(n, 0)] = -sh;
    LorentzBoost { m: &h * b * &h }
}
