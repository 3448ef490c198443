//! Rearrangements of discrete fields, the single-crossing comparison between
//! a domain's ground state and the ground state of the ball with the same
//! first eigenvalue, and the hyperbolic center-of-mass normalization.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ball::{sign_changes, NormalizedGround};
use crate::error::{domain, Error, Result};
use crate::fem::{DiscreteField, TriMesh};
use crate::geometry::{
    ball_surface, ball_volume, boost_to_origin, disk_to_minkowski, geodesic_distance, radius_from_volume, LorentzBoost, MinkowskiPoint, SpaceParams,
};

/// Monotone step function of the volume parameter `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RearrangedField {
    /// `breakpoints[k]..breakpoints[k + 1]` carries `values[k]`; starts at 0.
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
    pub total_volume: f64,
    pub decreasing: bool,
}

impl RearrangedField {
    /// Rearranges `(volume, value)` cells; zero-volume cells are dropped.
    pub fn from_cells(cells: &[(f64, f64)], decreasing: bool) -> Result<Self> {
        if cells.iter().any(|(w, v)| !(w.is_finite() && *w >= 0.0 && v.is_finite())) {
            return domain("cells need finite non-negative volumes and finite values");
        }
        let mut sorted: Vec<(f64, f64)> = cells.iter().copied().filter(|(w, _)| *w > 0.0).collect();
        if sorted.is_empty() {
            return domain("nothing to rearrange: total volume is zero");
        }
        if decreasing {
            sorted.sort_by(|a, b| b.1.total_cmp(&a.1));
        } else {
            sorted.sort_by(|a, b| a.1.total_cmp(&b.1));
        }
        let mut breakpoints = Vec::with_capacity(sorted.len() + 1);
        breakpoints.push(0.0);
        let mut acc = 0.0;
        for (w, _) in &sorted {
            acc += w;
            breakpoints.push(acc);
        }
        Ok(Self {
            breakpoints,
            values: sorted.into_iter().map(|(_, v)| v).collect(),
            total_volume: acc,
            decreasing,
        })
    }

    /// Value at volume `s`; outside `[0, total_volume]` the end values are used.
    pub fn value_at(&self, s: f64) -> f64 {
        let k = self.breakpoints.partition_point(|&b| b <= s);
        self.values[k.saturating_sub(1).min(self.values.len() - 1)]
    }

    /// Volume on which the rearranged function exceeds `t`.
    pub fn measure_above(&self, t: f64) -> f64 {
        self.values
            .iter()
            .zip(self.breakpoints.windows(2))
            .filter(|(v, _)| **v > t)
            .map(|(_, b)| b[1] - b[0])
            .sum()
    }

    /// `int_0^s f(s') ds'`.
    pub fn integral_to(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for (v, b) in self.values.iter().zip(self.breakpoints.windows(2)) {
            if b[0] >= s {
                break;
            }
            acc += v * (b[1].min(s) - b[0]);
        }
        acc
    }

    /// `int phi(f(s)) ds` over the whole range.
    pub fn integral_of<F: Fn(f64) -> f64>(&self, phi: F) -> f64 {
        self.values
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(v, b)| phi(*v) * (b[1] - b[0]))
            .sum()
    }

    /// `int f(s) h(s) ds` for another step function, exact on merged breakpoints.
    pub fn integral_of_product(&self, other: &RearrangedField) -> f64 {
        let (mut i, mut j) = (0usize, 0usize);
        let mut s = 0.0;
        let mut acc = 0.0;
        while i < self.values.len() && j < other.values.len() {
            let next = self.breakpoints[i + 1].min(other.breakpoints[j + 1]);
            acc += self.values[i] * other.values[j] * (next - s);
            s = next;
            if self.breakpoints[i + 1] <= next {
                i += 1;
            }
            if other.breakpoints[j + 1] <= next {
                j += 1;
            }
        }
        acc
    }

    /// `int f(s) w(s) ds` for a smooth weight, three-point Gauss on each step.
    pub fn integral_with<W: Fn(f64) -> f64 + Sync>(&self, weight: W) -> f64 {
        const NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
        const WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
        let parts: Vec<f64> = self
            .values
            .par_chunks(4096)
            .enumerate()
            .map(|(c, chunk)| {
                let base = c * 4096;
                chunk
                    .iter()
                    .enumerate()
                    .map(|(k, v)| {
                        let (a, b) = (self.breakpoints[base + k], self.breakpoints[base + k + 1]);
                        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
                        let w: f64 = NODES.iter().zip(WEIGHTS).map(|(x, q)| q * weight(mid + half * x)).sum();
                        v * w * half
                    })
                    .sum()
            })
            .collect();
        parts.iter().sum()
    }

    /// Averages over `bins` equal volume intervals, with the bin centers.
    pub fn bin_averages(&self, bins: usize) -> (Vec<f64>, Vec<f64>) {
        let width = self.total_volume / bins as f64;
        let centers = (0..bins).map(|k| (k as f64 + 0.5) * width).collect();
        let avgs = (0..bins)
            .map(|k| (self.integral_to((k + 1) as f64 * width) - self.integral_to(k as f64 * width)) / width)
            .collect();
        (centers, avgs)
    }

    /// Writes `s,u` rows: each step's start with its value, then the end point.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "s,u")?;
        for (v, b) in self.values.iter().zip(&self.breakpoints) {
            writeln!(w, "{:.16e},{:.16e}", b, v)?;
        }
        writeln!(w, "{:.16e},{:.16e}", self.total_volume, self.values.last().unwrap())
    }
}

fn check_field(field: &DiscreteField, p: &SpaceParams) -> Result<()> {
    if p.n() != 2 {
        return Err(Error::UnsupportedDimension(p.n()));
    }
    if (field.mesh().rho - p.rho()).abs() > 1e-12 * p.rho() {
        return domain("field mesh and space parameters disagree on rho");
    }
    Ok(())
}

/// Decreasing rearrangement `u#` over quadrature cells weighted by hyperbolic volume.
pub fn decreasing_rearrangement(field: &DiscreteField, p: &SpaceParams) -> Result<RearrangedField> {
    check_field(field, p)?;
    let cells: Vec<(f64, f64)> = field.cells().into_iter().map(|(_, w, u)| (w, u)).collect();
    RearrangedField::from_cells(&cells, true)
}

/// Increasing rearrangement over the same cells.
pub fn increasing_rearrangement(field: &DiscreteField, p: &SpaceParams) -> Result<RearrangedField> {
    check_field(field, p)?;
    let cells: Vec<(f64, f64)> = field.cells().into_iter().map(|(_, w, u)| (w, u)).collect();
    RearrangedField::from_cells(&cells, false)
}

/// Ground state of a ball, normalized to a prescribed `L^2` norm, as a
/// function of radius and of enclosed volume.
#[derive(Debug, Clone)]
pub struct GroundProfile {
    ground: NormalizedGround,
    p: SpaceParams,
    scale: f64,
    pub volume: f64,
}

impl GroundProfile {
    /// Ground state of the ball of radius `theta0` with `int z0^2 dV = norm_sq`.
    pub fn new(theta0: f64, p: &SpaceParams, norm_sq: f64) -> Result<Self> {
        if !(norm_sq > 0.0 && norm_sq.is_finite()) {
            return Err(Error::Normalization(format!("target norm {norm_sq}")));
        }
        let ground = NormalizedGround::new(theta0, p)?;
        Ok(Self {
            ground,
            p: *p,
            scale: norm_sq.sqrt(),
            volume: ball_volume(theta0, p)?,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.ground.lambda
    }

    pub fn radius(&self) -> f64 {
        self.ground.theta0
    }

    pub fn at_radius(&self, theta: f64) -> Result<f64> {
        Ok(self.scale * self.ground.value(theta)?)
    }

    pub fn derivative_at_radius(&self, theta: f64) -> Result<f64> {
        Ok(self.scale * self.ground.derivative(theta)?)
    }

    /// `z0#(s)`, zero beyond the ball's volume.
    pub fn sharp(&self, s: f64) -> Result<f64> {
        if s >= self.volume {
            return Ok(0.0);
        }
        self.at_radius(radius_from_volume(s.max(0.0), &self.p)?)
    }

    /// `int_0^s z0#`, i.e. `int z0 dV` over the ball of volume `s`.
    pub fn integral_to(&self, s: f64) -> Result<f64> {
        let theta = radius_from_volume(s.min(self.volume), &self.p)?;
        let failure = std::cell::Cell::new(None);
        let v = crate::quadrature::integrate(
            |t| match self.at_radius(t).and_then(|z| Ok(z * ball_surface(t, &self.p)?)) {
                Ok(v) => v,
                Err(e) => {
                    failure.set(Some(e));
                    f64::NAN
                }
            },
            0.0,
            theta,
            1e-11,
        );
        match failure.into_inner() {
            Some(e) => Err(e),
            None => Ok(v),
        }
    }
}

/// Outcome of comparing `u1#` with `z0#`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChitiReport {
    pub theta_tilde: f64,
    pub volume_ball: f64,
    pub volume_domain: f64,
    /// Sign changes of `z0# - u1#` on `[0, |S1|]` above the noise floor.
    pub crossing_count: usize,
    /// Volume parameter of the first crossing.
    pub crossing_location: Option<f64>,
    /// `z0# >= u1#` before the crossing and `<=` after.
    pub sign_pattern_ok: bool,
    /// `max |z0# - u1#| / max z0#`.
    pub max_relative_difference: f64,
    pub identical: bool,
    pub noise_floor: f64,
    pub grid_size: usize,
    pub pass: bool,
}

/// Tolerance under which the two profiles count as identical.
pub const IDENTITY_TOL: f64 = 0.01;
/// Differences below this fraction of the peak are treated as discretization noise.
pub const CROSSING_FLOOR: f64 = 2e-3;
const COMPARE_GRID: usize = 1000;

/// Compares the decreasing rearrangement of `u1` with the ground state of
/// the ball of radius `theta_tilde` normalized to the same `L^2` norm.
pub fn chiti_compare(u1: &DiscreteField, theta_tilde: f64, p: &SpaceParams) -> Result<ChitiReport> {
    let u_sharp = decreasing_rearrangement(u1, p)?;
    let norm_sq = u_sharp.integral_of(|v| v * v);
    let z = GroundProfile::new(theta_tilde, p, norm_sq)?;
    chiti_compare_profiles(&u_sharp, &z)
}

/// Crossing analysis for precomputed profiles.
pub fn chiti_compare_profiles(u_sharp: &RearrangedField, z: &GroundProfile) -> Result<ChitiReport> {
    let vol = z.volume;
    let s: Vec<f64> = (0..COMPARE_GRID).map(|k| vol * (k as f64 + 0.5) / COMPARE_GRID as f64).collect();
    let zs = s.iter().map(|&x| z.sharp(x)).collect::<Result<Vec<_>>>()?;
    let diff: Vec<f64> = s.iter().zip(&zs).map(|(&x, zv)| zv - u_sharp.value_at(x)).collect();
    let peak = zs.iter().fold(0.0f64, |a, v| a.max(*v));
    if !(peak > 0.0) {
        return Err(Error::Normalization("ball ground state vanishes".into()));
    }
    let max_rel = diff.iter().fold(0.0f64, |a, d| a.max(d.abs())) / peak;
    let floor = CROSSING_FLOOR * peak;

    let (crossings, location) = sign_changes(&s, &diff, floor);
    let first_sign = diff.iter().find(|d| d.abs() > floor).map(|d| d.signum());
    let sign_pattern_ok = crossings == 0 || first_sign == Some(1.0);
    let identical = max_rel <= IDENTITY_TOL;
    let pass = identical || (crossings == 1 && sign_pattern_ok);
    Ok(ChitiReport {
        theta_tilde: z.radius(),
        volume_ball: vol,
        volume_domain: u_sharp.total_volume,
        crossing_count: crossings,
        crossing_location: location,
        sign_pattern_ok,
        max_relative_difference: max_rel,
        identical,
        noise_floor: floor,
        grid_size: COMPARE_GRID,
        pass,
    })
}

/// Distribution function `s(t) = |{u > t}|` of the piecewise linear
/// interpolant, with the hyperbolic weight frozen per triangle.
#[derive(Debug, Clone)]
pub struct LevelDistribution {
    /// Sorted vertex values and weighted area of each triangle.
    triangles: Vec<([f64; 3], f64)>,
    min: f64,
    max: f64,
    pub total_volume: f64,
}

impl LevelDistribution {
    pub fn from_field(field: &DiscreteField, p: &SpaceParams) -> Result<Self> {
        check_field(field, p)?;
        let cells = field.cells();
        let mesh = field.mesh();
        let triangles: Vec<([f64; 3], f64)> = mesh
            .triangles
            .iter()
            .enumerate()
            .map(|(t, idx)| {
                let mut v = idx.map(|i| field.values[i]);
                v.sort_by(f64::total_cmp);
                let w = (0..3).map(|k| cells[3 * t + k].1).sum();
                (v, w)
            })
            .collect();
        let min = field.values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = field.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let total_volume = triangles.iter().map(|t| t.1).sum();
        Ok(Self { triangles, min, max, total_volume })
    }

    /// `|{u > t}|`.
    pub fn measure_above(&self, t: f64) -> f64 {
        self.triangles
            .iter()
            .map(|([a, b, c], w)| {
                let frac = if t >= *c {
                    0.0
                } else if t < *a {
                    1.0
                } else if t >= *b {
                    (c - t).powi(2) / ((c - a) * (c - b))
                } else {
                    1.0 - (t - a).powi(2) / ((c - a) * (b - a))
                };
                w * frac
            })
            .sum()
    }

    /// `-d/dt |{u > t}|`.
    pub fn density(&self, t: f64) -> f64 {
        self.triangles
            .iter()
            .map(|([a, b, c], w)| {
                let d = if t >= *c || t < *a {
                    0.0
                } else if t >= *b {
                    2.0 * (c - t) / ((c - a) * (c - b))
                } else {
                    2.0 * (t - a) / ((c - a) * (b - a))
                };
                w * d
            })
            .sum()
    }

    /// The level `t` with `|{u > t}| = s`, i.e. `u#(s)`.
    pub fn level_at(&self, s: f64) -> f64 {
        let (mut lo, mut hi) = (self.min, self.max);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.measure_above(mid) > s {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * self.max.abs() {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Checks of the integro-differential relations for `z0#` (equality) and
/// `u1#` (inequality).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChitiOdeReport {
    /// Largest relative mismatch in the equality for `z0#`.
    pub ball_max_relative_residual: f64,
    pub ball_pass: bool,
    /// Largest relative excess of `-du1#/ds` over the right-hand side.
    pub domain_max_relative_excess: f64,
    pub domain_pass: bool,
    /// Too few triangles per grid interval for a meaningful derivative.
    pub inconclusive: bool,
    pub grid_size: usize,
    /// Both sides of the ball relation at the smallest sampled `s`.
    pub start_values: (f64, f64),
}

pub const BALL_RELATION_TOL: f64 = 0.02;
pub const DOMAIN_RELATION_ALLOWANCE: f64 = 0.05;
const RELATION_GRID: usize = 100;
const MIN_TRIANGLES_PER_STEP: usize = 10;

/// `-dz0#/ds = lambda1 A'(A^-1(s))^-2 int_0^s z0#` and
/// `-du1#/ds <= lambda1 A'(A^-1(s))^-2 int_0^s u1#` on interior grids.
pub fn chiti_ode_residuals(
    u1: &DiscreteField,
    z: &GroundProfile,
    lambda1: f64,
    p: &SpaceParams,
) -> Result<ChitiOdeReport> {
    if !(lambda1 > 0.0) {
        return domain(format!("lambda1 must be positive, got {lambda1}"));
    }
    let m = RELATION_GRID;
    let mut ball_worst = 0.0f64;
    let mut start_values = (0.0, 0.0);
    for k in 1..m {
        let s = z.volume * k as f64 / m as f64;
        let theta = radius_from_volume(s, p)?;
        let area = ball_surface(theta, p)?;
        let lhs = -z.derivative_at_radius(theta)? / area;
        let rhs = lambda1 * z.integral_to(s)? / (area * area);
        if k == 1 {
            start_values = (lhs, rhs);
        }
        ball_worst = ball_worst.max((lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE));
    }

    let dist = LevelDistribution::from_field(u1, p)?;
    let u_sharp = decreasing_rearrangement(u1, p)?;
    let inconclusive = dist.triangles.len() < MIN_TRIANGLES_PER_STEP * m;
    let mut excess = f64::NEG_INFINITY;
    for k in 1..m {
        let s = dist.total_volume * k as f64 / m as f64;
        let t = dist.level_at(s);
        let slope = 1.0 / dist.density(t);
        let area = ball_surface(radius_from_volume(s, p)?, p)?;
        let rhs = lambda1 * u_sharp.integral_to(s) / (area * area);
        excess = excess.max((slope - rhs) / rhs);
    }
    Ok(ChitiOdeReport {
        ball_max_relative_residual: ball_worst,
        ball_pass: ball_worst <= BALL_RELATION_TOL,
        domain_max_relative_excess: excess,
        domain_pass: excess <= DOMAIN_RELATION_ALLOWANCE,
        inconclusive,
        grid_size: m,
        start_values,
    })
}

/// Point masses on the unit hyperboloid.
#[derive(Debug, Clone)]
pub struct WeightedPoints {
    pub points: Vec<MinkowskiPoint>,
    pub weights: Vec<f64>,
}

impl WeightedPoints {
    pub fn new(points: Vec<MinkowskiPoint>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() || points.is_empty() {
            return domain("need equally many points and weights, at least one");
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return domain("weights must be finite and non-negative");
        }
        let dim = points[0].dim();
        if points.iter().any(|p| p.dim() != dim) {
            return domain("points of mixed dimension");
        }
        if !(weights.iter().sum::<f64>() > 0.0) {
            return domain("total weight must be positive");
        }
        Ok(Self { points, weights })
    }

    /// The measure `u^2 dV` of a field, one atom per quadrature cell.
    pub fn from_field(field: &DiscreteField, p: &SpaceParams) -> Result<Self> {
        check_field(field, p)?;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (x, w, u) in field.cells() {
            points.push(disk_to_minkowski(&x, p)?);
            weights.push(w * u * u);
        }
        Self::new(points, weights)
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    /// The measure moved by `boost`.
    pub fn transformed(&self, boost: &LorentzBoost) -> Self {
        Self {
            points: self.points.iter().map(|p| boost.apply(p)).collect(),
            weights: self.weights.clone(),
        }
    }

    /// Euclidean radius of the smallest origin-centered ball containing `Pi` of the support.
    pub fn enclosing_radius(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.spatial().iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

const CHUNK: usize = 2048;

/// Deterministic chunked parallel sum of vectors.
fn chunked_sum<F>(len: usize, dim: usize, f: F) -> Vec<f64>
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    let parts: Vec<Vec<f64>> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; dim];
            for i in c * CHUNK..((c + 1) * CHUNK).min(len) {
                f(i, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; dim];
    for part in parts {
        total.iter_mut().zip(part).for_each(|(t, v)| *t += v);
    }
    total
}

/// `v(z) = sum w y g(Theta) / sinh(Theta)` with `Theta` the unit-curvature
/// distance from `z`; `g` takes geodesic distance at curvature radius `rho`.
fn moment_vector<G: Fn(f64) -> f64 + Sync>(m: &WeightedPoints, g: &G, rho: f64, z: &MinkowskiPoint) -> Vec<f64> {
    let dim = m.dim() + 1;
    chunked_sum(m.points.len(), dim, |i, acc| {
        let y = &m.points[i];
        let t = geodesic_distance(z, y).max(1e-10);
        let c = m.weights[i] * g(rho * t) / t.sinh();
        acc.iter_mut().zip(y.coords()).for_each(|(a, v)| *a += c * v);
    })
}

/// `int P_i u^2 dV = sum w chi_i g(theta)` for the measure as given.
pub fn first_moments<G: Fn(f64) -> f64 + Sync>(m: &WeightedPoints, g: &G, rho: f64) -> Vec<f64> {
    let n = m.dim();
    chunked_sum(m.points.len(), n, |i, acc| {
        let y = &m.points[i];
        let s = y.spatial().iter().map(|v| v * v).sum::<f64>().sqrt();
        if s < 1e-300 {
            return;
        }
        let c = m.weights[i] * g(rho * s.asinh()) / s;
        acc.iter_mut().zip(y.spatial()).for_each(|(a, v)| *a += c * v);
    })
}

fn lift(xi: &[f64]) -> MinkowskiPoint {
    MinkowskiPoint::from_spatial(xi)
}

struct Probe {
    /// `w(xi) = Pi(v - v_{n+1} / z_{n+1} z)` with `z` the lift of `xi`.
    w: Vec<f64>,
    vt: f64,
    /// First moments of the measure moved so that `z` sits at the origin.
    moment: f64,
}

fn probe<G: Fn(f64) -> f64 + Sync>(m: &WeightedPoints, g: &G, rho: f64, xi: &[f64]) -> Probe {
    let z = lift(xi);
    let v = moment_vector(m, g, rho, &z);
    let n = xi.len();
    let ratio = v[n] / z.time();
    let w = (0..n).map(|i| v[i] - ratio * xi[i]).collect();
    let moved = boost_to_origin(&z).apply_vector(&v);
    Probe {
        w,
        vt: v[n],
        moment: norm(&moved[..n]),
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn clamp_to(xi: Vec<f64>, cap: f64) -> Vec<f64> {
    let r = norm(&xi);
    if r <= cap {
        xi
    } else {
        xi.into_iter().map(|v| v * cap / r).collect()
    }
}

/// Result of the center-of-mass normalization.
#[derive(Debug, Clone)]
pub struct CenterOfMassState {
    /// Hyperboloid point that the boost moves to the origin.
    pub z0: MinkowskiPoint,
    pub boost: LorentzBoost,
    /// First moments after the shift.
    pub residual: Vec<f64>,
    pub residual_norm: f64,
    /// `1e-8 * total weight * sup g`.
    pub tolerance: f64,
    pub iterations: usize,
    /// Different starting points reached different zeros.
    pub multiple_zeros: bool,
}

pub const MOMENT_TOL: f64 = 1e-8;
const NEWTON_ITERS: usize = 60;
const FIXED_POINT_ITERS: usize = 2000;
const DAMPING: f64 = 0.5;

fn solve_from<G: Fn(f64) -> f64 + Sync>(
    m: &WeightedPoints,
    g: &G,
    rho: f64,
    start: Vec<f64>,
    cap: f64,
    target: f64,
) -> (Vec<f64>, f64, usize) {
    let n = start.len();
    let mut xi = clamp_to(start, cap);
    let mut cur = probe(m, g, rho, &xi);
    let mut iters = 0;
    // Newton on w with a finite-difference Jacobian, backtracking on the moment.
    for _ in 0..NEWTON_ITERS {
        if cur.moment <= target {
            return (xi, cur.moment, iters);
        }
        iters += 1;
        let h = 1e-6 * (1.0 + norm(&xi));
        let mut jac = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut a = xi.clone();
            let mut b = xi.clone();
            a[j] += h;
            b[j] -= h;
            let (wa, wb) = (probe(m, g, rho, &a).w, probe(m, g, rho, &b).w);
            for i in 0..n {
                jac[(i, j)] = (wa[i] - wb[i]) / (2.0 * h);
            }
        }
        let Some(step) = jac.lu().solve(&DVector::from_column_slice(&cur.w)) else {
            break;
        };
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let cand = clamp_to((0..n).map(|i| xi[i] - t * step[i]).collect(), cap);
            let next = probe(m, g, rho, &cand);
            if next.moment < cur.moment {
                xi = cand;
                cur = next;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    // Damped fixed-point iteration along w, which points inward on the enclosing sphere.
    for _ in 0..FIXED_POINT_ITERS {
        if cur.moment <= target {
            break;
        }
        iters += 1;
        let zt = lift(&xi).time();
        xi = clamp_to((0..n).map(|i| xi[i] + DAMPING * cur.w[i] * zt / cur.vt).collect(), cap);
        cur = probe(m, g, rho, &xi);
    }
    (xi, cur.moment, iters)
}

/// Finds a Lorentz boost after which `int chi_i g(theta) u^2 dV = 0` for all `i`.
///
/// `g` is evaluated at geodesic distances for curvature radius `rho`.
pub fn center_of_mass_shift<G: Fn(f64) -> f64 + Sync>(m: &WeightedPoints, g: G, rho: f64) -> Result<CenterOfMassState> {
    let n = m.dim();
    let total = m.total();
    let r_enc = m.enclosing_radius();
    // sup g over the distances that can occur between points of the support.
    let max_dist = 2.0 * r_enc.asinh() * rho;
    let sup_g = (0..=200)
        .map(|k| g(max_dist * k as f64 / 200.0).abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let tolerance = MOMENT_TOL * total * sup_g;

    let mut starts = vec![vec![0.0; n]];
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut s = vec![0.0; n];
            s[i] = sign * 0.5 * r_enc;
            starts.push(s);
        }
    }
    let target = 1e-3 * tolerance;
    let cap = r_enc * (1.0 + 1e-9);
    let runs: Vec<(Vec<f64>, f64, usize)> =
        starts.into_iter().map(|s| solve_from(m, &g, rho, s, cap, target)).collect();
    let (xi, best_w, iters) = runs
        .iter()
        .find(|r| r.1 <= target)
        .or_else(|| runs.iter().min_by(|a, b| a.1.total_cmp(&b.1)))
        .cloned()
        .unwrap();
    let converged: Vec<&Vec<f64>> = runs.iter().filter(|r| r.1 <= target).map(|r| &r.0).collect();
    let multiple_zeros = converged
        .iter()
        .any(|other| norm(&other.iter().zip(&xi).map(|(a, b)| a - b).collect::<Vec<_>>()) > 1e-6 * (1.0 + norm(&xi)));

    let z0 = lift(&xi);
    let boost = boost_to_origin(&z0);
    let residual = first_moments(&m.transformed(&boost), &g, rho);
    let residual_norm = norm(&residual);
    if !(residual_norm <= tolerance) {
        return Err(Error::NoConvergence {
            what: "center of mass",
            iterations: iters,
            residual: residual_norm.max(best_w),
        });
    }
    Ok(CenterOfMassState {
        z0,
        boost,
        residual,
        residual_norm,
        tolerance,
        iterations: iters,
        multiple_zeros,
    })
}

/// `|Pi v(z)| / v_{n+1}(z)` and the bound `R / sqrt(R^2 + 1)` for the enclosing radius.
pub fn cone_ratio<G: Fn(f64) -> f64 + Sync>(m: &WeightedPoints, g: &G, rho: f64, z: &MinkowskiPoint) -> (f64, f64) {
    let v = moment_vector(m, g, rho, z);
    let n = m.dim();
    let r = m.enclosing_radius();
    (norm(&v[..n]) / v[n], r / (r * r + 1.0).sqrt())
}

/// Moves mesh vertices and the field with them by a disk isometry.
pub fn shift_field(field: &DiscreteField, boost: &LorentzBoost) -> Result<DiscreteField> {
    let mesh: TriMesh = field.mesh().transformed(boost)?;
    DiscreteField::new(std::sync::Arc::new(mesh), field.values.clone())
}
