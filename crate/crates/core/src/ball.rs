//! Dirichlet eigenvalues of geodesic balls by shooting.
//!
//! The `k`-th eigenvalue of mode `l` on the ball of radius `theta0` is the
//! `lambda` at which the `k`-th zero of `z_l` reaches `theta0`. Brackets are
//! certified by zero counts (Sturm oscillation) and polished by Brent's method
//! on `lambda -> z_l(theta0; lambda)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{sphere_density, SpaceParams};
use crate::quadrature;
use crate::radial::{first_zero, integrate_radial, RadialMode, RadialSolution, ShootingConfig, MAX_RADIUS};
use crate::roots::brent;

/// Relative width at which the zero-count bisection hands over to Brent.
const BISECTION_REL: f64 = 1e-6;

/// One eigenvalue of a geodesic ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallEigenvalue {
    pub l: RadialMode,
    /// Index within the mode, starting at 1.
    pub k: usize,
    pub theta0: f64,
    pub p: SpaceParams,
    pub lambda: f64,
    /// Width of the final bracket around `lambda`.
    pub accuracy: f64,
}

fn check_ball_radius(theta0: f64, p: &SpaceParams) -> Result<()> {
    let cap = MAX_RADIUS * p.rho();
    if !(theta0 > 0.0 && theta0 <= cap) {
        return domain(format!("ball radius must lie in (0, {cap}], got {theta0}"));
    }
    Ok(())
}

/// Zero count in `(0, theta0)` and the value `z(theta0)`.
fn probe(mode: RadialMode, lambda: f64, theta0: f64, p: &SpaceParams, cfg: &ShootingConfig) -> Result<(usize, f64)> {
    let sol = integrate_radial(mode, lambda, p, theta0, cfg)?;
    let end = sol.sample_at(theta0)?;
    Ok((sol.zeros_below(theta0), end.value()))
}

/// Euclidean estimate of the first Bessel-type zero for mode `l` in dimension `n`.
fn euclidean_zero_estimate(l: u32, n: usize) -> f64 {
    l as f64 + n as f64 / 2.0 + 1.5
}

/// The `k`-th eigenvalue of mode `l` on the ball of radius `theta0`.
pub fn ball_eigenvalue_k(
    mode: RadialMode,
    k: usize,
    theta0: f64,
    p: &SpaceParams,
    cfg: &ShootingConfig,
) -> Result<BallEigenvalue> {
    check_ball_radius(theta0, p)?;
    if k == 0 {
        return domain("eigenvalue index starts at 1");
    }
    let bottom = p.spectral_bottom();
    let j = euclidean_zero_estimate(mode.l(), p.n()) + std::f64::consts::PI * (k - 1) as f64;
    let mut lo = bottom;
    let mut lo_val = probe(mode, lo, theta0, p, cfg)?.1;
    let mut hi = bottom + 4.0 * j * j / (theta0 * theta0);
    let (mut hi_count, mut hi_val) = probe(mode, hi, theta0, p, cfg)?;
    let mut grow = 0;
    while hi_count < k {
        lo = hi;
        lo_val = hi_val;
        hi = bottom + 2.0 * (hi - bottom);
        (hi_count, hi_val) = probe(mode, hi, theta0, p, cfg)?;
        grow += 1;
        if grow > 60 {
            return Err(Error::NoConvergence {
                what: "eigenvalue bracket growth",
                iterations: grow,
                residual: hi,
            });
        }
    }
    // Shrink until the count goes from k-1 to k across the bracket.
    let mut lo_count = probe(mode, lo, theta0, p, cfg)?.0;
    while hi_count != k || lo_count != k - 1 || (hi - lo) > BISECTION_REL * hi {
        let mid = 0.5 * (lo + hi);
        let (c, v) = probe(mode, mid, theta0, p, cfg)?;
        if c >= k {
            hi = mid;
            hi_count = c;
            hi_val = v;
        } else {
            lo = mid;
            lo_count = c;
            lo_val = v;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    let lambda = brent(
        |lam| probe(mode, lam, theta0, p, cfg).map(|(_, v)| v),
        lo,
        hi,
        lo_val,
        hi_val,
        1e-13 * hi,
    )?;
    Ok(BallEigenvalue {
        l: mode,
        k,
        theta0,
        p: *p,
        lambda,
        accuracy: (hi - lo).min(1e-12 * lambda),
    })
}

/// Lowest eigenvalue of mode `l` on the ball of radius `theta0`.
///
/// Mode 0 gives `lambda_1` of the ball and mode 1 gives `lambda_2`
/// (which is `n`-fold degenerate).
pub fn ball_eigenvalue(mode: RadialMode, theta0: f64, p: &SpaceParams) -> Result<BallEigenvalue> {
    ball_eigenvalue_k(mode, 1, theta0, p, &ShootingConfig::default())
}

/// `(lambda_1, lambda_2)` of a ball.
pub fn ball_lambdas(theta0: f64, p: &SpaceParams) -> Result<(f64, f64)> {
    let l1 = ball_eigenvalue(RadialMode::GROUND, theta0, p)?.lambda;
    let l2 = ball_eigenvalue(RadialMode::FIRST, theta0, p)?.lambda;
    Ok((l1, l2))
}

/// Radius of the ball whose first eigenvalue is `lambda`.
pub fn radius_for_lambda1(lambda: f64, p: &SpaceParams) -> Result<f64> {
    let cap = MAX_RADIUS * p.rho();
    if !(lambda > p.spectral_bottom()) || !lambda.is_finite() {
        return Err(Error::NotRepresentable { lambda, cap });
    }
    match first_zero(RadialMode::GROUND, lambda, p, &ShootingConfig::default()) {
        Err(Error::ZeroNotFound { .. }) => Err(Error::NotRepresentable { lambda, cap }),
        other => other,
    }
}

/// One row of a ratio curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub theta0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub ratio: f64,
}

/// `lambda_2 / lambda_1` of balls along a radius grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioCurve {
    pub p: SpaceParams,
    pub rows: Vec<RatioRow>,
    /// Ratios decrease along the grid, up to a relative slack of `1e-9`.
    pub monotone: bool,
}

pub const RATIO_SLACK: f64 = 1e-9;

pub fn ratio_curve(theta_grid: &[f64], p: &SpaceParams) -> Result<RatioCurve> {
    if theta_grid.is_empty() {
        return domain("radius grid is empty");
    }
    if theta_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return domain("radius grid must be strictly increasing");
    }
    for &t in theta_grid {
        check_ball_radius(t, p)?;
    }
    let rows = theta_grid
        .par_iter()
        .map(|&theta0| {
            let (lambda1, lambda2) = ball_lambdas(theta0, p)?;
            Ok(RatioRow {
                theta0,
                lambda1,
                lambda2,
                ratio: lambda2 / lambda1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let monotone = rows
        .windows(2)
        .all(|w| w[1].ratio < w[0].ratio * (1.0 + RATIO_SLACK));
    Ok(RatioCurve { p: *p, rows, monotone })
}

/// `Theta(c)`: radius in curvature `-1/rho^2` whose first eigenvalue equals
/// that of the ball of radius `c theta2` in curvature `-1/(c rho)^2`.
pub fn theta_map(c: f64, theta2: f64, p: &SpaceParams) -> Result<f64> {
    if !(c > 0.0 && c <= 1.0) {
        return domain(format!("scale must lie in (0, 1], got {c}"));
    }
    let scaled = p.scaled(c)?;
    let lambda = ball_eigenvalue(RadialMode::GROUND, c * theta2, &scaled)?.lambda;
    radius_for_lambda1(lambda, p)
}

/// Outcome of comparing balls of equal first eigenvalue in two curvatures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossCurvatureReport {
    pub rho1: f64,
    pub rho2: f64,
    pub theta2: f64,
    pub theta1: f64,
    pub lambda1: f64,
    /// `lambda_2(theta1, rho1)`.
    pub lambda2_left: f64,
    /// `lambda_2(theta2, rho2)`.
    pub lambda2_right: f64,
    pub radius_order_holds: bool,
    pub lambda2_order_holds: bool,
    pub pass: bool,
}

fn check_curvatures(rho1: f64, rho2: f64) -> Result<()> {
    if !(rho1 > 0.0 && rho1 <= rho2) {
        return domain(format!("need 0 < rho1 <= rho2, got {rho1}, {rho2}"));
    }
    Ok(())
}

/// Finds `theta1` with `lambda_1(theta1, rho1) = lambda_1(theta2, rho2)` and
/// checks `theta1 > theta2` and `lambda_2(theta1, rho1) <= lambda_2(theta2, rho2)`.
pub fn cross_curvature_compare(rho1: f64, rho2: f64, theta2: f64, n: usize) -> Result<CrossCurvatureReport> {
    check_curvatures(rho1, rho2)?;
    let p1 = SpaceParams::new(n, rho1)?;
    let p2 = SpaceParams::new(n, rho2)?;
    let (lambda1, lambda2_right) = ball_lambdas(theta2, &p2)?;
    let theta1 = radius_for_lambda1(lambda1, &p1)?;
    let lambda2_left = ball_eigenvalue(RadialMode::FIRST, theta1, &p1)?.lambda;
    let radius_order_holds = if rho1 < rho2 {
        theta1 > theta2
    } else {
        (theta1 - theta2).abs() <= 1e-8 * theta2
    };
    let lambda2_order_holds = lambda2_left <= lambda2_right * (1.0 + 1e-9);
    Ok(CrossCurvatureReport {
        rho1,
        rho2,
        theta2,
        theta1,
        lambda1,
        lambda2_left,
        lambda2_right,
        radius_order_holds,
        lambda2_order_holds,
        pass: radius_order_holds && lambda2_order_holds,
    })
}

/// Sign changes of a sampled function, ignoring samples with `|v| <= floor`.
/// Returns the count and the midpoint of the first change.
pub(crate) fn sign_changes(xs: &[f64], vs: &[f64], floor: f64) -> (usize, Option<f64>) {
    let mut count = 0;
    let mut first = None;
    let mut last: Option<(f64, f64)> = None;
    for (&x, &v) in xs.iter().zip(vs) {
        if v.abs() <= floor {
            continue;
        }
        if let Some((lx, lv)) = last {
            if lv.signum() != v.signum() {
                count += 1;
                if first.is_none() {
                    first = Some(0.5 * (lx + x));
                }
            }
        }
        last = Some((x, v));
    }
    (count, first)
}

/// Ground state of a ball, normalized to unit `L^2` norm in hyperbolic measure.
#[derive(Debug, Clone)]
pub(crate) struct NormalizedGround {
    sol: RadialSolution,
    pub(crate) theta0: f64,
    pub(crate) lambda: f64,
    scale: f64,
}

impl NormalizedGround {
    pub(crate) fn new(theta0: f64, p: &SpaceParams) -> Result<Self> {
        let lambda = ball_eigenvalue(RadialMode::GROUND, theta0, p)?.lambda;
        let sol = integrate_radial(RadialMode::GROUND, lambda, p, theta0, &ShootingConfig::default())?;
        let norm2 = quadrature::integrate(
            |t| {
                let z = sol.eval(t).map(|v| v.0).unwrap_or(f64::NAN);
                z * z * sphere_density(t, p)
            },
            0.0,
            theta0,
            1e-11,
        );
        if !(norm2 > 0.0 && norm2.is_finite()) {
            return Err(Error::Normalization(format!("ground state norm {norm2}")));
        }
        Ok(Self {
            sol,
            theta0,
            lambda,
            scale: norm2.sqrt().recip(),
        })
    }

    /// Derivative at `theta`, zero outside the ball.
    pub(crate) fn derivative(&self, theta: f64) -> Result<f64> {
        if theta >= self.theta0 {
            return Ok(0.0);
        }
        Ok(self.scale * self.sol.eval(theta)?.1)
    }

    /// Value at `theta`, extended by zero outside the ball.
    pub(crate) fn value(&self, theta: f64) -> Result<f64> {
        if theta >= self.theta0 {
            return Ok(0.0);
        }
        Ok(self.scale * self.sol.eval(theta)?.0)
    }
}

/// Crossing behaviour of the two normalized ground states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingFactsReport {
    pub theta1: f64,
    pub theta2: f64,
    /// `(gamma, sign changes of y0 - gamma z0 on [0, theta1])`.
    pub single_crossing: Vec<(f64, usize)>,
    /// Sign changes of `z0 A'_{rho2} - y0 A'_{rho1}` on `(0, theta1)`.
    pub weighted_crossings: usize,
    pub theta5: Option<f64>,
    /// Before `theta5` the `z0` side dominates, after it the `y0` side.
    pub weighted_order_holds: bool,
    pub pass: bool,
}

pub const CROSSING_GAMMAS: [f64; 3] = [0.5, 1.0, 2.0];

/// Checks that `y0` and `gamma z0` cross at most once and that the
/// volume-weighted ground states cross exactly once, inside `(0, theta2)`.
pub fn crossing_facts_check(rho1: f64, rho2: f64, theta2: f64, n: usize) -> Result<CrossingFactsReport> {
    check_curvatures(rho1, rho2)?;
    let p1 = SpaceParams::new(n, rho1)?;
    let p2 = SpaceParams::new(n, rho2)?;
    let lambda = ball_eigenvalue(RadialMode::GROUND, theta2, &p2)?.lambda;
    let theta1 = radius_for_lambda1(lambda, &p1)?;
    let y0 = NormalizedGround::new(theta1, &p1)?;
    let z0 = NormalizedGround::new(theta2, &p2)?;

    let m = 2000;
    let xs: Vec<f64> = (0..=m).map(|i| theta1 * i as f64 / m as f64).collect();
    let ys = xs.iter().map(|&t| y0.value(t)).collect::<Result<Vec<_>>>()?;
    let zs = xs.iter().map(|&t| z0.value(t)).collect::<Result<Vec<_>>>()?;
    let peak = ys.iter().chain(&zs).fold(0.0f64, |a, v| a.max(v.abs()));
    let floor = 1e-9 * peak;

    let single_crossing: Vec<(f64, usize)> = CROSSING_GAMMAS
        .iter()
        .map(|&g| {
            let diff: Vec<f64> = ys.iter().zip(&zs).map(|(y, z)| y - g * z).collect();
            (g, sign_changes(&xs, &diff, floor).0)
        })
        .collect();

    // Divide by A'_{rho1} so the comparison stays well scaled at the origin.
    let weighted: Vec<f64> = xs
        .iter()
        .zip(ys.iter().zip(&zs))
        .map(|(&t, (y, z))| {
            if t == 0.0 {
                return z - y;
            }
            let ratio = sphere_density(t, &p2) / sphere_density(t, &p1);
            z * ratio - y
        })
        .collect();
    let (weighted_crossings, theta5) = sign_changes(&xs[..m], &weighted[..m], floor);
    let identical = rho1 == rho2;
    let weighted_order_holds = match theta5 {
        Some(t5) => xs
            .iter()
            .zip(&weighted)
            .take(m)
            .all(|(&t, &w)| w.abs() <= floor || (t < t5) == (w > 0.0)),
        None => identical,
    };
    let single_ok = single_crossing.iter().all(|&(_, c)| c <= 1);
    let weighted_ok = if identical {
        weighted_crossings == 0
    } else {
        weighted_crossings == 1 && theta5.is_some_and(|t| t > 0.0 && t < theta2)
    };
    Ok(CrossingFactsReport {
        theta1,
        theta2,
        single_crossing,
        weighted_crossings,
        theta5,
        weighted_order_holds,
        pass: single_ok && weighted_ok && weighted_order_holds,
    })
}
