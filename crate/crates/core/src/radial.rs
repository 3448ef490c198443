//! Radial modes of the Laplacian on geodesic balls.
//!
//! A separated eigenfunction `z_l(theta) Y_l(chi)` satisfies
//!
//! ```text
//! z'' + nu coth(theta/rho)/rho z' - l(l+n-2)/(rho^2 sinh^2(theta/rho)) z + lambda z = 0
//! ```
//!
//! with `z ~ theta^l` at the origin. Everything is integrated in the
//! unit-curvature variable `x = theta/rho` with spectral parameter
//! `lambda rho^2`, then mapped back via `z(theta) = rho^l z_unit(theta/rho)`.
//! Beyond `x = 25` the equivalent Schrödinger form
//! `v = sinh(x)^{nu/2} z`, `v'' = (V - lambda) v` is used.
//! States are kept as a mantissa and a natural-log scale so that nothing
//! overflows for large `lambda theta`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::SpaceParams;
use crate::ode::{self, Flow, OdeConfig};
use crate::roots::brent;

/// Hand-off point to the Schrödinger form, in units of `rho`.
const SCHRODINGER_FROM: f64 = 25.0;
/// Largest supported radius, in units of `rho`.
pub const MAX_RADIUS: f64 = 50.0;

/// Angular momentum `l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RadialMode(u32);

impl RadialMode {
    pub const GROUND: RadialMode = RadialMode(0);
    pub const FIRST: RadialMode = RadialMode(1);

    pub fn new(l: u32) -> Self {
        Self(l)
    }

    pub fn l(self) -> u32 {
        self.0
    }

    /// `l (l + n - 2)`.
    pub(crate) fn angular(self, nu: f64) -> f64 {
        let l = self.0 as f64;
        l * (l + nu - 1.0)
    }
}

/// Integrator settings for the shooting method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingConfig {
    /// Where the series solution hands over to the integrator (geodesic units).
    pub theta_start: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Step cap in geodesic units.
    pub max_step: f64,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            theta_start: 1e-4,
            rel_tol: 1e-11,
            abs_tol: 1e-13,
            max_step: 0.05,
        }
    }
}

impl ShootingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta_start > 0.0 && self.theta_start <= 1e-2) {
            return domain(format!("theta_start must lie in (0, 1e-2], got {}", self.theta_start));
        }
        for (name, v) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(v > 0.0 && v <= 1e-3) {
                return domain(format!("{name} must lie in (0, 1e-3], got {v}"));
            }
        }
        if !(self.max_step > 0.0) {
            return domain(format!("max_step must be positive, got {}", self.max_step));
        }
        Ok(())
    }
}

/// A solution value `z * exp(log_scale)`, `z' * exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialSample {
    pub theta: f64,
    pub z: f64,
    pub dz: f64,
    pub log_scale: f64,
}

impl RadialSample {
    pub fn value(&self) -> f64 {
        self.z * self.log_scale.exp()
    }

    pub fn derivative(&self) -> f64 {
        self.dz * self.log_scale.exp()
    }
}

/// Unit-curvature integrator state at one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Node {
    x: f64,
    /// `(z, z')` below the hand-off point, `(v, v')` above.
    y: [f64; 2],
    log: f64,
    schrodinger: bool,
}

/// Frozen problem data in unit-curvature form.
#[derive(Debug, Clone, Copy)]
struct Problem {
    nu: f64,
    angular: f64,
    lambda: f64,
    ode: OdeConfig,
}

impl Problem {
    fn new(mode: RadialMode, lambda: f64, p: &SpaceParams, cfg: &ShootingConfig) -> Self {
        let rho = p.rho();
        let lam = lambda * rho * rho;
        let wave_cap = if lam > 0.0 { 0.5 / lam.sqrt() } else { f64::INFINITY };
        Self {
            nu: p.nu(),
            angular: mode.angular(p.nu()),
            lambda: lam,
            ode: OdeConfig {
                rel_tol: cfg.rel_tol,
                abs_tol: cfg.abs_tol,
                max_step: (cfg.max_step / rho).min(wave_cap),
                initial_step: None,
                abs_tol_relative: false,
            },
        }
    }

    fn rhs_z(&self, x: f64, y: &[f64; 2]) -> [f64; 2] {
        let s = x.sinh();
        let coth = x.cosh() / s;
        [
            y[1],
            -self.nu * coth * y[1] + self.angular / (s * s) * y[0] - self.lambda * y[0],
        ]
    }

    fn potential(&self, x: f64) -> f64 {
        let s = x.sinh();
        let csch2 = 1.0 / (s * s);
        let nu = self.nu;
        0.25 * nu * nu + (0.25 * nu * (nu - 2.0) + self.angular) * csch2
    }

    fn rhs_v(&self, x: f64, y: &[f64; 2]) -> [f64; 2] {
        [y[1], (self.potential(x) - self.lambda) * y[0]]
    }

    fn rhs(&self, schrodinger: bool) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
        move |x, y| if schrodinger { self.rhs_v(x, y) } else { self.rhs_z(x, y) }
    }

    /// `ln sinh(x)` for the Schrödinger substitution.
    fn ln_sinh(x: f64) -> f64 {
        if x > 20.0 {
            x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p()
        } else {
            x.sinh().ln()
        }
    }

    /// Converts a node to unit-curvature `(z, z', log)`.
    fn unit_values(&self, node: &Node) -> (f64, f64, f64) {
        if !node.schrodinger {
            return (node.y[0], node.y[1], node.log);
        }
        let x = node.x;
        let coth = 1.0 / x.tanh();
        let half = 0.5 * self.nu;
        let z = node.y[0];
        let dz = node.y[1] - half * coth * node.y[0];
        (z, dz, node.log - half * Self::ln_sinh(x))
    }

    /// Switches a z-form node at `x` to the Schrödinger form.
    fn to_schrodinger(&self, node: &Node) -> Node {
        let x = node.x;
        let half = 0.5 * self.nu;
        let coth = 1.0 / x.tanh();
        Node {
            x,
            y: [node.y[0], node.y[1] + half * coth * node.y[0]],
            log: node.log + half * Self::ln_sinh(x),
            schrodinger: true,
        }
    }

    /// Advances `node` to `x` with equal fixed steps; smooth in `x`.
    fn advance_smooth(&self, node: &Node, x: f64) -> Node {
        let span = (x - node.x).abs();
        if span == 0.0 {
            return *node;
        }
        let mut h = self.ode.max_step.min(0.1 * node.x.min(x));
        if self.lambda > 0.0 {
            h = h.min(0.1 / self.lambda.sqrt());
        }
        let steps = (span / h).ceil() as usize;
        let y = ode::fixed_steps(self.rhs(node.schrodinger), node.x, node.y, x, steps);
        Node { x, y, ..*node }
    }

    /// Advances `node` to `x` (which must not cross the hand-off point).
    fn advance(&self, node: &Node, x: f64) -> Result<Node> {
        if x == node.x {
            return Ok(*node);
        }
        let mut cfg = self.ode;
        cfg.initial_step = Some((x - node.x).abs());
        let y = ode::solve(self.rhs(node.schrodinger), node.x, node.y, x, &cfg)?;
        Ok(Node { x, y, ..*node })
    }
}

/// Keeps the mantissa within a few orders of magnitude of one.
fn renormalize(y: &mut [f64; 2], log: &mut f64) {
    let m = y[0].abs().max(y[1].abs());
    if m == 0.0 || !m.is_finite() {
        return;
    }
    if !(2f64.powi(-20)..=2f64.powi(20)).contains(&m) {
        let k = m.log2().round() as i32;
        let f = 2f64.powi(-k);
        y[0] *= f;
        y[1] *= f;
        *log += k as f64 * std::f64::consts::LN_2;
    }
}

/// Series coefficients `(a, b)` of `z = x^l (1 + a x^2 + b x^4 + ...)` at
/// unit curvature with spectral parameter `lam`.
pub(crate) fn series_coefficients(l: u32, nu: f64, lam: f64) -> (f64, f64) {
    let lf = l as f64;
    let ang = lf * (lf + nu - 1.0);
    let a = -(lam + (nu * lf + ang) / 3.0) / (4.0 * lf + 2.0 + 2.0 * nu);
    let b = -(a * (nu * (lf + 2.0) / 3.0 + ang / 3.0 + lam) - nu * lf / 45.0 - ang / 15.0)
        / (8.0 * lf + 12.0 + 4.0 * nu);
    (a, b)
}

/// Unit-curvature series value and derivative at `x`.
fn series_unit(l: u32, nu: f64, lam: f64, x: f64) -> (f64, f64) {
    let (a, b) = series_coefficients(l, nu, lam);
    let lf = l as f64;
    let x2 = x * x;
    let poly = 1.0 + a * x2 + b * x2 * x2;
    let dpoly = 2.0 * a * x + 4.0 * b * x2 * x;
    let xl = x.powi(l as i32);
    let z = xl * poly;
    let dz = if l == 0 {
        dpoly
    } else {
        lf * x.powi(l as i32 - 1) * poly + xl * dpoly
    };
    (z, dz)
}

/// Frobenius-series values `(z_l, z_l')` at a small radius, normalized so
/// that `z_l(theta) ~ theta^l`.
pub fn series_start(mode: RadialMode, lambda: f64, p: &SpaceParams, theta_start: f64) -> Result<(f64, f64)> {
    if !(theta_start > 0.0 && theta_start <= 1e-2) {
        return domain(format!("theta_start must lie in (0, 1e-2], got {theta_start}"));
    }
    let rho = p.rho();
    let (z, dz) = series_unit(mode.l(), p.nu(), lambda * rho * rho, theta_start / rho);
    let scale = rho.powi(mode.l() as i32);
    Ok((scale * z, scale * dz / rho))
}

/// A radial mode integrated from the origin out to `theta_max`.
#[derive(Debug, Clone)]
pub struct RadialSolution {
    pub lambda: f64,
    pub mode: RadialMode,
    pub p: SpaceParams,
    pub theta_max: f64,
    cfg: ShootingConfig,
    problem: Problem,
    nodes: Vec<Node>,
    zeros: Vec<f64>,
}

impl RadialSolution {
    /// Zeros in `(0, theta_max]`, increasing.
    pub fn zeros(&self) -> &[f64] {
        &self.zeros
    }

    pub fn config(&self) -> &ShootingConfig {
        &self.cfg
    }

    /// Accepted integrator steps, in geodesic units.
    pub fn samples(&self) -> Vec<RadialSample> {
        self.nodes.iter().map(|n| self.physical(n)).collect()
    }

    fn physical(&self, node: &Node) -> RadialSample {
        let rho = self.p.rho();
        let (z, dz, log) = self.problem.unit_values(node);
        RadialSample {
            theta: node.x * rho,
            z,
            dz: dz / rho,
            log_scale: log + self.mode.l() as f64 * rho.ln(),
        }
    }

    fn x_start(&self) -> f64 {
        self.nodes[0].x
    }

    /// `(z, z')` at `theta` with the log scale kept separate.
    pub fn sample_at(&self, theta: f64) -> Result<RadialSample> {
        let rho = self.p.rho();
        let x = theta / rho;
        if !(theta >= 0.0 && x <= self.nodes.last().unwrap().x * (1.0 + 1e-14)) {
            return domain(format!("theta = {theta} outside [0, {}]", self.theta_max));
        }
        if x <= self.x_start() {
            let (z, dz) = series_unit(self.mode.l(), self.problem.nu, self.problem.lambda, x);
            let node = Node {
                x,
                y: [z, dz],
                log: 0.0,
                schrodinger: false,
            };
            return Ok(self.physical(&node));
        }
        // Anchor at the nearest accepted step on the same side of the hand-off.
        let right = self.nodes.partition_point(|n| n.x <= x).min(self.nodes.len() - 1);
        let left = right.saturating_sub(1);
        let pick = |i: usize| {
            let n = &self.nodes[i];
            (n.schrodinger == (x > SCHRODINGER_FROM)).then_some(((n.x - x).abs(), i))
        };
        let idx = [pick(left), pick(right)]
            .into_iter()
            .flatten()
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, i)| i)
            .unwrap_or(left);
        let node = self.problem.advance_smooth(&self.nodes[idx], x);
        Ok(self.physical(&node))
    }

    /// `(z(theta), z'(theta))`; overflows to infinity only for astronomically
    /// scaled states.
    pub fn eval(&self, theta: f64) -> Result<(f64, f64)> {
        let s = self.sample_at(theta)?;
        Ok((s.value(), s.derivative()))
    }

    /// Number of zeros strictly below `theta`.
    pub fn zeros_below(&self, theta: f64) -> usize {
        self.zeros.partition_point(|&z| z < theta)
    }
}

/// Integrates from the origin; stops after `zero_limit` zeros when given.
fn shoot(
    mode: RadialMode,
    lambda: f64,
    p: &SpaceParams,
    theta_max: f64,
    cfg: &ShootingConfig,
    zero_limit: Option<usize>,
) -> Result<RadialSolution> {
    cfg.validate()?;
    if !lambda.is_finite() {
        return domain(format!("lambda must be finite, got {lambda}"));
    }
    let rho = p.rho();
    let problem = Problem::new(mode, lambda, p, cfg);
    let mut x0 = cfg.theta_start / rho;
    if problem.lambda > 0.0 {
        x0 = x0.min(1e-2 / problem.lambda.sqrt());
    }
    let x_max = theta_max / rho;
    if !(x_max > x0) || x_max > MAX_RADIUS * (1.0 + 1e-12) {
        return domain(format!(
            "theta_max must lie in (theta_start, {}], got {theta_max}",
            MAX_RADIUS * rho
        ));
    }

    let (z, dz) = series_unit(mode.l(), problem.nu, problem.lambda, x0);
    let mut first = Node {
        x: x0,
        y: [z, dz],
        log: 0.0,
        schrodinger: false,
    };
    renormalize(&mut first.y, &mut first.log);
    let mut nodes = vec![first];
    let mut zeros = Vec::new();
    let mut done = false;

    let legs: [(bool, f64); 2] = [
        (false, x_max.min(SCHRODINGER_FROM)),
        (true, x_max),
    ];
    for (schrodinger, end) in legs {
        let start = *nodes.last().unwrap();
        if done || end <= start.x {
            continue;
        }
        let start = if schrodinger && !start.schrodinger {
            let s = problem.to_schrodinger(&start);
            *nodes.last_mut().unwrap() = s;
            s
        } else {
            start
        };
        let mut log = start.log;
        let mut failure = None;
        let rhs = problem.rhs(schrodinger);
        let mut cfg_leg = problem.ode;
        cfg_leg.initial_step = Some((start.x * 0.1).min(problem.ode.max_step));
        ode::integrate(&rhs, start.x, start.y, end, &cfg_leg, &[], |step| {
            renormalize(step.y, &mut log);
            let prev = *nodes.last().unwrap();
            let node = Node {
                x: step.t,
                y: *step.y,
                log,
                schrodinger,
            };
            if prev.y[0] != 0.0 && (node.y[0] == 0.0 || node.y[0].signum() != prev.y[0].signum()) {
                match refine_zero(&problem, &prev, &node) {
                    Ok(x) => zeros.push(x * rho),
                    Err(e) => {
                        failure = Some(e);
                        return Flow::Stop;
                    }
                }
            }
            nodes.push(node);
            if zero_limit.is_some_and(|k| zeros.len() >= k) {
                done = true;
                return Flow::Stop;
            }
            Flow::Continue
        })
        .map_err(|e| rescale_error(e, rho))?;
        if let Some(e) = failure {
            return Err(rescale_error(e, rho));
        }
    }

    Ok(RadialSolution {
        lambda,
        mode,
        p: *p,
        theta_max: nodes.last().unwrap().x * rho,
        cfg: *cfg,
        problem,
        nodes,
        zeros,
    })
}

fn rescale_error(e: Error, rho: f64) -> Error {
    match e {
        Error::Integration { theta, reason } => Error::Integration {
            theta: theta * rho,
            reason,
        },
        other => other,
    }
}

/// Locates the sign change of `z` between two consecutive nodes.
fn refine_zero(problem: &Problem, left: &Node, right: &Node) -> Result<f64> {
    if right.y[0] == 0.0 {
        return Ok(right.x);
    }
    // Rescale the right end onto the left's log scale; only signs matter.
    let f_left = left.y[0];
    let f_right = right.y[0];
    brent(
        |x| Ok(problem.advance(left, x)?.y[0]),
        left.x,
        right.x,
        f_left,
        f_right,
        1e-13 * right.x.max(1e-3),
    )
}

/// Integrates the mode `mode` at spectral parameter `lambda` on `(0, theta_max]`.
pub fn integrate_radial(
    mode: RadialMode,
    lambda: f64,
    p: &SpaceParams,
    theta_max: f64,
    cfg: &ShootingConfig,
) -> Result<RadialSolution> {
    shoot(mode, lambda, p, theta_max, cfg, None)
}

/// First positive zero of `z_l`; searched up to `50 rho`.
pub fn first_zero(mode: RadialMode, lambda: f64, p: &SpaceParams, cfg: &ShootingConfig) -> Result<f64> {
    let cap = MAX_RADIUS * p.rho();
    let sol = shoot(mode, lambda, p, cap, cfg, Some(1))?;
    sol.zeros.first().copied().ok_or(Error::ZeroNotFound {
        l: mode.l(),
        lambda,
        cap,
    })
}

/// Number of zeros of `z_l` in `(0, theta0)`.
pub fn count_zeros(mode: RadialMode, lambda: f64, p: &SpaceParams, theta0: f64, cfg: &ShootingConfig) -> Result<usize> {
    if !(theta0 > 0.0) {
        return domain(format!("theta0 must be positive, got {theta0}"));
    }
    let x0 = cfg.theta_start / p.rho();
    if theta0 / p.rho() <= x0 {
        return Ok(0);
    }
    let sol = shoot(mode, lambda, p, theta0, cfg, None)?;
    Ok(sol.zeros_below(theta0))
}
