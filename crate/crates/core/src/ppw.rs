//! Auxiliary functions of the gap argument on the ball `S_1` whose first
//! eigenvalue matches the domain's.
//!
//! With `z_0` the ground state and `z_1` the radial part of the second
//! eigenfunction of `S_1`, the test functions are built from
//! `g = z_1 / z_0` (frozen at its boundary value beyond the ball) and
//! `B = g'^2 + nu g^2 / sinh^2`. Their monotonicity is reduced to properties
//! of `q = theta g'/g`, which solves the Riccati equation `q' = T(theta, q)`,
//! and of the function `Z_y = T'|_{T=0}`.
//!
//! Everything here lives at unit curvature: the argument `x` of the
//! unit-level functions is `theta / rho`, and `epsilon`, `lambda_1` are the
//! unit-curvature values `rho^2 lambda`. Physical accessors are provided
//! for `g` and `B`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ball::ball_lambdas;
use crate::error::{domain, Error, Result};
use crate::geometry::SpaceParams;
use crate::ode::{self, Flow, OdeConfig};
use crate::radial::{series_coefficients, MAX_RADIUS};
use crate::roots::brent;

/// Default number of interior grid points.
pub const DEFAULT_GRID: usize = 512;
/// Slack for "monotone" and sign assertions on the sampled grid.
pub const MONOTONE_SLACK: f64 = 1e-9;
pub const SIGN_SLACK: f64 = 1e-8;
pub const RICCATI_TOL: f64 = 1e-7;

/// `[z0, z0', z1, z1', W]` with `W = z1' z0 - z1 z0'`.
type State = [f64; 5];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct UnitBall {
    x_tilde: f64,
    nu: f64,
    lambda1: f64,
    lambda2: f64,
    eps: f64,
}

impl UnitBall {
    fn rhs(&self, x: f64, y: &State) -> State {
        let s = x.sinh();
        let coth = x.cosh() / s;
        let csch2 = 1.0 / (s * s);
        let nu = self.nu;
        [
            y[1],
            -nu * coth * y[1] - self.lambda1 * y[0],
            y[3],
            -nu * coth * y[3] + (nu * csch2 - self.lambda2) * y[2],
            -nu * coth * y[4] + y[0] * y[2] * (nu * csch2 - self.eps),
        ]
    }

    /// Series state near the origin, normalized `z0(0) = 1`, `z1 ~ x`.
    fn series(&self, x: f64) -> State {
        let (a0, b0) = series_coefficients(0, self.nu, self.lambda1);
        let (a1, b1) = series_coefficients(1, self.nu, self.lambda2);
        let x2 = x * x;
        let z0 = 1.0 + a0 * x2 + b0 * x2 * x2;
        let dz0 = 2.0 * a0 * x + 4.0 * b0 * x2 * x;
        let z1 = x * (1.0 + a1 * x2 + b1 * x2 * x2);
        let dz1 = 1.0 + 3.0 * a1 * x2 + 5.0 * b1 * x2 * x2;
        // W = z1' z0 - z1 z0', expanded to avoid the 1 - 1 cancellation-free
        // but keep the x^4 terms consistent.
        let w = dz1 * z0 - z1 * dz0;
        [z0, dz0, z1, dz1, w]
    }

    fn sample(&self, x: f64, y: &State) -> GapSample {
        let [z0, dz0, z1, dz1, w] = *y;
        let s = x.sinh();
        let g = z1 / z0;
        let dg = w / (z0 * z0);
        let q = x * w / (z0 * z1);
        let p = dz0 / z0;
        let dw = self.rhs(x, y)[4];
        let dq = q / x + x * dw / (z0 * z1) - q * (p + dz1 / z1);
        GapSample {
            x,
            g,
            dg,
            b: dg * dg + self.nu * g * g / (s * s),
            q,
            dq,
            p,
        }
    }
}

/// `g`, `g'`, `B`, `q`, `q'` and `p = z0'/z0` at one unit-curvature radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapSample {
    pub x: f64,
    pub g: f64,
    pub dg: f64,
    pub b: f64,
    pub q: f64,
    pub dq: f64,
    pub p: f64,
}

/// Endpoint values that are limits of singular quotients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapLimits {
    pub q_start: f64,
    pub dq_start: f64,
    pub dp_start: f64,
    /// `Z_1` at the origin.
    pub z1_start: f64,
    pub q_end: f64,
    pub dq_end: f64,
    /// `g` at the boundary of `S_1`; `g` is frozen at this value outside.
    pub g_end: f64,
}

/// Sampled auxiliary functions on `S_1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapFunctions {
    pub theta_tilde: f64,
    pub p_space: SpaceParams,
    pub lambda1: f64,
    pub lambda2: f64,
    pub epsilon: f64,
    /// Interior samples, clustered toward both ends, in unit-curvature `x`.
    pub grid: Vec<GapSample>,
    pub limits: GapLimits,
    unit: UnitBall,
    /// Accepted integrator states `(x, state)`, increasing in `x`.
    nodes: Vec<(f64, State)>,
}

/// Limit of `f(h / 2^i)` as `h -> 0`, assuming an expansion in the given powers.
pub(crate) fn richardson<F>(f: F, h: f64, powers: &[i32]) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let levels = powers.len() + 1;
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(levels);
    for i in 0..levels {
        let mut row = vec![f(h / 2f64.powi(i as i32))?];
        for k in 1..=i {
            let factor = 2f64.powi(powers[k - 1]) - 1.0;
            let v = row[k - 1] + (row[k - 1] - table[i - 1][k - 1]) / factor;
            row.push(v);
        }
        table.push(row);
    }
    Ok(table[levels - 1][levels - 1])
}

/// Chebyshev-type nodes on `(0, x_tilde)`, denser near both ends.
fn clustered_grid(x_tilde: f64, count: usize) -> Vec<f64> {
    let m = count + 1;
    (1..=count)
        .map(|i| 0.5 * x_tilde * (1.0 - (std::f64::consts::PI * i as f64 / m as f64).cos()))
        .collect()
}

impl GapFunctions {
    /// Builds the auxiliary functions on the ball of radius `theta_tilde`.
    pub fn new(theta_tilde: f64, p_space: &SpaceParams) -> Result<Self> {
        Self::with_grid(theta_tilde, p_space, DEFAULT_GRID)
    }

    pub fn with_grid(theta_tilde: f64, p_space: &SpaceParams, grid_size: usize) -> Result<Self> {
        let rho = p_space.rho();
        if !(theta_tilde > 0.0 && theta_tilde <= MAX_RADIUS * rho) {
            return domain(format!(
                "ball radius must lie in (0, {}], got {theta_tilde}",
                MAX_RADIUS * rho
            ));
        }
        if grid_size < 8 {
            return domain("grid needs at least 8 points");
        }
        let unit_params = SpaceParams::unit(p_space.n())?;
        let x_tilde = theta_tilde / rho;
        let (l1, l2) = ball_lambdas(x_tilde, &unit_params)?;
        let unit = UnitBall {
            x_tilde,
            nu: p_space.nu(),
            lambda1: l1,
            lambda2: l2,
            eps: l2 - l1,
        };
        if !(unit.eps > 0.0) {
            return Err(Error::Domain(format!("eigenvalue gap not positive: {}", unit.eps)));
        }

        let grid_x = clustered_grid(x_tilde, grid_size);
        let x_start = 1e-4f64.min(1e-2 / l2.sqrt()).min(0.01 * x_tilde);
        let x_mid = 0.5 * x_tilde;
        let cfg = OdeConfig {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            max_step: 0.02f64.min(0.3 / l2.sqrt()),
            initial_step: Some(0.1 * x_start),
            abs_tol_relative: true,
        };

        let collect = |from: f64, y0: State, to: f64, stops: Vec<f64>| -> Result<Vec<(f64, State)>> {
            let mut out = vec![(from, y0)];
            ode::integrate(|x, y: &State| unit.rhs(x, y), from, y0, to, &cfg, &stops, |s| {
                out.push((s.t, *s.y));
                Flow::Continue
            })?;
            Ok(out)
        };
        let fwd_stops: Vec<f64> = grid_x.iter().copied().filter(|&x| x > x_start && x < x_mid).collect();
        let forward = collect(x_start, unit.series(x_start), x_mid, fwd_stops)?;
        let bwd_stops: Vec<f64> = grid_x.iter().rev().copied().filter(|&x| x > x_mid).collect();
        let backward = collect(x_tilde, [0.0, -1.0, 0.0, -1.0, 0.0], x_mid, bwd_stops)?;

        let (_, f_mid) = forward.last().unwrap();
        let (_, b_mid) = backward.last().unwrap();
        let a = f_mid[0] / b_mid[0];
        let b = f_mid[2] / b_mid[2];
        let mismatch = ((f_mid[1] / b_mid[1]) / a - 1.0)
            .abs()
            .max(((f_mid[3] / b_mid[3]) / b - 1.0).abs())
            .max(((f_mid[4] / b_mid[4]) / (a * b) - 1.0).abs());
        if !(mismatch < 1e-6) || !(a > 0.0 && b > 0.0) {
            return Err(Error::Normalization(format!(
                "forward and backward solutions disagree at the midpoint (relative {mismatch:e})"
            )));
        }
        let scale = |y: &State| -> State { [a * y[0], a * y[1], b * y[2], b * y[3], a * b * y[4]] };

        let mut nodes: Vec<(f64, State)> = forward;
        nodes.pop();
        nodes.extend(backward.iter().rev().map(|(x, y)| (*x, scale(y))));

        let mut gf = GapFunctions {
            theta_tilde,
            p_space: *p_space,
            lambda1: l1 / (rho * rho),
            lambda2: l2 / (rho * rho),
            epsilon: unit.eps / (rho * rho),
            grid: Vec::new(),
            limits: GapLimits {
                q_start: 1.0,
                dq_start: 0.0,
                dp_start: 0.0,
                z1_start: 0.0,
                q_end: 0.0,
                dq_end: 0.0,
                g_end: b / a,
            },
            unit,
            nodes,
        };
        gf.grid = grid_x.iter().map(|&x| gf.eval(x)).collect::<Result<Vec<_>>>()?;
        gf.limits = gf.compute_limits()?;
        Ok(gf)
    }

    fn compute_limits(&self) -> Result<GapLimits> {
        let xt = self.unit.x_tilde;
        let h = 0.05f64.min(0.02 * xt);
        let even = [2, 4, 6];
        let all = [1, 2, 3, 4];
        let q_start = richardson(|x| Ok(self.eval(x)?.q), h, &even)?;
        let dq_start = richardson(|x| Ok(self.eval(x)?.dq), h, &[1, 3, 5])?;
        let dp_start = richardson(|x| self.p_derivative(x), h, &even)?;
        let z1_start = richardson(|x| self.z_function(x, 1.0), h, &even)?;
        let q_end = richardson(|d| Ok(self.eval(xt - d)?.q), h, &all)?;
        let dq_end = richardson(|d| Ok(self.eval(xt - d)?.dq), h, &all)?;
        Ok(GapLimits {
            q_start,
            dq_start,
            dp_start,
            z1_start,
            q_end,
            dq_end,
            g_end: self.limits.g_end,
        })
    }

    /// Radius of `S_1` at unit curvature.
    pub fn x_tilde(&self) -> f64 {
        self.unit.x_tilde
    }

    pub fn nu(&self) -> f64 {
        self.unit.nu
    }

    /// `lambda_1` of `S_1` at unit curvature.
    pub fn unit_lambda1(&self) -> f64 {
        self.unit.lambda1
    }

    /// `lambda_2 - lambda_1` of `S_1` at unit curvature.
    pub fn unit_epsilon(&self) -> f64 {
        self.unit.eps
    }

    fn state(&self, x: f64) -> State {
        if x <= self.nodes[0].0 {
            return self.unit.series(x);
        }
        let right = self.nodes.partition_point(|n| n.0 <= x).min(self.nodes.len() - 1);
        let left = right.saturating_sub(1);
        let idx = if (self.nodes[right].0 - x).abs() < (x - self.nodes[left].0).abs() {
            right
        } else {
            left
        };
        let (x0, y0) = self.nodes[idx];
        let span = (x - x0).abs();
        if span == 0.0 {
            return y0;
        }
        let h = 0.01f64
            .min(0.1 * x.min(x0))
            .min(0.1 / self.unit.lambda2.sqrt());
        let steps = (span / h).ceil() as usize;
        ode::fixed_steps(|t, y: &State| self.unit.rhs(t, y), x0, y0, x, steps)
    }

    /// Samples at unit-curvature radius `x` in `(0, x_tilde)`.
    pub fn eval(&self, x: f64) -> Result<GapSample> {
        if !(x > 0.0 && x < self.unit.x_tilde) {
            return domain(format!("x = {x} outside (0, {})", self.unit.x_tilde));
        }
        Ok(self.unit.sample(x, &self.state(x)))
    }

    /// `z_0(x)` and `z_1(x)` with `z_0(0) = 1`, `z_1 ~ x`.
    pub fn modes(&self, x: f64) -> Result<(f64, f64)> {
        if !(x >= 0.0 && x <= self.unit.x_tilde) {
            return domain(format!("x = {x} outside [0, {}]", self.unit.x_tilde));
        }
        let s = self.state(x);
        Ok((s[0], s[2]))
    }

    /// `p'` from the ground-state equation, `z0''/z0 - p^2`.
    fn p_derivative(&self, x: f64) -> Result<f64> {
        let y = self.state(x);
        let d = self.unit.rhs(x, &y);
        let p = y[1] / y[0];
        Ok(d[1] / y[0] - p * p)
    }

    /// `g` at unit-curvature radius `x >= 0`, frozen beyond `x_tilde`.
    pub fn g_unit(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        if x >= self.unit.x_tilde {
            return Ok(self.limits.g_end);
        }
        Ok(self.eval(x)?.g)
    }

    /// `B` at unit-curvature radius `x >= 0`; beyond `x_tilde` only the
    /// angular part survives.
    pub fn b_unit(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(1.0 + self.unit.nu);
        }
        if x >= self.unit.x_tilde {
            let s = x.sinh();
            return Ok(self.unit.nu * self.limits.g_end.powi(2) / (s * s));
        }
        Ok(self.eval(x)?.b)
    }

    /// `g` at geodesic radius `theta`.
    pub fn g_at(&self, theta: f64) -> Result<f64> {
        self.g_unit(theta / self.p_space.rho())
    }

    /// `B` at geodesic radius `theta`, in units of `1/length^2`.
    pub fn b_at(&self, theta: f64) -> Result<f64> {
        let rho = self.p_space.rho();
        Ok(self.b_unit(theta / rho)? / (rho * rho))
    }

    /// `T(x, y)`, the right-hand side of the Riccati equation for `q`.
    pub fn t_function(&self, x: f64, y: f64) -> Result<f64> {
        let p = self.eval(x)?.p;
        Ok(t_with_p(x, y, p, self.unit.nu, self.unit.eps))
    }

    /// `Z_y(x)`, the value of `dT/dx` along `T = 0` after eliminating `p`.
    pub fn z_function(&self, x: f64, y: f64) -> Result<f64> {
        if !(x > 0.0 && x < self.unit.x_tilde) {
            return domain(format!("x = {x} outside (0, {})", self.unit.x_tilde));
        }
        z_direct(x, y, self.unit.nu, self.unit.eps, self.unit.lambda1)
    }

    pub fn decomposition(&self) -> ZDecomposition {
        ZDecomposition::new(self.unit.nu, self.unit.eps, self.unit.lambda1, 0.5 * self.unit.x_tilde)
    }
}

/// Dense uniform tabulation of `g` and `B` with cubic interpolation, for
/// evaluation at many points.
#[derive(Debug, Clone)]
pub struct GapTable {
    rho: f64,
    nu: f64,
    x_tilde: f64,
    step: f64,
    g: Vec<f64>,
    b: Vec<f64>,
    g_end: f64,
}

fn cubic_lookup(values: &[f64], step: f64, x: f64) -> f64 {
    let last = values.len() - 1;
    let pos = x / step;
    let i = (pos.floor() as usize).clamp(1, last - 2);
    let t = pos - i as f64;
    let [a, b, c, d] = [values[i - 1], values[i], values[i + 1], values[i + 2]];
    // Lagrange cubic through nodes -1, 0, 1, 2.
    let w0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
    let w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    let w2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    let w3 = (t + 1.0) * t * (t - 1.0) / 6.0;
    w0 * a + w1 * b + w2 * c + w3 * d
}

impl GapTable {
    /// `g` at geodesic radius `theta`.
    pub fn g(&self, theta: f64) -> f64 {
        let x = theta / self.rho;
        if x <= 0.0 {
            0.0
        } else if x >= self.x_tilde {
            self.g_end
        } else {
            cubic_lookup(&self.g, self.step, x)
        }
    }

    /// `B` at geodesic radius `theta`, in units of `1/length^2`.
    pub fn b(&self, theta: f64) -> f64 {
        let x = theta / self.rho;
        let unit = if x <= 0.0 {
            1.0 + self.nu
        } else if x >= self.x_tilde {
            self.nu * self.g_end * self.g_end / x.sinh().powi(2)
        } else {
            cubic_lookup(&self.b, self.step, x)
        };
        unit / (self.rho * self.rho)
    }
}

impl GapFunctions {
    /// Tabulates `g` and `B` on `samples` equal intervals of `[0, theta_tilde]`.
    pub fn table(&self, samples: usize) -> Result<GapTable> {
        if samples < 8 {
            return domain("table needs at least 8 intervals");
        }
        let xt = self.unit.x_tilde;
        let step = xt / samples as f64;
        let inner: Vec<GapSample> = (1..samples)
            .into_par_iter()
            .map(|i| self.eval(step * i as f64))
            .collect::<Result<_>>()?;
        let g_end = self.limits.g_end;
        let nu = self.unit.nu;
        let g = std::iter::once(0.0)
            .chain(inner.iter().map(|s| s.g))
            .chain(std::iter::once(g_end))
            .collect();
        let b = std::iter::once(1.0 + nu)
            .chain(inner.iter().map(|s| s.b))
            .chain(std::iter::once(nu * g_end * g_end / xt.sinh().powi(2)))
            .collect();
        Ok(GapTable {
            rho: self.p_space.rho(),
            nu,
            x_tilde: xt,
            step,
            g,
            b,
            g_end,
        })
    }
}

/// Builds the auxiliary functions on the ball of geodesic radius `theta_tilde`.
pub fn build_gap_functions(theta_tilde: f64, p_space: &SpaceParams) -> Result<GapFunctions> {
    GapFunctions::new(theta_tilde, p_space)
}

/// `T(x, y)` for a given value of `p(x)`.
pub fn t_with_p(x: f64, y: f64, p: f64, nu: f64, eps: f64) -> f64 {
    let s = x.sinh();
    y * (1.0 - y) / x - nu * y / x.tanh() + nu * x / (s * s) - x * eps - 2.0 * p * y
}

/// `Z_y(x)` evaluated directly.
pub fn z_direct(x: f64, y: f64, nu: f64, eps: f64, lambda1: f64) -> Result<f64> {
    if y == 0.0 {
        return domain("Z_y has a 1/y coefficient and is undefined at y = 0");
    }
    let s = x.sinh();
    let c = x.cosh();
    let coth = c / s;
    let csch2 = 1.0 / (s * s);
    let inner = (y - y * y) / x - y * nu * coth - eps * x + nu * x * csch2;
    Ok((y * y - y) / (x * x) + (y + 1.0) * nu * csch2 - eps - 2.0 * nu * x * c / (s * s * s)
        + 2.0 * y * lambda1
        + inner * inner / (2.0 * y)
        + nu * coth * inner)
}

/// `Z_y = sum_i c_i(y) A_i(x) + c_7(y)` with `x`-independent coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZDecomposition {
    pub nu: f64,
    pub eps: f64,
    pub lambda1: f64,
    /// Interior point at which `c_7` is matched.
    pub x_ref: f64,
}

impl ZDecomposition {
    pub fn new(nu: f64, eps: f64, lambda1: f64, x_ref: f64) -> Self {
        Self { nu, eps, lambda1, x_ref }
    }

    /// `A_1 .. A_6` at `x`.
    pub fn basis(x: f64) -> [f64; 6] {
        let s = x.sinh();
        let coth = x.cosh() / s;
        let csch2 = 1.0 / (s * s);
        [
            -coth * coth,
            -1.0 / (x * x),
            x * x * csch2 * csch2,
            -x * x * csch2,
            -(x * coth - 1.0) * csch2,
            x * x,
        ]
    }

    /// First derivatives of the basis.
    pub fn basis_d1(x: f64) -> [f64; 6] {
        let s = x.sinh();
        let c = x.cosh() / s;
        let s2 = 1.0 / (s * s);
        let s4 = s2 * s2;
        [
            2.0 * c * s2,
            2.0 / (x * x * x),
            2.0 * x * s4 - 4.0 * x * x * s4 * c,
            -2.0 * x * s2 + 2.0 * x * x * s2 * c,
            -3.0 * c * s2 + x * s4 + 2.0 * x * c * c * s2,
            2.0 * x,
        ]
    }

    /// Second derivatives of the basis.
    pub fn basis_d2(x: f64) -> [f64; 6] {
        let s = x.sinh();
        let c = x.cosh() / s;
        let s2 = 1.0 / (s * s);
        let s4 = s2 * s2;
        let x2 = x * x;
        [
            -2.0 * s4 - 4.0 * c * c * s2,
            -6.0 / (x2 * x2),
            2.0 * s4 - 16.0 * x * s4 * c + 16.0 * x2 * s4 * c * c + 4.0 * x2 * s4 * s2,
            -2.0 * s2 + 8.0 * x * s2 * c - 4.0 * x2 * s2 * c * c - 2.0 * x2 * s4,
            4.0 * s4 + 8.0 * c * c * s2 - 8.0 * x * c * s4 - 4.0 * x * c * c * c * s2,
            2.0,
        ]
    }

    /// `c_1 .. c_6`; all positive for `0 < y < 1`.
    pub fn coeffs(&self, y: f64) -> [f64; 6] {
        let nu = self.nu;
        let eps = self.eps;
        [
            0.5 * nu * nu * y,
            0.5 * (y - y * y * y),
            0.5 * nu * nu / y,
            eps * nu / y,
            2.0 * nu,
            0.5 * eps * eps / y,
        ]
    }

    /// `c_7(y)`, matched against the direct formula at `x_ref`.
    pub fn c7(&self, y: f64) -> Result<f64> {
        let direct = z_direct(self.x_ref, y, self.nu, self.eps, self.lambda1)?;
        Ok(direct - dot(&self.coeffs(y), &Self::basis(self.x_ref)))
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        Ok(dot(&self.coeffs(y), &Self::basis(x)) + self.c7(y)?)
    }

    /// `dZ_y/dx`.
    pub fn d1(&self, x: f64, y: f64) -> f64 {
        dot(&self.coeffs(y), &Self::basis_d1(x))
    }

    /// `d^2 Z_y/dx^2`.
    pub fn d2(&self, x: f64, y: f64) -> f64 {
        dot(&self.coeffs(y), &Self::basis_d2(x))
    }
}

fn dot(a: &[f64; 6], b: &[f64; 6]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Polynomial `sum c_k t^k` for small-argument expansions.
fn poly(t: f64, terms: &[(i32, f64)]) -> f64 {
    terms.iter().map(|&(k, c)| c * t.powi(k)).sum()
}

const SERIES_BELOW: f64 = 0.1;

/// `t cosh 2t + 2t - (3/2) sinh 2t`; `A_1 x A_2 = 4 f / (t^4 sinh^4 t)`.
pub fn cross_factor_2(t: f64) -> f64 {
    if t < SERIES_BELOW {
        return poly(
            t,
            &[
                (5, 4.0 / 15.0),
                (7, 16.0 / 315.0),
                (9, 4.0 / 945.0),
                (11, 32.0 / 155925.0),
                (13, 8.0 / 1216215.0),
                (15, 32.0 / 212837625.0),
            ],
        );
    }
    t * (2.0 * t).cosh() + 2.0 * t - 1.5 * (2.0 * t).sinh()
}

/// `A_1 x A_3 = 4 f / sinh^9 t`.
pub fn cross_factor_3(t: f64) -> f64 {
    if t < SERIES_BELOW {
        return poly(
            t,
            &[
                (6, 32.0 / 45.0),
                (8, 128.0 / 315.0),
                (10, 404.0 / 4725.0),
                (12, 4628.0 / 467775.0),
                (14, 25171.0 / 34054020.0),
            ],
        );
    }
    let (s, c) = (t.sinh(), t.cosh());
    -6.0 * t * c * c * s + t * s + (4.0 * t * t + 1.0) * c * c * c - c
}

/// `A_1 x A_4 = 4 f / sinh^6 t`.
pub fn cross_factor_4(t: f64) -> f64 {
    if t < SERIES_BELOW {
        return poly(
            t,
            &[
                (3, 4.0 / 3.0),
                (5, 8.0 / 15.0),
                (7, 8.0 / 105.0),
                (9, 16.0 / 2835.0),
                (11, 8.0 / 31185.0),
                (13, 16.0 / 2027025.0),
                (15, 16.0 / 91216125.0),
            ],
        );
    }
    let (s, c) = (t.sinh(), t.cosh());
    2.0 * t * c * c - c * s - t
}

/// `A_1 x A_5 = 2 f / sinh^8 t`.
pub fn cross_factor_5(t: f64) -> f64 {
    if t < SERIES_BELOW {
        return poly(
            t,
            &[
                (5, 16.0 / 15.0),
                (7, 208.0 / 315.0),
                (9, 32.0 / 189.0),
                (11, 4016.0 / 155925.0),
                (13, 16288.0 / 6081075.0),
                (15, 43616.0 / 212837625.0),
            ],
        );
    }
    -t - 2.0 * t * (2.0 * t).cosh() + (2.0 * t).sinh() + 0.25 * (4.0 * t).sinh()
}

/// `A_1' A_i'' - A_1'' A_i'` for `i = 2..=5` through the factored forms.
pub fn cross_product(i: usize, t: f64) -> Option<f64> {
    let s = t.sinh();
    match i {
        2 => Some(4.0 * cross_factor_2(t) / (t.powi(4) * s.powi(4))),
        3 => Some(4.0 * cross_factor_3(t) / s.powi(9)),
        4 => Some(4.0 * cross_factor_4(t) / s.powi(6)),
        5 => Some(2.0 * cross_factor_5(t) / s.powi(8)),
        _ => None,
    }
}

/// `dZ_1/d eps`.
pub fn z1_eps_derivative(x: f64, nu: f64, eps: f64) -> f64 {
    let s = x.sinh();
    eps * x * x - nu * x * x / (s * s) - 1.0
}

/// One checked property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactReport {
    pub fact_id: String,
    pub grid_size: usize,
    /// Largest amount by which the property fails (non-positive when it holds strictly).
    pub max_violation: f64,
    pub pass: bool,
}

impl FactReport {
    fn new(fact_id: &str, grid_size: usize, max_violation: f64, tol: f64) -> Self {
        Self {
            fact_id: fact_id.to_string(),
            grid_size,
            max_violation,
            pass: max_violation.is_finite() && max_violation <= tol,
        }
    }
}

/// A collection of checked properties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub entries: Vec<FactReport>,
    pub pass: bool,
}

impl LemmaReport {
    fn from_entries(entries: Vec<FactReport>) -> Self {
        let pass = entries.iter().all(|e| e.pass);
        Self { entries, pass }
    }

    pub fn entry(&self, fact_id: &str) -> Option<&FactReport> {
        self.entries.iter().find(|e| e.fact_id == fact_id)
    }
}

fn max_of(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(f64::NEG_INFINITY, f64::max)
}

/// Largest increase along consecutive values, relative to the largest magnitude.
fn max_rise(values: &[f64]) -> f64 {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    max_of(values.windows(2).map(|w| (w[1] - w[0]) / scale))
}

/// Five-point central difference.
fn central_difference<F: Fn(f64) -> Result<f64>>(f: F, x: f64, h: f64) -> Result<f64> {
    Ok((f(x - 2.0 * h)? - 8.0 * f(x - h)? + 8.0 * f(x + h)? - f(x + 2.0 * h)?) / (12.0 * h))
}

/// Checks `0 <= q <= 1`, `q' <= 0`, the resulting monotonicity of `g` and
/// `B`, the two Riccati equations and the endpoint values of `q` and `p'`.
pub fn verify_monotonicity_facts(gf: &GapFunctions) -> Result<LemmaReport> {
    let grid = &gf.grid;
    let m = grid.len() + 2;
    let nu = gf.unit.nu;
    let eps = gf.unit.eps;
    let xt = gf.unit.x_tilde;
    let lim = &gf.limits;

    let q_all: Vec<f64> = std::iter::once(lim.q_start)
        .chain(grid.iter().map(|s| s.q))
        .chain(std::iter::once(lim.q_end))
        .collect();
    let dq_all: Vec<f64> = std::iter::once(lim.dq_start)
        .chain(grid.iter().map(|s| s.dq))
        .chain(std::iter::once(lim.dq_end))
        .collect();
    let g_all: Vec<f64> = std::iter::once(0.0)
        .chain(grid.iter().map(|s| s.g))
        .chain(std::iter::once(lim.g_end))
        .collect();
    let b_all: Vec<f64> = std::iter::once(1.0 + nu)
        .chain(grid.iter().map(|s| s.b))
        .chain(std::iter::once(nu * lim.g_end.powi(2) / xt.sinh().powi(2)))
        .collect();
    let second: Vec<f64> = std::iter::once(nu)
        .chain(grid.iter().map(|s| nu * s.g * s.g / s.x.sinh().powi(2)))
        .chain(std::iter::once(nu * lim.g_end.powi(2) / xt.sinh().powi(2)))
        .collect();
    let neg = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| -x).collect() };

    let g_curv = max_of(grid.iter().map(|s| s.g / (s.x * s.x) * (s.x * s.dq + s.q * (s.q - 1.0))));

    let inner: Vec<&GapSample> = grid.iter().filter(|s| s.x >= 0.01 && s.x <= xt - 0.01).collect();
    let riccati_q = max_of(inner.iter().map(|s| (s.dq - t_with_p(s.x, s.q, s.p, nu, eps)).abs()));
    let lambda1 = gf.unit.lambda1;
    let riccati_p = inner
        .par_iter()
        .map(|s| {
            let h = 1e-3 * s.x.min(xt - s.x).min(0.05);
            let dp = central_difference(|x| Ok(gf.eval(x)?.p), s.x, h)?;
            let coth = 1.0 / s.x.tanh();
            Ok((dp + s.p * s.p + nu * s.p * coth + lambda1).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    let riccati_p = max_of(riccati_p.into_iter());

    Ok(LemmaReport::from_entries(vec![
        FactReport::new("q_nonnegative", m, max_of(q_all.iter().map(|q| -q)), SIGN_SLACK),
        FactReport::new("q_at_most_one", m, max_of(q_all.iter().map(|q| q - 1.0)), SIGN_SLACK),
        FactReport::new("q_nonincreasing", m, max_of(dq_all.iter().copied()), SIGN_SLACK),
        FactReport::new("g_increasing", m, max_rise(&neg(&g_all)), MONOTONE_SLACK),
        FactReport::new("b_decreasing", m, max_rise(&b_all), MONOTONE_SLACK),
        FactReport::new("g_concave", grid.len(), g_curv, SIGN_SLACK),
        FactReport::new("angular_part_of_b_decreasing", m, max_rise(&second), MONOTONE_SLACK),
        FactReport::new("riccati_q_residual", inner.len(), riccati_q, RICCATI_TOL),
        FactReport::new("riccati_p_residual", inner.len(), riccati_p, 1e-6),
        FactReport::new("q_start_is_one", 1, (lim.q_start - 1.0).abs(), 1e-7),
        FactReport::new("dq_start_is_zero", 1, lim.dq_start.abs(), 1e-6),
        FactReport::new("q_end_is_zero", 1, lim.q_end.abs(), 1e-7),
        FactReport::new(
            "dq_end_limit",
            1,
            (lim.dq_end - xt * (nu / xt.sinh().powi(2) - eps) / 3.0).abs() / (1.0 + lim.dq_end.abs()),
            1e-5,
        ),
        FactReport::new(
            "dp_start_limit",
            1,
            (lim.dp_start + gf.unit.lambda1 / (nu + 1.0)).abs(),
            1e-5,
        ),
        FactReport::new(
            "z1_start_limit",
            1,
            (lim.z1_start
                - (nu + 1.0) * (-gf.unit.lambda2 + (1.0 + 2.0 / (nu + 1.0)) * gf.unit.lambda1 - 2.0 * nu / 3.0))
                .abs()
                / (1.0 + lim.z1_start.abs()),
            1e-5,
        ),
    ]))
}

/// Critical points of `x -> Z_y(x)` on `(lo, hi)` located from sign changes
/// of `Z_y'` on a fine scan.
fn critical_points(dec: &ZDecomposition, y: f64, lo: f64, hi: f64, scan: usize) -> Result<Vec<f64>> {
    let xs: Vec<f64> = (0..=scan).map(|i| lo + (hi - lo) * i as f64 / scan as f64).collect();
    let ds: Vec<f64> = xs.iter().map(|&x| dec.d1(x, y)).collect();
    let mut roots = Vec::new();
    for i in 0..scan {
        if ds[i] == 0.0 {
            roots.push(xs[i]);
        } else if ds[i].signum() != ds[i + 1].signum() && ds[i + 1] != 0.0 {
            let r = brent(|x| Ok(dec.d1(x, y)), xs[i], xs[i + 1], ds[i], ds[i + 1], 1e-14 * hi)?;
            roots.push(r);
        }
    }
    Ok(roots)
}

/// Checks the properties of `Z_y` used by the monotonicity argument:
/// `Z_1` increasing, no critical point of `Z_y` with non-positive curvature
/// for `0 < y < 1`, positivity of the cross products of the basis curves,
/// the `eps`-derivative of `Z_1` increasing, positive coefficients, and the
/// decomposition matching the direct formula.
pub fn verify_z_lemmas(gf: &GapFunctions, theta_grid: &[f64], y_grid: &[f64]) -> Result<LemmaReport> {
    let xt = gf.unit.x_tilde;
    if theta_grid.iter().any(|&x| !(x > 0.0 && x < xt)) {
        return domain(format!("radius grid must lie in (0, {xt})"));
    }
    if y_grid.iter().any(|&y| !(y > 0.0 && y < 1.0)) {
        return domain("y grid must lie in (0, 1)");
    }
    let dec = gf.decomposition();
    let nu = gf.unit.nu;
    let eps = gf.unit.eps;

    // Z_1 strictly increasing, both as sampled values and through Z_1'.
    let z1: Vec<f64> = theta_grid
        .iter()
        .map(|&x| gf.z_function(x, 1.0))
        .collect::<Result<_>>()?;
    let z1_scale = z1.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let z1_rise = max_of(z1.windows(2).map(|w| (w[0] - w[1]) / z1_scale));
    let z1_slope = max_of(theta_grid.iter().map(|&x| -dec.d1(x, 1.0)));

    // Critical points of Z_y with non-positive second derivative.
    let lo = theta_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = theta_grid.iter().copied().fold(0.0, f64::max);
    let crit = y_grid
        .par_iter()
        .map(|&y| -> Result<f64> {
            let roots = critical_points(&dec, y, lo, hi, 4000)?;
            let mut worst = f64::NEG_INFINITY;
            for r in roots {
                worst = worst.max(-dec.d2(r, y));
            }
            for &x in theta_grid {
                if dec.d1(x, y).abs() <= 1e-9 {
                    worst = worst.max(-dec.d2(x, y));
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<_>>>()?;
    // No critical point at all counts as holding with margin.
    let crit_violation = max_of(crit.into_iter()).max(-1.0);

    // Cross products on (0, 5] and on the caller's grid.
    let cross_grid: Vec<f64> = (1..=500)
        .map(|i| 0.01 * i as f64)
        .chain(theta_grid.iter().copied())
        .collect();
    let mut entries = vec![
        FactReport::new("z1_increasing", theta_grid.len(), z1_rise.max(z1_slope), 0.0),
        FactReport::new("no_concave_critical_point", theta_grid.len() * y_grid.len(), crit_violation, 0.0),
    ];
    for i in 2..=5 {
        let worst = max_of(cross_grid.iter().map(|&t| -cross_product(i, t).unwrap()));
        entries.push(FactReport::new(&format!("cross_product_{i}"), cross_grid.len(), worst, -f64::MIN_POSITIVE));
    }
    // The sixth basis curve lies in the first quadrant and the first in the fourth.
    let quadrant = max_of(cross_grid.iter().flat_map(|&t| {
        let d1 = ZDecomposition::basis_d1(t);
        let d2 = ZDecomposition::basis_d2(t);
        [-d1[5], -d2[5], -d1[0], d2[0]]
    }));
    entries.push(FactReport::new("cross_product_6", cross_grid.len(), quadrant, -f64::MIN_POSITIVE));

    let eps_deriv: Vec<f64> = theta_grid.iter().map(|&x| z1_eps_derivative(x, nu, eps)).collect();
    entries.push(FactReport::new(
        "z1_eps_derivative_increasing",
        theta_grid.len(),
        max_of(eps_deriv.windows(2).map(|w| w[0] - w[1])),
        0.0,
    ));

    let coeff_min = y_grid
        .iter()
        .flat_map(|&y| dec.coeffs(y))
        .fold(f64::INFINITY, f64::min);
    entries.push(FactReport::new("coefficients_positive", y_grid.len(), -coeff_min, -f64::MIN_POSITIVE));

    let mut decomp = 0.0f64;
    for &y in y_grid.iter().chain(std::iter::once(&1.0)) {
        for &x in theta_grid {
            let direct = gf.z_function(x, y)?;
            let split = dec.eval(x, y)?;
            decomp = decomp.max((direct - split).abs() / direct.abs().max(1.0));
        }
    }
    entries.push(FactReport::new(
        "decomposition_matches",
        theta_grid.len() * (y_grid.len() + 1),
        decomp,
        1e-9,
    ));
    Ok(LemmaReport::from_entries(entries))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_matches_direct_evaluation() {
        let p = SpaceParams::new(2, 1.5).unwrap();
        let gf = GapFunctions::new(1.2, &p).unwrap();
        let table = gf.table(4000).unwrap();
        for theta in [0.013, 0.4, 0.9, 1.19] {
            assert!((table.g(theta) - gf.g_at(theta).unwrap()).abs() < 1e-9);
            assert!((table.b(theta) - gf.b_at(theta).unwrap()).abs() < 1e-9);
        }
        assert_eq!(table.g(3.0), gf.limits.g_end);
    }

    #[test]
    fn richardson_removes_even_terms() {
        let f = |h: f64| Ok(2.0 + 3.0 * h * h - h.powi(4) + 0.5 * h.powi(6));
        assert!((richardson(f, 0.4, &[2, 4, 6]).unwrap() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn t_at_zero_y_is_independent_of_p() {
        let a = t_with_p(0.7, 0.0, 3.0, 1.0, 2.0);
        let b = t_with_p(0.7, 0.0, -9.0, 1.0, 2.0);
        assert_eq!(a, b);
        let s = 0.7f64.sinh();
        assert!((a - (0.7 / (s * s) - 1.4)).abs() < 1e-15);
    }

    #[test]
    fn z_rejects_zero_y() {
        assert!(z_direct(0.5, 0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn series_matches_direct_cross_factors_at_switch() {
        let t = SERIES_BELOW;
        let direct2 = t * (2.0 * t).cosh() + 2.0 * t - 1.5 * (2.0 * t).sinh();
        assert!(((cross_factor_2(t * (1.0 - 1e-12)) - direct2) / direct2).abs() < 1e-6);
        let d5 = -t - 2.0 * t * (2.0 * t).cosh() + (2.0 * t).sinh() + 0.25 * (4.0 * t).sinh();
        assert!(((cross_factor_5(t * (1.0 - 1e-12)) - d5) / d5).abs() < 1e-6);
    }

    #[test]
    fn cross_factor_two_at_half() {
        assert!(cross_factor_2(0.5) > 0.0);
        assert_eq!(cross_factor_2(0.0), 0.0);
    }
}
