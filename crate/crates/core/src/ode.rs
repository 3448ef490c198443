//! Embedded Runge–Kutta 5(4) (Dormand–Prince) with adaptive step control.
//!
//! The driver steps exactly onto every requested stop point and hands each
//! accepted state to a callback, which may rescale it in place (linear
//! systems) or end the integration early.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// First trial step; `None` picks a fraction of the span.
    pub initial_step: Option<f64>,
    /// Multiply `abs_tol` by the largest state component, so the absolute
    /// floor follows solutions that decay or grow by many orders.
    pub abs_tol_relative: bool,
}

impl Default for OdeConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-11,
            abs_tol: 1e-13,
            max_step: f64::INFINITY,
            initial_step: None,
            abs_tol_relative: false,
        }
    }
}

/// What the driver should do after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

/// One accepted step as seen by the callback.
pub struct StepInfo<'a, const N: usize> {
    pub t: f64,
    pub y: &'a mut [f64; N],
    /// `true` when `t` is one of the requested stop points.
    pub at_stop: bool,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Attempts one step of size `h`; returns the new state and its error norm.
fn try_step<const N: usize, F>(rhs: &mut F, t: f64, y: &[f64; N], h: f64, cfg: &OdeConfig) -> ([f64; N], f64)
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let k1 = rhs(t, y);
    let k2 = rhs(t + C2 * h, &axpy(y, h, &[(A21, &k1)]));
    let k3 = rhs(t + C3 * h, &axpy(y, h, &[(A31, &k1), (A32, &k2)]));
    let k4 = rhs(t + C4 * h, &axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
    let k5 = rhs(
        t + C5 * h,
        &axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let k6 = rhs(
        t + h,
        &axpy(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    );
    let y_new = axpy(y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = rhs(t + h, &y_new);
    let abs = if cfg.abs_tol_relative {
        cfg.abs_tol * y.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    } else {
        cfg.abs_tol
    };
    let mut acc = 0.0;
    for i in 0..N {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let scale = abs + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
        acc += (e / scale).powi(2);
    }
    (y_new, (acc / N as f64).sqrt())
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t_end` (either direction).
///
/// `stops` must be ordered in the direction of integration; points outside
/// the span are ignored. Returns the final time and state, which differ from
/// `t_end` when the callback stops early.
pub fn integrate<const N: usize, F, C>(
    mut rhs: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    cfg: &OdeConfig,
    stops: &[f64],
    mut on_step: C,
) -> Result<(f64, [f64; N])>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    C: FnMut(StepInfo<'_, N>) -> Flow,
{
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let span = (t_end - t0).abs();
    let mut t = t0;
    let mut y = y0;
    if span == 0.0 {
        return Ok((t, y));
    }
    let mut h = cfg.initial_step.unwrap_or(1e-2 * span).min(cfg.max_step).min(span);
    let mut stop_iter = stops
        .iter()
        .copied()
        .filter(|s| dir * (s - t0) > 0.0 && dir * (t_end - s) >= 0.0)
        .peekable();
    let mut rejections = 0usize;

    loop {
        let next_target = stop_iter.peek().copied().unwrap_or(t_end);
        let remaining = dir * (next_target - t);
        let mut hit = false;
        let mut step = h;
        if step >= remaining * (1.0 - 1e-12) {
            step = remaining;
            hit = true;
        }
        let min_step = 1e-14 * t.abs().max(span) + 1e-300;
        if step < min_step && !hit {
            return Err(Error::Integration {
                theta: t,
                reason: format!("step size collapsed to {step:e}"),
            });
        }

        let (y_new, err) = try_step(&mut rhs, t, &y, dir * step, cfg);
        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            rejections += 1;
            h = 0.2 * step;
            if rejections > 200 {
                return Err(Error::Integration {
                    theta: t,
                    reason: "non-finite state".into(),
                });
            }
            continue;
        }
        if err > 1.0 {
            rejections += 1;
            if rejections > 200 {
                return Err(Error::Integration {
                    theta: t,
                    reason: "too many rejected steps".into(),
                });
            }
            h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            continue;
        }
        rejections = 0;
        t = if hit { next_target } else { t + dir * step };
        y = y_new;
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        if !hit {
            h = (step * factor).min(cfg.max_step);
        } else {
            // Keep the unclipped step size when a stop forced a short step.
            h = h.max(step * factor).min(cfg.max_step);
        }

        let at_stop = hit && stop_iter.peek().is_some();
        if at_stop {
            stop_iter.next();
        }
        let flow = on_step(StepInfo {
            t,
            y: &mut y,
            at_stop,
        });
        if flow == Flow::Stop || (hit && !at_stop) {
            return Ok((t, y));
        }
    }
}

/// Fifth-order solution of `steps` equal Dormand–Prince steps from `t0` to
/// `t1`. Deterministic and smooth in `t1`, which keeps finite differences of
/// dense evaluations clean.
pub fn fixed_steps<const N: usize, F>(mut rhs: F, t0: f64, y0: [f64; N], t1: f64, steps: usize) -> [f64; N]
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let steps = steps.max(1);
    let h = (t1 - t0) / steps as f64;
    let mut y = y0;
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        let k1 = rhs(t, &y);
        let k2 = rhs(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = rhs(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = rhs(t + C5 * h, &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = rhs(
            t + h,
            &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        y = axpy(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    }
    y
}

/// Convenience wrapper without stops or callbacks.
pub fn solve<const N: usize, F>(rhs: F, t0: f64, y0: [f64; N], t_end: f64, cfg: &OdeConfig) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    integrate(rhs, t0, y0, t_end, cfg, &[], |_| Flow::Continue).map(|(_, y)| y)
}
