#![allow(dead_code)]
//! Independent reference computations shared by the integration tests.

/// `J_m(x)` from its power series; accurate for `x < 25`.
pub fn bessel_j(m: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = half.powi(m as i32) / (1..=m).map(f64::from).product::<f64>();
    let mut sum = term;
    for k in 1..200 {
        let k = k as f64;
        term *= -half * half / (k * (k + m as f64));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// `k`-th positive zero of `J_m` by scanning and bisection.
pub fn bessel_zero(m: u32, k: usize) -> f64 {
    let mut found = 0;
    let step = 0.01;
    let mut a = 0.5;
    let mut fa = bessel_j(m, a);
    loop {
        let b = a + step;
        let fb = bessel_j(m, b);
        if fa * fb < 0.0 {
            found += 1;
            if found == k {
                let (mut lo, mut hi) = (a, b);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if bessel_j(m, lo) * bessel_j(m, mid) <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                return 0.5 * (lo + hi);
            }
        }
        a = b;
        fa = fb;
    }
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / (2 * m) as f64;
    let mut s = f(a) + f(b);
    for i in 1..2 * m {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Symmetric tridiagonal matrix (diagonal `a`, off-diagonal `b`).
pub struct Tridiagonal {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl Tridiagonal {
    /// Number of eigenvalues below `x` (Sturm count).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..self.a.len() {
            let off = if i == 0 { 0.0 } else { self.b[i - 1] * self.b[i - 1] };
            d = self.a[i] - x - if i == 0 { 0.0 } else { off / d };
            if d == 0.0 {
                d = -1e-300;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue, `k` starting at 1.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let n = self.a.len();
        let bound = (0..n)
            .map(|i| {
                let l = if i > 0 { self.b[i - 1].abs() } else { 0.0 };
                let r = if i + 1 < n { self.b[i].abs() } else { 0.0 };
                self.a[i].abs() + l + r
            })
            .fold(0.0, f64::max);
        let (mut lo, mut hi) = (-bound, bound);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) >= k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Finite-volume discretization of the radial operator of angular momentum
/// `l` on `[0, theta0]` with a Dirichlet end, in curvature `-1/rho^2`.
pub fn fd_radial_operator(l: u32, n: usize, rho: f64, theta0: f64, cells: usize) -> Tridiagonal {
    let nu = (n - 1) as f64;
    let x_end = theta0 / rho;
    let h = x_end / cells as f64;
    let w = |x: f64| x.sinh().powf(nu);
    let first = if l == 0 { 0 } else { 1 };
    let nodes: Vec<usize> = (first..cells).collect();
    let mass = |i: usize| {
        let x = i as f64 * h;
        let lo = (x - 0.5 * h).max(0.0);
        simpson(w, lo, x + 0.5 * h, 8)
    };
    let edge = |i: usize| w((i as f64 + 0.5) * h) / h;
    let angular = (l as f64) * (l as f64 + nu - 1.0);
    let m: Vec<f64> = nodes.iter().map(|&i| mass(i)).collect();
    let a: Vec<f64> = nodes
        .iter()
        .zip(&m)
        .map(|(&i, mi)| {
            let left = if i == 0 { 0.0 } else { edge(i - 1) };
            let x = i as f64 * h;
            let pot = if angular > 0.0 { angular / x.sinh().powi(2) } else { 0.0 };
            (left + edge(i)) / mi + pot
        })
        .collect();
    let b: Vec<f64> = (0..nodes.len().saturating_sub(1))
        .map(|k| -edge(nodes[k]) / (m[k] * m[k + 1]).sqrt())
        .collect();
    let scale = 1.0 / (rho * rho);
    Tridiagonal {
        a: a.into_iter().map(|v| v * scale).collect(),
        b: b.into_iter().map(|v| v * scale).collect(),
    }
}

/// `k`-th Dirichlet eigenvalue of mode `l`, Richardson-extrapolated over two grids.
pub fn fd_radial_eigenvalue(l: u32, k: usize, n: usize, rho: f64, theta0: f64, cells: usize) -> f64 {
    let coarse = fd_radial_operator(l, n, rho, theta0, cells).eigenvalue(k);
    let fine = fd_radial_operator(l, n, rho, theta0, 2 * cells).eigenvalue(k);
    (4.0 * fine - coarse) / 3.0
}

/// Marches the finite-volume scheme for the ground mode from `z(0) = 1`
/// over `[0, x_end]` and returns node values.
pub fn fd_ground_march(n: usize, lambda: f64, x_end: f64, cells: usize) -> Vec<(f64, f64)> {
    let nu = (n - 1) as f64;
    let h = x_end / cells as f64;
    let w = |x: f64| x.sinh().powf(nu);
    let mut out = Vec::with_capacity(cells + 1);
    out.push((0.0, 1.0));
    // Flux through the right face of cell i equals minus lambda times the
    // integral of w z over cells 0..=i.
    let mut flux_integral = 0.0;
    let mut z = 1.0;
    for i in 0..cells {
        let x = i as f64 * h;
        let lo = (x - 0.5 * h).max(0.0);
        let m = simpson(w, lo, x + 0.5 * h, 4);
        flux_integral += lambda * m * z;
        z -= flux_integral * h / w((i as f64 + 0.5) * h);
        out.push(((i + 1) as f64 * h, z));
    }
    out
}

/// Coefficients of the quadratic `c0 + c1 t + c2 t^2` through three points.
pub fn quadratic_through(pts: [(f64, f64); 3]) -> [f64; 3] {
    let [(x0, y0), (x1, y1), (x2, y2)] = pts;
    let d0 = y0 / ((x0 - x1) * (x0 - x2));
    let d1 = y1 / ((x1 - x0) * (x1 - x2));
    let d2 = y2 / ((x2 - x0) * (x2 - x1));
    let c2 = d0 + d1 + d2;
    let c1 = -(d0 * (x1 + x2) + d1 * (x0 + x2) + d2 * (x0 + x1));
    let c0 = d0 * x1 * x2 + d1 * x0 * x2 + d2 * x0 * x1;
    [c0, c1, c2]
}

pub fn central_difference<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}
