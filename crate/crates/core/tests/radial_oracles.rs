mod common;

use common::*;
use hyperppw::*;

fn unit2() -> SpaceParams {
    SpaceParams::unit(2).unwrap()
}

#[test]
fn bessel_oracle_reproduces_known_zeros() {
    assert!((bessel_zero(0, 1) - 2.404_825_557_695_773).abs() < 1e-10);
    assert!((bessel_zero(1, 1) - 3.831_705_970_207_512).abs() < 1e-10);
    assert!((bessel_zero(0, 2) - 5.520_078_110_286_311).abs() < 1e-9);
}

#[test]
fn fd_oracle_matches_bessel_on_tiny_balls() {
    // At radius 1e-3 curvature is negligible: lambda theta^2 -> j^2.
    let t = 1e-3;
    let l = fd_radial_eigenvalue(0, 1, 2, 1.0, t, 2000);
    assert!((l * t * t / bessel_zero(0, 1).powi(2) - 1.0).abs() < 1e-5);
}

#[test]
fn shooting_matches_fd_oracle() {
    for (n, rho, theta0) in [(2, 1.0, 1.0), (3, 2.0, 1.5), (4, 0.5, 0.7), (2, 1.0, 3.0)] {
        let p = SpaceParams::new(n, rho).unwrap();
        let (l1, l2) = ball_lambdas(theta0, &p).unwrap();
        let f1 = fd_radial_eigenvalue(0, 1, n, rho, theta0, 4000);
        let f2 = fd_radial_eigenvalue(1, 1, n, rho, theta0, 4000);
        assert!((l1 / f1 - 1.0).abs() < 1e-6, "n={n} rho={rho}: {l1} vs {f1}");
        assert!((l2 / f2 - 1.0).abs() < 1e-6, "n={n} rho={rho}: {l2} vs {f2}");
    }
}

#[test]
fn second_ground_mode_eigenvalue_matches_fd() {
    let p = unit2();
    let e = ball_eigenvalue_k(RadialMode::GROUND, 2, 1.0, &p, &ShootingConfig::default()).unwrap();
    let f = fd_radial_eigenvalue(0, 2, 2, 1.0, 1.0, 4000);
    assert!((e.lambda / f - 1.0).abs() < 1e-6);
}

#[test]
fn small_ball_euclidean_limit() {
    let p = unit2();
    let (l1, l2) = ball_lambdas(0.1, &p).unwrap();
    let j0 = bessel_zero(0, 1);
    let j1 = bessel_zero(1, 1);
    assert!((l1 * 0.01 / (j0 * j0) - 1.0).abs() < 0.01);
    assert!((l2 / l1 / (j1 / j0).powi(2) - 1.0).abs() < 0.01);
}

#[test]
fn large_lambda_first_zero_is_euclidean() {
    let p = unit2();
    let z = first_zero(RadialMode::GROUND, 1e6, &p, &ShootingConfig::default()).unwrap();
    assert!((z * 1e3 / bessel_zero(0, 1) - 1.0).abs() < 0.005);
}

#[test]
fn large_ball_limit() {
    let p = unit2();
    let (l1, _) = ball_lambdas(20.0, &p).unwrap();
    let approx = 0.25 + std::f64::consts::PI.powi(2) / 400.0;
    assert!((l1 - approx).abs() <= 0.02, "{l1}");
    let f = fd_radial_eigenvalue(0, 1, 2, 1.0, 20.0, 20000);
    assert!((l1 / f - 1.0).abs() < 1e-5, "{l1} vs {f}");
}

#[test]
fn zero_count_matches_fd_eigenvalue_count() {
    let p = unit2();
    let cfg = ShootingConfig::default();
    let op = fd_radial_operator(0, 2, 1.0, 3.0, 8000);
    let lambdas: Vec<f64> = (0..50).map(|i| 0.5 + 0.6 * i as f64).collect();
    let mut last = 0;
    for &lam in &lambdas {
        let c = count_zeros(RadialMode::GROUND, lam, &p, 3.0, &cfg).unwrap();
        assert!(c >= last, "zero count decreased at {lam}");
        last = c;
        let fd = op.count_below(lam);
        // Skip levels within discretization error of an eigenvalue.
        let near = (1..=fd + 1).any(|k| (op.eigenvalue(k) - lam).abs() < 1e-3);
        if !near {
            assert_eq!(c, fd, "lambda = {lam}");
        }
    }
    assert_eq!(count_zeros(RadialMode::GROUND, 6.0, &p, 3.0, &cfg).unwrap(), op.count_below(6.0));
}

#[test]
fn zero_count_jumps_by_one_across_an_eigenvalue() {
    let p = unit2();
    let cfg = ShootingConfig::default();
    let (l1, _) = ball_lambdas(1.0, &p).unwrap();
    let below = count_zeros(RadialMode::GROUND, l1 * (1.0 - 1e-4), &p, 1.0, &cfg).unwrap();
    let above = count_zeros(RadialMode::GROUND, l1 * (1.0 + 1e-4), &p, 1.0, &cfg).unwrap();
    assert_eq!((below, above), (0, 1));
}

#[test]
fn zero_count_at_zero_lambda() {
    let c = count_zeros(RadialMode::GROUND, 0.0, &unit2(), 1.0, &ShootingConfig::default()).unwrap();
    assert_eq!(c, 0);
}

#[test]
fn series_coefficient_matches_marched_fd_solution() {
    // (z - 1)/theta^2 = a2 + a4 theta^2 + ...; fit through three radii.
    let p = unit2();
    let sol = integrate_radial(RadialMode::GROUND, 1.0, &p, 0.1, &ShootingConfig::default()).unwrap();
    let march = fd_ground_march(2, 1.0, 0.1, 1_000_000);
    let at = |k: usize| march[k];
    let radii = [20_000usize, 40_000, 60_000];
    let fd_pts = radii.map(|k| {
        let (x, z) = at(k);
        (x * x, (z - 1.0) / (x * x))
    });
    let shoot_pts = radii.map(|k| {
        let x = at(k).0;
        let z = sol.eval(x).unwrap().0;
        (x * x, (z - 1.0) / (x * x))
    });
    let a2_fd = quadratic_through(fd_pts)[0];
    let a2_shoot = quadratic_through(shoot_pts)[0];
    assert!((a2_fd - a2_shoot).abs() < 1e-8, "{a2_fd} vs {a2_shoot}");
    assert!((a2_shoot + 0.25).abs() < 1e-8);
}

#[test]
fn series_start_limits() {
    let p = unit2();
    let (z, dz) = series_start(RadialMode::GROUND, 7.0, &p, 1e-6).unwrap();
    assert!((z - 1.0).abs() < 1e-10 && dz.abs() < 1e-5);
    let (z1, _) = series_start(RadialMode::FIRST, 7.0, &p, 1e-6).unwrap();
    assert!((z1 / 1e-6 - 1.0).abs() < 1e-10);
}

#[test]
fn first_mode_is_minus_derivative_of_ground_mode() {
    let p = unit2();
    let lam = 9.0;
    let cfg = ShootingConfig::default();
    let z0 = integrate_radial(RadialMode::GROUND, lam, &p, 3.0, &cfg).unwrap();
    let z1 = integrate_radial(RadialMode::FIRST, lam, &p, 3.0, &cfg).unwrap();
    // z1 ~ theta and -z0' ~ lam theta / (nu + 1) at the origin.
    let c = 2.0 / lam;
    let scale = (1..=300).map(|i| z1.eval(0.01 * i as f64).unwrap().0.abs()).fold(0.0, f64::max);
    for i in 10..=300 {
        let t = 0.01 * i as f64;
        let direct = z1.eval(t).unwrap().0;
        let from_ground = -c * z0.eval(t).unwrap().1;
        assert!((direct - from_ground).abs() <= 1e-7 * scale, "theta = {t}");
    }
}

#[test]
fn ladder_recurrence_for_higher_modes() {
    let p = unit2();
    let lam = 12.0;
    let cfg = ShootingConfig::default();
    for l in 0..3u32 {
        let zl = integrate_radial(RadialMode::new(l), lam, &p, 2.5, &cfg).unwrap();
        let zn = integrate_radial(RadialMode::new(l + 1), lam, &p, 2.5, &cfg).unwrap();
        let ladder = |t: f64| {
            let (z, dz) = zl.eval(t).unwrap();
            -dz + l as f64 * z / t.tanh()
        };
        // Match normalizations at one radius, then compare everywhere.
        let c = zn.eval(1.0).unwrap().0 / ladder(1.0);
        let peak = (10..=250).map(|i| zn.eval(0.01 * i as f64).unwrap().0.abs()).fold(0.0, f64::max);
        for i in 10..=250 {
            let t = 0.01 * i as f64;
            let err = (zn.eval(t).unwrap().0 - c * ladder(t)).abs();
            assert!(err <= 1e-6 * peak, "l = {l}, theta = {t}: {err}");
        }
    }
}

#[test]
fn weighted_first_mode_derivative_is_weighted_ground_mode() {
    let p = unit2();
    let lam = 9.0;
    let cfg = ShootingConfig::default();
    let z0 = integrate_radial(RadialMode::GROUND, lam, &p, 2.0, &cfg).unwrap();
    let z1 = integrate_radial(RadialMode::FIRST, lam, &p, 2.0, &cfg).unwrap();
    let weighted = |t: f64| t.sinh() * z1.eval(t).unwrap().0;
    for i in 1..20 {
        let t = 0.1 * i as f64;
        let lhs = central_difference(weighted, t, 1e-3);
        let rhs = t.sinh() * z0.eval(t).unwrap().0 * 2.0;
        assert!((lhs - rhs).abs() <= 1e-6 * rhs.abs().max(1e-3), "theta = {t}: {lhs} vs {rhs}");
    }
}

#[test]
fn ground_mode_decreases_up_to_its_zero() {
    for (n, rho) in [(2, 1.0), (3, 0.5), (5, 2.0)] {
        let p = SpaceParams::new(n, rho).unwrap();
        let (l1, _) = ball_lambdas(1.0, &p).unwrap();
        let sol = integrate_radial(RadialMode::GROUND, l1, &p, 1.0, &ShootingConfig::default()).unwrap();
        for i in 1..=200 {
            let t = 0.005 * i as f64;
            assert!(sol.eval(t).unwrap().1 < 0.0, "n={n} theta={t}");
        }
    }
}

#[test]
fn zeros_interlace_at_first_mode_eigenvalue() {
    let p = unit2();
    let lam = ball_eigenvalue(RadialMode::FIRST, 1.0, &p).unwrap().lambda;
    let cfg = ShootingConfig::default();
    let a = integrate_radial(RadialMode::GROUND, lam, &p, 2.0, &cfg).unwrap();
    let b = integrate_radial(RadialMode::FIRST, lam, &p, 2.0, &cfg).unwrap();
    let mut all: Vec<(f64, u8)> = a.zeros().iter().map(|&z| (z, 0)).chain(b.zeros().iter().map(|&z| (z, 1))).collect();
    all.sort_by(|x, y| x.0.total_cmp(&y.0));
    assert!(all.len() >= 2);
    assert!(all.windows(2).all(|w| w[0].1 != w[1].1), "{all:?}");
}

#[test]
fn first_zero_decreases_with_lambda() {
    let p = unit2();
    let cfg = ShootingConfig::default();
    let a = first_zero(RadialMode::GROUND, 5.0, &p, &cfg).unwrap();
    let b = first_zero(RadialMode::GROUND, 10.0, &p, &cfg).unwrap();
    assert!(a > b);
}

#[test]
fn zeros_move_continuously_in_lambda() {
    let p = unit2();
    let cfg = ShootingConfig::default();
    let a = integrate_radial(RadialMode::GROUND, 40.0, &p, 3.0, &cfg).unwrap();
    let b = integrate_radial(RadialMode::GROUND, 40.0 + 1e-6, &p, 3.0, &cfg).unwrap();
    assert_eq!(a.zeros().len(), b.zeros().len());
    for (x, y) in a.zeros().iter().zip(b.zeros()) {
        assert!((x - y).abs() < 1e-6);
    }
}

#[test]
fn ode_residual_is_small_at_samples() {
    let p = SpaceParams::new(3, 1.0).unwrap();
    let lam = 8.0;
    let sol = integrate_radial(RadialMode::FIRST, lam, &p, 3.0, &ShootingConfig::default()).unwrap();
    let nu = 2.0;
    let scale = (1..300).map(|i| sol.eval(0.01 * i as f64).unwrap().0.abs()).fold(0.0, f64::max);
    for i in 5..295 {
        let t = 0.01 * i as f64;
        let (z, dz) = sol.eval(t).unwrap();
        let ddz = central_difference(|s| sol.eval(s).unwrap().1, t, 1e-3);
        let residual = ddz + nu * dz / t.tanh() + (lam - nu / t.sinh().powi(2)) * z;
        assert!(residual.abs() <= 1e-7 * scale.max(1.0) * 10.0, "theta = {t}: {residual}");
    }
}
