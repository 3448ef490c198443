mod common;

use common::*;
use hyperppw::*;

#[test]
fn scaling_by_two() {
    let p1 = SpaceParams::unit(2).unwrap();
    let p2 = SpaceParams::new(2, 2.0).unwrap();
    for mode in [RadialMode::GROUND, RadialMode::FIRST] {
        let a = ball_eigenvalue(mode, 0.8, &p1).unwrap().lambda;
        let b = ball_eigenvalue(mode, 1.6, &p2).unwrap().lambda;
        assert!((b * 4.0 / a - 1.0).abs() < 1e-8);
    }
}

#[test]
fn first_eigenvalue_decreases_in_radius_and_curvature_radius() {
    let p = SpaceParams::unit(3).unwrap();
    let grid: Vec<f64> = (1..=30).map(|i| 0.2 * i as f64).collect();
    let lams: Vec<f64> = grid.iter().map(|&t| ball_lambdas(t, &p).unwrap().0).collect();
    assert!(lams.windows(2).all(|w| w[1] < w[0]));
    let by_rho: Vec<f64> = [0.5, 1.0, 2.0, 4.0]
        .iter()
        .map(|&r| ball_lambdas(1.0, &SpaceParams::new(3, r).unwrap()).unwrap().0)
        .collect();
    assert!(by_rho.windows(2).all(|w| w[1] < w[0]), "{by_rho:?}");
}

#[test]
fn radius_round_trip_and_monotonicity() {
    let p = SpaceParams::unit(2).unwrap();
    let (l1, _) = ball_lambdas(1.0, &p).unwrap();
    assert!((radius_for_lambda1(l1, &p).unwrap() - 1.0).abs() < 1e-8);
    let lams: Vec<f64> = (0..50).map(|i| 0.5 + 0.5 * i as f64).collect();
    let radii: Vec<f64> = lams.iter().map(|&l| radius_for_lambda1(l, &p).unwrap()).collect();
    assert!(radii.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn radius_below_spectral_bottom_is_rejected() {
    let p = SpaceParams::unit(3).unwrap();
    assert!(matches!(radius_for_lambda1(0.99, &p), Err(Error::NotRepresentable { .. })));
}

#[test]
fn ratio_curve_decreases_and_approaches_euclidean_ratio() {
    let p = SpaceParams::unit(2).unwrap();
    let grid: Vec<f64> = (1..=50).map(|i| 0.1 * i as f64).collect();
    let curve = ratio_curve(&grid, &p).unwrap();
    assert!(curve.monotone);
    let euclid = (bessel_zero(1, 1) / bessel_zero(0, 1)).powi(2);
    assert!((curve.rows[0].ratio / euclid - 1.0).abs() < 0.01);
    let at_one = curve.rows.iter().find(|r| (r.theta0 - 1.0).abs() < 1e-12).unwrap();
    assert!(at_one.ratio < curve.rows[0].ratio);
}

#[test]
fn ratio_curve_rejects_bad_grids() {
    let p = SpaceParams::unit(2).unwrap();
    assert!(ratio_curve(&[], &p).is_err());
    assert!(ratio_curve(&[1.0, 0.5], &p).is_err());
    assert!(ratio_curve(&[0.0, 1.0], &p).is_err());
}

#[test]
fn second_radial_eigenvalue_exceeds_first_mode_eigenvalue() {
    let cfg = ShootingConfig::default();
    for (n, theta0) in [(2, 0.3), (2, 1.0), (2, 4.0), (3, 1.0), (4, 2.5)] {
        let p = SpaceParams::unit(n).unwrap();
        let second_ground = ball_eigenvalue_k(RadialMode::GROUND, 2, theta0, &p, &cfg).unwrap().lambda;
        let first_mode = ball_eigenvalue(RadialMode::FIRST, theta0, &p).unwrap().lambda;
        assert!(second_ground > first_mode);
    }
}

#[test]
fn theta_map_examples() {
    let p = SpaceParams::unit(2).unwrap();
    assert!((theta_map(1.0, 1.0, &p).unwrap() - 1.0).abs() < 1e-8);
    assert!(theta_map(0.01, 1.0, &p).unwrap() < 0.2);
    let cs: Vec<f64> = (0..=90).map(|i| 0.1 + 0.01 * i as f64).collect();
    for c in cs {
        let a = theta_map(c, 1.0, &p).unwrap();
        let b = theta_map((c + 1e-4).min(1.0), 1.0, &p).unwrap();
        assert!((a - b).abs() <= 1e-2);
    }
    assert!(theta_map(0.0, 1.0, &p).is_err());
}

#[test]
fn cross_curvature_examples() {
    let a = cross_curvature_compare(1.0, 2.0, 1.0, 2).unwrap();
    assert!(a.pass && a.theta1 > 1.0);
    let b = cross_curvature_compare(0.5, 4.0, 0.5, 3).unwrap();
    assert!(b.pass && b.theta1 > 0.5);
    let c = cross_curvature_compare(1.0, 1.0 + 1e-9, 1.0, 2).unwrap();
    assert!((c.theta1 - 1.0).abs() < 1e-6);
    assert!((c.lambda2_left / c.lambda2_right - 1.0).abs() < 1e-6);
    assert!(cross_curvature_compare(2.0, 1.0, 1.0, 2).is_err());
}

#[test]
fn crossing_facts_examples() {
    let r = crossing_facts_check(1.0, 2.0, 1.0, 2).unwrap();
    assert!(r.pass);
    assert!(r.single_crossing.iter().all(|&(_, c)| c <= 1));
    assert_eq!(r.weighted_crossings, 1);
    assert!(r.theta5.unwrap() > 0.0 && r.theta5.unwrap() < 1.0);
    let same = crossing_facts_check(1.0, 1.0, 1.0, 2).unwrap();
    assert_eq!(same.weighted_crossings, 0);
    assert!(same.pass);
}

#[test]
fn volume_matches_quadrature_oracle() {
    for (n, rho, theta) in [(2, 1.0, 1.0), (3, 1.0, 2.0), (4, 1.0, 1.3), (5, 2.0, 3.0)] {
        let p = SpaceParams::new(n, rho).unwrap();
        let area = geometry::unit_sphere_area(n);
        // Composite Simpson with many panels.
        let m = 20000;
        let h = theta / (2 * m) as f64;
        let f = |t: f64| area * (rho * (t / rho).sinh()).powi(n as i32 - 1);
        let mut s = f(0.0) + f(theta);
        for i in 1..2 * m {
            s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let oracle = s * h / 3.0;
        assert!((ball_volume(theta, &p).unwrap() / oracle - 1.0).abs() < 1e-10);
    }
    let p = SpaceParams::unit(2).unwrap();
    let v = ball_volume(1.0, &p).unwrap();
    assert!((v - 2.0 * std::f64::consts::PI * (1f64.cosh() - 1.0)).abs() < 1e-12);
    let p2 = SpaceParams::new(2, 2.0).unwrap();
    assert!((ball_volume(2.0, &p2).unwrap() / v - 4.0).abs() < 1e-12);
}

#[test]
fn surface_is_the_volume_derivative() {
    for n in [2, 3, 4, 6] {
        let p = SpaceParams::new(n, 1.5).unwrap();
        for i in 0..=100 {
            let t = 0.01 + 0.0999 * i as f64;
            let fd = central_difference(|x| ball_volume(x, &p).unwrap(), t, 1e-3 * t.max(0.1));
            let a = ball_surface(t, &p).unwrap();
            assert!((fd - a).abs() / a <= 1e-6, "n={n} theta={t}");
        }
    }
}

#[test]
fn surface_ratio_decreases_when_curvature_radius_grows() {
    for (r1, r2) in [(1.0, 2.0), (0.5, 3.0)] {
        let p1 = SpaceParams::new(3, r1).unwrap();
        let p2 = SpaceParams::new(3, r2).unwrap();
        let ratios: Vec<f64> = (1..=500)
            .map(|i| {
                let t = 0.01 * i as f64;
                ball_surface(t, &p2).unwrap() / ball_surface(t, &p1).unwrap()
            })
            .collect();
        assert!(ratios.windows(2).all(|w| w[1] < w[0]));
    }
}

#[test]
fn volume_is_increasing() {
    let p = SpaceParams::unit(4).unwrap();
    let v: Vec<f64> = (0..1000).map(|i| ball_volume(0.01 * i as f64, &p).unwrap()).collect();
    assert_eq!(v[0], 0.0);
    assert!(v.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn negative_inputs_are_domain_errors() {
    let p = SpaceParams::unit(2).unwrap();
    assert!(matches!(ball_volume(-1.0, &p), Err(Error::Domain(_))));
    assert!(matches!(ball_surface(-1.0, &p), Err(Error::Domain(_))));
    assert!(matches!(radius_from_volume(-1.0, &p), Err(Error::Domain(_))));
    assert!(disk_to_minkowski(&[1.0, 0.0], &p).is_err());
}

#[test]
fn geodesic_distance_examples() {
    let o = MinkowskiPoint::origin(2);
    assert_eq!(geodesic_distance(&o, &o), 0.0);
    let y = MinkowskiPoint::new(vec![1f64.sinh(), 0.0, 1f64.cosh()]).unwrap();
    assert!((geodesic_distance(&o, &y) - 1.0).abs() < 1e-14);
    let p = SpaceParams::unit(2).unwrap();
    let x = [0.5f64.tanh(), 0.0];
    let z = disk_to_minkowski(&x, &p).unwrap();
    assert!((geodesic_distance(&o, &z) - 1.0).abs() < 1e-12);
}

#[test]
fn boost_at_origin_is_identity() {
    let b = boost_to_origin(&MinkowskiPoint::origin(3));
    assert!(b.distance_from_identity() < 1e-15);
}
