mod common;

use common::bessel_zero;
use hyperppw::fem::{disk_distance, generate_mesh, mesh_spectrum, Shape};
use hyperppw::*;

fn unit() -> SpaceParams {
    SpaceParams::unit(2).unwrap()
}

#[test]
fn ball_mesh_is_contained_and_refines_quadratically() {
    let d = DiskDomain::ball(1.0, unit()).unwrap();
    let coarse = generate_mesh(&d, 0.1).unwrap();
    let fine = generate_mesh(&d, 0.05).unwrap();
    for v in &fine.vertices {
        assert!(disk_distance(*v, [0.0, 0.0], 1.0) <= 1.05);
    }
    let growth = fine.num_vertices() as f64 / coarse.num_vertices() as f64;
    assert!((growth / 4.0 - 1.0).abs() <= 0.3, "growth {growth}");
    assert!(fine.h <= 1.5 * 0.05);
    assert!(fine.min_angle_deg() >= 20.0);
}

#[test]
fn reflex_polygon_meshes_with_positive_orientation() {
    let verts = vec![[1.0, 0.0], [1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [0.0, -1.0], [0.0, 0.0]];
    let d = DiskDomain::polygon(verts.iter().map(|v| [0.8 * v[0], 0.8 * v[1]]).collect(), unit()).unwrap();
    let mesh = generate_mesh(&d, 0.1).unwrap();
    assert!((0..mesh.triangles.len()).all(|t| mesh.triangle_area(t) > 0.0));
    assert!(mesh.min_angle_deg() >= 20.0);
}

#[test]
fn small_disk_matches_the_euclidean_limit() {
    let theta0 = 0.05;
    let d = DiskDomain::ball(theta0, unit()).unwrap();
    let s = fem_eigs(&d, theta0 / 16.0, 2).unwrap();
    let j = bessel_zero(0, 1);
    assert!((s.lambda1 * theta0 * theta0 / (j * j) - 1.0).abs() < 0.02);
}

#[test]
fn second_eigenvalue_of_the_disk_is_nearly_double() {
    let d = DiskDomain::ball(1.0, unit()).unwrap();
    let s = fem_eigs(&d, 0.05, 3).unwrap();
    let (a, b) = (s.eigenvalues[1], s.eigenvalues[2]);
    assert!((b - a) / a <= 0.01);
    let (l1, l2) = ball_lambdas(1.0, &unit()).unwrap();
    assert!(s.lambda1 > l1 && s.lambda2 > l2);
    assert!(s.u1.values.iter().all(|v| *v >= -1e-12));
    assert!(s.u1.boundary_max() == 0.0);
}

#[test]
fn ellipse_lies_between_inscribed_and_circumscribed_balls() {
    let p = unit();
    let e = fem_eigs(&DiskDomain::ellipse(1.2, 0.8, p.clone()).unwrap(), 0.05, 2).unwrap();
    let inner = fem_eigs(&DiskDomain::ball(0.8, p.clone()).unwrap(), 0.05, 2).unwrap();
    let outer = fem_eigs(&DiskDomain::ball(1.2, p).unwrap(), 0.05, 2).unwrap();
    assert!(e.lambda1 < inner.lambda1 && e.lambda1 > outer.lambda1);
}

#[test]
fn radial_field_rearranges_to_its_profile() {
    let p = unit();
    let d = DiskDomain::ball(1.0, p.clone()).unwrap();
    let mesh = std::sync::Arc::new(generate_mesh(&d, 0.04).unwrap());
    let profile = |t: f64| (std::f64::consts::FRAC_PI_2 * t).cos();
    let values = mesh.vertices.iter().map(|v| profile(disk_distance(*v, [0.0, 0.0], 1.0))).collect();
    let field = DiscreteField::new(mesh, values).unwrap();
    let r = decreasing_rearrangement(&field, &p).unwrap();
    for t in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let s = ball_volume(t, &p).unwrap();
        assert!((r.value_at(s) - profile(t)).abs() < 0.02, "t = {t}");
    }
    assert!((r.integral_of(|v| v * v) / field.l2_norm_sq() - 1.0).abs() < 1e-8);
    let inc = increasing_rearrangement(&field, &p).unwrap();
    assert!(inc.values.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn mismatched_curvature_is_rejected() {
    let d = DiskDomain::ball(0.5, unit()).unwrap();
    let s = fem_eigs(&d, 0.1, 2).unwrap();
    let other = SpaceParams::new(2, 2.0).unwrap();
    assert!(decreasing_rearrangement(&s.u1, &other).is_err());
}

#[test]
fn chiti_examples() {
    let p = unit();
    let ball = ppw_run(&DiskDomain::ball(1.0, p.clone()).unwrap(), 0.05).unwrap();
    let r = chiti_compare(&ball.1.u1, ball.0.theta_tilde, &p).unwrap();
    assert!(r.identical && r.pass, "{r:?}");

    let ellipse = ppw_run(&DiskDomain::ellipse(1.2, 0.8, p.clone()).unwrap(), 0.05).unwrap();
    let r = chiti_compare(&ellipse.1.u1, ellipse.0.theta_tilde, &p).unwrap();
    assert_eq!(r.crossing_count, 1, "{r:?}");
    assert!(r.sign_pattern_ok && r.pass);
    assert!(r.volume_ball <= r.volume_domain);

    let z = GroundProfile::new(ellipse.0.theta_tilde, &p, ellipse.1.u1.l2_norm_sq()).unwrap();
    let ode = chiti_ode_residuals(&ellipse.1.u1, &z, ellipse.0.lambda1_omega, &p).unwrap();
    assert!(ode.ball_pass && ode.domain_pass && !ode.inconclusive, "{ode:?}");
    assert!(ode.ball_max_relative_residual <= 0.02);
}

#[test]
fn ground_profile_vanishes_at_the_end_and_starts_at_zero_integral() {
    let p = unit();
    let z = GroundProfile::new(1.0, &p, 2.0).unwrap();
    assert!(z.at_radius(1.0).unwrap().abs() < 1e-8);
    assert_eq!(z.integral_to(0.0).unwrap(), 0.0);
    let total = z.integral_to(z.volume).unwrap();
    let squares = {
        let n = 4000;
        let h = 1.0 / n as f64;
        (0..n)
            .map(|i| {
                let t = (i as f64 + 0.5) * h;
                z.at_radius(t).unwrap().powi(2) * ball_surface(t, &p).unwrap() * h
            })
            .sum::<f64>()
    };
    assert!((squares / 2.0 - 1.0).abs() < 1e-5);
    assert!(total > 0.0);
}

#[test]
fn center_of_mass_on_an_off_center_ball() {
    let p = unit();
    let d = DiskDomain::centered_at(Shape::Ball { radius: 1.0 }, p.clone(), [0.5, 0.3]).unwrap();
    let s = fem_eigs(&d, 0.05, 2).unwrap();
    let theta_tilde = radius_for_lambda1(s.lambda1, &p).unwrap();
    let table = GapFunctions::new(theta_tilde, &p).unwrap().table(4096).unwrap();
    let g = |t: f64| table.g(t);

    let m = WeightedPoints::from_field(&s.u1, &p).unwrap();
    let state = center_of_mass_shift(&m, g, 1.0).unwrap();
    assert!(state.residual_norm <= state.tolerance);
    let shift = geodesic_distance(&MinkowskiPoint::origin(2), &state.z0);
    assert!((shift - (0.5f64.powi(2) + 0.3f64.powi(2)).sqrt()).abs() < 0.05, "shift {shift}");

    let moved = m.transformed(&state.boost);
    let again = center_of_mass_shift(&moved, g, 1.0).unwrap();
    assert!(again.boost.distance_from_identity() < 1e-6);

    let shifted = shift_field(&s.u1, &state.boost).unwrap();
    let s2 = mesh_spectrum(shifted.mesh_arc(), &p, 2).unwrap();
    assert!((s2.lambda1 / s.lambda1 - 1.0).abs() <= 1e-3);
    assert!((s2.lambda2 / s.lambda2 - 1.0).abs() <= 1e-3);

    for xi in [[0.0, 0.0], [0.5, 0.0], [-0.3, 0.7], [1.0, 1.0]] {
        let z = MinkowskiPoint::from_spatial(&xi);
        let (ratio, bound) = cone_ratio(&m, &g, 1.0, &z);
        assert!(ratio <= bound, "{xi:?}: {ratio} > {bound}");
    }
}

#[test]
fn first_moments_vanish_for_a_reflection_symmetric_field() {
    let p = unit();
    let s = fem_eigs(&DiskDomain::ellipse(1.2, 0.8, p.clone()).unwrap(), 0.08, 2).unwrap();
    let m = WeightedPoints::from_field(&s.u1, &p).unwrap();
    let mom = first_moments(&m, &|t: f64| t.tanh(), 1.0);
    assert!(mom.iter().all(|v| v.abs() < 1e-3 * m.total()), "{mom:?}");
}

#[test]
fn gap_bound_on_ball_and_ellipse() {
    let p = unit();
    let (rb, sb) = ppw_run(&DiskDomain::ball(1.0, p.clone()).unwrap(), 0.05).unwrap();
    let gb = gap_bound_check(&sb, &rb, &p).unwrap();
    assert!(gb.pass && gb.gap_relative_difference <= 0.01, "{gb:?}");
    assert!((gb.ball_bound / gb.ball_gap - 1.0).abs() < 1e-6);

    let (re, se) = ppw_run(&DiskDomain::ellipse(1.2, 0.8, p.clone()).unwrap(), 0.05).unwrap();
    assert!(re.margin > 0.0);
    let ge = gap_bound_check(&se, &re, &p).unwrap();
    assert!(ge.pass && ge.denominator_positive && ge.volume_order_pass, "{ge:?}");
    assert_eq!(ge.chain.len(), 6);
    assert!(ge.chain.iter().all(|c| c.pass));
    assert!(ge.moment_residual <= 1e-8 * ge.denominator.max(1.0) * 10.0);
}
