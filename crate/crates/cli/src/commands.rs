use std::fs;

use hyperppw::fem::eigen::EIG_TOL;
use hyperppw::*;
use serde_json::{json, Value};

use crate::args::{Command, DomainKind, RunConfig};
use crate::emit::{Cell, Table};
use crate::CliError;

/// Outcome of one command before formatting.
pub struct Report {
    pub result: Value,
    pub table: Table,
    pub pass: bool,
}

type Outcome = Result<Report, CliError>;

const COMPARE_SAMPLES: usize = 1000;
const COUNT: usize = 4;

fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn space(cfg: &RunConfig) -> Result<SpaceParams, CliError> {
    Ok(SpaceParams::new(cfg.n, cfg.rho)?)
}

fn quantities(rows: &[(&str, f64)]) -> Table {
    let mut t = Table::new(vec!["quantity", "value"]);
    for (k, v) in rows {
        t.push(vec![(*k).into(), (*v).into()]);
    }
    t
}

pub fn run(command: Command, cfg: &RunConfig) -> Outcome {
    match command {
        Command::BallSpectrum => ball_spectrum(cfg),
        Command::RatioCurve => ratio(cfg),
        Command::RadiusForLambda1 => radius(cfg),
        Command::CrossCurvature => cross(cfg),
        Command::VerifyLemmas => lemmas(cfg),
        Command::FemEigs => fem(cfg),
        Command::PpwCheck => ppw(cfg),
        Command::Chiti => chiti(cfg),
        Command::CenterOfMass => center(cfg),
    }
}

fn ball_spectrum(cfg: &RunConfig) -> Outcome {
    let p = space(cfg)?;
    if !(cfg.tol > 0.0 && cfg.tol <= 1e-3) {
        return usage(format!("--tol must lie in (0, 1e-3], got {}", cfg.tol));
    }
    let shooting = ShootingConfig {
        rel_tol: cfg.tol,
        abs_tol: cfg.tol * 1e-2,
        ..ShootingConfig::default()
    };
    let l1 = ball_eigenvalue_k(RadialMode::GROUND, 1, cfg.theta0, &p, &shooting)?.lambda;
    let l2 = ball_eigenvalue_k(RadialMode::FIRST, 1, cfg.theta0, &p, &shooting)?.lambda;
    let mut table = Table::new(vec!["theta0", "lambda1", "lambda2"]);
    table.push(vec![cfg.theta0.into(), l1.into(), l2.into()]);
    Ok(Report {
        result: json!({"theta0": cfg.theta0, "lambda1": l1, "lambda2": l2, "ratio": l2 / l1}),
        table,
        pass: true,
    })
}

fn ratio(cfg: &RunConfig) -> Outcome {
    let p = space(cfg)?;
    let Some(grid) = cfg.grid else {
        return usage("ratio-curve needs --grid start:stop:count");
    };
    let pts = grid.points();
    if pts.is_empty() {
        return usage("grid is empty; nothing to write");
    }
    let curve = ratio_curve(&pts, &p)?;
    let mut table = Table::new(vec!["theta0", "lambda1", "lambda2", "ratio"]);
    for r in &curve.rows {
        table.push(vec![r.theta0.into(), r.lambda1.into(), r.lambda2.into(), r.ratio.into()]);
    }
    Ok(Report {
        result: json!({"rows": to_value(&curve.rows), "monotone": curve.monotone}),
        table,
        pass: curve.monotone,
    })
}

fn radius(cfg: &RunConfig) -> Outcome {
    let p = space(cfg)?;
    let lambdas = match (cfg.lambda1, cfg.grid) {
        (Some(l), None) => vec![l],
        (None, Some(g)) => g.points(),
        (Some(_), Some(_)) => return usage("give either --lambda1 or --grid, not both"),
        (None, None) => return usage("radius-for-lambda1 needs --lambda1 or --grid"),
    };
    if lambdas.is_empty() {
        return usage("grid is empty; nothing to write");
    }
    let mut table = Table::new(vec!["lambda1", "theta0"]);
    let mut rows = Vec::new();
    for l in lambdas {
        let t = radius_for_lambda1(l, &p)?;
        table.push(vec![l.into(), t.into()]);
        rows.push(json!({"lambda1": l, "theta0": t}));
    }
    Ok(Report { result: json!({ "rows": rows }), table, pass: true })
}

fn cross(cfg: &RunConfig) -> Outcome {
    let c = cross_curvature_compare(cfg.rho, cfg.rho2, cfg.theta0, cfg.n)?;
    let f = crossing_facts_check(cfg.rho, cfg.rho2, cfg.theta0, cfg.n)?;
    let pass = c.pass && f.pass;
    let mut table = Table::new(vec![
        "rho1",
        "rho2",
        "theta2",
        "theta1",
        "lambda1",
        "lambda2_left",
        "lambda2_right",
        "weighted_crossings",
        "pass",
    ]);
    table.push(vec![
        c.rho1.into(),
        c.rho2.into(),
        c.theta2.into(),
        c.theta1.into(),
        c.lambda1.into(),
        c.lambda2_left.into(),
        c.lambda2_right.into(),
        f.weighted_crossings.into(),
        pass.into(),
    ]);
    Ok(Report {
        result: json!({"comparison": to_value(&c), "crossings": to_value(&f)}),
        table,
        pass,
    })
}

fn lemmas(cfg: &RunConfig) -> Outcome {
    let p = space(cfg)?;
    let gf = build_gap_functions(cfg.theta_tilde, &p)?;
    let facts = verify_monotonicity_facts(&gf)?;
    let xs: Vec<f64> = (1..500).map(|i| gf.x_tilde() * i as f64 / 500.0).collect();
    let ys: Vec<f64> = (0..19).map(|i| 0.05 + 0.05 * i as f64).collect();
    let z = verify_z_lemmas(&gf, &xs, &ys)?;
    let mut table = Table::new(vec!["suite", "fact_id", "grid_size", "max_violation", "pass"]);
    for (suite, report) in [("monotonicity", &facts), ("z_family", &z)] {
        for e in &report.entries {
            table.push(vec![
                suite.into(),
                e.fact_id.as_str().into(),
                e.grid_size.into(),
                e.max_violation.into(),
                e.pass.into(),
            ]);
        }
    }
    let pass = facts.pass && z.pass;
    Ok(Report {
        result: json!({"monotonicity": to_value(&facts), "z_family": to_value(&z), "pass": pass}),
        table,
        pass,
    })
}

fn read_polygon(cfg: &RunConfig) -> Result<Vec<[f64; 2]>, CliError> {
    let Some(path) = &cfg.polygon_file else {
        return usage("--domain polygon-file needs --polygon-file PATH");
    };
    let text = fs::read_to_string(path)?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let v: Vec<f64> = l.split_whitespace().filter_map(|t| t.parse().ok()).collect();
            match v.as_slice() {
                [x, y] => Ok([*x, *y]),
                _ => usage(format!("polygon line '{l}' is not 'x y'")),
            }
        })
        .collect()
}

fn build_domain(cfg: &RunConfig) -> Result<DiskDomain, CliError> {
    let p = space(cfg)?;
    let shape = match cfg.domain {
        DomainKind::Ball => Shape::Ball { radius: cfg.theta0 },
        DomainKind::Ellipse => Shape::Ellipse { a: cfg.a, b: cfg.b },
        DomainKind::Bump => Shape::BallWithBump {
            radius: cfg.theta0,
            amplitude: cfg.amplitude,
            frequency: cfg.frequency,
        },
        DomainKind::PolygonFile => Shape::Polygon { vertices: read_polygon(cfg)? },
    };
    if !(cfg.h > 1e-3 && cfg.h < 0.5) {
        return usage(format!("--h must lie in (1e-3, 0.5), got {}", cfg.h));
    }
    Ok(DiskDomain::centered_at(shape, p, cfg.center)?)
}

fn fem(cfg: &RunConfig) -> Outcome {
    let d = build_domain(cfg)?;
    let s = fem_eigs(&d, cfg.h, COUNT)?;
    let mut table = Table::new(vec!["index", "lambda", "residual"]);
    for (i, (l, r)) in s.eigenvalues.iter().zip(&s.residuals).enumerate() {
        table.push(vec![(i + 1).into(), (*l).into(), (*r).into()]);
    }
    let pass = s.lambda1 < s.lambda2 && s.residuals.iter().all(|r| *r <= EIG_TOL);
    let mesh = s.u1.mesh();
    Ok(Report {
        result: json!({
            "eigenvalues": s.eigenvalues,
            "residuals": s.residuals,
            "vertices": mesh.num_vertices(),
            "triangles": mesh.triangles.len(),
            "mesh_h": mesh.h,
        }),
        table,
        pass,
    })
}

fn ppw(cfg: &RunConfig) -> Outcome {
    let d = build_domain(cfg)?;
    let (report, spectrum) = ppw_run(&d, cfg.h)?;
    let gap = gap_bound_check(&spectrum, &report, &d.p)?;
    let mut rows = vec![
        ("lambda1_omega", report.lambda1_omega),
        ("lambda2_omega", report.lambda2_omega),
        ("theta_tilde", report.theta_tilde),
        ("lambda2_s1", report.lambda2_s1),
        ("margin", report.margin),
        ("relative_margin", report.relative_margin),
        ("gap", gap.gap),
        ("bound", gap.bound),
    ];
    let names: Vec<String> = gap.chain.iter().map(|c| format!("excess_{}", c.id)).collect();
    let excess: Vec<(&str, f64)> = names.iter().map(String::as_str).zip(gap.chain.iter().map(|c| c.relative_excess)).collect();
    rows.extend(excess);
    let pass = report.pass && gap.pass;
    Ok(Report {
        result: json!({"ppw": to_value(&report), "gap_bound": to_value(&gap), "pass": pass}),
        table: quantities(&rows),
        pass,
    })
}

fn chiti(cfg: &RunConfig) -> Outcome {
    let d = build_domain(cfg)?;
    let (report, spectrum) = ppw_run(&d, cfg.h)?;
    let u1 = &spectrum.u1;
    let compare = chiti_compare(u1, report.theta_tilde, &d.p)?;
    let z = GroundProfile::new(report.theta_tilde, &d.p, u1.l2_norm_sq())?;
    let ode = chiti_ode_residuals(u1, &z, report.lambda1_omega, &d.p)?;
    let sharp = decreasing_rearrangement(u1, &d.p)?;
    let mut table = Table::new(vec!["s", "u1_sharp", "z0_sharp"]);
    for i in 0..=COMPARE_SAMPLES {
        let s = z.volume * i as f64 / COMPARE_SAMPLES as f64;
        table.push(vec![s.into(), sharp.value_at(s).into(), Cell::Num(z.sharp(s)?)]);
    }
    let pass = compare.pass && ode.ball_pass && (ode.domain_pass || ode.inconclusive);
    Ok(Report {
        result: json!({"comparison": to_value(&compare), "relations": to_value(&ode), "pass": pass}),
        table,
        pass,
    })
}

fn center(cfg: &RunConfig) -> Outcome {
    let d = build_domain(cfg)?;
    let p = d.p;
    let s = fem_eigs(&d, cfg.h, 2)?;
    let theta_tilde = radius_for_lambda1(s.lambda1, &p)?;
    let table = GapFunctions::new(theta_tilde, &p)?.table(4096)?;
    let g = |t: f64| table.g(t);
    let m = WeightedPoints::from_field(&s.u1, &p)?;
    let state = center_of_mass_shift(&m, g, p.rho())?;
    let moved = shift_field(&s.u1, &state.boost)?;
    let after = hyperppw::fem::mesh_spectrum(moved.mesh_arc(), &p, 2)?;
    let shift = p.rho() * geodesic_distance(&MinkowskiPoint::origin(2), &state.z0);
    let change = (after.lambda1 / s.lambda1 - 1.0).abs();
    let pass = state.residual_norm <= state.tolerance && change <= 1e-3;
    Ok(Report {
        result: json!({
            "z0": state.z0.coords(),
            "shift_distance": shift,
            "residual": state.residual,
            "residual_norm": state.residual_norm,
            "tolerance": state.tolerance,
            "iterations": state.iterations,
            "multiple_zeros": state.multiple_zeros,
            "theta_tilde": theta_tilde,
            "lambda1_before": s.lambda1,
            "lambda1_after": after.lambda1,
            "pass": pass,
        }),
        table: quantities(&[
            ("shift_distance", shift),
            ("residual_norm", state.residual_norm),
            ("tolerance", state.tolerance),
            ("lambda1_before", s.lambda1),
            ("lambda1_after", after.lambda1),
        ]),
        pass,
    })
}
