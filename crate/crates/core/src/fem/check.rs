//! End-to-end comparison of a domain's second eigenvalue with that of the
//! ball having the same first eigenvalue, and the integral bounds behind it.

use serde::{Deserialize, Serialize};

use super::domain::DiskDomain;
use super::eigen::{fem_eigs, SpectralResult};
use crate::ball::{ball_lambdas, radius_for_lambda1};
use crate::error::{Error, Result};
use crate::geometry::{ball_surface, ball_volume, disk_to_minkowski, radius_from_volume, SpaceParams};
use crate::ppw::{GapFunctions, GapTable};
use crate::quadrature;
use crate::rearrange::{center_of_mass_shift, GroundProfile, RearrangedField, WeightedPoints};

/// Relative discretization allowance for inequality checks at `h = 0.05`.
pub const FEM_ALLOWANCE: f64 = 0.02;
const TABLE_SAMPLES: usize = 4096;

/// Second eigenvalue of a domain against the ball with equal first eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpwReport {
    pub lambda1_omega: f64,
    pub lambda2_omega: f64,
    /// All computed eigenvalues; a near-degenerate pair shows up as `[1]` and `[2]`.
    pub eigenvalues: Vec<f64>,
    pub theta_tilde: f64,
    pub lambda2_s1: f64,
    /// `lambda2(S1) - lambda2(Omega)`.
    pub margin: f64,
    pub relative_margin: f64,
    /// `FEM_ALLOWANCE * lambda2(Omega)`.
    pub allowance: f64,
    pub h: f64,
    pub pass: bool,
}

/// Meshes the domain, solves for three eigenpairs and compares.
pub fn ppw_check(domain_: &DiskDomain, h: f64) -> Result<PpwReport> {
    Ok(ppw_run(domain_, h)?.0)
}

/// [`ppw_check`] that also hands back the spectrum for further checks.
pub fn ppw_run(domain_: &DiskDomain, h: f64) -> Result<(PpwReport, SpectralResult)> {
    let spectrum = fem_eigs(domain_, h, 3)?;
    let report = ppw_from_spectrum(&spectrum, &domain_.p, h)?;
    Ok((report, spectrum))
}

/// Comparison for an already computed spectrum.
pub fn ppw_from_spectrum(spectrum: &SpectralResult, p: &SpaceParams, h: f64) -> Result<PpwReport> {
    let (l1, l2) = (spectrum.lambda1, spectrum.lambda2);
    let theta_tilde = radius_for_lambda1(l1, p)?;
    let (_, lambda2_s1) = ball_lambdas(theta_tilde, p)?;
    let margin = lambda2_s1 - l2;
    let allowance = FEM_ALLOWANCE * l2;
    Ok(PpwReport {
        lambda1_omega: l1,
        lambda2_omega: l2,
        eigenvalues: spectrum.eigenvalues.clone(),
        theta_tilde,
        lambda2_s1,
        margin,
        relative_margin: margin / l2,
        allowance,
        h,
        pass: margin >= -allowance,
    })
}

/// One inequality `lhs <= rhs` (or `>=`), checked with a relative allowance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub less_or_equal: bool,
    /// `(lhs - rhs) / |rhs|` for `<=`, `(rhs - lhs) / |rhs|` for `>=`.
    pub relative_excess: f64,
    pub pass: bool,
}

impl InequalityCheck {
    fn new(id: &str, lhs: f64, rhs: f64, less_or_equal: bool, allowance: f64) -> Self {
        let excess = if less_or_equal { lhs - rhs } else { rhs - lhs } / rhs.abs().max(f64::MIN_POSITIVE);
        Self {
            id: id.to_owned(),
            lhs,
            rhs,
            less_or_equal,
            relative_excess: excess,
            pass: excess <= allowance,
        }
    }
}

/// The gap bound for the shifted ground state and the two chains of integrals
/// leading from the domain to the ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapBoundReport {
    pub gap: f64,
    /// `int u^2 B / int u^2 g^2` over the shifted domain.
    pub bound: f64,
    /// `gap <= bound + allowance * lambda2`.
    pub gap_pass: bool,
    /// `|gap - bound| / bound`, small on balls.
    pub gap_relative_difference: f64,
    pub denominator: f64,
    pub denominator_positive: bool,
    /// `int u^2 B` through its rearrangements down to the ball, in order.
    pub b_chain: [f64; 4],
    /// `int u^2 g^2` likewise.
    pub g_chain: [f64; 4],
    pub chain: Vec<InequalityCheck>,
    /// `b_chain[3] / g_chain[3]`, the bound attained by the ball.
    pub ball_bound: f64,
    /// `lambda2(S1) - lambda1(S1)` from shooting.
    pub ball_gap: f64,
    pub volume_s1: f64,
    pub volume_omega: f64,
    pub volume_order_pass: bool,
    pub shift_distance: f64,
    pub moment_residual: f64,
    pub pass: bool,
}

/// Evaluates the gap bound after moving the domain to its center of mass with
/// respect to `g`.
pub fn gap_bound_check(spectrum: &SpectralResult, report: &PpwReport, p: &SpaceParams) -> Result<GapBoundReport> {
    if p.n() != 2 {
        return Err(Error::UnsupportedDimension(p.n()));
    }
    let gf = GapFunctions::new(report.theta_tilde, p)?;
    let table = gf.table(TABLE_SAMPLES)?;
    gap_bound_with_table(spectrum, report, p, &table)
}

fn gap_bound_with_table(
    spectrum: &SpectralResult,
    report: &PpwReport,
    p: &SpaceParams,
    table: &GapTable,
) -> Result<GapBoundReport> {
    let rho = p.rho();
    let cells = spectrum.u1.cells();
    let mut points = Vec::with_capacity(cells.len());
    let mut weights = Vec::with_capacity(cells.len());
    for (x, vol, u) in &cells {
        points.push(disk_to_minkowski(x, p)?);
        weights.push(vol * u * u);
    }
    let measure = WeightedPoints::new(points, weights)?;
    let state = center_of_mass_shift(&measure, |t| table.g(t), rho)?;
    let moved = measure.transformed(&state.boost);

    // Per cell: volume, u^2, geodesic radius after the shift.
    let shifted: Vec<(f64, f64, f64)> = cells
        .iter()
        .zip(&moved.points)
        .map(|((_, vol, u), y)| (*vol, u * u, rho * y.radius()))
        .collect();

    let i0: f64 = shifted.iter().map(|(v, u2, t)| v * u2 * table.b(*t)).sum();
    let j0: f64 = shifted.iter().map(|(v, u2, t)| v * u2 * table.g(*t).powi(2)).sum();
    let norm_sq: f64 = shifted.iter().map(|(v, u2, _)| v * u2).sum();
    let volume_omega: f64 = shifted.iter().map(|(v, _, _)| v).sum();

    let u2_dec = RearrangedField::from_cells(&shifted.iter().map(|(v, u2, _)| (*v, *u2)).collect::<Vec<_>>(), true)?;
    let b_dec = RearrangedField::from_cells(&shifted.iter().map(|(v, _, t)| (*v, table.b(*t))).collect::<Vec<_>>(), true)?;
    let g2_inc = RearrangedField::from_cells(
        &shifted.iter().map(|(v, _, t)| (*v, table.g(*t).powi(2))).collect::<Vec<_>>(),
        false,
    )?;
    let i1 = u2_dec.integral_of_product(&b_dec);
    let j1 = u2_dec.integral_of_product(&g2_inc);

    let radius_at = |s: f64| radius_from_volume(s, p).unwrap_or(f64::NAN);
    let i2 = u2_dec.integral_with(|s| table.b(radius_at(s)));
    let j2 = u2_dec.integral_with(|s| table.g(radius_at(s)).powi(2));

    let ground = GroundProfile::new(report.theta_tilde, p, norm_sq)?;
    let ball_integral = |f: &dyn Fn(f64) -> f64| -> Result<f64> {
        let failure = std::cell::Cell::new(None);
        let v = quadrature::integrate(
            |t| match ground.at_radius(t).and_then(|z| Ok(z * z * ball_surface(t, p)?)) {
                Ok(w) => w * f(t),
                Err(e) => {
                    failure.set(Some(e));
                    f64::NAN
                }
            },
            0.0,
            report.theta_tilde,
            1e-10,
        );
        match failure.into_inner() {
            Some(e) => Err(e),
            None => Ok(v),
        }
    };
    let i3 = ball_integral(&|t| table.b(t))?;
    let j3 = ball_integral(&|t| table.g(t).powi(2))?;

    let a = FEM_ALLOWANCE;
    let chain = vec![
        InequalityCheck::new("b_rearranged", i0, i1, true, a),
        InequalityCheck::new("b_monotone", i1, i2, true, a),
        InequalityCheck::new("b_comparison", i2, i3, true, a),
        InequalityCheck::new("g_rearranged", j0, j1, false, a),
        InequalityCheck::new("g_monotone", j1, j2, false, a),
        InequalityCheck::new("g_comparison", j2, j3, false, a),
    ];

    let gap = report.lambda2_omega - report.lambda1_omega;
    let bound = i0 / j0;
    let gap_pass = gap <= bound + a * report.lambda2_omega;
    let (l1s, l2s) = ball_lambdas(report.theta_tilde, p)?;
    let volume_s1 = ball_volume(report.theta_tilde, p)?;
    let volume_order_pass = volume_s1 <= volume_omega * (1.0 + a);
    let denominator_positive = j0 > 0.0;
    let pass = gap_pass && denominator_positive && volume_order_pass && chain.iter().all(|c| c.pass);
    Ok(GapBoundReport {
        gap,
        bound,
        gap_pass,
        gap_relative_difference: (gap - bound).abs() / bound,
        denominator: j0,
        denominator_positive,
        b_chain: [i0, i1, i2, i3],
        g_chain: [j0, j1, j2, j3],
        chain,
        ball_bound: i3 / j3,
        ball_gap: l2s - l1s,
        volume_s1,
        volume_omega,
        volume_order_pass,
        shift_distance: rho * state.z0.radius(),
        moment_residual: state.residual_norm,
        pass,
    })
}
