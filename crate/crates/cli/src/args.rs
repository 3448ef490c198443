use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "hyperppw", version, about = "Dirichlet eigenvalues of balls and domains in hyperbolic space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub config: RunConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Lowest two Dirichlet eigenvalues of a geodesic ball.
    BallSpectrum,
    /// lambda2 / lambda1 of balls along a radius grid.
    RatioCurve,
    /// Radius of the ball with a prescribed first eigenvalue.
    RadiusForLambda1,
    /// Compare balls with equal first eigenvalue in two curvatures.
    CrossCurvature,
    /// Check the properties of the gap functions g, B and the Z family.
    VerifyLemmas,
    /// Lowest eigenvalues of a domain by finite elements.
    FemEigs,
    /// Second eigenvalue of a domain against the matching ball, with the gap bound.
    PpwCheck,
    /// Compare the rearranged ground state with the ball ground state.
    Chiti,
    /// Boost a domain's ground state to its weighted center of mass.
    CenterOfMass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKind {
    Ball,
    Ellipse,
    Bump,
    PolygonFile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// `start:stop:count`, evenly spaced and inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.start],
            c => (0..c)
                .map(|i| self.start + (self.stop - self.start) * i as f64 / (c - 1) as f64)
                .collect(),
        }
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts.as_slice() else {
            return Err(format!("expected start:stop:count, got '{s}'"));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad grid bound '{t}': {e}"));
        let (start, stop) = (num(a)?, num(b)?);
        let count = c.trim().parse::<usize>().map_err(|e| format!("bad grid count '{c}': {e}"))?;
        if !start.is_finite() || !stop.is_finite() {
            return Err("grid bounds must be finite".into());
        }
        Ok(Grid { start, stop, count })
    }
}

#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct RunConfig {
    /// Space dimension.
    #[arg(long, global = true, default_value_t = 2)]
    pub n: usize,
    /// Curvature radius (curvature is -1/rho^2).
    #[arg(long, global = true, default_value_t = 1.0)]
    pub rho: f64,
    /// Second curvature radius for cross-curvature.
    #[arg(long, global = true, default_value_t = 2.0)]
    pub rho2: f64,
    /// Ball radius, or base radius of ball and bump domains.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub theta0: f64,
    /// Radius of the ball the gap functions live on.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub theta_tilde: f64,
    /// First eigenvalue for radius-for-lambda1.
    #[arg(long, global = true)]
    pub lambda1: Option<f64>,
    /// Radius grid, or eigenvalue grid for radius-for-lambda1.
    #[arg(long, global = true)]
    pub grid: Option<Grid>,
    #[arg(long, global = true, value_enum, default_value_t = DomainKind::Ball)]
    pub domain: DomainKind,
    /// Ellipse semi-axes.
    #[arg(long, global = true, default_value_t = 1.2)]
    pub a: f64,
    #[arg(long, global = true, default_value_t = 0.8)]
    pub b: f64,
    #[arg(long, global = true, default_value_t = 0.1)]
    pub amplitude: f64,
    #[arg(long, global = true, default_value_t = 5)]
    pub frequency: u32,
    /// Vertices "x y" per line, geodesic normal coordinates around the center.
    #[arg(long, global = true)]
    pub polygon_file: Option<PathBuf>,
    /// Domain center "x,y" in geodesic normal coordinates.
    #[arg(long, global = true, value_parser = parse_center, default_value = "0,0")]
    pub center: [f64; 2],
    /// Target mesh size.
    #[arg(long, global = true, default_value_t = 0.05)]
    pub h: f64,
    /// Relative tolerance of the radial integrator.
    #[arg(long, global = true, default_value_t = 1e-11)]
    pub tol: f64,
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Defaults to csv for ratio-curve and json otherwise.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

fn parse_center(s: &str) -> Result<[f64; 2], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad center '{s}': {e}")))
        .collect::<Result<_, _>>()?;
    match v.as_slice() {
        [x, y] if x.is_finite() && y.is_finite() => Ok([*x, *y]),
        _ => Err(format!("expected x,y for the center, got '{s}'")),
    }
}
