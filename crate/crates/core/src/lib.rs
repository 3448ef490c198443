//! Numerical tools for the first two Dirichlet eigenvalues of the Laplacian
//! on domains in hyperbolic space.

pub mod ball;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod ode;
pub mod ppw;
pub mod rearrange;
pub mod quadrature;
pub mod radial;
pub mod roots;

pub use error::{Error, Result};
pub use geometry::{
    ball_surface, ball_volume, boost_to_origin, disk_to_minkowski, geodesic_distance, minkowski_to_disk,
    radius_from_volume, BallCoordinates, LorentzBoost, MinkowskiPoint, SpaceParams,
};
pub use radial::{
    count_zeros, first_zero, integrate_radial, series_start, RadialMode, RadialSample, RadialSolution,
    ShootingConfig,
};
pub use ball::{
    ball_eigenvalue, ball_eigenvalue_k, ball_lambdas, cross_curvature_compare, crossing_facts_check,
    radius_for_lambda1, ratio_curve, theta_map, BallEigenvalue, CrossCurvatureReport, CrossingFactsReport,
    RatioCurve, RatioRow,
};
pub use ppw::{build_gap_functions, verify_monotonicity_facts, verify_z_lemmas, FactReport, GapFunctions, GapLimits, GapSample, GapTable, LemmaReport, ZDecomposition};
pub use rearrange::{
    center_of_mass_shift, chiti_compare, chiti_ode_residuals, decreasing_rearrangement, increasing_rearrangement,
    CenterOfMassState, ChitiOdeReport, ChitiReport, GroundProfile, LevelDistribution, RearrangedField, WeightedPoints,
};
pub use rearrange::{cone_ratio, first_moments, shift_field};
pub use fem::{
    fem_eigs, gap_bound_check, generate_mesh, mesh_spectrum, ppw_check, ppw_run, DiscreteField, DiskDomain, GapBoundReport,
    PpwReport, Shape, SpectralResult, TriMesh,
};
