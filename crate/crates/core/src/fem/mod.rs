//! Finite elements for the Dirichlet Laplacian on domains of the hyperbolic plane.

pub mod assemble;
pub mod check;
pub mod domain;
pub mod eigen;
pub mod mesh;

pub use assemble::{area_weight, assemble, restrict};
pub use domain::{disk_distance, DiskDomain, Shape};
pub use eigen::{fem_eigs, mesh_spectrum, solve_lowest_eigs, DiscreteField, EigenPairs, SpectralMethod, SpectralResult};
pub use mesh::{generate_mesh, TriMesh};
pub use check::{gap_bound_check, ppw_check, ppw_from_spectrum, ppw_run, GapBoundReport, InequalityCheck, PpwReport, FEM_ALLOWANCE};
