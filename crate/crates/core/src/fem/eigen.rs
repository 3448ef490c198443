//! Lowest generalized eigenpairs `K v = lambda M v` and the discrete fields they define.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sprs::CsMat;
use sprs_ldl::Ldl;

use super::assemble::{assemble, midpoint_rule, restrict, area_weight};
use super::domain::DiskDomain;
use super::mesh::{generate_mesh, TriMesh};
use crate::error::{domain, Error, Result};
use crate::geometry::SpaceParams;

pub const MAX_EIGS: usize = 6;
pub const EIG_TOL: f64 = 1e-8;
const GUARD_VECTORS: usize = 4;
const MAX_ITER: usize = 1000;
const SEED: u64 = 0x5eed_2d1a;

/// Converged eigenpairs on the unknowns that were kept.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    /// `M`-orthonormal eigenvectors.
    pub vectors: Vec<Vec<f64>>,
    /// `|K v - lambda M v| / |M v|` for each pair.
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

fn matvec(a: &CsMat<f64>, x: &[f64]) -> Vec<f64> {
    a.outer_iterator()
        .map(|row| row.iter().map(|(j, v)| v * x[j]).sum())
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Combines columns: `out_j = sum_i cols_i c_{ij}`.
fn combine(cols: &[Vec<f64>], c: &DMatrix<f64>) -> Vec<Vec<f64>> {
    let n = cols[0].len();
    (0..c.ncols())
        .into_par_iter()
        .map(|j| {
            let mut out = vec![0.0; n];
            for (i, col) in cols.iter().enumerate() {
                let w = c[(i, j)];
                if w != 0.0 {
                    out.iter_mut().zip(col).for_each(|(o, v)| *o += w * v);
                }
            }
            out
        })
        .collect()
}

fn gram(a: &[Vec<f64>], b: &[Vec<f64>]) -> DMatrix<f64> {
    let k = a.len();
    let mut g = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let v = 0.5 * (dot(&a[i], &b[j]) + dot(&a[j], &b[i]));
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// Solves `A v = theta B v` for a small symmetric pencil with `B` positive definite.
fn small_pencil(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let chol = b
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Factorization("projected mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Factorization("singular projected mass matrix".into()))?;
    let mut c = &linv * a * linv.transpose();
    c = 0.5 * (&c + c.transpose());
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let w = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, linv.transpose() * w))
}

/// The `count` lowest eigenpairs of `K v = lambda M v` with `K`, `M` symmetric
/// positive definite, by shift-invert block subspace iteration.
pub fn solve_lowest_eigs(k: &CsMat<f64>, m: &CsMat<f64>, count: usize) -> Result<EigenPairs> {
    let n = k.rows();
    if !(1..=MAX_EIGS).contains(&count) {
        return domain(format!("can compute between 1 and {MAX_EIGS} eigenpairs, asked for {count}"));
    }
    if k.shape() != m.shape() || k.cols() != n {
        return domain("stiffness and mass must be square and of equal size");
    }
    let block = (count + GUARD_VECTORS).min(n);
    if block < count {
        return domain(format!("only {n} unknowns for {count} eigenpairs"));
    }
    let factor = Ldl::new()
        .numeric(k.view())
        .map_err(|e| Error::Factorization(format!("{e:?}")))?;
    if factor.d().iter().any(|d| !(*d > 0.0)) {
        return Err(Error::Factorization("stiffness matrix is not positive definite".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut x: Vec<Vec<f64>> = (0..block)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let mut best = f64::INFINITY;
    for iter in 1..=MAX_ITER {
        let mx: Vec<Vec<f64>> = x.par_iter().map(|c| matvec(m, c)).collect();
        let y: Vec<Vec<f64>> = mx.par_iter().map(|c| factor.solve(c)).collect();
        let my: Vec<Vec<f64>> = y.par_iter().map(|c| matvec(m, c)).collect();
        // K y = M x, so y^T K y = y^T (M x).
        let a = gram(&y, &mx);
        let b = gram(&y, &my);
        let (theta, v) = small_pencil(&a, &b)?;
        x = combine(&y, &v);
        let kx = combine(&mx, &v);
        let mxn = combine(&my, &v);
        let res: Vec<f64> = (0..count)
            .map(|i| {
                let r: Vec<f64> = kx[i].iter().zip(&mxn[i]).map(|(p, q)| p - theta[i] * q).collect();
                norm(&r) / norm(&mxn[i])
            })
            .collect();
        let worst = res.iter().copied().fold(0.0, f64::max);
        best = best.min(worst);
        if worst <= 0.1 * EIG_TOL {
            return finish(k, m, x, theta, count, iter);
        }
    }
    Err(Error::NoConvergence {
        what: "subspace iteration",
        iterations: MAX_ITER,
        residual: best,
    })
}

fn finish(k: &CsMat<f64>, m: &CsMat<f64>, x: Vec<Vec<f64>>, theta: Vec<f64>, count: usize, iterations: usize) -> Result<EigenPairs> {
    let mut vectors: Vec<Vec<f64>> = x.into_iter().take(count).collect();
    let mut residuals = Vec::with_capacity(count);
    for (i, v) in vectors.iter_mut().enumerate() {
        let mv = matvec(m, v);
        let scale = dot(v, &mv).sqrt();
        v.iter_mut().for_each(|c| *c /= scale);
        let kv = matvec(k, v);
        let mv = matvec(m, v);
        let r: Vec<f64> = kv.iter().zip(&mv).map(|(p, q)| p - theta[i] * q).collect();
        residuals.push(norm(&r) / norm(&mv));
    }
    if let Some(v) = vectors.first_mut() {
        if v.iter().sum::<f64>() < 0.0 {
            v.iter_mut().for_each(|c| *c = -*c);
        }
    }
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    if !(worst <= EIG_TOL) {
        return Err(Error::NoConvergence {
            what: "eigenpair residual",
            iterations,
            residual: worst,
        });
    }
    Ok(EigenPairs {
        values: theta.into_iter().take(count).collect(),
        vectors,
        residuals,
        iterations,
    })
}

/// Per-vertex values on a mesh.
#[derive(Debug, Clone)]
pub struct DiscreteField {
    pub values: Vec<f64>,
    mesh: Arc<TriMesh>,
}

impl DiscreteField {
    pub fn new(mesh: Arc<TriMesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.num_vertices() {
            return domain(format!(
                "field has {} values for {} vertices",
                values.len(),
                mesh.num_vertices()
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return domain("field values must be finite");
        }
        Ok(Self { values, mesh })
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> Arc<TriMesh> {
        Arc::clone(&self.mesh)
    }

    /// Quadrature cells `(point, hyperbolic volume, value)` of the edge-midpoint rule.
    pub fn cells(&self) -> Vec<([f64; 2], f64, f64)> {
        let mesh = &*self.mesh;
        (0..mesh.triangles.len())
            .flat_map(|t| {
                let idx = mesh.triangles[t];
                let area = mesh.triangle_area(t);
                let vals = idx.map(|i| self.values[i]);
                midpoint_rule(idx.map(|i| mesh.vertices[i]))
                    .into_iter()
                    .map(move |(x, bary)| {
                        let u = bary[0] * vals[0] + bary[1] * vals[1] + bary[2] * vals[2];
                        (x, area / 3.0 * area_weight(x, mesh.rho), u)
                    })
            })
            .collect()
    }

    /// `int u^2 dV` with the same quadrature as the mass matrix.
    pub fn l2_norm_sq(&self) -> f64 {
        self.cells().iter().map(|(_, w, u)| w * u * u).sum()
    }

    /// Largest absolute value on boundary vertices.
    pub fn boundary_max(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.mesh.boundary)
            .filter(|(_, b)| **b)
            .map(|(v, _)| v.abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum SpectralMethod {
    Fem { h: f64 },
    Shooting { tolerance: f64 },
}

/// Lowest Dirichlet eigenvalues with their eigenfunctions.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub lambda1: f64,
    pub lambda2: f64,
    /// All computed eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub u1: DiscreteField,
    pub u2: DiscreteField,
    pub method: SpectralMethod,
}

/// Eigenpairs of the Dirichlet problem on a given mesh.
pub fn mesh_spectrum(mesh: Arc<TriMesh>, p: &SpaceParams, count: usize) -> Result<SpectralResult> {
    if count < 2 {
        return domain("need at least two eigenpairs");
    }
    let (k, m) = assemble(&mesh, p)?;
    let dofs = mesh.interior();
    if dofs.len() <= count + GUARD_VECTORS {
        return Err(Error::Mesh(format!("mesh has only {} interior vertices", dofs.len())));
    }
    let pairs = solve_lowest_eigs(&restrict(&k, &dofs), &restrict(&m, &dofs), count)?;
    let lift = |v: &[f64]| {
        let mut full = vec![0.0; mesh.num_vertices()];
        for (&i, &x) in dofs.iter().zip(v) {
            full[i] = x;
        }
        full
    };
    let u1 = DiscreteField::new(Arc::clone(&mesh), lift(&pairs.vectors[0]))?;
    let u2 = DiscreteField::new(Arc::clone(&mesh), lift(&pairs.vectors[1]))?;
    Ok(SpectralResult {
        lambda1: pairs.values[0],
        lambda2: pairs.values[1],
        eigenvalues: pairs.values,
        residuals: pairs.residuals,
        u1,
        u2,
        method: SpectralMethod::Fem { h: mesh.h },
    })
}

/// Meshes `domain` at `target_h` and computes `count` eigenpairs.
pub fn fem_eigs(domain_: &DiskDomain, target_h: f64, count: usize) -> Result<SpectralResult> {
    let mesh = Arc::new(generate_mesh(domain_, target_h)?);
    let mut result = mesh_spectrum(mesh, &domain_.p, count)?;
    result.method = SpectralMethod::Fem { h: target_h };
    Ok(result)
}
