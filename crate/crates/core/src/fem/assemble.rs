//! P1 stiffness and mass matrices for the hyperbolic plane in the disk model.
//!
//! The Dirichlet energy is conformally invariant in two dimensions, so the
//! stiffness matrix is the Euclidean one; the mass matrix carries the area
//! weight `mu^2` with `mu = 2 / (1 - |x|^2 / rho^2)`.

use rayon::prelude::*;
use sprs::{CsMat, TriMat};

use super::mesh::TriMesh;
use crate::error::{Error, Result};
use crate::geometry::SpaceParams;

/// Area weight `mu(x)^2` of the disk metric.
pub fn area_weight(x: [f64; 2], rho: f64) -> f64 {
    let mu = 2.0 / (1.0 - (x[0] * x[0] + x[1] * x[1]) / (rho * rho));
    mu * mu
}

/// Edge-midpoint rule: exact for quadratics, weights `area / 3`.
/// Returns the three points and, for each, the barycentric coordinates.
pub(crate) fn midpoint_rule(v: [[f64; 2]; 3]) -> [([f64; 2], [f64; 3]); 3] {
    let mid = |a: [f64; 2], b: [f64; 2]| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    [
        (mid(v[0], v[1]), [0.5, 0.5, 0.0]),
        (mid(v[1], v[2]), [0.0, 0.5, 0.5]),
        (mid(v[2], v[0]), [0.5, 0.0, 0.5]),
    ]
}

type Entries = Vec<(usize, usize, f64)>;

fn element(mesh: &TriMesh, t: usize) -> (Entries, Entries) {
    let idx = mesh.triangles[t];
    let v = idx.map(|i| mesh.vertices[i]);
    let area = mesh.triangle_area(t);
    // Gradients of barycentric coordinates: rotate opposite edges.
    let grads: [[f64; 2]; 3] = std::array::from_fn(|k| {
        let (a, b) = (v[(k + 1) % 3], v[(k + 2) % 3]);
        [(a[1] - b[1]) / (2.0 * area), (b[0] - a[0]) / (2.0 * area)]
    });
    let mut k_entries = Vec::with_capacity(9);
    let mut m_entries = Vec::with_capacity(9);
    let quad = midpoint_rule(v);
    for i in 0..3 {
        for j in 0..3 {
            let stiff = area * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
            let mass: f64 = quad
                .iter()
                .map(|(x, bary)| area / 3.0 * area_weight(*x, mesh.rho) * bary[i] * bary[j])
                .sum();
            k_entries.push((idx[i], idx[j], stiff));
            m_entries.push((idx[i], idx[j], mass));
        }
    }
    (k_entries, m_entries)
}

/// Full stiffness and mass matrices, boundary vertices included.
pub fn assemble(mesh: &TriMesh, p: &SpaceParams) -> Result<(CsMat<f64>, CsMat<f64>)> {
    if p.n() != 2 {
        return Err(Error::UnsupportedDimension(p.n()));
    }
    if (p.rho() - mesh.rho).abs() > 1e-12 * p.rho() {
        return Err(Error::Domain(format!(
            "mesh built for rho = {} but assembled with rho = {}",
            mesh.rho,
            p.rho()
        )));
    }
    let n = mesh.num_vertices();
    let parts: Vec<(Entries, Entries)> = (0..mesh.triangles.len()).into_par_iter().map(|t| element(mesh, t)).collect();
    let mut k = TriMat::with_capacity((n, n), 9 * parts.len());
    let mut m = TriMat::with_capacity((n, n), 9 * parts.len());
    for (ke, me) in &parts {
        for &(i, j, v) in ke {
            k.add_triplet(i, j, v);
        }
        for &(i, j, v) in me {
            m.add_triplet(i, j, v);
        }
    }
    Ok((k.to_csr(), m.to_csr()))
}

/// Principal submatrix on the given (sorted) index set.
pub fn restrict(mat: &CsMat<f64>, keep: &[usize]) -> CsMat<f64> {
    let mut position = vec![usize::MAX; mat.rows()];
    for (new, &old) in keep.iter().enumerate() {
        position[old] = new;
    }
    let mut out = TriMat::new((keep.len(), keep.len()));
    for (v, (i, j)) in mat.iter() {
        let (a, b) = (position[i], position[j]);
        if a != usize::MAX && b != usize::MAX {
            out.add_triplet(a, b, *v);
        }
    }
    out.to_csr()
}
