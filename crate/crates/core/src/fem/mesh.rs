//! Conforming triangulations of disk domains.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use spade::{AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};

use super::domain::{disk_distance, DiskDomain};
use crate::error::{domain, Error, Result};
use crate::geometry::{disk_to_minkowski, minkowski_to_disk, LorentzBoost, SpaceParams};

/// Minimum angle requested from the refinement, in degrees.
pub const MIN_ANGLE_DEG: f64 = 20.0;
const MAX_TRIES: usize = 8;

/// A P1 triangle mesh in disk coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriMesh {
    pub vertices: Vec<[f64; 2]>,
    /// Counter-clockwise index triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<bool>,
    /// Longest geodesic edge.
    pub h: f64,
    pub rho: f64,
}

fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

fn angle_at(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    let u = [b[0] - a[0], b[1] - a[1]];
    let v = [c[0] - a[0], c[1] - a[1]];
    let cross = u[0] * v[1] - u[1] * v[0];
    let dot = u[0] * v[0] + u[1] * v[1];
    cross.abs().atan2(dot)
}

impl TriMesh {
    /// Builds a mesh from raw arrays, fixing orientation and recomputing `h`.
    pub fn from_parts(vertices: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>, boundary: Vec<bool>, rho: f64) -> Result<Self> {
        if boundary.len() != vertices.len() {
            return Err(Error::Mesh("boundary mask length differs from vertex count".into()));
        }
        if vertices.iter().any(|v| v[0] * v[0] + v[1] * v[1] >= rho * rho) {
            return Err(Error::Mesh("vertex outside the disk".into()));
        }
        let mut triangles = triangles;
        for t in &mut triangles {
            if t.iter().any(|&i| i >= vertices.len()) {
                return Err(Error::Mesh(format!("triangle {t:?} references a missing vertex")));
            }
            let area = signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
            if area == 0.0 {
                return Err(Error::Mesh(format!("degenerate triangle {t:?}")));
            }
            if area < 0.0 {
                t.swap(1, 2);
            }
        }
        let mut mesh = Self { vertices, triangles, boundary, h: 0.0, rho };
        mesh.h = mesh.max_edge();
        Ok(mesh)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    fn max_edge(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| (0..3).map(move |k| (t[k], t[(k + 1) % 3])))
            .map(|(a, b)| disk_distance(self.vertices[a], self.vertices[b], self.rho))
            .fold(0.0, f64::max)
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_deg(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i]);
                [angle_at(a, b, c), angle_at(b, c, a), angle_at(c, a, b)]
            })
            .fold(f64::INFINITY, f64::min)
            .to_degrees()
    }

    /// Euclidean signed area of triangle `t` in disk coordinates.
    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        signed_area(a, b, c)
    }

    /// Indices of vertices not on the boundary.
    pub fn interior(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&i| !self.boundary[i]).collect()
    }

    /// Image of the mesh under a disk isometry.
    pub fn transformed(&self, boost: &LorentzBoost) -> Result<Self> {
        let p = SpaceParams::new(2, self.rho)?;
        let vertices = self
            .vertices
            .iter()
            .map(|v| {
                let y = boost.apply(&disk_to_minkowski(v, &p)?);
                let d = minkowski_to_disk(&y, &p);
                Ok([d[0], d[1]])
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(vertices, self.triangles.clone(), self.boundary.clone(), self.rho)
    }

    /// Writes the plain-text interchange format:
    /// `nv nt`, then `x y boundary_flag` per vertex, then `i j k` per triangle.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.vertices.len(), self.triangles.len())?;
        for (v, b) in self.vertices.iter().zip(&self.boundary) {
            writeln!(w, "{:.17e} {:.17e} {}", v[0], v[1], u8::from(*b))?;
        }
        for t in &self.triangles {
            writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }

    /// Reads the plain-text interchange format.
    pub fn read_text<R: BufRead>(r: R, rho: f64) -> Result<Self> {
        let bad = |msg: String| Error::Mesh(msg);
        let mut lines = r.lines().map(|l| l.map_err(|e| bad(e.to_string())));
        let mut next = || -> Result<Vec<String>> {
            loop {
                match lines.next() {
                    Some(line) => {
                        let line = line?;
                        let fields: Vec<String> = line.split_whitespace().map(str::to_string).collect();
                        if !fields.is_empty() {
                            return Ok(fields);
                        }
                    }
                    None => return Err(bad("unexpected end of mesh file".into())),
                }
            }
        };
        let parse_usize = |s: &str| s.parse::<usize>().map_err(|e| bad(format!("{s}: {e}")));
        let parse_f64 = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("{s}: {e}")));
        let header = next()?;
        if header.len() != 2 {
            return Err(bad("header must be `nv nt`".into()));
        }
        let (nv, nt) = (parse_usize(&header[0])?, parse_usize(&header[1])?);
        let mut vertices = Vec::with_capacity(nv);
        let mut boundary = Vec::with_capacity(nv);
        for _ in 0..nv {
            let f = next()?;
            if f.len() != 3 {
                return Err(bad("vertex line must be `x y boundary_flag`".into()));
            }
            vertices.push([parse_f64(&f[0])?, parse_f64(&f[1])?]);
            boundary.push(match f[2].as_str() {
                "0" => false,
                "1" => true,
                other => return Err(bad(format!("boundary flag must be 0 or 1, got {other}"))),
            });
        }
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let f = next()?;
            if f.len() != 3 {
                return Err(bad("triangle line must be `i j k`".into()));
            }
            triangles.push([parse_usize(&f[0])?, parse_usize(&f[1])?, parse_usize(&f[2])?]);
        }
        Self::from_parts(vertices, triangles, boundary, rho)
    }
}

/// Triangulates `domain` with longest geodesic edge close to `target_h`.
pub fn generate_mesh(domain_: &DiskDomain, target_h: f64) -> Result<TriMesh> {
    if !(target_h > 1e-3 && target_h < 0.5) {
        return domain(format!("target_h must lie in (1e-3, 0.5), got {target_h}"));
    }
    let rho = domain_.rho();
    let outline = domain_.boundary(0.5 * target_h)?;
    let mu_max = outline
        .iter()
        .map(|x| 2.0 / (1.0 - (x[0] * x[0] + x[1] * x[1]) / (rho * rho)))
        .fold(2.0, f64::max);
    let mut edge = target_h / mu_max;
    for _ in 0..MAX_TRIES {
        let mesh = triangulate(&outline, edge, rho)?;
        if mesh.h <= 1.5 * target_h {
            return Ok(mesh);
        }
        edge *= 0.8;
    }
    Err(Error::Mesh(format!("could not reach target_h = {target_h}")))
}

fn triangulate(outline: &[[f64; 2]], edge: f64, rho: f64) -> Result<TriMesh> {
    let m = outline.len();
    let points: Vec<Point2<f64>> = outline.iter().map(|v| Point2::new(v[0], v[1])).collect();
    let edges: Vec<[usize; 2]> = (0..m).map(|i| [i, (i + 1) % m]).collect();
    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> =
        ConstrainedDelaunayTriangulation::bulk_load_cdt(points, edges).map_err(|e| Error::Mesh(format!("{e:?}")))?;
    let max_area = 3f64.sqrt() / 4.0 * edge * edge;
    let params = RefinementParameters::<f64>::new()
        .with_angle_limit(AngleLimit::from_deg(MIN_ANGLE_DEG + 0.5))
        .with_max_allowed_area(max_area)
        .with_max_additional_vertices(50_000_000)
        .exclude_outer_faces(true);
    let result = cdt.refine(params);
    if !result.refinement_complete {
        return Err(Error::Mesh("refinement did not complete".into()));
    }
    let excluded: HashSet<_> = result.excluded_faces.iter().copied().collect();

    let mut index: HashMap<usize, usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for face in cdt.inner_faces() {
        if excluded.contains(&face.fix()) {
            continue;
        }
        let tri = face.vertices().map(|v| {
            let k = v.fix().index();
            *index.entry(k).or_insert_with(|| {
                let p = v.position();
                vertices.push([p.x, p.y]);
                vertices.len() - 1
            })
        });
        triangles.push(tri);
    }
    let mut edge_count: HashMap<(usize, usize), u32> = HashMap::new();
    for t in &triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            *edge_count.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let mut boundary = vec![false; vertices.len()];
    for ((a, b), c) in edge_count {
        if c == 1 {
            boundary[a] = true;
            boundary[b] = true;
        }
    }
    TriMesh::from_parts(vertices, triangles, boundary, rho)
}
