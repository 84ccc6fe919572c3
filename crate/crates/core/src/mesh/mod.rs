//! Discrete harmonic balls on closed triangulated surfaces.
//!
//! The stiffness matrix `L` is the cotangent Laplacian (positive semidefinite,
//! constants in the kernel) and `m` the lumped barycentric masses, so that
//! `L g = e_p - m / A` is the discrete Green equation.

mod checks;
mod generate;
mod geodesic;
mod green;
mod io;
mod linalg;
mod local;
mod obstacle;
mod points;

use std::collections::HashMap;

use crate::error::{Error, Result};

pub use checks::{
    ball_area, check_connected, check_mvp, check_nested, is_nested, compare_with_geodesic_ball, inner_ball_fraction,
    within_one_ring, GeodesicComparison, MvpReport,
};
pub use generate::{ellipsoid, ellipsoid_area, icosphere};
pub use geodesic::{geodesic_distances, sphere_distances};
pub use green::{mesh_green, DiscreteGreen, GreenCache};
pub use io::{read_mesh, read_obj, read_off, write_off};
pub use linalg::{conjugate_gradient, CgReport, CsrMatrix};
pub use local::{local_mean_value_set, LocalSolution};
pub use obstacle::{solve_obstacle, solve_obstacle_with, ObstacleOptions, ObstacleSolution, SolutionRecord};
pub use points::{mesh_minimize_energy, ExclusionReport, MeshEnergyOptions, MeshMinimizer, Violation};

/// Lower clamp of the cotangent weights.
pub const COTAN_FLOOR: f64 = 1e-8;

pub type Vec3 = [f64; 3];

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// A validated closed, oriented triangle mesh with its cotangent Laplacian.
#[derive(Debug, Clone)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
    /// Sorted neighbour lists.
    pub adjacency: Vec<Vec<usize>>,
    /// Clamped cotangent weight of each neighbour, aligned with `adjacency`.
    pub cotan_weights: Vec<Vec<f64>>,
    pub mass: Vec<f64>,
    pub total_area: f64,
    /// Faces incident to each vertex.
    pub vertex_faces: Vec<Vec<usize>>,
    stiffness: CsrMatrix,
}

impl TriMesh {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        validate(&vertices, &faces)?;
        let nv = vertices.len();
        let mut weights: HashMap<(usize, usize), f64> = HashMap::new();
        let mut mass = vec![0.0; nv];
        let mut vertex_faces = vec![Vec::new(); nv];
        for (fi, f) in faces.iter().enumerate() {
            let p = [vertices[f[0]], vertices[f[1]], vertices[f[2]]];
            let area = 0.5 * norm(cross(sub(p[1], p[0]), sub(p[2], p[0])));
            for k in 0..3 {
                mass[f[k]] += area / 3.0;
                vertex_faces[f[k]].push(fi);
                // the angle at corner k is opposite the edge (k+1, k+2)
                let (i, j) = (f[(k + 1) % 3], f[(k + 2) % 3]);
                let u = sub(p[(k + 1) % 3], p[k]);
                let v = sub(p[(k + 2) % 3], p[k]);
                let cot = dot(u, v) / norm(cross(u, v));
                *weights.entry((i.min(j), i.max(j))).or_insert(0.0) += 0.5 * cot;
            }
        }
        let mut adjacency = vec![Vec::new(); nv];
        for &(i, j) in weights.keys() {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        let mut cotan_weights = Vec::with_capacity(nv);
        for (i, nb) in adjacency.iter_mut().enumerate() {
            nb.sort_unstable();
            cotan_weights.push(
                nb.iter()
                    .map(|&j| weights[&(i.min(j), i.max(j))].max(COTAN_FLOOR))
                    .collect::<Vec<f64>>(),
            );
        }
        let stiffness = CsrMatrix::laplacian(&adjacency, &cotan_weights);
        let total_area = mass.iter().sum();
        Ok(TriMesh {
            vertices,
            faces,
            adjacency,
            cotan_weights,
            mass,
            total_area,
            vertex_faces,
            stiffness,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// The cotangent stiffness matrix `L`.
    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    pub fn apply_laplacian(&self, u: &[f64]) -> Vec<f64> {
        self.stiffness.mul(u)
    }

    /// Mean edge length, the mesh size `h`.
    pub fn mean_edge_length(&self) -> f64 {
        let (mut sum, mut count) = (0.0, 0usize);
        for (i, nb) in self.adjacency.iter().enumerate() {
            for &j in nb.iter().filter(|&&j| j > i) {
                sum += norm(sub(self.vertices[i], self.vertices[j]));
                count += 1;
            }
        }
        sum / count as f64
    }

    /// Vertex nearest to `x` in the Euclidean sense.
    pub fn nearest_vertex(&self, x: Vec3) -> usize {
        (0..self.num_vertices())
            .min_by(|&a, &b| {
                norm(sub(self.vertices[a], x)).total_cmp(&norm(sub(self.vertices[b], x)))
            })
            .expect("meshes are non-empty")
    }

    pub(crate) fn check_vertex(&self, p: usize) -> Result<()> {
        if p >= self.num_vertices() {
            return Err(Error::InvalidArgument(format!(
                "vertex {p} out of range (mesh has {})",
                self.num_vertices()
            )));
        }
        Ok(())
    }
}

fn validate(vertices: &[Vec3], faces: &[[usize; 3]]) -> Result<()> {
    let reject = |reason: &str, simplices: Vec<Vec<usize>>| {
        Err(Error::MeshRejected {
            reason: reason.to_string(),
            simplices,
        })
    };
    if vertices.is_empty() || faces.is_empty() {
        return reject("empty mesh", vec![]);
    }
    if let Some(v) = vertices.iter().position(|v| v.iter().any(|c| !c.is_finite())) {
        return reject("non-finite vertex coordinate", vec![vec![v]]);
    }
    let mut bad = Vec::new();
    for f in faces {
        if f.iter().any(|&i| i >= vertices.len()) || f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
            bad.push(f.to_vec());
            continue;
        }
        let a = norm(cross(sub(vertices[f[1]], vertices[f[0]]), sub(vertices[f[2]], vertices[f[0]])));
        if !(a > 0.0) {
            bad.push(f.to_vec());
        }
    }
    if !bad.is_empty() {
        return reject("degenerate faces", bad);
    }
    // each directed edge once, each undirected edge in exactly two faces
    let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
    for f in faces {
        for k in 0..3 {
            *directed.entry((f[k], f[(k + 1) % 3])).or_insert(0) += 1;
        }
    }
    let mut open = Vec::new();
    let mut non_manifold = Vec::new();
    for (&(i, j), &c) in &directed {
        let back = directed.get(&(j, i)).copied().unwrap_or(0);
        if c > 1 || back > 1 {
            if i < j {
                non_manifold.push(vec![i, j]);
            }
        } else if back == 0 {
            open.push(vec![i.min(j), i.max(j)]);
        }
    }
    open.sort();
    non_manifold.sort();
    if !open.is_empty() {
        return reject("boundary edges (mesh is not closed)", open);
    }
    if !non_manifold.is_empty() {
        return reject("non-manifold or inconsistently oriented edges", non_manifold);
    }
    let mut used = vec![false; vertices.len()];
    faces.iter().flatten().for_each(|&i| used[i] = true);
    let isolated: Vec<Vec<usize>> = (0..vertices.len()).filter(|&i| !used[i]).map(|i| vec![i]).collect();
    if !isolated.is_empty() {
        return reject("isolated vertices", isolated);
    }
    // connectedness
    let mut adj = vec![Vec::new(); vertices.len()];
    for &(i, j) in directed.keys() {
        adj[i].push(j);
    }
    let mut seen = vec![false; vertices.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    if let Some(v) = seen.iter().position(|s| !s) {
        return reject("mesh has several connected components", vec![vec![v]]);
    }
    Ok(())
}
