//! Geodesic distance from a vertex by fast marching on the triangulation.
//!
//! Each triangle update unfolds the virtual source of its two known vertices into
//! the plane of the triangle; when the straight ray misses the opposite edge
//! (obtuse corners) it falls back to the edge updates. First order in `h`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{dot, norm, sub, TriMesh};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64);
impl Eq for Key {}
impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

pub fn geodesic_distances(mesh: &TriMesh, source: usize) -> Result<Vec<f64>> {
    mesh.check_vertex(source)?;
    let n = mesh.num_vertices();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push((Reverse(Key(0.0)), source));
    while let Some((Reverse(Key(d)), v)) = heap.pop() {
        if done[v] || d > dist[v] {
            continue;
        }
        done[v] = true;
        for &fi in &mesh.vertex_faces[v] {
            let f = mesh.faces[fi];
            for k in 0..3 {
                let c = f[k];
                if done[c] {
                    continue;
                }
                let (a, b) = (f[(k + 1) % 3], f[(k + 2) % 3]);
                let cand = update(mesh, &dist, &done, a, b, c);
                if cand < dist[c] {
                    dist[c] = cand;
                    heap.push((Reverse(Key(cand)), c));
                }
            }
        }
    }
    Ok(dist)
}

fn update(mesh: &TriMesh, dist: &[f64], done: &[bool], a: usize, b: usize, c: usize) -> f64 {
    let (pa, pb, pc) = (mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]);
    let (ac, bc) = (norm(sub(pc, pa)), norm(sub(pc, pb)));
    let mut best = f64::INFINITY;
    if done[a] {
        best = best.min(dist[a] + ac);
    }
    if done[b] {
        best = best.min(dist[b] + bc);
    }
    if !(done[a] && done[b]) {
        return best;
    }
    let (da, db) = (dist[a], dist[b]);
    let ab = sub(pb, pa);
    let e = norm(ab);
    // planar frame: A = (0, 0), B = (e, 0), C above the axis
    let cx = dot(sub(pc, pa), ab) / e;
    let cy = (ac * ac - cx * cx).max(0.0).sqrt();
    let sx = (da * da - db * db + e * e) / (2.0 * e);
    let sy2 = da * da - sx * sx;
    if sy2 < 0.0 {
        return best;
    }
    let sy = -sy2.sqrt();
    // the ray from the virtual source to C must cross segment AB
    let t = -sy / (cy - sy);
    let x = sx + t * (cx - sx);
    if (0.0..=e).contains(&x) {
        best = best.min(((cx - sx).powi(2) + (cy - sy).powi(2)).sqrt());
    }
    best
}

/// Great-circle distances between the normalized vertex directions; exact for
/// meshes inscribed in the unit sphere.
pub fn sphere_distances(mesh: &TriMesh, source: usize) -> Result<Vec<f64>> {
    mesh.check_vertex(source)?;
    let unit = |v: [f64; 3]| {
        let n = norm(v);
        [v[0] / n, v[1] / n, v[2] / n]
    };
    let p = unit(mesh.vertices[source]);
    Ok(mesh
        .vertices
        .iter()
        .map(|&v| {
            let q = unit(v);
            let chord = norm(sub(p, q));
            2.0 * (0.5 * chord).min(1.0).asin()
        })
        .collect())
}
