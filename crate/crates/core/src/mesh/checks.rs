//! Set-level properties of harmonic balls.
//!
//! Vertex sets are compared up to a one-ring band: a vertex in `A \ B` is tolerated
//! when one of its neighbours lies in `B`, and symmetrically.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::green::DiscreteGreen;
use super::linalg::conjugate_gradient;
use super::obstacle::{solve_obstacle_with, ObstacleOptions, ObstacleSolution};
use super::TriMesh;
use crate::error::{Error, Result};

pub fn ball_area(mesh: &TriMesh, sol: &ObstacleSolution) -> f64 {
    sol.ball.iter().map(|&i| mesh.mass[i]).sum()
}

fn set_area(mesh: &TriMesh, set: &[bool]) -> f64 {
    set.iter().zip(&mesh.mass).filter(|(s, _)| **s).map(|(_, m)| m).sum()
}

/// Vertices of the symmetric difference of `a` and `b` that lie outside the one-ring band.
pub fn within_one_ring(mesh: &TriMesh, a: &[bool], b: &[bool]) -> Vec<usize> {
    (0..mesh.num_vertices())
        .filter(|&i| {
            if a[i] == b[i] {
                return false;
            }
            let other = if a[i] { b } else { a };
            !mesh.adjacency[i].iter().any(|&j| other[j])
        })
        .collect()
}

/// `ball(small) ⊆ ball(large)` up to the band.
pub fn is_nested(mesh: &TriMesh, small: &ObstacleSolution, large: &ObstacleSolution) -> bool {
    let (s, l) = (small.ball_mask(), large.ball_mask());
    (0..mesh.num_vertices()).all(|i| !s[i] || l[i] || mesh.adjacency[i].iter().any(|&j| l[j]))
}

/// Solve at `a <= b` from the same source and test the inclusion.
pub fn check_nested(mesh: &TriMesh, green: &DiscreteGreen, a: f64, b: f64, opts: &ObstacleOptions) -> Result<bool> {
    if a > b {
        return Err(Error::InvalidArgument(format!("nesting needs a <= b, got {a} > {b}")));
    }
    let sa = solve_obstacle_with(mesh, green, a, opts)?;
    let sb = solve_obstacle_with(mesh, green, b, opts)?;
    Ok(is_nested(mesh, &sa, &sb))
}

/// The ball induces a connected subgraph containing the source.
pub fn check_connected(mesh: &TriMesh, sol: &ObstacleSolution) -> bool {
    let in_ball = sol.ball_mask();
    if !in_ball[sol.source] {
        return false;
    }
    let mut seen = vec![false; in_ball.len()];
    let mut queue = VecDeque::from([sol.source]);
    seen[sol.source] = true;
    let mut count = 1;
    while let Some(v) = queue.pop_front() {
        for &w in &mesh.adjacency[v] {
            if in_ball[w] && !seen[w] {
                seen[w] = true;
                count += 1;
                queue.push_back(w);
            }
        }
    }
    count == sol.ball.len()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MvpReport {
    pub trials: usize,
    /// `max |mean over ball - value at p|`
    pub max_deviation: f64,
    /// Largest deviation divided by the oscillation of that trial's boundary data.
    pub max_relative: f64,
}

/// Mean value property for random discrete-harmonic functions on the ball.
///
/// Each trial draws uniform values on the ring of vertices just outside the ball and
/// extends them harmonically (`L phi = 0` on the ball).
pub fn check_mvp(mesh: &TriMesh, sol: &ObstacleSolution, trials: usize, seed: u64) -> Result<MvpReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ring = outer_ring(mesh, sol);
    let mut report = MvpReport {
        trials,
        max_deviation: 0.0,
        max_relative: 0.0,
    };
    for _ in 0..trials {
        let values: Vec<f64> = ring.iter().map(|_| rng.random::<f64>()).collect();
        let (dev, osc) = mvp_deviation(mesh, sol, &ring, &values)?;
        report.max_deviation = report.max_deviation.max(dev);
        if osc > 0.0 {
            report.max_relative = report.max_relative.max(dev / osc);
        }
    }
    Ok(report)
}

fn outer_ring(mesh: &TriMesh, sol: &ObstacleSolution) -> Vec<usize> {
    let in_ball = sol.ball_mask();
    (0..mesh.num_vertices())
        .filter(|&i| !in_ball[i] && mesh.adjacency[i].iter().any(|&j| in_ball[j]))
        .collect()
}

/// Deviation and oscillation for one set of ring values.
pub(crate) fn mvp_deviation(mesh: &TriMesh, sol: &ObstacleSolution, ring: &[usize], values: &[f64]) -> Result<(f64, f64)> {
    let n = mesh.num_vertices();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi || ring.is_empty() {
        // constants are harmonic and their mean is exact
        return Ok((0.0, hi - lo));
    }
    let mut fixed = vec![0.0; n];
    for (&i, &v) in ring.iter().zip(values) {
        fixed[i] = v;
    }
    let in_ball = sol.ball_mask();
    let idx = &sol.ball;
    let mut local = vec![usize::MAX; n];
    for (k, &i) in idx.iter().enumerate() {
        local[i] = k;
    }
    let l = mesh.stiffness();
    let rhs: Vec<f64> = idx
        .iter()
        .map(|&i| -l.row(i).filter(|&(j, _)| !in_ball[j]).map(|(j, v)| v * fixed[j]).sum::<f64>())
        .collect();
    let apply = |x: &[f64]| -> Vec<f64> {
        idx.iter()
            .map(|&i| l.row(i).filter(|&(j, _)| in_ball[j]).map(|(j, v)| v * x[local[j]]).sum())
            .collect()
    };
    let diag: Vec<f64> = idx.iter().map(|&i| l.get(i, i)).collect();
    let (phi, _) = conjugate_gradient(apply, &diag, &rhs, None, 1e-12, 20 * idx.len() + 100)?;
    let mass: f64 = idx.iter().map(|&i| mesh.mass[i]).sum();
    let mean = idx.iter().zip(&phi).map(|(&i, p)| mesh.mass[i] * p).sum::<f64>() / mass;
    Ok(((mean - phi[local[sol.source]]).abs(), hi - lo))
}

/// Largest `c` such that every vertex closer than `c sqrt(a)` to the source is in the ball.
pub fn inner_ball_fraction(sol: &ObstacleSolution, dist: &[f64]) -> f64 {
    let nearest_out = (0..dist.len())
        .filter(|&i| !sol.in_ball(i))
        .map(|i| dist[i])
        .fold(f64::INFINITY, f64::min);
    nearest_out / sol.a.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicComparison {
    /// Radius of the geodesic ball whose vertex mass is closest to `a`.
    pub radius: f64,
    pub geodesic_area: f64,
    pub harmonic_area: f64,
    pub symdiff_area: f64,
    /// `symdiff_area / a`
    pub relative: f64,
    /// Mass of the vertices on either side of the geodesic ball boundary.
    pub band_area: f64,
    /// Symmetric-difference mass outside the one-ring band.
    pub outside_band_area: f64,
}

/// Compare the harmonic ball with the geodesic ball of matching volume.
pub fn compare_with_geodesic_ball(mesh: &TriMesh, sol: &ObstacleSolution, dist: &[f64]) -> GeodesicComparison {
    let n = mesh.num_vertices();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| dist[x].total_cmp(&dist[y]).then(x.cmp(&y)));
    let mut acc = 0.0;
    let mut take = 0;
    for (k, &i) in order.iter().enumerate() {
        let next = acc + mesh.mass[i];
        if (next - sol.a).abs() > (acc - sol.a).abs() {
            break;
        }
        acc = next;
        take = k + 1;
    }
    let radius = match (take.checked_sub(1).map(|k| dist[order[k]]), order.get(take).map(|&i| dist[i])) {
        (Some(lo), Some(hi)) => 0.5 * (lo + hi),
        (Some(lo), None) => lo,
        (None, _) => 0.0,
    };
    let mut geo = vec![false; n];
    order[..take].iter().for_each(|&i| geo[i] = true);
    let harm = sol.ball_mask();
    let diff: Vec<bool> = (0..n).map(|i| geo[i] != harm[i]).collect();
    let band: Vec<bool> = (0..n)
        .map(|i| mesh.adjacency[i].iter().any(|&j| geo[j] != geo[i]))
        .collect();
    let outside: Vec<bool> = {
        let bad = within_one_ring(mesh, &geo, &harm);
        let mut v = vec![false; n];
        bad.into_iter().for_each(|i| v[i] = true);
        v
    };
    let symdiff_area = set_area(mesh, &diff);
    GeodesicComparison {
        radius,
        geodesic_area: acc,
        harmonic_area: set_area(mesh, &harm),
        symdiff_area,
        relative: symdiff_area / sol.a,
        band_area: set_area(mesh, &band),
        outside_band_area: set_area(mesh, &outside),
    }
}
