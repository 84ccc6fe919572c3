//! Mean value sets from the local Dirichlet obstacle problem.
//!
//! On the geodesic ball `B(p, R)` with zero boundary values, `G_R` solves `L G_R = e_p`
//! and `w` minimizes `1/2 w'Lw - lambda m'w` over `w <= G_R`. The mean value set is
//! `{w < G_R}`. With `lambda = 1/a` the difference `G_R - w` satisfies the same equation
//! on the free set as `a g - u_a` for the global problem, so the set is compared with
//! the harmonic ball of volume `a = r^2`.

use serde::{Deserialize, Serialize};

use super::geodesic::geodesic_distances;
use super::linalg::conjugate_gradient;
use super::obstacle::ObstacleOptions;
use super::TriMesh;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalSolution {
    pub source: usize,
    pub r_param: f64,
    pub radius: f64,
    /// `r^2`, the volume of the matching harmonic ball.
    pub a_equivalent: f64,
    /// Vertices of `B(p, R)`.
    pub region: Vec<bool>,
    /// Vertices of `D_p(r)`.
    pub set: Vec<bool>,
    pub w: Vec<f64>,
    pub green_r: Vec<f64>,
    pub sweeps: usize,
    /// The set reaches the last ring of the region, so `R` was too small to contain it.
    pub touches_boundary: bool,
}

pub fn local_mean_value_set(
    mesh: &TriMesh,
    p: usize,
    r_param: f64,
    radius: f64,
    opts: &ObstacleOptions,
) -> Result<LocalSolution> {
    mesh.check_vertex(p)?;
    let dist = geodesic_distances(mesh, p)?;
    let n = mesh.num_vertices();
    let region: Vec<bool> = dist.iter().map(|&d| d < radius).collect();
    let idx: Vec<usize> = (0..n).filter(|&i| region[i]).collect();
    if idx.len() == n || !region_complement_connected(mesh, &region) {
        return Err(Error::Domain {
            what: "local ball radius R",
            value: radius,
            lo: 0.0,
            hi: dist.iter().copied().fold(0.0, f64::max),
        });
    }
    let region_area: f64 = idx.iter().map(|&i| mesh.mass[i]).sum();
    let a = r_param * r_param;
    if !(r_param > 0.0 && a < region_area) {
        return Err(Error::Domain {
            what: "r^2 against the area of B(p, R)",
            value: a,
            lo: 0.0,
            hi: region_area,
        });
    }
    let mut local = vec![usize::MAX; n];
    for (k, &i) in idx.iter().enumerate() {
        local[i] = k;
    }
    let l = mesh.stiffness();
    // the Dirichlet operator: rows and columns of the region only
    let apply = |x: &[f64]| -> Vec<f64> {
        idx.iter()
            .map(|&i| l.row(i).filter(|&(j, _)| region[j]).map(|(j, v)| v * x[local[j]]).sum())
            .collect()
    };
    let diag: Vec<f64> = idx.iter().map(|&i| l.get(i, i)).collect();
    let mut rhs = vec![0.0; idx.len()];
    rhs[local[p]] = 1.0;
    let (green, _) = conjugate_gradient(apply, &diag, &rhs, None, 1e-12, 20 * idx.len() + 100)?;

    let lambda = 1.0 / a;
    let scale = green[local[p]];
    let mut w = green.clone();
    let mut sweeps = 0;
    let mut converged = false;
    let mut history = Vec::new();
    while sweeps < opts.max_sweeps {
        sweeps += 1;
        let mut max_update: f64 = 0.0;
        for (k, &i) in idx.iter().enumerate() {
            let off: f64 = l
                .row(i)
                .filter(|&(j, _)| j != i && region[j])
                .map(|(j, v)| v * w[local[j]])
                .sum();
            let gs = (lambda * mesh.mass[i] - off) / diag[k];
            let new = (w[k] + opts.omega * (gs - w[k])).min(green[k]);
            max_update = max_update.max((new - w[k]).abs());
            w[k] = new;
        }
        if sweeps % 100 == 1 {
            history.push(max_update / scale);
        }
        if max_update < opts.tol * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            solver: "local obstacle solver",
            iterations: sweeps,
            residual: history.last().copied().unwrap_or(f64::NAN),
            history,
        });
    }
    let eps = 10.0 * opts.tol * scale;
    let mut set = vec![false; n];
    let mut w_full = vec![0.0; n];
    let mut g_full = vec![0.0; n];
    for (k, &i) in idx.iter().enumerate() {
        set[i] = w[k] < green[k] - eps;
        w_full[i] = w[k];
        g_full[i] = green[k];
    }
    let touches_boundary = idx
        .iter()
        .any(|&i| set[i] && mesh.adjacency[i].iter().any(|&j| !region[j]));
    Ok(LocalSolution {
        source: p,
        r_param,
        radius,
        a_equivalent: a,
        region,
        set,
        w: w_full,
        green_r: g_full,
        sweeps,
        touches_boundary,
    })
}

fn region_complement_connected(mesh: &TriMesh, region: &[bool]) -> bool {
    let outside: Vec<usize> = (0..region.len()).filter(|&i| !region[i]).collect();
    let Some(&start) = outside.first() else {
        return false;
    };
    let mut seen = vec![false; region.len()];
    let mut stack = vec![start];
    seen[start] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &u in &mesh.adjacency[v] {
            if !region[u] && !seen[u] {
                seen[u] = true;
                count += 1;
                stack.push(u);
            }
        }
    }
    count == outside.len()
}
