//! The discrete obstacle problem behind harmonic balls.
//!
//! Minimize `1/2 u'Lu - tau m'u` over `u <= a g` with `tau = 1 - a/A`, by projected
//! successive over-relaxation in a fixed vertex order. The harmonic ball is the
//! non-contact set `{u < a g}`.

use serde::{Deserialize, Serialize};

use super::green::{mesh_green, DiscreteGreen};
use super::TriMesh;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObstacleOptions {
    /// Relative tolerance for the sweep update and the complementarity residual.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Over-relaxation factor in `(0, 2)`; 1 is plain projected Gauss-Seidel.
    pub omega: f64,
}

impl Default for ObstacleOptions {
    fn default() -> Self {
        ObstacleOptions {
            tol: 1e-9,
            max_sweeps: 200_000,
            omega: 1.9,
        }
    }
}

impl ObstacleOptions {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_sweeps == 0 || !(self.omega > 0.0 && self.omega < 2.0) {
            return Err(Error::InvalidArgument(format!(
                "obstacle options need tol > 0, max_sweeps > 0 and omega in (0, 2), got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleSolution {
    pub source: usize,
    pub a: f64,
    pub tau: f64,
    pub u: Vec<f64>,
    /// `a g`
    pub obstacle: Vec<f64>,
    /// `u_i >= a g_i - eps_contact`
    pub contact: Vec<bool>,
    pub eps_contact: f64,
    /// Indices of the non-contact vertices.
    pub ball: Vec<usize>,
    pub kkt_residual: f64,
    pub sweeps: usize,
}

impl ObstacleSolution {
    pub fn in_ball(&self, i: usize) -> bool {
        !self.contact[i]
    }

    pub fn ball_mask(&self) -> Vec<bool> {
        self.contact.iter().map(|c| !c).collect()
    }
}

/// Solve at source `p`, computing its Green vector first.
pub fn solve_obstacle(mesh: &TriMesh, p: usize, a: f64, opts: &ObstacleOptions) -> Result<ObstacleSolution> {
    let g = mesh_green(mesh, p)?;
    solve_obstacle_with(mesh, &g, a, opts)
}

/// Solve with a precomputed Green vector. `a = A` is accepted and gives the largest
/// solution, the constant `A min g`.
pub fn solve_obstacle_with(
    mesh: &TriMesh,
    green: &DiscreteGreen,
    a: f64,
    opts: &ObstacleOptions,
) -> Result<ObstacleSolution> {
    opts.validate()?;
    let area = mesh.total_area;
    if !(a > 0.0 && a <= area) {
        return Err(Error::Domain {
            what: "ball volume a",
            value: a,
            lo: 0.0,
            hi: area,
        });
    }
    let n = mesh.num_vertices();
    // below the source cell the source vertex itself is in contact and the ball is empty
    let source_mass = mesh.mass.get(green.source).copied().unwrap_or(0.0);
    if a <= source_mass {
        return Err(Error::Domain {
            what: "ball volume a (must exceed the source vertex mass)",
            value: a,
            lo: source_mass,
            hi: area,
        });
    }
    if green.g.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: green.g.len(),
        });
    }
    let tau = (1.0 - a / area).max(0.0);
    let obstacle: Vec<f64> = green.g.iter().map(|g| a * g).collect();
    let scale = a * green.max();
    let eps_contact = 10.0 * opts.tol * scale;

    let (u, sweeps) = if a == area {
        let lowest = obstacle.iter().copied().fold(f64::INFINITY, f64::min);
        (vec![lowest; n], 0)
    } else {
        psor(mesh, &obstacle, tau, scale, opts)?
    };
    let contact: Vec<bool> = u.iter().zip(&obstacle).map(|(u, o)| *u >= o - eps_contact).collect();
    let ball = (0..n).filter(|&i| !contact[i]).collect();
    let kkt_residual = complementarity(mesh, &u, &obstacle, tau, scale);
    Ok(ObstacleSolution {
        source: green.source,
        a,
        tau,
        u,
        obstacle,
        contact,
        eps_contact,
        ball,
        kkt_residual,
        sweeps,
    })
}

/// `max_i |min(gap_i / scale, (tau m_i - (Lu)_i) / m_i)|`: zero exactly when one side of
/// the complementarity pair vanishes at every vertex and the other is non-negative.
fn complementarity(mesh: &TriMesh, u: &[f64], obstacle: &[f64], tau: f64, scale: f64) -> f64 {
    let lu = mesh.apply_laplacian(u);
    (0..u.len())
        .map(|i| {
            let gap = (obstacle[i] - u[i]) / scale;
            let slack = (tau * mesh.mass[i] - lu[i]) / mesh.mass[i];
            gap.min(slack).abs()
        })
        .fold(0.0, f64::max)
}

fn psor(
    mesh: &TriMesh,
    obstacle: &[f64],
    tau: f64,
    scale: f64,
    opts: &ObstacleOptions,
) -> Result<(Vec<f64>, usize)> {
    let n = mesh.num_vertices();
    let l = mesh.stiffness();
    let diag = l.diagonal();
    let load: Vec<f64> = mesh.mass.iter().map(|m| tau * m).collect();
    let mut u = obstacle.to_vec();
    let mut history = Vec::new();
    for sweep in 1..=opts.max_sweeps {
        let mut max_update: f64 = 0.0;
        for i in 0..n {
            let off = l.row_dot(i, &u) - diag[i] * u[i];
            let gs = (load[i] - off) / diag[i];
            let new = (u[i] + opts.omega * (gs - u[i])).min(obstacle[i]);
            max_update = max_update.max((new - u[i]).abs());
            u[i] = new;
        }
        if sweep % 100 == 1 {
            history.push(max_update / scale);
        }
        if max_update < opts.tol * scale && complementarity(mesh, &u, obstacle, tau, scale) < opts.tol {
            return Ok((u, sweep));
        }
    }
    Err(Error::NonConvergence {
        solver: "projected SOR obstacle solver",
        iterations: opts.max_sweeps,
        residual: complementarity(mesh, &u, obstacle, tau, scale),
        history,
    })
}

/// Per-vertex export of a solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub source: usize,
    pub a: f64,
    pub tau: f64,
    pub ball_area: f64,
    pub kkt_residual: f64,
    pub sweeps: usize,
    pub u: Vec<f64>,
    pub contact: Vec<bool>,
    pub in_ball: Vec<bool>,
    /// Ball vertices with a neighbour outside the ball.
    pub boundary: Vec<usize>,
}

impl SolutionRecord {
    pub fn new(mesh: &TriMesh, sol: &ObstacleSolution) -> Self {
        let in_ball = sol.ball_mask();
        let boundary = sol
            .ball
            .iter()
            .copied()
            .filter(|&i| mesh.adjacency[i].iter().any(|&j| !in_ball[j]))
            .collect();
        SolutionRecord {
            source: sol.source,
            a: sol.a,
            tau: sol.tau,
            ball_area: sol.ball.iter().map(|&i| mesh.mass[i]).sum(),
            kkt_residual: sol.kkt_residual,
            sweeps: sol.sweeps,
            u: sol.u.clone(),
            contact: sol.contact.clone(),
            in_ball,
            boundary,
        }
    }
}
