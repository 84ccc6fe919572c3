use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::linalg::conjugate_gradient;
use super::TriMesh;
use crate::error::{Error, Result};

/// Required relative residual of `L g = e_p - m / A`.
pub const GREEN_RESIDUAL: f64 = 1e-10;

/// Solution of `L g = e_p - m / A` with `sum_i m_i g_i = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteGreen {
    pub source: usize,
    pub g: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

impl DiscreteGreen {
    pub fn max(&self) -> f64 {
        self.g.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn mesh_green(mesh: &TriMesh, p: usize) -> Result<DiscreteGreen> {
    mesh.check_vertex(p)?;
    let n = mesh.num_vertices();
    let area = mesh.total_area;
    let mut b: Vec<f64> = mesh.mass.iter().map(|m| -m / area).collect();
    b[p] += 1.0;
    // remove the rounding drift so that b is exactly in the range of L
    let drift = b.iter().sum::<f64>() / n as f64;
    b.iter_mut().for_each(|v| *v -= drift);
    let l = mesh.stiffness();
    let (mut g, rep) = conjugate_gradient(|x| l.mul(x), &l.diagonal(), &b, None, 0.1 * GREEN_RESIDUAL, 20 * n)?;
    let mean = g.iter().zip(&mesh.mass).map(|(g, m)| g * m).sum::<f64>() / area;
    g.iter_mut().for_each(|v| *v -= mean);
    let lg = l.mul(&g);
    let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let residual = lg.iter().zip(&b).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() / bn;
    if residual > GREEN_RESIDUAL {
        return Err(Error::NonConvergence {
            solver: "discrete Green solve",
            iterations: rep.iterations,
            residual,
            history: vec![],
        });
    }
    Ok(DiscreteGreen {
        source: p,
        g,
        residual,
        iterations: rep.iterations,
    })
}

/// Green vectors by source vertex, computed on first use. Shareable across threads.
#[derive(Debug, Default)]
pub struct GreenCache {
    map: Mutex<HashMap<usize, Arc<DiscreteGreen>>>,
}

impl GreenCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, mesh: &TriMesh, p: usize) -> Result<Arc<DiscreteGreen>> {
        if let Some(g) = self.map.lock().expect("cache lock").get(&p) {
            return Ok(g.clone());
        }
        let g = Arc::new(mesh_green(mesh, p)?);
        self.map.lock().expect("cache lock").entry(p).or_insert_with(|| g.clone());
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
