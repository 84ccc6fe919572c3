//! Compressed sparse rows and Jacobi-preconditioned conjugate gradients.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// `L_ii = sum_j w_ij`, `L_ij = -w_ij`, from sorted neighbour lists.
    pub(crate) fn laplacian(adjacency: &[Vec<usize>], weights: &[Vec<f64>]) -> Self {
        let n = adjacency.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            let diag: f64 = weights[i].iter().sum();
            let mut placed = false;
            for (&j, &w) in adjacency[i].iter().zip(&weights[i]) {
                if !placed && j > i {
                    cols.push(i);
                    vals.push(diag);
                    placed = true;
                }
                cols.push(j);
                vals.push(-w);
            }
            if !placed {
                cols.push(i);
                vals.push(diag);
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix { n, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub(crate) fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        self.row(i).map(|(j, v)| v * x[j]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgReport {
    pub iterations: usize,
    /// `|b - A x| / |b|`
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solve `A x = b` for symmetric positive (semi)definite `A`, given as a matrix-vector
/// product, with a diagonal preconditioner. A singular `A` is fine when `b` lies in its range.
pub fn conjugate_gradient<F: Fn(&[f64]) -> Vec<f64>>(
    apply: F,
    diag: &[f64],
    b: &[f64],
    x0: Option<&[f64]>,
    rel_tol: f64,
    max_iters: usize,
) -> Result<(Vec<f64>, CgReport)> {
    let n = b.len();
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], CgReport { iterations: 0, relative_residual: 0.0 }));
    }
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let ax = apply(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let precond = |r: &[f64]| -> Vec<f64> { r.iter().zip(diag).map(|(r, d)| r / d).collect() };
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut history = Vec::new();
    for it in 0..max_iters {
        let res = dot(&r, &r).sqrt() / bnorm;
        if res <= rel_tol {
            // confirm against the true residual, which drifts from the recurrence
            let ax = apply(&x);
            let true_res = b.iter().zip(&ax).map(|(b, a)| (b - a).powi(2)).sum::<f64>().sqrt() / bnorm;
            if true_res <= rel_tol {
                return Ok((x, CgReport { iterations: it, relative_residual: true_res }));
            }
            r = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
            z = precond(&r);
            p = z.clone();
            rz = dot(&r, &z);
        }
        history.push(res);
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        z = precond(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let ax = apply(&x);
    let residual = b.iter().zip(&ax).map(|(b, a)| (b - a).powi(2)).sum::<f64>().sqrt() / bnorm;
    if residual <= rel_tol {
        return Ok((x, CgReport { iterations: max_iters, relative_residual: residual }));
    }
    Err(Error::NonConvergence {
        solver: "conjugate gradient",
        iterations: max_iters,
        residual,
        history,
    })
}
