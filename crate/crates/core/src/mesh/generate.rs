//! Icospheres and ellipsoids.

use std::collections::HashMap;

use super::{TriMesh, Vec3};
use crate::error::{Error, Result};
use crate::quadrature::integrate;

/// Unit icosphere: the icosahedron with `subdivisions` rounds of 4-to-1 splitting,
/// new vertices projected onto the sphere. Level `k` has `10 * 4^k + 2` vertices.
pub fn icosphere(subdivisions: u32) -> Result<TriMesh> {
    let (v, f) = icosphere_raw(subdivisions)?;
    TriMesh::new(v, f)
}

fn icosphere_raw(subdivisions: u32) -> Result<(Vec<Vec3>, Vec<[usize; 3]>)> {
    if subdivisions > 8 {
        return Err(Error::InvalidArgument(format!(
            "icosphere subdivision {subdivisions} is too fine (max 8)"
        )));
    }
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = vec![
        [-1.0, t, 0.0], [1.0, t, 0.0], [-1.0, -t, 0.0], [1.0, -t, 0.0],
        [0.0, -1.0, t], [0.0, 1.0, t], [0.0, -1.0, -t], [0.0, 1.0, -t],
        [t, 0.0, -1.0], [t, 0.0, 1.0], [-t, 0.0, -1.0], [-t, 0.0, 1.0],
    ];
    verts.iter_mut().for_each(|v| *v = unit(*v));
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vec3>| {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (p, q) = (verts[a], verts[b]);
                verts.push(unit([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    Ok((verts, faces))
}

fn unit(v: Vec3) -> Vec3 {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Ellipsoid with semi-axes `axes`, the icosphere scaled along the coordinate axes.
pub fn ellipsoid(axes: Vec3, subdivisions: u32) -> Result<TriMesh> {
    if axes.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
        return Err(Error::InvalidArgument(format!("ellipsoid axes must be positive, got {axes:?}")));
    }
    let (v, f) = icosphere_raw(subdivisions)?;
    let v = v.into_iter().map(|p| [p[0] * axes[0], p[1] * axes[1], p[2] * axes[2]]).collect();
    TriMesh::new(v, f)
}

/// Surface area of an ellipsoid by two-dimensional quadrature of the parametrization.
pub fn ellipsoid_area(axes: Vec3) -> Result<f64> {
    let [a, b, c] = axes;
    let tol = 1e-11 * (a * b + b * c + c * a);
    // |x_theta x x_phi| for x = (a sin t cos p, b sin t sin p, c cos t)
    let inner = |t: f64| {
        let (st, ct) = t.sin_cos();
        integrate(
            |p: f64| {
                let (sp, cp) = p.sin_cos();
                let n = [b * c * st * st * cp, a * c * st * st * sp, a * b * st * ct];
                (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt()
            },
            0.0,
            2.0 * std::f64::consts::PI,
            tol,
        )
    };
    let err = std::cell::RefCell::new(None);
    let v = integrate(
        |t| {
            inner(t).unwrap_or_else(|e| {
                *err.borrow_mut() = Some(e.to_string());
                0.0
            })
        },
        0.0,
        std::f64::consts::PI,
        tol,
    );
    if let Some(e) = err.into_inner() {
        return Err(Error::InvalidArgument(format!("ellipsoid area quadrature failed: {e}")));
    }
    v
}
