//! Scalar arithmetic for the coordinate models of the projective spaces.
//!
//! Real, complex and quaternionic scalars are all stored as quaternions with
//! trailing zero components; ambient vectors are flat `f64` slices holding
//! `width` components per coordinate (1, 2 or 4).

use std::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quat(pub [f64; 4]);

impl Quat {
    pub const ONE: Quat = Quat([1.0, 0.0, 0.0, 0.0]);
    pub const ZERO: Quat = Quat([0.0; 4]);

    pub fn real(x: f64) -> Self {
        Quat([x, 0.0, 0.0, 0.0])
    }

    pub fn conj(self) -> Self {
        let [a, b, c, d] = self.0;
        Quat([a, -b, -c, -d])
    }

    pub fn norm_sqr(self) -> f64 {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        let [a, b, c, d] = self.0;
        Quat([a * s, b * s, c * s, d * s])
    }

    /// Read coordinate `i` of a flat ambient vector with `width` components per scalar.
    pub fn load(v: &[f64], i: usize, width: usize) -> Self {
        let mut q = [0.0; 4];
        q[..width].copy_from_slice(&v[i * width..(i + 1) * width]);
        Quat(q)
    }

    pub fn store(self, v: &mut [f64], i: usize, width: usize) {
        v[i * width..(i + 1) * width].copy_from_slice(&self.0[..width]);
    }
}

impl Mul for Quat {
    type Output = Quat;

    // Hamilton product
    fn mul(self, rhs: Quat) -> Quat {
        let [a1, b1, c1, d1] = self.0;
        let [a2, b2, c2, d2] = rhs.0;
        Quat([
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ])
    }
}

impl Add for Quat {
    type Output = Quat;
    fn add(self, rhs: Quat) -> Quat {
        let mut out = self.0;
        for (o, r) in out.iter_mut().zip(rhs.0) {
            *o += r;
        }
        Quat(out)
    }
}

impl Sub for Quat {
    type Output = Quat;
    fn sub(self, rhs: Quat) -> Quat {
        let mut out = self.0;
        for (o, r) in out.iter_mut().zip(rhs.0) {
            *o -= r;
        }
        Quat(out)
    }
}

/// Field-valued inner product `sum_i conj(x_i) y_i`.
pub fn inner(x: &[f64], y: &[f64], width: usize) -> Quat {
    debug_assert_eq!(x.len(), y.len());
    (0..x.len() / width).fold(Quat::ZERO, |acc, i| {
        acc + Quat::load(x, i, width).conj() * Quat::load(y, i, width)
    })
}

/// `x_i <- x_i q` for every coordinate.
pub fn right_mul(x: &mut [f64], q: Quat, width: usize) {
    for i in 0..x.len() / width {
        (Quat::load(x, i, width) * q).store(x, i, width);
    }
}

/// `x_i <- q x_i` for coordinate `i` only.
pub fn left_mul_coord(x: &mut [f64], i: usize, q: Quat, width: usize) {
    (q * Quat::load(x, i, width)).store(x, i, width);
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hamilton_units() {
        let i = Quat([0.0, 1.0, 0.0, 0.0]);
        let j = Quat([0.0, 0.0, 1.0, 0.0]);
        let k = Quat([0.0, 0.0, 0.0, 1.0]);
        assert_eq!(i * j, k);
        assert_eq!(j * k, i);
        assert_eq!(k * i, j);
        assert_eq!(j * i, k.scale(-1.0));
        assert_eq!(i * i, Quat::real(-1.0));
    }

    #[test]
    fn norm_is_multiplicative() {
        let p = Quat([0.3, -1.2, 0.7, 2.0]);
        let q = Quat([-0.5, 0.1, 0.9, -0.4]);
        assert!(((p * q).norm() - p.norm() * q.norm()).abs() < 1e-14);
        assert!(((p * q).conj() - q.conj() * p.conj()).norm() < 1e-14);
    }

    #[test]
    fn inner_is_sesquilinear_under_right_scalars() {
        let x = [0.1, 0.2, -0.3, 0.4, 0.5, -0.6, 0.7, 0.8];
        let y = [-0.2, 0.1, 0.9, 0.3, 0.0, 0.4, -0.5, 0.2];
        let q = Quat([0.5, 0.5, -0.5, 0.5]);
        let mut yq = y;
        right_mul(&mut yq, q, 4);
        let lhs = inner(&x, &yq, 4);
        let rhs = inner(&x, &y, 4) * q;
        assert!((lhs - rhs).norm() < 1e-14);
    }
}
