//! Geometry of the compact rank one symmetric spaces.
//!
//! Spheres `S^n` carry the round metric of diameter `pi`. The projective
//! spaces `KP^m` (K = R, C, H) are modelled as unit vectors of `K^(m+1)`
//! modulo right multiplication by unit scalars, with the Fubini–Study metric
//! of diameter `pi/2`, so that `d(x, y) = arccos |<x, y>|`. The Cayley plane
//! has no point model here; only its scalar data (dimension, volume, sphere
//! profile) is available.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{self, Quat};
use crate::quadrature;
use crate::special::{factorial, unit_sphere_volume};

/// Distances below this are reported as exactly zero.
pub const ZERO_DISTANCE: f64 = 1e-12;
/// A pair closer than this to the diameter is treated as a cut-locus pair by `log_map`.
pub const CUT_LOCUS_BAND: f64 = 1e-12;
const GAUGE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ManifoldId {
    Sphere(usize),
    RealProj(usize),
    ComplexProj(usize),
    QuatProj(usize),
    OctoProj2,
}

/// Scalar data of a CROSS in the normalization used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryParams {
    /// Intrinsic dimension.
    pub n: usize,
    pub diameter: f64,
    pub volume: f64,
    /// Real dimension of the base field; 0 for spheres.
    pub base_field_dim: usize,
}

impl ManifoldId {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ManifoldId::Sphere(n) if n < 2 => Err(Error::InvalidManifold(format!(
                "S^{n}: spheres need n >= 2"
            ))),
            ManifoldId::RealProj(0) | ManifoldId::ComplexProj(0) | ManifoldId::QuatProj(0) => Err(
                Error::InvalidManifold("projective spaces need m >= 1".into()),
            ),
            _ => Ok(()),
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            ManifoldId::Sphere(n) => n,
            ManifoldId::RealProj(m) => m,
            ManifoldId::ComplexProj(m) => 2 * m,
            ManifoldId::QuatProj(m) => 4 * m,
            ManifoldId::OctoProj2 => 16,
        }
    }

    pub fn base_field_dim(&self) -> usize {
        match self {
            ManifoldId::Sphere(_) => 0,
            ManifoldId::RealProj(_) => 1,
            ManifoldId::ComplexProj(_) => 2,
            ManifoldId::QuatProj(_) => 4,
            ManifoldId::OctoProj2 => 8,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            ManifoldId::Sphere(_) => PI,
            _ => FRAC_PI_2,
        }
    }

    pub fn is_projective(&self) -> bool {
        !matches!(self, ManifoldId::Sphere(_))
    }

    pub fn supports_points(&self) -> bool {
        !matches!(self, ManifoldId::OctoProj2)
    }

    pub fn params(&self) -> GeometryParams {
        GeometryParams {
            n: self.dim(),
            diameter: self.diameter(),
            volume: total_volume(*self),
            base_field_dim: self.base_field_dim(),
        }
    }

    /// Real components per ambient coordinate.
    pub(crate) fn scalar_width(&self) -> usize {
        match self {
            ManifoldId::Sphere(_) | ManifoldId::RealProj(_) => 1,
            ManifoldId::ComplexProj(_) => 2,
            ManifoldId::QuatProj(_) => 4,
            ManifoldId::OctoProj2 => 8,
        }
    }

    /// Number of ambient coordinates (over the base field).
    pub(crate) fn coordinate_count(&self) -> usize {
        match *self {
            ManifoldId::Sphere(n) => n + 1,
            ManifoldId::RealProj(m) | ManifoldId::ComplexProj(m) | ManifoldId::QuatProj(m) => {
                m + 1
            }
            ManifoldId::OctoProj2 => 3,
        }
    }

    /// Length of the real ambient vector of a point.
    pub fn ambient_len(&self) -> Result<usize> {
        self.require_points()?;
        Ok(self.coordinate_count() * self.scalar_width())
    }

    fn require_points(&self) -> Result<()> {
        self.validate()?;
        if self.supports_points() {
            Ok(())
        } else {
            Err(Error::UnsupportedPointOperation(*self))
        }
    }

    /// Exponent of the `cos r` factor of the sphere profile, `dK - 1`.
    fn cos_exponent(&self) -> i32 {
        match self {
            ManifoldId::Sphere(_) => 0,
            _ => self.base_field_dim() as i32 - 1,
        }
    }

    /// Order of vanishing of the sphere profile at the diameter.
    pub(crate) fn antipodal_order(&self) -> usize {
        match self {
            ManifoldId::Sphere(n) => n - 1,
            _ => self.base_field_dim() - 1,
        }
    }
}

impl fmt::Display for ManifoldId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManifoldId::Sphere(n) => write!(f, "S^{n}"),
            ManifoldId::RealProj(m) => write!(f, "RP^{m}"),
            ManifoldId::ComplexProj(m) => write!(f, "CP^{m}"),
            ManifoldId::QuatProj(m) => write!(f, "HP^{m}"),
            ManifoldId::OctoProj2 => write!(f, "OP^2"),
        }
    }
}

impl FromStr for ManifoldId {
    type Err = Error;

    /// Accepts `S^2`, `S2`, `RP^3`, `CP2`, `HP^1`, `OP^2` (case-insensitive).
    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase().replace('^', "");
        let bad = || Error::InvalidManifold(format!("cannot parse manifold id {s:?}"));
        let split = upper
            .find(|c: char| c.is_ascii_digit())
            .ok_or_else(bad)?;
        let (kind, digits) = upper.split_at(split);
        let k: usize = digits.parse().map_err(|_| bad())?;
        let id = match kind {
            "S" => ManifoldId::Sphere(k),
            "RP" => ManifoldId::RealProj(k),
            "CP" => ManifoldId::ComplexProj(k),
            "HP" => ManifoldId::QuatProj(k),
            "OP" if k == 2 => ManifoldId::OctoProj2,
            "OP" => {
                return Err(Error::InvalidManifold(
                    "the octonionic projective space exists only for m = 2".into(),
                ))
            }
            _ => return Err(bad()),
        };
        id.validate()?;
        Ok(id)
    }
}

impl TryFrom<String> for ManifoldId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ManifoldId> for String {
    fn from(m: ManifoldId) -> String {
        m.to_string()
    }
}

/// Closed-form Riemannian volume.
pub fn total_volume(m: ManifoldId) -> f64 {
    match m {
        ManifoldId::Sphere(n) => unit_sphere_volume(n as u32),
        ManifoldId::RealProj(k) => 0.5 * unit_sphere_volume(k as u32),
        ManifoldId::ComplexProj(k) => PI.powi(k as i32) / factorial(k as u32),
        ManifoldId::QuatProj(k) => PI.powi(2 * k as i32) / factorial(2 * k as u32 + 1),
        ManifoldId::OctoProj2 => factorial(3) * PI.powi(8) / factorial(11),
    }
}

/// Radial volume data `v(r)` of a CROSS, independent of the center.
#[derive(Debug, Clone, Copy)]
pub struct Profile {
    pub manifold: ManifoldId,
    pub n: usize,
    pub diameter: f64,
    pub volume: f64,
    /// `vol(S^(n-1))`
    pub omega: f64,
    cos_exp: i32,
}

impl Profile {
    pub fn new(m: ManifoldId) -> Result<Self> {
        m.validate()?;
        let n = m.dim();
        Ok(Profile {
            manifold: m,
            n,
            diameter: m.diameter(),
            volume: total_volume(m),
            omega: unit_sphere_volume(n as u32 - 1),
            cos_exp: m.cos_exponent(),
        })
    }

    /// `v(r) = vol(S^(n-1)) sin^(n-1) r cos^(dK-1) r`, no domain check.
    pub fn area(&self, r: f64) -> f64 {
        self.omega * r.sin().powi(self.n as i32 - 1) * r.cos().powi(self.cos_exp)
    }

    /// `v'(r) / v(r) = (n-1) cot r - (dK-1) tan r` on the open interval.
    pub fn log_derivative(&self, r: f64) -> f64 {
        let mut out = (self.n as f64 - 1.0) / r.tan();
        if self.cos_exp != 0 {
            out -= self.cos_exp as f64 * r.tan();
        }
        out
    }

    fn check(&self, r: f64) -> Result<()> {
        if (0.0..=self.diameter).contains(&r) {
            Ok(())
        } else {
            Err(Error::Domain {
                what: "radius",
                value: r,
                lo: 0.0,
                hi: self.diameter,
            })
        }
    }

    fn quad_tol(&self) -> f64 {
        1e-12 * self.volume
    }

    /// `V(r) = int_0^r v`.
    pub fn ball_volume(&self, r: f64) -> Result<f64> {
        self.check(r)?;
        if r <= 0.5 * self.diameter {
            quadrature::integrate(|t| self.area(t), 0.0, r, self.quad_tol())
        } else {
            Ok(self.volume - self.outer_volume(r)?)
        }
    }

    /// `V - V(r) = int_r^D v`, computed without cancellation.
    pub fn outer_volume(&self, r: f64) -> Result<f64> {
        self.check(r)?;
        if r >= 0.5 * self.diameter {
            quadrature::integrate(|t| self.area(t), r, self.diameter, self.quad_tol())
        } else {
            Ok(self.volume - self.ball_volume(r)?)
        }
    }
}

/// Area of the geodesic sphere of radius `r`.
pub fn sphere_area_profile(m: ManifoldId, r: f64) -> Result<f64> {
    let p = Profile::new(m)?;
    p.check(r)?;
    Ok(p.area(r))
}

/// Volume of the geodesic ball of radius `r`, by adaptive quadrature of the profile.
pub fn ball_volume(m: ManifoldId, r: f64) -> Result<f64> {
    Profile::new(m)?.ball_volume(r)
}

/// A point of a CROSS, stored as a unit ambient vector in canonical gauge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point {
    ambient: Vec<f64>,
}

impl Point {
    /// Normalizes `coords` and fixes the projective gauge.
    pub fn from_ambient(m: ManifoldId, coords: Vec<f64>) -> Result<Self> {
        let len = m.ambient_len()?;
        if coords.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: coords.len(),
            });
        }
        let nrm = field::norm(&coords);
        if !(nrm > 0.0 && nrm.is_finite()) {
            return Err(Error::InvalidArgument(
                "ambient vector must be finite and nonzero".into(),
            ));
        }
        let mut ambient: Vec<f64> = coords.into_iter().map(|c| c / nrm).collect();
        canonicalize(m, &mut ambient);
        Ok(Point { ambient })
    }

    /// The `i`-th ambient basis vector (over the base field).
    pub fn basis(m: ManifoldId, i: usize) -> Result<Self> {
        let len = m.ambient_len()?;
        let mut v = vec![0.0; len];
        let idx = i * m.scalar_width();
        if idx >= len {
            return Err(Error::InvalidArgument(format!("basis index {i} out of range")));
        }
        v[idx] = 1.0;
        Point::from_ambient(m, v)
    }

    pub fn ambient(&self) -> &[f64] {
        &self.ambient
    }

    /// Check the stored invariants against `m`.
    pub fn validate(&self, m: ManifoldId) -> Result<()> {
        let len = m.ambient_len()?;
        if self.ambient.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: self.ambient.len(),
            });
        }
        if (field::norm(&self.ambient) - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument("point is not a unit vector".into()));
        }
        Ok(())
    }
}

/// Fix the gauge: the first coordinate of non-negligible modulus becomes real positive.
fn canonicalize(m: ManifoldId, x: &mut [f64]) {
    if !m.is_projective() {
        return;
    }
    let w = m.scalar_width();
    for i in 0..x.len() / w {
        let c = Quat::load(x, i, w);
        let r = c.norm();
        if r > GAUGE_EPS {
            field::right_mul(x, c.conj().scale(1.0 / r), w);
            // remove the rounding residue in the imaginary parts
            Quat::real(r).store(x, i, w);
            return;
        }
    }
}

/// A tangent vector, horizontal with respect to the gauge orbit of its base point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: Point,
    pub vec: Vec<f64>,
}

impl TangentVector {
    /// Checked constructor: `vec` must already be horizontal at `base`.
    pub fn new(m: ManifoldId, base: Point, vec: Vec<f64>) -> Result<Self> {
        base.validate(m)?;
        if vec.len() != base.ambient.len() {
            return Err(Error::DimensionMismatch {
                expected: base.ambient.len(),
                got: vec.len(),
            });
        }
        let residual = field::inner(&base.ambient, &vec, m.scalar_width()).norm();
        if residual > 1e-10 * field::norm(&vec).max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "vector is not tangent (residual {residual:e})"
            )));
        }
        Ok(TangentVector { base, vec })
    }

    /// Project an arbitrary ambient vector onto the horizontal space at `base`.
    pub fn project(m: ManifoldId, base: Point, mut vec: Vec<f64>) -> Result<Self> {
        base.validate(m)?;
        if vec.len() != base.ambient.len() {
            return Err(Error::DimensionMismatch {
                expected: base.ambient.len(),
                got: vec.len(),
            });
        }
        horizontal_projection(m, &base.ambient, &mut vec);
        Ok(TangentVector { base, vec })
    }

    pub fn zero(base: Point) -> Self {
        let vec = vec![0.0; base.ambient.len()];
        TangentVector { base, vec }
    }

    pub fn norm(&self) -> f64 {
        field::norm(&self.vec)
    }

    /// Riemannian inner product (the real part of the ambient one).
    pub fn inner(&self, other: &TangentVector) -> f64 {
        field::dot(&self.vec, &other.vec)
    }

    pub fn scaled(&self, s: f64) -> TangentVector {
        TangentVector {
            base: self.base.clone(),
            vec: self.vec.iter().map(|v| v * s).collect(),
        }
    }
}

/// `v <- v - x <x, v>_K`
pub(crate) fn horizontal_projection(m: ManifoldId, x: &[f64], v: &mut [f64]) {
    let w = m.scalar_width();
    let c = field::inner(x, v, w);
    for i in 0..x.len() / w {
        let vi = Quat::load(v, i, w) - Quat::load(x, i, w) * c;
        vi.store(v, i, w);
    }
}

fn check_pair(m: ManifoldId, x: &Point, y: &Point) -> Result<()> {
    let len = m.ambient_len()?;
    for p in [x, y] {
        if p.ambient.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: p.ambient.len(),
            });
        }
    }
    Ok(())
}

/// Rotate `y` within its gauge orbit so that `<x, y>` is real and non-negative.
/// Returns the aligned representative and `|<x, y>|`.
fn align(m: ManifoldId, x: &[f64], y: &[f64]) -> (Vec<f64>, f64) {
    let w = m.scalar_width();
    let c = field::inner(x, y, w);
    let r = c.norm();
    let mut out = y.to_vec();
    if r > 0.0 {
        field::right_mul(&mut out, c.conj().scale(1.0 / r), w);
    }
    (out, r)
}

fn chord(a: &[f64], b: &[f64], sign: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - sign * q) * (p - sign * q))
        .sum::<f64>()
        .sqrt()
}

/// Intrinsic Riemannian distance.
pub fn distance(m: ManifoldId, x: &Point, y: &Point) -> Result<f64> {
    check_pair(m, x, y)?;
    Ok(distance_unchecked(m, &x.ambient, &y.ambient))
}

pub(crate) fn distance_unchecked(m: ManifoldId, x: &[f64], y: &[f64]) -> f64 {
    // arccos is ill-conditioned near +-1; the half-chord form is used there
    let d = if m.is_projective() {
        let w = m.scalar_width();
        let c = field::inner(x, y, w);
        let modulus = c.norm().min(1.0);
        if modulus > 0.5 {
            2.0 * (0.5 * aligned_chord(x, y, c, w)).min(1.0).asin()
        } else {
            modulus.acos()
        }
    } else {
        let c = field::dot(x, y).clamp(-1.0, 1.0);
        if c > 0.5 {
            2.0 * (0.5 * chord(x, y, 1.0)).min(1.0).asin()
        } else if c < -0.5 {
            PI - 2.0 * (0.5 * chord(x, y, -1.0)).min(1.0).asin()
        } else {
            c.acos()
        }
    };
    if d < ZERO_DISTANCE {
        0.0
    } else {
        d.min(m.diameter())
    }
}

/// `|x - y u|` with the unit scalar `u = conj(c) / |c|` that makes `<x, y u>` real positive.
fn aligned_chord(x: &[f64], y: &[f64], c: Quat, w: usize) -> f64 {
    let u = c.conj().scale(1.0 / c.norm());
    (0..x.len() / w)
        .map(|i| (Quat::load(x, i, w) - Quat::load(y, i, w) * u).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Endpoint of the geodesic `t -> exp_x(t v)` at `t = 1`.
pub fn exp_map(m: ManifoldId, v: &TangentVector) -> Result<Point> {
    let len = m.ambient_len()?;
    if v.vec.len() != len || v.base.ambient.len() != len {
        return Err(Error::DimensionMismatch {
            expected: len,
            got: v.vec.len(),
        });
    }
    let t = v.norm();
    if t == 0.0 {
        return Ok(v.base.clone());
    }
    let (s, c) = t.sin_cos();
    let y: Vec<f64> = v
        .base
        .ambient
        .iter()
        .zip(&v.vec)
        .map(|(x, u)| x * c + u / t * s)
        .collect();
    Point::from_ambient(m, y)
}

/// Inverse of `exp_map` inside the injectivity radius.
pub fn log_map(m: ManifoldId, x: &Point, y: &Point) -> Result<TangentVector> {
    check_pair(m, x, y)?;
    let d = distance_unchecked(m, &x.ambient, &y.ambient);
    if d == 0.0 {
        return Ok(TangentVector::zero(x.clone()));
    }
    if m.diameter() - d < CUT_LOCUS_BAND {
        return Err(Error::CutLocus { distance: d });
    }
    let (ya, c) = if m.is_projective() {
        align(m, &x.ambient, &y.ambient)
    } else {
        (y.ambient.clone(), field::dot(&x.ambient, &y.ambient))
    };
    let mut w: Vec<f64> = ya.iter().zip(&x.ambient).map(|(p, q)| p - q * c).collect();
    horizontal_projection(m, &x.ambient, &mut w);
    let nrm = field::norm(&w);
    if nrm == 0.0 {
        return Err(Error::CutLocus { distance: d });
    }
    Ok(TangentVector {
        base: x.clone(),
        vec: w.into_iter().map(|u| u * d / nrm).collect(),
    })
}

/// Uniform sample with respect to the Riemannian volume.
pub fn random_point<R: Rng + ?Sized>(m: ManifoldId, rng: &mut R) -> Result<Point> {
    let len = m.ambient_len()?;
    loop {
        let v: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
        if field::norm(&v) > 1e-8 {
            return Point::from_ambient(m, v);
        }
    }
}

/// Uniformly distributed unit tangent direction at `x`.
pub fn random_unit_tangent<R: Rng + ?Sized>(
    m: ManifoldId,
    x: &Point,
    rng: &mut R,
) -> Result<TangentVector> {
    let len = m.ambient_len()?;
    loop {
        let v: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
        let t = TangentVector::project(m, x.clone(), v)?;
        let nrm = t.norm();
        if nrm > 1e-8 {
            return Ok(t.scaled(1.0 / nrm));
        }
    }
}

/// An ambient isometry: a real orthogonal mixing of the coordinates composed
/// with left multiplication of each coordinate by a unit scalar. Both commute
/// with the right gauge action and preserve `|<x, y>|`.
#[derive(Debug, Clone)]
pub struct Isometry {
    manifold: ManifoldId,
    rotation: Vec<f64>,
    phases: Vec<Quat>,
}

impl Isometry {
    pub fn random<R: Rng + ?Sized>(m: ManifoldId, rng: &mut R) -> Result<Self> {
        m.require_points()?;
        let k = m.coordinate_count();
        let w = m.scalar_width();
        // Gram-Schmidt on a Gaussian matrix
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(k);
        while rows.len() < k {
            let mut r: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
            for _ in 0..2 {
                for q in &rows {
                    let c = field::dot(q, &r);
                    r.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
                }
            }
            let nrm = field::norm(&r);
            if nrm > 1e-6 {
                rows.push(r.into_iter().map(|a| a / nrm).collect());
            }
        }
        let phases = (0..k)
            .map(|_| {
                let mut q = [0.0; 4];
                loop {
                    for c in q.iter_mut().take(w) {
                        *c = rng.sample(StandardNormal);
                    }
                    let n = Quat(q).norm();
                    if n > 1e-6 {
                        return Quat(q).scale(1.0 / n);
                    }
                }
            })
            .collect();
        Ok(Isometry {
            manifold: m,
            rotation: rows.concat(),
            phases,
        })
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        let m = self.manifold;
        let k = m.coordinate_count();
        let w = m.scalar_width();
        let mut phased = x.ambient.clone();
        for (i, q) in self.phases.iter().enumerate() {
            field::left_mul_coord(&mut phased, i, *q, w);
        }
        let mut out = vec![0.0; phased.len()];
        for i in 0..k {
            for j in 0..k {
                let r = self.rotation[i * k + j];
                for c in 0..w {
                    out[i * w + c] += r * phased[j * w + c];
                }
            }
        }
        Point::from_ambient(m, out)
    }
}
