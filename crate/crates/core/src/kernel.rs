//! Radial Green's function `G(x, y) = phi(d(x, y))` of a CROSS.
//!
//! `phi'` is known in closed form up to one quadrature,
//! `phi'(r) = -(V^-1 int_r^D v) / v(r)`, and the additive constant is fixed
//! by `int_M G(x, .) = 0`. The table stores `phi` as an analytic singular
//! part plus a remainder that is interpolated by cubic Hermite pieces. In
//! dimension `n >= 3` the remainder itself behaves like `r^(4-n)`, so it is
//! interpolated after multiplication by `r^(n-2)`, which makes it bounded.

use std::f64::consts::PI;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, ManifoldId, Point, Profile};
use crate::quadrature;

pub const MIN_GRID: usize = 64;
pub const DEFAULT_GRID: usize = 512;
/// Default for the 16-dimensional Cayley plane, whose steep kernel needs a finer grid
/// to keep the zero-mean residual below `1e-8 V`.
pub const DEFAULT_GRID_HIGH_DIM: usize = 2048;
pub const DEFAULT_TOL: f64 = 1e-12;
/// Quadrature tolerance of the validation potentials `f_r` and `b_r`.
pub const ORACLE_TOL: f64 = 1e-10;

const FILE_FORMAT: &str = "greensep-kernel";
const FILE_VERSION: u32 = 1;
/// Smallest geometric refinement node, as a fraction of the diameter.
const INNER_LIMIT: f64 = 1e-8;

/// `phi'(r)` by direct quadrature, for `0 < r < D`.
pub fn phi_prime(m: ManifoldId, r: f64) -> Result<f64> {
    let p = Profile::new(m)?;
    if !(r > 0.0 && r < p.diameter) {
        return Err(Error::Domain {
            what: "radius (open interval)",
            value: r,
            lo: 0.0,
            hi: p.diameter,
        });
    }
    Radial::new(p).phi_prime(r)
}

/// Leading behaviour of `phi` at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SingularPart {
    /// One-dimensional spaces: `phi` is bounded.
    None,
    /// `-c ln r`, surfaces.
    Log { coefficient: f64 },
    /// `c r^exponent` with `exponent = 2 - n`.
    Power { coefficient: f64, exponent: i32 },
}

impl SingularPart {
    fn for_profile(p: &Profile) -> Self {
        match p.n {
            1 => SingularPart::None,
            2 => SingularPart::Log {
                coefficient: 1.0 / p.omega,
            },
            n => SingularPart::Power {
                coefficient: 1.0 / ((n as f64 - 2.0) * p.omega),
                exponent: 2 - n as i32,
            },
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        match *self {
            SingularPart::None => 0.0,
            SingularPart::Log { coefficient } => -coefficient * r.ln(),
            SingularPart::Power {
                coefficient,
                exponent,
            } => coefficient * r.powi(exponent),
        }
    }

    pub fn derivative(&self, r: f64) -> f64 {
        match *self {
            SingularPart::None => 0.0,
            SingularPart::Log { coefficient } => -coefficient / r,
            SingularPart::Power {
                coefficient,
                exponent,
            } => coefficient * exponent as f64 * r.powi(exponent - 1),
        }
    }

    pub fn second_derivative(&self, r: f64) -> f64 {
        match *self {
            SingularPart::None => 0.0,
            SingularPart::Log { coefficient } => coefficient / (r * r),
            SingularPart::Power {
                coefficient,
                exponent,
            } => {
                let e = exponent as f64;
                coefficient * e * (e - 1.0) * r.powi(exponent - 2)
            }
        }
    }
}

/// Quadrature-level evaluation of `phi'` and `phi''`.
struct Radial {
    p: Profile,
}

impl Radial {
    fn new(p: Profile) -> Self {
        Radial { p }
    }

    fn phi_prime(&self, r: f64) -> Result<f64> {
        if r >= self.p.diameter {
            return Ok(0.0);
        }
        let outer = self.p.outer_volume(r)?;
        Ok(-(outer / self.p.volume) / self.p.area(r))
    }

    /// `phi'' = 1/V - phi' v'/v`, with the one-sided limit at the diameter.
    fn phi_second(&self, r: f64, phi_prime: f64) -> f64 {
        if r >= self.p.diameter {
            let k = self.p.manifold.antipodal_order() as f64;
            return 1.0 / ((k + 1.0) * self.p.volume);
        }
        1.0 / self.p.volume - phi_prime * self.p.log_derivative(r)
    }

    /// `phi(D)` under the zero-mean normalization:
    /// `int_0^D phi v = 0` integrates by parts to `phi(D) = V^-1 int_0^D phi' V(r) dr`.
    fn phi_at_diameter(&self, tol: f64, scale: f64) -> Result<f64> {
        let d = self.p.diameter;
        let vol = self.p.volume;
        let integrand = |r: f64| {
            if r <= 0.0 || r >= d {
                return 0.0;
            }
            match (self.p.ball_volume(r), self.p.outer_volume(r)) {
                (Ok(inner), Ok(outer)) => -(outer * inner) / (vol * self.p.area(r)),
                _ => f64::NAN,
            }
        };
        let v = quadrature::integrate(integrand, 0.0, d, tol * vol * scale)?;
        if !v.is_finite() {
            return Err(Error::KernelBuild("normalization quadrature is not finite".into()));
        }
        Ok(v / vol)
    }
}

/// Tabulated radial kernel. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelTable {
    pub manifold: ManifoldId,
    pub grid_size: usize,
    pub tol: f64,
    /// Strictly increasing radii ending at the diameter.
    pub grid: Vec<f64>,
    pub phi: Vec<f64>,
    pub phi_prime: Vec<f64>,
    pub near_origin: SingularPart,
    /// Exponent `e` of the weight `w = r^e` applied to the remainder.
    pub weight_exponent: i32,
    /// `w (phi - singular part)` at the nodes, and its derivative.
    pub remainder: Vec<f64>,
    pub remainder_slope: Vec<f64>,
    /// `w (phi' - singular part')` at the nodes, and its derivative.
    pub remainder_prime: Vec<f64>,
    pub remainder_prime_slope: Vec<f64>,
    /// `phi(D)`: the shift from the convention `phi(D) = 0` to the zero-mean one.
    pub norm_constant: f64,
    /// `int_0^D phi v dr`, re-evaluated from the interpolant after construction.
    pub mean_residual: f64,
    pub volume: f64,
    pub diameter: f64,
}

#[derive(Serialize, Deserialize)]
struct KernelFile {
    format: String,
    version: u32,
    library_version: String,
    /// Free-form record of the run that produced the file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<serde_json::Value>,
    table: KernelTable,
}

/// Chebyshev-spaced nodes on `(0, D]`, continued geometrically towards the
/// origin once their spacing exceeds the fraction `q` of the radius.
fn build_grid(d: f64, k: usize, q: f64) -> Vec<f64> {
    let cheb: Vec<f64> = (1..=k)
        .map(|i| d * (1.0 - (PI * i as f64 / (2 * k) as f64).cos()))
        .collect();
    let start = (0..k - 1)
        .find(|&j| cheb[j + 1] - cheb[j] <= q * cheb[j])
        .unwrap_or(k - 1);
    let mut inner = Vec::new();
    let mut r = cheb[start] / (1.0 + q);
    while r > INNER_LIMIT * d {
        inner.push(r);
        r /= 1.0 + q;
    }
    inner.reverse();
    let mut grid = inner;
    grid.extend_from_slice(&cheb[start..]);
    *grid.last_mut().expect("k >= 1") = d;
    grid
}

impl KernelTable {
    pub fn build(m: ManifoldId, k: usize, tol: f64) -> Result<Self> {
        if k < MIN_GRID {
            return Err(Error::InvalidArgument(format!(
                "grid size {k} is below the minimum {MIN_GRID}"
            )));
        }
        if !(tol > 0.0 && tol < 1e-3) {
            return Err(Error::InvalidArgument(format!("tolerance {tol} out of range")));
        }
        let p = Profile::new(m)?;
        let radial = Radial::new(p);
        let sing = SingularPart::for_profile(&p);
        let d = p.diameter;
        // the remainder steepens like r^(4-n) near the origin in high dimension
        let grid = build_grid(d, k, (0.5 / p.n as f64).min(0.25));

        let mut phi_prime = Vec::with_capacity(grid.len());
        let mut rho_prime = Vec::with_capacity(grid.len());
        let mut rho_second = Vec::with_capacity(grid.len());
        for &r in &grid {
            let dp = radial.phi_prime(r)?;
            phi_prime.push(dp);
            rho_prime.push(dp - sing.derivative(r));
            rho_second.push(radial.phi_second(r, dp) - sing.second_derivative(r));
        }

        // typical size of phi away from the origin; all tolerances are relative to it
        let phi_scale = radial.phi_prime(0.5 * d)?.abs() * d;
        let norm_constant = radial.phi_at_diameter(tol, phi_scale)?;
        // integrate the remainder downward from the diameter, panel by panel
        let rho_deriv = |t: f64| -> f64 {
            match radial.phi_prime(t) {
                Ok(v) => v - sing.derivative(t),
                Err(_) => f64::NAN,
            }
        };
        let mut rho = vec![0.0; grid.len()];
        let last = grid.len() - 1;
        rho[last] = norm_constant - sing.value(d);
        for i in (0..last).rev() {
            let (a, b) = (grid[i], grid[i + 1]);
            // roundoff in phi' - sing' scales with |sing'|, so the tolerance does too
            let scale = phi_scale + sing.value(a).abs() + (sing.derivative(a) * (b - a)).abs();
            let piece = quadrature::integrate(rho_deriv, a, b, tol * scale / 16.0)
                .map_err(|e| Error::KernelBuild(format!("remainder panel [{a}, {b}]: {e}")))?;
            if !piece.is_finite() {
                return Err(Error::KernelBuild(format!("non-finite remainder on [{a}, {b}]")));
            }
            rho[i] = rho[i + 1] - piece;
        }
        let phi: Vec<f64> = grid.iter().zip(&rho).map(|(&r, q)| sing.value(r) + q).collect();

        let e = if p.n >= 3 { p.n as i32 - 2 } else { 0 };
        let n_nodes = grid.len();
        let (mut rem, mut rem_slope) = (Vec::with_capacity(n_nodes), Vec::with_capacity(n_nodes));
        let (mut remp, mut remp_slope) = (Vec::with_capacity(n_nodes), Vec::with_capacity(n_nodes));
        for i in 0..n_nodes {
            let (w, dw) = weight(grid[i], e);
            rem.push(w * rho[i]);
            rem_slope.push(dw * rho[i] + w * rho_prime[i]);
            remp.push(w * rho_prime[i]);
            remp_slope.push(dw * rho_prime[i] + w * rho_second[i]);
        }

        let mut table = KernelTable {
            manifold: m,
            grid_size: k,
            tol,
            grid,
            phi,
            phi_prime,
            near_origin: sing,
            weight_exponent: e,
            remainder: rem,
            remainder_slope: rem_slope,
            remainder_prime: remp,
            remainder_prime_slope: remp_slope,
            norm_constant,
            mean_residual: 0.0,
            volume: p.volume,
            diameter: d,
        };
        table.mean_residual = table.integrate_against_profile(&p, tol * phi_scale)?;
        table.check_invariants()?;
        Ok(table)
    }

    pub fn build_default(m: ManifoldId) -> Result<Self> {
        Self::build(m, default_grid_size(m), DEFAULT_TOL)
    }

    fn check_invariants(&self) -> Result<()> {
        let last = self.grid.len() - 1;
        for i in 0..last {
            if !(self.phi_prime[i] < 0.0) {
                return Err(Error::KernelBuild(format!(
                    "phi' = {} is not negative at r = {}",
                    self.phi_prime[i], self.grid[i]
                )));
            }
            if !(self.phi[i + 1] < self.phi[i]) {
                return Err(Error::KernelBuild(format!(
                    "phi is not decreasing at r = {}",
                    self.grid[i + 1]
                )));
            }
        }
        if self.mean_residual.abs() > 1e-8 * self.volume {
            return Err(Error::KernelBuild(format!(
                "zero-mean residual {:e} exceeds 1e-8 V",
                self.mean_residual
            )));
        }
        Ok(())
    }

    /// `int_0^D phi(r) v(r) dr` using the interpolant, panel by panel.
    fn integrate_against_profile(&self, p: &Profile, tol: f64) -> Result<f64> {
        let f = |r: f64| {
            if r <= 0.0 {
                0.0
            } else {
                self.eval(r).0 * p.area(r)
            }
        };
        let mut total = quadrature::integrate(f, 0.0, self.grid[0], tol * p.volume)?;
        for w in self.grid.windows(2) {
            total += quadrature::integrate(f, w[0], w[1], tol * p.volume)?;
        }
        Ok(total)
    }

    fn locate(&self, r: f64) -> usize {
        // index i with grid[i] <= r < grid[i + 1], clamped to the last panel
        let i = self.grid.partition_point(|&g| g <= r);
        i.saturating_sub(1).min(self.grid.len() - 2)
    }

    /// `(phi(r), phi'(r))` without domain checks; `r` in `(0, D]`.
    fn eval(&self, r: f64) -> (f64, f64) {
        let sing = self.near_origin;
        let w = weight(r, self.weight_exponent).0;
        if r < self.grid[0] {
            let h = r - self.grid[0];
            let rho = self.remainder[0] + self.remainder_slope[0] * h;
            let rho_p = self.remainder_prime[0] + self.remainder_prime_slope[0] * h;
            return (sing.value(r) + rho / w, sing.derivative(r) + rho_p / w);
        }
        let i = self.locate(r);
        let (a, b) = (self.grid[i], self.grid[i + 1]);
        let rho = hermite(
            r,
            a,
            b,
            self.remainder[i],
            self.remainder[i + 1],
            self.remainder_slope[i],
            self.remainder_slope[i + 1],
            true,
        );
        let rho_p = hermite(
            r,
            a,
            b,
            self.remainder_prime[i],
            self.remainder_prime[i + 1],
            self.remainder_prime_slope[i],
            self.remainder_prime_slope[i + 1],
            true,
        );
        (sing.value(r) + rho / w, sing.derivative(r) + rho_p / w)
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        if r.is_nan() || r > self.diameter * (1.0 + 1e-12) || r < 0.0 {
            return Err(Error::Domain {
                what: "radius",
                value: r,
                lo: 0.0,
                hi: self.diameter,
            });
        }
        if r <= geometry::ZERO_DISTANCE {
            return Err(Error::Singularity { distance: r });
        }
        Ok(())
    }

    pub fn phi(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        Ok(self.eval(r.min(self.diameter)).0)
    }

    pub fn phi_prime(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        Ok(self.eval(r.min(self.diameter)).1)
    }

    /// `(phi, phi')` in one lookup; the energy hot path.
    pub fn phi_and_prime(&self, r: f64) -> Result<(f64, f64)> {
        self.check_radius(r)?;
        Ok(self.eval(r.min(self.diameter)))
    }

    /// `phi(r)` by direct quadrature of `phi'` from the diameter; slow, for validation.
    pub fn phi_direct(&self, r: f64, tol: f64) -> Result<f64> {
        self.check_radius(r)?;
        let p = Profile::new(self.manifold)?;
        let radial = Radial::new(p);
        let sing = self.near_origin;
        let rho_deriv = |t: f64| match radial.phi_prime(t) {
            Ok(v) => v - sing.derivative(t),
            Err(_) => f64::NAN,
        };
        let d = self.diameter;
        let r = r.min(d);
        let piece = quadrature::integrate(rho_deriv, r, d, tol * (1.0 + sing.value(r).abs()))?;
        Ok(sing.value(r) + self.norm_constant - sing.value(d) - piece)
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        self.write_json_inner(w, None)
    }

    /// As [`KernelTable::write_json`], with a provenance record stored next to the table.
    pub fn write_json_with<W: Write>(&self, w: W, provenance: &serde_json::Value) -> Result<()> {
        self.write_json_inner(w, Some(provenance.clone()))
    }

    fn write_json_inner<W: Write>(&self, w: W, provenance: Option<serde_json::Value>) -> Result<()> {
        let file = KernelFile {
            format: FILE_FORMAT.into(),
            version: FILE_VERSION,
            library_version: env!("CARGO_PKG_VERSION").into(),
            provenance,
            table: self.clone(),
        };
        serde_json::to_writer_pretty(w, &file)?;
        Ok(())
    }

    pub fn read_json<R: Read>(r: R) -> Result<Self> {
        let file: KernelFile = serde_json::from_reader(r)?;
        if file.format != FILE_FORMAT {
            return Err(Error::InvalidArgument(format!(
                "not a kernel file (format {:?})",
                file.format
            )));
        }
        if file.version != FILE_VERSION {
            return Err(Error::UnsupportedVersion(file.version));
        }
        let t = file.table;
        let len = t.grid.len();
        let lens = [
            t.phi.len(),
            t.phi_prime.len(),
            t.remainder.len(),
            t.remainder_slope.len(),
            t.remainder_prime.len(),
            t.remainder_prime_slope.len(),
        ];
        if len < 2 || lens.iter().any(|&l| l != len) {
            return Err(Error::InvalidArgument("kernel file has ragged columns".into()));
        }
        Ok(t)
    }

    /// Grid dump with columns `r, phi, phi_prime`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "r,phi,phi_prime")?;
        for i in 0..self.grid.len() {
            writeln!(w, "{:e},{:e},{:e}", self.grid[i], self.phi[i], self.phi_prime[i])?;
        }
        Ok(())
    }
}

pub fn default_grid_size(m: ManifoldId) -> usize {
    if m.dim() > 8 {
        DEFAULT_GRID_HIGH_DIM
    } else {
        DEFAULT_GRID
    }
}

/// `(r^e, e r^(e-1))`
fn weight(r: f64, e: i32) -> (f64, f64) {
    if e == 0 {
        (1.0, 0.0)
    } else {
        let p = r.powi(e - 1);
        (p * r, e as f64 * p)
    }
}

/// Cubic Hermite interpolation on `[a, b]`, optionally with the
/// Fritsch–Carlson slope limiter where the data is monotone.
#[allow(clippy::too_many_arguments)]
fn hermite(x: f64, a: f64, b: f64, ya: f64, yb: f64, ma: f64, mb: f64, limit: bool) -> f64 {
    let h = b - a;
    let (mut ma, mut mb) = (ma, mb);
    if limit {
        let delta = (yb - ya) / h;
        if delta == 0.0 {
            ma = 0.0;
            mb = 0.0;
        } else if ma * delta > 0.0 && mb * delta > 0.0 {
            let (al, be) = (ma / delta, mb / delta);
            let s = al * al + be * be;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                ma = tau * al * delta;
                mb = tau * be * delta;
            }
        }
    }
    let t = (x - a) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * ya + h10 * h * ma + h01 * yb + h11 * h * mb
}

/// `G(x, y) = phi(d(x, y))`.
pub fn green_pair(table: &KernelTable, x: &Point, y: &Point) -> Result<f64> {
    let d = geometry::distance(table.manifold, x, y)?;
    if d <= geometry::ZERO_DISTANCE {
        return Err(Error::Singularity { distance: d });
    }
    table.phi(d)
}

fn check_cap_radius(p: &Profile, r: f64) -> Result<()> {
    if r > 0.0 && r < p.diameter {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "cap radius",
            value: r,
            lo: 0.0,
            hi: p.diameter,
        })
    }
}

/// `int_lo^hi V(u) / v(u) du`; the integrand vanishes linearly at the origin.
fn volume_ratio_integral(p: &Profile, lo: f64, hi: f64) -> Result<f64> {
    let f = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        match p.ball_volume(u) {
            Ok(vu) => vu / p.area(u),
            Err(_) => f64::NAN,
        }
    };
    quadrature::integrate(f, lo, hi, ORACLE_TOL)
}

/// Potential of the normalized surface measure of the geodesic sphere `S(p, r)`,
/// `f_r(x) = int G(x, y) dsigma(y)`, in closed radial form.
pub fn cap_potential_f_r(table: &KernelTable, p: &Point, r: f64, x: &Point) -> Result<f64> {
    let m = table.manifold;
    let prof = Profile::new(m)?;
    check_cap_radius(&prof, r)?;
    let t = geometry::distance(m, p, x)?;
    if t >= r {
        Ok(table.phi_direct(t, ORACLE_TOL)?
            + volume_ratio_integral(&prof, 0.0, r)? / prof.volume)
    } else {
        Ok(table.phi_direct(r, ORACLE_TOL)?
            + volume_ratio_integral(&prof, 0.0, t)? / prof.volume)
    }
}

/// Potential of the volume measure of `B(p, r)`, shifted so that outside the
/// ball it equals `V(r) G(p, x)` exactly.
pub fn ball_potential_b_r(table: &KernelTable, p: &Point, r: f64, x: &Point) -> Result<f64> {
    let m = table.manifold;
    let prof = Profile::new(m)?;
    check_cap_radius(&prof, r)?;
    let t = geometry::distance(m, p, x)?;
    let vr = prof.ball_volume(r)?;
    if t >= r {
        Ok(vr * table.phi_direct(t, ORACLE_TOL)?)
    } else {
        let inner = volume_ratio_integral(&prof, t, r)?;
        Ok(vr * table.phi_direct(r, ORACLE_TOL)? + (1.0 - vr / prof.volume) * inner)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{exp_map, random_point, random_unit_tangent, TangentVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::OnceLock;

    fn s2_table() -> &'static KernelTable {
        static T: OnceLock<KernelTable> = OnceLock::new();
        T.get_or_init(|| KernelTable::build_default(ManifoldId::Sphere(2)).unwrap())
    }

    fn s2_phi_prime(r: f64) -> f64 {
        -(0.5 * r).tan().recip() / (4.0 * PI)
    }

    fn s2_phi(r: f64) -> f64 {
        -(0.5 * r).sin().ln() / (2.0 * PI) - 1.0 / (4.0 * PI)
    }

    #[test]
    fn phi_prime_examples() {
        let s2 = ManifoldId::Sphere(2);
        assert!((phi_prime(s2, PI / 2.0).unwrap() + 1.0 / (4.0 * PI)).abs() < 1e-15);
        let s3 = ManifoldId::Sphere(3);
        assert!((phi_prime(s3, PI / 2.0).unwrap() + 1.0 / (8.0 * PI)).abs() < 1e-15);
        assert!(phi_prime(s2, 0.0).is_err());
        assert!(phi_prime(s2, PI).is_err());
        for m in [s3, ManifoldId::ComplexProj(2), ManifoldId::OctoProj2] {
            let d = m.diameter();
            for i in 1..50 {
                assert!(phi_prime(m, d * i as f64 / 50.0).unwrap() < 0.0);
            }
        }
    }

    #[test]
    fn s2_phi_prime_closed_form() {
        let t = s2_table();
        for i in 1..200 {
            let r = PI * i as f64 / 200.0;
            let exact = s2_phi_prime(r);
            let direct = phi_prime(ManifoldId::Sphere(2), r).unwrap();
            assert!(((direct - exact) / exact).abs() < 1e-12, "{r}");
            let tab = t.phi_prime(r).unwrap();
            assert!(((tab - exact) / exact).abs() < 1e-8, "{r}: {tab} {exact}");
        }
    }

    #[test]
    fn s2_table_matches_log_kernel() {
        let t = s2_table();
        assert!((t.norm_constant + 1.0 / (4.0 * PI)).abs() < 1e-12);
        for (&r, &phi) in t.grid.iter().zip(&t.phi) {
            assert!((phi - s2_phi(r)).abs() < 1e-10, "{r}");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let r = rng.random_range(1e-9..PI);
            let tab = t.phi(r).unwrap();
            assert!(((tab - s2_phi(r)) / s2_phi(r)).abs() < 1e-7 || (tab - s2_phi(r)).abs() < 1e-10, "{r}");
        }
        assert!(t.mean_residual.abs() < 1e-8 * 4.0 * PI);
        assert_eq!(t.phi(PI).unwrap(), *t.phi.last().unwrap());
    }

    #[test]
    fn s4_singular_coefficient() {
        let t = KernelTable::build(ManifoldId::Sphere(4), 128, 1e-12).unwrap();
        let expected = 1.0 / (4.0 * PI * PI);
        match t.near_origin {
            SingularPart::Power {
                coefficient,
                exponent,
            } => {
                assert!((coefficient - expected).abs() < 1e-15);
                assert_eq!(exponent, -2);
            }
            other => panic!("{other:?}"),
        }
        // independent check: -phi'(r) r^3 / 2 -> c as r -> 0, Richardson in r^2
        let s4 = ManifoldId::Sphere(4);
        let g = |r: f64| -phi_prime(s4, r).unwrap() * r.powi(3) / 2.0;
        let (a, b) = (g(1e-3), g(1e-4));
        let extrapolated = (100.0 * b - a) / 99.0;
        assert!((extrapolated - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn tables_satisfy_invariants() {
        for m in [
            ManifoldId::RealProj(1),
            ManifoldId::Sphere(3),
            ManifoldId::Sphere(5),
            ManifoldId::RealProj(2),
            ManifoldId::RealProj(3),
            ManifoldId::ComplexProj(2),
            ManifoldId::QuatProj(1),
            ManifoldId::OctoProj2,
        ] {
            let t = KernelTable::build_default(m).unwrap();
            assert!(t.mean_residual.abs() <= 1e-8 * t.volume, "{m}");
            assert!(t.phi_prime[..t.grid.len() - 1].iter().all(|&v| v < 0.0));
            assert!(t.phi.windows(2).all(|w| w[1] < w[0]));
        }
    }

    #[test]
    fn interpolant_matches_direct_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for m in [ManifoldId::Sphere(3), ManifoldId::ComplexProj(2), ManifoldId::QuatProj(1)] {
            let t = KernelTable::build_default(m).unwrap();
            for _ in 0..40 {
                let r = m.diameter() * rng.random_range(1e-4..1.0);
                let direct = t.phi_direct(r, 1e-12).unwrap();
                let tab = t.phi(r).unwrap();
                assert!(((tab - direct) / direct).abs() < 1e-7, "{m} at {r}: {tab} {direct}");
                let dp = phi_prime(m, r.min(m.diameter() * (1.0 - 1e-12))).unwrap();
                let tp = t.phi_prime(r).unwrap();
                assert!(((tp - dp) / dp).abs() < 1e-7, "{m} at {r}: {tp} {dp}");
            }
        }
    }

    #[test]
    fn finite_differences_match_phi_prime() {
        for m in [ManifoldId::Sphere(2), ManifoldId::Sphere(3), ManifoldId::ComplexProj(2)] {
            let t = KernelTable::build_default(m).unwrap();
            for i in (1..t.grid.len() - 1).step_by(7) {
                let r = t.grid[i];
                let h = 1e-5 * r.min(t.diameter - r);
                let fd = (t.phi(r + h).unwrap() - t.phi(r - h).unwrap()) / (2.0 * h);
                let dp = t.phi_prime[i];
                assert!(((fd - dp) / dp).abs() < 1e-5, "{m} at {r}: {fd} {dp}");
            }
        }
    }

    #[test]
    fn grid_doubling_is_stable() {
        let m = ManifoldId::Sphere(3);
        let a = KernelTable::build(m, 256, 1e-12).unwrap();
        let b = KernelTable::build(m, 512, 1e-12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let r = rng.random_range(1e-3..PI);
            assert!((a.phi(r).unwrap() - b.phi(r).unwrap()).abs() < 1e-8, "{r}");
        }
    }

    /// `-int phi (v psi')' dr = psi(0) - V^-1 int psi v` for a bump `psi`.
    fn weak_identity_defect(t: &KernelTable, b: f64) -> f64 {
        let p = Profile::new(t.manifold).unwrap();
        let psi = |r: f64| if r < b { (1.0 - (r / b).powi(2)).powi(4) } else { 0.0 };
        let dpsi = |r: f64| {
            if r < b {
                -8.0 * r / (b * b) * (1.0 - (r / b).powi(2)).powi(3)
            } else {
                0.0
            }
        };
        let d2psi = |r: f64| {
            if r < b {
                let s = 1.0 - (r / b).powi(2);
                -8.0 / (b * b) * s.powi(3) + 48.0 * r * r / b.powi(4) * s * s
            } else {
                0.0
            }
        };
        let lhs = quadrature::integrate(
            |r| {
                if r <= 0.0 {
                    return 0.0;
                }
                let v = p.area(r);
                let dv = v * p.log_derivative(r);
                -t.phi(r).unwrap() * (dv * dpsi(r) + v * d2psi(r))
            },
            0.0,
            b,
            1e-11,
        )
        .unwrap();
        let mass = quadrature::integrate(|r| psi(r) * p.area(r), 0.0, b, 1e-13).unwrap();
        lhs - (psi(0.0) - mass / p.volume)
    }

    #[test]
    fn distributional_identity() {
        for m in [ManifoldId::Sphere(2), ManifoldId::Sphere(3), ManifoldId::ComplexProj(2)] {
            let t = KernelTable::build_default(m).unwrap();
            for b in [0.3, 0.9 * m.diameter()] {
                let defect = weak_identity_defect(&t, b);
                assert!(defect.abs() < 1e-5, "{m} b={b}: {defect}");
            }
        }
    }

    #[test]
    fn file_round_trip() {
        let t = KernelTable::build(ManifoldId::RealProj(2), 64, 1e-12).unwrap();
        let mut buf = Vec::new();
        t.write_json(&mut buf).unwrap();
        let back = KernelTable::read_json(buf.as_slice()).unwrap();
        assert_eq!(back, t);
        let text = String::from_utf8(buf).unwrap().replace("\"version\": 1", "\"version\": 99");
        assert!(matches!(
            KernelTable::read_json(text.as_bytes()),
            Err(Error::UnsupportedVersion(99))
        ));
        let mut csv = Vec::new();
        t.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), t.grid.len() + 1);
    }

    #[test]
    fn green_pair_basics() {
        let s2 = ManifoldId::Sphere(2);
        let t = s2_table();
        let n = Point::from_ambient(s2, vec![0., 0., 1.]).unwrap();
        let s = Point::from_ambient(s2, vec![0., 0., -1.]).unwrap();
        let e = Point::from_ambient(s2, vec![1., 0., 0.]).unwrap();
        let min = green_pair(t, &n, &s).unwrap();
        assert!(t.phi.iter().all(|&v| v >= min));
        assert_eq!(green_pair(t, &n, &e).unwrap(), green_pair(t, &e, &n).unwrap());
        let want = -(PI / 4.0).sin().ln() / (2.0 * PI) + t.norm_constant;
        assert!((green_pair(t, &n, &e).unwrap() - want).abs() < 1e-10);
        assert!(matches!(green_pair(t, &n, &n), Err(Error::Singularity { .. })));
    }

    fn point_at(m: ManifoldId, p: &Point, dist: f64, rng: &mut ChaCha8Rng) -> Point {
        let u = random_unit_tangent(m, p, rng).unwrap();
        exp_map(m, &u.scaled(dist)).unwrap()
    }

    #[test]
    fn cap_potential_structure_and_continuity() {
        let s2 = ManifoldId::Sphere(2);
        let t = s2_table();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let p = random_point(s2, &mut rng).unwrap();
        let r = PI / 3.0;
        let c = volume_ratio_integral(&Profile::new(s2).unwrap(), 0.0, r).unwrap() / (4.0 * PI);
        assert!(c > 0.0);
        for _ in 0..3 {
            let x = point_at(s2, &p, 2.0, &mut rng);
            let diff = cap_potential_f_r(t, &p, r, &x).unwrap() - t.phi_direct(2.0, 1e-12).unwrap();
            assert!((diff - c).abs() < 1e-10);
        }
        for m in [s2, ManifoldId::ComplexProj(2)] {
            let t = KernelTable::build(m, 128, 1e-12).unwrap();
            let p = random_point(m, &mut rng).unwrap();
            let r = 0.4 * m.diameter();
            // f_r has a kink at the sphere, so each one-sided limit is
            // extrapolated linearly from d = r +- 1e-4 and r +- 2e-4
            let pts: Vec<Point> = [2e-4, 1e-4, -1e-4, -2e-4]
                .iter()
                .map(|h| point_at(m, &p, r + h, &mut rng))
                .collect();
            for pot in [cap_potential_f_r, ball_potential_b_r] {
                let v: Vec<f64> = pts.iter().map(|x| pot(&t, &p, r, x).unwrap()).collect();
                let outside = 2.0 * v[1] - v[0];
                let inside = 2.0 * v[2] - v[3];
                assert!((outside - inside).abs() < 1e-6, "{m}: {outside} {inside}");
            }
        }
    }

    #[test]
    fn cap_potential_monte_carlo() {
        let s2 = ManifoldId::Sphere(2);
        let t = s2_table();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let p = random_point(s2, &mut rng).unwrap();
        let r = 1.0;
        for dist in [0.4, 2.2] {
            let x = point_at(s2, &p, dist, &mut rng);
            let samples = 100_000;
            let (mut sum, mut sq) = (0.0, 0.0);
            for _ in 0..samples {
                let y = point_at(s2, &p, r, &mut rng);
                let g = green_pair(t, &x, &y).unwrap();
                sum += g;
                sq += g * g;
            }
            let mean = sum / samples as f64;
            let se = ((sq / samples as f64 - mean * mean) / samples as f64).sqrt();
            let f = cap_potential_f_r(t, &p, r, &x).unwrap();
            assert!((mean - f).abs() < 3.0 * se, "d={dist}: mc {mean} +- {se}, f_r {f}");
        }
    }

    #[test]
    fn ball_potential_below_point_potential_inside() {
        let s3 = ManifoldId::Sphere(3);
        let t = KernelTable::build(s3, 128, 1e-12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = random_point(s3, &mut rng).unwrap();
        let r = 1.1;
        let vr = Profile::new(s3).unwrap().ball_volume(r).unwrap();
        for dist in [0.1, 0.5, 1.0] {
            let x = point_at(s3, &p, dist, &mut rng);
            let b = ball_potential_b_r(&t, &p, r, &x).unwrap();
            assert!(b < vr * green_pair(&t, &p, &x).unwrap());
        }
        let x = point_at(s3, &p, 2.0, &mut rng);
        let b = ball_potential_b_r(&t, &p, r, &x).unwrap();
        assert!((b - vr * t.phi_direct(2.0, 1e-12).unwrap()).abs() < 1e-14);
        let zero = TangentVector::zero(p.clone());
        assert!(ball_potential_b_r(&t, &p, r, &exp_map(s3, &zero).unwrap()).is_ok());
    }
}
