//! Separation constants `C_M` and the exclusion radius `r_N`.
//!
//! A minimizer of the Green energy with `N` points satisfies
//! `dsep >= C_M (N - 1)^(-1/n)`, and on these spaces the sharper statement
//! `dsep >= r_N` with `V(r_N) = V / (N - 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{total_volume, ManifoldId, Profile};
use crate::special::{ln_gamma_half, unit_sphere_volume};

/// Agreement required between the closed-form constant and the volume quotient.
pub const CONSISTENCY_TOL: f64 = 1e-12;

/// Closed-form `C_M`, evaluated through log-Gamma.
pub fn cross_constant(m: ManifoldId) -> Result<f64> {
    m.validate()?;
    let half_ln_pi = 0.5 * std::f64::consts::PI.ln();
    Ok(match m {
        ManifoldId::Sphere(n) => {
            let k = n as u32;
            let ln = (n as f64).ln() + half_ln_pi + ln_gamma_half(k) - ln_gamma_half(k + 1);
            (ln / n as f64).exp()
        }
        ManifoldId::RealProj(mm) => {
            let k = mm as u32;
            let ln = (mm as f64 / 2.0).ln() + half_ln_pi + ln_gamma_half(k) - ln_gamma_half(k + 1);
            (ln / mm as f64).exp()
        }
        ManifoldId::ComplexProj(_) => 1.0,
        ManifoldId::QuatProj(mm) => (-((2 * mm + 1) as f64).ln() / (4 * mm) as f64).exp(),
        ManifoldId::OctoProj2 => (-(165f64).ln() / 16.0).exp(),
    })
}

/// `(n vol(M) / vol(S^(n-1)))^(1/n)`, computed from the volumes alone.
pub fn volume_quotient_constant(m: ManifoldId) -> Result<f64> {
    m.validate()?;
    let n = m.dim();
    let q = n as f64 * total_volume(m) / unit_sphere_volume(n as u32 - 1);
    Ok(q.powf(1.0 / n as f64))
}

/// Compare the two routes to `C_M`.
pub fn constant_consistency_check(m: ManifoldId) -> Result<bool> {
    let closed_form = cross_constant(m)?;
    let quotient = volume_quotient_constant(m)?;
    if (closed_form - quotient).abs() <= CONSISTENCY_TOL * closed_form {
        Ok(true)
    } else {
        Err(Error::Consistency {
            manifold: m,
            closed_form,
            quotient,
        })
    }
}

/// Solution of `V(r) = V / (N - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusSolution {
    pub r: f64,
    /// Set for `N = 2`, where the target is the whole manifold and `r = D`.
    pub saturated: bool,
    /// `|V(r) - V / (N - 1)|`
    pub residual: f64,
}

pub fn radius_r_n(m: ManifoldId, big_n: usize) -> Result<RadiusSolution> {
    if big_n < 2 {
        return Err(Error::InvalidArgument(format!("N = {big_n}; need N >= 2")));
    }
    let p = Profile::new(m)?;
    if big_n == 2 {
        return Ok(RadiusSolution {
            r: p.diameter,
            saturated: true,
            residual: p.outer_volume(p.diameter)?,
        });
    }
    let target = p.volume / (big_n - 1) as f64;
    // signed V(r) - target, taken through the complement past the midpoint
    let excess = |r: f64| -> Result<f64> {
        if r <= 0.5 * p.diameter {
            Ok(p.ball_volume(r)? - target)
        } else {
            Ok((p.volume - target) - p.outer_volume(r)?)
        }
    };
    let (mut lo, mut hi) = (0.0, p.diameter);
    let mut mid = 0.5 * (lo + hi);
    let mut f_mid = excess(mid)?;
    for _ in 0..200 {
        if f_mid == 0.0 {
            break;
        }
        if f_mid < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        let next = 0.5 * (lo + hi);
        if next == lo || next == hi {
            break;
        }
        mid = next;
        f_mid = excess(mid)?;
    }
    let residual = f_mid.abs();
    if residual > 1e-12 * p.volume {
        return Err(Error::InvalidArgument(format!(
            "bisection for r_N stalled with residual {residual:e}"
        )));
    }
    Ok(RadiusSolution {
        r: mid,
        saturated: false,
        residual,
    })
}

/// Both lower bounds on the separation of an `N`-point minimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub manifold: ManifoldId,
    pub n_points: usize,
    pub c_constant: f64,
    /// `C_M (N - 1)^(-1/n)`
    pub bound_constant: f64,
    pub r_n: f64,
    pub r_n_saturated: bool,
    /// `|V(r_N) - V / (N - 1)|`
    pub vol_check: f64,
}

pub fn bound_report(m: ManifoldId, big_n: usize) -> Result<BoundReport> {
    let c = cross_constant(m)?;
    let rs = radius_r_n(m, big_n)?;
    Ok(BoundReport {
        manifold: m,
        n_points: big_n,
        c_constant: c,
        bound_constant: c * ((big_n - 1) as f64).powf(-1.0 / m.dim() as f64),
        r_n: rs.r,
        r_n_saturated: rs.saturated,
        vol_check: rs.residual,
    })
}
