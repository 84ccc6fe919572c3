//! Gamma values at half-integers and the sphere volumes built from them.
//!
//! Every Gamma argument that appears in the CROSS volume and separation
//! formulas is a multiple of 1/2, so the functions here take twice the
//! argument as an integer and evaluate exactly by recurrence from
//! `Gamma(1) = 1` and `Gamma(1/2) = sqrt(pi)`.

use std::f64::consts::PI;

/// `n!` as `f64`; exact for `n <= 18`, correctly rounded up to `n = 20`.
pub fn factorial(n: u32) -> f64 {
    if n <= 20 {
        (1..=n as u64).product::<u64>() as f64
    } else {
        ln_factorial(n).exp()
    }
}

pub fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `ln Gamma(k / 2)` for `k >= 1`.
pub fn ln_gamma_half(k: u32) -> f64 {
    assert!(k >= 1, "Gamma has a pole at 0");
    if k % 2 == 0 {
        ln_factorial(k / 2 - 1)
    } else {
        // Gamma(j + 1/2) = sqrt(pi) * prod_{i < j} (i + 1/2)
        let j = (k - 1) / 2;
        0.5 * PI.ln() + (0..j).map(|i| (i as f64 + 0.5).ln()).sum::<f64>()
    }
}

/// `Gamma(k / 2)` for `k >= 1`.
pub fn gamma_half(k: u32) -> f64 {
    assert!(k >= 1, "Gamma has a pole at 0");
    if k % 2 == 0 && k / 2 - 1 <= 20 {
        factorial(k / 2 - 1)
    } else if k % 2 == 1 && k <= 41 {
        let j = (k - 1) / 2;
        PI.sqrt() * (0..j).map(|i| i as f64 + 0.5).product::<f64>()
    } else {
        ln_gamma_half(k).exp()
    }
}

/// Surface measure of the unit sphere `S^n` in `R^(n+1)`:
/// `2 pi^((n+1)/2) / Gamma((n+1)/2)`.
pub fn unit_sphere_volume(n: u32) -> f64 {
    2.0 * PI.powf((n as f64 + 1.0) / 2.0) / gamma_half(n + 1)
}
