//! Gamma-function ratios at half-integer arguments.
//!
//! All ratios are built from `Γ(1/2) = √π` with the recurrence `Γ(z+1) = zΓ(z)`
//! so that the half-integer values stay exact to rounding.

use std::f64::consts::PI;

/// `Γ(n + 1/2) / Γ(n + 1)`.
pub fn gamma_half_ratio(n: u32) -> f64 {
    let mut ratio = PI.sqrt();
    for k in 0..n {
        let k = f64::from(k);
        ratio *= (k + 0.5) / (k + 1.0);
    }
    ratio
}

/// `Γ(n + 3/2) / Γ(n + 1)`.
pub fn gamma_three_halves_ratio(n: u32) -> f64 {
    (f64::from(n) + 0.5) * gamma_half_ratio(n)
}

/// `Γ(n + 5/2) / Γ(n + 1)`.
pub fn gamma_five_halves_ratio(n: u32) -> f64 {
    (f64::from(n) + 1.5) * gamma_three_halves_ratio(n)
}
