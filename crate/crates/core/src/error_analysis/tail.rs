//! Tail sums `S[n, z]` bounding the global smoothing error.
//!
//! With `z = ε²/(R² + ε²)`, the smoothing error on a ball of radius `R` satisfies
//! `e ≤ ε |S[n, z]|` (per unit density). The closed forms used here are:
//!
//! ```text
//! 1D: S[n] = 2(1 - √z/(1+√(1-z))) - 2 Σ_{i=1}^{n} C(1/2,i)(-1)^i (z^{i-1/2} - 1)
//! 2D: S[n] = √π Γ(n+1/2)/(2 n!) - z^{n+1/2}/(2n+1) · ₂F₁(1/2, n+1/2; n+3/2; z)
//! 3D: S[n] = (2n+3)/(2(n+1)) C(-1/2,n)(-1)^n (z^{n+1/2} - 1)
//!            + 1/2 (z^{3/2}/(1+√(1-z))² - 1 - Σ_{i=1}^{n} C(-1/2,i)(-1)^i/(i+1) (z^{i+1/2} - 1))
//! ```
//!
//! In 2D and 3D the bound is attained: `e = ε|S|`. The 1D sum carries an extra
//! factor of two, so there `e = ε|S|/2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::hypergeometric::hyp2f1;
use crate::error::{Error, Result};
use crate::kernel::{choose_general, Dimension};
use crate::special::gamma_half_ratio;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailSumInput {
    n: u32,
    z: f64,
    dim: Dimension,
}

impl TailSumInput {
    /// `z` must lie in `(0, 1]`; `z = 1` is the degenerate `R = 0` ball.
    pub fn new(dim: Dimension, n: u32, z: f64) -> Result<Self> {
        if !(z > 0.0 && z <= 1.0) {
            return Err(Error::invalid("z", format!("must lie in (0, 1] (got {z})")));
        }
        Ok(TailSumInput { n, z, dim })
    }

    pub fn from_radius(dim: Dimension, n: u32, epsilon: f64, radius: f64) -> Result<Self> {
        if !(epsilon > 0.0 && radius > 0.0) {
            return Err(Error::invalid("epsilon/radius", "both must be > 0"));
        }
        let e2 = epsilon * epsilon;
        TailSumInput::new(dim, n, e2 / (radius * radius + e2))
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }
}

pub fn tail_sum(input: &TailSumInput) -> Result<f64> {
    let TailSumInput { n, z, dim } = *input;
    let root = (1.0 - z).sqrt();
    Ok(match dim {
        Dimension::One => {
            let s0 = 2.0 * (1.0 - z.sqrt() / (1.0 + root));
            let partial: f64 = (1..=n)
                .map(|i| {
                    let sign = if i.is_multiple_of(2) { 1.0 } else { -1.0 };
                    choose_general(0.5, i) * sign * (z.powf(f64::from(i) - 0.5) - 1.0)
                })
                .sum();
            s0 - 2.0 * partial
        }
        Dimension::Two => {
            if z == 1.0 {
                return Ok(0.0);
            }
            let nf = f64::from(n);
            let full = 0.5 * PI.sqrt() * gamma_half_ratio(n);
            let outer = z.powf(nf + 0.5) / (2.0 * nf + 1.0) * hyp2f1(0.5, nf + 0.5, nf + 1.5, z)?;
            full - outer
        }
        Dimension::Three => {
            let c = |i: u32| {
                let sign = if i.is_multiple_of(2) { 1.0 } else { -1.0 };
                choose_general(-0.5, i) * sign
            };
            let nf = f64::from(n);
            let lead = (2.0 * nf + 3.0) / (2.0 * (nf + 1.0)) * c(n) * (z.powf(nf + 0.5) - 1.0);
            let t0 = z.powf(1.5) / ((1.0 + root) * (1.0 + root)) - 1.0;
            let partial: f64 = (1..=n)
                .map(|i| c(i) / (f64::from(i) + 1.0) * (z.powf(f64::from(i) + 0.5) - 1.0))
                .sum();
            lead + 0.5 * (t0 - partial)
        }
    })
}
