//! The free-space Laplace kernel and its truncated-series regularizations.
//!
//! With `s = r² + ε²`, the order-`n` kernels are the first `n + 1` terms of the
//! binomial (1D, 3D) or logarithmic (2D) expansion of `G` about `s`:
//!
//! ```text
//! 1D: G^{ε,n}(r) = -1/2 Σ_{i=0}^{n} C(1/2, i) (-ε²)^i s^{1/2-i}
//! 2D: G^{ε,n}(r) = -ln(s)/(4π) + 1/(4π) Σ_{i=1}^{n} ε^{2i} s^{-i} / i
//! 3D: G^{ε,n}(r) = 1/(4π) Σ_{i=0}^{n} C(-1/2, i) (-ε²)^i s^{-1/2-i}
//! ```
//!
//! `n = 0` is the classical algebraic (Plummer-type) softening.
//!
//! Series are evaluated in terms of `q = ε²/s ∈ (0, 1]` so that no power of `ε`
//! or `s` is formed separately. The generalized binomial coefficient is built by
//! an iterative product; it stays accurate for the orders used here (`n ≲ 30`),
//! beyond which cancellation in the alternating 1D series starts to cost digits.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::quadrature::Quadrature;
use crate::special::{gamma_five_halves_ratio, gamma_three_halves_ratio};

/// Spatial dimension of the kernel (1, 2 or 3).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Dimension {
    One,
    Two,
    Three,
}

impl Dimension {
    pub const ALL: [Dimension; 3] = [Dimension::One, Dimension::Two, Dimension::Three];

    pub fn new(value: u8) -> Result<Self> {
        match value {
            1 => Ok(Dimension::One),
            2 => Ok(Dimension::Two),
            3 => Ok(Dimension::Three),
            other => Err(Error::invalid(
                "dim",
                format!("dimension must be 1, 2 or 3 (got {other})"),
            )),
        }
    }

    pub fn value(self) -> usize {
        match self {
            Dimension::One => 1,
            Dimension::Two => 2,
            Dimension::Three => 3,
        }
    }

    /// Surface measure of the sphere of radius `r`: 2, 2πr, 4πr².
    pub fn shell_measure(self, r: f64) -> f64 {
        match self {
            Dimension::One => 2.0,
            Dimension::Two => 2.0 * PI * r,
            Dimension::Three => 4.0 * PI * r * r,
        }
    }
}

impl TryFrom<u8> for Dimension {
    type Error = Error;
    fn try_from(value: u8) -> Result<Self> {
        Dimension::new(value)
    }
}

impl From<Dimension> for u8 {
    fn from(dim: Dimension) -> u8 {
        dim.value() as u8
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// One member `G^{ε,n}` of the regularized family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    dim: Dimension,
    epsilon: f64,
    n: u32,
}

impl KernelSpec {
    pub fn new(dim: Dimension, epsilon: f64, n: u32) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::invalid(
                "epsilon",
                format!("must be finite and > 0 (got {epsilon})"),
            ));
        }
        Ok(KernelSpec { dim, epsilon, n })
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        KernelSpec::new(self.dim, epsilon, self.n)
    }
}

/// Interaction kernel used by the dynamics: either the singular `G` or a
/// regularized member of the family.
///
/// The singular kernel is its own variant rather than `ε = 0`, since the
/// series are written in `a = r/ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    Singular { dim: Dimension },
    Regularized(KernelSpec),
}

impl Kernel {
    pub fn singular(dim: Dimension) -> Self {
        Kernel::Singular { dim }
    }

    pub fn regularized(dim: Dimension, epsilon: f64, n: u32) -> Result<Self> {
        Ok(Kernel::Regularized(KernelSpec::new(dim, epsilon, n)?))
    }

    pub fn dim(&self) -> Dimension {
        match self {
            Kernel::Singular { dim } => *dim,
            Kernel::Regularized(spec) => spec.dim(),
        }
    }

    pub fn is_regularized(&self) -> bool {
        matches!(self, Kernel::Regularized(_))
    }

    pub fn potential(&self, r: f64) -> Result<f64> {
        match self {
            Kernel::Singular { dim } => green(*dim, r),
            Kernel::Regularized(spec) => Ok(green_reg(spec, r)),
        }
    }

    pub fn radial_derivative(&self, r: f64) -> Result<f64> {
        match self {
            Kernel::Singular { dim } => grad_green(*dim, r),
            Kernel::Regularized(spec) => Ok(grad_green_reg(spec, r)),
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Singular { dim } => write!(f, "singular (dim={dim})"),
            Kernel::Regularized(s) => write!(f, "n={} eps={:e} (dim={})", s.n, s.epsilon, s.dim),
        }
    }
}

/// A sampled point of a radial profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialValue {
    pub r: f64,
    pub value: f64,
}

/// Generalized binomial coefficient `C(α, i) = α(α-1)…(α-i+1) / i!`.
pub fn choose_general(alpha: f64, i: u32) -> f64 {
    (0..i).fold(1.0, |acc, k| {
        let k = f64::from(k);
        acc * (alpha - k) / (k + 1.0)
    })
}

fn check_radius(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "the singular kernel requires r > 0 (got r = {r})"
        )))
    }
}

/// The unregularized kernel: `-r/2`, `-ln(r)/(2π)`, `1/(4πr)`.
pub fn green(dim: Dimension, r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(match dim {
        Dimension::One => -0.5 * r,
        Dimension::Two => -r.ln() / (2.0 * PI),
        Dimension::Three => 1.0 / (4.0 * PI * r),
    })
}

/// `∂G/∂r` of the unregularized kernel.
pub fn grad_green(dim: Dimension, r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(match dim {
        Dimension::One => -0.5,
        Dimension::Two => -1.0 / (2.0 * PI * r),
        Dimension::Three => -1.0 / (4.0 * PI * r * r),
    })
}

/// The regularized kernel `G^{ε,n}(r)`.
pub fn green_reg(spec: &KernelSpec, r: f64) -> f64 {
    let eps2 = spec.epsilon * spec.epsilon;
    let s = r * r + eps2;
    let q = eps2 / s;
    match spec.dim {
        Dimension::One => {
            // Σ C(1/2, i) (-q)^i
            let mut coeff = 1.0;
            let mut qi = 1.0;
            let mut sum = 1.0;
            for i in 1..=spec.n {
                let k = f64::from(i - 1);
                coeff *= -(0.5 - k) / (k + 1.0);
                qi *= q;
                sum += coeff * qi;
            }
            -0.5 * s.sqrt() * sum
        }
        Dimension::Two => {
            let mut qi = 1.0;
            let mut sum = 0.0;
            for i in 1..=spec.n {
                qi *= q;
                sum += qi / f64::from(i);
            }
            (sum - s.ln()) / (4.0 * PI)
        }
        Dimension::Three => {
            // Σ C(-1/2, i) (-q)^i
            let mut coeff = 1.0;
            let mut qi = 1.0;
            let mut sum = 1.0;
            for i in 1..=spec.n {
                let k = f64::from(i - 1);
                coeff *= -(-0.5 - k) / (k + 1.0);
                qi *= q;
                sum += coeff * qi;
            }
            sum / (4.0 * PI * s.sqrt())
        }
    }
}

/// Radial derivative `∂G^{ε,n}/∂r`. Zero at `r = 0` (no self-force).
pub fn grad_green_reg(spec: &KernelSpec, r: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let eps2 = spec.epsilon * spec.epsilon;
    let s = r * r + eps2;
    let q = eps2 / s;
    match spec.dim {
        Dimension::One => {
            // -r/√s Σ C(1/2, i)(-1)^i (1/2 - i) q^i
            let mut coeff = 1.0;
            let mut qi = 1.0;
            let mut sum = 0.5;
            for i in 1..=spec.n {
                let k = f64::from(i - 1);
                coeff *= -(0.5 - k) / (k + 1.0);
                qi *= q;
                sum += coeff * (0.5 - f64::from(i)) * qi;
            }
            -r / s.sqrt() * sum
        }
        Dimension::Two => {
            let mut qi = 1.0;
            let mut sum = 1.0;
            for _ in 1..=spec.n {
                qi *= q;
                sum += qi;
            }
            -r / (2.0 * PI * s) * sum
        }
        Dimension::Three => {
            // -r/(2π s^{3/2}) Σ C(-1/2, i)(-1)^i (1/2 + i) q^i
            let mut coeff = 1.0;
            let mut qi = 1.0;
            let mut sum = 0.5;
            for i in 1..=spec.n {
                let k = f64::from(i - 1);
                coeff *= -(-0.5 - k) / (k + 1.0);
                qi *= q;
                sum += coeff * (0.5 + f64::from(i)) * qi;
            }
            -r / (2.0 * PI * s * s.sqrt()) * sum
        }
    }
}

/// Closed form of `ΔG^{ε,n}(r)`; with `w = 1/(1 + (r/ε)²)`:
///
/// ```text
/// 1D: -w^{n+3/2} Γ(n+3/2) / (ε √π Γ(n+1))
/// 2D: -(n+1) w^{n+2} / (π ε²)
/// 3D: -w^{n+5/2} Γ(n+5/2) / (ε³ π √π Γ(n+1))
/// ```
pub fn laplacian_reg_closed(spec: &KernelSpec, r: f64) -> f64 {
    let eps = spec.epsilon;
    let a = r / eps;
    let w = 1.0 / (1.0 + a * a);
    let n = spec.n as i32;
    let sqrt_pi = PI.sqrt();
    match spec.dim {
        Dimension::One => {
            -w.powi(n + 1) * w.sqrt() * gamma_three_halves_ratio(spec.n) / (eps * sqrt_pi)
        }
        Dimension::Two => -(f64::from(spec.n) + 1.0) * w.powi(n + 2) / (PI * eps * eps),
        Dimension::Three => {
            -w.powi(n + 2) * w.sqrt() * gamma_five_halves_ratio(spec.n)
                / (eps * eps * eps * PI * sqrt_pi)
        }
    }
}

/// Term-by-term `ΔG^{ε,n}(r)`, summed directly from the series definition.
///
/// Mathematically identical to [`laplacian_reg_closed`]; kept as an independent
/// check of it. Away from the core the terms cancel down to `q^{n+1}` of the
/// leading one, so the sum is cleared of denominators,
///
/// ```text
/// ΔG = −Σ_i k_i ε^{2i} s^{n−i} (a_i r² + b_i ε²) / (c s^{n+p})
/// ```
///
/// with exact dyadic `k_i`, and accumulated in double-double. Only the final
/// division happens in plain `f64`.
pub fn laplacian_reg_series(spec: &KernelSpec, r: f64) -> f64 {
    let n = spec.n;
    let eps2 = TwoFloat::new_mul(spec.epsilon, spec.epsilon);
    let r2 = TwoFloat::new_mul(r, r);
    let s = r2 + eps2;
    let mut s_pow = vec![TwoFloat::from(1.0); n as usize + 1];
    for i in 1..s_pow.len() {
        s_pow[i] = s_pow[i - 1] * s;
    }
    let mut eps_pow = TwoFloat::from(1.0);
    // binom(2i, i) / 4^i, exact in f64 for the orders used here
    let mut central = 1.0;
    let mut sum = TwoFloat::from(0.0);
    for i in 0..=n {
        let fi = f64::from(i);
        if i > 0 {
            eps_pow *= eps2;
            central *= (2.0 * fi - 1.0) / (2.0 * fi);
        }
        // (−1)^i C(α, i) (1/2 ∓ i) with the (−1)^i of (−q)^i folded in
        let term = match spec.dim {
            Dimension::One => (r2 * (-2.0 * fi) + eps2) * (0.5 * central),
            Dimension::Two => r2 * -fi + eps2,
            Dimension::Three => {
                (r2 * (-2.0 * fi) + eps2 * 3.0) * (0.5 * (2.0 * fi + 1.0) * central)
            }
        };
        sum += term * eps_pow * s_pow[(n - i) as usize];
    }
    let s = f64::from(s);
    let s_n = s.powi(n as i32);
    let denominator = match spec.dim {
        Dimension::One => s_n * s * s.sqrt(),
        Dimension::Two => s_n * s * s * PI,
        Dimension::Three => s_n * s * s * s.sqrt() * (2.0 * PI),
    };
    -f64::from(sum) / denominator
}

/// `∫_0^{r_max} ΔG^{ε,n}(r) dσ(r)` with the shell measure of the dimension.
///
/// Tends to −1 as `r_max/ε → ∞`; `r_max = f64::INFINITY` integrates the whole
/// space. The integral is taken in `u = r/ε`, where the integrand no longer
/// depends on `ε`.
pub fn laplacian_mass(spec: &KernelSpec, r_max: f64) -> Result<f64> {
    if r_max.is_nan() || r_max <= 0.0 {
        return Err(Error::invalid(
            "r_max",
            format!("must be > 0 (got {r_max})"),
        ));
    }
    let eps = spec.epsilon;
    let dim = spec.dim;
    let integrand = move |u: f64| {
        let r = eps * u;
        laplacian_reg_closed(spec, r) * dim.shell_measure(r) * eps
    };
    let quad = Quadrature::with_abs_tol(1e-10);
    let decades = [1.0, 10.0, 100.0, 1e3, 1e4, 1e5, 1e6];
    let estimate = if r_max.is_infinite() {
        quad.integrate_to_infinity(integrand, 0.0, &decades)?
    } else {
        let u_max = r_max / eps;
        let mut points = vec![0.0];
        points.extend(decades.iter().copied().filter(|&u| u < u_max));
        points.push(u_max);
        quad.integrate_with_breakpoints(integrand, &points)?
    };
    Ok(estimate.value)
}

/// Samples `f` at `count` evenly spaced radii on `[0, r_max]`.
pub fn sample_profile<F: Fn(f64) -> f64>(f: F, r_max: f64, count: usize) -> Vec<RadialValue> {
    let count = count.max(2);
    (0..count)
        .map(|k| {
            let r = r_max * k as f64 / (count - 1) as f64;
            RadialValue { r, value: f(r) }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn spec(d: u8, eps: f64, n: u32) -> KernelSpec {
        KernelSpec::new(Dimension::new(d).unwrap(), eps, n).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Dimension::new(0).is_err());
        assert!(Dimension::new(4).is_err());
        assert!(KernelSpec::new(Dimension::One, 0.0, 1).is_err());
        assert!(KernelSpec::new(Dimension::One, -1.0, 1).is_err());
        assert!(KernelSpec::new(Dimension::One, f64::NAN, 1).is_err());
    }

    #[test]
    fn singular_kernel_values() {
        assert_eq!(green(Dimension::One, 2.0).unwrap(), -1.0);
        assert_eq!(green(Dimension::Two, 1.0).unwrap(), 0.0);
        assert_relative_eq!(
            green(Dimension::Three, 1.0).unwrap(),
            7.957_747_154_594_767e-2
        );
        assert!(matches!(green(Dimension::Two, 0.0), Err(Error::Domain(_))));
        assert!(matches!(
            grad_green(Dimension::Three, -1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn choose_by_hand() {
        assert_eq!(choose_general(0.5, 0), 1.0);
        assert_eq!(choose_general(0.5, 1), 0.5);
        assert_eq!(choose_general(-0.5, 2), 0.375);
        assert_eq!(choose_general(5.0, 2), 10.0);
        assert_eq!(choose_general(2.0, 3), 0.0);
    }

    #[test]
    fn regularized_at_origin() {
        assert_relative_eq!(
            green_reg(&spec(2, 0.5, 0), 0.0),
            -(0.5f64).ln() / (2.0 * PI),
            max_relative = 1e-14
        );
        assert_eq!(green_reg(&spec(1, 1.0, 0), 0.0), -0.5);
    }

    #[test]
    fn high_order_approaches_singular_kernel() {
        let g = green_reg(&spec(3, 1e-3, 10), 0.5);
        let exact = green(Dimension::Three, 0.5).unwrap();
        assert!((g - exact).abs() < 1e-12, "{g} vs {exact}");
    }

    #[test]
    fn gradient_examples() {
        for d in 1..=3 {
            for n in [0, 3, 10] {
                assert_eq!(grad_green_reg(&spec(d, 0.3, n), 0.0), 0.0);
            }
        }
        assert_relative_eq!(
            grad_green_reg(&spec(2, 1.0, 0), 1.0),
            -1.0 / (4.0 * PI),
            max_relative = 1e-15
        );
        let s = spec(3, 0.1, 3);
        let (r, h) = (0.7, 1e-6);
        let fd = (green_reg(&s, r + h) - green_reg(&s, r - h)) / (2.0 * h);
        assert_relative_eq!(grad_green_reg(&s, r), fd, max_relative = 1e-6);
    }

    #[test]
    fn laplacian_examples() {
        assert_relative_eq!(laplacian_reg_closed(&spec(2, 1.0, 0), 0.0), -1.0 / PI);
        for n in [0, 3, 7] {
            let eps: f64 = 0.4;
            assert_relative_eq!(
                laplacian_reg_closed(&spec(2, eps, n), 0.0),
                -(f64::from(n) + 1.0) / (PI * eps * eps),
                max_relative = 1e-15
            );
        }
        assert_relative_eq!(
            laplacian_reg_closed(&spec(1, 1.0, 0), 0.0),
            -0.5,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            laplacian_reg_series(&spec(1, 1.0, 0), 0.0),
            -0.5,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            laplacian_reg_series(&spec(2, 1.0, 1), 1.0),
            -1.0 / (4.0 * PI),
            max_relative = 1e-15
        );
        let s = spec(3, 0.2, 5);
        assert_relative_eq!(
            laplacian_reg_closed(&s, 0.3),
            laplacian_reg_series(&s, 0.3),
            max_relative = 1e-12
        );
        let s = spec(3, 0.5, 10);
        assert_relative_eq!(
            laplacian_reg_closed(&s, 2.0),
            laplacian_reg_series(&s, 2.0),
            max_relative = 1e-12
        );
    }

    #[test]
    fn laplacian_is_negative_and_peaks_at_origin() {
        for d in 1..=3 {
            for n in [0, 2, 9] {
                let s = spec(d, 0.05, n);
                let at0 = laplacian_reg_closed(&s, 0.0);
                let mut prev = at0;
                for k in 1..200 {
                    let v = laplacian_reg_closed(&s, 0.01 * f64::from(k));
                    assert!(v < 0.0 && v.abs() <= at0.abs() && v >= prev);
                    prev = v;
                }
            }
        }
    }

    #[test]
    fn mass_examples() {
        for (d, n) in [(1, 0), (2, 4), (3, 10)] {
            let m = laplacian_mass(&spec(d, 1e-2, n), 10.0).unwrap();
            assert!((m + 1.0).abs() < 1e-6, "dim {d} n {n}: {m}");
        }
        assert!(laplacian_mass(&spec(1, 1e-2, 0), 0.0).is_err());
    }

    #[test]
    fn truncated_mass_matches_analytic_n0() {
        // n = 0 masses up to radius U·ε: U/√(1+U²), U²/(1+U²), U³/(1+U²)^{3/2}.
        let u: f64 = 37.0;
        let eps = 0.02;
        let expected = [
            u / (1.0 + u * u).sqrt(),
            u * u / (1.0 + u * u),
            u.powi(3) / (1.0 + u * u).powf(1.5),
        ];
        for (d, e) in (1..=3).zip(expected) {
            let m = laplacian_mass(&spec(d, eps, 0), u * eps).unwrap();
            assert!((m + e).abs() < 1e-9, "dim {d}: {m} vs {}", -e);
        }
    }

    fn arb_spec() -> impl Strategy<Value = KernelSpec> {
        (1u8..=3, -4.0f64..0.0, 0u32..=12).prop_map(|(d, le, n)| spec(d, 10f64.powf(le), n))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn closed_and_series_laplacian_agree(s in arb_spec(), r in 0.0f64..10.0) {
            let closed = laplacian_reg_closed(&s, r);
            let series = laplacian_reg_series(&s, r);
            prop_assert!((closed - series).abs() <= 1e-11 * closed.abs().max(1.0),
                "{s:?} r={r}: {closed} vs {series}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn gradient_matches_finite_difference(s in arb_spec(), r in 1e-3f64..10.0) {
            let h = 1e-6 * r.max(1.0);
            prop_assume!(r > 10.0 * h);
            let fd = (green_reg(&s, r + h) - green_reg(&s, r - h)) / (2.0 * h);
            let g = grad_green_reg(&s, r);
            // Rounding floor of the difference quotient: |G|·u/h.
            let floor = 4.0 * f64::EPSILON * green_reg(&s, r).abs() / h;
            prop_assert!((g - fd).abs() <= 1e-6 * g.abs() + floor,
                "{s:?} r={r}: {g} vs {fd}");
        }

        #[test]
        fn zero_order_reduces_to_algebraic_softening(d in 1u8..=3, eps in 1e-4f64..1.0, r in 0.0f64..10.0) {
            let s = spec(d, eps, 0);
            let root = (r * r + eps * eps).sqrt();
            let expected = match d {
                1 => -0.5 * root,
                2 => -root.ln() / (2.0 * PI),
                _ => 1.0 / (4.0 * PI * root),
            };
            let g = green_reg(&s, r);
            // the log passes through zero at r² + ε² = 1; compare on the 1/(4π) scale there
            let scale = if d == 2 { expected.abs().max(0.25 / PI) } else { expected.abs() };
            prop_assert!((g - expected).abs() <= 4.0 * f64::EPSILON * scale);
        }

        #[test]
        fn pointwise_error_decreases_with_order(d in 1u8..=3, eps in 1e-2f64..0.5, ratio in 1.5f64..20.0) {
            let r = eps * ratio;
            let exact = green(Dimension::new(d).unwrap(), r).unwrap();
            let errs: Vec<f64> = (0..=12).map(|n| (green_reg(&spec(d, eps, n), r) - exact).abs()).collect();
            // Strictly decreasing until the error hits the rounding floor of G.
            let floor = 64.0 * f64::EPSILON * exact.abs().max(1.0);
            for w in errs.windows(2) {
                if w[0] > floor {
                    prop_assert!(w[1] < w[0], "{errs:?}");
                }
            }
        }
    }
}
