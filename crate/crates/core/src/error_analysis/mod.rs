//! Smoothing and modelling errors of the regularized kernels, and calibration
//! of `ε` against a target error for a given truncation order.
//!
//! * The **smoothing error** is `∫_{B(0,R)} |∇G^{ε,n} - ∇G|`, independent of
//!   any particle configuration.
//! * The **modelling error** is the offset `|H^{ε,n}(0) - H(0)|` between the
//!   regularized and exact Hamiltonians of a configuration, reported relative
//!   to `|H(0)|`.

mod hypergeometric;
mod roots;
mod tail;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use hypergeometric::hyp2f1;
pub use tail::{tail_sum, TailSumInput};

use crate::dynamics::{hamiltonian, min_pair_distance, ParticleSystem};
use crate::error::{Error, Result};
use crate::kernel::{grad_green_reg, Dimension, Kernel, KernelSpec};
use crate::quadrature::Quadrature;

/// Lower end of the `ε` search bracket.
pub const EPSILON_FLOOR: f64 = 1e-8;
/// Calibrated rows satisfy `|achieved - target| <= CALIBRATION_REL_TOL · target`.
pub const CALIBRATION_REL_TOL: f64 = 1e-6;

const SMOOTHING_ABS_TOL: f64 = 1e-10;
const SIGN_SAMPLES: usize = 1024;

/// `dσ(r) · ∂(G^{ε,n} - G)/∂r`. The shell measure times `∂G/∂r` is exactly
/// `-1` in every dimension, so the singular part never has to be formed.
fn weighted_gradient_error(spec: &KernelSpec, r: f64) -> f64 {
    spec.dim().shell_measure(r) * grad_green_reg(spec, r) + 1.0
}

fn sign_change_points(spec: &KernelSpec, radius: f64) -> Vec<f64> {
    let f = |r: f64| weighted_gradient_error(spec, r);
    let start = spec.epsilon().min(radius) * 1e-3;
    let ratio = (radius / start).powf(1.0 / (SIGN_SAMPLES - 1) as f64);
    let grid: Vec<f64> = (0..SIGN_SAMPLES)
        .map(|k| start * ratio.powi(k as i32))
        .collect();
    let mut points = Vec::new();
    for w in grid.windows(2) {
        let (fa, fb) = (f(w[0]), f(w[1]));
        // Ignore flips inside the rounding noise of the far field.
        if fa * fb < 0.0 && fa.abs().max(fb.abs()) > 1e-12 {
            let (mut a, mut b) = (w[0], w[1]);
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                if f(m) * fa > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            points.push(0.5 * (a + b));
        }
    }
    points
}

/// Global smoothing error `∫_0^R |∂G^{ε,n}/∂r - ∂G/∂r| dσ(r)` by adaptive
/// quadrature, with the interval split at every detected sign change of the
/// pointwise error.
pub fn smoothing_error(spec: &KernelSpec, radius: f64) -> Result<f64> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::invalid(
            "R",
            format!("must be finite and > 0 (got {radius})"),
        ));
    }
    let guard = weighted_gradient_error(spec, 1e-300);
    if !guard.is_finite() {
        return Err(Error::Domain(format!(
            "smoothing integrand is not finite near r = 0 ({guard})"
        )));
    }
    let eps = spec.epsilon();
    let mut points = vec![0.0, radius];
    points.extend(
        [0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0]
            .iter()
            .map(|k| k * eps)
            .filter(|&r| r < radius),
    );
    points.extend(sign_change_points(spec, radius));
    points.sort_by(f64::total_cmp);
    points.dedup();
    let estimate = Quadrature::with_abs_tol(SMOOTHING_ABS_TOL)
        .integrate_with_breakpoints(|r| weighted_gradient_error(spec, r).abs(), &points)?;
    Ok(estimate.value)
}

/// Smoothing error from the tail sums: `ε|S|` (2D, 3D) or `ε|S|/2` (1D).
///
/// Exact because the pointwise gradient error never changes sign.
pub fn smoothing_error_closed(spec: &KernelSpec, radius: f64) -> Result<f64> {
    let input = TailSumInput::from_radius(spec.dim(), spec.n(), spec.epsilon(), radius)?;
    let s = tail_sum(&input)?.abs();
    let factor = if spec.dim() == Dimension::One {
        0.5
    } else {
        1.0
    };
    Ok(factor * spec.epsilon() * s)
}

/// Normalisation used for relative Hamiltonian errors: `|H|`, or 1 when `H = 0`.
pub fn energy_scale(h: f64) -> f64 {
    if h.abs() > f64::MIN_POSITIVE {
        h.abs()
    } else {
        1.0
    }
}

/// `H^{ε,n}(0) - H(0)` for the configuration (signed, not normalised).
pub fn potential_offset(spec: &KernelSpec, system: &ParticleSystem) -> Result<f64> {
    let exact = hamiltonian(&Kernel::singular(spec.dim()), system)?;
    let regular = hamiltonian(&Kernel::Regularized(*spec), system)?;
    Ok(regular - exact)
}

/// Relative modelling error `|H^{ε,n}(0) - H(0)| / |H(0)|`.
///
/// Fails with a domain error if two particles coincide.
pub fn modelling_error(spec: &KernelSpec, system: &ParticleSystem) -> Result<f64> {
    if spec.dim() != system.dim() {
        return Err(Error::invalid("dim", "kernel and system dimensions differ"));
    }
    let exact = hamiltonian(&Kernel::singular(spec.dim()), system)?;
    let regular = hamiltonian(&Kernel::Regularized(*spec), system)?;
    Ok((regular - exact).abs() / energy_scale(exact))
}

fn check_target(target: f64) -> Result<()> {
    if target.is_finite() && target > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            "target",
            format!("must be finite and > 0 (got {target})"),
        ))
    }
}

/// `ε` such that the smoothing error over `B(0, R)` equals `target`.
pub fn solve_epsilon_smoothing(n: u32, dim: Dimension, target: f64, radius: f64) -> Result<f64> {
    check_target(target)?;
    let objective = |eps: f64| smoothing_error(&KernelSpec::new(dim, eps, n)?, radius);
    let (eps, _) = roots::bisect_log(
        objective,
        target,
        EPSILON_FLOOR,
        radius,
        CALIBRATION_REL_TOL,
    )?;
    Ok(eps)
}

/// `ε` such that the relative modelling error of `system` equals `target`.
///
/// The search runs up to the smallest pair separation of the configuration.
pub fn solve_epsilon_modelling(
    n: u32,
    dim: Dimension,
    target: f64,
    system: &ParticleSystem,
) -> Result<f64> {
    check_target(target)?;
    if dim != system.dim() {
        return Err(Error::invalid("dim", "kernel and system dimensions differ"));
    }
    let upper = min_pair_distance(system);
    if !(upper.is_finite() && upper > 0.0) {
        return Err(Error::Domain(
            "modelling calibration needs at least two distinct particles".into(),
        ));
    }
    let objective = |eps: f64| modelling_error(&KernelSpec::new(dim, eps, n)?, system);
    let (eps, _) = roots::bisect_log(objective, target, EPSILON_FLOOR, upper, CALIBRATION_REL_TOL)?;
    Ok(eps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationMode {
    Smoothing,
    Modelling,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairingRow {
    pub n: u32,
    pub epsilon: f64,
    pub achieved_error: f64,
}

/// `(n, ε)` pairings that share one smoothing or modelling error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingTable {
    pub dim: Dimension,
    pub mode: CalibrationMode,
    pub target: f64,
    pub rows: Vec<PairingRow>,
}

impl PairingTable {
    /// Calibrates one row per order against the smoothing error on `B(0, R)`.
    pub fn smoothing(dim: Dimension, orders: &[u32], target: f64, radius: f64) -> Result<Self> {
        let rows = orders
            .par_iter()
            .map(|&n| {
                let epsilon = solve_epsilon_smoothing(n, dim, target, radius)?;
                let achieved_error = smoothing_error(&KernelSpec::new(dim, epsilon, n)?, radius)?;
                Ok(PairingRow {
                    n,
                    epsilon,
                    achieved_error,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PairingTable {
            dim,
            mode: CalibrationMode::Smoothing,
            target,
            rows,
        })
    }

    /// Calibrates one row per order against the modelling error of `system`.
    pub fn modelling(
        dim: Dimension,
        orders: &[u32],
        target: f64,
        system: &ParticleSystem,
    ) -> Result<Self> {
        let rows = orders
            .par_iter()
            .map(|&n| {
                let epsilon = solve_epsilon_modelling(n, dim, target, system)?;
                let achieved_error = modelling_error(&KernelSpec::new(dim, epsilon, n)?, system)?;
                Ok(PairingRow {
                    n,
                    epsilon,
                    achieved_error,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PairingTable {
            dim,
            mode: CalibrationMode::Modelling,
            target,
            rows,
        })
    }

    pub fn epsilon_for(&self, n: u32) -> Option<f64> {
        self.rows.iter().find(|r| r.n == n).map(|r| r.epsilon)
    }

    /// `true` when `ε` strictly increases with `n` down the table.
    pub fn is_epsilon_increasing(&self) -> bool {
        let mut rows = self.rows.clone();
        rows.sort_by_key(|r| r.n);
        rows.windows(2).all(|w| w[1].epsilon > w[0].epsilon)
    }

    /// Rows whose achieved error misses the target by more than the solver tolerance.
    pub fn off_target_rows(&self) -> Vec<u32> {
        self.rows
            .iter()
            .filter(|r| (r.achieved_error - self.target).abs() > CALIBRATION_REL_TOL * self.target)
            .map(|r| r.n)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{preset, PresetName};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn spec(d: u8, eps: f64, n: u32) -> KernelSpec {
        KernelSpec::new(Dimension::new(d).unwrap(), eps, n).unwrap()
    }

    /// Plain composite Simpson on a geometric-plus-uniform grid; independent
    /// of the adaptive integrator and of the sign-change splitting.
    fn simpson_oracle(spec: &KernelSpec, radius: f64) -> f64 {
        let f = |r: f64| weighted_gradient_error(spec, r).abs();
        let cut = (50.0 * spec.epsilon()).min(radius);
        let simpson = |a: f64, b: f64, m: usize| {
            let h = (b - a) / m as f64;
            let mut s = f(a) + f(b);
            for k in 1..m {
                s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + h * k as f64);
            }
            s * h / 3.0
        };
        simpson(0.0, cut, 200_000)
            + if cut < radius {
                simpson(cut, radius, 200_000)
            } else {
                0.0
            }
    }

    #[test]
    fn smoothing_error_table_rows() {
        let e = smoothing_error(&spec(1, 1.0051e-2, 0), 1.0).unwrap();
        assert!((e - 1e-2).abs() < 1e-5, "{e}");
        let e = smoothing_error(&spec(3, 2.8378e-2, 10), 1.0).unwrap();
        assert!((e - 1e-2).abs() < 1e-5, "{e}");
    }

    #[test]
    fn smoothing_error_vanishes_with_epsilon() {
        let values: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&eps| smoothing_error(&spec(2, eps, 0), 1.0).unwrap())
            .collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
        assert!(values[2] < 1e-3);
    }

    #[test]
    fn quadrature_matches_simpson_oracle() {
        for (d, eps, n, radius) in [(1, 0.02, 3, 1.0), (2, 0.005, 0, 1.0), (3, 0.1, 6, 0.7)] {
            let s = spec(d, eps, n);
            let q = smoothing_error(&s, radius).unwrap();
            assert_relative_eq!(q, simpson_oracle(&s, radius), max_relative = 1e-8);
        }
    }

    #[test]
    fn solver_reproduces_calibrated_values() {
        let cases = [(0, 1, 1.0051e-2), (4, 2, 2.3283e-2), (1, 3, 1.0001e-2)];
        for (n, d, expected) in cases {
            let eps = solve_epsilon_smoothing(n, Dimension::new(d).unwrap(), 1e-2, 1.0).unwrap();
            assert!(
                ((eps - expected) / expected).abs() < 1e-4,
                "n={n} d={d}: {eps}"
            );
        }
    }

    #[test]
    fn unreachable_target_is_a_calibration_error() {
        let err = solve_epsilon_smoothing(0, Dimension::Three, 50.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::Calibration(_)));
    }

    #[test]
    fn modelling_error_examples() {
        let osc1d = preset(PresetName::Osc1d).system;
        let m = modelling_error(&spec(1, 2.0001e-2, 1), &osc1d).unwrap();
        assert!(((m - 4.89e-6) / 4.89e-6).abs() < 0.05, "{m}");

        let far = ParticleSystem::with_charges(
            Dimension::Three,
            vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]],
            vec![vec![0.0; 3], vec![0.0; 3]],
            &[1.0, -1.0],
            crate::dynamics::ForceSign::Repulsive,
        )
        .unwrap();
        assert!(modelling_error(&spec(3, 1e-6, 10), &far).unwrap() < 1e-12);

        let osc = ParticleSystem::with_charges(
            Dimension::Three,
            vec![vec![-0.125, 0.0, 0.0], vec![0.125, 0.0, 0.0]],
            vec![vec![0.0; 3], vec![0.0; 3]],
            &[1.0, -1.0],
            crate::dynamics::ForceSign::Repulsive,
        )
        .unwrap();
        let low = modelling_error(&spec(3, 0.05, 0), &osc).unwrap();
        let high = modelling_error(&spec(3, 0.05, 4), &osc).unwrap();
        assert!(high < low);
    }

    #[test]
    fn coincident_particles_are_rejected() {
        let sys = ParticleSystem::with_charges(
            Dimension::Two,
            vec![vec![0.1, 0.2], vec![0.1, 0.2]],
            vec![vec![0.0; 2], vec![0.0; 2]],
            &[1.0, -1.0],
            crate::dynamics::ForceSign::Repulsive,
        )
        .unwrap();
        assert!(matches!(
            modelling_error(&spec(2, 0.1, 1), &sys),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn modelling_solver_examples() {
        let cases = [
            (0, PresetName::Osc1d, 7.9753e-4),
            (10, PresetName::Osc3d, 1.5639e-1),
            (2, PresetName::Osc2d, 8.3471e-2),
        ];
        for (n, name, expected) in cases {
            let sys = preset(name).system;
            let eps = solve_epsilon_modelling(n, sys.dim(), 4.89e-6, &sys).unwrap();
            assert!(
                ((eps - expected) / expected).abs() < 1e-3,
                "{name:?} n={n}: {eps}"
            );
        }
    }

    #[test]
    fn tables_are_ordered_and_on_target() {
        let t = PairingTable::smoothing(Dimension::Two, &[0, 1, 2], 1e-2, 1.0).unwrap();
        assert!(t.is_epsilon_increasing());
        assert!(t.off_target_rows().is_empty());
        assert_eq!(
            t.rows.iter().map(|r| r.n).collect::<Vec<_>>(),
            vec![0, 1, 2]
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn one_d_tail_sum_bounds_quadrature(n in 0u32..=10, eps in 1e-3f64..0.3, radius in 0.2f64..2.0) {
            let s = spec(1, eps, n);
            let q = smoothing_error(&s, radius).unwrap();
            let input = TailSumInput::from_radius(Dimension::One, n, eps, radius).unwrap();
            let bound = eps * tail_sum(&input).unwrap().abs();
            prop_assert!(q <= bound);
            // sign-definite integrand: the bound is attained up to the factor 2
            prop_assert!((q - 0.5 * bound).abs() <= 1e-9, "{q} vs {}", 0.5 * bound);
        }

        #[test]
        fn closed_form_matches_quadrature(d in 1u8..=3, n in 0u32..=10, eps in 1e-3f64..0.3, radius in 0.2f64..2.0) {
            let s = spec(d, eps, n);
            let q = smoothing_error(&s, radius).unwrap();
            let c = smoothing_error_closed(&s, radius).unwrap();
            prop_assert!((q - c).abs() <= 1e-9, "{q} vs {c}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn smoothing_error_increases_with_epsilon(d in 1u8..=3, n in 0u32..=10) {
            let grid: Vec<f64> = (0..25).map(|k| 1e-4 * 10f64.powf(k as f64 / 8.0)).collect();
            let values: Vec<f64> = grid.iter().map(|&e| smoothing_error(&spec(d, e, n), 1.0).unwrap()).collect();
            prop_assert!(values.windows(2).all(|w| w[1] > w[0]), "{values:?}");
        }

        #[test]
        fn solver_round_trip(d in 1u8..=3, n in 0u32..=10, log_t in -4.0f64..-1.5) {
            let dim = Dimension::new(d).unwrap();
            let target = 10f64.powf(log_t);
            let eps = solve_epsilon_smoothing(n, dim, target, 1.0).unwrap();
            let achieved = smoothing_error(&spec(d, eps, n), 1.0).unwrap();
            prop_assert!((achieved - target).abs() <= 1e-6 * target);
        }

        #[test]
        fn modelling_round_trip(which in 0usize..3, n in 0u32..=10, depth in 0.3f64..4.0) {
            let name = [PresetName::Osc1d, PresetName::Osc2d, PresetName::Osc3d][which];
            let sys = preset(name).system;
            let dim = sys.dim();
            // ε is bracketed by the pair separation, which caps the reachable error
            let cap = modelling_error(&KernelSpec::new(dim, min_pair_distance(&sys), n).unwrap(), &sys).unwrap();
            let target = cap * 10f64.powf(-depth);
            let eps = solve_epsilon_modelling(n, dim, target, &sys).unwrap();
            let achieved = modelling_error(&KernelSpec::new(dim, eps, n).unwrap(), &sys).unwrap();
            prop_assert!((achieved - target).abs() <= 1e-6 * target);
            prop_assert!(matches!(
                solve_epsilon_modelling(n, dim, 2.0 * cap, &sys),
                Err(Error::Calibration(_))
            ));
        }
    }
}
