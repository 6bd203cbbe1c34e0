//! Gauss hypergeometric function on the unit disc.

use crate::error::{Error, Result};

const MAX_TERMS: usize = 1_000_000;
const REL_TOL: f64 = 1e-14;

/// `₂F₁(a, b; c; z)` by its power series `Σ (a)_k (b)_k / ((c)_k k!) z^k`,
/// with `(x)_k` the rising factorial.
///
/// Only `|z| < 1` is supported. Summation stops once a geometric bound on the
/// remaining tail falls below `1e-14` of the partial sum.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if z.is_nan() || z.abs() >= 1.0 {
        return Err(Error::Domain(format!(
            "2F1 series requires |z| < 1 (got z = {z})"
        )));
    }
    if c <= 0.0 && c.fract() == 0.0 {
        return Err(Error::Domain(format!(
            "2F1 undefined for non-positive integer c = {c}"
        )));
    }
    // Past this index no Pochhammer factor changes sign, so term ratios are monotone.
    let settled = [a, b, c].iter().fold(0.0f64, |m, &x| m.max(-x)).ceil() as usize + 1;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        let ratio = (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        term *= ratio;
        if term == 0.0 {
            return Ok(sum);
        }
        sum += term;
        if k >= settled {
            let rho = ratio.abs().max(z.abs());
            if rho < 1.0 && term.abs() * rho / (1.0 - rho) <= REL_TOL * sum.abs() {
                return Ok(sum);
            }
        }
    }
    Err(Error::SeriesDivergence {
        terms: MAX_TERMS,
        partial: sum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn brute_force(a: f64, b: f64, c: f64, z: f64, terms: usize) -> f64 {
        let mut sum = 0.0;
        for k in 0..terms {
            let mut t = 1.0;
            for j in 0..k {
                let j = j as f64;
                t *= (a + j) * (b + j) / ((c + j) * (j + 1.0)) * z;
            }
            sum += t;
        }
        sum
    }

    #[test]
    fn origin_is_one() {
        assert_eq!(hyp2f1(0.3, -2.5, 4.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn logarithm_identity() {
        let z: f64 = 0.5;
        assert_relative_eq!(
            hyp2f1(1.0, 1.0, 2.0, z).unwrap(),
            -(1.0 - z).ln() / z,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            hyp2f1(1.0, 1.0, 2.0, 0.5).unwrap(),
            2.0 * 2f64.ln(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn equal_a_and_c_reduces_to_binomial() {
        let z: f64 = -0.25;
        let expected = (1.0 - z).powf(-0.5);
        assert_relative_eq!(
            hyp2f1(1.5, 0.5, 1.5, z).unwrap(),
            expected,
            max_relative = 1e-13
        );
        // roles of a and b are symmetric
        assert_relative_eq!(
            hyp2f1(0.5, 1.5, 1.5, z).unwrap(),
            expected,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            brute_force(1.5, 0.5, 1.5, z, 200),
            expected,
            max_relative = 1e-13
        );
    }

    #[test]
    fn matches_brute_force_series() {
        for &(a, b, c, z) in &[
            (0.5, 2.5, 3.5, 0.3),
            (3.0, 1.5, 2.5, -0.6),
            (-2.5, 1.0, 0.5, 0.7),
        ] {
            assert_relative_eq!(
                hyp2f1(a, b, c, z).unwrap(),
                brute_force(a, b, c, z, 400),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn terminating_series() {
        // (1 - z)^3 = 2F1(-3, b; b; z)
        assert_relative_eq!(
            hyp2f1(-3.0, 2.0, 2.0, 0.4).unwrap(),
            0.6f64.powi(3),
            max_relative = 1e-14
        );
    }

    #[test]
    fn slow_convergence_near_one() {
        // 2F1(1/2, 1/2; 3/2; z²) = asin(z)/z
        let z: f64 = 0.999;
        assert_relative_eq!(
            hyp2f1(0.5, 0.5, 1.5, z * z).unwrap(),
            z.asin() / z,
            max_relative = 1e-12
        );
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(hyp2f1(1.0, 1.0, 2.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(hyp2f1(1.0, 1.0, 2.0, -1.5), Err(Error::Domain(_))));
        assert!(matches!(hyp2f1(1.0, 1.0, -2.0, 0.5), Err(Error::Domain(_))));
    }
}
