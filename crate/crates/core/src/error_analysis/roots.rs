//! Bracketed bisection in `log10` of a positive parameter.

use crate::error::{Error, Result};

pub(crate) const MAX_ITERATIONS: usize = 200;

/// Finds `x ∈ [lo, hi]` with `|f(x) - target| <= rel_tol · target`, for `f`
/// increasing in `x`. Bisection runs on `log10 x`.
pub(crate) fn bisect_log<F>(f: F, target: f64, lo: f64, hi: f64, rel_tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Calibration(format!(
            "invalid bracket [{lo:e}, {hi:e}]"
        )));
    }
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if !(f_lo <= target && target <= f_hi) {
        return Err(Error::Calibration(format!(
            "target {target:e} is not bracketed: f({lo:e}) = {f_lo:e}, f({hi:e}) = {f_hi:e}"
        )));
    }
    let tol = rel_tol * target;
    if (f_hi - target).abs() <= tol {
        return Ok((hi, f_hi));
    }
    if (f_lo - target).abs() <= tol {
        return Ok((lo, f_lo));
    }
    let (mut a, mut b) = (lo.log10(), hi.log10());
    for _ in 0..MAX_ITERATIONS {
        let mid = 0.5 * (a + b);
        let x = 10f64.powf(mid);
        let value = f(x)?;
        if (value - target).abs() <= tol {
            return Ok((x, value));
        }
        if value < target {
            a = mid;
        } else {
            b = mid;
        }
        if b - a <= f64::EPSILON * mid.abs().max(1.0) {
            return Err(Error::Calibration(format!(
                "bracket collapsed at x = {x:e} with f = {value:e} (target {target:e}); objective not resolvable to {rel_tol:e}"
            )));
        }
    }
    Err(Error::Calibration(format!(
        "no convergence after {MAX_ITERATIONS} bisection steps"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_square_root() {
        let (x, fx) = bisect_log(|x| Ok(x * x), 2.0, 1e-3, 10.0, 1e-12).unwrap();
        assert!((x - 2f64.sqrt()).abs() < 1e-11);
        assert!((fx - 2.0).abs() <= 2e-12);
    }

    #[test]
    fn unbracketed_target_is_reported() {
        let err = bisect_log(Ok, 20.0, 1e-3, 10.0, 1e-6).unwrap_err();
        assert!(matches!(err, Error::Calibration(_)));
    }
}
