use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{PresetName, ProblemPreset};
use crate::dynamics::simulate;
use crate::error::{Error, Result};
use crate::error_analysis::modelling_error;
use crate::kernel::Kernel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceOptions {
    /// Total errors must exceed `plateau_factor × plateau` to enter the
    /// pre-plateau fit.
    pub plateau_factor: f64,
    /// Largest relative error treated as resolved. Above it the large-step
    /// runs are still pre-asymptotic and the local order wanders.
    pub resolved_ceiling: f64,
    /// Smallest relative error above accumulated rounding.
    pub roundoff_floor: f64,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        ConvergenceOptions {
            plateau_factor: 3.0,
            resolved_ceiling: 1e-4,
            roundoff_floor: 1e-11,
        }
    }
}

/// Hamiltonian error against `dt` for one kernel.
///
/// Two fits are kept. `fitted_order` uses the total error
/// `|H(t) - H_exact(0)|` in its pre-plateau window and is `None` when that
/// window holds fewer than three resolved points, which happens for low
/// orders whose plateau sits above the asymptotic regime. `drift_order` uses
/// the time-stepping part `|H(t) - H_reg(0)|`, which never plateaus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub preset: PresetName,
    pub kernel: Kernel,
    pub t_end: f64,
    pub dt_values: Vec<f64>,
    /// `max_t |H(t) - H_exact(0)| / |H_exact(0)|`; `None` where the run blew up.
    pub max_h_error: Vec<Option<f64>>,
    /// `max_t |H(t) - H_reg(0)| / |H_exact(0)|`; `None` where the run blew up.
    pub max_drift: Vec<Option<f64>>,
    /// Relative modelling error of the initial state (0 for the singular kernel).
    pub plateau: f64,
    pub fitted_order: Option<f64>,
    pub fit_indices: Vec<usize>,
    pub drift_order: Option<f64>,
    pub drift_indices: Vec<usize>,
}

impl ConvergenceReport {
    /// Smallest recorded total error, the empirical plateau.
    pub fn min_error(&self) -> Option<f64> {
        self.max_h_error.iter().flatten().copied().reduce(f64::min)
    }

    /// Whether the grid reaches the plateau: the modelling error is above
    /// rounding and at least ten times the drift of the finest step.
    pub fn plateau_reached(&self, options: &ConvergenceOptions) -> bool {
        let finest = self
            .dt_values
            .iter()
            .zip(&self.max_drift)
            .filter_map(|(dt, d)| d.map(|d| (*dt, d)))
            .min_by(|a, b| a.0.total_cmp(&b.0));
        match finest {
            Some((_, drift)) => {
                self.plateau >= options.roundoff_floor && drift <= 0.1 * self.plateau
            }
            None => false,
        }
    }
}

/// `2^-hi, 2^-(hi+1), …, 2^-lo`.
pub fn dyadic_dts(hi: i32, lo: i32) -> Vec<f64> {
    (hi..=lo).map(|k| 2f64.powi(-k)).collect()
}

/// Least-squares slope of `log(err)` against `log(dt)` over the points with
/// `above < err <= ceiling`. Needs at least three such points.
pub fn fit_order(
    dt: &[f64],
    err: &[Option<f64>],
    above: f64,
    ceiling: f64,
) -> Option<(f64, Vec<usize>)> {
    let idx: Vec<usize> = (0..dt.len())
        .filter(|&i| matches!(err[i], Some(e) if e.is_finite() && e > above && e <= ceiling))
        .collect();
    if idx.len() < 3 {
        return None;
    }
    let pts: Vec<(f64, f64)> = idx
        .iter()
        .map(|&i| (dt[i].ln(), err[i].unwrap().ln()))
        .collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some((sxy / sxx, idx))
}

/// Runs every `(kernel, dt)` cell on `preset` up to `t_end` and fits the
/// convergence order of each kernel.
pub fn convergence_study(
    preset: &ProblemPreset,
    kernels: &[Kernel],
    dt_values: &[f64],
    t_end: f64,
    options: ConvergenceOptions,
) -> Result<Vec<ConvergenceReport>> {
    if dt_values.len() < 4 {
        return Err(Error::invalid("dt_values", "need at least 4 time steps"));
    }
    if dt_values
        .iter()
        .any(|dt| !(dt.is_finite() && *dt > 0.0 && *dt <= t_end))
    {
        return Err(Error::invalid("dt_values", "each dt must be in (0, t_end]"));
    }
    let system = &preset.system;
    let cells: Vec<(usize, usize)> = (0..kernels.len())
        .flat_map(|k| (0..dt_values.len()).map(move |d| (k, d)))
        .collect();
    let results: Vec<(Option<f64>, Option<f64>)> = cells
        .par_iter()
        .map(
            |&(k, d)| match simulate(&kernels[k], system, dt_values[d], t_end, usize::MAX) {
                Ok(sim) => Ok((sim.trace.relative_total(), Some(sim.trace.relative_drift()))),
                Err(Error::Blowup { .. }) => Ok((None, None)),
                Err(e) => Err(e),
            },
        )
        .collect::<Result<_>>()?;

    let m = dt_values.len();
    kernels
        .iter()
        .enumerate()
        .map(|(k, kernel)| {
            let cells = &results[k * m..(k + 1) * m];
            let totals: Vec<Option<f64>> = cells.iter().map(|c| c.0).collect();
            let drifts: Vec<Option<f64>> = cells.iter().map(|c| c.1).collect();
            let plateau = match kernel {
                Kernel::Regularized(spec) => modelling_error(spec, system)?,
                Kernel::Singular { .. } => 0.0,
            };
            let above = (options.plateau_factor * plateau).max(options.roundoff_floor);
            let fit = fit_order(dt_values, &totals, above, options.resolved_ceiling);
            let drift_fit = fit_order(
                dt_values,
                &drifts,
                options.roundoff_floor,
                options.resolved_ceiling,
            );
            Ok(ConvergenceReport {
                preset: preset.name,
                kernel: *kernel,
                t_end,
                dt_values: dt_values.to_vec(),
                max_h_error: totals,
                max_drift: drifts,
                plateau,
                fitted_order: fit.as_ref().map(|f| f.0),
                fit_indices: fit.map(|f| f.1).unwrap_or_default(),
                drift_order: drift_fit.as_ref().map(|f| f.0),
                drift_indices: drift_fit.map(|f| f.1).unwrap_or_default(),
            })
        })
        .collect()
}
