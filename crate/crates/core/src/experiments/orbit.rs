use serde::{Deserialize, Serialize};

use super::{preset, PresetName, FIVE_BODY_PERIOD};
use crate::dynamics::{distance, simulate_with_trajectory, Simulation, Vector};
use crate::error::{Error, Result};
use crate::error_analysis::modelling_error;
use crate::kernel::{Dimension, Kernel, KernelSpec};

/// Period-error bound used by the largest-step search.
pub const PERIOD_TOLERANCE: f64 = 1e-2;

/// One-period errors of the five-body orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitMetrics {
    pub n: u32,
    pub epsilon: f64,
    pub dt_requested: f64,
    /// Step actually used, `T / round(T / dt_requested)`.
    pub dt: f64,
    pub steps: usize,
    /// `|x_1(T) - x_1(0)| / |x_1(0)|` for the tracked (first) particle.
    pub period_error: f64,
    /// Same ratio over the whole configuration.
    pub configuration_error: f64,
    /// `max_t |H_reg(t) - H_exact(0)| / |H_exact(0)|`.
    pub hamiltonian_error: f64,
    /// `|H_reg(0) - H_exact(0)| / |H_exact(0)|`.
    pub modelling_error: f64,
}

fn norm(v: &Vector) -> f64 {
    distance(v, &[0.0; 3])
}

fn run_period(spec: &KernelSpec, dt: f64, record_every: usize) -> Result<(Simulation, f64)> {
    if spec.dim() != Dimension::Three {
        return Err(Error::invalid(
            "dim",
            "the five-body orbit is three-dimensional",
        ));
    }
    if !(dt.is_finite() && dt > 0.0 && dt <= FIVE_BODY_PERIOD) {
        return Err(Error::invalid(
            "dt",
            format!("must be in (0, T] (got {dt})"),
        ));
    }
    let steps = (FIVE_BODY_PERIOD / dt).round().max(1.0);
    let dt = FIVE_BODY_PERIOD / steps;
    let system = preset(PresetName::FiveBody).system;
    let sim = simulate_with_trajectory(
        &Kernel::Regularized(*spec),
        &system,
        dt,
        FIVE_BODY_PERIOD,
        record_every,
    )?;
    Ok((sim, dt))
}

/// Integrates the five-body orbit over one period with the regularized kernel.
pub fn orbit_metrics(spec: &KernelSpec, dt: f64) -> Result<OrbitMetrics> {
    let (sim, dt_used) = run_period(spec, dt, usize::MAX)?;
    let x0 = preset(PresetName::FiveBody).system;
    let x0 = x0.positions();
    let xt = sim.final_state.positions();
    let period_error = distance(&xt[0], &x0[0]) / norm(&x0[0]);
    let num: f64 = xt.iter().zip(x0).map(|(a, b)| distance(a, b).powi(2)).sum();
    let den: f64 = x0.iter().map(|a| norm(a).powi(2)).sum();
    let trace = &sim.trace;
    let hamiltonian_error = trace
        .relative_total()
        .ok_or_else(|| Error::Domain("initial state has coincident particles".into()))?;
    Ok(OrbitMetrics {
        n: spec.n(),
        epsilon: spec.epsilon(),
        dt_requested: dt,
        dt: dt_used,
        steps: trace.steps,
        period_error,
        configuration_error: (num / den).sqrt(),
        hamiltonian_error,
        modelling_error: modelling_error(spec, &preset(PresetName::FiveBody).system)?,
    })
}

/// Positions of the five-body run at every step (for plotting).
pub fn orbit_trajectory(spec: &KernelSpec, dt: f64) -> Result<Vec<(f64, Vec<Vector>)>> {
    let (sim, _) = run_period(spec, dt, 1)?;
    Ok(sim
        .trajectory
        .into_iter()
        .map(|s| (s.t, s.positions))
        .collect())
}

/// Ascending geometric scan for the largest step with
/// `period_error <= PERIOD_TOLERANCE`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtScan {
    pub n: u32,
    pub epsilon: f64,
    pub ratio: f64,
    /// `(dt_requested, period_error)` for every evaluated step.
    pub evaluated: Vec<(f64, f64)>,
    /// Largest evaluated step before the first failure.
    pub largest_passing: Option<f64>,
    pub first_failing: Option<f64>,
}

/// Scans `dt = start · ratio^k` upward and stops at the first step whose
/// period error exceeds the tolerance (or at `stop`).
pub fn max_stable_dt(spec: &KernelSpec, start: f64, ratio: f64, stop: f64) -> Result<DtScan> {
    if !(ratio > 1.0 && ratio.is_finite()) {
        return Err(Error::invalid("ratio", "must be > 1"));
    }
    if !(start > 0.0 && stop > start) {
        return Err(Error::invalid("start", "need 0 < start < stop"));
    }
    let mut scan = DtScan {
        n: spec.n(),
        epsilon: spec.epsilon(),
        ratio,
        evaluated: Vec::new(),
        largest_passing: None,
        first_failing: None,
    };
    let mut dt = start;
    while dt <= stop {
        let err = match orbit_metrics(spec, dt) {
            Ok(m) => m.period_error,
            Err(Error::Blowup { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        scan.evaluated.push((dt, err));
        if err <= PERIOD_TOLERANCE {
            scan.largest_passing = Some(dt);
        } else {
            scan.first_failing = Some(dt);
            break;
        }
        dt *= ratio;
    }
    Ok(scan)
}
