use serde::{Deserialize, Serialize};

use super::{accelerations, hamiltonian, min_pair_distance, ParticleSystem, Vector};
use crate::error::{Error, Result};
use crate::error_analysis::energy_scale;
use crate::kernel::Kernel;

/// θ = 1 / (2 - 2^{1/3}) of the Forest–Ruth composition.
fn theta() -> f64 {
    1.0 / (2.0 - 2f64.cbrt())
}

/// One fourth-order Forest–Ruth step (drift first):
/// drifts `θ/2, (1-θ)/2, (1-θ)/2, θ/2`, kicks `θ, 1-2θ, θ`.
///
/// The composition is symmetric, so a step with `-dt` undoes a step with `dt`
/// up to rounding.
pub fn step4(kernel: &Kernel, system: &mut ParticleSystem, dt: f64) -> Result<()> {
    if !(dt.is_finite() && dt != 0.0) {
        return Err(Error::invalid(
            "dt",
            format!("must be finite and non-zero (got {dt})"),
        ));
    }
    let th = theta();
    let drifts = [0.5 * th, 0.5 * (1.0 - th), 0.5 * (1.0 - th)];
    let kicks = [th, 1.0 - 2.0 * th, th];
    for (d, k) in drifts.iter().zip(&kicks) {
        system.drift(d * dt);
        let acc = accelerations(kernel, system)?;
        system.kick(k * dt, &acc);
    }
    system.drift(0.5 * th * dt);
    Ok(())
}

/// Hamiltonian bookkeeping of a run.
///
/// `times`/`h_reg`/`min_distance` hold the recorded samples; `max_drift` and
/// `max_total` are taken over *every* step, recorded or not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianTrace {
    pub dt: f64,
    pub steps: usize,
    pub times: Vec<f64>,
    pub h_reg: Vec<f64>,
    pub min_distance: Vec<f64>,
    pub h_reg_0: f64,
    /// Singular Hamiltonian of the initial state; `None` if two particles coincide.
    pub h_exact_0: Option<f64>,
    /// `max_t |H_reg(t) - H_reg(0)|`.
    pub max_drift: f64,
    /// `max_t |H_reg(t) - H_exact(0)|`.
    pub max_total: Option<f64>,
}

impl HamiltonianTrace {
    /// Normalisation for relative errors: `|H_exact(0)|`, else `|H_reg(0)|`.
    pub fn scale(&self) -> f64 {
        energy_scale(self.h_exact_0.unwrap_or(self.h_reg_0))
    }

    pub fn modelling_offset(&self) -> Option<f64> {
        self.h_exact_0.map(|h| (self.h_reg_0 - h).abs())
    }

    pub fn relative_drift(&self) -> f64 {
        self.max_drift / self.scale()
    }

    pub fn relative_total(&self) -> Option<f64> {
        self.max_total.map(|m| m / self.scale())
    }

    /// `max|H - H_exact(0)| ≤ max|H - H_reg(0)| + |H_reg(0) - H_exact(0)|`.
    pub fn satisfies_triangle(&self) -> bool {
        match (self.max_total, self.modelling_offset()) {
            (Some(total), Some(offset)) => {
                let bound = self.max_drift + offset;
                total <= bound + 4.0 * f64::EPSILON * bound.max(self.scale())
            }
            _ => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub positions: Vec<Vector>,
    pub velocities: Vec<Vector>,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub trace: HamiltonianTrace,
    pub final_state: ParticleSystem,
    /// States at the recorded times; empty unless requested.
    pub trajectory: Vec<Snapshot>,
}

/// Number of fixed steps covering `[0, t_end]`: `⌈t_end/dt⌉`, ignoring the
/// rounding noise of an exact quotient.
pub(crate) fn step_count(dt: f64, t_end: f64) -> usize {
    let ratio = t_end / dt;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as usize
    } else {
        ratio.ceil() as usize
    }
}

fn run(
    kernel: &Kernel,
    system: &ParticleSystem,
    dt: f64,
    t_end: f64,
    record_every: usize,
    keep_trajectory: bool,
) -> Result<Simulation> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid(
            "dt",
            format!("must be finite and > 0 (got {dt})"),
        ));
    }
    if !(t_end.is_finite() && t_end >= dt * (1.0 - 1e-12)) {
        return Err(Error::invalid(
            "t_end",
            format!("must be >= dt (got {t_end})"),
        ));
    }
    if record_every == 0 {
        return Err(Error::invalid("record_every", "must be >= 1"));
    }
    let steps = step_count(dt, t_end);
    let mut state = system.clone();
    let h_reg_0 = hamiltonian(kernel, &state)?;
    let h_exact_0 = match hamiltonian(&Kernel::singular(kernel.dim()), &state) {
        Ok(h) => Some(h),
        Err(Error::Domain(_)) => None,
        Err(e) => return Err(e),
    };

    let mut trace = HamiltonianTrace {
        dt,
        steps,
        times: vec![0.0],
        h_reg: vec![h_reg_0],
        min_distance: vec![min_pair_distance(&state)],
        h_reg_0,
        h_exact_0,
        max_drift: 0.0,
        max_total: h_exact_0.map(|h| (h_reg_0 - h).abs()),
    };
    let snapshot = |t: f64, s: &ParticleSystem| Snapshot {
        t,
        positions: s.positions().to_vec(),
        velocities: s.velocities().to_vec(),
    };
    let mut trajectory = Vec::new();
    if keep_trajectory {
        trajectory.push(snapshot(0.0, &state));
    }

    for step in 1..=steps {
        let t = step as f64 * dt;
        let stepped = step4(kernel, &mut state, dt);
        let h = match stepped {
            Ok(()) if state.is_finite() => hamiltonian(kernel, &state)?,
            Ok(()) | Err(Error::Domain(_)) => return Err(Error::Blowup { step, time: t }),
            Err(e) => return Err(e),
        };
        if !h.is_finite() {
            return Err(Error::Blowup { step, time: t });
        }
        trace.max_drift = trace.max_drift.max((h - h_reg_0).abs());
        if let (Some(total), Some(h0)) = (trace.max_total.as_mut(), h_exact_0) {
            *total = total.max((h - h0).abs());
        }
        if step % record_every == 0 || step == steps {
            trace.times.push(t);
            trace.h_reg.push(h);
            trace.min_distance.push(min_pair_distance(&state));
            if keep_trajectory {
                trajectory.push(snapshot(t, &state));
            }
        }
    }
    debug_assert!(trace.satisfies_triangle());
    Ok(Simulation {
        trace,
        final_state: state,
        trajectory,
    })
}

/// Integrates for `⌈t_end/dt⌉` fixed steps, recording `H` every
/// `record_every` steps and at the final step.
pub fn simulate(
    kernel: &Kernel,
    system: &ParticleSystem,
    dt: f64,
    t_end: f64,
    record_every: usize,
) -> Result<Simulation> {
    run(kernel, system, dt, t_end, record_every, false)
}

/// As [`simulate`], also keeping the full state at every recorded time.
pub fn simulate_with_trajectory(
    kernel: &Kernel,
    system: &ParticleSystem,
    dt: f64,
    t_end: f64,
    record_every: usize,
) -> Result<Simulation> {
    run(kernel, system, dt, t_end, record_every, true)
}
