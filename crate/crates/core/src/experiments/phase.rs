use serde::{Deserialize, Serialize};

use crate::dynamics::{simulate_with_trajectory, HamiltonianTrace, ParticleSystem};
use crate::error::{Error, Result};
use crate::kernel::{Dimension, Kernel};

/// Relative coordinate `z = x_1 - x_2` of a 1D pair, sampled every step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePlane {
    pub t: Vec<f64>,
    pub z: Vec<f64>,
    pub zdot: Vec<f64>,
    pub trace: HamiltonianTrace,
}

impl PhasePlane {
    /// Spread `max H - min H` of the regularized Hamiltonian along the run.
    pub fn energy_spread(&self) -> f64 {
        let (lo, hi) = self
            .trace
            .h_reg
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &h| {
                (lo.min(h), hi.max(h))
            });
        hi - lo
    }
}

pub fn phase_plane(
    kernel: &Kernel,
    system: &ParticleSystem,
    dt: f64,
    t_end: f64,
) -> Result<PhasePlane> {
    if system.dim() != Dimension::One || system.len() != 2 {
        return Err(Error::invalid(
            "system",
            "phase plane needs two particles in 1D",
        ));
    }
    let sim = simulate_with_trajectory(kernel, system, dt, t_end, 1)?;
    let mut plane = PhasePlane {
        t: Vec::with_capacity(sim.trajectory.len()),
        z: Vec::with_capacity(sim.trajectory.len()),
        zdot: Vec::with_capacity(sim.trajectory.len()),
        trace: sim.trace,
    };
    for s in &sim.trajectory {
        plane.t.push(s.t);
        plane.z.push(s.positions[0][0] - s.positions[1][0]);
        plane.zdot.push(s.velocities[0][0] - s.velocities[1][0]);
    }
    Ok(plane)
}

/// How per-step Hamiltonian jumps line up with close encounters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpStatistics {
    pub steps: usize,
    /// Spearman rank correlation between `|ΔH|` and `1 / min pair distance`.
    pub rank_correlation: f64,
    /// Largest single-step `|ΔH|`.
    pub max_jump: f64,
    /// Share of `Σ|ΔH|` accumulated in the steps whose minimum pair distance
    /// lies in the closest decile.
    pub close_share: f64,
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut r = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let mean = 0.5 * (i + j) as f64;
        for &o in &order[i..=j] {
            r[o] = mean;
        }
        i = j + 1;
    }
    r
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Jump statistics of a trace recorded at every step.
pub fn jump_statistics(trace: &HamiltonianTrace) -> Result<JumpStatistics> {
    if trace.times.len() != trace.steps + 1 {
        return Err(Error::invalid("trace", "must be recorded at every step"));
    }
    if trace.steps < 10 {
        return Err(Error::invalid("trace", "need at least 10 steps"));
    }
    let jumps: Vec<f64> = trace
        .h_reg
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .collect();
    let closeness: Vec<f64> = trace
        .min_distance
        .windows(2)
        .map(|w| 1.0 / w[0].min(w[1]))
        .collect();
    let rank_correlation = pearson(&ranks(&jumps), &ranks(&closeness));

    let mut sorted = closeness.clone();
    sorted.sort_by(f64::total_cmp);
    let cut = sorted[(sorted.len() * 9) / 10];
    let total: f64 = jumps.iter().sum();
    let close: f64 = jumps
        .iter()
        .zip(&closeness)
        .filter(|(_, &c)| c >= cut)
        .map(|(j, _)| j)
        .sum();
    Ok(JumpStatistics {
        steps: trace.steps,
        rank_correlation,
        max_jump: jumps.iter().copied().fold(0.0, f64::max),
        close_share: if total > 0.0 { close / total } else { 0.0 },
    })
}
