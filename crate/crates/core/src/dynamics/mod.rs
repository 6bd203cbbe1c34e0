//! Pairwise N-body dynamics driven by any [`Kernel`].
//!
//! Particles have unit mass and interact through constant pair weights
//! `w_{jk}`. Each unordered pair is visited once, in ascending `(j, k)`
//! order, and its force applied antisymmetrically, so total momentum is
//! conserved to rounding and runs are bit-reproducible.

mod integrator;

use serde::{Deserialize, Serialize};

pub use integrator::{
    simulate, simulate_with_trajectory, step4, HamiltonianTrace, Simulation, Snapshot,
};

use crate::error::{Error, Result};
use crate::kernel::{Dimension, Kernel};

/// Point in space; components beyond the system dimension stay zero.
pub type Vector = [f64; 3];

/// Sign convention tying force and potential together.
///
/// * `Repulsive`: `ẍ_j = -Σ w ∇_j G`, `H = T + Σ_{j<k} w G`.
/// * `Attractive`: `ẍ_j = +Σ w ∇_j G`, `H = T - Σ_{j<k} w G` (gravity-like
///   for positive weights).
///
/// Either way `H` is conserved by the exact flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForceSign {
    Repulsive,
    Attractive,
}

impl ForceSign {
    fn factor(self) -> f64 {
        match self {
            ForceSign::Repulsive => 1.0,
            ForceSign::Attractive => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSystem {
    dim: Dimension,
    positions: Vec<Vector>,
    velocities: Vec<Vector>,
    weights: Vec<f64>,
    force_sign: ForceSign,
}

fn embed(dim: Dimension, name: &'static str, rows: Vec<Vec<f64>>) -> Result<Vec<Vector>> {
    rows.into_iter()
        .map(|row| {
            if row.len() != dim.value() {
                return Err(Error::invalid(
                    name,
                    format!("expected {} components, got {}", dim.value(), row.len()),
                ));
            }
            if row.iter().any(|c| !c.is_finite()) {
                return Err(Error::invalid(name, "components must be finite"));
            }
            let mut v = [0.0; 3];
            v[..row.len()].copy_from_slice(&row);
            Ok(v)
        })
        .collect()
}

impl ParticleSystem {
    /// Builds a system from per-particle coordinates and a full `N×N` weight
    /// matrix, which must be symmetric with zero diagonal.
    pub fn new(
        dim: Dimension,
        positions: Vec<Vec<f64>>,
        velocities: Vec<Vec<f64>>,
        pair_weights: Vec<Vec<f64>>,
        force_sign: ForceSign,
    ) -> Result<Self> {
        let n = positions.len();
        if velocities.len() != n {
            return Err(Error::invalid(
                "velocities",
                format!("{} velocities for {n} particles", velocities.len()),
            ));
        }
        if pair_weights.len() != n || pair_weights.iter().any(|row| row.len() != n) {
            return Err(Error::invalid("pair_weights", format!("must be {n}x{n}")));
        }
        let mut weights = vec![0.0; n * n];
        for j in 0..n {
            for k in 0..n {
                let w = pair_weights[j][k];
                if !w.is_finite() {
                    return Err(Error::invalid("pair_weights", "entries must be finite"));
                }
                if j == k && w != 0.0 {
                    return Err(Error::invalid("pair_weights", "diagonal must be zero"));
                }
                if w != pair_weights[k][j] {
                    return Err(Error::invalid(
                        "pair_weights",
                        format!("not symmetric at ({j}, {k})"),
                    ));
                }
                weights[j * n + k] = w;
            }
        }
        Ok(ParticleSystem {
            dim,
            positions: embed(dim, "positions", positions)?,
            velocities: embed(dim, "velocities", velocities)?,
            weights,
            force_sign,
        })
    }

    /// Weights `w_{jk} = q_j q_k` from per-particle charges.
    pub fn with_charges(
        dim: Dimension,
        positions: Vec<Vec<f64>>,
        velocities: Vec<Vec<f64>>,
        charges: &[f64],
        force_sign: ForceSign,
    ) -> Result<Self> {
        let weights = charges
            .iter()
            .enumerate()
            .map(|(j, qj)| {
                charges
                    .iter()
                    .enumerate()
                    .map(|(k, qk)| if j == k { 0.0 } else { qj * qk })
                    .collect()
            })
            .collect();
        ParticleSystem::new(dim, positions, velocities, weights, force_sign)
    }

    /// Every pair shares the same weight `w`.
    pub fn with_uniform_weight(
        dim: Dimension,
        positions: Vec<Vec<f64>>,
        velocities: Vec<Vec<f64>>,
        w: f64,
        force_sign: ForceSign,
    ) -> Result<Self> {
        let n = positions.len();
        let weights = (0..n)
            .map(|j| (0..n).map(|k| if j == k { 0.0 } else { w }).collect())
            .collect();
        ParticleSystem::new(dim, positions, velocities, weights, force_sign)
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Vector] {
        &self.positions
    }

    pub fn velocities(&self) -> &[Vector] {
        &self.velocities
    }

    pub fn weight(&self, j: usize, k: usize) -> f64 {
        self.weights[j * self.len() + k]
    }

    pub fn force_sign(&self) -> ForceSign {
        self.force_sign
    }

    /// Same particles with the opposite sign convention.
    pub fn with_force_sign(mut self, force_sign: ForceSign) -> Self {
        self.force_sign = force_sign;
        self
    }

    /// Positions flattened to `N·dim` numbers, particle-major.
    pub fn flat_positions(&self) -> Vec<f64> {
        let d = self.dim.value();
        self.positions
            .iter()
            .flat_map(|x| x[..d].to_vec())
            .collect()
    }

    pub fn total_momentum(&self) -> Vector {
        let mut p = [0.0; 3];
        for v in &self.velocities {
            for c in 0..3 {
                p[c] += v[c];
            }
        }
        p
    }

    pub(crate) fn is_finite(&self) -> bool {
        self.positions
            .iter()
            .chain(&self.velocities)
            .all(|v| v.iter().all(|c| c.is_finite()))
    }

    pub(crate) fn drift(&mut self, h: f64) {
        for (x, v) in self.positions.iter_mut().zip(&self.velocities) {
            for c in 0..3 {
                x[c] += h * v[c];
            }
        }
    }

    pub(crate) fn kick(&mut self, h: f64, acc: &[Vector]) {
        for (v, a) in self.velocities.iter_mut().zip(acc) {
            for c in 0..3 {
                v[c] += h * a[c];
            }
        }
    }
}

pub fn distance(a: &Vector, b: &Vector) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

fn check_dims(kernel: &Kernel, system: &ParticleSystem) -> Result<()> {
    if kernel.dim() == system.dim() {
        Ok(())
    } else {
        Err(Error::invalid(
            "kernel",
            format!(
                "kernel is {}D but the system is {}D",
                kernel.dim(),
                system.dim()
            ),
        ))
    }
}

fn coincident(j: usize, k: usize) -> Error {
    Error::Domain(format!(
        "particles {j} and {k} coincide under the singular kernel"
    ))
}

/// Accelerations `ẍ_j = ∓ Σ_{k≠j} w_{jk} ∇_j G(|x_j - x_k|)`.
///
/// Coincident particles contribute nothing under a regularized kernel (the
/// gradient vanishes at the origin) and are a domain error otherwise.
pub fn accelerations(kernel: &Kernel, system: &ParticleSystem) -> Result<Vec<Vector>> {
    check_dims(kernel, system)?;
    let x = &system.positions;
    let n = x.len();
    let sign = system.force_sign.factor();
    let mut acc = vec![[0.0; 3]; n];
    for j in 0..n {
        for k in j + 1..n {
            let w = system.weights[j * n + k];
            if w == 0.0 {
                continue;
            }
            let r = distance(&x[j], &x[k]);
            if r == 0.0 {
                if kernel.is_regularized() {
                    continue;
                }
                return Err(coincident(j, k));
            }
            let scale = -sign * w * kernel.radial_derivative(r)? / r;
            for c in 0..3 {
                let f = scale * (x[j][c] - x[k][c]);
                acc[j][c] += f;
                acc[k][c] -= f;
            }
        }
    }
    Ok(acc)
}

/// Potential part `± Σ_{j<k} w_{jk} G(|x_j - x_k|)` of the Hamiltonian.
pub fn potential_energy(kernel: &Kernel, system: &ParticleSystem) -> Result<f64> {
    check_dims(kernel, system)?;
    let x = &system.positions;
    let n = x.len();
    let mut u = 0.0;
    for j in 0..n {
        for k in j + 1..n {
            let w = system.weights[j * n + k];
            if w == 0.0 {
                continue;
            }
            let r = distance(&x[j], &x[k]);
            if r == 0.0 && !kernel.is_regularized() {
                return Err(coincident(j, k));
            }
            u += w * kernel.potential(r)?;
        }
    }
    Ok(system.force_sign.factor() * u)
}

pub fn kinetic_energy(system: &ParticleSystem) -> f64 {
    0.5 * system
        .velocities
        .iter()
        .map(|v| v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
        .sum::<f64>()
}

/// `H = ½ Σ |v_j|² ± Σ_{j<k} w_{jk} G`, signed per [`ForceSign`].
pub fn hamiltonian(kernel: &Kernel, system: &ParticleSystem) -> Result<f64> {
    Ok(kinetic_energy(system) + potential_energy(kernel, system)?)
}

/// Smallest pairwise distance (`∞` for fewer than two particles).
pub fn min_pair_distance(system: &ParticleSystem) -> f64 {
    let x = &system.positions;
    let mut best = f64::INFINITY;
    for j in 0..x.len() {
        for k in j + 1..x.len() {
            best = best.min(distance(&x[j], &x[k]));
        }
    }
    best
}
