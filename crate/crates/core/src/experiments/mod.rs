//! Canned initial conditions and the study drivers built on them.

mod convergence;
mod orbit;
mod phase;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use convergence::{
    convergence_study, dyadic_dts, fit_order, ConvergenceOptions, ConvergenceReport,
};
pub use orbit::{
    max_stable_dt, orbit_metrics, orbit_trajectory, DtScan, OrbitMetrics, PERIOD_TOLERANCE,
};
pub use phase::{jump_statistics, phase_plane, JumpStatistics, PhasePlane};

use crate::dynamics::{ForceSign, ParticleSystem};
use crate::error::{Error, Result};
use crate::kernel::Dimension;

/// Seed of the default `random25` configuration.
pub const RANDOM25_SEED: u64 = 2017;

/// Pair weight of the five-body orbit: `m_j m_k = 0.2` in units where the
/// attractive kernel is `1/(4πr)`, i.e. `w = 4π · 0.2`.
pub const FIVE_BODY_WEIGHT: f64 = 0.8 * PI;

/// Period of the five-body choreography.
pub const FIVE_BODY_PERIOD: f64 = 2.0 * PI / 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PresetName {
    #[serde(rename = "osc1d")]
    Osc1d,
    #[serde(rename = "osc2d")]
    Osc2d,
    #[serde(rename = "osc3d")]
    Osc3d,
    #[serde(rename = "five_body")]
    FiveBody,
    #[serde(rename = "random25")]
    Random25,
}

impl PresetName {
    pub const ALL: [PresetName; 5] = [
        PresetName::Osc1d,
        PresetName::Osc2d,
        PresetName::Osc3d,
        PresetName::FiveBody,
        PresetName::Random25,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::Osc1d => "osc1d",
            PresetName::Osc2d => "osc2d",
            PresetName::Osc3d => "osc3d",
            PresetName::FiveBody => "five_body",
            PresetName::Random25 => "random25",
        }
    }

    /// The two-body oscillator of the given dimension.
    pub fn oscillator(dim: Dimension) -> Self {
        match dim {
            Dimension::One => PresetName::Osc1d,
            Dimension::Two => PresetName::Osc2d,
            Dimension::Three => PresetName::Osc3d,
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PresetName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemPreset {
    pub name: PresetName,
    pub system: ParticleSystem,
    pub default_t: f64,
    pub seed: Option<u64>,
    pub notes: &'static str,
}

fn oscillator(dim: Dimension, x: [Vec<f64>; 2], v: [Vec<f64>; 2]) -> ParticleSystem {
    ParticleSystem::with_charges(
        dim,
        x.to_vec(),
        v.to_vec(),
        &[1.0, -1.0],
        ForceSign::Repulsive,
    )
    .expect("oscillator preset is well formed")
}

fn five_body() -> ParticleSystem {
    let x = [
        [3.315332e-1, 0.0],
        [8.795500e-2, -3.394340e-2],
        [-2.537216e-1, -5.353020e-2],
        [-2.537216e-1, 5.353020e-2],
        [8.795500e-2, 3.394340e-2],
    ];
    let v = [
        [0.0, -5.937860e-1],
        [1.822785, 1.282480e-1],
        [1.271564, 1.686450e-1],
        [-1.271564, 1.686450e-1],
        [-1.822785, 1.282480e-1],
    ];
    let lift = |p: &[f64; 2]| vec![p[0], p[1], 0.0];
    ParticleSystem::with_uniform_weight(
        Dimension::Three,
        x.iter().map(lift).collect(),
        v.iter().map(lift).collect(),
        FIVE_BODY_WEIGHT,
        ForceSign::Attractive,
    )
    .expect("five-body preset is well formed")
}

/// 25 particles uniform in `[-1, 1]²`, at rest, with alternating unit charges.
pub fn random25(seed: u64) -> ProblemPreset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<Vec<f64>> = (0..25)
        .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
        .collect();
    let charges: Vec<f64> = (0..25)
        .map(|j| if j % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    let system = ParticleSystem::with_charges(
        Dimension::Two,
        x,
        vec![vec![0.0, 0.0]; 25],
        &charges,
        ForceSign::Repulsive,
    )
    .expect("random25 preset is well formed");
    ProblemPreset {
        name: PresetName::Random25,
        system,
        default_t: 8.0,
        seed: Some(seed),
        notes: "25 particles uniform in [-1,1]^2, zero velocity, alternating charges ±1",
    }
}

/// The canned initial state `name`. Construction is deterministic.
pub fn preset(name: PresetName) -> ProblemPreset {
    let (system, default_t, notes) = match name {
        PresetName::Osc1d => (
            oscillator(
                Dimension::One,
                [vec![-0.125], vec![0.125]],
                [vec![0.1], vec![0.0]],
            ),
            8.0,
            "opposite unit charges at ∓0.125, left particle moving at 0.1",
        ),
        PresetName::Osc2d => (
            oscillator(
                Dimension::Two,
                [vec![-0.25, 0.0], vec![0.25, 0.0]],
                [vec![0.0, 1e-3], vec![0.0, 0.0]],
            ),
            8.0,
            "opposite unit charges at (∓0.25, 0), left particle moving at (0, 1e-3)",
        ),
        PresetName::Osc3d => (
            oscillator(
                Dimension::Three,
                [vec![-0.1, 0.0, 0.0], vec![0.1, 0.0, 0.0]],
                [vec![0.0, 1e-3, 0.0], vec![0.0, 0.0, 0.0]],
            ),
            8.0,
            "opposite unit charges at (∓0.1, 0, 0), left particle moving at (0, 1e-3, 0)",
        ),
        PresetName::FiveBody => (
            five_body(),
            FIVE_BODY_PERIOD,
            "five-body planar choreography, attractive, w = 0.8π, period 2π/5",
        ),
        PresetName::Random25 => return random25(RANDOM25_SEED),
    };
    ProblemPreset {
        name,
        system,
        default_t,
        seed: None,
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for name in PresetName::ALL {
            assert_eq!(name.as_str().parse::<PresetName>().unwrap(), name);
            let json = serde_json::to_string(&name).unwrap();
            assert_eq!(json, format!("\"{}\"", name.as_str()));
        }
        assert!(matches!(
            "osc4d".parse::<PresetName>(),
            Err(Error::UnknownPreset(_))
        ));
    }

    #[test]
    fn presets_are_deterministic() {
        for name in PresetName::ALL {
            assert_eq!(preset(name), preset(name));
        }
        assert_ne!(random25(1).system, random25(2).system);
    }

    #[test]
    fn printed_initial_conditions() {
        let p = preset(PresetName::FiveBody);
        assert_eq!(p.system.positions()[0], [3.315332e-1, 0.0, 0.0]);
        assert_eq!(p.system.velocities()[0], [0.0, -5.937860e-1, 0.0]);
        assert_eq!(p.system.force_sign(), ForceSign::Attractive);

        let p = preset(PresetName::Osc1d);
        assert_eq!(p.system.flat_positions(), vec![-0.125, 0.125]);
        assert_eq!(p.system.velocities()[0][0], 0.1);
        assert_eq!(p.system.weight(0, 1), -1.0);
    }

    #[test]
    fn random25_shape() {
        let p = random25(RANDOM25_SEED);
        assert_eq!(p.system.len(), 25);
        for j in 0..25 {
            for k in 0..25 {
                if j != k {
                    assert_eq!(p.system.weight(j, k).abs(), 1.0);
                }
            }
            assert!(p.system.positions()[j][..2].iter().all(|c| c.abs() <= 1.0));
        }
    }
}
