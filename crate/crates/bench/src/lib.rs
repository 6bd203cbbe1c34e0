//! Fixtures shared by the criterion benches.

use regkernel::experiments::{preset, PresetName};
use regkernel::{Dimension, KernelSpec, ParticleSystem};

/// Orders swept by the kernel benches.
pub const ORDERS: [u32; 5] = [0, 1, 2, 4, 10];

pub fn spec(dim: Dimension, n: u32) -> KernelSpec {
    KernelSpec::new(dim, 2e-2, n).expect("valid benchmark kernel")
}

/// Radii spread across the core and far field of an `ε = 2e-2` kernel.
pub fn radii(count: usize) -> Vec<f64> {
    (0..count).map(|k| 1e-4 + k as f64 / count as f64).collect()
}

pub fn five_body() -> ParticleSystem {
    preset(PresetName::FiveBody).system
}

pub fn random25() -> ParticleSystem {
    preset(PresetName::Random25).system
}
