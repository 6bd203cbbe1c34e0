//! High-order regularized kernels for the Laplace Green's function.
//!
//! The crate is organised around five pieces:
//!
//! * [`kernel`] evaluates the singular kernel `G`, the truncated-series family
//!   `G^{ε,n}`, its radial derivative and its Laplacian.
//! * [`error_analysis`] measures smoothing and modelling errors, evaluates the
//!   tail sums `S[n, z]` and calibrates `ε` for a given truncation order.
//! * [`dynamics`] assembles pairwise N-body forces, steps them with a
//!   fourth-order symplectic composition and tracks the Hamiltonian.
//! * [`experiments`] holds the canned initial conditions and study drivers.
//! * [`export`] renders study results as CSV / JSON.

pub mod dynamics;
pub mod error;
pub mod error_analysis;
pub mod experiments;
pub mod export;
pub mod kernel;
pub mod quadrature;
pub mod special;

pub use dynamics::{
    accelerations, hamiltonian, simulate, simulate_with_trajectory, step4, ForceSign,
    HamiltonianTrace, ParticleSystem, Simulation,
};
pub use error::{Error, Result};
pub use error_analysis::{
    hyp2f1, modelling_error, smoothing_error, smoothing_error_closed, solve_epsilon_modelling,
    solve_epsilon_smoothing, tail_sum, CalibrationMode, PairingRow, PairingTable, TailSumInput,
};
pub use experiments::{
    convergence_study, max_stable_dt, orbit_metrics, phase_plane, preset, ConvergenceOptions,
    ConvergenceReport, OrbitMetrics, PhasePlane, PresetName, ProblemPreset,
};
pub use kernel::{
    choose_general, grad_green, grad_green_reg, green, green_reg, laplacian_mass,
    laplacian_reg_closed, laplacian_reg_series, Dimension, Kernel, KernelSpec, RadialValue,
};
