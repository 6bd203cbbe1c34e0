//! Run configuration shared by the flag parser and the JSON config file.
//!
//! Every subcommand's argument struct is both a clap `Args` and a serde type,
//! so `--dump-config` followed by `--config` reproduces the same run.

use std::path::PathBuf;

use anyhow::{bail, ensure, Result};
use clap::{Args, Subcommand, ValueEnum};
use regkernel::experiments::{dyadic_dts, PresetName};
use regkernel::{CalibrationMode, Dimension};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Potential,
    Gradient,
    Laplacian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Smoothing,
    Modelling,
}

impl From<Mode> for CalibrationMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Smoothing => CalibrationMode::Smoothing,
            Mode::Modelling => CalibrationMode::Modelling,
        }
    }
}

// serde defaults mirroring the clap ones, so hand-written configs may omit them
fn default_count() -> usize {
    101
}
fn default_quantity() -> Quantity {
    Quantity::Potential
}
fn default_orders() -> Vec<u32> {
    vec![0, 1, 2, 4, 10]
}
fn one() -> f64 {
    1.0
}
fn default_record_every() -> usize {
    1
}
fn default_preset() -> PresetName {
    PresetName::Osc1d
}
fn default_mode() -> Mode {
    Mode::Smoothing
}
fn default_converge_t() -> f64 {
    8.0
}
fn default_plateau_factor() -> f64 {
    3.0
}
fn default_phase_dt() -> f64 {
    3.125e-2
}
fn default_phase_t() -> f64 {
    400.0
}
fn default_orbit_n() -> u32 {
    4
}

fn parse_preset(s: &str) -> Result<PresetName, String> {
    s.parse().map_err(|e: regkernel::Error| e.to_string())
}

/// Where and how results are written.
#[derive(Debug, Clone, PartialEq, Default, Args, Serialize, Deserialize)]
pub struct OutputArgs {
    /// Output file (or directory for `converge`); stdout when omitted.
    /// Relative paths are resolved against $REGKERNEL_OUT_DIR if set.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    #[serde(default)]
    pub format: Format,
}

/// Which kernel to use: regularized when `epsilon` is given, else singular.
#[derive(Debug, Clone, PartialEq, Default, Args, Serialize, Deserialize)]
pub struct KernelArgs {
    /// Core size ε; omit for the singular kernel.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Truncation order n.
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub n: u32,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub dim: u8,
    #[command(flatten)]
    #[serde(flatten)]
    pub kernel: KernelArgs,
    /// Radii to evaluate at (comma separated).
    #[arg(long, value_delimiter = ',', required_unless_present = "r_max")]
    #[serde(default)]
    pub r: Vec<f64>,
    /// Sample `count` evenly spaced radii on [0, r_max] instead of `--r`.
    #[arg(long, conflicts_with = "r")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[arg(long, default_value_t = 101)]
    #[serde(default = "default_count")]
    pub count: usize,
    #[arg(long, value_enum, default_value_t = Quantity::Potential)]
    #[serde(default = "default_quantity")]
    pub quantity: Quantity,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct TablesArgs {
    #[arg(long, value_enum)]
    pub mode: Mode,
    #[arg(long)]
    pub dim: u8,
    /// Error to calibrate against (smoothing: absolute, modelling: relative).
    #[arg(long)]
    pub target: f64,
    /// Truncation orders (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,4,10")]
    #[serde(default = "default_orders")]
    pub n: Vec<u32>,
    /// Ball radius for the smoothing error.
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "one")]
    pub radius: f64,
    /// Configuration for the modelling error (default: the oscillator of `dim`).
    #[arg(long, value_parser = parse_preset)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<PresetName>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long, value_parser = parse_preset)]
    pub preset: PresetName,
    /// Seed for `random25`.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub kernel: KernelArgs,
    #[arg(long)]
    pub dt: f64,
    /// Final time; defaults to the preset's.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[arg(long, default_value_t = 1)]
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    /// Append flattened positions to every trace row.
    #[arg(long)]
    #[serde(default)]
    pub positions: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ConvergeArgs {
    #[arg(long, value_parser = parse_preset, default_value = "osc1d")]
    #[serde(default = "default_preset")]
    pub preset: PresetName,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Truncation orders (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,4,10")]
    #[serde(default = "default_orders")]
    pub n: Vec<u32>,
    /// Explicit ε per order; calibrated from `--calibrate` when omitted.
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    pub epsilon: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Mode::Smoothing)]
    #[serde(default = "default_mode")]
    pub calibrate: Mode,
    /// Calibration target (default 1e-2 smoothing, 4.89e-6 modelling).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    /// Also run the singular kernel.
    #[arg(long)]
    #[serde(default)]
    pub singular: bool,
    /// Time steps (comma separated); default 2^-2 … 2^-14.
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    pub dt: Vec<f64>,
    #[arg(long, default_value_t = 8.0)]
    #[serde(default = "default_converge_t")]
    pub t_end: f64,
    #[arg(long, default_value_t = 3.0)]
    #[serde(default = "default_plateau_factor")]
    pub plateau_factor: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

impl ConvergeArgs {
    pub fn dt_values(&self) -> Vec<f64> {
        if self.dt.is_empty() {
            dyadic_dts(2, 14)
        } else {
            self.dt.clone()
        }
    }

    pub fn calibration_target(&self) -> f64 {
        self.target.unwrap_or(match self.calibrate {
            Mode::Smoothing => 1e-2,
            Mode::Modelling => 4.89e-6,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PhaseArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub kernel: KernelArgs,
    #[arg(long, default_value_t = 3.125e-2)]
    #[serde(default = "default_phase_dt")]
    pub dt: f64,
    #[arg(long, default_value_t = 400.0)]
    #[serde(default = "default_phase_t")]
    pub t_end: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct OrbitArgs {
    #[arg(long, default_value_t = 4)]
    #[serde(default = "default_orbit_n")]
    pub n: u32,
    /// Core size; default calibrates a 3D smoothing error of 1e-2 on the unit ball.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub dt: f64,
    /// Also scan dt upward (ratio 1.05 from `dt`) for the largest step with
    /// period error <= 1e-2.
    #[arg(long)]
    #[serde(default)]
    pub scan: bool,
    /// Write the per-step positions to this CSV.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum RunConfig {
    /// Evaluate a kernel, its radial derivative or its Laplacian.
    Sample(SampleArgs),
    /// Calibrate (n, ε) pairings against a smoothing or modelling error.
    Tables(TablesArgs),
    /// Integrate a preset and write the Hamiltonian trace.
    Simulate(SimulateArgs),
    /// Hamiltonian-error convergence study over a dt grid.
    Converge(ConvergeArgs),
    /// Phase plane (z, ż) of the 1D oscillator.
    Phase(PhaseArgs),
    /// One period of the five-body orbit and its error metrics.
    Orbit(OrbitArgs),
}

fn positive(name: &str, x: f64) -> Result<()> {
    ensure!(
        x.is_finite() && x > 0.0,
        "`{name}` must be finite and > 0 (got {x})"
    );
    Ok(())
}

fn dimension(dim: u8) -> Result<Dimension> {
    Ok(Dimension::new(dim)?)
}

impl KernelArgs {
    fn validate(&self) -> Result<()> {
        if let Some(eps) = self.epsilon {
            positive("epsilon", eps)?;
        }
        Ok(())
    }
}

impl RunConfig {
    /// Checks every numeric field against the preconditions of the library
    /// call it feeds.
    pub fn validate(&self) -> Result<()> {
        match self {
            RunConfig::Sample(a) => {
                dimension(a.dim)?;
                a.kernel.validate()?;
                if let Some(r_max) = a.r_max {
                    positive("r_max", r_max)?;
                    ensure!(a.count >= 2, "`count` must be >= 2");
                } else {
                    ensure!(!a.r.is_empty(), "`r` needs at least one radius");
                }
                for &r in &a.r {
                    ensure!(
                        r.is_finite() && r >= 0.0,
                        "`r` values must be finite and >= 0 (got {r})"
                    );
                    if a.kernel.epsilon.is_none() {
                        ensure!(r > 0.0, "the singular kernel is undefined at r = 0");
                    }
                }
            }
            RunConfig::Tables(a) => {
                dimension(a.dim)?;
                positive("target", a.target)?;
                positive("radius", a.radius)?;
                ensure!(!a.n.is_empty(), "`n` needs at least one order");
                if let Some(p) = a.preset {
                    ensure!(
                        a.mode == Mode::Modelling,
                        "`preset` only applies to --mode modelling"
                    );
                    let d = regkernel::preset(p).system.dim();
                    ensure!(
                        d.value() == a.dim as usize,
                        "preset {p} is {d}D but --dim is {}",
                        a.dim
                    );
                }
            }
            RunConfig::Simulate(a) => {
                a.kernel.validate()?;
                positive("dt", a.dt)?;
                if let Some(t) = a.t_end {
                    positive("t_end", t)?;
                    ensure!(t >= a.dt, "`t_end` must be >= dt");
                }
                ensure!(a.record_every >= 1, "`record_every` must be >= 1");
                if a.seed.is_some() {
                    ensure!(
                        a.preset == PresetName::Random25,
                        "`seed` only applies to random25"
                    );
                }
            }
            RunConfig::Converge(a) => {
                positive("t_end", a.t_end)?;
                positive("plateau_factor", a.plateau_factor)?;
                positive("target", a.calibration_target())?;
                let dts = a.dt_values();
                ensure!(dts.len() >= 4, "`dt` needs at least 4 values");
                for &dt in &dts {
                    positive("dt", dt)?;
                    ensure!(dt <= a.t_end, "every dt must be <= t_end");
                }
                if !a.epsilon.is_empty() {
                    ensure!(
                        a.epsilon.len() == a.n.len(),
                        "`epsilon` has {} values but `n` has {}",
                        a.epsilon.len(),
                        a.n.len()
                    );
                    for &e in &a.epsilon {
                        positive("epsilon", e)?;
                    }
                }
                if a.seed.is_some() {
                    ensure!(
                        a.preset == PresetName::Random25,
                        "`seed` only applies to random25"
                    );
                }
                ensure!(
                    !a.n.is_empty() || a.singular,
                    "nothing to run: give --n or --singular"
                );
            }
            RunConfig::Phase(a) => {
                a.kernel.validate()?;
                positive("dt", a.dt)?;
                positive("t_end", a.t_end)?;
                ensure!(a.t_end >= a.dt, "`t_end` must be >= dt");
            }
            RunConfig::Orbit(a) => {
                if let Some(eps) = a.epsilon {
                    positive("epsilon", eps)?;
                }
                positive("dt", a.dt)?;
                if a.dt > regkernel::experiments::FIVE_BODY_PERIOD {
                    bail!("`dt` must not exceed the orbit period 2π/5");
                }
            }
        }
        Ok(())
    }
}
