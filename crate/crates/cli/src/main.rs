//! Command-line front end for the regularized-kernel library.

mod config;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;
use regkernel::experiments::{
    max_stable_dt, orbit_trajectory, random25, ConvergenceOptions, PresetName, ProblemPreset,
    FIVE_BODY_PERIOD,
};
use regkernel::export;
use regkernel::{
    convergence_study, grad_green, grad_green_reg, green, green_reg, laplacian_reg_closed,
    orbit_metrics, phase_plane, preset, simulate_with_trajectory, solve_epsilon_modelling,
    solve_epsilon_smoothing, Dimension, Kernel, KernelSpec, PairingTable, RadialValue,
};
use serde_json::json;

use config::{
    ConvergeArgs, Format, KernelArgs, Mode, OrbitArgs, PhaseArgs, Quantity, RunConfig, SampleArgs,
    SimulateArgs, TablesArgs,
};
use output::emit;

#[derive(Parser)]
#[command(
    name = "regkernel",
    version,
    about = "High-order regularized Laplace kernels"
)]
struct Cli {
    /// Read the run configuration from a JSON file instead of flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the resolved configuration as JSON and exit without running.
    #[arg(long, global = true)]
    dump_config: bool,
    #[command(subcommand)]
    command: Option<RunConfig>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({ "error": format!("{e:#}") }));
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = match (cli.config, cli.command) {
        (Some(_), Some(_)) => bail!("--config and a subcommand are mutually exclusive"),
        (Some(path), None) => {
            let text = fs::read_to_string(&path)
                .with_context(|| format!("reading config {}", path.display()))?;
            serde_json::from_str::<RunConfig>(&text)
                .with_context(|| format!("parsing config {}", path.display()))?
        }
        (None, Some(cmd)) => cmd,
        (None, None) => bail!("no subcommand given (see --help)"),
    };
    cfg.validate()?;
    if cli.dump_config {
        println!("{}", serde_json::to_string_pretty(&cfg)?);
        return Ok(());
    }
    match &cfg {
        RunConfig::Sample(a) => sample(a),
        RunConfig::Tables(a) => tables(a),
        RunConfig::Simulate(a) => simulate(a),
        RunConfig::Converge(a) => converge(a),
        RunConfig::Phase(a) => phase(a),
        RunConfig::Orbit(a) => orbit(a),
    }
}

fn kernel(dim: Dimension, k: &KernelArgs) -> Result<Kernel> {
    Ok(match k.epsilon {
        Some(eps) => Kernel::regularized(dim, eps, k.n)?,
        None => Kernel::singular(dim),
    })
}

fn load_preset(name: PresetName, seed: Option<u64>) -> ProblemPreset {
    match seed {
        Some(s) => random25(s),
        None => preset(name),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn sample(a: &SampleArgs) -> Result<()> {
    let dim = Dimension::new(a.dim)?;
    let k = kernel(dim, &a.kernel)?;
    let eval = |r: f64| -> Result<f64> {
        Ok(match (a.quantity, &k) {
            (Quantity::Potential, Kernel::Regularized(s)) => green_reg(s, r),
            (Quantity::Potential, Kernel::Singular { dim }) => green(*dim, r)?,
            (Quantity::Gradient, Kernel::Regularized(s)) => grad_green_reg(s, r),
            (Quantity::Gradient, Kernel::Singular { dim }) => grad_green(*dim, r)?,
            (Quantity::Laplacian, Kernel::Regularized(s)) => laplacian_reg_closed(s, r),
            // harmonic away from the origin
            (Quantity::Laplacian, Kernel::Singular { dim }) => grad_green(*dim, r).map(|_| 0.0)?,
        })
    };
    let radii: Vec<f64> = match a.r_max {
        Some(r_max) => {
            let start = usize::from(!k.is_regularized());
            (start..a.count)
                .map(|i| r_max * i as f64 / (a.count - 1) as f64)
                .collect()
        }
        None => a.r.clone(),
    };
    let samples = radii
        .iter()
        .map(|&r| Ok(RadialValue { r, value: eval(r)? }))
        .collect::<Result<Vec<_>>>()?;
    let text = match a.output.format {
        Format::Csv => export::profile_csv(&samples),
        Format::Json => {
            to_json(&json!({ "kernel": k, "quantity": a.quantity, "samples": samples }))?
        }
    };
    emit(a.output.out.as_deref(), &text)
}

fn tables(a: &TablesArgs) -> Result<()> {
    let dim = Dimension::new(a.dim)?;
    let table = match a.mode {
        Mode::Smoothing => PairingTable::smoothing(dim, &a.n, a.target, a.radius)?,
        Mode::Modelling => {
            let name = a.preset.unwrap_or(PresetName::oscillator(dim));
            PairingTable::modelling(dim, &a.n, a.target, &preset(name).system)?
        }
    };
    let text = match a.output.format {
        Format::Csv => export::pairing_table_csv(&table),
        Format::Json => to_json(&table)?,
    };
    emit(a.output.out.as_deref(), &text)
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let p = load_preset(a.preset, a.seed);
    let dim = p.system.dim();
    let k = kernel(dim, &a.kernel)?;
    let t_end = a.t_end.unwrap_or(p.default_t);
    let sim = simulate_with_trajectory(&k, &p.system, a.dt, t_end, a.record_every)?;
    let text = match a.output.format {
        Format::Csv => {
            let traj = a.positions.then_some((sim.trajectory.as_slice(), dim));
            export::trace_csv(&sim.trace, traj)
        }
        Format::Json => to_json(&json!({
            "preset": p.name,
            "seed": p.seed,
            "kernel": k,
            "max_drift_relative": sim.trace.relative_drift(),
            "max_total_relative": sim.trace.relative_total(),
            "trace": sim.trace,
        }))?,
    };
    emit(a.output.out.as_deref(), &text)
}

fn converge(a: &ConvergeArgs) -> Result<()> {
    let p = load_preset(a.preset, a.seed);
    let dim = p.system.dim();
    let target = a.calibration_target();
    let mut kernels = Vec::new();
    for (i, &n) in a.n.iter().enumerate() {
        let eps = match a.epsilon.get(i) {
            Some(&e) => e,
            None => match a.calibrate {
                Mode::Smoothing => solve_epsilon_smoothing(n, dim, target, 1.0)?,
                Mode::Modelling => solve_epsilon_modelling(n, dim, target, &p.system)?,
            },
        };
        kernels.push(Kernel::Regularized(KernelSpec::new(dim, eps, n)?));
    }
    if a.singular {
        kernels.push(Kernel::singular(dim));
    }
    let options = ConvergenceOptions {
        plateau_factor: a.plateau_factor,
        ..ConvergenceOptions::default()
    };
    let reports = convergence_study(&p, &kernels, &a.dt_values(), a.t_end, options)?;
    let summary: Vec<_> = reports
        .iter()
        .map(|r| {
            json!({
                "preset": r.preset,
                "seed": p.seed,
                "kernel": r.kernel,
                "fitted_order": r.fitted_order,
                "drift_order": r.drift_order,
                "plateau": r.plateau,
                "min_error": r.min_error(),
                "plateau_reached": r.plateau_reached(&options),
            })
        })
        .collect();
    let name = |r: &regkernel::ConvergenceReport| match r.kernel {
        Kernel::Regularized(s) => format!("convergence_n{}.csv", s.n()),
        Kernel::Singular { .. } => "convergence_singular.csv".to_string(),
    };
    match (&a.output.out, a.output.format) {
        (Some(dir), _) => {
            let dir = output::resolve(dir);
            for r in &reports {
                output::write_atomic(&dir.join(name(r)), &export::convergence_csv(r))?;
            }
            output::write_atomic(&dir.join("summary.json"), &to_json(&summary)?)?;
            for r in &reports {
                eprintln!(
                    "{}: fitted order {}, drift order {}, plateau {:.6e}",
                    r.kernel,
                    order(r.fitted_order),
                    order(r.drift_order),
                    r.plateau
                );
            }
            Ok(())
        }
        (None, Format::Json) => emit(
            None,
            &to_json(&json!({ "summary": summary, "reports": reports }))?,
        ),
        (None, Format::Csv) => {
            let mut text = String::new();
            for r in &reports {
                text.push_str(&format!("# {}\n", r.kernel));
                text.push_str(&export::convergence_csv(r));
            }
            emit(None, &text)
        }
    }
}

fn order(p: Option<f64>) -> String {
    p.map_or_else(|| "n/a".to_string(), |p| format!("{p:.6}"))
}

fn phase(a: &PhaseArgs) -> Result<()> {
    let system = preset(PresetName::Osc1d).system;
    let k = kernel(Dimension::One, &a.kernel)?;
    let plane = phase_plane(&k, &system, a.dt, a.t_end)?;
    let text = match a.output.format {
        Format::Csv => export::phase_csv(&plane),
        Format::Json => to_json(&plane)?,
    };
    emit(a.output.out.as_deref(), &text)
}

fn orbit(a: &OrbitArgs) -> Result<()> {
    let eps = match a.epsilon {
        Some(e) => e,
        None => solve_epsilon_smoothing(a.n, Dimension::Three, 1e-2, 1.0)?,
    };
    let spec = KernelSpec::new(Dimension::Three, eps, a.n)?;
    let metrics = orbit_metrics(&spec, a.dt)?;
    let scan = if a.scan {
        Some(max_stable_dt(&spec, a.dt, 1.05, FIVE_BODY_PERIOD)?)
    } else {
        None
    };
    if let Some(path) = &a.trajectory {
        let samples = orbit_trajectory(&spec, a.dt)?;
        output::write_atomic(
            &output::resolve(path),
            &export::orbit_csv(&samples, Dimension::Three),
        )?;
    }
    let text = match a.output.format {
        Format::Json => to_json(&json!({ "metrics": metrics, "scan": scan }))?,
        Format::Csv => {
            let mut s =
                String::from("n,epsilon,dt,period_error,hamiltonian_error,modelling_error\n");
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                metrics.n,
                export::float(metrics.epsilon),
                export::float(metrics.dt),
                export::float(metrics.period_error),
                export::float(metrics.hamiltonian_error),
                export::float(metrics.modelling_error)
            ));
            s
        }
    };
    emit(a.output.out.as_deref(), &text)
}
