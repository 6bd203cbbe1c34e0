//! CSV rendering of study results.
//!
//! Floats are written as `{:.16e}` (17 significant digits) so every value
//! parses back to the same `f64`. Missing values are written as `NaN`, which
//! keeps the column count fixed.

use std::fmt::Write;

use crate::dynamics::{HamiltonianTrace, Snapshot, Vector};
use crate::error_analysis::PairingTable;
use crate::experiments::{ConvergenceReport, PhasePlane};
use crate::kernel::{Dimension, RadialValue};

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn row(out: &mut String, cells: impl IntoIterator<Item = f64>) {
    let line: Vec<String> = cells.into_iter().map(float).collect();
    out.push_str(&line.join(","));
    out.push('\n');
}

fn position_header(out: &mut String, particles: usize, dim: Dimension) {
    const AXES: [&str; 3] = ["x", "y", "z"];
    for j in 0..particles {
        for axis in &AXES[..dim.value()] {
            let _ = write!(out, ",{axis}{j}");
        }
    }
}

fn flatten(positions: &[Vector], dim: Dimension) -> impl Iterator<Item = f64> + '_ {
    positions
        .iter()
        .flat_map(move |x| x[..dim.value()].iter().copied())
}

/// `n,epsilon,achieved_error`.
pub fn pairing_table_csv(table: &PairingTable) -> String {
    let mut out = String::from("n,epsilon,achieved_error\n");
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{}",
            r.n,
            float(r.epsilon),
            float(r.achieved_error)
        );
    }
    out
}

/// `r,value`.
pub fn profile_csv(samples: &[RadialValue]) -> String {
    let mut out = String::from("r,value\n");
    for s in samples {
        row(&mut out, [s.r, s.value]);
    }
    out
}

/// `t,H_reg,H_err_vs_reg0,H_err_vs_exact0`, errors relative to
/// [`HamiltonianTrace::scale`], followed by flattened positions when a
/// trajectory with one snapshot per recorded time is given.
pub fn trace_csv(trace: &HamiltonianTrace, trajectory: Option<(&[Snapshot], Dimension)>) -> String {
    let mut out = String::from("t,H_reg,H_err_vs_reg0,H_err_vs_exact0");
    if let Some((snaps, dim)) = trajectory {
        position_header(
            &mut out,
            snaps.first().map_or(0, |s| s.positions.len()),
            dim,
        );
    }
    out.push('\n');
    let scale = trace.scale();
    let exact = trace.h_exact_0.unwrap_or(f64::NAN);
    for (i, (&t, &h)) in trace.times.iter().zip(&trace.h_reg).enumerate() {
        let mut cells = vec![
            t,
            h,
            (h - trace.h_reg_0).abs() / scale,
            (h - exact).abs() / scale,
        ];
        if let Some((snaps, dim)) = trajectory {
            cells.extend(flatten(&snaps[i].positions, dim));
        }
        row(&mut out, cells);
    }
    out
}

/// `dt,max_H_error`.
pub fn convergence_csv(report: &ConvergenceReport) -> String {
    let mut out = String::from("dt,max_H_error\n");
    for (dt, e) in report.dt_values.iter().zip(&report.max_h_error) {
        row(&mut out, [*dt, e.unwrap_or(f64::NAN)]);
    }
    out
}

/// `t,z,zdot`.
pub fn phase_csv(plane: &PhasePlane) -> String {
    let mut out = String::from("t,z,zdot\n");
    for i in 0..plane.t.len() {
        row(&mut out, [plane.t[i], plane.z[i], plane.zdot[i]]);
    }
    out
}

/// `t` followed by flattened positions.
pub fn orbit_csv(samples: &[(f64, Vec<Vector>)], dim: Dimension) -> String {
    let mut out = String::from("t");
    position_header(&mut out, samples.first().map_or(0, |s| s.1.len()), dim);
    out.push('\n');
    for (t, x) in samples {
        row(&mut out, std::iter::once(*t).chain(flatten(x, dim)));
    }
    out
}
