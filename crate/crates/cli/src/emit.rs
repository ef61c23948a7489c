//! File writers. CSV: UTF-8, `\n` endings, header row, comma separated.
//! JSON: keys in lexicographic order. Floats use the shortest representation
//! that round-trips exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use tcd_core::observables::VisibilityMethod;

use crate::config::Format;
use crate::scenario::Bundle;
use crate::sweep::{SweepRow, SweepSpec};
use crate::CliError;

pub fn num(x: f64) -> String {
    format!("{x:?}")
}

fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn write(path: PathBuf, contents: &str, written: &mut Vec<PathBuf>) -> Result<(), CliError> {
    fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    written.push(path);
    Ok(())
}

fn method_name(m: VisibilityMethod) -> &'static str {
    match m {
        VisibilityMethod::MinMax => "minmax",
        VisibilityMethod::Fourier => "fourier",
    }
}

pub fn single_particle_csv(b: &Bundle) -> String {
    let ys = b.single_particle.grid.coordinates();
    csv(&["y", "rho"], ys.iter().zip(&b.single_particle.values).map(|(y, r)| vec![num(*y), num(*r)]))
}

pub fn coincidence_csv(b: &Bundle) -> String {
    csv(&["ya", "yb", "rho"], b.coincidence.cells().map(|(a, y, r)| vec![num(a), num(y), num(r)]))
}

pub fn profile_csv(b: &Bundle) -> String {
    let p = &b.profile;
    csv(
        &["dy", "engine", "closed_form"],
        (0..p.dy.len()).map(|i| vec![num(p.dy[i]), num(p.engine[i]), num(p.closed_form[i])]),
    )
}

pub fn visibility_csv(b: &Bundle) -> String {
    let v = &b.visibility;
    csv(
        &["method", "v", "max_density", "min_density", "expected_v"],
        [vec![
            method_name(v.method).to_string(),
            num(v.v),
            num(v.max_density),
            num(v.min_density),
            num(b.expected_visibility),
        ]],
    )
}

pub fn bundle_json(b: &Bundle) -> Result<Value, CliError> {
    let config = serde_json::to_value(&b.config).map_err(|e| CliError::Config(e.to_string()))?;
    let montecarlo = match &b.montecarlo {
        None => Value::Null,
        Some(mc) => json!({
            "samples": mc.config.samples,
            "seed": mc.config.seed,
            "edges": mc.histogram.edges,
            "counts": mc.histogram.counts,
            "expected": mc.expected,
            "total": mc.histogram.total,
            "dropped": mc.dropped,
            "scattered": mc.scattered,
            "records": mc.records,
            "tv": mc.tv,
            "chi2": mc.chi2.statistic,
            "dof": mc.chi2.dof,
            "degenerate": mc.chi2.degenerate,
        }),
    };
    let nb = b.coincidence.grid_b.points();
    let rows: Vec<&[f64]> = b.coincidence.values.chunks(nb).collect();
    Ok(json!({
        "config": config,
        "maps": {
            "single_particle": { "y": b.single_particle.grid.coordinates(), "rho": b.single_particle.values },
            "coincidence": {
                "ya": b.coincidence.grid_a.coordinates(),
                "yb": b.coincidence.grid_b.coordinates(),
                "rho": rows,
            },
            "profile": {
                "dy": b.profile.dy,
                "engine": b.profile.engine,
                "closed_form": b.profile.closed_form,
                "scale": b.profile.scale,
                "max_relative_deviation": b.profile.max_relative_deviation,
            },
        },
        "visibility": {
            "method": method_name(b.visibility.method),
            "v": b.visibility.v,
            "max_density": b.visibility.max_density,
            "min_density": b.visibility.min_density,
            "expected_v": b.expected_visibility,
        },
        "montecarlo": montecarlo,
    }))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

const PLOT_SCRIPT: &str = r#"# Generated by tcd-sim. Requires numpy and matplotlib.
import numpy as np
import matplotlib.pyplot as plt

single = np.genfromtxt("single_particle.csv", delimiter=",", names=True)
coinc = np.genfromtxt("coincidence.csv", delimiter=",", names=True)
prof = np.genfromtxt("profile.csv", delimiter=",", names=True)

n = int(round(np.sqrt(coinc.size)))
fig, ax = plt.subplots(1, 3, figsize=(15, 4))
ax[0].plot(single["y"], single["rho"])
ax[0].set_xlabel("y_a")
ax[0].set_title("single-particle density")
ax[1].imshow(coinc["rho"].reshape(n, n), origin="lower", aspect="auto",
             extent=[coinc["yb"].min(), coinc["yb"].max(), coinc["ya"].min(), coinc["ya"].max()])
ax[1].set_xlabel("y_b")
ax[1].set_ylabel("y_a")
ax[1].set_title("coincidence density")
ax[2].plot(prof["dy"], prof["engine"], label="engine")
ax[2].plot(prof["dy"], prof["closed_form"], "--", label="closed form")
ax[2].set_xlabel("y_a - y_b")
ax[2].legend()
fig.tight_layout()
fig.savefig("tcd.png", dpi=150)
"#;

/// Writes the bundle into `dir`; returns the files written.
pub fn emit(b: &Bundle, dir: &Path, format: Format, plot: bool) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written = Vec::new();
    match format {
        Format::Json => write(dir.join("bundle.json"), &pretty(&bundle_json(b)?), &mut written)?,
        Format::Csv => {
            let config = serde_json::to_value(&b.config).map_err(|e| CliError::Config(e.to_string()))?;
            write(dir.join("config.json"), &pretty(&config), &mut written)?;
            write(dir.join("single_particle.csv"), &single_particle_csv(b), &mut written)?;
            write(dir.join("coincidence.csv"), &coincidence_csv(b), &mut written)?;
            write(dir.join("profile.csv"), &profile_csv(b), &mut written)?;
            write(dir.join("visibility.csv"), &visibility_csv(b), &mut written)?;
            if let Some(mc) = &b.montecarlo {
                let h = &mc.histogram;
                let rows = (0..h.counts.len()).map(|i| {
                    vec![num(h.edges[i]), num(h.edges[i + 1]), h.counts[i].to_string(), num(mc.expected[i])]
                });
                write(dir.join("montecarlo.csv"), &csv(&["bin_lo", "bin_hi", "count", "expected"], rows), &mut written)?;
                let stats = vec![
                    mc.config.samples.to_string(),
                    mc.config.seed.to_string(),
                    h.total.to_string(),
                    mc.dropped.to_string(),
                    mc.scattered.to_string(),
                    mc.records[0].to_string(),
                    mc.records[1].to_string(),
                    mc.records[2].to_string(),
                    num(mc.tv),
                    num(mc.chi2.statistic),
                    mc.chi2.dof.to_string(),
                    mc.chi2.degenerate.to_string(),
                ];
                let header = [
                    "samples", "seed", "total", "dropped", "scattered", "record0", "record1", "record2", "tv", "chi2",
                    "dof", "degenerate",
                ];
                write(dir.join("montecarlo_stats.csv"), &csv(&header, [stats]), &mut written)?;
            }
            if plot {
                write(dir.join("plot.py"), PLOT_SCRIPT, &mut written)?;
            }
        }
    }
    Ok(written)
}

pub fn sweep_csv(spec: &SweepSpec, rows: &[SweepRow]) -> String {
    let header = ["parameter", "value", "effective_w1", "visibility_engine", "visibility_expected", "abs_diff", "status"];
    csv(
        &header,
        rows.iter().map(|r| {
            let mut cells = vec![spec.parameter.name().to_string(), num(r.value)];
            match &r.result {
                Some(p) => cells.extend([num(p.effective_w1), num(p.engine), num(p.expected), num(p.abs_diff())]),
                None => cells.extend(std::iter::repeat_n(String::new(), 4)),
            }
            cells.push(r.status.replace(',', ";"));
            cells
        }),
    )
}

pub fn sweep_json(spec: &SweepSpec, rows: &[SweepRow]) -> Value {
    let rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "value": r.value,
                "effective_w1": r.result.map(|p| p.effective_w1),
                "visibility_engine": r.result.map(|p| p.engine),
                "visibility_expected": r.result.map(|p| p.expected),
                "abs_diff": r.result.map(|p| p.abs_diff()),
                "status": r.status,
            })
        })
        .collect();
    json!({
        "parameter": spec.parameter.name(),
        "start": spec.start,
        "stop": spec.stop,
        "steps": spec.steps,
        "rows": rows,
    })
}

pub fn emit_sweep(spec: &SweepSpec, rows: &[SweepRow], dir: &Path, format: Format) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written = Vec::new();
    match format {
        Format::Csv => write(dir.join("sweep.csv"), &sweep_csv(spec, rows), &mut written)?,
        Format::Json => write(dir.join("sweep.json"), &pretty(&sweep_json(spec, rows)), &mut written)?,
    }
    Ok(written.remove(0))
}

/// Aligned plain-text table for the terminal.
pub fn sweep_table(spec: &SweepSpec, rows: &[SweepRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:>12} {:>14} {:>14} {:>12}  status", spec.parameter.name(), "V(engine)", "V(expected)", "|diff|");
    for r in rows {
        match &r.result {
            Some(p) => {
                let _ = writeln!(s, "{:>12.6} {:>14.10} {:>14.10} {:>12.3e}  {}", r.value, p.engine, p.expected, p.abs_diff(), r.status);
            }
            None => {
                let _ = writeln!(s, "{:>12.6} {:>14} {:>14} {:>12}  {}", r.value, "-", "-", "-", r.status);
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let s = csv(&["y", "rho"], [vec![num(0.5), num(1.0)], vec![num(1e-20), num(2.0)]]);
        assert_eq!(s, "y,rho\n0.5,1.0\n1e-20,2.0\n");
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, 6.5e-7, -2e-3, 123456789.12345679] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }
}
