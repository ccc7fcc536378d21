//! The four experiment commands. Each returns its outputs as strings so the
//! caller decides where they go; CSV bodies never carry timestamps, which
//! keeps them byte-identical across re-runs.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Map, Value};

use relay_core::allocator::{logspace, optimize_variable, sweep, SweepResult, SweepSpec};
use relay_core::energy::{bit_energy_curve, min_bit_energy, BitEnergyCurve};
use relay_core::{estimate_rate, RateEstimate};

use crate::config::{ExperimentConfig, Grid, PowerMode};
use crate::error::CliError;
use crate::format::{round9, sig9};

pub fn timestamp() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// Config echo embedded in every JSON output; feeding it back through
/// [`ExperimentConfig::from_pairs`] reproduces the run.
pub fn config_json(cfg: &ExperimentConfig) -> Value {
    let map: Map<String, Value> = cfg
        .pairs()
        .into_iter()
        .map(|(k, v)| (k.to_string(), Value::String(v)))
        .collect();
    Value::Object(map)
}

pub fn estimate_json(e: &RateEstimate) -> Value {
    json!({
        "mean": round9(e.mean),
        "std_error": round9(e.std_error),
        "n_samples": e.n_samples,
        "seed": e.seed,
    })
}

pub fn cmd_rate(cfg: &ExperimentConfig) -> Result<Value, CliError> {
    let (ch, sys) = cfg.validated()?;
    let est = estimate_rate(&ch, &sys, &cfg.monte_carlo())?;
    Ok(json!({
        "command": "rate",
        "scheme": cfg.scheme.as_str(),
        "estimate": estimate_json(&est),
        "config": config_json(cfg),
        "timestamp": timestamp(),
    }))
}

pub fn cmd_optimize(cfg: &ExperimentConfig) -> Result<Value, CliError> {
    let (ch, sys) = cfg.validated()?;
    let (lo, hi) = cfg.range();
    let opt = optimize_variable(cfg.variable, &ch, &sys, lo, hi, cfg.budget, &cfg.monte_carlo())?;
    Ok(json!({
        "command": "optimize",
        "variable": cfg.variable.as_str(),
        "lo": lo,
        "hi": hi,
        "x": round9(opt.x),
        "estimate": estimate_json(&opt.value),
        "evaluations": opt.evaluations,
        "config": config_json(cfg),
        "timestamp": timestamp(),
    }))
}

/// CSV body and JSON sidecar of a finished command.
#[derive(Debug, Clone)]
pub struct TableOutput {
    pub csv: String,
    pub meta: Value,
}

impl TableOutput {
    /// Write the CSV to `path` and the sidecar next to it with a `.json`
    /// extension. Returns both paths.
    pub fn write(&self, path: &Path) -> Result<(PathBuf, PathBuf), CliError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        std::fs::write(path, &self.csv).map_err(|e| CliError::io(path, e))?;
        let side = path.with_extension("json");
        let body = serde_json::to_string_pretty(&self.meta).expect("json values serialize");
        std::fs::write(&side, body + "\n").map_err(|e| CliError::io(&side, e))?;
        Ok((path.to_path_buf(), side))
    }
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

pub fn sweep_csv(result: &SweepResult) -> String {
    let name = result.meta.variable.as_str();
    csv_string(
        &[
            "variable_name",
            "variable_value",
            "rate_mean",
            "rate_stderr",
            "n_samples",
            "seed",
            "error",
        ],
        result.rows.iter().map(|r| {
            let (mean, se) = r.estimate.map_or((String::new(), String::new()), |e| {
                (sig9(e.mean), sig9(e.std_error))
            });
            vec![
                name.to_string(),
                sig9(r.value),
                mean,
                se,
                result.meta.n_samples.to_string(),
                result.meta.seed.to_string(),
                r.error.clone().unwrap_or_default(),
            ]
        }),
    )
}

pub fn cmd_sweep(cfg: &ExperimentConfig) -> Result<TableOutput, CliError> {
    let grid = cfg.grid_values();
    cfg.channel.validate()?;
    let result = sweep(&SweepSpec {
        variable: cfg.variable,
        grid: grid.clone(),
        channel: cfg.channel,
        base: cfg.system(),
        mc: cfg.monte_carlo(),
    })?;
    let tie = result.tie.map(|t| {
        json!({
            "runner_up": round9(t.runner_up),
            "gap": round9(t.gap),
            "paired_std_error": round9(t.paired_std_error),
            "combined_std_error": round9(t.combined_std_error),
            "statistically_tied": t.statistically_tied,
        })
    });
    let meta = json!({
        "command": "sweep",
        "variable": cfg.variable.as_str(),
        "grid": grid,
        "argmax": result.argmax,
        "best": result.best_row().and_then(|r| r.estimate).map(|e| estimate_json(&e)),
        "tie": tie,
        "failed_rows": result.rows.iter().filter(|r| r.error.is_some()).count(),
        "config": config_json(cfg),
        "timestamp": result.meta.timestamp,
    });
    Ok(TableOutput {
        csv: sweep_csv(&result),
        meta,
    })
}

pub fn energy_grid(cfg: &ExperimentConfig) -> Vec<f64> {
    match cfg.grid {
        Grid::Default => logspace(cfg.snr_lo, cfg.snr_hi, cfg.snr_per_decade),
        ref g => g.values(relay_core::allocator::SweepVariable::Snr, cfg.scheme),
    }
}

pub fn energy_csv(curve: &BitEnergyCurve) -> String {
    csv_string(
        &["snr", "rate_mean", "rate_stderr", "eb_n0", "flagged"],
        curve.points.iter().map(|p| {
            vec![
                sig9(p.snr),
                sig9(p.rate.mean),
                sig9(p.rate.std_error),
                p.eb_n0.map(sig9).unwrap_or_default(),
                p.flagged.to_string(),
            ]
        }),
    )
}

pub fn cmd_energy(cfg: &ExperimentConfig) -> Result<TableOutput, CliError> {
    if cfg.power != PowerMode::Total {
        return Err(CliError::invalid(
            "power",
            "bit-energy analysis needs `power = total` (SNR = p_total / n0)",
        ));
    }
    let (ch, sys) = cfg.validated()?;
    let grid = energy_grid(cfg);
    let mc = cfg.monte_carlo();
    let curve = bit_energy_curve(&ch, &sys, &grid, &mc)?;
    let curve_min = curve.min_point().map(|p| {
        json!({
            "snr": round9(p.snr),
            "eb_n0": p.eb_n0.map(round9),
            "rate": estimate_json(&p.rate),
        })
    });
    let refined = if cfg.refine_budget > 0 && grid.len() > 1 {
        let lo = grid[0];
        let hi = grid[grid.len() - 1];
        let m = min_bit_energy(&ch, &sys, lo, hi, cfg.refine_budget, &mc)?;
        Some(json!({
            "snr_star": round9(m.snr_star),
            "eb_n0_min": round9(m.eb_n0_min),
            "rate": estimate_json(&m.rate),
            "evaluations": m.evaluations,
        }))
    } else {
        None
    };
    let meta = json!({
        "command": "energy",
        "grid_points": grid.len(),
        "curve_min": curve_min,
        "refined_min": refined,
        "unimodal": curve.unimodal,
        "flagged_points": curve.points.iter().filter(|p| p.flagged).count(),
        "config": config_json(cfg),
        "timestamp": timestamp(),
    });
    Ok(TableOutput {
        csv: energy_csv(&curve),
        meta,
    })
}
