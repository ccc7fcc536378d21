//! Named experiments that write the data tables behind each standard plot.
//!
//! Shared parameters are pinned: N0 = 1, delta_s = delta_r = 0.1, and for
//! the energy tables theta = 0.6, alpha = 0.5 and sigma = (1, 4, 4). The
//! rate tables use m = 100. Monte-Carlo settings (samples, seed, workers)
//! come from the caller.

use std::path::{Path, PathBuf};

use serde_json::json;

use relay_core::allocator::SweepVariable;
use relay_core::energy::min_bit_energy;
use relay_core::{ChannelParams, Scheme};

use crate::commands::{cmd_energy, cmd_sweep, config_json, estimate_json, timestamp, TableOutput};
use crate::config::{ExperimentConfig, Grid, PowerMode};
use crate::error::CliError;
use crate::format::{round9, sig9};

pub const NAMES: [&str; 9] = [
    "fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig10",
];

/// Channel-quality triples of the rate figures.
pub const SIGMA_TRIPLES: [(f64, f64, f64); 3] = [(1.0, 2.0, 1.0), (1.0, 4.0, 4.0), (1.0, 10.0, 2.0)];

pub const ENERGY_BLOCK_LENGTHS: [u32; 3] = [100, 500, 1000];

const DEFAULT_MIN_BUDGET: usize = 30;

pub fn description(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig1" => "AF rate vs alpha, P_s = P_r = 50",
        "fig2" => "AF rate vs alpha, P_s = P_r = 0.5",
        "fig3" => "repetition DF rate vs alpha, P_s = P_r = 50",
        "fig4" => "repetition DF rate vs alpha, P_s = P_r = 0.5",
        "fig5" => "AF rate vs theta at P = 100, with the direct baseline",
        "fig6" => "AF and repetition DF rate vs theta at P = 1, with the direct baseline",
        "fig7" => "parallel DF rate vs alpha, P_s = P_r = 0.5",
        "fig8" => "AF bit energy vs SNR for m in {100, 500, 1000}",
        "fig10" => "minimum bit energy per scheme and block length",
        _ => return None,
    })
}

fn tag((sd, sr, rd): (f64, f64, f64)) -> String {
    format!("sigma_{sd}_{sr}_{rd}")
}

fn with_sigmas(base: &ExperimentConfig, s: (f64, f64, f64)) -> ExperimentConfig {
    ExperimentConfig {
        channel: ChannelParams {
            sigma_sd: s.0,
            sigma_sr: s.1,
            sigma_rd: s.2,
            n0: 1.0,
        },
        ..base.clone()
    }
}

/// Shared figure parameters; only the Monte-Carlo settings of `mc` survive.
fn figure_base(mc: &ExperimentConfig) -> ExperimentConfig {
    ExperimentConfig {
        samples: mc.samples,
        seed: mc.seed,
        workers: mc.workers,
        ..ExperimentConfig::default()
    }
}

fn alpha_sweep(mc: &ExperimentConfig, scheme: Scheme, p: f64) -> ExperimentConfig {
    ExperimentConfig {
        scheme,
        power: PowerMode::PerNode,
        p_s: p,
        p_r: p,
        variable: SweepVariable::Alpha,
        grid: Grid::Default,
        ..figure_base(mc)
    }
}

fn theta_sweep(mc: &ExperimentConfig, scheme: Scheme, p: f64) -> ExperimentConfig {
    ExperimentConfig {
        scheme,
        power: PowerMode::Total,
        p_total: p,
        variable: SweepVariable::Theta,
        grid: Grid::Default,
        ..figure_base(mc)
    }
}

fn energy_base(mc: &ExperimentConfig, scheme: Scheme, m: u32) -> ExperimentConfig {
    ExperimentConfig {
        scheme,
        m,
        alpha: 0.5,
        power: PowerMode::Total,
        theta: 0.6,
        ..figure_base(mc)
    }
}

/// One output table of a preset.
pub enum Job {
    Sweep(String, ExperimentConfig),
    Energy(String, ExperimentConfig),
    MinTable(String, Vec<ExperimentConfig>),
}

pub fn jobs(name: &str, mc: &ExperimentConfig) -> Result<Vec<Job>, CliError> {
    let per_triple = |prefix: &str, cfg: ExperimentConfig| -> Vec<Job> {
        SIGMA_TRIPLES
            .iter()
            .map(|&s| Job::Sweep(format!("{prefix}_{}.csv", tag(s)), with_sigmas(&cfg, s)))
            .collect()
    };
    Ok(match name {
        "fig1" => per_triple("fig1_af", alpha_sweep(mc, Scheme::Af, 50.0)),
        "fig2" => per_triple("fig2_af", alpha_sweep(mc, Scheme::Af, 0.5)),
        "fig3" => per_triple("fig3_repetition_df", alpha_sweep(mc, Scheme::RepetitionDf, 50.0)),
        "fig4" => per_triple("fig4_repetition_df", alpha_sweep(mc, Scheme::RepetitionDf, 0.5)),
        "fig5" => {
            let mut v = per_triple("fig5_af", theta_sweep(mc, Scheme::Af, 100.0));
            v.push(Job::Sweep(
                "fig5_direct.csv".into(),
                theta_sweep(mc, Scheme::Direct, 100.0),
            ));
            v
        }
        "fig6" => {
            let mut v = per_triple("fig6_af", theta_sweep(mc, Scheme::Af, 1.0));
            v.extend(per_triple(
                "fig6_repetition_df",
                theta_sweep(mc, Scheme::RepetitionDf, 1.0),
            ));
            v.push(Job::Sweep(
                "fig6_direct.csv".into(),
                theta_sweep(mc, Scheme::Direct, 1.0),
            ));
            v
        }
        "fig7" => per_triple("fig7_parallel_df", alpha_sweep(mc, Scheme::ParallelDf, 0.5)),
        "fig8" => ENERGY_BLOCK_LENGTHS
            .iter()
            .map(|&m| Job::Energy(format!("fig8_af_m{m}.csv"), energy_base(mc, Scheme::Af, m)))
            .collect(),
        "fig10" => {
            let budget = if mc.refine_budget > 0 {
                mc.refine_budget
            } else {
                DEFAULT_MIN_BUDGET
            };
            let cfgs = Scheme::ALL
                .iter()
                .flat_map(|&s| {
                    ENERGY_BLOCK_LENGTHS.iter().map(move |&m| ExperimentConfig {
                        refine_budget: budget,
                        ..energy_base(mc, s, m)
                    })
                })
                .collect();
            vec![Job::MinTable("fig10_min_bit_energy.csv".into(), cfgs)]
        }
        other => {
            return Err(CliError::invalid(
                "preset",
                format!("unknown preset `{other}` (expected one of {})", NAMES.join(", ")),
            ))
        }
    })
}

fn min_table(cfgs: &[ExperimentConfig]) -> Result<TableOutput, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "scheme",
        "m",
        "snr_star",
        "eb_n0_min",
        "rate_mean",
        "rate_stderr",
        "evaluations",
    ])
    .expect("in-memory write");
    let mut rows = Vec::new();
    for cfg in cfgs {
        let (ch, sys) = cfg.validated()?;
        let m = min_bit_energy(
            &ch,
            &sys,
            cfg.snr_lo,
            cfg.snr_hi,
            cfg.refine_budget,
            &cfg.monte_carlo(),
        )?;
        w.write_record([
            cfg.scheme.as_str().to_string(),
            cfg.m.to_string(),
            sig9(m.snr_star),
            sig9(m.eb_n0_min),
            sig9(m.rate.mean),
            sig9(m.rate.std_error),
            m.evaluations.to_string(),
        ])
        .expect("in-memory write");
        rows.push(json!({
            "scheme": cfg.scheme.as_str(),
            "m": cfg.m,
            "snr_star": round9(m.snr_star),
            "eb_n0_min": round9(m.eb_n0_min),
            "rate": estimate_json(&m.rate),
            "config": config_json(cfg),
        }));
    }
    Ok(TableOutput {
        csv: String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv"),
        meta: json!({ "command": "min-bit-energy", "rows": rows, "timestamp": timestamp() }),
    })
}

/// Run preset `name` into `dir`; returns the CSV paths written.
pub fn run_preset(name: &str, mc: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    for job in jobs(name, mc)? {
        let (file, table) = match job {
            Job::Sweep(file, cfg) => (file, cmd_sweep(&cfg)?),
            Job::Energy(file, cfg) => (file, cmd_energy(&cfg)?),
            Job::MinTable(file, cfgs) => (file, min_table(&cfgs)?),
        };
        let (csv, _) = table.write(&dir.join(file))?;
        written.push(csv);
    }
    Ok(written)
}
