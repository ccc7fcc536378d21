//! Command-line driver for the relay-rate engine: single rates, parameter
//! sweeps, scalar optimization, bit-energy curves and figure presets.

pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod presets;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{ExperimentConfig, Grid, PowerMode};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "relaysim",
    version,
    about = "Achievable rates of relaying under imperfect channel knowledge"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate one rate and print it as JSON.
    Rate(RunArgs),
    /// Sweep one variable over a grid into a CSV with a JSON sidecar.
    Sweep(RunArgs),
    /// Maximize the rate over one variable.
    Optimize(RunArgs),
    /// Bit energy against SNR into a CSV with a JSON minimum summary.
    Energy(RunArgs),
    /// Regenerate a figure's data tables into a directory.
    Preset {
        /// fig1 ... fig8, fig10, or `list`
        name: String,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Print the resolved experiment record, ready to save and re-run.
    Config(RunArgs),
    /// Print every config key with its default and meaning.
    Schema,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Experiment file in `key = value` form; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub delta_s: Option<f64>,
    #[arg(long)]
    pub delta_r: Option<f64>,
    #[arg(long)]
    pub pilot_reading: Option<String>,
    #[arg(long)]
    pub sigma_sd: Option<f64>,
    #[arg(long)]
    pub sigma_sr: Option<f64>,
    #[arg(long)]
    pub sigma_rd: Option<f64>,
    #[arg(long)]
    pub n0: Option<f64>,
    /// Source power; selects per-node power mode.
    #[arg(long)]
    pub ps: Option<f64>,
    /// Relay power; selects per-node power mode.
    #[arg(long)]
    pub pr: Option<f64>,
    /// Total power; selects total power mode.
    #[arg(long)]
    pub p_total: Option<f64>,
    #[arg(long)]
    pub variable: Option<String>,
    /// default, a comma list, lin:lo:hi:n or log:lo:hi:per_decade
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub hi: Option<f64>,
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub snr_lo: Option<f64>,
    #[arg(long)]
    pub snr_hi: Option<f64>,
    #[arg(long)]
    pub snr_per_decade: Option<usize>,
    #[arg(long)]
    pub refine_budget: Option<usize>,
}

impl RunArgs {
    /// File (or defaults) first, then every flag that was given.
    pub fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::invalid("config", format!("{}: {e}", path.display())))?;
                ExperimentConfig::parse(&text)?
            }
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $field:expr),* $(,)?) => {
                $(if let Some(v) = self.$flag.clone() { $field = v; })*
            };
        }
        set! {
            seed => c.seed,
            samples => c.samples,
            workers => c.workers,
            m => c.m,
            alpha => c.alpha,
            theta => c.theta,
            delta_s => c.delta_s,
            delta_r => c.delta_r,
            sigma_sd => c.channel.sigma_sd,
            sigma_sr => c.channel.sigma_sr,
            sigma_rd => c.channel.sigma_rd,
            n0 => c.channel.n0,
            budget => c.budget,
            snr_lo => c.snr_lo,
            snr_hi => c.snr_hi,
            snr_per_decade => c.snr_per_decade,
            refine_budget => c.refine_budget,
        }
        if let Some(out) = &self.out {
            c.out = Some(out.clone());
        }
        if let Some(s) = &self.scheme {
            c.scheme = s.parse()?;
        }
        if let Some(s) = &self.pilot_reading {
            c.pilot_reading = s.parse()?;
        }
        if let Some(v) = &self.variable {
            c.variable = v.parse()?;
        }
        if let Some(g) = &self.grid {
            c.grid = g.parse()?;
        }
        if self.lo.is_some() {
            c.lo = self.lo;
        }
        if self.hi.is_some() {
            c.hi = self.hi;
        }
        if self.ps.is_some() || self.pr.is_some() {
            c.power = PowerMode::PerNode;
            c.p_s = self.ps.unwrap_or(c.p_s);
            c.p_r = self.pr.unwrap_or(c.p_r);
        }
        if let Some(p) = self.p_total {
            c.power = PowerMode::Total;
            c.p_total = p;
        }
        Ok(c)
    }
}

fn write_json(value: &serde_json::Value, out: Option<&PathBuf>) -> Result<String, CliError> {
    let body = serde_json::to_string_pretty(value).expect("json values serialize") + "\n";
    if let Some(path) = out {
        std::fs::write(path, &body).map_err(|e| CliError::io(path, e))?;
    }
    Ok(body)
}

/// Run one invocation; returns what should go to stdout.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Rate(args) => {
            let cfg = args.resolve()?;
            write_json(&commands::cmd_rate(&cfg)?, cfg.out.as_ref())
        }
        Command::Optimize(args) => {
            let cfg = args.resolve()?;
            write_json(&commands::cmd_optimize(&cfg)?, cfg.out.as_ref())
        }
        Command::Sweep(args) => {
            let cfg = args.resolve()?;
            let table = commands::cmd_sweep(&cfg)?;
            let path = cfg.out.clone().unwrap_or_else(|| "sweep.csv".into());
            let (csv, side) = table.write(&path)?;
            Ok(format!("{}\n{}\n", csv.display(), side.display()))
        }
        Command::Energy(args) => {
            let cfg = args.resolve()?;
            let table = commands::cmd_energy(&cfg)?;
            let path = cfg.out.clone().unwrap_or_else(|| "energy.csv".into());
            let (csv, side) = table.write(&path)?;
            Ok(format!("{}\n{}\n", csv.display(), side.display()))
        }
        Command::Preset { name, .. } if name == "list" => Ok(presets::NAMES
            .iter()
            .map(|n| format!("{n:6} {}\n", presets::description(n).unwrap_or_default()))
            .collect()),
        Command::Preset { name, args } => {
            let cfg = args.resolve()?;
            let dir = cfg.out.clone().unwrap_or_else(|| format!("preset-{name}").into());
            let files = presets::run_preset(name, &cfg, &dir)?;
            Ok(files.iter().map(|p| format!("{}\n", p.display())).collect())
        }
        Command::Config(args) => Ok(args.resolve()?.render()),
        Command::Schema => Ok(config::KEYS
            .iter()
            .map(|(k, d, what)| format!("{k} = {d}  # {what}\n"))
            .collect()),
    }
}
