//! Experiment records in a flat `key = value` text format.
//!
//! Blank lines and lines starting with `#` are ignored. Every key is
//! optional; absent keys take the defaults listed in [`KEYS`]. Floats are
//! written in their shortest round-trip form, so rendering and parsing a
//! record gives back exactly the same record.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use relay_core::allocator::{linspace, logspace, SweepVariable};
use relay_core::{ChannelParams, MonteCarlo, PilotReading, PowerSpec, Scheme, SystemConfig};

use crate::error::CliError;

/// Recognized keys, their defaults and meaning.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("scheme", "af", "af, repetition-df, parallel-df or direct"),
    ("m", "100", "block length in symbols"),
    ("alpha", "0.5", "relay fraction of the data phase"),
    ("delta_s", "0.1", "source pilot energy fraction"),
    ("delta_r", "0.1", "relay pilot energy fraction"),
    (
        "pilot_reading",
        "corrected",
        "corrected or literal relay-pilot term for parallel DF",
    ),
    (
        "power",
        "per-node",
        "per-node (p_s, p_r) or total (p_total, theta)",
    ),
    ("p_s", "0.5", "source power, per-node mode"),
    ("p_r", "0.5", "relay power, per-node mode"),
    ("p_total", "1.0", "total power, total mode"),
    ("theta", "0.6", "source share of the total power"),
    ("sigma_sd", "1.0", "source-destination fading std"),
    ("sigma_sr", "4.0", "source-relay fading std"),
    ("sigma_rd", "4.0", "relay-destination fading std"),
    ("n0", "1.0", "noise variance"),
    ("samples", "200000", "Monte-Carlo draws per rate"),
    ("seed", "1", "master seed"),
    ("workers", "0", "worker threads, 0 = all cores"),
    ("out", "", "output path, empty = command default"),
    ("variable", "alpha", "alpha, theta, delta_s, delta_r, snr or m"),
    (
        "grid",
        "default",
        "default, a comma list, lin:lo:hi:n or log:lo:hi:per_decade",
    ),
    ("lo", "", "optimizer lower bound, empty = variable default"),
    ("hi", "", "optimizer upper bound, empty = variable default"),
    ("budget", "30", "optimizer evaluations"),
    ("snr_lo", "0.0001", "energy SNR range start"),
    ("snr_hi", "100.0", "energy SNR range end"),
    ("snr_per_decade", "30", "energy SNR grid density"),
    (
        "refine_budget",
        "0",
        "extra golden-section evaluations for the bit-energy minimum, 0 = off",
    ),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerMode {
    PerNode,
    Total,
}

impl PowerMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PowerMode::PerNode => "per-node",
            PowerMode::Total => "total",
        }
    }
}

impl FromStr for PowerMode {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "per-node" | "per_node" => Ok(PowerMode::PerNode),
            "total" => Ok(PowerMode::Total),
            other => Err(CliError::invalid(
                "power",
                format!("unknown power mode `{other}`"),
            )),
        }
    }
}

/// Grid of values for a sweep variable.
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Default,
    List(Vec<f64>),
    Lin { lo: f64, hi: f64, n: usize },
    Log { lo: f64, hi: f64, per_decade: usize },
}

impl Grid {
    pub fn values(&self, variable: SweepVariable, scheme: Scheme) -> Vec<f64> {
        match self {
            Grid::Default => variable.default_grid(scheme),
            Grid::List(v) => v.clone(),
            Grid::Lin { lo, hi, n } => linspace(*lo, *hi, *n),
            Grid::Log { lo, hi, per_decade } => logspace(*lo, *hi, *per_decade),
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Grid::Default => f.write_str("default"),
            Grid::List(v) => {
                let parts: Vec<String> = v.iter().map(|x| float(*x)).collect();
                f.write_str(&parts.join(","))
            }
            Grid::Lin { lo, hi, n } => write!(f, "lin:{}:{}:{n}", float(*lo), float(*hi)),
            Grid::Log { lo, hi, per_decade } => {
                write!(f, "log:{}:{}:{per_decade}", float(*lo), float(*hi))
            }
        }
    }
}

impl FromStr for Grid {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let s = s.trim();
        let bad = |why: &str| CliError::invalid("grid", format!("`{s}`: {why}"));
        if s == "default" {
            return Ok(Grid::Default);
        }
        if let Some(rest) = s.strip_prefix("lin:").or_else(|| s.strip_prefix("log:")) {
            let parts: Vec<&str> = rest.split(':').collect();
            let [lo, hi, n] = parts[..] else {
                return Err(bad("expected three fields"));
            };
            let lo = parse_float("grid", lo)?;
            let hi = parse_float("grid", hi)?;
            let n: usize = n.trim().parse().map_err(|_| bad("count is not an integer"))?;
            return Ok(if s.starts_with("lin:") {
                if n == 0 {
                    return Err(bad("needs at least one point"));
                }
                Grid::Lin { lo, hi, n }
            } else {
                if n == 0 || !(lo > 0.0 && lo < hi) {
                    return Err(bad("log grids need 0 < lo < hi and a positive density"));
                }
                Grid::Log {
                    lo,
                    hi,
                    per_decade: n,
                }
            });
        }
        let values = s
            .split(',')
            .map(|v| parse_float("grid", v))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Grid::List(values))
    }
}

/// Everything needed to re-run one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scheme: Scheme,
    pub m: u32,
    pub alpha: f64,
    pub delta_s: f64,
    pub delta_r: f64,
    pub pilot_reading: PilotReading,
    pub power: PowerMode,
    pub p_s: f64,
    pub p_r: f64,
    pub p_total: f64,
    pub theta: f64,
    pub channel: ChannelParams,
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
    pub out: Option<PathBuf>,
    pub variable: SweepVariable,
    pub grid: Grid,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub budget: usize,
    pub snr_lo: f64,
    pub snr_hi: f64,
    pub snr_per_decade: usize,
    pub refine_budget: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::from_pairs(std::iter::empty::<(&str, &str)>()).expect("defaults parse")
    }
}

fn float(x: f64) -> String {
    format!("{x:?}")
}

fn parse_float(field: &'static str, s: &str) -> Result<f64, CliError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| CliError::invalid(field, format!("`{}` is not a number", s.trim())))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::invalid(field, format!("`{}` is not finite", s.trim())))
    }
}

fn parse_int<T: FromStr>(field: &'static str, s: &str) -> Result<T, CliError> {
    s.trim()
        .parse()
        .map_err(|_| CliError::invalid(field, format!("`{}` is not a nonnegative integer", s.trim())))
}

fn parse_opt_float(field: &'static str, s: &str) -> Result<Option<f64>, CliError> {
    if s.trim().is_empty() {
        Ok(None)
    } else {
        parse_float(field, s).map(Some)
    }
}

impl ExperimentConfig {
    /// Defaults overridden by `pairs`; unknown keys are rejected.
    pub fn from_pairs<K, V>(pairs: impl IntoIterator<Item = (K, V)>) -> Result<Self, CliError>
    where
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut map: BTreeMap<&'static str, String> =
            KEYS.iter().map(|(k, d, _)| (*k, d.to_string())).collect();
        for (k, v) in pairs {
            let k = k.as_ref().trim();
            let Some((key, _, _)) = KEYS.iter().find(|(name, _, _)| *name == k) else {
                return Err(CliError::invalid("config", format!("unknown key `{k}`")));
            };
            map.insert(key, v.as_ref().trim().to_string());
        }
        let get = |k: &str| map[k].as_str();
        let core = |e: relay_core::Error| CliError::from(e);
        Ok(Self {
            scheme: get("scheme").parse().map_err(core)?,
            m: parse_int("m", get("m"))?,
            alpha: parse_float("alpha", get("alpha"))?,
            delta_s: parse_float("delta_s", get("delta_s"))?,
            delta_r: parse_float("delta_r", get("delta_r"))?,
            pilot_reading: get("pilot_reading").parse().map_err(core)?,
            power: get("power").parse()?,
            p_s: parse_float("p_s", get("p_s"))?,
            p_r: parse_float("p_r", get("p_r"))?,
            p_total: parse_float("p_total", get("p_total"))?,
            theta: parse_float("theta", get("theta"))?,
            channel: ChannelParams {
                sigma_sd: parse_float("sigma_sd", get("sigma_sd"))?,
                sigma_sr: parse_float("sigma_sr", get("sigma_sr"))?,
                sigma_rd: parse_float("sigma_rd", get("sigma_rd"))?,
                n0: parse_float("n0", get("n0"))?,
            },
            samples: parse_int("samples", get("samples"))?,
            seed: parse_int("seed", get("seed"))?,
            workers: parse_int("workers", get("workers"))?,
            out: Some(get("out")).filter(|s| !s.is_empty()).map(PathBuf::from),
            variable: get("variable").parse().map_err(core)?,
            grid: get("grid").parse()?,
            lo: parse_opt_float("lo", get("lo"))?,
            hi: parse_opt_float("hi", get("hi"))?,
            budget: parse_int("budget", get("budget"))?,
            snr_lo: parse_float("snr_lo", get("snr_lo"))?,
            snr_hi: parse_float("snr_hi", get("snr_hi"))?,
            snr_per_decade: parse_int("snr_per_decade", get("snr_per_decade"))?,
            refine_budget: parse_int("refine_budget", get("refine_budget"))?,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::invalid(
                    "config",
                    format!("line {}: expected `key = value`", i + 1),
                ));
            };
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        Self::from_pairs(pairs)
    }

    /// Key-value pairs in schema order.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let opt = |x: Option<f64>| x.map(float).unwrap_or_default();
        vec![
            ("scheme", self.scheme.as_str().to_string()),
            ("m", self.m.to_string()),
            ("alpha", float(self.alpha)),
            ("delta_s", float(self.delta_s)),
            ("delta_r", float(self.delta_r)),
            ("pilot_reading", self.pilot_reading.as_str().to_string()),
            ("power", self.power.as_str().to_string()),
            ("p_s", float(self.p_s)),
            ("p_r", float(self.p_r)),
            ("p_total", float(self.p_total)),
            ("theta", float(self.theta)),
            ("sigma_sd", float(self.channel.sigma_sd)),
            ("sigma_sr", float(self.channel.sigma_sr)),
            ("sigma_rd", float(self.channel.sigma_rd)),
            ("n0", float(self.channel.n0)),
            ("samples", self.samples.to_string()),
            ("seed", self.seed.to_string()),
            ("workers", self.workers.to_string()),
            (
                "out",
                self.out
                    .as_ref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_default(),
            ),
            ("variable", self.variable.as_str().to_string()),
            ("grid", self.grid.to_string()),
            ("lo", opt(self.lo)),
            ("hi", opt(self.hi)),
            ("budget", self.budget.to_string()),
            ("snr_lo", float(self.snr_lo)),
            ("snr_hi", float(self.snr_hi)),
            ("snr_per_decade", self.snr_per_decade.to_string()),
            ("refine_budget", self.refine_budget.to_string()),
        ]
    }

    pub fn render(&self) -> String {
        let mut s = String::from("# relaysim experiment\n");
        for (k, v) in self.pairs() {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        }
        s
    }

    pub fn power_spec(&self) -> PowerSpec {
        match self.power {
            PowerMode::PerNode => PowerSpec::PerNode {
                p_s: self.p_s,
                p_r: self.p_r,
            },
            PowerMode::Total => PowerSpec::Total {
                p_total: self.p_total,
                theta: self.theta,
            },
        }
    }

    pub fn system(&self) -> SystemConfig {
        SystemConfig {
            m: self.m,
            alpha: self.alpha,
            scheme: self.scheme,
            delta_s: self.delta_s,
            delta_r: self.delta_r,
            power: self.power_spec(),
            pilot_reading: self.pilot_reading,
        }
    }

    pub fn monte_carlo(&self) -> MonteCarlo {
        MonteCarlo::new(self.samples, self.seed).with_workers(self.workers)
    }

    /// Channel and system configuration, both validated.
    pub fn validated(&self) -> Result<(ChannelParams, SystemConfig), CliError> {
        self.channel.validate()?;
        let cfg = self.system();
        cfg.validate()?;
        if self.samples == 0 {
            return Err(CliError::invalid("samples", "must be positive"));
        }
        Ok((self.channel, cfg))
    }

    pub fn grid_values(&self) -> Vec<f64> {
        self.grid.values(self.variable, self.scheme)
    }

    /// Optimizer range: explicit bounds, or the admissible range of the
    /// variable.
    pub fn range(&self) -> (f64, f64) {
        let (lo, hi) = match self.variable {
            SweepVariable::Alpha => match self.scheme {
                Scheme::ParallelDf => (0.01, 0.99),
                _ => (0.01, 0.5),
            },
            SweepVariable::Theta => (0.01, 1.0),
            SweepVariable::DeltaS | SweepVariable::DeltaR => (0.01, 0.99),
            SweepVariable::Snr => (self.snr_lo, self.snr_hi),
            SweepVariable::M => (3.0, 1000.0),
        };
        (self.lo.unwrap_or(lo), self.hi.unwrap_or(hi))
    }
}
