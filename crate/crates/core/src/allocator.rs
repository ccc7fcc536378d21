//! Sweeps and optimization of the allocation knobs: relay fraction, power
//! split, training fractions, total SNR and block length.
//!
//! Every point of a sweep consumes the same draw stream (the master seed),
//! so neighbouring rates differ only through the configuration and the
//! resulting curves are smooth.

use std::fmt;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ChannelParams, PowerSpec, Scheme, SystemConfig};
use crate::optimize::{optimize_scalar, Optimum};
use crate::rate::{estimate_rate, paired_gap, MonteCarlo, RateEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Alpha,
    Theta,
    DeltaS,
    DeltaR,
    Snr,
    M,
}

impl SweepVariable {
    pub const ALL: [SweepVariable; 6] = [
        SweepVariable::Alpha,
        SweepVariable::Theta,
        SweepVariable::DeltaS,
        SweepVariable::DeltaR,
        SweepVariable::Snr,
        SweepVariable::M,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepVariable::Alpha => "alpha",
            SweepVariable::Theta => "theta",
            SweepVariable::DeltaS => "delta_s",
            SweepVariable::DeltaR => "delta_r",
            SweepVariable::Snr => "snr",
            SweepVariable::M => "m",
        }
    }

    /// Set this variable to `value` in a copy of the configuration.
    ///
    /// `theta` and `snr` act on a total-power specification; `snr` sets the
    /// total power to `value * n0`.
    pub fn apply(
        self,
        value: f64,
        channel: &ChannelParams,
        cfg: &SystemConfig,
    ) -> Result<(ChannelParams, SystemConfig)> {
        let mut cfg = *cfg;
        match self {
            SweepVariable::Alpha => cfg.alpha = value,
            SweepVariable::DeltaS => cfg.delta_s = value,
            SweepVariable::DeltaR => cfg.delta_r = value,
            SweepVariable::Theta => match cfg.power {
                PowerSpec::Total { p_total, .. } => {
                    cfg.power = PowerSpec::Total {
                        p_total,
                        theta: value,
                    }
                }
                PowerSpec::PerNode { .. } => {
                    return Err(Error::invalid("theta", "sweeping theta needs a total-power spec"))
                }
            },
            SweepVariable::Snr => match cfg.power {
                PowerSpec::Total { theta, .. } => {
                    if !(value.is_finite() && value > 0.0) {
                        return Err(Error::invalid("snr", format!("{value} must be positive")));
                    }
                    cfg.power = PowerSpec::Total {
                        p_total: value * channel.n0,
                        theta,
                    }
                }
                PowerSpec::PerNode { .. } => {
                    return Err(Error::invalid("snr", "sweeping snr needs a total-power spec"))
                }
            },
            SweepVariable::M => {
                if value.fract() != 0.0 || !(1.0..=f64::from(u32::MAX)).contains(&value) {
                    return Err(Error::invalid("m", format!("{value} is not a block length")));
                }
                cfg.m = value as u32;
            }
        }
        channel.validate()?;
        cfg.validate()?;
        Ok((*channel, cfg))
    }

    /// Default grid for `scheme`: 25 relay fractions from 0.02 to the upper
    /// limit, 21 power splits on [0.05, 1], 19 training fractions on
    /// [0.05, 0.95], 30 SNR points per decade on [1e-4, 1e2], and a handful
    /// of block lengths.
    pub fn default_grid(self, scheme: Scheme) -> Vec<f64> {
        match self {
            SweepVariable::Alpha => {
                let hi = match scheme {
                    Scheme::ParallelDf => 0.98,
                    _ => 0.5,
                };
                linspace(0.02, hi, 25)
            }
            SweepVariable::Theta => linspace(0.05, 1.0, 21),
            SweepVariable::DeltaS | SweepVariable::DeltaR => linspace(0.05, 0.95, 19),
            SweepVariable::Snr => logspace(1e-4, 1e2, 30),
            SweepVariable::M => vec![10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0],
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        SweepVariable::ALL
            .into_iter()
            .find(|v| v.as_str() == key)
            .ok_or_else(|| {
                Error::invalid(
                    "variable",
                    format!(
                        "unknown sweep variable `{s}` (expected alpha, theta, delta_s, delta_r, snr or m)"
                    ),
                )
            })
    }
}

/// `n` evenly spaced points on `[lo, hi]`, endpoints exact.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i + 1 == n {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Log-spaced points on `[lo, hi]` with `per_decade` points per decade.
pub fn logspace(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    let n = ((b - a) * per_decade as f64).round() as usize + 1;
    linspace(a, b, n.max(1))
        .into_iter()
        .enumerate()
        .map(|(i, e)| match i {
            0 => lo,
            _ if i + 1 == n => hi,
            _ => 10f64.powf(e),
        })
        .collect()
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("grid", "is empty"));
    }
    if let Some(bad) = grid.iter().find(|v| !v.is_finite()) {
        return Err(Error::invalid("grid", format!("contains non-finite value {bad}")));
    }
    if let Some(w) = grid.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::invalid(
            "grid",
            format!("must be strictly increasing ({} is followed by {})", w[0], w[1]),
        ));
    }
    Ok(())
}

pub(crate) fn unix_timestamp() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    pub channel: ChannelParams,
    pub base: SystemConfig,
    pub mc: MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub estimate: Option<RateEstimate>,
    pub error: Option<String>,
}

/// How clearly the best grid point beats the runner-up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TieCheck {
    pub runner_up: f64,
    pub gap: f64,
    /// Standard error of the gap on the shared draws.
    pub paired_std_error: f64,
    /// `hypot` of the two rows' standard errors.
    pub combined_std_error: f64,
    /// The gap does not exceed one paired standard error.
    pub statistically_tied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepMeta {
    pub variable: SweepVariable,
    pub channel: ChannelParams,
    pub base: SystemConfig,
    pub n_samples: u64,
    pub seed: u64,
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub argmax: Option<f64>,
    pub tie: Option<TieCheck>,
    pub meta: SweepMeta,
}

impl SweepResult {
    pub fn best_row(&self) -> Option<&SweepRow> {
        let x = self.argmax?;
        self.rows.iter().find(|r| r.value == x)
    }
}

/// Evaluate the rate at every grid point. Invalid points become row-level
/// errors; only a malformed grid aborts the sweep.
pub fn sweep(spec: &SweepSpec) -> Result<SweepResult> {
    check_grid(&spec.grid)?;
    spec.channel.validate()?;

    let rows: Vec<SweepRow> = spec
        .grid
        .iter()
        .map(|&value| {
            let outcome = spec
                .variable
                .apply(value, &spec.channel, &spec.base)
                .and_then(|(ch, cfg)| estimate_rate(&ch, &cfg, &spec.mc));
            match outcome {
                Ok(est) => SweepRow {
                    value,
                    estimate: Some(est),
                    error: None,
                },
                Err(e) => SweepRow {
                    value,
                    estimate: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let ranked = rank(&rows);
    let argmax = ranked.first().map(|&(x, _)| x);
    let tie = match ranked.as_slice() {
        [(best, best_est), (second, second_est), ..] => {
            let (ch_a, cfg_a) = spec.variable.apply(*best, &spec.channel, &spec.base)?;
            let (ch_b, cfg_b) = spec.variable.apply(*second, &spec.channel, &spec.base)?;
            let gap = paired_gap((&ch_a, &cfg_a), (&ch_b, &cfg_b), &spec.mc)?;
            Some(TieCheck {
                runner_up: *second,
                gap: best_est.mean - second_est.mean,
                paired_std_error: gap.std_error,
                combined_std_error: best_est.std_error.hypot(second_est.std_error),
                statistically_tied: best_est.mean - second_est.mean <= gap.std_error,
            })
        }
        _ => None,
    };

    Ok(SweepResult {
        rows,
        argmax,
        tie,
        meta: SweepMeta {
            variable: spec.variable,
            channel: spec.channel,
            base: spec.base,
            n_samples: spec.mc.n_samples,
            seed: spec.mc.seed,
            timestamp: unix_timestamp(),
        },
    })
}

/// Successful rows by decreasing mean; equal means keep grid order, so the
/// smaller grid value ranks first.
fn rank(rows: &[SweepRow]) -> Vec<(f64, RateEstimate)> {
    let mut ok: Vec<(f64, RateEstimate)> = rows
        .iter()
        .filter_map(|r| r.estimate.map(|e| (r.value, e)))
        .collect();
    ok.sort_by(|a, b| b.1.mean.total_cmp(&a.1.mean));
    ok
}

/// Refine one allocation knob on `[lo, hi]` with [`optimize_scalar`].
pub fn optimize_variable(
    variable: SweepVariable,
    channel: &ChannelParams,
    base: &SystemConfig,
    lo: f64,
    hi: f64,
    budget: usize,
    mc: &MonteCarlo,
) -> Result<Optimum<RateEstimate>> {
    if variable == SweepVariable::M {
        return Err(Error::invalid(
            "variable",
            "block length is integral; sweep it instead",
        ));
    }
    // Probe the endpoints first so a bad range is reported as such.
    for x in [lo, hi] {
        variable.apply(x, channel, base)?;
    }
    optimize_scalar(
        |x| {
            let (ch, cfg) = variable.apply(x, channel, base)?;
            estimate_rate(&ch, &cfg, mc)
        },
        lo,
        hi,
        budget,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainingGridPoint {
    pub delta_s: f64,
    pub delta_r: f64,
    pub estimate: Option<RateEstimate>,
    pub error: Option<String>,
}

/// Joint `(delta_s, delta_r)` grid pass; returns all points and the index of
/// the best one.
pub fn training_grid(
    channel: &ChannelParams,
    base: &SystemConfig,
    delta_s: &[f64],
    delta_r: &[f64],
    mc: &MonteCarlo,
) -> Result<(Vec<TrainingGridPoint>, Option<usize>)> {
    check_grid(delta_s)?;
    check_grid(delta_r)?;
    let mut points = Vec::with_capacity(delta_s.len() * delta_r.len());
    let mut best: Option<(usize, f64)> = None;
    for &ds in delta_s {
        for &dr in delta_r {
            let cfg = SystemConfig {
                delta_s: ds,
                delta_r: dr,
                ..*base
            };
            let point = match cfg.validate().and_then(|_| estimate_rate(channel, &cfg, mc)) {
                Ok(est) => {
                    if best.is_none_or(|(_, m)| est.mean > m) {
                        best = Some((points.len(), est.mean));
                    }
                    TrainingGridPoint {
                        delta_s: ds,
                        delta_r: dr,
                        estimate: Some(est),
                        error: None,
                    }
                }
                Err(e) => TrainingGridPoint {
                    delta_s: ds,
                    delta_r: dr,
                    estimate: None,
                    error: Some(e.to_string()),
                },
            };
            points.push(point);
        }
    }
    Ok((points, best.map(|(i, _)| i)))
}
