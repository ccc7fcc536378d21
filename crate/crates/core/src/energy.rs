//! Normalized bit energy `Eb/N0 = SNR / rate(SNR)` in the low-power regime.
//!
//! SNR is total power over noise, `P / n0`, so the configuration template
//! must carry a total-power spec. Rates that cannot be told apart from zero
//! (mean within four standard errors of 0) are flagged instead of turning
//! Monte-Carlo noise into enormous bit energies.

use serde::Serialize;

use crate::allocator::{check_grid, SweepVariable};
use crate::error::{Error, Result};
use crate::model::{ChannelParams, PowerSpec, SystemConfig};
use crate::optimize::{optimize_scalar, Scored};
use crate::rate::{estimate_rate, MonteCarlo, RateEstimate};

/// Points per decade of the default SNR grid.
pub const DEFAULT_POINTS_PER_DECADE: usize = 30;

const RELIABLE_STD_ERRORS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BitEnergyPoint {
    pub snr: f64,
    pub rate: RateEstimate,
    /// `None` when the point is flagged.
    pub eb_n0: Option<f64>,
    pub flagged: bool,
}

impl BitEnergyPoint {
    fn new(snr: f64, rate: RateEstimate) -> Self {
        let reliable = rate.mean > RELIABLE_STD_ERRORS * rate.std_error && rate.mean > 0.0;
        Self {
            snr,
            rate,
            eb_n0: reliable.then(|| snr / rate.mean),
            flagged: !reliable,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BitEnergyCurve {
    pub points: Vec<BitEnergyPoint>,
    /// Index of the smallest unflagged bit energy.
    pub min_index: Option<usize>,
    /// Unflagged bit energies fall up to the minimum and rise after it.
    pub unimodal: bool,
}

impl BitEnergyCurve {
    pub fn min_point(&self) -> Option<&BitEnergyPoint> {
        self.min_index.map(|i| &self.points[i])
    }

    fn from_points(points: Vec<BitEnergyPoint>) -> Self {
        let mut min_index = None;
        let mut min_eb = f64::INFINITY;
        for (i, p) in points.iter().enumerate() {
            if let Some(eb) = p.eb_n0 {
                if eb < min_eb {
                    min_eb = eb;
                    min_index = Some(i);
                }
            }
        }
        let unimodal = min_index.is_none_or(|k| {
            let ebs: Vec<(usize, f64)> = points
                .iter()
                .enumerate()
                .filter_map(|(i, p)| p.eb_n0.map(|e| (i, e)))
                .collect();
            ebs.windows(2).all(|w| {
                let ((i, a), (_, b)) = (w[0], w[1]);
                if i < k {
                    b <= a
                } else {
                    b >= a
                }
            })
        });
        Self {
            points,
            min_index,
            unimodal,
        }
    }
}

fn check_template(template: &SystemConfig) -> Result<()> {
    match template.power {
        PowerSpec::Total { .. } => template.validate(),
        PowerSpec::PerNode { .. } => Err(Error::invalid(
            "power",
            "bit-energy analysis needs a total-power spec (SNR = P / n0)",
        )),
    }
}

fn rate_at_snr(
    channel: &ChannelParams,
    template: &SystemConfig,
    snr: f64,
    mc: &MonteCarlo,
) -> Result<RateEstimate> {
    let (ch, cfg) = SweepVariable::Snr.apply(snr, channel, template)?;
    estimate_rate(&ch, &cfg, mc)
}

/// Bit energy at every SNR of `snr_grid`, all on the same draw stream.
pub fn bit_energy_curve(
    channel: &ChannelParams,
    template: &SystemConfig,
    snr_grid: &[f64],
    mc: &MonteCarlo,
) -> Result<BitEnergyCurve> {
    check_template(template)?;
    check_grid(snr_grid)?;
    if let Some(bad) = snr_grid.iter().find(|&&s| s <= 0.0) {
        return Err(Error::invalid("snr", format!("{bad} must be positive")));
    }
    let points = snr_grid
        .iter()
        .map(|&snr| Ok(BitEnergyPoint::new(snr, rate_at_snr(channel, template, snr, mc)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(BitEnergyCurve::from_points(points))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinBitEnergy {
    pub snr_star: f64,
    pub eb_n0_min: f64,
    pub rate: RateEstimate,
    pub evaluations: usize,
}

#[derive(Clone)]
struct Candidate(BitEnergyPoint);

impl Scored for Candidate {
    fn score(&self) -> f64 {
        self.0.eb_n0.map_or(f64::NEG_INFINITY, |e| -e)
    }
}

/// Minimize bit energy over `[snr_lo, snr_hi]` for an arbitrary rate
/// function: log-spaced grid, then golden section on `log10(snr)`.
pub fn minimize_bit_energy<F>(mut rate_at: F, snr_lo: f64, snr_hi: f64, budget: usize) -> Result<MinBitEnergy>
where
    F: FnMut(f64) -> Result<RateEstimate>,
{
    if !(snr_lo > 0.0 && snr_hi.is_finite() && snr_lo < snr_hi) {
        return Err(Error::invalid(
            "snr_range",
            format!("[{snr_lo}, {snr_hi}] is not a positive interval"),
        ));
    }
    if budget < 5 {
        return Err(Error::invalid("budget", format!("{budget} is below 5")));
    }
    let (lo, hi) = (snr_lo.log10(), snr_hi.log10());
    let to_snr = |e: f64| {
        if e == lo {
            snr_lo
        } else if e == hi {
            snr_hi
        } else {
            10f64.powf(e)
        }
    };
    let best = optimize_scalar(
        |e| {
            let snr = to_snr(e);
            Ok(Candidate(BitEnergyPoint::new(snr, rate_at(snr)?)))
        },
        lo,
        hi,
        budget,
    )?;
    let point = best.value.0;
    let eb = point.eb_n0.ok_or_else(|| {
        Error::Numerical("every rate in the SNR range is indistinguishable from zero".into())
    })?;
    Ok(MinBitEnergy {
        snr_star: point.snr,
        eb_n0_min: eb,
        rate: point.rate,
        evaluations: best.evaluations,
    })
}

/// Minimum bit energy of a scheme over `[snr_lo, snr_hi]`.
pub fn min_bit_energy(
    channel: &ChannelParams,
    template: &SystemConfig,
    snr_lo: f64,
    snr_hi: f64,
    budget: usize,
    mc: &MonteCarlo,
) -> Result<MinBitEnergy> {
    check_template(template)?;
    minimize_bit_energy(
        |snr| rate_at_snr(channel, template, snr, mc),
        snr_lo,
        snr_hi,
        budget,
    )
}
