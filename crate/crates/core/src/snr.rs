//! Effective per-realization SNRs with channel-estimation error folded into
//! the noise.
//!
//! Every effective SNR is a deterministic gain times `|w|^2` for one of the
//! unit-variance fading surrogates. The gains are computed once per
//! configuration ([`OverlappedGains`], [`ParallelGains`], [`direct_gain`]) and
//! then applied to each draw.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ChannelParams, PilotReading, Scheme, SystemConfig};
use crate::sampler::FadingDraw;

/// AF combining term `xy / (1 + x + y)`.
#[inline]
pub fn f_combine(x: f64, y: f64) -> f64 {
    x * y / (1.0 + x + y)
}

/// AF combining term `(1 + a) b (1 + c) / (1 + c + d)`.
#[inline]
pub fn q_combine(a: f64, b: f64, c: f64, d: f64) -> f64 {
    (1.0 + a) * b * (1.0 + c) / (1.0 + c + d)
}

/// A zero denominator only happens when every power involved is zero.
#[inline]
fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Effective SNRs for one fading draw.
///
/// The overlapped schemes fill `gamma_sd`, `gamma_sr`, `gamma_sd_r` and
/// `gamma_rd`; parallel DF fills the three `*1` fields. Unused fields are zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct EffectiveSnrSet {
    /// Source to destination, relay silent.
    pub gamma_sd: f64,
    /// Source to relay.
    pub gamma_sr: f64,
    /// Source to destination while the relay transmits.
    pub gamma_sd_r: f64,
    /// Relay to destination while the source transmits.
    pub gamma_rd: f64,
    pub gamma_sd1: f64,
    pub gamma_sr1: f64,
    pub gamma_rd1: f64,
}

/// Shorthand for the quantities shared by all gain expressions.
struct Terms {
    m: f64,
    data: f64,
    n0: f64,
    p_s: f64,
    p_r: f64,
    var_sd: f64,
    var_sr: f64,
    var_rd: f64,
    ds: f64,
    dr: f64,
}

impl Terms {
    fn new(channel: &ChannelParams, cfg: &SystemConfig) -> Result<Self> {
        channel.validate()?;
        cfg.validate()?;
        let (p_s, p_r) = cfg.node_powers()?;
        Ok(Self {
            m: f64::from(cfg.m),
            data: f64::from(cfg.m) - 2.0,
            n0: channel.n0,
            p_s,
            p_r,
            var_sd: channel.sigma_sd * channel.sigma_sd,
            var_sr: channel.sigma_sr * channel.sigma_sr,
            var_rd: channel.sigma_rd * channel.sigma_rd,
            ds: cfg.delta_s,
            dr: cfg.delta_r,
        })
    }

    /// Pilot observation variance `var * delta * m * p + n0`.
    fn pilot(&self, var: f64, delta: f64, p: f64) -> f64 {
        var * delta * self.m * p + self.n0
    }

    /// Gain of a single-node link whose data energy is spread over
    /// `data * share` symbols (`share = 1` for the whole data phase).
    fn single_link(&self, var: f64, delta: f64, pilot_delta: f64, p: f64, share: f64) -> f64 {
        let m = self.m;
        let num = delta * (1.0 - delta) * m * m * p * p * var * var / share;
        let den = (1.0 - delta) * m * p * var * self.n0 / share
            + self.data * self.pilot(var, pilot_delta, p) * self.n0;
        ratio(num, den)
    }
}

/// Gains of the four effective SNRs used by AF and repetition DF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverlappedGains {
    pub sd: f64,
    pub sr: f64,
    pub sd_r: f64,
    pub rd: f64,
}

impl OverlappedGains {
    pub fn new(channel: &ChannelParams, cfg: &SystemConfig) -> Result<Self> {
        if !matches!(cfg.scheme, Scheme::Af | Scheme::RepetitionDf) {
            return Err(Error::invalid(
                "scheme",
                format!("overlapped SNRs need af or repetition-df, got {}", cfg.scheme),
            ));
        }
        let t = Terms::new(channel, cfg)?;
        let (m, n0, alpha) = (t.m, t.n0, cfg.alpha);
        let pilot_sd = t.pilot(t.var_sd, t.ds, t.p_s);
        let pilot_rd = t.pilot(t.var_rd, t.dr, t.p_r);

        // Both nodes transmit: the destination sees estimation error from
        // the source and the relay links on top of the receiver noise.
        let shared_den = t.data * pilot_sd * pilot_rd * n0
            + (1.0 - t.dr) * m * t.p_r * t.var_rd * n0 * pilot_sd / alpha
            + (1.0 - t.ds) * m * t.p_s * t.var_sd * n0 * pilot_rd;
        let sd_r_num = t.ds * (1.0 - t.ds) * m * m * t.p_s * t.p_s * t.var_sd * t.var_sd * pilot_rd;
        let rd_num = t.dr * (1.0 - t.dr) * m * m * t.p_r * t.p_r * t.var_rd * t.var_rd * pilot_sd / alpha;

        Ok(Self {
            sd: t.single_link(t.var_sd, t.ds, t.ds, t.p_s, 1.0),
            sr: t.single_link(t.var_sr, t.ds, t.ds, t.p_s, 1.0),
            sd_r: ratio(sd_r_num, shared_den),
            rd: ratio(rd_num, shared_den),
        })
    }

    #[inline]
    pub fn apply(&self, draw: &FadingDraw) -> EffectiveSnrSet {
        let sd = draw.w_sd.norm_sqr();
        EffectiveSnrSet {
            gamma_sd: self.sd * sd,
            gamma_sr: self.sr * draw.w_sr.norm_sqr(),
            gamma_sd_r: self.sd_r * sd,
            gamma_rd: self.rd * draw.w_rd.norm_sqr(),
            ..EffectiveSnrSet::default()
        }
    }
}

/// Gains of the three parallel-DF effective SNRs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParallelGains {
    pub sd1: f64,
    pub sr1: f64,
    pub rd1: f64,
}

impl ParallelGains {
    pub fn new(channel: &ChannelParams, cfg: &SystemConfig) -> Result<Self> {
        if cfg.scheme != Scheme::ParallelDf {
            return Err(Error::invalid(
                "scheme",
                format!("parallel SNRs need parallel-df, got {}", cfg.scheme),
            ));
        }
        let t = Terms::new(channel, cfg)?;
        let source_share = 1.0 - cfg.alpha;
        let relay_pilot_delta = match cfg.pilot_reading {
            PilotReading::Corrected => t.dr,
            PilotReading::Literal => t.ds,
        };
        Ok(Self {
            sd1: t.single_link(t.var_sd, t.ds, t.ds, t.p_s, source_share),
            sr1: t.single_link(t.var_sr, t.ds, t.ds, t.p_s, source_share),
            rd1: t.single_link(t.var_rd, t.dr, relay_pilot_delta, t.p_r, cfg.alpha),
        })
    }

    #[inline]
    pub fn apply(&self, draw: &FadingDraw) -> EffectiveSnrSet {
        EffectiveSnrSet {
            gamma_sd1: self.sd1 * draw.w_sd.norm_sqr(),
            gamma_sr1: self.sr1 * draw.w_sr.norm_sqr(),
            gamma_rd1: self.rd1 * draw.w_rd.norm_sqr(),
            ..EffectiveSnrSet::default()
        }
    }
}

/// Gain of the direct-transmission effective SNR: one source pilot followed
/// by `m - 1` data symbols.
pub fn direct_gain(channel: &ChannelParams, cfg: &SystemConfig) -> Result<f64> {
    if cfg.scheme != Scheme::Direct {
        return Err(Error::invalid(
            "scheme",
            format!("direct SNR needs direct, got {}", cfg.scheme),
        ));
    }
    let t = Terms::new(channel, cfg)?;
    let m = t.m;
    let num = t.ds * (1.0 - t.ds) * m * m * t.p_s * t.p_s * t.var_sd * t.var_sd;
    let den = (1.0 - t.ds) * m * t.p_s * t.var_sd * t.n0 + (m - 1.0) * t.pilot(t.var_sd, t.ds, t.p_s) * t.n0;
    Ok(ratio(num, den))
}

pub fn effective_snrs_overlapped(
    channel: &ChannelParams,
    cfg: &SystemConfig,
    draw: &FadingDraw,
) -> Result<EffectiveSnrSet> {
    Ok(OverlappedGains::new(channel, cfg)?.apply(draw))
}

pub fn effective_snrs_parallel(
    channel: &ChannelParams,
    cfg: &SystemConfig,
    draw: &FadingDraw,
) -> Result<EffectiveSnrSet> {
    Ok(ParallelGains::new(channel, cfg)?.apply(draw))
}
