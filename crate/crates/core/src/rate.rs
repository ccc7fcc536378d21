//! Monte-Carlo estimation of the achievable rates.
//!
//! Each scheme is reduced to a small vector of per-draw components whose
//! expectations are estimated jointly on one draw stream. The rate is then a
//! function of the component means: a weighted sum, with the repetition-DF
//! and parallel-DF minima taken over the estimated expectations rather than
//! per draw. The reported standard error linearizes that function at the
//! estimate (the active branch of each minimum) and uses the full sample
//! covariance of the components.
//!
//! Estimates are bit-reproducible: the stream is split into fixed blocks
//! (see [`crate::sampler`]), block statistics are computed independently and
//! merged strictly in block order, whatever the worker count.

use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ChannelParams, Scheme, SystemConfig};
use crate::sampler::{FadingDraw, Sampler, BLOCK_LEN};
use crate::snr::{direct_gain, f_combine, q_combine, EffectiveSnrSet, OverlappedGains, ParallelGains};

pub const DEFAULT_SAMPLES: u64 = 200_000;

/// Widest component vector any integrand (or a paired comparison) uses.
const MAX_COMPONENTS: usize = 6;

#[inline]
fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / LN_2
}

/// Monte-Carlo run settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarlo {
    pub n_samples: u64,
    pub seed: u64,
    /// Worker threads; 0 means all available cores. Never affects results.
    pub workers: usize,
}

impl Default for MonteCarlo {
    fn default() -> Self {
        Self {
            n_samples: DEFAULT_SAMPLES,
            seed: 1,
            workers: 0,
        }
    }
}

impl MonteCarlo {
    pub fn new(n_samples: u64, seed: u64) -> Self {
        Self {
            n_samples,
            seed,
            workers: 0,
        }
    }

    pub fn with_workers(self, workers: usize) -> Self {
        Self { workers, ..self }
    }

    fn effective_workers(&self) -> usize {
        if self.workers == 0 {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        } else {
            self.workers
        }
    }
}

/// Estimated rate in bits per symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
}

/// Estimated difference between two rates evaluated on the same draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairedGap {
    /// `rate(a) - rate(b)`.
    pub diff: f64,
    /// Standard error of `diff`, accounting for the shared draws.
    pub std_error: f64,
    pub a: RateEstimate,
    pub b: RateEstimate,
}

/// Running mean and co-moment matrix of a component vector.
#[derive(Debug, Clone, Copy)]
struct Moments {
    n: u64,
    width: usize,
    mean: [f64; MAX_COMPONENTS],
    comoment: [[f64; MAX_COMPONENTS]; MAX_COMPONENTS],
}

#[allow(clippy::needless_range_loop)]
impl Moments {
    fn new(width: usize) -> Self {
        Self {
            n: 0,
            width,
            mean: [0.0; MAX_COMPONENTS],
            comoment: [[0.0; MAX_COMPONENTS]; MAX_COMPONENTS],
        }
    }

    #[inline]
    fn push(&mut self, x: &[f64; MAX_COMPONENTS]) {
        self.n += 1;
        let n = self.n as f64;
        let w = self.width;
        let mut before = [0.0; MAX_COMPONENTS];
        for i in 0..w {
            before[i] = x[i] - self.mean[i];
            self.mean[i] += before[i] / n;
        }
        for i in 0..w {
            for j in 0..w {
                self.comoment[i][j] += before[i] * (x[j] - self.mean[j]);
            }
        }
    }

    /// Pairwise (Chan et al.) combination.
    fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let total = na + nb;
        let w = self.width;
        let mut delta = [0.0; MAX_COMPONENTS];
        for i in 0..w {
            delta[i] = other.mean[i] - self.mean[i];
        }
        for i in 0..w {
            for j in 0..w {
                self.comoment[i][j] += other.comoment[i][j] + delta[i] * delta[j] * na * nb / total;
            }
        }
        for i in 0..w {
            self.mean[i] += delta[i] * nb / total;
        }
        self.n += other.n;
    }

    /// Standard error of `sum_i weight_i * mean_i`.
    fn std_error(&self, weights: &[f64]) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let mut var = 0.0;
        for (i, wi) in weights.iter().enumerate() {
            for (j, wj) in weights.iter().enumerate() {
                var += wi * wj * self.comoment[i][j];
            }
        }
        var /= (self.n - 1) as f64;
        (var.max(0.0) / self.n as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Af {
        gains: OverlappedGains,
        direct_weight: f64,
        coop_weight: f64,
    },
    RepetitionDf {
        gains: OverlappedGains,
        direct_weight: f64,
        coop_weight: f64,
    },
    ParallelDf {
        gains: ParallelGains,
        source_weight: f64,
        relay_weight: f64,
    },
    Direct {
        gain: f64,
        weight: f64,
    },
}

/// Per-draw components of one scheme's rate and the map from their
/// expectations to the rate.
///
/// Components by scheme:
/// * AF: the full bracketed integrand scaled by `1/m`.
/// * repetition DF: `log2(1+g_sd)`, the source-relay term and the combined
///   destination term, unscaled.
/// * parallel DF: the source-relay branch and the destination branch, both
///   scaled.
/// * direct: `((m-1)/m) log2(1+g)`.
#[derive(Debug, Clone, Copy)]
pub struct RateIntegrand {
    kind: Kind,
}

impl RateIntegrand {
    pub fn new(channel: &ChannelParams, cfg: &SystemConfig) -> Result<Self> {
        let m = f64::from(cfg.m);
        let data = m - 2.0;
        let kind = match cfg.scheme {
            Scheme::Af => Kind::Af {
                gains: OverlappedGains::new(channel, cfg)?,
                direct_weight: (1.0 - 2.0 * cfg.alpha) * data / m,
                coop_weight: cfg.alpha * data / m,
            },
            Scheme::RepetitionDf => Kind::RepetitionDf {
                gains: OverlappedGains::new(channel, cfg)?,
                direct_weight: (1.0 - 2.0 * cfg.alpha) * data / m,
                coop_weight: cfg.alpha * data / m,
            },
            Scheme::ParallelDf => Kind::ParallelDf {
                gains: ParallelGains::new(channel, cfg)?,
                source_weight: (1.0 - cfg.alpha) * data / m,
                relay_weight: cfg.alpha * data / m,
            },
            Scheme::Direct => Kind::Direct {
                gain: direct_gain(channel, cfg)?,
                weight: (m - 1.0) / m,
            },
        };
        Ok(Self { kind })
    }

    pub fn width(&self) -> usize {
        match self.kind {
            Kind::Af { .. } | Kind::Direct { .. } => 1,
            Kind::ParallelDf { .. } => 2,
            Kind::RepetitionDf { .. } => 3,
        }
    }

    /// Write the components for `draw` into `out[..self.width()]`.
    #[inline]
    pub fn eval(&self, draw: &FadingDraw, out: &mut [f64]) {
        match self.kind {
            Kind::Af {
                gains,
                direct_weight,
                coop_weight,
            } => {
                let s = gains.apply(draw);
                out[0] = af_integrand(&s, direct_weight, coop_weight);
            }
            Kind::RepetitionDf { gains, .. } => {
                let s = gains.apply(draw);
                out[0] = log2_1p(s.gamma_sd);
                out[1] = log2_1p(s.gamma_sr);
                out[2] = log2_1p(s.gamma_sd + s.gamma_rd + s.gamma_sd_r + s.gamma_sd * s.gamma_sd_r);
            }
            Kind::ParallelDf {
                gains,
                source_weight,
                relay_weight,
            } => {
                let s = gains.apply(draw);
                out[0] = source_weight * log2_1p(s.gamma_sr1);
                out[1] = source_weight * log2_1p(s.gamma_sd1) + relay_weight * log2_1p(s.gamma_rd1);
            }
            Kind::Direct { gain, weight } => {
                out[0] = weight * log2_1p(gain * draw.w_sd.norm_sqr());
            }
        }
    }

    /// Rate from the component means, plus the gradient used for the
    /// standard error.
    pub fn combine(&self, means: &[f64]) -> (f64, Vec<f64>) {
        match self.kind {
            Kind::Af { .. } | Kind::Direct { .. } => (means[0], vec![1.0]),
            Kind::RepetitionDf {
                direct_weight,
                coop_weight,
                ..
            } => {
                let (relay, dest) = (means[1], means[2]);
                let (coop, grad) = if relay <= dest {
                    (relay, vec![direct_weight, coop_weight, 0.0])
                } else {
                    (dest, vec![direct_weight, 0.0, coop_weight])
                };
                (direct_weight * means[0] + coop_weight * coop, grad)
            }
            Kind::ParallelDf { .. } => {
                if means[0] <= means[1] {
                    (means[0], vec![1.0, 0.0])
                } else {
                    (means[1], vec![0.0, 1.0])
                }
            }
        }
    }
}

#[inline]
fn af_integrand(s: &EffectiveSnrSet, direct_weight: f64, coop_weight: f64) -> f64 {
    let combined = s.gamma_sd
        + f_combine(s.gamma_sr, s.gamma_rd)
        + q_combine(s.gamma_sd, s.gamma_sd_r, s.gamma_sr, s.gamma_rd);
    direct_weight * log2_1p(s.gamma_sd) + coop_weight * log2_1p(combined)
}

/// The AF integrand for one draw, before expectation.
pub fn rate_af_sample(snrs: &EffectiveSnrSet, cfg: &SystemConfig) -> Result<f64> {
    if cfg.scheme != Scheme::Af {
        return Err(Error::invalid(
            "scheme",
            format!("AF sample rate needs af, got {}", cfg.scheme),
        ));
    }
    cfg.validate()?;
    let m = f64::from(cfg.m);
    let data = m - 2.0;
    Ok(af_integrand(
        snrs,
        (1.0 - 2.0 * cfg.alpha) * data / m,
        cfg.alpha * data / m,
    ))
}

/// Evaluate several integrands on one draw stream, components concatenated.
fn accumulate(parts: &[RateIntegrand], mc: &MonteCarlo) -> Result<Moments> {
    if mc.n_samples == 0 {
        return Err(Error::invalid("n_samples", "must be at least 1"));
    }
    let width: usize = parts.iter().map(RateIntegrand::width).sum();
    debug_assert!(width <= MAX_COMPONENTS);
    let n_blocks = mc.n_samples.div_ceil(BLOCK_LEN);

    let block = |b: u64| -> Moments {
        let len = BLOCK_LEN.min(mc.n_samples - b * BLOCK_LEN);
        let mut sampler = Sampler::at_block(mc.seed, b);
        let mut acc = Moments::new(width);
        let mut x = [0.0; MAX_COMPONENTS];
        for _ in 0..len {
            let draw = sampler.draw();
            let mut at = 0;
            for part in parts {
                part.eval(&draw, &mut x[at..]);
                at += part.width();
            }
            acc.push(&x);
        }
        acc
    };

    let workers = mc.effective_workers();
    let blocks: Vec<Moments> = if workers <= 1 || n_blocks == 1 {
        (0..n_blocks).map(block).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Numerical(format!("cannot start worker pool: {e}")))?;
        pool.install(|| (0..n_blocks).into_par_iter().map(block).collect())
    };

    let mut total = Moments::new(width);
    for b in &blocks {
        total.merge(b);
    }
    Ok(total)
}

fn finish(mean: f64, std_error: f64, mc: &MonteCarlo) -> Result<RateEstimate> {
    if !mean.is_finite() || !std_error.is_finite() {
        return Err(Error::Numerical(format!(
            "rate estimate is not finite (mean {mean}, std error {std_error})"
        )));
    }
    Ok(RateEstimate {
        mean: mean.max(0.0),
        std_error,
        n_samples: mc.n_samples,
        seed: mc.seed,
    })
}

/// Estimate the rate of whichever scheme `cfg` selects.
pub fn estimate_rate(channel: &ChannelParams, cfg: &SystemConfig, mc: &MonteCarlo) -> Result<RateEstimate> {
    let integrand = RateIntegrand::new(channel, cfg)?;
    let moments = accumulate(&[integrand], mc)?;
    let (mean, grad) = integrand.combine(&moments.mean[..integrand.width()]);
    finish(mean, moments.std_error(&grad), mc)
}

/// Estimate `rate(a) - rate(b)` on shared draws.
pub fn paired_gap(
    a: (&ChannelParams, &SystemConfig),
    b: (&ChannelParams, &SystemConfig),
    mc: &MonteCarlo,
) -> Result<PairedGap> {
    let ia = RateIntegrand::new(a.0, a.1)?;
    let ib = RateIntegrand::new(b.0, b.1)?;
    let moments = accumulate(&[ia, ib], mc)?;
    let (wa, wb) = (ia.width(), ib.width());
    let (mean_a, grad_a) = ia.combine(&moments.mean[..wa]);
    let (mean_b, grad_b) = ib.combine(&moments.mean[wa..wa + wb]);

    let mut only_a = grad_a.clone();
    only_a.resize(wa + wb, 0.0);
    let mut only_b = vec![0.0; wa];
    only_b.extend_from_slice(&grad_b);
    let diff_grad: Vec<f64> = grad_a.iter().copied().chain(grad_b.iter().map(|g| -g)).collect();

    Ok(PairedGap {
        diff: mean_a - mean_b,
        std_error: moments.std_error(&diff_grad),
        a: finish(mean_a, moments.std_error(&only_a), mc)?,
        b: finish(mean_b, moments.std_error(&only_b), mc)?,
    })
}

fn require(cfg: &SystemConfig, scheme: Scheme) -> Result<()> {
    if cfg.scheme == scheme {
        Ok(())
    } else {
        Err(Error::invalid(
            "scheme",
            format!("expected {scheme}, got {}", cfg.scheme),
        ))
    }
}

pub fn rate_af(channel: &ChannelParams, cfg: &SystemConfig, mc: &MonteCarlo) -> Result<RateEstimate> {
    require(cfg, Scheme::Af)?;
    estimate_rate(channel, cfg, mc)
}

pub fn rate_repdf(channel: &ChannelParams, cfg: &SystemConfig, mc: &MonteCarlo) -> Result<RateEstimate> {
    require(cfg, Scheme::RepetitionDf)?;
    estimate_rate(channel, cfg, mc)
}

pub fn rate_paralleldf(channel: &ChannelParams, cfg: &SystemConfig, mc: &MonteCarlo) -> Result<RateEstimate> {
    require(cfg, Scheme::ParallelDf)?;
    estimate_rate(channel, cfg, mc)
}

pub fn rate_direct_mc(channel: &ChannelParams, cfg: &SystemConfig, mc: &MonteCarlo) -> Result<RateEstimate> {
    require(cfg, Scheme::Direct)?;
    estimate_rate(channel, cfg, mc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PowerSpec;
    use crate::special::rate_direct_closed_form;

    fn cfg(scheme: Scheme, alpha: f64, p: f64) -> SystemConfig {
        SystemConfig {
            scheme,
            alpha,
            power: PowerSpec::PerNode { p_s: p, p_r: p },
            ..SystemConfig::default()
        }
    }

    #[test]
    fn zero_snrs_give_zero_rate() {
        let c = cfg(Scheme::Af, 0.3, 1.0);
        assert_eq!(rate_af_sample(&EffectiveSnrSet::default(), &c).unwrap(), 0.0);
    }

    #[test]
    fn full_cooperation_drops_direct_term() {
        let s = EffectiveSnrSet {
            gamma_sd: 3.0,
            gamma_sr: 5.0,
            gamma_sd_r: 2.0,
            gamma_rd: 7.0,
            ..EffectiveSnrSet::default()
        };
        let c = cfg(Scheme::Af, 0.5, 1.0);
        let got = rate_af_sample(&s, &c).unwrap();
        let inner = 1.0 + 3.0 + f_combine(5.0, 7.0) + q_combine(3.0, 2.0, 5.0, 7.0);
        assert!((got - 0.5 * 0.98 * inner.log2()).abs() < 1e-15);
    }

    #[test]
    fn af_sample_without_relay_terms() {
        let s = EffectiveSnrSet {
            gamma_sd: 41.979,
            ..EffectiveSnrSet::default()
        };
        let got = rate_af_sample(&s, &cfg(Scheme::Af, 0.25, 1.0)).unwrap();
        let want = (0.5 * 98.0 / 100.0 + 0.25 * 98.0 / 100.0) * 42.979f64.log2();
        assert!((got - want).abs() < 1e-13);
        assert!(rate_af_sample(&s, &cfg(Scheme::RepetitionDf, 0.25, 1.0)).is_err());
    }

    #[test]
    fn rejects_zero_samples_and_wrong_scheme() {
        let ch = ChannelParams::default();
        let mc = MonteCarlo::new(0, 1);
        assert_eq!(
            estimate_rate(&ch, &cfg(Scheme::Af, 0.5, 1.0), &mc)
                .unwrap_err()
                .field(),
            Some("n_samples")
        );
        let mc = MonteCarlo::new(10, 1);
        assert!(rate_repdf(&ch, &cfg(Scheme::Af, 0.5, 1.0), &mc).is_err());
        assert!(rate_paralleldf(&ch, &cfg(Scheme::Af, 0.5, 1.0), &mc).is_err());
        assert!(rate_direct_mc(&ch, &cfg(Scheme::Af, 0.5, 1.0), &mc).is_err());
    }

    #[test]
    fn direct_zero_power_is_zero() {
        let ch = ChannelParams::default();
        let r = rate_direct_mc(&ch, &cfg(Scheme::Direct, 0.5, 0.0), &MonteCarlo::new(5000, 3)).unwrap();
        assert_eq!(r.mean, 0.0);
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn same_seed_same_bits_any_worker_count() {
        let ch = ChannelParams::new(1.0, 2.0, 1.0, 1.0).unwrap();
        let n = 3 * BLOCK_LEN + 123;
        for scheme in Scheme::ALL {
            let c = cfg(scheme, 0.25, 5.0);
            let one = estimate_rate(&ch, &c, &MonteCarlo::new(n, 9).with_workers(1)).unwrap();
            let again = estimate_rate(&ch, &c, &MonteCarlo::new(n, 9).with_workers(1)).unwrap();
            let four = estimate_rate(&ch, &c, &MonteCarlo::new(n, 9).with_workers(4)).unwrap();
            assert_eq!(one.mean.to_bits(), again.mean.to_bits());
            assert_eq!(one.mean.to_bits(), four.mean.to_bits());
            assert_eq!(one.std_error.to_bits(), four.std_error.to_bits());
        }
    }

    #[test]
    fn matches_naive_mean_of_stream() {
        let ch = ChannelParams::default();
        let c = cfg(Scheme::Af, 0.3, 2.0);
        let n = 10_000u64;
        let integrand = RateIntegrand::new(&ch, &c).unwrap();
        let mut out = [0.0];
        let values: Vec<f64> = Sampler::new(4)
            .take(n as usize)
            .map(|d| {
                integrand.eval(&d, &mut out);
                out[0]
            })
            .collect();
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let r = estimate_rate(&ch, &c, &MonteCarlo::new(n, 4)).unwrap();
        assert!((r.mean - mean).abs() < 1e-12);
        assert!((r.std_error - (var / n as f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn direct_matches_closed_form() {
        let ch = ChannelParams::default();
        let c = cfg(Scheme::Direct, 0.5, 1.0);
        let gain = direct_gain(&ch, &c).unwrap();
        let r = rate_direct_mc(&ch, &c, &MonteCarlo::new(200_000, 11)).unwrap();
        let exact = rate_direct_closed_form(gain, 0.99);
        assert!(
            (r.mean - exact).abs() < 4.0 * r.std_error,
            "{} vs {exact}",
            r.mean
        );
    }

    #[test]
    fn useless_source_relay_link_leaves_direct_part() {
        let ch = ChannelParams::new(1.0, 1e-9, 1.0, 1.0).unwrap();
        let c = cfg(Scheme::RepetitionDf, 0.25, 50.0);
        let mc = MonteCarlo::new(20_000, 5);
        let r = rate_repdf(&ch, &c, &mc).unwrap();
        let integrand = RateIntegrand::new(&ch, &c).unwrap();
        let mut out = [0.0; 3];
        let mut direct = 0.0;
        for d in Sampler::new(5).take(20_000) {
            integrand.eval(&d, &mut out);
            direct += out[0];
        }
        let direct = 0.5 * 0.98 * direct / 20_000.0;
        assert!((r.mean - direct).abs() < 1e-9, "{} vs {direct}", r.mean);
    }

    #[test]
    fn parallel_picks_smaller_branch() {
        let ch = ChannelParams::new(1.0, 1e4, 2.0, 1.0).unwrap();
        let c = cfg(Scheme::ParallelDf, 0.4, 0.5);
        let integrand = RateIntegrand::new(&ch, &c).unwrap();
        let (v, g) = integrand.combine(&[3.0, 1.0]);
        assert_eq!((v, g), (1.0, vec![0.0, 1.0]));
        let r = rate_paralleldf(&ch, &c, &MonteCarlo::new(4096, 2)).unwrap();
        let mut out = [0.0; 2];
        let mut sums = [0.0; 2];
        for d in Sampler::new(2).take(4096) {
            integrand.eval(&d, &mut out);
            sums[0] += out[0];
            sums[1] += out[1];
        }
        assert!(sums[0] > sums[1]);
        assert!((r.mean - sums[1] / 4096.0).abs() < 1e-12);
    }

    #[test]
    fn jensen_bound_holds() {
        let ch = ChannelParams::default();
        let c = cfg(Scheme::Direct, 0.5, 1.0);
        let gain = direct_gain(&ch, &c).unwrap();
        let n = 50_000;
        let arg_mean = Sampler::new(6)
            .take(n)
            .map(|d| gain * d.w_sd.norm_sqr())
            .sum::<f64>()
            / n as f64;
        let r = rate_direct_mc(&ch, &c, &MonteCarlo::new(n as u64, 6)).unwrap();
        assert!(r.mean / 0.99 <= log2_1p(arg_mean));
    }

    #[test]
    fn paired_gap_is_consistent_with_separate_runs() {
        let ch = ChannelParams::new(1.0, 2.0, 1.0, 1.0).unwrap();
        let a = cfg(Scheme::Af, 0.5, 0.5);
        let b = cfg(Scheme::Af, 0.48, 0.5);
        let mc = MonteCarlo::new(50_000, 8);
        let gap = paired_gap((&ch, &a), (&ch, &b), &mc).unwrap();
        let ra = estimate_rate(&ch, &a, &mc).unwrap();
        let rb = estimate_rate(&ch, &b, &mc).unwrap();
        assert!((gap.a.mean - ra.mean).abs() < 1e-12);
        assert!((gap.b.mean - rb.mean).abs() < 1e-12);
        assert!((gap.a.std_error - ra.std_error).abs() < 1e-12);
        assert!((gap.diff - (ra.mean - rb.mean)).abs() < 1e-12);
        // shared draws make the difference far less noisy than either rate
        assert!(gap.std_error < 0.2 * ra.std_error.hypot(rb.std_error));
    }
}
