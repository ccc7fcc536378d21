//! Physical-layer parameters, configuration validation, and the
//! second-order statistics of pilot-based MMSE channel estimation.
//!
//! Each block of `m` symbols opens with two pilot symbols (source, then
//! relay). A node that spends fraction `delta` of its block energy `m * P`
//! on its pilot leaves `(1 - delta) * m * P` for data, spread evenly over the
//! data symbols it transmits.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fading standard deviations of the three links and the receiver noise
/// variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub sigma_sd: f64,
    pub sigma_sr: f64,
    pub sigma_rd: f64,
    pub n0: f64,
}

impl ChannelParams {
    pub fn new(sigma_sd: f64, sigma_sr: f64, sigma_rd: f64, n0: f64) -> Result<Self> {
        let params = Self {
            sigma_sd,
            sigma_sr,
            sigma_rd,
            n0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        positive("sigma_sd", self.sigma_sd)?;
        positive("sigma_sr", self.sigma_sr)?;
        positive("sigma_rd", self.sigma_rd)?;
        positive("n0", self.n0)
    }
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            sigma_sd: 1.0,
            sigma_sr: 4.0,
            sigma_rd: 4.0,
            n0: 1.0,
        }
    }
}

/// Transmission protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Amplify-and-forward, source transmits throughout.
    Af,
    /// Decode-and-forward with the relay reusing the source codebook.
    RepetitionDf,
    /// Decode-and-forward with an independent relay codebook; the source is
    /// silent while the relay transmits.
    ParallelDf,
    /// Source-to-destination only, with a single source pilot.
    Direct,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::Af,
        Scheme::RepetitionDf,
        Scheme::ParallelDf,
        Scheme::Direct,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Af => "af",
            Scheme::RepetitionDf => "repetition-df",
            Scheme::ParallelDf => "parallel-df",
            Scheme::Direct => "direct",
        }
    }

    /// Admissible relay fraction as `(lower_exclusive, upper, upper_inclusive)`,
    /// or `None` when the scheme has no relay.
    pub fn alpha_bounds(self) -> Option<(f64, f64, bool)> {
        match self {
            Scheme::Af | Scheme::RepetitionDf => Some((0.0, 0.5, true)),
            Scheme::ParallelDf => Some((0.0, 1.0, false)),
            Scheme::Direct => None,
        }
    }

    pub fn min_block_length(self) -> u32 {
        match self {
            Scheme::Direct => 2,
            _ => 3,
        }
    }

    pub fn check_alpha(self, alpha: f64) -> Result<()> {
        let Some((lo, hi, hi_inclusive)) = self.alpha_bounds() else {
            return Ok(());
        };
        let upper_ok = if hi_inclusive { alpha <= hi } else { alpha < hi };
        if alpha.is_finite() && alpha > lo && upper_ok {
            Ok(())
        } else {
            let bracket = if hi_inclusive { ']' } else { ')' };
            Err(Error::invalid(
                "alpha",
                format!(
                    "{alpha} is outside ({lo}, {hi}{bracket} for scheme {}",
                    self.as_str()
                ),
            ))
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "af" => Ok(Scheme::Af),
            "repetition-df" | "repdf" | "rep-df" => Ok(Scheme::RepetitionDf),
            "parallel-df" | "pardf" | "par-df" => Ok(Scheme::ParallelDf),
            "direct" => Ok(Scheme::Direct),
            other => Err(Error::invalid(
                "scheme",
                format!("unknown scheme `{other}` (expected af, repetition-df, parallel-df or direct)"),
            )),
        }
    }
}

/// How the source and relay powers are specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum PowerSpec {
    PerNode {
        p_s: f64,
        p_r: f64,
    },
    /// Total power `p_total` split as `theta * p_total` at the source and the
    /// rest at the relay.
    Total {
        p_total: f64,
        theta: f64,
    },
}

impl PowerSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PowerSpec::PerNode { p_s, p_r } => {
                nonnegative("p_s", p_s)?;
                nonnegative("p_r", p_r)
            }
            PowerSpec::Total { p_total, theta } => {
                nonnegative("p_total", p_total)?;
                if theta.is_finite() && theta > 0.0 && theta <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::invalid("theta", format!("{theta} is outside (0, 1]")))
                }
            }
        }
    }
}

/// Resolve a power specification into `(p_s, p_r)`.
pub fn resolve_power(spec: &PowerSpec) -> Result<(f64, f64)> {
    spec.validate()?;
    Ok(match *spec {
        PowerSpec::PerNode { p_s, p_r } => (p_s, p_r),
        PowerSpec::Total { p_total, theta } => {
            let p_s = theta * p_total;
            (p_s, p_total - p_s)
        }
    })
}

/// Which pilot fraction enters the relay-pilot term of the parallel-DF
/// relay-destination SNR denominator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PilotReading {
    /// The relay pilot uses `delta_r`, as everywhere else.
    #[default]
    Corrected,
    /// Use `delta_s` in that single term, reproducing the printed expression.
    Literal,
}

impl PilotReading {
    pub fn as_str(self) -> &'static str {
        match self {
            PilotReading::Corrected => "corrected",
            PilotReading::Literal => "literal",
        }
    }
}

impl FromStr for PilotReading {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "corrected" => Ok(PilotReading::Corrected),
            "literal" => Ok(PilotReading::Literal),
            other => Err(Error::invalid(
                "pilot_reading",
                format!("unknown value `{other}` (expected corrected or literal)"),
            )),
        }
    }
}

/// One experiment point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub m: u32,
    pub alpha: f64,
    pub scheme: Scheme,
    pub delta_s: f64,
    pub delta_r: f64,
    pub power: PowerSpec,
    #[serde(default)]
    pub pilot_reading: PilotReading,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            m: 100,
            alpha: 0.5,
            scheme: Scheme::Af,
            delta_s: 0.1,
            delta_r: 0.1,
            power: PowerSpec::PerNode { p_s: 0.5, p_r: 0.5 },
            pilot_reading: PilotReading::Corrected,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let min_m = self.scheme.min_block_length();
        if self.m < min_m {
            return Err(Error::invalid(
                "m",
                format!(
                    "block length {} is below {min_m} for scheme {}",
                    self.m, self.scheme
                ),
            ));
        }
        self.scheme.check_alpha(self.alpha)?;
        unit_interval("delta_s", self.delta_s)?;
        unit_interval("delta_r", self.delta_r)?;
        self.power.validate()
    }

    /// Per-node powers `(p_s, p_r)` seen by this scheme. Direct transmission
    /// has no relay, so a total-power budget goes entirely to the source.
    pub fn node_powers(&self) -> Result<(f64, f64)> {
        match (self.scheme, self.power) {
            (Scheme::Direct, PowerSpec::Total { p_total, .. }) => {
                self.power.validate()?;
                Ok((p_total, 0.0))
            }
            _ => resolve_power(&self.power),
        }
    }

    pub(crate) fn data_symbols(&self) -> f64 {
        f64::from(self.m) - 2.0
    }
}

/// Second-order statistics of an MMSE channel estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrainingStats {
    /// Variance of the estimate.
    pub var_hat: f64,
    /// Variance of the estimation error.
    pub var_err: f64,
}

/// Estimate and error variances for a `CN(0, sigma^2)` coefficient observed
/// through one pilot carrying energy `delta * m * p`.
pub fn mmse_training_stats(sigma: f64, delta: f64, m: u32, p: f64, n0: f64) -> Result<TrainingStats> {
    positive("sigma", sigma)?;
    positive("n0", n0)?;
    unit_interval("delta", delta)?;
    nonnegative("p", p)?;
    if m < 2 {
        return Err(Error::invalid("m", format!("block length {m} is below 2")));
    }
    let var = sigma * sigma;
    let pilot_snr = var * delta * f64::from(m) * p;
    let denom = pilot_snr + n0;
    Ok(TrainingStats {
        var_hat: var * pilot_snr / denom,
        var_err: var * n0 / denom,
    })
}

/// Per-symbol data powers after training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DataPhasePowers {
    /// Source data power when the source transmits for the whole data phase
    /// (AF, repetition DF; the `m - 1` symbol analog for direct).
    pub ps_prime: f64,
    /// Relay data power over its `alpha * (m - 2)` symbols.
    pub pr_prime: f64,
    /// Source data power over `(1 - alpha) * (m - 2)` symbols (parallel DF).
    pub ps1_prime: f64,
}

pub fn data_phase_powers(cfg: &SystemConfig) -> Result<DataPhasePowers> {
    cfg.validate()?;
    let (p_s, p_r) = cfg.node_powers()?;
    let m = f64::from(cfg.m);
    let data = cfg.data_symbols();
    let source_energy = (1.0 - cfg.delta_s) * m * p_s;
    let relay_energy = (1.0 - cfg.delta_r) * m * p_r;
    Ok(match cfg.scheme {
        Scheme::Af | Scheme::RepetitionDf => DataPhasePowers {
            ps_prime: source_energy / data,
            pr_prime: relay_energy / (data * cfg.alpha),
            ps1_prime: 0.0,
        },
        Scheme::ParallelDf => DataPhasePowers {
            ps_prime: 0.0,
            pr_prime: relay_energy / (data * cfg.alpha),
            ps1_prime: source_energy / (data * (1.0 - cfg.alpha)),
        },
        Scheme::Direct => DataPhasePowers {
            ps_prime: source_energy / (m - 1.0),
            pr_prime: 0.0,
            ps1_prime: 0.0,
        },
    })
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("{v} must be positive and finite")))
    }
}

fn nonnegative(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            field,
            format!("{v} must be nonnegative and finite"),
        ))
    }
}

fn unit_interval(field: &'static str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("{v} is outside [0, 1]")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn no_pilot_power_leaves_prior() {
        let s = mmse_training_stats(1.0, 0.0, 100, 50.0, 1.0).unwrap();
        assert_eq!(s.var_hat, 0.0);
        assert_eq!(s.var_err, 1.0);
    }

    #[test]
    fn training_stats_reference_point() {
        // pilot energy 0.1 * 100 * 50 = 500: var_err = 1/501
        let s = mmse_training_stats(1.0, 0.1, 100, 50.0, 1.0).unwrap();
        assert!(rel_close(s.var_hat, 500.0 / 501.0, 1e-15));
        assert!(rel_close(s.var_err, 1.0 / 501.0, 1e-15));
    }

    #[test]
    fn huge_pilot_energy_gives_perfect_estimate() {
        let s = mmse_training_stats(2.0, 1.0, 100, 1e15, 1.0).unwrap();
        assert!(s.var_err < 1e-15);
        assert!(rel_close(s.var_hat, 4.0, 1e-12));
    }

    #[test]
    fn training_stats_rejects_bad_inputs() {
        assert_eq!(
            mmse_training_stats(0.0, 0.1, 100, 1.0, 1.0).unwrap_err().field(),
            Some("sigma")
        );
        assert_eq!(
            mmse_training_stats(1.0, 0.1, 100, 1.0, -1.0).unwrap_err().field(),
            Some("n0")
        );
        assert_eq!(
            mmse_training_stats(1.0, 1.5, 100, 1.0, 1.0).unwrap_err().field(),
            Some("delta")
        );
    }

    #[test]
    fn data_powers_reference_point() {
        let cfg = SystemConfig {
            power: PowerSpec::PerNode { p_s: 50.0, p_r: 50.0 },
            ..SystemConfig::default()
        };
        let p = data_phase_powers(&cfg).unwrap();
        assert!(rel_close(p.ps_prime, 0.9 * 100.0 * 50.0 / 98.0, 1e-15));
        assert!((p.ps_prime - 45.918).abs() < 1e-3);
        assert!((p.pr_prime - 91.837).abs() < 1e-3);
    }

    #[test]
    fn all_training_leaves_no_data_power() {
        let cfg = SystemConfig {
            delta_s: 1.0,
            m: 17,
            power: PowerSpec::PerNode { p_s: 3.7, p_r: 1.0 },
            ..SystemConfig::default()
        };
        assert_eq!(data_phase_powers(&cfg).unwrap().ps_prime, 0.0);
    }

    #[test]
    fn resolve_power_examples() {
        let (ps, pr) = resolve_power(&PowerSpec::Total {
            p_total: 1.0,
            theta: 0.6,
        })
        .unwrap();
        assert!(rel_close(ps, 0.6, 1e-15) && rel_close(pr, 0.4, 1e-15));
        assert_eq!(
            resolve_power(&PowerSpec::Total {
                p_total: 100.0,
                theta: 1.0
            })
            .unwrap(),
            (100.0, 0.0)
        );
        assert_eq!(
            resolve_power(&PowerSpec::PerNode { p_s: 50.0, p_r: 50.0 }).unwrap(),
            (50.0, 50.0)
        );
        for theta in [0.0, -0.1, 1.01, f64::NAN] {
            let err = resolve_power(&PowerSpec::Total { p_total: 1.0, theta }).unwrap_err();
            assert_eq!(err.field(), Some("theta"));
        }
    }

    #[test]
    fn alpha_ranges_per_scheme() {
        let mut cfg = SystemConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.alpha = 0.7;
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("(0, 0.5]"), "{err}");
        cfg.scheme = Scheme::ParallelDf;
        assert!(cfg.validate().is_ok());
        cfg.alpha = 1.0;
        assert!(cfg.validate().is_err());
        cfg.alpha = 0.0;
        assert!(cfg.validate().is_err());
        cfg.scheme = Scheme::Direct;
        cfg.alpha = 42.0;
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn block_length_minimum() {
        let mut cfg = SystemConfig {
            m: 2,
            ..SystemConfig::default()
        };
        assert_eq!(cfg.validate().unwrap_err().field(), Some("m"));
        cfg.scheme = Scheme::Direct;
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn direct_takes_whole_total_budget() {
        let cfg = SystemConfig {
            scheme: Scheme::Direct,
            power: PowerSpec::Total {
                p_total: 10.0,
                theta: 0.6,
            },
            ..SystemConfig::default()
        };
        assert_eq!(cfg.node_powers().unwrap(), (10.0, 0.0));
    }

    #[test]
    fn scheme_parse_roundtrip() {
        for s in Scheme::ALL {
            assert_eq!(s.as_str().parse::<Scheme>().unwrap(), s);
        }
        assert!("relay".parse::<Scheme>().is_err());
    }

    proptest! {
        #[test]
        fn mmse_decomposition_is_orthogonal(
            sigma in 1e-3f64..1e3, delta in 0.0f64..=1.0, m in 2u32..100_000,
            p in 0.0f64..1e4, n0 in 1e-3f64..1e3,
        ) {
            let s = mmse_training_stats(sigma, delta, m, p, n0).unwrap();
            prop_assert!(rel_close(s.var_hat + s.var_err, sigma * sigma, 1e-12));
            prop_assert!(s.var_err <= sigma * sigma);
        }

        #[test]
        fn error_variance_decreases_with_pilot_energy(
            sigma in 1e-2f64..1e2, p in 1e-3f64..1e3, n0 in 1e-2f64..1e2, k in 1.01f64..10.0,
        ) {
            let lo = mmse_training_stats(sigma, 0.1, 100, p, n0).unwrap();
            let hi = mmse_training_stats(sigma, 0.1, 100, p * k, n0).unwrap();
            prop_assert!(hi.var_err < lo.var_err);
        }

        #[test]
        fn estimate_quality_is_scale_free(
            sigma in 1e-2f64..1e2, p in 1e-3f64..1e3, n0 in 1e-2f64..1e2, k in 1e-3f64..1e3,
        ) {
            let a = mmse_training_stats(sigma, 0.2, 50, p, n0).unwrap();
            let b = mmse_training_stats(sigma, 0.2, 50, p * k, n0 * k).unwrap();
            prop_assert!(rel_close(a.var_hat / (sigma * sigma), b.var_hat / (sigma * sigma), 1e-12));
        }

        #[test]
        fn block_energy_is_conserved(
            m in 3u32..5000, alpha in 0.001f64..0.999, ds in 0.0f64..=1.0, dr in 0.0f64..=1.0,
            ps in 0.0f64..100.0, pr in 0.0f64..100.0, pick in 0usize..3,
        ) {
            let scheme = [Scheme::Af, Scheme::RepetitionDf, Scheme::ParallelDf][pick];
            let alpha = if scheme == Scheme::ParallelDf { alpha } else { alpha * 0.5 };
            let cfg = SystemConfig {
                m, alpha, scheme, delta_s: ds, delta_r: dr,
                power: PowerSpec::PerNode { p_s: ps, p_r: pr },
                pilot_reading: PilotReading::Corrected,
            };
            let p = data_phase_powers(&cfg).unwrap();
            let mf = f64::from(m);
            let data = mf - 2.0;
            let source_data = match scheme {
                Scheme::ParallelDf => p.ps1_prime * (1.0 - alpha) * data,
                _ => p.ps_prime * data,
            };
            let tol = 1e-12 * mf * ps.max(f64::MIN_POSITIVE);
            prop_assert!((ds * mf * ps + source_data - mf * ps).abs() <= tol);
            let tol = 1e-12 * mf * pr.max(f64::MIN_POSITIVE);
            prop_assert!((dr * mf * pr + p.pr_prime * alpha * data - mf * pr).abs() <= tol);
        }

        #[test]
        fn total_split_sums_exactly(p in 0.0f64..1e6, theta in 1e-6f64..=1.0) {
            let (ps, pr) = resolve_power(&PowerSpec::Total { p_total: p, theta }).unwrap();
            prop_assert!((ps + pr - p).abs() <= f64::EPSILON * p);
        }
    }
}
