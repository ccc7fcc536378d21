//! Achievable rates of three-node relay channels whose receivers learn the
//! Rayleigh block-fading coefficients from single pilot symbols.
//!
//! The crate covers amplify-and-forward, decode-and-forward with repetition
//! or parallel channel coding, and a direct-transmission baseline. Rates are
//! ergodic expectations estimated by seeded, reproducible Monte Carlo; on top
//! of that sit parameter sweeps, a scalar optimizer for the allocation knobs
//! and a bit-energy analysis for the low-power regime.

pub mod allocator;
pub mod energy;
pub mod error;
pub mod model;
pub mod optimize;
pub mod rate;
pub mod sampler;
pub mod snr;
pub mod special;

pub use error::{Error, Result};
pub use model::{
    data_phase_powers, mmse_training_stats, resolve_power, ChannelParams, DataPhasePowers, PilotReading,
    PowerSpec, Scheme, SystemConfig, TrainingStats,
};
pub use rate::{estimate_rate, paired_gap, MonteCarlo, PairedGap, RateEstimate};
pub use sampler::{FadingDraw, Sampler};
pub use snr::{f_combine, q_combine, EffectiveSnrSet};
pub use special::rate_direct_closed_form;
