//! Seeded stream of independent `CN(0, 1)` fading triples.
//!
//! The stream is cut into blocks of [`BLOCK_LEN`] draws. Block `b` of seed `s`
//! comes from a ChaCha8 generator seeded with `s` on stream `b`, so any block
//! can be regenerated on its own. A [`Sampler`] walks the blocks in order;
//! the parallel estimator hands whole blocks to workers and sees the very
//! same draws.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

pub const BLOCK_LEN: u64 = 4096;

/// One realization of the three unit-variance fading surrogates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FadingDraw {
    pub w_sd: Complex64,
    pub w_sr: Complex64,
    pub w_rd: Complex64,
}

#[derive(Debug, Clone)]
pub struct Sampler {
    seed: u64,
    block: u64,
    used: u64,
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self::at_block(seed, 0)
    }

    /// Sampler positioned at the first draw of `block`.
    pub fn at_block(seed: u64, block: u64) -> Self {
        Self {
            seed,
            block,
            used: 0,
            rng: block_rng(seed, block),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn draw(&mut self) -> FadingDraw {
        if self.used == BLOCK_LEN {
            self.block += 1;
            self.used = 0;
            self.rng = block_rng(self.seed, self.block);
        }
        self.used += 1;
        FadingDraw {
            w_sd: cn01(&mut self.rng),
            w_sr: cn01(&mut self.rng),
            w_rd: cn01(&mut self.rng),
        }
    }
}

impl Iterator for Sampler {
    type Item = FadingDraw;

    fn next(&mut self) -> Option<FadingDraw> {
        Some(self.draw())
    }
}

fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

#[inline]
fn cn01<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_seeds_equal_streams() {
        let a: Vec<_> = Sampler::new(7).take(10_000).collect();
        let b: Vec<_> = Sampler::new(7).take(10_000).collect();
        assert_eq!(a, b);
        let c: Vec<_> = Sampler::new(8).take(10).collect();
        assert_ne!(a[..10], c[..]);
    }

    #[test]
    fn blocks_can_be_entered_directly() {
        let seq: Vec<_> = Sampler::new(3).take(3 * BLOCK_LEN as usize).collect();
        let third: Vec<_> = Sampler::at_block(3, 2).take(BLOCK_LEN as usize).collect();
        assert_eq!(&seq[2 * BLOCK_LEN as usize..], &third[..]);
    }

    #[test]
    fn components_are_unit_power_and_independent() {
        let n = 1_000_000;
        let mut sums = [0.0f64; 3];
        let mut sq = [0.0f64; 3];
        let mut cross = 0.0;
        let mut re_sq = 0.0;
        for d in Sampler::new(2024).take(n) {
            let p = [d.w_sd.norm_sqr(), d.w_sr.norm_sqr(), d.w_rd.norm_sqr()];
            for k in 0..3 {
                sums[k] += p[k];
                sq[k] += p[k] * p[k];
            }
            cross += p[0] * p[2];
            re_sq += d.w_sd.re * d.w_sd.re;
        }
        let nf = n as f64;
        let mean: Vec<f64> = sums.iter().map(|s| s / nf).collect();
        for m in &mean {
            assert!((0.995..=1.005).contains(m), "mean |w|^2 = {m}");
        }
        // real part carries half the power
        assert!((re_sq / nf - 0.5).abs() < 0.005);
        let var = |k: usize| sq[k] / nf - mean[k] * mean[k];
        let corr = (cross / nf - mean[0] * mean[2]) / (var(0) * var(2)).sqrt();
        assert!(corr.abs() < 0.01, "corr = {corr}");
    }
}
