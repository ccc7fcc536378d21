//! Coarse grid followed by golden-section refinement, for noisy scalar
//! objectives evaluated under common random numbers.

use crate::error::{Error, Result};
use crate::rate::RateEstimate;

/// Anything with a scalar figure of merit to maximize.
pub trait Scored {
    fn score(&self) -> f64;
}

impl Scored for f64 {
    fn score(&self) -> f64 {
        *self
    }
}

impl Scored for RateEstimate {
    fn score(&self) -> f64 {
        self.mean
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum<T> {
    pub x: f64,
    pub value: T,
    pub evaluations: usize,
}

struct Best<T> {
    x: f64,
    score: f64,
    value: T,
}

impl<T> Best<T> {
    /// Larger score wins; equal scores go to the smaller argument.
    fn offer(&mut self, x: f64, value: T, score: f64) {
        if score > self.score || (score == self.score && x < self.x) {
            *self = Best { x, score, value };
        }
    }
}

/// Maximize `objective` on `[lo, hi]` with at most `budget` evaluations.
///
/// Roughly half the budget goes to an evenly spaced grid (endpoints
/// included); the rest narrows the two grid cells around the best grid
/// point by golden-section search. Ties go to the smaller argument, so a
/// constant objective returns `lo`.
pub fn optimize_scalar<T, F>(mut objective: F, lo: f64, hi: f64, budget: usize) -> Result<Optimum<T>>
where
    T: Scored + Clone,
    F: FnMut(f64) -> Result<T>,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::invalid(
            "range",
            format!("[{lo}, {hi}] is not a finite interval"),
        ));
    }
    if budget < 3 {
        return Err(Error::invalid("budget", format!("{budget} is below 3")));
    }

    let grid_len = (budget / 2).max(3);
    let step = (hi - lo) / (grid_len - 1) as f64;
    let xs: Vec<f64> = (0..grid_len)
        .map(|i| {
            if i + 1 == grid_len {
                hi
            } else {
                lo + step * i as f64
            }
        })
        .collect();

    let mut evaluations = 0;
    let mut best: Option<Best<T>> = None;
    let mut best_index = 0;
    for (i, &x) in xs.iter().enumerate() {
        let value = objective(x)?;
        evaluations += 1;
        let score = value.score();
        match &mut best {
            None => best = Some(Best { x, score, value }),
            Some(b) => {
                let before = b.x;
                b.offer(x, value, score);
                if b.x != before {
                    best_index = i;
                }
            }
        }
    }
    let mut best = best.expect("grid has at least three points");

    let mut a = xs[best_index.saturating_sub(1)];
    let mut b = xs[(best_index + 1).min(grid_len - 1)];
    let remaining = budget - evaluations;
    if remaining >= 2 {
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let vc = objective(c)?;
        let vd = objective(d)?;
        evaluations += 2;
        let (mut sc, mut sd) = (vc.score(), vd.score());
        best.offer(c, vc, sc);
        best.offer(d, vd, sd);
        while evaluations < budget {
            if sc >= sd {
                b = d;
                d = c;
                sd = sc;
                c = b - inv_phi * (b - a);
                let v = objective(c)?;
                sc = v.score();
                best.offer(c, v, sc);
            } else {
                a = c;
                c = d;
                sc = sd;
                d = a + inv_phi * (b - a);
                let v = objective(d)?;
                sd = v.score();
                best.offer(d, v, sd);
            }
            evaluations += 1;
        }
    }

    Ok(Optimum {
        x: best.x,
        value: best.value,
        evaluations,
    })
}
