//! Exponential integral and the closed-form Rayleigh ergodic rate.

use std::f64::consts::LN_2;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `e^x * E1(x)` for `x > 0`.
///
/// Power series below 1, Lentz continued fraction above; the scaled form
/// stays finite where `E1` itself underflows.
pub fn scaled_exp_e1(x: f64) -> f64 {
    assert!(x > 0.0, "scaled_exp_e1 needs x > 0, got {x}");
    if x <= 1.0 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..200 {
            let kf = k as f64;
            term *= -x / kf;
            let add = term / kf;
            sum += add;
            if add.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        (-EULER_GAMMA - x.ln() - sum) * x.exp()
    } else {
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h
    }
}

/// `E1(x)` for `x > 0`.
pub fn exp_e1(x: f64) -> f64 {
    scaled_exp_e1(x) * (-x).exp()
}

/// Exact `prefactor * E[log2(1 + gamma |w|^2)]` for `|w|^2 ~ Exp(1)`.
pub fn rate_direct_closed_form(gamma_coeff: f64, prefactor: f64) -> f64 {
    if gamma_coeff <= 0.0 {
        return 0.0;
    }
    prefactor * scaled_exp_e1(1.0 / gamma_coeff) / LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e1_table_values() {
        // 30-digit reference values
        assert!((exp_e1(1.0) - 0.219_383_934_395_520_3).abs() < 1e-15);
        assert!((exp_e1(0.5) - 0.559_773_594_776_160_8).abs() < 1e-15);
        assert!((exp_e1(2.0) - 0.048_900_510_708_061_1).abs() < 1e-16);
        assert!((scaled_exp_e1(10.0) - 0.091_563_333_939_788_08).abs() < 1e-15);
    }

    #[test]
    fn branches_agree_at_switch_point() {
        let below = scaled_exp_e1(1.0);
        let above = scaled_exp_e1(1.0 + 1e-12);
        assert!((below - above).abs() < 1e-11);
    }

    #[test]
    fn closed_form_limits() {
        assert_eq!(rate_direct_closed_form(0.0, 1.0), 0.0);
        let one = rate_direct_closed_form(1.0, 1.0);
        assert!((one - 0.8603).abs() < 1e-4, "{one}");
        // grows like log2(gamma) - Euler's constant / ln 2
        let g = 1e8;
        let big = rate_direct_closed_form(g, 1.0);
        assert!((big - (g.log2() - EULER_GAMMA / LN_2)).abs() < 1e-6);
    }
}
