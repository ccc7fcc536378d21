//! Deliberately plain re-derivation of the per-draw rates, kept apart from the
//! engine. Instead of the closed-form gain expressions it works from the
//! physical quantities: MMSE estimate/error variances, per-symbol data
//! powers, and an effective noise that adds every link's estimation error
//! weighted by the power sent through it.

#![allow(dead_code)]

#[derive(Debug, Clone, Copy)]
pub struct Point {
    pub scheme: &'static str,
    pub sigma_sd: f64,
    pub sigma_sr: f64,
    pub sigma_rd: f64,
    pub n0: f64,
    pub m: f64,
    pub alpha: f64,
    pub delta_s: f64,
    pub delta_r: f64,
    pub p_s: f64,
    pub p_r: f64,
}

fn lg(x: f64) -> f64 {
    (1.0 + x).log2()
}

/// (estimate variance, error variance)
fn mmse(sigma: f64, delta: f64, m: f64, p: f64, n0: f64) -> (f64, f64) {
    let s2 = sigma * sigma;
    let obs = s2 * delta * m * p + n0;
    (s2 * s2 * delta * m * p / obs, s2 * n0 / obs)
}

pub struct Snrs {
    pub sd: f64,
    pub sr: f64,
    pub sd_r: f64,
    pub rd: f64,
}

pub fn overlapped_snrs(pt: &Point, a_sd: f64, a_sr: f64, a_rd: f64) -> Snrs {
    let (h_sd, e_sd) = mmse(pt.sigma_sd, pt.delta_s, pt.m, pt.p_s, pt.n0);
    let (h_sr, e_sr) = mmse(pt.sigma_sr, pt.delta_s, pt.m, pt.p_s, pt.n0);
    let (h_rd, e_rd) = mmse(pt.sigma_rd, pt.delta_r, pt.m, pt.p_r, pt.n0);
    let ps = (1.0 - pt.delta_s) * pt.m * pt.p_s / (pt.m - 2.0);
    let pr = (1.0 - pt.delta_r) * pt.m * pt.p_r / ((pt.m - 2.0) * pt.alpha);
    let noise_d = ps * e_sd + pt.n0;
    let noise_r = ps * e_sr + pt.n0;
    let noise_d_both = ps * e_sd + pr * e_rd + pt.n0;
    Snrs {
        sd: ps * h_sd * a_sd / noise_d,
        sr: ps * h_sr * a_sr / noise_r,
        sd_r: ps * h_sd * a_sd / noise_d_both,
        rd: pr * h_rd * a_rd / noise_d_both,
    }
}

/// Per-draw values, laid out like the engine's components.
pub fn components(pt: &Point, a_sd: f64, a_sr: f64, a_rd: f64) -> Vec<f64> {
    let m = pt.m;
    match pt.scheme {
        "af" => {
            let g = overlapped_snrs(pt, a_sd, a_sr, a_rd);
            let f = g.sr * g.rd / (1.0 + g.sr + g.rd);
            let q = (1.0 + g.sd) * g.sd_r * (1.0 + g.sr) / (1.0 + g.sr + g.rd);
            let direct_part = (1.0 - 2.0 * pt.alpha) * (m - 2.0) * lg(g.sd);
            let coop_part = (m - 2.0) * pt.alpha * lg(g.sd + f + q);
            vec![(direct_part + coop_part) / m]
        }
        "repetition-df" => {
            let g = overlapped_snrs(pt, a_sd, a_sr, a_rd);
            vec![lg(g.sd), lg(g.sr), lg(g.sd + g.rd + g.sd_r + g.sd * g.sd_r)]
        }
        "parallel-df" => {
            let (h_sd, e_sd) = mmse(pt.sigma_sd, pt.delta_s, m, pt.p_s, pt.n0);
            let (h_sr, e_sr) = mmse(pt.sigma_sr, pt.delta_s, m, pt.p_s, pt.n0);
            let (h_rd, e_rd) = mmse(pt.sigma_rd, pt.delta_r, m, pt.p_r, pt.n0);
            let ps1 = (1.0 - pt.delta_s) * m * pt.p_s / ((m - 2.0) * (1.0 - pt.alpha));
            let pr = (1.0 - pt.delta_r) * m * pt.p_r / ((m - 2.0) * pt.alpha);
            let sd1 = ps1 * h_sd * a_sd / (ps1 * e_sd + pt.n0);
            let sr1 = ps1 * h_sr * a_sr / (ps1 * e_sr + pt.n0);
            let rd1 = pr * h_rd * a_rd / (pr * e_rd + pt.n0);
            let src = (1.0 - pt.alpha) * (m - 2.0) / m;
            let rel = pt.alpha * (m - 2.0) / m;
            vec![src * lg(sr1), src * lg(sd1) + rel * lg(rd1)]
        }
        "direct" => {
            let (h_sd, e_sd) = mmse(pt.sigma_sd, pt.delta_s, m, pt.p_s, pt.n0);
            let p = (1.0 - pt.delta_s) * m * pt.p_s / (m - 1.0);
            vec![(m - 1.0) / m * lg(p * h_sd * a_sd / (p * e_sd + pt.n0))]
        }
        other => panic!("unknown scheme {other}"),
    }
}

/// Rate from a list of per-draw `|w|^2` triples, one loop, expectations
/// first and minima afterwards.
pub fn rate(pt: &Point, draws: &[(f64, f64, f64)]) -> f64 {
    let n = draws.len() as f64;
    let mut sums = [0.0; 3];
    for &(a, b, c) in draws {
        for (s, v) in sums.iter_mut().zip(components(pt, a, b, c)) {
            *s += v;
        }
    }
    let mean: Vec<f64> = sums.iter().map(|s| s / n).collect();
    let m = pt.m;
    match pt.scheme {
        "af" | "direct" => mean[0],
        "repetition-df" => {
            ((1.0 - 2.0 * pt.alpha) * (m - 2.0) * mean[0] + (m - 2.0) * pt.alpha * mean[1].min(mean[2])) / m
        }
        "parallel-df" => mean[0].min(mean[1]),
        other => panic!("unknown scheme {other}"),
    }
}
