//! Qualitative behaviour reported for the low- and high-power regimes.

use relay_core::allocator::{optimize_variable, sweep, SweepSpec, SweepVariable};
use relay_core::{ChannelParams, MonteCarlo, PowerSpec, Scheme, SystemConfig};

fn per_node(scheme: Scheme, p: f64) -> SystemConfig {
    SystemConfig {
        scheme,
        power: PowerSpec::PerNode { p_s: p, p_r: p },
        ..SystemConfig::default()
    }
}

fn alpha_argmax(sigmas: (f64, f64, f64), base: SystemConfig, mc: MonteCarlo) -> f64 {
    let channel = ChannelParams::new(sigmas.0, sigmas.1, sigmas.2, 1.0).unwrap();
    sweep(&SweepSpec {
        variable: SweepVariable::Alpha,
        grid: SweepVariable::Alpha.default_grid(base.scheme),
        channel,
        base,
        mc,
    })
    .unwrap()
    .argmax
    .unwrap()
}

#[test]
fn stronger_source_relay_link_moves_parallel_df_resources_to_relay() {
    let mc = MonteCarlo::new(100_000, 1);
    let base = per_node(Scheme::ParallelDf, 0.5);
    let weak = alpha_argmax((1.0, 4.0, 4.0), base, mc);
    let strong = alpha_argmax((1.0, 10.0, 2.0), base, mc);
    assert!(strong > weak, "{strong} vs {weak}");
    // both optima are interior
    assert!(weak > 0.02 && strong < 0.98);
}

#[test]
fn full_cooperation_is_best_at_low_power() {
    let mc = MonteCarlo::new(100_000, 1);
    for scheme in [Scheme::Af, Scheme::RepetitionDf] {
        assert_eq!(alpha_argmax((1.0, 4.0, 4.0), per_node(scheme, 0.5), mc), 0.5);
    }
}

#[test]
fn continuous_alpha_optimum_sits_at_upper_edge_for_af_at_low_power() {
    let base = SystemConfig {
        power: PowerSpec::Total {
            p_total: 1.0,
            theta: 0.6,
        },
        ..SystemConfig::default()
    };
    let opt = optimize_variable(
        SweepVariable::Alpha,
        &ChannelParams::default(),
        &base,
        0.01,
        0.5,
        20,
        &MonteCarlo::new(50_000, 2),
    )
    .unwrap();
    assert!((opt.x - 0.5).abs() < 0.01, "{}", opt.x);
}

#[test]
fn argmax_is_stable_across_seeds() {
    let base = per_node(Scheme::RepetitionDf, 0.5);
    let a = alpha_argmax((1.0, 10.0, 2.0), base, MonteCarlo::new(50_000, 1));
    let b = alpha_argmax((1.0, 10.0, 2.0), base, MonteCarlo::new(50_000, 77));
    assert_eq!(a, b);
}

#[test]
fn relaying_helps_at_unit_power_but_not_at_high_power() {
    let channel = ChannelParams::default();
    let mc = MonteCarlo::new(100_000, 1);
    let best_theta = |scheme, p| {
        let base = SystemConfig {
            scheme,
            power: PowerSpec::Total {
                p_total: p,
                theta: 0.5,
            },
            ..SystemConfig::default()
        };
        let r = sweep(&SweepSpec {
            variable: SweepVariable::Theta,
            grid: SweepVariable::Theta.default_grid(scheme),
            channel,
            base,
            mc,
        })
        .unwrap();
        r.best_row().unwrap().estimate.unwrap().mean
    };
    assert!(best_theta(Scheme::Af, 1.0) > best_theta(Scheme::Direct, 1.0));
    assert!(best_theta(Scheme::RepetitionDf, 1.0) > best_theta(Scheme::Direct, 1.0));
    assert!(best_theta(Scheme::Af, 100.0) < best_theta(Scheme::Direct, 100.0));
}
