use super::*;
use crate::channel::ChannelParams;
use crate::fluctuation::{expected_counts, FluctuationModel, PopulationMode};
use crate::numerics::error_entropy;
use crate::security::{allocate_budget, SplitPolicy};
use approx::assert_relative_eq;
use proptest::prelude::*;

fn channel(loss_db: f64) -> ChannelParams {
    ChannelParams::new(1.7e-6, 0.045, 0.033, loss_db).unwrap()
}

fn config(
    kind: ProtocolKind,
    pulses: f64,
    zeta: f64,
    fluctuation: FluctuationKind,
) -> ProtocolConfig {
    let budget =
        allocate_budget(zeta, kind.family(), kind.default_n_pe(), SplitPolicy::Equal).unwrap();
    let (nu2, sifting, population, estimation) = match kind {
        ProtocolKind::T12 => (
            0.01,
            Sifting::BothBiased,
            PopulationMode::Received,
            EstimationMethod::Decoy,
        ),
        ProtocolKind::UcWei => (
            0.0,
            Sifting::AliceSignalZ,
            PopulationMode::Sent,
            EstimationMethod::Decoy,
        ),
        _ => (
            0.0,
            Sifting::BothBiased,
            PopulationMode::Sent,
            EstimationMethod::Decoy,
        ),
    };
    ProtocolConfig {
        kind,
        pulses,
        mu: 0.5,
        nu: 0.1,
        nu2,
        p_mu: 0.8,
        p_nu: 0.1,
        p_low: 0.1,
        q_z: 0.9,
        q_bz: 0.9,
        f_ec: DEFAULT_F_EC,
        sifting,
        estimation,
        budget,
        fluctuation: fluctuation.resolve(&budget).unwrap(),
        population,
        finite_corrections: fluctuation != FluctuationKind::None,
        ts_sample_fraction: DEFAULT_TS_SAMPLE_FRACTION,
    }
}

const KINDS: [ProtocolKind; 4] = [
    ProtocolKind::UcWei,
    ProtocolKind::UcRaymond,
    ProtocolKind::UcBoth,
    ProtocolKind::T12,
];

#[test]
fn delta_example() {
    let d = finite_correction_delta(1e10, 1.67e-11, 1.67e-11).unwrap();
    assert!((d - 4.247e-4).abs() < 1e-7, "{d}");
    let mut n = 1e6;
    let mut prev = f64::INFINITY;
    for _ in 0..60 {
        let d = finite_correction_delta(n, 1e-10, 1e-10).unwrap();
        assert!(d < prev);
        prev = d;
        n *= 2.0;
    }
    assert!(prev < 1e-8);
    assert!(finite_correction_delta(0.0, 1e-10, 1e-10).is_err());
    assert!(finite_correction_delta(1e6, 0.0, 1e-10).is_err());
}

#[test]
fn evaluators_reject_other_kinds() {
    let ch = channel(10.0);
    let wei = config(
        ProtocolKind::UcWei,
        1e12,
        1e-10,
        FluctuationKind::StandardError,
    );
    assert!(matches!(
        rate_uc_raymond(&wei, &ch),
        Err(crate::Error::Config(_))
    ));
    assert!(matches!(rate_t12(&wei, &ch), Err(crate::Error::Config(_))));
    let ray = config(
        ProtocolKind::UcRaymond,
        1e12,
        1e-10,
        FluctuationKind::StandardError,
    );
    assert!(matches!(
        rate_uc_wei(&ray, &ch),
        Err(crate::Error::Config(_))
    ));
    assert!(matches!(
        rate_uc_both(&ray, &ch),
        Err(crate::Error::Config(_))
    ));
    // budget family must follow the kind
    let mismatched = ProtocolConfig {
        kind: ProtocolKind::UcRaymond,
        ..wei
    };
    assert!(evaluate(&mismatched, &ch).is_err());
}

#[test]
fn finite_terms_vanish_without_fluctuation() {
    let ch = channel(15.0);
    for kind in KINDS {
        let cfg = config(kind, 1e18, 1e-10, FluctuationKind::None);
        let finite = evaluate(&cfg, &ch).unwrap().rate;
        let asym = asymptotic_rate(&cfg, &ch).unwrap().rate;
        assert!(asym > 0.0);
        assert_relative_eq!(finite, asym, max_relative = 1e-9);
    }
}

#[test]
fn finite_key_converges_to_asymptotic() {
    let ch = channel(15.0);
    for kind in KINDS {
        for fluct in [FluctuationKind::StandardError, FluctuationKind::Hoeffding] {
            // the additive Hoeffding deviation needs more pulses to vanish
            let pulses = if fluct == FluctuationKind::Hoeffding {
                1e24
            } else {
                1e18
            };
            let cfg = config(kind, pulses, 1e-10, fluct);
            let finite = evaluate(&cfg, &ch).unwrap().rate;
            let asym = asymptotic_rate(&cfg, &ch).unwrap().rate;
            assert!(finite <= asym);
            assert!(
                (asym - finite) / asym < 1e-3,
                "{kind} {fluct}: {finite} vs {asym}"
            );
        }
    }
}

#[test]
fn raymond_without_signal_pulses_is_zero() {
    let ch = channel(5.0);
    let mut cfg = config(
        ProtocolKind::UcRaymond,
        1e12,
        1e-10,
        FluctuationKind::StandardError,
    );
    cfg.p_mu = 0.0;
    cfg.p_nu = 0.5;
    cfg.p_low = 0.5;
    let r = rate_uc_raymond(&cfg, &ch).unwrap();
    assert_eq!(r.rate, 0.0);
    assert!(r.collapsed);
    assert_eq!(r.terms[0].sifted, 0.0);
    assert_eq!(r.terms[0].value, 0.0);
}

#[test]
fn both_reduces_to_raymond_without_decoy_key() {
    let ch = channel(12.0);
    let mut ray = config(ProtocolKind::UcRaymond, 1e12, 1e-10, FluctuationKind::None);
    ray.p_mu = 0.9;
    ray.p_nu = 0.0;
    ray.p_low = 0.1;
    let both = ProtocolConfig {
        kind: ProtocolKind::UcBoth,
        ..ray
    };
    let a = rate_uc_raymond(&ray, &ch).unwrap().rate;
    let b = rate_uc_both(&both, &ch).unwrap().rate;
    assert!(a > 0.0);
    assert!((a - b).abs() <= 1e-12 * a);
}

#[test]
fn both_adds_a_nonnegative_decoy_term() {
    let ch = channel(12.0);
    let ray = config(
        ProtocolKind::UcRaymond,
        1e15,
        1e-10,
        FluctuationKind::Hoeffding,
    );
    let both = ProtocolConfig {
        kind: ProtocolKind::UcBoth,
        ..ray
    };
    let a = rate_uc_raymond(&ray, &ch).unwrap();
    let b = rate_uc_both(&both, &ch).unwrap();
    assert_eq!(b.terms.len(), 2);
    assert_eq!(a.terms[0], b.terms[0]);
    assert!(b.terms[1].value > 0.0);
    assert!(b.rate > a.rate);
}

#[test]
fn combined_is_the_pointwise_maximum() {
    for pulses in [1e12, 1e15] {
        for km in (0..=120).step_by(10) {
            let ch = channel(0.2 * km as f64);
            let mut cfg = config(
                ProtocolKind::T12,
                pulses,
                1e-10,
                FluctuationKind::StandardError,
            );
            let mut rates = Vec::new();
            for method in [
                EstimationMethod::Signal,
                EstimationMethod::Decoy,
                EstimationMethod::Combined,
            ] {
                cfg.estimation = method;
                rates.push(rate_t12(&cfg, &ch).unwrap());
            }
            assert_eq!(rates[2].rate, rates[0].rate.max(rates[1].rate));
            assert_ne!(rates[2].estimation, Some(EstimationMethod::Combined));
        }
    }
}

#[test]
fn signal_estimation_removes_the_disclosed_sample() {
    let ch = channel(10.0);
    let mut cfg = config(
        ProtocolKind::T12,
        1e12,
        1e-10,
        FluctuationKind::StandardError,
    );
    cfg.estimation = EstimationMethod::Signal;
    cfg.ts_sample_fraction = 0.2;
    let r = rate_t12(&cfg, &ch).unwrap();
    let z_pool = cfg.pulses * cfg.p_mu * cfg.q_z * cfg.q_bz;
    assert_relative_eq!(
        r.terms[0].pool_fraction,
        0.8 * z_pool / cfg.pulses,
        max_relative = 1e-14
    );
}

#[test]
fn expected_counts_examples() {
    let ch = channel(10.0);
    let mut cfg = config(
        ProtocolKind::UcRaymond,
        1e12,
        1e-10,
        FluctuationKind::StandardError,
    );
    cfg.p_mu = 1.0;
    cfg.p_nu = 0.0;
    cfg.p_low = 0.0;
    cfg.q_z = 1.0;
    cfg.q_bz = 1.0;
    assert_eq!(
        expected_counts(&cfg, &ch).unwrap().z(Intensity::Signal),
        1e12
    );

    cfg.p_mu = 0.5;
    cfg.p_nu = 0.25;
    cfg.p_low = 0.25;
    cfg.q_z = 0.9;
    cfg.q_bz = 0.9;
    let sent = expected_counts(&cfg, &ch).unwrap();
    assert_relative_eq!(sent.z(Intensity::Signal), 4.05e11, max_relative = 1e-14);
    assert!(sent.x(Intensity::Signal) <= sent.sent(Intensity::Signal));

    cfg.population = PopulationMode::Received;
    let received = expected_counts(&cfg, &ch).unwrap();
    // computed gain 2.24917e-3 at 10 dB, μ = 0.5
    assert!((received.z(Intensity::Signal) - 4.05e11 * 2.24917e-3).abs() < 1e5);

    cfg.p_nu = 0.35;
    assert!(matches!(
        expected_counts(&cfg, &ch),
        Err(crate::Error::Config(_))
    ));
}

#[test]
fn wei_audit_recomputes() {
    let ch = channel(10.0);
    let cfg = config(
        ProtocolKind::UcWei,
        1e12,
        1e-10,
        FluctuationKind::StandardError,
    );
    let r = rate_uc_wei(&cfg, &ch).unwrap();
    let t = r.primary().unwrap();
    assert_eq!(r.signal_gain, ch.gain(cfg.mu));
    assert_eq!(r.signal_qber, ch.qber(cfg.mu).unwrap());
    assert_relative_eq!(
        t.q1_l,
        r.decoy.y1_l * cfg.mu * (-cfg.mu).exp(),
        max_relative = 1e-12
    );
    assert_relative_eq!(t.q0, r.decoy.y0_l * (-cfg.mu).exp(), max_relative = 1e-12);
    let pool = cfg.pulses * cfg.p_mu * cfg.q_bz;
    assert_relative_eq!(t.pool_fraction, pool / cfg.pulses, max_relative = 1e-14);
    let ev = crate::security::ev_cost(pool, cfg.budget.eps_ev).unwrap();
    let pa = crate::security::pa_cost(cfg.budget.eps_pa).unwrap();
    assert_eq!((r.ev_bits, r.pa_bits), (ev, pa));
    let u = cfg.fluctuation;
    let FluctuationModel::StandardError { u_alpha } = u else {
        panic!("standard error expected")
    };
    assert_relative_eq!(
        r.gain_bounds[0].upper,
        r.signal_gain + u_alpha * (r.signal_gain / (cfg.pulses * cfg.p_mu)).sqrt(),
        max_relative = 1e-12
    );
    let bracket = -t.gain * cfg.f_ec * error_entropy(t.qber)
        + t.q1_l * (1.0 - error_entropy(t.e1_u + t.theta))
        + t.q0;
    let rate = (t.pool_fraction * bracket - (ev + pa) / cfg.pulses).max(0.0);
    assert!((r.rate - rate).abs() <= 1e-12 * rate.max(1e-300));
    assert!(r.rate > 0.0);
}

#[test]
fn smooth_audit_recomputes() {
    let ch = channel(10.0);
    let cfg = config(
        ProtocolKind::UcBoth,
        1e12,
        1e-10,
        FluctuationKind::Hoeffding,
    );
    let r = rate_uc_both(&cfg, &ch).unwrap();
    let mut total = 0.0;
    for t in &r.terms {
        let key_count = match cfg.population {
            PopulationMode::Sent => t.pool_fraction * cfg.pulses,
            PopulationMode::Received => t.sifted,
        };
        let delta =
            finite_correction_delta(key_count, cfg.budget.eps_bar, cfg.budget.eps_pa).unwrap();
        assert_relative_eq!(t.delta, delta, max_relative = 1e-12);
        let s = (t.q0 + t.q1_l * (1.0 - error_entropy(t.e_phase))) / t.gain;
        let v =
            (t.pool_fraction * t.gain * (s - delta - cfg.f_ec * error_entropy(t.qber))).max(0.0);
        assert!((t.value - v).abs() <= 1e-12 * v.max(1e-300));
        assert_relative_eq!(t.e_phase, t.e1_u + t.theta);
        total += v;
    }
    assert!((r.rate - total).abs() <= 1e-12 * total);
}

#[test]
fn rate_decreases_with_loss() {
    for kind in KINDS {
        let cfg = config(kind, 1e12, 1e-10, FluctuationKind::StandardError);
        let mut prev = f64::INFINITY;
        for t in 0..=30 {
            let r = asymptotic_rate(&cfg, &channel(t as f64)).unwrap().rate;
            assert!(r <= prev, "{kind} at {t} dB");
            prev = r;
        }
    }
}

#[test]
fn infeasible_configs_rate_zero() {
    let ch = channel(10.0);
    let mut cfg = config(
        ProtocolKind::UcWei,
        1e12,
        1e-10,
        FluctuationKind::StandardError,
    );
    cfg.p_mu = 0.9;
    assert!(evaluate(&cfg, &ch).is_err());
    assert_eq!(rate_or_zero(&cfg, &ch), 0.0);
}

fn kind_strategy() -> impl Strategy<Value = ProtocolKind> {
    prop::sample::select(KINDS.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn finite_never_beats_asymptotic(
        kind in kind_strategy(),
        loss in 0.0..35.0f64,
        log_n in 8.0..16.0f64,
        mu in 0.1..0.9f64,
        nu_frac in 0.05..0.6f64,
        p_nu in 0.02..0.3f64,
        p_low in 0.02..0.3f64,
        q in 0.5..0.99f64,
        hoeffding in any::<bool>(),
        sample in 0.01..0.5f64,
    ) {
        let fluct = if hoeffding { FluctuationKind::Hoeffding } else { FluctuationKind::StandardError };
        let mut cfg = config(kind, 10f64.powf(log_n), 1e-10, fluct);
        cfg.mu = mu;
        cfg.nu = nu_frac * mu;
        if kind == ProtocolKind::T12 {
            cfg.nu2 = 0.3 * cfg.nu;
        }
        cfg.p_nu = p_nu;
        cfg.p_low = p_low;
        cfg.p_mu = 1.0 - p_nu - p_low;
        cfg.q_z = q;
        cfg.q_bz = q;
        cfg.ts_sample_fraction = sample;
        for method in [EstimationMethod::Signal, EstimationMethod::Decoy, EstimationMethod::Combined] {
            cfg.estimation = method;
            let ch = channel(loss);
            let finite = rate_or_zero(&cfg, &ch);
            let asym = asymptotic_rate(&cfg, &ch).unwrap().rate;
            prop_assert!((0.0..=1.0).contains(&finite));
            prop_assert!((0.0..=1.0).contains(&asym));
            prop_assert!(finite <= asym, "{} {}: {} > {}", kind, method, finite, asym);
        }
    }
}
