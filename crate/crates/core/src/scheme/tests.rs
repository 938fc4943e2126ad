use super::*;
use crate::closed_form::db;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn point(n: f64, r: f64, t: f64, g: f64, l: f64) -> ParamPoint {
    ParamPoint::new(n, r, t, g, l).unwrap()
}

// r with e^{-2r} = 0.1
fn r10() -> f64 {
    10f64.ln() / 2.0
}

#[test]
fn cqi_circuit_is_passive_and_balanced() {
    let cfg = SchemeConfig::new(Scheme::Cqi, point(1.0, 0.3, 0.8, 7.0, 0.2));
    let c = build_circuit(&cfg).unwrap();
    assert!(c.ops.contains(&Op::Beamsplit {
        i: MODE_A,
        j: MODE_S,
        t: 0.5
    }));
    assert!(c.ops.contains(&Op::Amplify {
        signal: MODE_S,
        idler: MODE_W,
        gain: 1.0
    }));
    match c.ops[c.phase_op] {
        Op::Phase { mode, phi } => {
            assert_eq!(mode, MODE_S);
            assert!((phi - (FRAC_PI_2 + 5e-4)).abs() < 1e-15);
        }
        ref other => panic!("unexpected op {other:?}"),
    }
}

#[test]
fn qitg_free_uses_analytic_split() {
    let cfg = SchemeConfig::new(Scheme::QiTG, point(1.0, r10(), 0.5, 1.0, 0.9));
    let c = build_circuit(&cfg).unwrap();
    let t = c
        .ops
        .iter()
        .find_map(|op| match op {
            Op::Beamsplit { t, .. } => Some(*t),
            _ => None,
        })
        .unwrap();
    assert!((t - 0.23166).abs() < 1e-5);
}

#[test]
fn constrained_gain_inserted() {
    let cfg = SchemeConfig::new(Scheme::QiG, point(1.0, 0.3, 0.5, 1.0, 0.9))
        .with_gain_mode(GainMode::ConstrainedPhotonNumber);
    let c = build_circuit(&cfg).unwrap();
    let g = c
        .ops
        .iter()
        .find_map(|op| match op {
            Op::Amplify { gain, .. } => Some(*gain),
            _ => None,
        })
        .unwrap();
    assert!((g - 3.16228).abs() < 1e-5);
}

#[test]
fn cqi_lossless_reference() {
    let cfg = SchemeConfig::new(Scheme::Cqi, point(1.0, 1.1513, 0.5, 1.0, 0.0));
    let m = evaluate(&cfg).unwrap();
    assert!((m.delta_phi - 0.31623).abs() < 1e-5);
    assert!((m.m_db - 10.0).abs() < 1e-3);
    assert!(rel(m.delta_phi, m.noise_std / m.signal_slope) < 1e-12);

    let lin = evaluate(&cfg.clone().with_engine(Engine::GaussianLinearized)).unwrap();
    assert!(rel(lin.delta_phi, m.delta_phi) < 1e-10);
    assert!(rel(lin.signal_slope, m.signal_slope) < 1e-10);
    assert!(rel(lin.noise_std, m.noise_std) < 1e-10);
}

#[test]
fn qig_large_gain_plateau() {
    let cfg = SchemeConfig::new(Scheme::QiG, point(1.0, r10(), 0.5, 1.0, 0.9)).with_gain_mode(GainMode::Fixed(1e3));
    let m = evaluate(&cfg).unwrap();
    assert!((m.rel_snr_db - 2.22).abs() < 5e-3);
    assert!((m.m_db - 3.98).abs() < 5e-3);
}

#[test]
fn asymptotic_gain_engines_agree() {
    let base = SchemeConfig::new(Scheme::QiTG, point(1.0, r10(), 0.5, 1.0, 0.9));
    let cf = evaluate(&base).unwrap();
    assert!(cf.per_unit_gain);
    assert!((cf.delta_phi - 0.682518).abs() < 1e-6);
    let lin = evaluate(&base.clone().with_engine(Engine::GaussianLinearized)).unwrap();
    assert!(rel(lin.delta_phi, cf.delta_phi) < 1e-9);
    assert!(rel(lin.signal_slope, cf.signal_slope) < 1e-9);

    // the exact engine carries finite-N corrections, so compare at large N
    let big = SchemeConfig::new(Scheme::QiTG, point(1e10, r10(), 0.5, 1.0, 0.9));
    let cf = evaluate(&big).unwrap();
    let ex = evaluate(&big.with_engine(Engine::GaussianExact)).unwrap();
    assert!(rel(ex.delta_phi, cf.delta_phi) < 1e-5);
}

#[test]
fn scheme_level_enhancement_reoptimises_split() {
    let cfg = SchemeConfig::new(Scheme::QiTG, point(1.0, r10(), 0.5, 1.0, 0.9));
    let m = evaluate(&cfg).unwrap();
    let at_r0 = closed_form::sensitivity_opt(0.9, 0.0, 1.0).unwrap();
    let want = db::amplitude_ratio(at_r0, m.delta_phi);
    assert!((m.m_db - want).abs() < 1e-9);
    assert!((m.m_db - 4.9526).abs() < 1e-3);
}

#[test]
fn exact_engine_converges_with_photon_number() {
    let mut last = f64::INFINITY;
    for n in [1e4, 1e6, 1e8] {
        let p = point(n, 0.5, 0.4, 2.0, 0.3);
        let cf = evaluate(&SchemeConfig::new(Scheme::Custom, p)).unwrap();
        let ex = evaluate(&SchemeConfig::new(Scheme::Custom, p).with_engine(Engine::GaussianExact)).unwrap();
        let d = rel(ex.delta_phi, cf.delta_phi);
        assert!(d < last);
        last = d;
    }
    assert!(last < 1e-5);
}

#[test]
fn zero_slope_is_reported() {
    let cfg = SchemeConfig::new(Scheme::Custom, point(1.0, 0.3, 1.0, 1.0, 0.0));
    assert!(matches!(evaluate(&cfg), Err(Error::SensitivityUndefined(_))));
}

#[test]
fn invalid_configs() {
    let p = point(1.0, 0.3, 0.5, 1.0, 0.2);
    let mut cfg = SchemeConfig::new(Scheme::Cqi, p);
    cfg.lock_phase = 0.0;
    assert!(matches!(evaluate(&cfg), Err(Error::InvalidArgument(_))));
    let cfg = SchemeConfig::new(Scheme::QiG, p).with_gain_mode(GainMode::Fixed(0.5));
    assert!(matches!(build_circuit(&cfg), Err(Error::InvalidArgument(_))));
    let cfg = SchemeConfig::new(Scheme::Cqi, p).with_gain_mode(GainMode::Fixed(2.0));
    assert!(matches!(cfg.validate(), Err(Error::InvalidArgument(_))));
    let cfg = SchemeConfig::new(Scheme::QiG, p).with_split(SplitSource::Fixed(0.3));
    assert!(matches!(cfg.validate(), Err(Error::InvalidArgument(_))));
    let cfg = SchemeConfig::new(Scheme::QiTG, p).with_split(SplitSource::Fixed(0.3));
    assert!(cfg.validate().is_ok());
}

#[test]
fn breakdown_examples() {
    let s = 0.1f64;
    let r = -s.ln() / 2.0;
    let b = noise_breakdown(&SchemeConfig::new(Scheme::Custom, point(1.0, r, 0.5, 1.0, 0.0))).unwrap();
    assert!((b.shares["squeezed-input"] - 0.1).abs() < 1e-12);
    assert!(b.shares["coherent-input"].abs() < 1e-12);
    assert!(b.shares["amplifier-idler"].abs() < 1e-12);
    assert!(b.shares["loss-vacuum"].abs() < 1e-12);

    let n = 3.0;
    let b = noise_breakdown(&SchemeConfig::new(Scheme::Custom, point(n, r, 0.5, 1.0, 0.9))).unwrap();
    assert!(rel(b.loss_induced, 0.45 * n) < 1e-10);
    assert!(b.shares["amplifier-idler"].abs() < 1e-12);

    let (t, g, l) = (0.3, 4.0, 0.6);
    let b = noise_breakdown(&SchemeConfig::new(Scheme::Custom, point(n, r, t, g, l))).unwrap();
    assert!(rel(b.loss_induced, t * l * n) < 1e-10);
    let amp = (1.0 - l) * (g * g * (t + s) - t) * n;
    assert!(rel(b.amplification_associated, amp) < 1e-10);
    assert!(rel(b.loss_induced + b.amplification_associated, b.total) < 1e-10);
}

#[test]
fn half_loss_gain_invariance() {
    let p = point(1.0, 0.4, 0.5, 1.0, 0.5);
    let base = evaluate(&SchemeConfig::new(Scheme::Custom, p)).unwrap();
    for g in [2.0, 5.0, 10.0, 100.0] {
        let m = evaluate(&SchemeConfig::new(Scheme::Custom, p.with_g(g))).unwrap();
        assert!((m.rel_snr_db - base.rel_snr_db).abs() < 1e-6);
        assert!((m.m_db - base.m_db).abs() < 1e-6);
    }
}

#[test]
fn constrained_signal_is_lossless() {
    for l in [0.0, 0.3, 0.6, 0.9, 0.99] {
        let cfg = SchemeConfig::new(Scheme::QiTG, point(5.0, 0.48, 0.5, 1.0, l))
            .with_gain_mode(GainMode::ConstrainedPhotonNumber);
        let m = evaluate(&cfg).unwrap();
        assert!(rel(m.signal_slope, 5.0) < 1e-12, "l = {l}");
    }
}

#[test]
fn degradation_against_lossless_optimum() {
    let cqi = evaluate(&SchemeConfig::new(Scheme::Cqi, point(1.0, r10(), 0.5, 1.0, 0.9))).unwrap();
    assert!((cqi.degradation_db - 16.628).abs() < 1e-3);
    let qitg = evaluate(&SchemeConfig::new(Scheme::QiTG, point(1.0, r10(), 0.5, 1.0, 0.9))).unwrap();
    assert!((qitg.degradation_db - 6.682).abs() < 1e-3);
    assert!((qitg.beyond_sql_db - 3.318).abs() < 1e-3);
}
