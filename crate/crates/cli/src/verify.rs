use std::f64::consts::LN_10;

use caqi_core::fock::full_chain_check;
use caqi_core::gauss::check_physical;
use caqi_core::optimize::validate_against_analytic;
use caqi_core::scheme::Circuit;
use caqi_core::{closed_form, evaluate, Engine, ParamPoint, Result, Scheme, SchemeConfig};
use serde::Serialize;
use serde_json::json;

use crate::args::Suite;
use crate::output::{fmt_num, json_text, Format, Metadata};

pub const ENGINE_REL_TOL: f64 = 1e-9;
pub const REFERENCE_ABS_TOL: f64 = 1e-4;
pub const FOCK_PASSIVE_TOL: f64 = 1e-8;
pub const FOCK_MILD_TOL: f64 = 1e-3;
pub const EXACT_LIMIT_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    fn from_result(name: &str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((passed, detail)) => Self::new(name, passed, detail),
            Err(e) => Self::new(name, false, format!("error: {e}")),
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn r10() -> f64 {
    LN_10 / 2.0
}

fn custom(p: ParamPoint, engine: Engine) -> SchemeConfig {
    SchemeConfig::new(Scheme::Custom, p).with_engine(engine)
}

/// Closed form against the linearized Gaussian engine; reports the first divergent quantity.
fn engine_equivalence() -> Result<(bool, String)> {
    let mut count = 0;
    for &l in &[0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99] {
        for &r in &[0.0, 0.5, r10()] {
            for &t in &[0.1, 0.3, 0.5, 0.8] {
                for &g in &[1.0, 1.5, 5.0, 30.0] {
                    let p = ParamPoint::new(1.0, r, t, g, l)?;
                    let closed = evaluate(&custom(p, Engine::ClosedForm))?;
                    let linear = evaluate(&custom(p, Engine::GaussianLinearized))?;
                    count += 1;
                    for (name, a, b) in [
                        ("signal_slope", closed.signal_slope, linear.signal_slope),
                        ("noise_std", closed.noise_std, linear.noise_std),
                    ] {
                        if rel(b, a) > ENGINE_REL_TOL {
                            let at = format!("l={} r={} t={} g={}", fmt_num(l), fmt_num(r), fmt_num(t), fmt_num(g));
                            return Ok((
                                false,
                                format!("{name} diverges at {at}: closed {} linear {}", fmt_num(a), fmt_num(b)),
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok((true, format!("{count} points agree to {ENGINE_REL_TOL:e}")))
}

fn physicality() -> Result<(bool, String)> {
    let mut worst_sym = 0f64;
    let mut worst_eig = f64::INFINITY;
    for &l in &[0.0, 0.5, 0.9] {
        for &g in &[1.0, 3.0, 100.0] {
            let p = ParamPoint::new(4.0, r10(), 0.3, g, l)?;
            let rep = check_physical(&Circuit::at_phase(&p, 0.7)?.run()?);
            worst_sym = worst_sym.max(rep.symplectic_error);
            worst_eig = worst_eig.min(rep.min_eigenvalue);
            if !rep.passed {
                return Ok((false, format!("l={} g={}: {rep:?}", fmt_num(l), fmt_num(g))));
            }
        }
    }
    Ok((
        true,
        format!("symplectic error {worst_sym:.1e}; min uncertainty eigenvalue {worst_eig:.3e}"),
    ))
}

fn analytic_optima() -> Result<(bool, String)> {
    for &l in &[0.0, 0.2, 0.5, 0.7, 0.9, 0.99] {
        let rep = validate_against_analytic(l, r10())?;
        if !rep.passed {
            return Ok((
                false,
                format!(
                    "l={}: dT {:.2e} gap {:.2e}",
                    fmt_num(l),
                    rep.outcome.t_deviation,
                    rep.outcome.delta_phi_gap
                ),
            ));
        }
    }
    Ok((
        true,
        "optimizer matches the analytic split and sensitivity at 6 losses".into(),
    ))
}

fn half_loss_invariance() -> Result<(bool, String)> {
    let base = closed_form::sensitivity(&ParamPoint::new(1.0, r10(), 0.5, 1.0, 0.5)?)?;
    let mut worst = 0f64;
    for &g in &[2.0, 10.0, 1e3] {
        worst = worst.max(rel(
            closed_form::sensitivity(&ParamPoint::new(1.0, r10(), 0.5, g, 0.5)?)?,
            base,
        ));
    }
    Ok((worst < ENGINE_REL_TOL, format!("max relative spread {worst:.1e}")))
}

fn reference_values() -> Result<(bool, String)> {
    let n = 4e14;
    let p = ParamPoint::new(n, r10(), 0.5, 1.0, 0.9)?;
    let cqi = evaluate(&SchemeConfig::new(Scheme::Cqi, p))?;
    let qitg = evaluate(&SchemeConfig::new(Scheme::QiTG, p))?;
    let got = [
        ("cqi_dphi_sqrt_n", cqi.delta_phi * n.sqrt(), 2.144761),
        ("qitg_dphi_sqrt_n", qitg.delta_phi * n.sqrt(), 0.682518),
        ("qitg_m_db", qitg.m_db, 4.952594),
    ];
    for (name, v, want) in got {
        if (v - want).abs() > REFERENCE_ABS_TOL {
            return Ok((false, format!("{name} = {} expected {}", fmt_num(v), fmt_num(want))));
        }
    }
    Ok((
        true,
        format!("l=0.9: cqi {:.5} qitg {:.5} m {:.4} dB", got[0].1, got[1].1, got[2].1),
    ))
}

fn fock_passive() -> Result<(bool, String)> {
    let rep = full_chain_check(&ParamPoint::new(0.64, 0.0, 0.6, 1.0, 0.0)?, 12)?;
    Ok((
        rep.max_deviation() < FOCK_PASSIVE_TOL,
        format!("cutoff 12 deviation {:.1e}", rep.max_deviation()),
    ))
}

fn fock_ladder() -> Result<(bool, String)> {
    let p = ParamPoint::new(0.64, 0.3, 0.6, 1.5, 0.3)?;
    let devs = [8, 12, 16]
        .iter()
        .map(|&c| full_chain_check(&p, c).map(|r| r.max_deviation()))
        .collect::<Result<Vec<_>>>()?;
    let passed = devs.windows(2).all(|w| w[1] < w[0]);
    Ok((
        passed,
        format!(
            "g=1.5 deviations at cutoff 8/12/16: {:.2e} {:.2e} {:.2e}",
            devs[0], devs[1], devs[2]
        ),
    ))
}

fn fock_mild() -> Result<(bool, String)> {
    let rep = full_chain_check(&ParamPoint::new(0.64, 0.3, 0.6, 1.2, 0.3)?, 12)?;
    Ok((
        rep.max_deviation() < FOCK_MILD_TOL,
        format!("g=1.2 cutoff 12 deviation {:.2e}", rep.max_deviation()),
    ))
}

/// The exact engine approaches the linearized one as `1/N`.
fn exact_scaling() -> Result<(bool, String)> {
    let mut diffs = vec![];
    for &n in &[1e2, 1e4, 1e6, 1e8, 1e10] {
        let p = ParamPoint::new(n, 0.5, 0.4, 2.0, 0.3)?;
        let exact = evaluate(&custom(p, Engine::GaussianExact))?;
        let linear = evaluate(&custom(p, Engine::GaussianLinearized))?;
        diffs.push(rel(exact.delta_phi, linear.delta_phi));
    }
    let last = diffs[diffs.len() - 1];
    let passed = diffs.windows(2).all(|w| w[1] < w[0]) && last < EXACT_LIMIT_TOL;
    let shown: Vec<String> = diffs.iter().map(|d| format!("{d:.1e}")).collect();
    Ok((passed, format!("relative gap at N=1e2..1e10: {}", shown.join(" "))))
}

pub fn run(suite: Suite) -> Vec<Check> {
    let mut checks = vec![
        Check::from_result("engine-equivalence", engine_equivalence()),
        Check::from_result("gaussian-physicality", physicality()),
        Check::from_result("analytic-optima", analytic_optima()),
        Check::from_result("half-loss-gain-invariance", half_loss_invariance()),
        Check::from_result("reference-values", reference_values()),
    ];
    if suite == Suite::Full {
        checks.push(Check::from_result("fock-passive-chain", fock_passive()));
        checks.push(Check::from_result("fock-cutoff-convergence", fock_ladder()));
        checks.push(Check::from_result("fock-mild-gain-chain", fock_mild()));
        checks.push(Check::from_result("exact-engine-n-scaling", exact_scaling()));
    }
    checks
}

pub fn render(suite: Suite, checks: &[Check], format: Format) -> String {
    let mut md = Metadata::new();
    md.push("suite", if suite == Suite::Full { "full" } else { "fast" });
    match format {
        Format::Json => json_text(&json!({
            "metadata": md.to_json(),
            "passed": checks.iter().all(|c| c.passed),
            "checks": checks,
        })),
        Format::Csv => {
            let mut out = String::new();
            for (k, v) in &md.0 {
                out.push_str(&format!("# {k}: {v}\n"));
            }
            out.push_str("status,check,detail\n");
            for c in checks {
                let status = if c.passed { "PASS" } else { "FAIL" };
                out.push_str(&format!("{status},{},{}\n", c.name, c.detail.replace(',', ";")));
            }
            out
        }
    }
}
