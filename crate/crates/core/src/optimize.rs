//! Numerical design optimisation over the input splitting `T` and gain `G`.
//!
//! The gain dependence of the sensitivity is monotone (increasing for
//! `l < 1/2`, decreasing for `l > 1/2`), so the inner problem over `G` is
//! resolved by that structure and only `T` is searched numerically: a coarse
//! grid locates the basin and golden-section search refines it.

use std::cell::Cell;

use serde::Serialize;

use crate::closed_form::{self, ParamPoint};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizeMode {
    /// `G` free in `[1, G_max]`.
    Free,
    /// `G` tied to `T` by photon-number matching, `2G√((1−l)(1−T)T) = 1`.
    ConstrainedPhotonNumber,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OptimalGain {
    Finite {
        value: f64,
    },
    /// The optimum is the `G → ∞` limit; `g_max_used` is the largest gain evaluated.
    Asymptotic {
        g_max_used: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSettings {
    pub g_max: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub grid_points: usize,
    pub tol: f64,
    /// Relative distance to the analytic `G → ∞` optimum below which the gain is reported asymptotic.
    pub asymptote_tol: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            g_max: 1e4,
            t_min: 1e-4,
            t_max: 1.0 - 1e-4,
            grid_points: 64,
            tol: 1e-7,
            asymptote_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationOutcome {
    pub mode: OptimizeMode,
    pub l: f64,
    pub r: f64,
    pub n: f64,
    pub t_star: f64,
    pub g_star: OptimalGain,
    pub delta_phi_star: f64,
    pub analytic_t: f64,
    pub analytic_delta_phi: f64,
    /// `|t_star − analytic_t|`
    pub t_deviation: f64,
    /// `(delta_phi_star − analytic_delta_phi) / analytic_delta_phi`
    pub delta_phi_gap: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub f: f64,
    pub evaluations: usize,
}

/// Golden-section search for a minimum of `f` on `[lo, hi]`.
///
/// Converges to within `tol` of the minimiser when `f` is unimodal on the
/// interval. On a plateau any point of the plateau may be returned.
pub fn golden_section(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<Minimum> {
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(Error::Bracket(format!("[{lo}, {hi}] is not an interval")));
    }
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be > 0, got {tol}")));
    }
    const INV_PHI: f64 = 0.618_033_988_749_894_9;

    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evaluations = 2;

    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
        evaluations += 1;
    }
    let (x, fx) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    if !fx.is_finite() {
        return Err(Error::Bracket(format!(
            "objective is not finite near {x}; [{lo}, {hi}] does not bracket a minimum"
        )));
    }
    Ok(Minimum { x, f: fx, evaluations })
}

/// Evenly spaced scan of `f` on `[lo, hi]`; returns the neighbours of the best
/// sample as a bracket, with the best sample.
pub fn grid_bracket(f: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> Result<(f64, f64, Minimum)> {
    if points < 3 {
        return Err(invalid("grid needs at least 3 points"));
    }
    let step = (hi - lo) / (points - 1) as f64;
    let mut best: Option<(usize, f64)> = None;
    for k in 0..points {
        let v = f(lo + k as f64 * step);
        if v.is_finite() && best.map_or(true, |(_, b)| v < b) {
            best = Some((k, v));
        }
    }
    let (k, v) = best.ok_or_else(|| Error::Bracket("objective is nowhere finite on the grid".into()))?;
    let a = lo + k.saturating_sub(1) as f64 * step;
    let b = lo + (k + 1).min(points - 1) as f64 * step;
    Ok((
        a,
        b,
        Minimum {
            x: lo + k as f64 * step,
            f: v,
            evaluations: points,
        },
    ))
}

fn minimize_1d(f: impl Fn(f64) -> f64, settings: &OptimizerSettings) -> Result<Minimum> {
    let (a, b, coarse) = grid_bracket(&f, settings.t_min, settings.t_max, settings.grid_points)?;
    let fine = golden_section(&f, a, b, settings.tol)?;
    let evaluations = coarse.evaluations + fine.evaluations;
    Ok(if fine.f <= coarse.f {
        Minimum { evaluations, ..fine }
    } else {
        Minimum { evaluations, ..coarse }
    })
}

fn check_inputs(l: f64, r: f64, n: f64, settings: &OptimizerSettings) -> Result<()> {
    if !(0.0..1.0).contains(&l) {
        return Err(invalid(format!("loss must lie in [0, 1), got {l}")));
    }
    if !(r >= 0.0) || !(n > 0.0) {
        return Err(invalid(format!("need r >= 0 and N > 0, got r = {r}, N = {n}")));
    }
    if !(settings.g_max >= 1.0) {
        return Err(invalid(format!("G_max must be >= 1, got {}", settings.g_max)));
    }
    Ok(())
}

fn objective(n: f64, r: f64, l: f64, g: f64) -> impl Fn(f64) -> f64 {
    move |t| {
        ParamPoint::new(n, r, t, g, l)
            .and_then(|p| closed_form::sensitivity(&p))
            .unwrap_or(f64::INFINITY)
    }
}

/// Minimise `δφ` over `(T, G)` at fixed loss, squeezing and photon number.
pub fn minimize_sensitivity(
    l: f64,
    r: f64,
    n: f64,
    mode: OptimizeMode,
    settings: &OptimizerSettings,
) -> Result<OptimizationOutcome> {
    check_inputs(l, r, n, settings)?;
    let analytic_t = closed_form::t_opt(l, r)?;
    let analytic_delta_phi = closed_form::sensitivity_opt(l, r, n)?;
    let calls = Cell::new(0usize);

    let (t_star, g_star, delta_phi_star) = match mode {
        OptimizeMode::Free => {
            let g = if l <= 0.5 { 1.0 } else { settings.g_max };
            let f = objective(n, r, l, g);
            let counted = |t: f64| {
                calls.set(calls.get() + 1);
                f(t)
            };
            let best = minimize_1d(counted, settings)?;
            if l <= 0.5 {
                (best.x, OptimalGain::Finite { value: 1.0 }, best.f)
            } else if (best.f - analytic_delta_phi).abs() / analytic_delta_phi < settings.asymptote_tol {
                // δφ²(G) = A + B/G² exactly, so two gains fix the G → ∞ limit A
                let half = objective(n, r, l, settings.g_max / 2.0)(best.x);
                calls.set(calls.get() + 1);
                let limit = ((4.0 * best.f * best.f - half * half) / 3.0).sqrt();
                (
                    best.x,
                    OptimalGain::Asymptotic {
                        g_max_used: settings.g_max,
                    },
                    limit,
                )
            } else {
                (best.x, OptimalGain::Finite { value: settings.g_max }, best.f)
            }
        }
        OptimizeMode::ConstrainedPhotonNumber => {
            let g_max = settings.g_max;
            let counted = |t: f64| {
                calls.set(calls.get() + 1);
                match closed_form::constrained_gain(t, l) {
                    Ok(g) if g <= g_max => objective(n, r, l, g)(t),
                    _ => f64::INFINITY,
                }
            };
            let best = minimize_1d(counted, settings).map_err(|e| match e {
                Error::Bracket(msg) => Error::ConstraintInfeasible(msg),
                other => other,
            })?;
            let g = closed_form::constrained_gain(best.x, l)?;
            (best.x, OptimalGain::Finite { value: g }, best.f)
        }
    };

    Ok(OptimizationOutcome {
        mode,
        l,
        r,
        n,
        t_star,
        g_star,
        delta_phi_star,
        analytic_t,
        analytic_delta_phi,
        t_deviation: (t_star - analytic_t).abs(),
        delta_phi_gap: (delta_phi_star - analytic_delta_phi) / analytic_delta_phi,
        evaluations: calls.get(),
    })
}

/// Best splitting ratio at a fixed gain. Returns `(T, δφ)`.
pub fn minimize_split_at_gain(l: f64, r: f64, n: f64, g: f64, settings: &OptimizerSettings) -> Result<(f64, f64)> {
    check_inputs(l, r, n, settings)?;
    if !(g >= 1.0) {
        return Err(invalid(format!("gain must be >= 1, got {g}")));
    }
    let best = minimize_1d(objective(n, r, l, g), settings)?;
    Ok((best.x, best.f))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub outcome: OptimizationOutcome,
    pub t_tolerance: f64,
    pub delta_phi_tolerance: f64,
    pub note: Option<String>,
}

/// Free-mode optimisation checked against the analytic optimum:
/// `|ΔT| < 1e-4` and relative `δφ` gap `< 1e-6`.
pub fn validate_against_analytic(l: f64, r: f64) -> Result<ValidationReport> {
    const T_TOL: f64 = 1e-4;
    const PHI_TOL: f64 = 1e-6;
    let settings = OptimizerSettings::default();
    let outcome = minimize_sensitivity(l, r, 1.0, OptimizeMode::Free, &settings)?;

    let mut passed = outcome.t_deviation < T_TOL && outcome.delta_phi_gap.abs() < PHI_TOL;
    let expect_asymptotic = l > 0.5;
    passed &= matches!(outcome.g_star, OptimalGain::Asymptotic { .. }) == expect_asymptotic;

    let mut note = None;
    if l == 0.5 {
        // any gain is optimal at the transition
        let at_g_max = objective(1.0, r, l, settings.g_max)(outcome.t_star);
        let spread = (at_g_max - outcome.delta_phi_star).abs() / outcome.delta_phi_star;
        passed &= spread < PHI_TOL;
        note = Some(format!("gain-independent at l = 0.5 (relative spread {spread:.1e})"));
    }
    Ok(ValidationReport {
        passed,
        outcome,
        t_tolerance: T_TOL,
        delta_phi_tolerance: PHI_TOL,
        note,
    })
}
