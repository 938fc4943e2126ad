//! Interferometer schemes, circuit construction and metric evaluation.
//!
//! Network (modes `A`, `S`, `W`, `V`):
//!
//! ```text
//! A: coherent input, X-displaced by 2√N          -> reference arm a₁
//! S: squeezed vacuum, P-squeezed                  -> signal arm b₁
//! BS1(T):  a₁ = √T a₀ − √(1−T) s₀,  b₁ = √(1−T) a₀ + √T s₀
//! b₁ -> amplifier (idler W) -> phase φ -> loss l (ancilla V) -> b₂
//! readout: N₋ = c†c − d†d on the balanced recombination of a₁ and b₂
//! ```
//!
//! The interferometer is locked at φ = π/2 by default.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use nalgebra::DVector;
use serde::Serialize;

use crate::closed_form::{self, Gain, ParamPoint};
use crate::error::{invalid, Error, Result};
use crate::gauss::{self, GaussianState, Op, SourceTag};
use crate::optimize::{self, OptimizeMode, OptimizerSettings};

pub const MODE_A: usize = 0;
pub const MODE_S: usize = 1;
pub const MODE_W: usize = 2;
pub const MODE_V: usize = 3;
pub const N_MODES: usize = 4;

/// Finite gain standing in for `G → ∞` on the Gaussian engines.
pub const ASYMPTOTIC_GAIN_SURROGATE: f64 = 1e6;

/// Finite-difference step for the exact engine's phase slope.
pub const SLOPE_STEP: f64 = 1e-6;
pub const SLOPE_RICHARDSON_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Conventional: `G = 1`, `T = 1/2`.
    Cqi,
    /// Amplifier with balanced input splitter.
    QiG,
    /// Amplifier with optimised input splitter.
    QiTG,
    /// `T` and `G` taken from the parameter point.
    Custom,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Scheme::Cqi => "cqi",
            Scheme::QiG => "qig",
            Scheme::QiTG => "qitg",
            Scheme::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    ClosedForm,
    GaussianLinearized,
    GaussianExact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum GainMode {
    /// Optimal gain: 1 for `l ≤ 1/2`, `G → ∞` above.
    Free,
    /// Gain set by photon-number matching.
    ConstrainedPhotonNumber,
    Fixed(f64),
}

/// Where the input splitting parameter comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum SplitSource {
    /// Scheme default: `1/2` for CQI/QI^G, the parameter point for custom,
    /// the analytic optimum (free gain) or the numerical optimum (otherwise) for QI_T^G.
    Default,
    /// Analytic optimum at the optimal gain.
    Analytic,
    /// Numerical optimum under the active gain mode.
    Optimized,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub params: ParamPoint,
    pub engine: Engine,
    pub lock_phase: f64,
    pub probe_amplitude: f64,
    pub gain_mode: GainMode,
    pub split: SplitSource,
}

impl SchemeConfig {
    pub fn new(scheme: Scheme, params: ParamPoint) -> Self {
        Self {
            scheme,
            params,
            engine: Engine::ClosedForm,
            lock_phase: FRAC_PI_2,
            probe_amplitude: 5e-4,
            gain_mode: GainMode::Free,
            split: SplitSource::Default,
        }
    }

    pub fn with_engine(mut self, engine: Engine) -> Self {
        self.engine = engine;
        self
    }

    pub fn with_gain_mode(mut self, gain_mode: GainMode) -> Self {
        self.gain_mode = gain_mode;
        self
    }

    pub fn with_split(mut self, split: SplitSource) -> Self {
        self.split = split;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.lock_phase > 0.0 && self.lock_phase < std::f64::consts::PI) {
            return Err(invalid(format!("lock phase {} outside (0, π)", self.lock_phase)));
        }
        if !(self.probe_amplitude > 0.0 && self.probe_amplitude < 0.1) {
            return Err(invalid(format!(
                "probe amplitude {} must be positive and small",
                self.probe_amplitude
            )));
        }
        if let GainMode::Fixed(g) = self.gain_mode {
            if !(g >= 1.0) || !g.is_finite() {
                return Err(invalid(format!("fixed gain must be finite and >= 1, got {g}")));
            }
        }
        if let SplitSource::Fixed(t) = self.split {
            if !(0.0..=1.0).contains(&t) {
                return Err(invalid(format!("split {t} outside [0, 1]")));
            }
        }
        match self.scheme {
            Scheme::Cqi if self.gain_mode != GainMode::Free => {
                return Err(invalid("CQI runs at unit gain; gain settings do not apply"));
            }
            Scheme::Cqi | Scheme::QiG if self.split != SplitSource::Default => {
                return Err(invalid(format!(
                    "{} uses a balanced input splitter",
                    self.scheme.label()
                )));
            }
            _ => {}
        }
        Ok(())
    }
}

/// Concrete `(T, G)` chosen for a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resolved {
    pub t: f64,
    pub gain: Gain,
}

fn resolve_gain(mode: GainMode, t: f64, l: f64) -> Result<Gain> {
    Ok(match mode {
        GainMode::Free => closed_form::g_opt(l)?,
        GainMode::ConstrainedPhotonNumber => Gain::Finite(closed_form::constrained_gain(t, l)?),
        GainMode::Fixed(g) => Gain::Finite(g),
    })
}

/// Pick `(T, G)` for `config` at squeezing `r` and loss `l`, which may differ
/// from the configured point when evaluating reference configurations.
pub fn resolve(config: &SchemeConfig, r: f64, l: f64) -> Result<Resolved> {
    let p = &config.params;
    let settings = OptimizerSettings::default();
    let split = match config.split {
        SplitSource::Fixed(t) => Some(t),
        _ => None,
    };
    match config.scheme {
        Scheme::Cqi => Ok(Resolved {
            t: 0.5,
            gain: Gain::Finite(1.0),
        }),
        Scheme::Custom => {
            let t = split.unwrap_or(p.t);
            let gain = match config.gain_mode {
                GainMode::Free => Gain::Finite(p.g),
                mode => resolve_gain(mode, t, l)?,
            };
            Ok(Resolved { t, gain })
        }
        Scheme::QiG => Ok(Resolved {
            t: 0.5,
            gain: resolve_gain(config.gain_mode, 0.5, l)?,
        }),
        Scheme::QiTG => {
            if let Some(t) = split {
                return Ok(Resolved {
                    t,
                    gain: resolve_gain(config.gain_mode, t, l)?,
                });
            }
            let analytic = matches!(config.split, SplitSource::Analytic)
                || (config.split == SplitSource::Default && config.gain_mode == GainMode::Free);
            if analytic {
                let t = closed_form::t_opt(l, r)?;
                return Ok(Resolved {
                    t,
                    gain: resolve_gain(config.gain_mode, t, l)?,
                });
            }
            match config.gain_mode {
                GainMode::Free => {
                    let o = optimize::minimize_sensitivity(l, r, p.n, OptimizeMode::Free, &settings)?;
                    let gain = match o.g_star {
                        optimize::OptimalGain::Asymptotic { .. } => Gain::Asymptotic,
                        optimize::OptimalGain::Finite { value } => Gain::Finite(value),
                    };
                    Ok(Resolved { t: o.t_star, gain })
                }
                GainMode::ConstrainedPhotonNumber => {
                    let o =
                        optimize::minimize_sensitivity(l, r, p.n, OptimizeMode::ConstrainedPhotonNumber, &settings)?;
                    Ok(Resolved {
                        t: o.t_star,
                        gain: Gain::Finite(closed_form::constrained_gain(o.t_star, l)?),
                    })
                }
                GainMode::Fixed(g) => {
                    let (t, _) = optimize::minimize_split_at_gain(l, r, p.n, g, &settings)?;
                    Ok(Resolved {
                        t,
                        gain: Gain::Finite(g),
                    })
                }
            }
        }
    }
}

/// Gate sequence over modes `A, S, W, V` with the readout pair and the index
/// of the signal-arm phase gate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Circuit {
    pub ops: Vec<Op>,
    pub phase_op: usize,
    pub readout: (usize, usize),
}

impl Circuit {
    /// Circuit for an explicit parameter point with the signal-arm phase set to `phase`.
    pub fn at_phase(p: &ParamPoint, phase: f64) -> Result<Circuit> {
        p.validate()?;
        let ops = vec![
            Op::Tag {
                mode: MODE_A,
                tag: SourceTag::CoherentInput,
            },
            Op::Displace {
                mode: MODE_A,
                x: 2.0 * p.n.sqrt(),
                p: 0.0,
            },
            Op::Tag {
                mode: MODE_S,
                tag: SourceTag::SqueezedInput,
            },
            Op::Squeeze {
                mode: MODE_S,
                r: p.r,
                angle: 0.0,
            },
            Op::Beamsplit {
                i: MODE_A,
                j: MODE_S,
                t: p.t,
            },
            Op::Amplify {
                signal: MODE_S,
                idler: MODE_W,
                gain: p.g,
            },
            Op::Phase {
                mode: MODE_S,
                phi: phase,
            },
            Op::Attenuate {
                mode: MODE_S,
                ancilla: MODE_V,
                loss: p.l,
            },
        ];
        Ok(Circuit {
            ops,
            phase_op: 6,
            readout: (MODE_A, MODE_S),
        })
    }

    pub fn run(&self) -> Result<GaussianState> {
        GaussianState::vacuum(N_MODES)?.apply_all(&self.ops)
    }
}

/// Parameter point actually simulated for a resolved configuration. An
/// asymptotic gain is replaced by [`ASYMPTOTIC_GAIN_SURROGATE`].
fn simulated_point(p: &ParamPoint, resolved: &Resolved, r: f64, l: f64) -> Result<ParamPoint> {
    let g = match resolved.gain {
        Gain::Finite(g) => g,
        Gain::Asymptotic => ASYMPTOTIC_GAIN_SURROGATE,
    };
    ParamPoint::new(p.n, r, resolved.t, g, l)
}

/// Circuit for `config`, with the phase gate at lock + probe.
pub fn build_circuit(config: &SchemeConfig) -> Result<Circuit> {
    config.validate()?;
    let p = &config.params;
    let resolved = resolve(config, p.r, p.l)?;
    let point = simulated_point(p, &resolved, p.r, p.l)?;
    Circuit::at_phase(&point, config.lock_phase + config.probe_amplitude)
}

/// Raw engine output at the lock point. With an asymptotic gain the slope is
/// divided by `G` and variances by `G²`.
#[derive(Debug, Clone, PartialEq)]
struct RawEval {
    slope: f64,
    variance: f64,
    shares: Vec<(SourceTag, f64)>,
}

fn eval_closed_form(p: &ParamPoint, gain: Gain) -> Result<RawEval> {
    match gain {
        Gain::Finite(_) => {
            let slope = closed_form::signal(p);
            let noise = closed_form::noise(p)?;
            Ok(RawEval {
                slope,
                variance: noise * noise,
                shares: closed_form::noise_breakdown(p),
            })
        }
        Gain::Asymptotic => {
            let (slope, noise) = closed_form::per_gain_limit(p)?;
            Ok(RawEval {
                slope,
                variance: noise * noise,
                shares: closed_form::noise_breakdown_per_gain(p),
            })
        }
    }
}

/// Linearised intensity-difference response at phase `phase`: slope from the
/// mean-field tangent and noise from the first-order fluctuation coefficients.
fn linearized(p: &ParamPoint, phase: f64) -> Result<(f64, gauss::NoiseBreakdown)> {
    let circuit = Circuit::at_phase(p, phase)?;
    let k = circuit.phase_op;
    let before = GaussianState::vacuum(N_MODES)?.apply_all(&circuit.ops[..k])?;
    let state = before.apply_all(&circuit.ops[k..])?;

    let (i, j) = circuit.readout;
    let form = gauss::intensity_difference_form(N_MODES, i, j, 0.0);
    let coeffs: DVector<f64> = 2.0 * &form * state.displacement();
    let breakdown = gauss::linear_observable_stats(&state, &coeffs)?;

    // d/dφ of R(φ)μ_b is R(φ + π/2)μ_b; push that tangent through the rest of the arm
    let mut tangent = DVector::zeros(2 * N_MODES);
    tangent[2 * MODE_S] = before.displacement()[2 * MODE_S];
    tangent[2 * MODE_S + 1] = before.displacement()[2 * MODE_S + 1];
    let moved = before
        .with_displacement(tangent)?
        .phase(MODE_S, phase + FRAC_PI_2)?
        .apply_all(&circuit.ops[k + 1..])?;
    let slope = coeffs.dot(moved.displacement()).abs();
    Ok((slope, breakdown))
}

fn exact_mean(p: &ParamPoint, phase: f64) -> Result<f64> {
    let circuit = Circuit::at_phase(p, phase)?;
    let (i, j) = circuit.readout;
    Ok(gauss::nminus_exact(&circuit.run()?, i, j, 0.0)?.mean)
}

/// Central-difference phase slope of the exact mean, checked against the half step.
pub fn exact_slope(p: &ParamPoint, phase: f64) -> Result<f64> {
    let central = |h: f64| -> Result<f64> { Ok((exact_mean(p, phase + h)? - exact_mean(p, phase - h)?) / (2.0 * h)) };
    let coarse = central(SLOPE_STEP)?;
    let fine = central(SLOPE_STEP / 2.0)?;
    let scale = coarse.abs().max(fine.abs());
    if scale == 0.0 {
        return Ok(0.0);
    }
    if (coarse - fine).abs() / scale > SLOPE_RICHARDSON_TOL {
        return Err(Error::SlopeUnstable { coarse, fine });
    }
    Ok(coarse.abs())
}

fn eval_engine(engine: Engine, p: &ParamPoint, resolved: &Resolved, phase: f64) -> Result<RawEval> {
    if engine == Engine::ClosedForm {
        return eval_closed_form(p, resolved.gain);
    }
    let point = simulated_point(p, resolved, p.r, p.l)?;
    let scale = match resolved.gain {
        Gain::Finite(_) => 1.0,
        Gain::Asymptotic => ASYMPTOTIC_GAIN_SURROGATE,
    };
    let (lin_slope, lin) = linearized(&point, phase)?;
    let mut shares: Vec<(SourceTag, f64)> = lin
        .shares
        .iter()
        .map(|(t, v)| (t.clone(), v / (scale * scale)))
        .collect();
    let (slope, variance) = match engine {
        Engine::GaussianLinearized => (lin_slope, lin.variance),
        Engine::GaussianExact => {
            let circuit = Circuit::at_phase(&point, phase)?;
            let (i, j) = circuit.readout;
            let exact = gauss::nminus_exact(&circuit.run()?, i, j, 0.0)?;
            shares.push((
                SourceTag::Other("second-order".into()),
                (exact.variance - lin.variance) / (scale * scale),
            ));
            (exact_slope(&point, phase)?, exact.variance)
        }
        Engine::ClosedForm => unreachable!(),
    };
    Ok(RawEval {
        slope: slope / scale,
        variance: variance / (scale * scale),
        shares,
    })
}

/// Everything plotted for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub signal_slope: f64,
    pub noise_std: f64,
    pub delta_phi: f64,
    pub m_db: f64,
    pub rel_snr_db: f64,
    pub beyond_sql_db: f64,
    pub degradation_db: f64,
    pub breakdown: BTreeMap<String, f64>,
    pub t: f64,
    pub gain: Gain,
    /// `signal_slope`, `noise_std` and `breakdown` are per unit gain when the gain is asymptotic.
    pub per_unit_gain: bool,
}

fn delta_phi_at(config: &SchemeConfig, r: f64, l: f64) -> Result<f64> {
    let resolved = resolve(config, r, l)?;
    let p = ParamPoint {
        r,
        l,
        t: resolved.t,
        g: resolved.gain_value_or(1.0),
        ..config.params
    };
    let raw = eval_engine(config.engine, &p, &resolved, config.lock_phase)?;
    if raw.slope <= 0.0 {
        return Err(Error::SensitivityUndefined(format!(
            "zero phase response at T = {}, l = {l}",
            resolved.t
        )));
    }
    Ok(raw.variance.sqrt() / raw.slope)
}

impl Resolved {
    fn gain_value_or(&self, fallback: f64) -> f64 {
        match self.gain {
            Gain::Finite(g) => g,
            Gain::Asymptotic => fallback,
        }
    }
}

/// Evaluate a configuration.
///
/// `m_db` compares with the same scheme at `r = 0`, re-resolving `(T, G)` by
/// the scheme's own rule; `degradation_db` compares with the same scheme at
/// `l = 0`. Both use the configured engine.
pub fn evaluate(config: &SchemeConfig) -> Result<Metrics> {
    config.validate()?;
    let p = config.params;
    let resolved = resolve(config, p.r, p.l)?;
    let point = ParamPoint {
        t: resolved.t,
        g: resolved.gain_value_or(1.0),
        ..p
    };
    let raw = eval_engine(config.engine, &point, &resolved, config.lock_phase)?;
    if raw.slope <= 0.0 {
        return Err(Error::SensitivityUndefined(format!(
            "zero phase response at T = {}, l = {}",
            resolved.t, p.l
        )));
    }
    let noise_std = raw.variance.sqrt();
    let delta_phi = noise_std / raw.slope;

    let m_db = -closed_form::db::amplitude_ratio(delta_phi, delta_phi_at(config, 0.0, p.l)?);
    let lossless = delta_phi_at(config, p.r, 0.0)?;
    let sql = closed_form::sql(p.n);

    let mut breakdown = BTreeMap::new();
    for (tag, v) in raw.shares {
        *breakdown.entry(tag.to_string()).or_insert(0.0) += v;
    }

    Ok(Metrics {
        signal_slope: raw.slope,
        noise_std,
        delta_phi,
        m_db,
        rel_snr_db: -20.0 * (delta_phi * p.n.sqrt()).log10(),
        beyond_sql_db: closed_form::db::amplitude_ratio(sql, delta_phi),
        degradation_db: closed_form::db::amplitude_ratio(delta_phi, lossless),
        breakdown,
        t: resolved.t,
        gain: resolved.gain,
        per_unit_gain: resolved.gain.is_asymptotic(),
    })
}

/// Source-resolved noise with the loss-induced / amplification-associated grouping.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakdownReport {
    pub total: f64,
    pub shares: BTreeMap<String, f64>,
    /// Loss-vacuum share, `T·l·N`.
    pub loss_induced: f64,
    /// Coherent + squeezed + idler shares, `(1−l)[G²(T+s) − T]·N`.
    pub amplification_associated: f64,
    pub t: f64,
    pub gain: Gain,
    pub per_unit_gain: bool,
}

/// Per-source noise of `config`, always computed with the linearised Gaussian engine.
pub fn noise_breakdown(config: &SchemeConfig) -> Result<BreakdownReport> {
    config.validate()?;
    let p = config.params;
    let resolved = resolve(config, p.r, p.l)?;
    let point = ParamPoint {
        t: resolved.t,
        g: resolved.gain_value_or(1.0),
        ..p
    };
    let raw = eval_engine(Engine::GaussianLinearized, &point, &resolved, config.lock_phase)?;

    let mut shares = BTreeMap::new();
    for (tag, v) in &raw.shares {
        *shares.entry(tag.to_string()).or_insert(0.0) += v;
    }
    let loss_induced = raw
        .shares
        .iter()
        .filter(|(t, _)| *t == SourceTag::LossVacuum)
        .map(|(_, v)| v)
        .sum();
    let amplification_associated = raw
        .shares
        .iter()
        .filter(|(t, _)| {
            matches!(
                t,
                SourceTag::CoherentInput | SourceTag::SqueezedInput | SourceTag::AmplifierIdler
            )
        })
        .map(|(_, v)| v)
        .sum();
    Ok(BreakdownReport {
        total: raw.variance,
        shares,
        loss_induced,
        amplification_associated,
        t: resolved.t,
        gain: resolved.gain,
        per_unit_gain: resolved.gain.is_asymptotic(),
    })
}

#[cfg(test)]
mod tests;
