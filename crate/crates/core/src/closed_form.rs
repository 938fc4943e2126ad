//! Analytic signal, noise and sensitivity of the amplifier-assisted
//! interferometer, plus the optimal splitting ratio and gain.
//!
//! With mean input photon number `N`, squeezing `r` (`s = e^{-2r}`), input
//! splitting parameter `T`, amplitude gain `G` and signal-arm loss `l`:
//!
//! ```text
//! Signal = 2 √((1−l)(1−T)T) · G · N
//! Noise  = √([G²(1−l)(T+s) + T(2l−1)] · N)
//! δφ     = Noise / Signal
//! ```
//!
//! `T` is the reference-arm coherent fraction; it also weights the loss
//! vacuum term in the noise.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::gauss::SourceTag;

/// Scalar model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamPoint {
    /// Mean photon number of the coherent input.
    pub n: f64,
    /// Squeezing parameter of the injected squeezed vacuum.
    pub r: f64,
    /// Input splitting parameter in `[0, 1]`.
    pub t: f64,
    /// Amplitude gain, `>= 1`.
    pub g: f64,
    /// Loss of the signal arm in `[0, 1]`.
    pub l: f64,
}

impl ParamPoint {
    pub fn new(n: f64, r: f64, t: f64, g: f64, l: f64) -> Result<Self> {
        let p = Self { n, r, t, g, l };
        p.validate()?;
        Ok(p)
    }

    /// Balanced lossless conventional interferometer with squeezing `r`.
    pub fn conventional(n: f64, r: f64, l: f64) -> Result<Self> {
        Self::new(n, r, 0.5, 1.0, l)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n > 0.0) || !self.n.is_finite() {
            return Err(invalid(format!("photon number must be finite and > 0, got {}", self.n)));
        }
        if !(self.r >= 0.0) || !self.r.is_finite() {
            return Err(invalid(format!("squeezing r must be finite and >= 0, got {}", self.r)));
        }
        if !(0.0..=1.0).contains(&self.t) {
            return Err(invalid(format!("splitting T must lie in [0, 1], got {}", self.t)));
        }
        if !(self.g >= 1.0) || !self.g.is_finite() {
            return Err(invalid(format!("gain must be finite and >= 1, got {}", self.g)));
        }
        if !(0.0..=1.0).contains(&self.l) {
            return Err(invalid(format!("loss must lie in [0, 1], got {}", self.l)));
        }
        Ok(())
    }

    /// `e^{-2r}`
    pub fn s(&self) -> f64 {
        (-2.0 * self.r).exp()
    }

    pub fn with_r(self, r: f64) -> Self {
        Self { r, ..self }
    }

    pub fn with_l(self, l: f64) -> Self {
        Self { l, ..self }
    }

    pub fn with_t(self, t: f64) -> Self {
        Self { t, ..self }
    }

    pub fn with_g(self, g: f64) -> Self {
        Self { g, ..self }
    }
}

/// Optimal amplitude gain: either a finite value or the `G → ∞` limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Gain {
    Finite(f64),
    Asymptotic,
}

impl Gain {
    pub fn is_asymptotic(&self) -> bool {
        matches!(self, Gain::Asymptotic)
    }
}

/// Phase response `|d⟨N₋⟩/dφ|` at mid-fringe.
pub fn signal(p: &ParamPoint) -> f64 {
    2.0 * ((1.0 - p.l) * (1.0 - p.t) * p.t).sqrt() * p.g * p.n
}

fn noise_radicand(p: &ParamPoint) -> f64 {
    p.g * p.g * (1.0 - p.l) * (p.t + p.s()) + p.t * (2.0 * p.l - 1.0)
}

/// Standard deviation of the intensity difference at mid-fringe.
pub fn noise(p: &ParamPoint) -> Result<f64> {
    let rad = noise_radicand(p);
    if rad < -1e-12 * (1.0 + p.g * p.g) {
        return Err(Error::InternalConsistency(format!(
            "negative noise variance {rad} (gain below 1?)"
        )));
    }
    Ok((rad.max(0.0) * p.n).sqrt())
}

/// `δφ = Noise / Signal`.
pub fn sensitivity(p: &ParamPoint) -> Result<f64> {
    let sig = signal(p);
    if sig <= 0.0 {
        return Err(Error::SensitivityUndefined(format!(
            "zero phase response at T = {}, l = {}",
            p.t, p.l
        )));
    }
    Ok(noise(p)? / sig)
}

/// `G → ∞` limit of `δφ` at fixed `T`. Independent of the loss for `l < 1`.
pub fn sensitivity_asymptotic(t: f64, r: f64, n: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::SensitivityUndefined(format!("zero phase response at T = {t}")));
    }
    let s = (-2.0 * r).exp();
    Ok(((s + t) / (4.0 * (1.0 - t) * t)).sqrt() / n.sqrt())
}

/// Signal and noise divided by `G` in the `G → ∞` limit: `(Signal/G, Noise/G)`.
pub fn per_gain_limit(p: &ParamPoint) -> Result<(f64, f64)> {
    let sig = 2.0 * ((1.0 - p.l) * (1.0 - p.t) * p.t).sqrt() * p.n;
    let noise = ((1.0 - p.l) * (p.t + p.s()) * p.n).sqrt();
    Ok((sig, noise))
}

/// Standard quantum limit `1/√N`.
pub fn sql(n: f64) -> f64 {
    1.0 / n.sqrt()
}

/// Quantum enhancement in dB, `−20 log10(δφ_r / δφ_{r=0})`, with `(T, G, l, N)` held fixed.
pub fn enhancement_m_db(p: &ParamPoint) -> Result<f64> {
    let with = sensitivity(p)?;
    let without = sensitivity(&p.with_r(0.0))?;
    Ok(-db::amplitude_ratio(with, without))
}

/// SNR relative to the coherent lossless balanced interferometer at equal `N`:
/// `20 log10[(Signal/Noise) · √N/N]`.
pub fn relative_snr_db(p: &ParamPoint) -> Result<f64> {
    let ratio = signal(p) / noise(p)?;
    Ok(20.0 * (ratio * p.n.sqrt() / p.n).log10())
}

fn check_loss(l: f64) -> Result<()> {
    if !(0.0..1.0).contains(&l) {
        return Err(invalid(format!("loss must lie in [0, 1), got {l}")));
    }
    Ok(())
}

/// Optimal input splitting parameter at the optimal gain.
///
/// * `l = 0`: `T = 1/2`
/// * `0 < l ≤ 1/2` (`G = 1`): `T = ς + √(ς² − ς)` with `ς = (1 − 1/l) e^{−2r}`
/// * `1/2 < l < 1` (`G → ∞`): `T = e^{−2r}(√(1 + e^{2r}) − 1)`
pub fn t_opt(l: f64, r: f64) -> Result<f64> {
    check_loss(l)?;
    if !(r >= 0.0) {
        return Err(invalid(format!("squeezing r must be >= 0, got {r}")));
    }
    let s = (-2.0 * r).exp();
    Ok(if l == 0.0 {
        0.5
    } else if l <= 0.5 {
        let varsigma = (1.0 - 1.0 / l) * s;
        varsigma + (varsigma * varsigma - varsigma).sqrt()
    } else {
        s * ((1.0 + (2.0 * r).exp()).sqrt() - 1.0)
    })
}

/// Optimal gain: unity up to the balanced-recombiner transition at `l = 1/2`,
/// unbounded above it. At `l = 1/2` the sensitivity is gain-independent and
/// `Finite(1)` is reported.
pub fn g_opt(l: f64) -> Result<Gain> {
    check_loss(l)?;
    Ok(if l <= 0.5 { Gain::Finite(1.0) } else { Gain::Asymptotic })
}

/// Optimal sensitivity at `(t_opt, g_opt)`.
pub fn sensitivity_opt(l: f64, r: f64, n: f64) -> Result<f64> {
    let t = t_opt(l, r)?;
    let s = (-2.0 * r).exp();
    let scaled = if l <= 0.5 {
        ((t * l + (1.0 - l) * s) / (4.0 * (1.0 - t) * t * (1.0 - l))).sqrt()
    } else {
        ((s + t) / (4.0 * (1.0 - t) * t)).sqrt()
    };
    Ok(scaled / n.sqrt())
}

/// Gain that keeps the detected coherent photon flux at its lossless level:
/// `2 G √((1−l)(1−T)T) = 1`.
pub fn constrained_gain(t: f64, l: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(invalid(format!("splitting T must lie in [0, 1], got {t}")));
    }
    if !(0.0..=1.0).contains(&l) {
        return Err(invalid(format!("loss must lie in [0, 1], got {l}")));
    }
    let transfer = 2.0 * ((1.0 - l) * (1.0 - t) * t).sqrt();
    if transfer <= 0.0 {
        return Err(Error::ConstraintInfeasible(format!(
            "no phase response at T = {t}, l = {l}"
        )));
    }
    if transfer > 1.0 + 1e-12 {
        return Err(Error::ConstraintInfeasible(format!(
            "photon-number matching at T = {t}, l = {l} needs gain {} < 1",
            1.0 / transfer
        )));
    }
    Ok((1.0 / transfer).max(1.0))
}

/// Per-source variance of the intensity difference at mid-fringe.
///
/// The coherent input cancels exactly; the squeezed input contributes
/// `G²(1−l)sN`, the amplifier idler `T(1−l)(G²−1)N` and the loss vacuum `TlN`.
pub fn noise_breakdown(p: &ParamPoint) -> Vec<(SourceTag, f64)> {
    let (g2, l, t, n) = (p.g * p.g, p.l, p.t, p.n);
    vec![
        (SourceTag::CoherentInput, 0.0),
        (SourceTag::SqueezedInput, g2 * (1.0 - l) * p.s() * n),
        (SourceTag::AmplifierIdler, t * (1.0 - l) * (g2 - 1.0) * n),
        (SourceTag::LossVacuum, t * l * n),
    ]
}

/// `G → ∞` limit of [`noise_breakdown`] divided by `G²`.
pub fn noise_breakdown_per_gain(p: &ParamPoint) -> Vec<(SourceTag, f64)> {
    let (l, t, n) = (p.l, p.t, p.n);
    vec![
        (SourceTag::CoherentInput, 0.0),
        (SourceTag::SqueezedInput, (1.0 - l) * p.s() * n),
        (SourceTag::AmplifierIdler, t * (1.0 - l) * n),
        (SourceTag::LossVacuum, 0.0),
    ]
}

/// Decibel conversions.
pub mod db {
    /// Squeezing in dB below vacuum for parameter `r`: `−10 log10 e^{−2r}`.
    pub fn squeezing_db(r: f64) -> f64 {
        20.0 * r / std::f64::consts::LN_10
    }

    /// Inverse of [`squeezing_db`].
    pub fn squeezing_r(db: f64) -> f64 {
        db * std::f64::consts::LN_10 / 20.0
    }

    /// `20 log10(a / b)`
    pub fn amplitude_ratio(a: f64, b: f64) -> f64 {
        20.0 * (a / b).log10()
    }

    /// `10 log10(a / b)`
    pub fn power_ratio(a: f64, b: f64) -> f64 {
        10.0 * (a / b).log10()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r10() -> f64 {
        10f64.ln() / 2.0
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn signal_examples() {
        let p = ParamPoint::new(1e6, 0.0, 0.5, 1.0, 0.0).unwrap();
        assert!(rel(signal(&p), 1e6) < 1e-15);
        let p = ParamPoint::new(1.0, 0.0, 0.2317, 10.0, 0.9).unwrap();
        let want = 2.0 * (0.1f64 * 0.7683 * 0.2317).sqrt() * 10.0;
        assert!(rel(signal(&p), want) < 1e-15);
        assert!((signal(&p) - 2.6685).abs() < 1e-4);
        assert_eq!(signal(&p.with_t(0.0)), 0.0);
        assert_eq!(signal(&p.with_t(1.0)), 0.0);
    }

    #[test]
    fn noise_examples() {
        let p = ParamPoint::new(1.0, r10(), 0.5, 1.0, 0.0).unwrap();
        assert!(rel(noise(&p).unwrap(), 0.1f64.sqrt()) < 1e-14);
        let p = ParamPoint::new(1.0, 0.0, 0.5, 1.0, 0.0).unwrap();
        assert_eq!(noise(&p).unwrap(), 1.0);
        let p = ParamPoint::new(1.0, 0.48, 0.5, 10f64.sqrt(), 0.9).unwrap();
        let rad = 10.0 * 0.1 * (0.5 + (-0.96f64).exp()) + 0.5 * 0.8;
        assert!(rel(noise(&p).unwrap(), rad.sqrt()) < 1e-14);
        assert!((noise(&p).unwrap() - 1.13265).abs() < 5e-6);
    }

    #[test]
    fn negative_radicand_is_an_internal_error() {
        let p = ParamPoint {
            n: 1.0,
            r: 0.0,
            t: 0.5,
            g: 0.1,
            l: 0.0,
        };
        assert!(matches!(noise(&p), Err(Error::InternalConsistency(_))));
    }

    #[test]
    fn sensitivity_examples() {
        let p = ParamPoint::conventional(1.0, r10(), 0.0).unwrap();
        assert!(rel(sensitivity(&p).unwrap(), 0.1f64.sqrt()) < 1e-14);

        let p = ParamPoint::conventional(1.0, r10(), 0.9).unwrap();
        let want = (0.1f64 * 0.6 + 0.5 * 0.8).sqrt() / (2.0 * (0.1f64 * 0.25).sqrt());
        assert!(rel(sensitivity(&p).unwrap(), want) < 1e-14);
        assert!((sensitivity(&p).unwrap() - 2.1448).abs() < 5e-5);
        let degradation = db::amplitude_ratio(want, 0.1f64.sqrt());
        assert!((degradation - 16.6).abs() < 0.05);

        let p = ParamPoint::new(1e8, r10(), 0.3, 2.0, 0.7).unwrap();
        let want = (4.0f64 * 0.3 * 0.4 + 0.3 * 0.4).sqrt() * 1e4 / (2.0 * (0.3f64 * 0.7 * 0.3).sqrt() * 2.0 * 1e8);
        assert!(rel(sensitivity(&p).unwrap(), want) < 1e-14);
        assert!((sensitivity(&p).unwrap() - 7.715e-5).abs() < 5e-9);

        let dark = ParamPoint::new(1.0, 0.0, 0.0, 1.0, 0.3).unwrap();
        assert!(matches!(sensitivity(&dark), Err(Error::SensitivityUndefined(_))));
    }

    #[test]
    fn sql_examples() {
        assert!(rel(sql(4e14), 5e-8) < 1e-15);
        assert_eq!(sql(1.0), 1.0);
        assert!((sql(1.2e15) - 2.887e-8).abs() < 5e-12);
    }

    #[test]
    fn enhancement_examples() {
        let p = ParamPoint::conventional(1.0, r10(), 0.0).unwrap();
        assert!((enhancement_m_db(&p).unwrap() - 10.0).abs() < 1e-12);
        let p = ParamPoint::conventional(1.0, r10(), 0.9).unwrap();
        let want = -10.0 * ((0.06f64 + 0.4) / (0.15 + 0.4)).log10();
        assert!(rel(enhancement_m_db(&p).unwrap(), want) < 1e-12);
        assert!((want - 0.78).abs() < 0.005);
        assert_eq!(enhancement_m_db(&p.with_r(0.0)).unwrap(), 0.0);
    }

    #[test]
    fn relative_snr_examples() {
        let p = ParamPoint::conventional(3e10, 0.0, 0.0).unwrap();
        assert!(relative_snr_db(&p).unwrap().abs() < 1e-9);
        let p = ParamPoint::conventional(3e10, r10(), 0.0).unwrap();
        assert!((relative_snr_db(&p).unwrap() - 10.0).abs() < 1e-9);
        let p = ParamPoint::new(1.0, r10(), 0.5, 1e6, 0.9).unwrap();
        let want = -10.0 * 0.6f64.log10();
        assert!((relative_snr_db(&p).unwrap() - want).abs() < 1e-9);
        assert!((want - 2.22).abs() < 0.005);
    }

    /// Brute-force minimiser over `T` at the optimal gain regime.
    fn grid_argmin(l: f64, r: f64) -> f64 {
        let s = (-2.0 * r).exp();
        let objective = |t: f64| {
            if l <= 0.5 {
                (t * l + (1.0 - l) * s) / (t * (1.0 - t))
            } else {
                (t + s) / (t * (1.0 - t))
            }
        };
        let mut best = (f64::INFINITY, 0.0);
        let mut t = 1e-6;
        while t < 1.0 {
            let v = objective(t);
            if v < best.0 {
                best = (v, t);
            }
            t += 1e-6;
        }
        best.1
    }

    #[test]
    fn t_opt_examples() {
        assert_eq!(t_opt(0.0, r10()).unwrap(), 0.5);

        let s = 0.1f64;
        let varsigma = (1.0 - 1.0 / 0.3) * s;
        assert!((varsigma + 0.23333).abs() < 5e-6);
        let t = t_opt(0.3, r10()).unwrap();
        assert!((t - 0.30312).abs() < 5e-6);
        assert!((t - grid_argmin(0.3, r10())).abs() < 2e-6);

        let t = t_opt(0.9, r10()).unwrap();
        assert!((t - 0.23166).abs() < 5e-6);
        assert!((t - grid_argmin(0.9, r10())).abs() < 2e-6);

        assert!(rel(t_opt(0.9, 0.0).unwrap(), 2f64.sqrt() - 1.0) < 1e-15);
        assert!(t_opt(1.0, 0.3).is_err());
    }

    #[test]
    fn g_opt_examples() {
        assert_eq!(g_opt(0.2).unwrap(), Gain::Finite(1.0));
        assert_eq!(g_opt(0.9).unwrap(), Gain::Asymptotic);
        assert_eq!(g_opt(0.5).unwrap(), Gain::Finite(1.0));
        assert!(g_opt(1.0).is_err());
    }

    /// 2-D grid over `(T, G)` with `G` in `[1, 100]`.
    fn grid_min_sensitivity(l: f64, r: f64) -> f64 {
        let mut best = f64::INFINITY;
        for i in 1..2000 {
            let t = i as f64 / 2000.0;
            for k in 0..200 {
                let g = 10f64.powf(k as f64 / 100.0);
                let p = ParamPoint::new(1.0, r, t, g, l).unwrap();
                best = best.min(sensitivity(&p).unwrap());
            }
        }
        best
    }

    #[test]
    fn sensitivity_opt_examples() {
        assert!(rel(sensitivity_opt(0.0, r10(), 1.0).unwrap(), 0.1f64.sqrt()) < 1e-14);

        let v = sensitivity_opt(0.9, r10(), 1.0).unwrap();
        let t = 0.1 * (11f64.sqrt() - 1.0);
        assert!(rel(v, ((0.1 + t) / (4.0 * (1.0 - t) * t)).sqrt()) < 1e-14);
        assert!((v - 0.68252).abs() < 5e-6);
        assert!((db::amplitude_ratio(1.0, v) - 3.3).abs() < 0.05);
        assert!((db::amplitude_ratio(v, 0.1f64.sqrt()) - 6.7).abs() < 0.05);

        let v = sensitivity_opt(0.3, r10(), 1.0).unwrap();
        assert!((v - 0.52163).abs() < 5e-6);
        let grid = grid_min_sensitivity(0.3, r10());
        assert!(v <= grid * (1.0 + 1e-12));
        assert!(rel(grid, v) < 1e-5);
    }

    #[test]
    fn constrained_gain_examples() {
        assert_eq!(constrained_gain(0.5, 0.0).unwrap(), 1.0);
        assert!(rel(constrained_gain(0.5, 0.9).unwrap(), 10f64.sqrt()) < 1e-14);
        let g = constrained_gain(0.5, 0.1).unwrap();
        assert!(rel(g, 1.0 / 0.9f64.sqrt()) < 1e-14);
        assert!(g >= 1.0);
        assert!(constrained_gain(0.5, -0.1).is_err());
        assert!(matches!(
            constrained_gain(0.0, 0.5),
            Err(Error::ConstraintInfeasible(_))
        ));
    }

    #[test]
    fn db_examples() {
        assert!((db::squeezing_db(r10()) - 10.0).abs() < 1e-12);
        assert!((db::squeezing_db(1.1513) - 10.0).abs() < 1e-3);
        assert!((db::squeezing_db(0.48) - 4.17).abs() < 5e-3);
        assert_eq!(db::squeezing_r(0.0), 0.0);
        assert!((db::squeezing_r(db::squeezing_db(0.731)) - 0.731).abs() < 1e-15);
    }

    #[test]
    fn breakdown_sums_to_noise() {
        let p = ParamPoint::new(3.0, 0.7, 0.35, 4.0, 0.6).unwrap();
        let total: f64 = noise_breakdown(&p).iter().map(|(_, v)| v).sum();
        assert!(rel(total, noise(&p).unwrap().powi(2)) < 1e-14);
    }

    #[test]
    fn asymptotic_limits() {
        let (t, r, l) = (0.3, 0.8, 0.7);
        let big = ParamPoint::new(2.0, r, t, 1e7, l).unwrap();
        let lim = sensitivity_asymptotic(t, r, 2.0).unwrap();
        assert!(rel(sensitivity(&big).unwrap(), lim) < 1e-12);
        let (sig, noi) = per_gain_limit(&big).unwrap();
        assert!(rel(sig / noi, 1.0 / lim) < 1e-14);
    }
}
