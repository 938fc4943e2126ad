//! Brute-force truncated Fock-space simulator for small circuits.
//!
//! Used as an independent check of the Gaussian engine. Gates are applied as
//! matrix exponentials of their generators, built on a guard-banded space of
//! `cutoff + GUARD` levels per mode and restricted back to `cutoff` levels.
//! The state is never renormalised; the norm lost to truncation is reported
//! as leakage.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::closed_form::ParamPoint;
use crate::error::{invalid, Result};
use crate::gauss::{self, Op};
use crate::scheme::Circuit;

pub const MAX_MODES: usize = 4;
pub const MIN_CUTOFF: usize = 4;
pub const MAX_DIM: usize = 1_000_000;
pub const GUARD: usize = 4;
/// Leakage above which a scenario carries a truncation warning.
pub const LEAKAGE_WARN: f64 = 1e-6;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "gate", rename_all = "kebab-case")]
pub enum Gate {
    /// `exp(α a† − α* a)`.
    Displace { mode: usize, re: f64, im: f64 },
    /// `exp((r/2)(e^{2iθ} a†² − e^{−2iθ} a²))`.
    Squeeze { mode: usize, r: f64, angle: f64 },
    /// `exp(θ(a_j† a_i − a_i† a_j))`.
    Beamsplit { i: usize, j: usize, theta: f64 },
    /// `exp(iφ n)`.
    Phase { mode: usize, phi: f64 },
    /// `exp(g(a_i† a_j† − a_i a_j))`, gain `cosh g`.
    TwoModeSqueeze { i: usize, j: usize, g: f64 },
}

impl Gate {
    pub fn inverse(self) -> Gate {
        match self {
            Gate::Displace { mode, re, im } => Gate::Displace { mode, re: -re, im: -im },
            Gate::Squeeze { mode, r, angle } => Gate::Squeeze { mode, r: -r, angle },
            Gate::Beamsplit { i, j, theta } => Gate::Beamsplit { i, j, theta: -theta },
            Gate::Phase { mode, phi } => Gate::Phase { mode, phi: -phi },
            Gate::TwoModeSqueeze { i, j, g } => Gate::TwoModeSqueeze { i, j, g: -g },
        }
    }

    fn modes(&self) -> Vec<usize> {
        match *self {
            Gate::Displace { mode, .. } | Gate::Squeeze { mode, .. } | Gate::Phase { mode, .. } => vec![mode],
            Gate::Beamsplit { i, j, .. } | Gate::TwoModeSqueeze { i, j, .. } => vec![i, j],
        }
    }

    /// Gates realising a Gaussian-engine op. Tags map to nothing.
    pub fn from_op(op: &Op) -> Result<Vec<Gate>> {
        Ok(match *op {
            Op::Tag { .. } => vec![],
            Op::Displace { mode, x, p } => vec![Gate::Displace {
                mode,
                re: x / 2.0,
                im: p / 2.0,
            }],
            Op::Squeeze { mode, r, angle } => vec![Gate::Squeeze { mode, r, angle }],
            Op::Beamsplit { i, j, t } => vec![Gate::Beamsplit {
                i,
                j,
                theta: split_angle(t)?,
            }],
            Op::Phase { mode, phi } => vec![Gate::Phase { mode, phi }],
            Op::Amplify { signal, idler, gain } => {
                if !(gain >= 1.0) {
                    return Err(invalid(format!("gain must be >= 1, got {gain}")));
                }
                vec![Gate::TwoModeSqueeze {
                    i: signal,
                    j: idler,
                    g: gain.acosh(),
                }]
            }
            Op::Attenuate { mode, ancilla, loss } => {
                vec![Gate::Beamsplit {
                    i: mode,
                    j: ancilla,
                    theta: split_angle(1.0 - loss)?,
                }]
            }
        })
    }
}

fn split_angle(t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(invalid(format!("transmissivity {t} outside [0, 1]")));
    }
    Ok(t.sqrt().acos())
}

fn lowering(d: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(d, d, |r, c| {
        if c == r + 1 {
            Complex64::from((c as f64).sqrt())
        } else {
            Complex64::from(0.0)
        }
    })
}

/// Diagonal block of a local unitary: the local basis indices it acts on and its matrix.
type Block = (Vec<usize>, DMatrix<Complex64>);

/// Local unitary of `gate` on `cutoff` levels per involved mode, as blocks.
fn local_unitary(gate: &Gate, cutoff: usize) -> Vec<Block> {
    let d = cutoff + GUARD;
    let a = lowering(d);
    let ad = a.adjoint();
    let generator = match *gate {
        Gate::Displace { re, im, .. } => {
            let alpha = Complex64::new(re, im);
            &ad * alpha - &a * alpha.conj()
        }
        Gate::Squeeze { r, angle, .. } => {
            let e = Complex64::from_polar(1.0, 2.0 * angle);
            (&ad * &ad * e - &a * &a * e.conj()) * Complex64::from(r / 2.0)
        }
        Gate::Phase { phi, .. } => DMatrix::from_diagonal(&DVector::from_fn(d, |n, _| I * (n as f64 * phi))),
        Gate::Beamsplit { theta, .. } => two_mode_generator(d, |ni, nj| {
            // a_j† a_i lowers i and raises j; its adjoint the reverse
            let mut out = vec![];
            if ni > 0 && nj + 1 < d {
                out.push((ni - 1, nj + 1, theta * (ni as f64 * (nj + 1) as f64).sqrt()));
            }
            if nj > 0 && ni + 1 < d {
                out.push((ni + 1, nj - 1, -theta * ((ni + 1) as f64 * nj as f64).sqrt()));
            }
            out
        }),
        Gate::TwoModeSqueeze { g, .. } => two_mode_generator(d, |ni, nj| {
            let mut out = vec![];
            if ni + 1 < d && nj + 1 < d {
                out.push((ni + 1, nj + 1, g * ((ni + 1) as f64 * (nj + 1) as f64).sqrt()));
            }
            if ni > 0 && nj > 0 {
                out.push((ni - 1, nj - 1, -g * (ni as f64 * nj as f64).sqrt()));
            }
            out
        }),
    };
    let k = gate.modes().len();
    // position of each guard-band index inside the cutoff space, if kept
    let kept: Vec<Option<usize>> = (0..d.pow(k as u32))
        .map(|idx| {
            let n = digits(idx, d, k);
            n.iter()
                .all(|&x| x < cutoff)
                .then(|| n.iter().fold(0, |acc, &x| acc * cutoff + x))
        })
        .collect();
    components(&generator)
        .into_iter()
        .filter_map(|members| {
            let u = DMatrix::from_fn(members.len(), members.len(), |r, c| generator[(members[r], members[c])]).exp();
            let rows: Vec<usize> = (0..members.len()).filter(|&r| kept[members[r]].is_some()).collect();
            if rows.is_empty() {
                return None;
            }
            let local = rows.iter().map(|&r| kept[members[r]].unwrap()).collect();
            Some((
                local,
                DMatrix::from_fn(rows.len(), rows.len(), |r, c| u[(rows[r], rows[c])]),
            ))
        })
        .collect()
}

/// Real generator on two modes of `d` levels; `entries(n_i, n_j)` lists the
/// `(n_i', n_j', coefficient)` it maps `|n_i, n_j⟩` to.
fn two_mode_generator(d: usize, entries: impl Fn(usize, usize) -> Vec<(usize, usize, f64)>) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(d * d, d * d);
    for ni in 0..d {
        for nj in 0..d {
            for (mi, mj, v) in entries(ni, nj) {
                m[(mi * d + mj, ni * d + nj)] = Complex64::from(v);
            }
        }
    }
    m
}

/// Connected components of the sparsity graph of `m`. Two-mode generators
/// conserve a photon-number combination, so the components are small and
/// each can be exponentiated on its own.
fn components(m: &DMatrix<Complex64>) -> Vec<Vec<usize>> {
    let d = m.nrows();
    let zero = Complex64::from(0.0);
    let mut seen = vec![false; d];
    let mut blocks = vec![];
    for start in 0..d {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut members = vec![start];
        let mut next = 0;
        while next < members.len() {
            let v = members[next];
            next += 1;
            for w in 0..d {
                if !seen[w] && (m[(v, w)] != zero || m[(w, v)] != zero) {
                    seen[w] = true;
                    members.push(w);
                }
            }
        }
        blocks.push(members);
    }
    blocks
}

/// Base-`d` digits of `idx`, most significant first.
fn digits(mut idx: usize, d: usize, k: usize) -> Vec<usize> {
    let mut out = vec![0; k];
    for slot in out.iter_mut().rev() {
        *slot = idx % d;
        idx /= d;
    }
    out
}

/// Truncated pure state of up to four modes, mode 0 most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct FockScenario {
    n_modes: usize,
    cutoff: usize,
    amplitudes: DVector<Complex64>,
    gates: Vec<Gate>,
}

impl FockScenario {
    pub fn vacuum(n_modes: usize, cutoff: usize) -> Result<Self> {
        Self::basis(n_modes, cutoff, &vec![0; n_modes])
    }

    /// Number state `|n_0, n_1, …⟩`.
    pub fn basis(n_modes: usize, cutoff: usize, occupation: &[usize]) -> Result<Self> {
        if n_modes == 0 || n_modes > MAX_MODES {
            return Err(invalid(format!("mode count {n_modes} outside 1..={MAX_MODES}")));
        }
        if cutoff < MIN_CUTOFF {
            return Err(invalid(format!("cutoff {cutoff} below {MIN_CUTOFF}")));
        }
        let dim = (cutoff as u64).checked_pow(n_modes as u32).unwrap_or(u64::MAX);
        if dim > MAX_DIM as u64 {
            return Err(invalid(format!("cutoff^modes = {dim} exceeds {MAX_DIM}")));
        }
        if occupation.len() != n_modes || occupation.iter().any(|&n| n >= cutoff) {
            return Err(invalid(format!(
                "occupation {occupation:?} invalid for {n_modes} modes at cutoff {cutoff}"
            )));
        }
        let idx = occupation.iter().fold(0, |acc, &n| acc * cutoff + n);
        let mut amplitudes = DVector::zeros(dim as usize);
        amplitudes[idx] = Complex64::from(1.0);
        Ok(Self {
            n_modes,
            cutoff,
            amplitudes,
            gates: vec![],
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    /// Probability lost to truncation so far.
    pub fn leakage(&self) -> f64 {
        (1.0 - self.norm_sqr()).max(0.0)
    }

    pub fn truncation_warning(&self) -> bool {
        self.leakage() > LEAKAGE_WARN
    }

    fn stride(&self, mode: usize) -> usize {
        self.cutoff.pow((self.n_modes - 1 - mode) as u32)
    }

    fn occupation(&self, idx: usize, mode: usize) -> usize {
        (idx / self.stride(mode)) % self.cutoff
    }

    pub fn probability(&self, occupation: &[usize]) -> f64 {
        let idx = occupation.iter().fold(0, |acc, &n| acc * self.cutoff + n);
        self.amplitudes[idx].norm_sqr()
    }

    pub fn apply_gate(&self, gate: &Gate) -> Result<Self> {
        let modes = gate.modes();
        if modes.iter().any(|&m| m >= self.n_modes) {
            return Err(invalid(format!(
                "gate {gate:?} addresses a mode outside 0..{}",
                self.n_modes
            )));
        }
        if modes.len() == 2 && modes[0] == modes[1] {
            return Err(invalid(format!("gate {gate:?} needs two distinct modes")));
        }
        let blocks = local_unitary(gate, self.cutoff);
        let c = self.cutoff;
        let k = modes.len();
        let offsets: Vec<usize> = (0..c.pow(k as u32))
            .map(|li| {
                digits(li, c, k)
                    .iter()
                    .zip(&modes)
                    .map(|(&n, &m)| n * self.stride(m))
                    .sum()
            })
            .collect();

        let mut out = DVector::zeros(self.amplitudes.len());
        for base in 0..self.amplitudes.len() {
            if modes.iter().any(|&m| self.occupation(base, m) != 0) {
                continue;
            }
            for (members, u) in &blocks {
                let local = DVector::from_iterator(
                    members.len(),
                    members.iter().map(|&li| self.amplitudes[base + offsets[li]]),
                );
                let moved = u * local;
                for (v, &li) in moved.iter().zip(members) {
                    out[base + offsets[li]] = *v;
                }
            }
        }
        let mut gates = self.gates.clone();
        gates.push(*gate);
        Ok(Self {
            amplitudes: out,
            gates,
            ..*self
        })
    }

    pub fn apply_inverse(&self, gate: &Gate) -> Result<Self> {
        self.apply_gate(&gate.inverse())
    }

    pub fn apply_op(&self, op: &Op) -> Result<Self> {
        Gate::from_op(op)?.iter().try_fold(self.clone(), |s, g| s.apply_gate(g))
    }

    pub fn apply_ops<'a>(&self, ops: impl IntoIterator<Item = &'a Op>) -> Result<Self> {
        ops.into_iter().try_fold(self.clone(), |s, op| s.apply_op(op))
    }

    /// `|⟨self|other⟩|²` of the normalised states.
    pub fn fidelity(&self, other: &Self) -> f64 {
        let overlap = self.amplitudes.dotc(&other.amplitudes).norm_sqr();
        overlap / (self.norm_sqr() * other.norm_sqr())
    }

    fn lower(&self, mode: usize) -> DVector<Complex64> {
        let stride = self.stride(mode);
        DVector::from_fn(self.amplitudes.len(), |idx, _| {
            let n = self.occupation(idx, mode);
            if n + 1 < self.cutoff {
                self.amplitudes[idx + stride] * ((n + 1) as f64).sqrt()
            } else {
                Complex64::from(0.0)
            }
        })
    }

    /// Mean vector and symmetrised covariance of `(X_0, P_0, X_1, …)`.
    pub fn quadrature_moments(&self) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.n_modes;
        let norm = self.norm_sqr();
        let lowered: Vec<_> = (0..n).map(|k| self.lower(k)).collect();
        let psi = &self.amplitudes;
        let m: Vec<Complex64> = lowered.iter().map(|v| psi.dotc(v) / norm).collect();
        // A_kl = ⟨a_k a_l⟩, N_kl = ⟨a_k† a_l⟩
        let aa = DMatrix::from_fn(n, n, |k, l| {
            let ll = FockScenario {
                amplitudes: lowered[l].clone(),
                gates: vec![],
                ..*self
            }
            .lower(k);
            psi.dotc(&ll) / norm
        });
        let nn = DMatrix::from_fn(n, n, |k, l| lowered[k].dotc(&lowered[l]) / norm);

        let u = [Complex64::from(1.0), -I];
        let mut mean = DVector::zeros(2 * n);
        for k in 0..n {
            for (q, uq) in u.iter().enumerate() {
                mean[2 * k + q] = 2.0 * (uq * m[k]).re;
            }
        }
        let mut cov = DMatrix::zeros(2 * n, 2 * n);
        for k in 0..n {
            for l in 0..n {
                let delta = if k == l { 1.0 } else { 0.0 };
                for (qa, ua) in u.iter().enumerate() {
                    for (qb, ub) in u.iter().enumerate() {
                        let v = ua * ub * aa[(k, l)]
                            + ua * ub.conj() * (nn[(l, k)] + delta)
                            + ua.conj() * ub * nn[(k, l)]
                            + (ua * ub * aa[(k, l)]).conj();
                        let (a, b) = (2 * k + qa, 2 * l + qb);
                        cov[(a, b)] = v.re - mean[a] * mean[b];
                    }
                }
            }
        }
        (mean, cov)
    }

    /// Mean and variance of `J(φ) = e^{iφ} a_i† a_j + h.c.` on the normalised truncated state.
    pub fn nminus_stats(&self, i: usize, j: usize, phi: f64) -> Result<(f64, f64)> {
        if i == j || i >= self.n_modes || j >= self.n_modes {
            return Err(invalid(format!(
                "readout modes ({i}, {j}) invalid for {} modes",
                self.n_modes
            )));
        }
        // J raises one mode by a level, so evaluate it on cutoff + 1 levels
        let c = self.cutoff;
        let e = c + 1;
        let ext_stride = |m: usize| e.pow((self.n_modes - 1 - m) as u32);
        let mut j_psi: DVector<Complex64> = DVector::zeros(e.pow(self.n_modes as u32));
        let mut embedded: DVector<Complex64> = DVector::zeros(j_psi.len());
        let phase = Complex64::from_polar(1.0, phi);
        for (idx, amp) in self.amplitudes.iter().enumerate() {
            let occ: Vec<usize> = (0..self.n_modes).map(|m| self.occupation(idx, m)).collect();
            let ext: usize = occ.iter().enumerate().map(|(m, &n)| n * ext_stride(m)).sum();
            embedded[ext] = *amp;
            let (ni, nj) = (occ[i] as f64, occ[j] as f64);
            if occ[j] > 0 {
                let to = ext + ext_stride(i) - ext_stride(j);
                j_psi[to] += phase * amp * (nj * (ni + 1.0)).sqrt();
            }
            if occ[i] > 0 {
                let to = ext + ext_stride(j) - ext_stride(i);
                j_psi[to] += phase.conj() * amp * (ni * (nj + 1.0)).sqrt();
            }
        }
        let norm = self.norm_sqr();
        let mean = embedded.dotc(&j_psi).re / norm;
        let second = j_psi.norm_squared() / norm;
        Ok((mean, second - mean * mean))
    }
}

/// Fock versus Gaussian intensity-difference statistics for the full interferometer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub cutoff: usize,
    pub fock_mean: f64,
    pub fock_variance: f64,
    pub gauss_mean: f64,
    pub gauss_variance: f64,
    /// Mean deviation relative to `max(|mean|, std)`; the lock point mean can vanish.
    pub mean_deviation: f64,
    pub variance_deviation: f64,
    pub leakage: f64,
    pub truncation_warning: bool,
}

impl ChainReport {
    pub fn max_deviation(&self) -> f64 {
        self.mean_deviation.max(self.variance_deviation)
    }
}

/// Run the four-mode interferometer at the lock point on both engines.
/// The coherent amplitude is `√N`.
pub fn full_chain_check(params: &ParamPoint, cutoff: usize) -> Result<ChainReport> {
    let circuit = Circuit::at_phase(params, FRAC_PI_2)?;
    let (i, j) = circuit.readout;
    let gauss = gauss::nminus_exact(&circuit.run()?, i, j, 0.0)?;
    let fock = FockScenario::vacuum(crate::scheme::N_MODES, cutoff)?.apply_ops(&circuit.ops)?;
    let (fock_mean, fock_variance) = fock.nminus_stats(i, j, 0.0)?;
    let scale = gauss.mean.abs().max(gauss.variance.sqrt()).max(f64::MIN_POSITIVE);
    Ok(ChainReport {
        cutoff,
        fock_mean,
        fock_variance,
        gauss_mean: gauss.mean,
        gauss_variance: gauss.variance,
        mean_deviation: (fock_mean - gauss.mean).abs() / scale,
        variance_deviation: (fock_variance - gauss.variance).abs() / gauss.variance.abs().max(f64::MIN_POSITIVE),
        leakage: fock.leakage(),
        truncation_warning: fock.truncation_warning(),
    })
}

#[cfg(test)]
mod tests;
