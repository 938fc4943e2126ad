use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Serialize, Serializer};

use crate::error::{invalid, Error, Result};

/// Label of an independent input noise source.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SourceTag {
    CoherentInput,
    SqueezedInput,
    AmplifierIdler,
    LossVacuum,
    Other(String),
}

impl SourceTag {
    pub fn name(&self) -> &str {
        match self {
            SourceTag::CoherentInput => "coherent-input",
            SourceTag::SqueezedInput => "squeezed-input",
            SourceTag::AmplifierIdler => "amplifier-idler",
            SourceTag::LossVacuum => "loss-vacuum",
            SourceTag::Other(label) => label,
        }
    }
}

impl fmt::Display for SourceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for SourceTag {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

/// One independent input source: a covariance block of the input state
/// occupying quadrature indices `offset..offset + covariance.nrows()`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceBlock {
    pub tag: SourceTag,
    pub offset: usize,
    pub covariance: DMatrix<f64>,
}

impl SourceBlock {
    pub fn dim(&self) -> usize {
        self.covariance.nrows()
    }
}

/// Multimode Gaussian state in quadrature order `(X1, P1, ..., Xn, Pn)` with
/// `X = a + a†`, `P = i(a† - a)`, so vacuum has unit variance per quadrature.
///
/// The state keeps the cumulative symplectic map `S` from input quadratures to
/// current quadratures together with the independent input covariance blocks.
/// The current covariance is `S σ_in Sᵀ`, which lets any linear observable's
/// variance be split exactly into per-source contributions.
///
/// Operations take `&self` and return a new state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    n_modes: usize,
    displacement: DVector<f64>,
    map: DMatrix<f64>,
    sources: Vec<SourceBlock>,
}

/// Symplectic form `⊕ [[0, 1], [-1, 0]]` on `n` modes.
pub fn omega(n_modes: usize) -> DMatrix<f64> {
    let mut om = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        om[(2 * k, 2 * k + 1)] = 1.0;
        om[(2 * k + 1, 2 * k)] = -1.0;
    }
    om
}

fn rotation(phi: f64) -> [[f64; 2]; 2] {
    let (s, c) = phi.sin_cos();
    [[c, -s], [s, c]]
}

impl GaussianState {
    /// Vacuum on `n_modes` modes, one identity source block per mode tagged `mode-k`.
    pub fn vacuum(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(invalid("vacuum needs at least one mode"));
        }
        let sources = (0..n_modes)
            .map(|k| SourceBlock {
                tag: SourceTag::Other(format!("mode-{k}")),
                offset: 2 * k,
                covariance: DMatrix::identity(2, 2),
            })
            .collect();
        Ok(Self {
            n_modes,
            displacement: DVector::zeros(2 * n_modes),
            map: DMatrix::identity(2 * n_modes, 2 * n_modes),
            sources,
        })
    }

    /// Zero-mean state whose input covariance is the direct sum of the given
    /// blocks, in order. Physicality is not checked here; see
    /// [`check_physical`](super::check_physical).
    pub fn from_source_blocks(blocks: Vec<(SourceTag, DMatrix<f64>)>) -> Result<Self> {
        let mut offset = 0;
        let mut sources = Vec::with_capacity(blocks.len());
        for (tag, cov) in blocks {
            if cov.nrows() != cov.ncols() || cov.nrows() == 0 || cov.nrows() % 2 != 0 {
                return Err(invalid(format!(
                    "source block {tag} must be square with even positive dimension"
                )));
            }
            if (&cov - cov.transpose()).amax() > 1e-12 {
                return Err(invalid(format!("source block {tag} is not symmetric")));
            }
            if tag.name().is_empty() {
                return Err(invalid("empty source tag"));
            }
            if sources.iter().any(|b: &SourceBlock| b.tag == tag) {
                return Err(invalid(format!("duplicate source tag {tag}")));
            }
            let dim = cov.nrows();
            sources.push(SourceBlock {
                tag,
                offset,
                covariance: cov,
            });
            offset += dim;
        }
        if offset == 0 {
            return Err(invalid("no source blocks"));
        }
        let n_modes = offset / 2;
        Ok(Self {
            n_modes,
            displacement: DVector::zeros(offset),
            map: DMatrix::identity(offset, offset),
            sources,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn displacement(&self) -> &DVector<f64> {
        &self.displacement
    }

    pub fn cumulative_map(&self) -> &DMatrix<f64> {
        &self.map
    }

    pub fn sources(&self) -> &[SourceBlock] {
        &self.sources
    }

    pub fn input_covariance(&self) -> DMatrix<f64> {
        let dim = 2 * self.n_modes;
        let mut sigma = DMatrix::zeros(dim, dim);
        for b in &self.sources {
            sigma
                .view_mut((b.offset, b.offset), (b.dim(), b.dim()))
                .copy_from(&b.covariance);
        }
        sigma
    }

    /// Current covariance `S σ_in Sᵀ`.
    pub fn covariance(&self) -> DMatrix<f64> {
        &self.map * self.input_covariance() * self.map.transpose()
    }

    /// Same state with its mean replaced. Used to propagate mean-field tangents.
    pub fn with_displacement(&self, displacement: DVector<f64>) -> Result<Self> {
        if displacement.len() != 2 * self.n_modes {
            return Err(invalid("displacement length mismatch"));
        }
        let mut next = self.clone();
        next.displacement = displacement;
        Ok(next)
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes {
            return Err(invalid(format!("mode {mode} out of range for {} modes", self.n_modes)));
        }
        Ok(())
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        self.check_mode(i)?;
        self.check_mode(j)?;
        if i == j {
            return Err(invalid(format!(
                "two-mode operation needs distinct modes, got {i} twice"
            )));
        }
        Ok(())
    }

    /// Left-multiply the rows of `modes` by the local symplectic `local`.
    fn apply_local(&mut self, modes: &[usize], local: &DMatrix<f64>) {
        let idx: Vec<usize> = modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        let k = idx.len();
        let cols = self.map.ncols();

        let mut rows = DMatrix::zeros(k, cols);
        let mut mean = DVector::zeros(k);
        for (r, &q) in idx.iter().enumerate() {
            rows.row_mut(r).copy_from(&self.map.row(q));
            mean[r] = self.displacement[q];
        }
        let rows = local * rows;
        let mean = local * mean;
        for (r, &q) in idx.iter().enumerate() {
            self.map.row_mut(q).copy_from(&rows.row(r));
            self.displacement[q] = mean[r];
        }
    }

    /// Whether `mode` is in vacuum: zero mean and identity marginal covariance.
    pub fn is_vacuum_mode(&self, mode: usize) -> bool {
        if mode >= self.n_modes {
            return false;
        }
        let sigma = self.covariance();
        let m = sigma.view((2 * mode, 2 * mode), (2, 2));
        let tol = 1e-9;
        self.displacement[2 * mode].abs() < tol
            && self.displacement[2 * mode + 1].abs() < tol
            && (m[(0, 0)] - 1.0).abs() < tol
            && (m[(1, 1)] - 1.0).abs() < tol
            && m[(0, 1)].abs() < tol
    }

    /// Index of the single source block feeding `mode`, if there is exactly one.
    fn sole_source_of(&self, mode: usize) -> Option<usize> {
        let mut found = None;
        for (k, b) in self.sources.iter().enumerate() {
            let touches = (0..b.dim()).any(|c| {
                self.map[(2 * mode, b.offset + c)].abs() > 1e-12 || self.map[(2 * mode + 1, b.offset + c)].abs() > 1e-12
            });
            if touches {
                if found.is_some() {
                    return None;
                }
                found = Some(k);
            }
        }
        found
    }

    fn retag_block(&mut self, block: usize, tag: SourceTag, mode: usize) {
        if self.sources[block].tag == tag {
            return;
        }
        // keep tags unique: a second block with the same role gets a mode suffix
        let tag = if self.sources.iter().any(|b| b.tag == tag) {
            SourceTag::Other(format!("{tag}@{mode}"))
        } else {
            tag
        };
        self.sources[block].tag = tag;
    }

    /// Tag the input source that feeds `mode`. The mode must be driven by
    /// exactly one source block.
    pub fn tag_source(&self, mode: usize, tag: SourceTag) -> Result<Self> {
        self.check_mode(mode)?;
        if tag.name().is_empty() {
            return Err(invalid("empty source tag"));
        }
        let block = self
            .sole_source_of(mode)
            .ok_or_else(|| Error::PreconditionViolation(format!("mode {mode} is not fed by a single source")))?;
        let mut next = self.clone();
        next.retag_block(block, tag, mode);
        Ok(next)
    }

    pub fn displace(&self, mode: usize, x: f64, p: f64) -> Result<Self> {
        self.check_mode(mode)?;
        let mut next = self.clone();
        next.displacement[2 * mode] += x;
        next.displacement[2 * mode + 1] += p;
        Ok(next)
    }

    /// Single-mode squeezing. At `angle = 0`, X is stretched by `e^r` and P
    /// compressed by `e^-r`; `angle` rotates the stretched axis.
    pub fn squeeze(&self, mode: usize, r: f64, angle: f64) -> Result<Self> {
        self.check_mode(mode)?;
        if !(r >= 0.0) || !r.is_finite() {
            return Err(invalid(format!(
                "squeezing r must be finite and >= 0, got {r}; rotate the angle by pi/2 instead"
            )));
        }
        let (ch, sh) = (r.cosh(), r.sinh());
        let (s2, c2) = (2.0 * angle).sin_cos();
        let local = DMatrix::from_row_slice(2, 2, &[ch + sh * c2, sh * s2, sh * s2, ch - sh * c2]);
        let mut next = self.clone();
        next.apply_local(&[mode], &local);
        Ok(next)
    }

    /// Beamsplitter with intensity transmission `t`:
    /// `a_i' = √t a_i − √(1−t) a_j`, `a_j' = √(1−t) a_i + √t a_j`.
    pub fn beamsplit(&self, i: usize, j: usize, t: f64) -> Result<Self> {
        self.check_pair(i, j)?;
        if !(0.0..=1.0).contains(&t) {
            return Err(invalid(format!("beamsplitter transmission {t} outside [0, 1]")));
        }
        let (c, s) = (t.sqrt(), (1.0 - t).sqrt());
        #[rustfmt::skip]
        let local = DMatrix::from_row_slice(4, 4, &[
            c,   0.0, -s,  0.0,
            0.0, c,   0.0, -s,
            s,   0.0, c,   0.0,
            0.0, s,   0.0, c,
        ]);
        let mut next = self.clone();
        next.apply_local(&[i, j], &local);
        Ok(next)
    }

    /// Phase shift `a -> e^{iφ} a`.
    pub fn phase(&self, mode: usize, phi: f64) -> Result<Self> {
        self.check_mode(mode)?;
        let rot = rotation(phi);
        let local = DMatrix::from_row_slice(2, 2, &[rot[0][0], rot[0][1], rot[1][0], rot[1][1]]);
        let mut next = self.clone();
        next.apply_local(&[mode], &local);
        Ok(next)
    }

    /// Phase-insensitive amplifier `b' = G b + √(G²−1) w†` with vacuum idler `w`.
    pub fn amplify(&self, signal: usize, idler: usize, gain: f64) -> Result<Self> {
        self.check_pair(signal, idler)?;
        if !(gain >= 1.0) || !gain.is_finite() {
            return Err(invalid(format!("amplifier gain must be finite and >= 1, got {gain}")));
        }
        if !self.is_vacuum_mode(idler) {
            return Err(Error::PreconditionViolation(format!(
                "amplifier idler mode {idler} is not in vacuum"
            )));
        }
        let g = gain;
        let h = (g * g - 1.0).sqrt();
        #[rustfmt::skip]
        let local = DMatrix::from_row_slice(4, 4, &[
            g,   0.0, h,   0.0,
            0.0, g,   0.0, -h,
            h,   0.0, g,   0.0,
            0.0, -h,  0.0, g,
        ]);
        let mut next = self.clone();
        if let Some(block) = next.sole_source_of(idler) {
            next.retag_block(block, SourceTag::AmplifierIdler, idler);
        }
        next.apply_local(&[signal, idler], &local);
        Ok(next)
    }

    /// Loss `l` on `mode` through a beamsplitter of transmission `1 − l` with a vacuum ancilla.
    pub fn attenuate(&self, mode: usize, ancilla: usize, loss: f64) -> Result<Self> {
        self.check_pair(mode, ancilla)?;
        if !(0.0..=1.0).contains(&loss) {
            return Err(invalid(format!("loss {loss} outside [0, 1]")));
        }
        if !self.is_vacuum_mode(ancilla) {
            return Err(Error::PreconditionViolation(format!(
                "loss ancilla mode {ancilla} is not in vacuum"
            )));
        }
        let mut next = self.clone();
        if let Some(block) = next.sole_source_of(ancilla) {
            next.retag_block(block, SourceTag::LossVacuum, ancilla);
        }
        next.beamsplit(mode, ancilla, 1.0 - loss)
    }

    /// Mean photon number `(⟨X⟩² + ⟨P⟩² + Var X + Var P − 2) / 4`.
    pub fn mean_photon(&self, mode: usize) -> Result<f64> {
        self.check_mode(mode)?;
        let sigma = self.covariance();
        let (x, p) = (self.displacement[2 * mode], self.displacement[2 * mode + 1]);
        let n = (x * x + p * p + sigma[(2 * mode, 2 * mode)] + sigma[(2 * mode + 1, 2 * mode + 1)] - 2.0) / 4.0;
        Ok(n.max(0.0))
    }
}
