use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::state::{omega, GaussianState, SourceTag};
use crate::error::{invalid, Result};

/// Mean and variance of a scalar observable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

/// Symmetric matrix `M` with `J(φ) = qᵀ M q` for the intensity-difference
/// observable `J(φ) = a_i† a_j e^{iφ} + a_j† a_i e^{−iφ}`.
///
/// With a balanced recombiner `c = (a_i + a_j)/√2`, `d = (a_i − a_j)/√2`,
/// `J(0) = c†c − d†d`.
pub fn intensity_difference_form(n_modes: usize, i: usize, j: usize, phi: f64) -> DMatrix<f64> {
    let (s, c) = phi.sin_cos();
    let (xi, pi, xj, pj) = (2 * i, 2 * i + 1, 2 * j, 2 * j + 1);
    let mut m = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    let mut set = |a: usize, b: usize, v: f64| {
        m[(a, b)] = v;
        m[(b, a)] = v;
    };
    // J = ½[cos φ (X_i X_j + P_i P_j) − sin φ (X_i P_j − P_i X_j)]
    set(xi, xj, c / 4.0);
    set(pi, pj, c / 4.0);
    set(xi, pj, -s / 4.0);
    set(pi, xj, s / 4.0);
    m
}

/// Exact mean and variance of the Weyl-ordered quadratic form `qᵀ M q`.
///
/// Uses the Gaussian (Isserlis) factorisation of the fourth moments with the
/// ordered two-point function `⟨δq_k δq_l⟩ = σ_kl + iΩ_kl`:
///
/// `⟨Q⟩ = tr(Mσ) + μᵀMμ`,
/// `Var Q = 2 tr(MσMσ) + 2 tr(MΩMΩ) + 4 μᵀMσMμ`.
pub fn quadratic_form_moments(state: &GaussianState, m: &DMatrix<f64>) -> Result<Moments> {
    let dim = 2 * state.n_modes();
    if m.nrows() != dim || m.ncols() != dim {
        return Err(invalid("quadratic form dimension mismatch"));
    }
    if (m - m.transpose()).amax() > 1e-12 * (1.0 + m.amax()) {
        return Err(invalid("quadratic form must be symmetric"));
    }
    let sigma = state.covariance();
    let om = omega(state.n_modes());
    let mu = state.displacement();

    let ms = m * &sigma;
    let mo = m * &om;
    let m_mu: DVector<f64> = m * mu;

    let mean = ms.trace() + mu.dot(&m_mu);
    let variance = 2.0 * (&ms * &ms).trace() + 2.0 * (&mo * &mo).trace() + 4.0 * m_mu.dot(&(&sigma * &m_mu));
    Ok(Moments {
        mean,
        variance: variance.max(0.0),
    })
}

/// Exact moments of `J(φ)` between modes `i` and `j`.
pub fn nminus_exact(state: &GaussianState, i: usize, j: usize, phi: f64) -> Result<Moments> {
    let n = state.n_modes();
    if i >= n || j >= n {
        return Err(invalid("mode index out of range"));
    }
    if i == j {
        return Err(invalid("intensity difference needs two distinct modes"));
    }
    quadratic_form_moments(state, &intensity_difference_form(n, i, j, phi))
}

/// Variance of a linear observable split by input source.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseBreakdown {
    pub variance: f64,
    pub shares: Vec<(SourceTag, f64)>,
}

impl NoiseBreakdown {
    pub fn share(&self, tag: &SourceTag) -> f64 {
        self.shares.iter().filter(|(t, _)| t == tag).map(|(_, v)| *v).sum()
    }

    pub fn sum_of_shares(&self) -> f64 {
        self.shares.iter().map(|(_, v)| v).sum()
    }
}

/// `Var(cᵀq) = cᵀσc`, with the contribution of each input source block `k`
/// equal to `v_kᵀ σ_k v_k` where `v = Sᵀc`.
pub fn linear_observable_stats(state: &GaussianState, coeffs: &DVector<f64>) -> Result<NoiseBreakdown> {
    if coeffs.len() != 2 * state.n_modes() {
        return Err(invalid(format!(
            "coefficient vector has length {}, expected {}",
            coeffs.len(),
            2 * state.n_modes()
        )));
    }
    let pulled: DVector<f64> = state.cumulative_map().transpose() * coeffs;
    let shares: Vec<(SourceTag, f64)> = state
        .sources()
        .iter()
        .map(|b| {
            let v = pulled.rows(b.offset, b.dim());
            (b.tag.clone(), v.dot(&(&b.covariance * v)))
        })
        .collect();
    let sigma = state.covariance();
    let variance = coeffs.dot(&(&sigma * coeffs));
    Ok(NoiseBreakdown { variance, shares })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhysicalityReport {
    pub passed: bool,
    /// `‖SΩSᵀ − Ω‖∞`
    pub symplectic_error: f64,
    /// Smallest eigenvalue of `σ + iΩ`.
    pub min_eigenvalue: f64,
    /// Smallest eigenvalue of `σ_k + iΩ` for each input block.
    pub source_min_eigenvalues: Vec<f64>,
}

pub const SYMPLECTIC_TOL: f64 = 1e-9;
pub const PHYSICAL_TOL: f64 = 1e-9;

fn min_uncertainty_eigenvalue(sigma: &DMatrix<f64>) -> f64 {
    let om = omega(sigma.nrows() / 2);
    let h = DMatrix::from_fn(sigma.nrows(), sigma.ncols(), |r, c| {
        Complex64::new(sigma[(r, c)], om[(r, c)])
    });
    h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn check_physical(state: &GaussianState) -> PhysicalityReport {
    let s = state.cumulative_map();
    let om = omega(state.n_modes());
    let symplectic_error = (s * &om * s.transpose() - &om).amax();
    let min_eigenvalue = min_uncertainty_eigenvalue(&state.covariance());
    let source_min_eigenvalues: Vec<f64> = state
        .sources()
        .iter()
        .map(|b| min_uncertainty_eigenvalue(&b.covariance))
        .collect();
    let passed = symplectic_error < SYMPLECTIC_TOL
        && min_eigenvalue >= -PHYSICAL_TOL
        && source_min_eigenvalues.iter().all(|&e| e >= -PHYSICAL_TOL);
    PhysicalityReport {
        passed,
        symplectic_error,
        min_eigenvalue,
        source_min_eigenvalues,
    }
}
