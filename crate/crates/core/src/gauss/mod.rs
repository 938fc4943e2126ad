//! Multimode Gaussian-state engine.
//!
//! States carry the cumulative symplectic map from the input modes together
//! with the independent input covariance blocks, so the variance of any
//! linear observable can be attributed exactly to its sources. Second- and
//! fourth-order moments of quadratic observables (the balanced
//! intensity difference) are evaluated exactly from the Gaussian moments.

mod moments;
mod op;
mod state;

pub use moments::{
    check_physical, intensity_difference_form, linear_observable_stats, nminus_exact, quadratic_form_moments, Moments,
    NoiseBreakdown, PhysicalityReport, PHYSICAL_TOL, SYMPLECTIC_TOL,
};
pub use op::Op;
pub use state::{omega, GaussianState, SourceBlock, SourceTag};
