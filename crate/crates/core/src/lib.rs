//! Phase-sensitivity model of a coherent-amplifier quantum interferometer.
//!
//! A coherent beam and a squeezed vacuum are mixed on an input splitter; one
//! arm passes a phase-insensitive amplifier, picks up the signal phase and
//! suffers loss before balanced intensity-difference detection. The crate
//! provides
//!
//! * [`gauss`]: a multimode Gaussian engine with per-source noise attribution,
//! * [`fock`]: a truncated Fock-space simulator used to cross-check it,
//! * [`closed_form`]: analytic signal, noise and sensitivity expressions,
//! * [`scheme`]: circuit construction and metric evaluation per scheme,
//! * [`optimize`]: numerical design optimisation over splitting and gain.

// `!(x >= 0.0)` guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod error;
pub mod fock;
pub mod gauss;
pub mod optimize;
pub mod scheme;

pub use closed_form::{Gain, ParamPoint};
pub use error::{Error, Result};
pub use gauss::{GaussianState, Op, SourceTag};
pub use optimize::{OptimalGain, OptimizationOutcome, OptimizeMode, OptimizerSettings};
pub use scheme::{
    evaluate, noise_breakdown, BreakdownReport, Engine, GainMode, Metrics, Scheme, SchemeConfig, SplitSource,
};
