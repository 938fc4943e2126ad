use serde::Serialize;

use super::state::{GaussianState, SourceTag};
use crate::error::Result;

/// A primitive Gaussian operation. Circuits are plain `Vec<Op>` so that the
/// same description can be replayed on other backends.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum Op {
    Tag { mode: usize, tag: SourceTag },
    Displace { mode: usize, x: f64, p: f64 },
    Squeeze { mode: usize, r: f64, angle: f64 },
    Beamsplit { i: usize, j: usize, t: f64 },
    Phase { mode: usize, phi: f64 },
    Amplify { signal: usize, idler: usize, gain: f64 },
    Attenuate { mode: usize, ancilla: usize, loss: f64 },
}

impl GaussianState {
    pub fn apply(&self, op: &Op) -> Result<GaussianState> {
        match *op {
            Op::Tag { mode, ref tag } => self.tag_source(mode, tag.clone()),
            Op::Displace { mode, x, p } => self.displace(mode, x, p),
            Op::Squeeze { mode, r, angle } => self.squeeze(mode, r, angle),
            Op::Beamsplit { i, j, t } => self.beamsplit(i, j, t),
            Op::Phase { mode, phi } => self.phase(mode, phi),
            Op::Amplify { signal, idler, gain } => self.amplify(signal, idler, gain),
            Op::Attenuate { mode, ancilla, loss } => self.attenuate(mode, ancilla, loss),
        }
    }

    pub fn apply_all<'a>(&self, ops: impl IntoIterator<Item = &'a Op>) -> Result<GaussianState> {
        let mut state = self.clone();
        for op in ops {
            state = state.apply(op)?;
        }
        Ok(state)
    }
}
