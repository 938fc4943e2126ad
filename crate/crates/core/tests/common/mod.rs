#![allow(dead_code)]

use caqi_core::{Error, GaussianState, Op};
use proptest::prelude::*;
use rand::Rng;

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

pub fn op_strategy(n_modes: usize) -> impl Strategy<Value = Op> {
    let m = 0..n_modes;
    let pair = (0..n_modes, 1..n_modes).prop_map(move |(i, k)| (i, (i + k) % n_modes));
    prop_oneof![
        (m.clone(), -2.0..2.0f64, -2.0..2.0f64).prop_map(|(mode, x, p)| Op::Displace { mode, x, p }),
        (m.clone(), 0.0..0.5f64, -3.2..3.2f64).prop_map(|(mode, r, angle)| Op::Squeeze { mode, r, angle }),
        (pair.clone(), 0.0..=1.0f64).prop_map(|((i, j), t)| Op::Beamsplit { i, j, t }),
        (m, -6.3..6.3f64).prop_map(|(mode, phi)| Op::Phase { mode, phi }),
        (pair.clone(), 1.0..2.0f64).prop_map(|((signal, idler), gain)| Op::Amplify { signal, idler, gain }),
        (pair, 0.0..=1.0f64).prop_map(|((mode, ancilla), loss)| Op::Attenuate { mode, ancilla, loss }),
    ]
}

pub fn random_op(rng: &mut impl Rng, n_modes: usize) -> Op {
    let mode = rng.random_range(0..n_modes);
    let other = (mode + rng.random_range(1..n_modes)) % n_modes;
    match rng.random_range(0..6) {
        0 => Op::Displace {
            mode,
            x: rng.random_range(-2.0..2.0),
            p: rng.random_range(-2.0..2.0),
        },
        1 => Op::Squeeze {
            mode,
            r: rng.random_range(0.0..0.5),
            angle: rng.random_range(-3.2..3.2),
        },
        2 => Op::Beamsplit {
            i: mode,
            j: other,
            t: rng.random_range(0.0..=1.0),
        },
        3 => Op::Phase {
            mode,
            phi: rng.random_range(-6.3..6.3),
        },
        4 => Op::Amplify {
            signal: mode,
            idler: other,
            gain: rng.random_range(1.0..2.0),
        },
        _ => Op::Attenuate {
            mode,
            ancilla: other,
            loss: rng.random_range(0.0..=1.0),
        },
    }
}

/// Apply `ops`, skipping amplifiers and losses whose idler or ancilla is no longer vacuum.
pub fn apply_lenient(mut state: GaussianState, ops: &[Op]) -> GaussianState {
    for op in ops {
        match state.apply(op) {
            Ok(next) => state = next,
            Err(Error::PreconditionViolation(_)) => {}
            Err(e) => panic!("{op:?} failed: {e}"),
        }
    }
    state
}
