//! Dense pure-state simulation of small qubit registers under Hadamard and
//! controlled-NOT gates.

mod gate;
mod measure;
mod state;

pub use gate::{apply_gate_raw, Gate};
pub use measure::{
    block_fidelity, channel_fidelity, factor_all, factor_channel, project, purity, reduced_density, Density2,
    IMPOSSIBLE_BRANCH, PURITY_TOL,
};
pub use state::{
    apply_gate, equal_up_to_global_phase, fidelity, make_state, Amplitude, PureState, SingleQubit,
    MAX_CHANNELS, NORM_TOL,
};

use crate::circuit::Circuit;
use crate::error::{Error, Result};

/// Which side of the Alice/Bob border to execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Segment {
    All,
    AliceOnly,
    BobOnly,
}

/// Runs the gates of `circuit` selected by `segment`. A circuit without a
/// border is treated as all-Alice.
pub fn run_circuit(state: &PureState, circuit: &Circuit, segment: Segment) -> Result<PureState> {
    if state.channel_count() != circuit.channel_count() {
        return Err(Error::ShapeMismatch {
            expected: circuit.channel_count(),
            found: state.channel_count(),
        });
    }
    let gates = match segment {
        Segment::All => circuit.gates(),
        Segment::AliceOnly => circuit.alice_gates(),
        Segment::BobOnly => circuit.bob_gates(),
    };
    state.apply_all(gates)
}
