//! Alice's encoder, Bob's decoders, figure scenarios, the protocol table,
//! swap post-processing and decoder search.

mod bell;
mod decoders;
mod encoder;
mod scenario;
mod search;
mod swap;
mod table;
mod verify;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::SingleQubit;

pub use bell::{bell_branch_formula, bell_byproduct, BELL_SOURCE_FIGURE};
pub use decoders::{bundled_decoder, bundled_decoders, decoder};
pub use encoder::{alice_encoder, bob_prefix, is_prefix_up_to_commutation};
pub use scenario::{
    builtin_scenario, bundled_circuit, bundled_circuit_names, run_scenario, Scenario,
    SCENARIO_FIGURES,
};
pub use search::{
    solve_bob_program, solve_bob_program_with, verify_circuit_action_equal,
    verify_protocol_action_equal, BobProgram, SearchGoal, DEFAULT_MAX_GATES, MAX_SEARCH_GATES,
};
pub use swap::{post_swap_plan, swap_circuit};
pub use table::{protocol_table, ProtocolCase, ProtocolTable, ARRANGEMENTS};
pub use verify::{construct_psi, evaluate_output, VerificationReport};

/// Default conformance tolerance on fidelities.
pub const DEFAULT_TOL: f64 = 1e-10;

/// The known state Alice feeds into the auxiliary channel; its identity is
/// the classical message sent to Bob.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AuxValue {
    Zero,
    One,
    Plus,
}

impl AuxValue {
    pub const ALL: [AuxValue; 3] = [AuxValue::Zero, AuxValue::One, AuxValue::Plus];

    pub fn state(self) -> SingleQubit {
        match self {
            AuxValue::Zero => SingleQubit::zero(),
            AuxValue::One => SingleQubit::one(),
            AuxValue::Plus => SingleQubit::plus(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AuxValue::Zero => "zero",
            AuxValue::One => "one",
            AuxValue::Plus => "plus",
        }
    }
}

impl fmt::Display for AuxValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AuxValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zero" | "0" => Ok(AuxValue::Zero),
            "one" | "1" => Ok(AuxValue::One),
            "plus" | "+" => Ok(AuxValue::Plus),
            _ => Err(Error::InvalidInput(format!("unknown auxiliary value {s:?}"))),
        }
    }
}

/// What Alice puts on an input channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputRole {
    /// The n-th unknown message state.
    Message(usize),
    Aux(AuxValue),
}

/// What should come out on an output channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputClaim {
    /// The n-th message state, unentangled from everything else.
    Message(usize),
    /// A known leftover state on the auxiliary-residue channel.
    Residue(SingleQubit),
    /// Qubit n of the entangled two-channel block built by [`construct_psi`].
    Psi(usize),
}

impl OutputClaim {
    pub fn as_message(&self) -> Option<usize> {
        match *self {
            OutputClaim::Message(i) => Some(i),
            _ => None,
        }
    }

    pub fn as_residue(&self) -> Option<SingleQubit> {
        match *self {
            OutputClaim::Residue(q) => Some(q),
            _ => None,
        }
    }

    /// Same role, and for residues the same state up to phase.
    pub fn matches(&self, other: &OutputClaim, tol: f64) -> bool {
        match (self, other) {
            (OutputClaim::Residue(a), OutputClaim::Residue(b)) => a.fidelity(b) >= 1.0 - tol,
            _ => self == other,
        }
    }
}

/// Input product state for `roles`, filling message slots from `messages`.
pub fn input_factors(roles: &[InputRole], messages: &[SingleQubit]) -> Result<Vec<SingleQubit>> {
    roles
        .iter()
        .map(|role| match *role {
            InputRole::Message(i) => messages.get(i).copied().ok_or(Error::ShapeMismatch {
                expected: i + 1,
                found: messages.len(),
            }),
            InputRole::Aux(v) => Ok(v.state()),
        })
        .collect()
}

/// Input roles with the auxiliary state on `aux_channel` and messages
/// `0, 1, …` on the remaining channels in ascending order.
pub fn placement(channel_count: usize, aux_channel: usize, aux_value: AuxValue) -> Vec<InputRole> {
    let mut next = 0;
    (1..=channel_count)
        .map(|ch| {
            if ch == aux_channel {
                InputRole::Aux(aux_value)
            } else {
                next += 1;
                InputRole::Message(next - 1)
            }
        })
        .collect()
}
