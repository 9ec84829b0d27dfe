//! The nine-case protocol for three channels with the auxiliary state on
//! channel 2: three auxiliary values, each with three output arrangements.

use serde::Serialize;

use super::encoder::alice_encoder;
use super::scenario::builtin_scenario;
use super::search::BobProgram;
use super::swap::post_swap_plan;
use super::verify::{evaluate_output, VerificationReport};
use super::{input_factors, AuxValue, InputRole, OutputClaim};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::qsim::{make_state, Gate, SingleQubit};

/// Output arrangements, channel by channel; `None` marks the residue.
pub const ARRANGEMENTS: [[Option<usize>; 3]; 3] = [
    [Some(1), Some(0), None],
    [None, Some(1), Some(0)],
    [Some(1), None, Some(0)],
];

const TABLE_CHANNELS: usize = 3;
const TABLE_AUX_CHANNEL: usize = 2;

/// Figure supplying the base decoder for each auxiliary value.
fn base_figure(value: AuxValue) -> usize {
    match value {
        AuxValue::Plus => 1,
        AuxValue::Zero => 2,
        AuxValue::One => 3,
    }
}

const TABLE_ORDER: [AuxValue; 3] = [AuxValue::Plus, AuxValue::Zero, AuxValue::One];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolCase {
    pub channel_count: usize,
    pub aux_channel: usize,
    pub aux_value: AuxValue,
    /// Index into [`ARRANGEMENTS`].
    pub arrangement: usize,
    pub message_channels: Vec<usize>,
    pub bob_program: Vec<Gate>,
    pub expected_layout: Vec<OutputClaim>,
    /// True when the decoder is a figure's own, with no swaps appended.
    pub base: bool,
}

impl ProtocolCase {
    /// Single-arrangement case for a searched decoder.
    pub fn from_program(program: &BobProgram) -> ProtocolCase {
        ProtocolCase {
            channel_count: program.channel_count,
            aux_channel: program.aux_channel,
            aux_value: program.aux_value,
            arrangement: 0,
            message_channels: (1..=program.channel_count)
                .filter(|&ch| ch != program.aux_channel)
                .collect(),
            bob_program: program.gates.clone(),
            expected_layout: program.layout.clone(),
            base: true,
        }
    }

    pub fn id(&self) -> String {
        format!("{}-a{}", self.aux_value, self.arrangement)
    }

    pub fn input_roles(&self) -> Vec<InputRole> {
        let mut roles = vec![InputRole::Aux(self.aux_value); self.channel_count];
        for (i, &ch) in self.message_channels.iter().enumerate() {
            roles[ch - 1] = InputRole::Message(i);
        }
        roles
    }

    pub fn circuit(&self) -> Result<Circuit> {
        Circuit::split(self.channel_count, &alice_encoder(self.channel_count)?, &self.bob_program)
    }

    /// Runs Alice's encoder and this case's program on `messages` and checks
    /// the output against `expected_layout`.
    pub fn verify(&self, messages: &[SingleQubit], tol: f64) -> Result<VerificationReport> {
        if messages.len() != self.message_channels.len() {
            return Err(Error::ShapeMismatch {
                expected: self.message_channels.len(),
                found: messages.len(),
            });
        }
        let input = make_state(&input_factors(&self.input_roles(), messages)?)?;
        let out = input.apply_all(self.circuit()?.gates())?;
        evaluate_output(&out, &self.expected_layout, messages, tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolTable {
    pub cases: Vec<ProtocolCase>,
}

impl ProtocolTable {
    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    /// One case per auxiliary value: the figures' own decoders.
    pub fn reduced(&self) -> ProtocolTable {
        ProtocolTable {
            cases: self.cases.iter().filter(|c| c.base).cloned().collect(),
        }
    }

    pub fn find(&self, aux_value: AuxValue, arrangement: usize) -> Option<&ProtocolCase> {
        self.cases
            .iter()
            .find(|c| c.aux_value == aux_value && c.arrangement == arrangement)
    }
}

fn slots(layout: &[OutputClaim]) -> Result<Vec<Option<usize>>> {
    layout
        .iter()
        .map(|c| match *c {
            OutputClaim::Message(i) => Ok(Some(i)),
            OutputClaim::Residue(_) => Ok(None),
            OutputClaim::Psi(_) => Err(Error::InvalidLayout("unexpected entangled block".into())),
        })
        .collect()
}

pub fn protocol_table(channel_count: usize) -> Result<ProtocolTable> {
    if channel_count != TABLE_CHANNELS {
        return Err(Error::UnsupportedSize(channel_count));
    }
    let mut cases = Vec::with_capacity(9);
    for value in TABLE_ORDER {
        let scenario = builtin_scenario(base_figure(value))?;
        if scenario.aux_channel() != Some(TABLE_AUX_CHANNEL) {
            return Err(Error::Manifest(format!(
                "figure {} does not use channel {TABLE_AUX_CHANNEL} for the auxiliary state",
                scenario.figure_id
            )));
        }
        let native = slots(&scenario.claimed_outputs)?;
        let residue = scenario
            .claimed_outputs
            .iter()
            .find_map(OutputClaim::as_residue)
            .ok_or_else(|| Error::Manifest("base figure has no residue".into()))?;
        let message_channels = scenario
            .inputs
            .iter()
            .enumerate()
            .filter(|(_, r)| matches!(r, InputRole::Message(_)))
            .map(|(k, _)| k + 1)
            .collect::<Vec<_>>();
        for (index, arrangement) in ARRANGEMENTS.iter().enumerate() {
            let mut bob_program = scenario.circuit.bob_gates().to_vec();
            bob_program.extend(post_swap_plan(&native, arrangement)?);
            let expected_layout = arrangement
                .iter()
                .map(|s| s.map_or(OutputClaim::Residue(residue), OutputClaim::Message))
                .collect();
            cases.push(ProtocolCase {
                channel_count,
                aux_channel: TABLE_AUX_CHANNEL,
                aux_value: value,
                arrangement: index,
                message_channels: message_channels.clone(),
                bob_program,
                expected_layout,
                base: native == arrangement,
            });
        }
    }
    Ok(ProtocolTable { cases })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::DEFAULT_TOL;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sizes() {
        let t = protocol_table(3).unwrap();
        assert_eq!(t.len(), 9);
        assert_eq!(t.reduced().len(), 3);
        assert_eq!(protocol_table(4), Err(Error::UnsupportedSize(4)));
    }

    #[test]
    fn plus_base_case_is_fig1() {
        let t = protocol_table(3).unwrap();
        let case = t.find(AuxValue::Plus, 0).unwrap();
        assert!(case.base);
        assert_eq!(case.bob_program, builtin_scenario(1).unwrap().circuit.bob_gates());
    }

    #[test]
    fn every_case_decodes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for case in protocol_table(3).unwrap().cases {
            assert!(!case.bob_program.is_empty());
            for _ in 0..20 {
                let m = [SingleQubit::random(&mut rng), SingleQubit::random(&mut rng)];
                let r = case.verify(&m, DEFAULT_TOL).unwrap();
                assert!(r.passed, "{} failed: {:?}", case.id(), r.per_channel_fidelity);
            }
        }
    }
}
