use num_complex::Complex64;

use super::scenario::builtin_scenario;
use crate::error::{Error, Result};
use crate::qsim::{make_state, project, Amplitude, Gate, PureState, SingleQubit, IMPOSSIBLE_BRANCH};

/// Figure whose circuit, minus its last gate, produces the byproduct.
pub const BELL_SOURCE_FIGURE: usize = 1;

fn truncated_circuit() -> Result<Vec<Gate>> {
    let scenario = builtin_scenario(BELL_SOURCE_FIGURE)?;
    let literal = scenario.literal_circuit.unwrap_or(scenario.circuit);
    let gates = literal.gates();
    match gates.last() {
        Some(&g) if g == Gate::cn(2, 3) => Ok(gates[..gates.len() - 1].to_vec()),
        _ => Err(Error::Manifest(
            "byproduct circuit must end with CN(2,3)".into(),
        )),
    }
}

/// Runs the three-channel circuit without its final CN(2,3) on
/// `(a|1>+b|0>, |+>, e|1>+f|0>)`, measures channel 3 with the given outcome
/// and returns the branch probability and the state left on channels 1–2.
pub fn bell_byproduct(
    a: Amplitude,
    b: Amplitude,
    e: Amplitude,
    f: Amplitude,
    outcome: u8,
) -> Result<(f64, PureState)> {
    let m0 = SingleQubit::one_zero(a, b)?;
    let m1 = SingleQubit::one_zero(e, f)?;
    let input = make_state(&[m0, SingleQubit::plus(), m1])?;
    let out = input.apply_all(&truncated_circuit()?)?;
    let (probability, collapsed) = project(&out, 3, outcome)?;
    let rest = collapsed
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| (i & 1) as u8 == outcome)
        .map(|(_, a)| *a)
        .collect();
    Ok((probability, PureState::normalized(2, rest)?))
}

/// Closed-form branch: outcome 0 gives `ea|11>+fb|00>`, outcome 1 gives
/// `eb|10>+fa|01>`, each with its squared norm as probability.
pub fn bell_branch_formula(
    a: Amplitude,
    b: Amplitude,
    e: Amplitude,
    f: Amplitude,
    outcome: u8,
) -> Result<(f64, PureState)> {
    SingleQubit::one_zero(a, b)?;
    SingleQubit::one_zero(e, f)?;
    let z = Complex64::default();
    // index order |00>, |01>, |10>, |11>
    let amps = match outcome {
        0 => vec![f * b, z, z, e * a],
        1 => vec![z, f * a, e * b, z],
        _ => return Err(Error::InvalidInput(format!("outcome {outcome} is not 0 or 1"))),
    };
    let probability: f64 = amps.iter().map(|x| x.norm_sqr()).sum();
    if probability < IMPOSSIBLE_BRANCH {
        return Err(Error::ImpossibleBranch { probability });
    }
    Ok((probability, PureState::normalized(2, amps)?))
}
