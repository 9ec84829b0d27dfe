//! Bundled figure circuits and the scenario manifest that describes their
//! inputs and claimed outputs.

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::Deserialize;

use super::verify::{evaluate_output, VerificationReport};
use super::{input_factors, InputRole, OutputClaim};
use crate::circuit::{parse_circuit, Circuit};
use crate::error::{Error, Result};
use crate::qsim::{make_state, run_circuit, Segment, SingleQubit};

const MANIFEST: &str = include_str!("../../circuits/scenarios.json");
const MANIFEST_VERSION: u32 = 1;

const BUNDLED: [(&str, &str); 10] = [
    ("fig1.qc", include_str!("../../circuits/fig1.qc")),
    ("fig1_repaired.qc", include_str!("../../circuits/fig1_repaired.qc")),
    ("fig2.qc", include_str!("../../circuits/fig2.qc")),
    ("fig3.qc", include_str!("../../circuits/fig3.qc")),
    ("fig4.qc", include_str!("../../circuits/fig4.qc")),
    ("fig5.qc", include_str!("../../circuits/fig5.qc")),
    ("fig6.qc", include_str!("../../circuits/fig6.qc")),
    ("fig7.qc", include_str!("../../circuits/fig7.qc")),
    ("fig8.qc", include_str!("../../circuits/fig8.qc")),
    ("fig9.qc", include_str!("../../circuits/fig9.qc")),
];

/// Figures that have a conformance scenario (5 is the swap demonstration).
pub const SCENARIO_FIGURES: [usize; 8] = [1, 2, 3, 4, 6, 7, 8, 9];

pub fn bundled_circuit_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(name, _)| *name)
}

/// Source text of a bundled `.qc` file.
pub fn bundled_circuit(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, src)| *src)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    version: u32,
    scenarios: Vec<ManifestEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestEntry {
    figure: usize,
    circuit: String,
    #[serde(default)]
    literal_circuit: Option<String>,
    inputs: Vec<InputRole>,
    outputs: Vec<ManifestOutput>,
}

#[derive(Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum ManifestOutput {
    Message(usize),
    /// `[coeff0, coeff1]`, each `[re, im]`.
    Residue([Complex64; 2]),
    Psi(usize),
}

/// A figure: its circuit, what Alice feeds in, and what Bob should see.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub figure_id: usize,
    pub circuit: Circuit,
    /// Gate-for-gate transcription when it differs from `circuit`.
    pub literal_circuit: Option<Circuit>,
    pub inputs: Vec<InputRole>,
    pub claimed_outputs: Vec<OutputClaim>,
}

impl Scenario {
    pub fn message_count(&self) -> usize {
        self.inputs
            .iter()
            .filter(|r| matches!(r, InputRole::Message(_)))
            .count()
    }

    pub fn channel_count(&self) -> usize {
        self.circuit.channel_count()
    }

    pub fn aux_channel(&self) -> Option<usize> {
        self.inputs
            .iter()
            .position(|r| matches!(r, InputRole::Aux(_)))
            .map(|k| k + 1)
    }
}

fn load_bundled(name: &str) -> Result<Circuit> {
    let src = bundled_circuit(name)
        .ok_or_else(|| Error::Manifest(format!("no bundled circuit {name:?}")))?;
    Ok(parse_circuit(src)?)
}

fn build_scenario(entry: &ManifestEntry) -> Result<Scenario> {
    let circuit = load_bundled(&entry.circuit)?;
    let literal_circuit = entry
        .literal_circuit
        .as_deref()
        .map(load_bundled)
        .transpose()?;
    let n = circuit.channel_count();
    if circuit.border().is_none() {
        return Err(Error::Manifest(format!(
            "figure {} circuit has no border",
            entry.figure
        )));
    }
    if entry.inputs.len() != n || entry.outputs.len() != n {
        return Err(Error::Manifest(format!(
            "figure {}: {} channels but {} inputs / {} outputs",
            entry.figure,
            n,
            entry.inputs.len(),
            entry.outputs.len()
        )));
    }
    let claimed_outputs = entry
        .outputs
        .iter()
        .map(|o| {
            Ok(match *o {
                ManifestOutput::Message(i) => OutputClaim::Message(i),
                ManifestOutput::Residue([c0, c1]) => {
                    OutputClaim::Residue(SingleQubit::new(c0, c1)?)
                }
                ManifestOutput::Psi(p) => OutputClaim::Psi(p),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let scenario = Scenario {
        figure_id: entry.figure,
        circuit,
        literal_circuit,
        inputs: entry.inputs.clone(),
        claimed_outputs,
    };
    let m = scenario.message_count();
    let mut seen = vec![false; m];
    for role in &scenario.inputs {
        if let InputRole::Message(i) = *role {
            if i >= m || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Manifest(format!(
                    "figure {}: message slots must be 0..{m} once each",
                    entry.figure
                )));
            }
        }
    }
    Ok(scenario)
}

fn scenarios() -> &'static Result<Vec<Scenario>> {
    static CACHE: OnceLock<Result<Vec<Scenario>>> = OnceLock::new();
    CACHE.get_or_init(|| {
        let manifest: Manifest =
            serde_json::from_str(MANIFEST).map_err(|e| Error::Manifest(e.to_string()))?;
        if manifest.version != MANIFEST_VERSION {
            return Err(Error::Manifest(format!(
                "unsupported manifest version {}",
                manifest.version
            )));
        }
        manifest.scenarios.iter().map(build_scenario).collect()
    })
}

pub fn builtin_scenario(figure_id: usize) -> Result<Scenario> {
    let all = scenarios().as_ref().map_err(Clone::clone)?;
    all.iter()
        .find(|s| s.figure_id == figure_id)
        .cloned()
        .ok_or(Error::UnknownScenario(figure_id))
}

/// Runs a figure on the given message states and checks the output column.
pub fn run_scenario(figure_id: usize, messages: &[SingleQubit], tol: f64) -> Result<VerificationReport> {
    let scenario = builtin_scenario(figure_id)?;
    if messages.len() != scenario.message_count() {
        return Err(Error::ShapeMismatch {
            expected: scenario.message_count(),
            found: messages.len(),
        });
    }
    let input = make_state(&input_factors(&scenario.inputs, messages)?)?;
    let output = run_circuit(&input, &scenario.circuit, Segment::All)?;
    evaluate_output(&output, &scenario.claimed_outputs, messages, tol)
}
