//! Monte-Carlo intercept-and-resend experiments against the protocol.
//!
//! Model: Alice picks an input placement (auxiliary channel and value) and
//! encodes random messages. Eve sees the whole register and the classical
//! token, so she knows the auxiliary value but not its channel. She guesses
//! a channel, decodes with that placement's program, keeps what she got,
//! then re-encodes: her decoded messages go back to the input slots she
//! believes they came from, a fresh auxiliary state goes into the slot she
//! believes was auxiliary, and her leftover residue is discarded into an
//! extra channel. Bob decodes the forwarded register with the true program.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::protocol::{alice_encoder, decoder, input_factors, AuxValue, OutputClaim, ProtocolCase};
use crate::qsim::{channel_fidelity, make_state, PureState, SingleQubit};

/// Fidelity below `1 - SUCCESS_TOL` counts as a wrong state.
pub const SUCCESS_TOL: f64 = 1e-9;
/// Channel counts with decoders available to the experiment.
pub const EXPERIMENT_CHANNELS: std::ops::RangeInclusive<usize> = 3..=6;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const CASE_STREAM: u64 = 1;

/// SplitMix64 finalizer over `base_seed + index * golden_gamma`.
pub fn trial_seed(base_seed: u64, index: u64) -> u64 {
    let mut z = base_seed.wrapping_add(index.wrapping_mul(GOLDEN_GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// An input placement, as Eve or Bob would name it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct CaseId {
    pub aux_channel: usize,
    pub aux_value: AuxValue,
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ch{}-{}", self.aux_channel, self.aux_value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EveStrategy {
    /// Uniformly random auxiliary channel; value read from the classical token.
    UniformGuess,
    /// Always decode as this placement.
    FixedGuess { aux_channel: usize, aux_value: AuxValue },
    /// No eavesdropper: the register goes straight to Bob.
    Absent,
}

impl fmt::Display for EveStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EveStrategy::UniformGuess => f.write_str("uniform"),
            EveStrategy::FixedGuess {
                aux_channel,
                aux_value,
            } => write!(f, "fixed:{aux_channel}:{aux_value}"),
            EveStrategy::Absent => f.write_str("absent"),
        }
    }
}

impl FromStr for EveStrategy {
    type Err = Error;

    /// `uniform`, `absent`, or `fixed:CHANNEL:VALUE`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split(':').collect::<Vec<_>>().as_slice() {
            ["uniform"] => Ok(EveStrategy::UniformGuess),
            ["absent"] => Ok(EveStrategy::Absent),
            ["fixed", ch, value] => Ok(EveStrategy::FixedGuess {
                aux_channel: ch
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad channel {ch:?}")))?,
                aux_value: value.parse()?,
            }),
            _ => Err(Error::InvalidInput(format!("unknown strategy {s:?}"))),
        }
    }
}

impl Serialize for EveStrategy {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectionMode {
    /// Bob compares every output channel with the expected state directly.
    Omniscient,
    /// Bob measures the residue channel in the basis {expected residue,
    /// orthogonal complement}; only the orthogonal outcome raises an alarm.
    Sampled,
}

impl fmt::Display for DetectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DetectionMode::Omniscient => "omniscient",
            DetectionMode::Sampled => "sampled",
        })
    }
}

impl FromStr for DetectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "omniscient" => Ok(DetectionMode::Omniscient),
            "sampled" => Ok(DetectionMode::Sampled),
            _ => Err(Error::InvalidInput(format!("unknown detection mode {s:?}"))),
        }
    }
}

/// How Alice's placement is chosen per trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrueCase {
    /// Channel and value drawn uniformly for every trial.
    Random,
    Fixed(CaseId),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub eve_success: bool,
    /// Omniscient verdict.
    pub bob_detects: bool,
    /// Verdict of the residue measurement.
    pub bob_detects_sampled: bool,
    /// Probability that the residue measurement gives the orthogonal outcome.
    pub detection_probability: f64,
    pub true_case_id: CaseId,
    pub guessed_case_id: Option<CaseId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub channel_count: usize,
    pub trials: usize,
    pub strategy: EveStrategy,
    pub base_seed: u64,
    pub mode: DetectionMode,
    pub true_case: TrueCase,
}

impl ExperimentConfig {
    pub fn new(channel_count: usize, trials: usize, strategy: EveStrategy, base_seed: u64) -> Self {
        ExperimentConfig {
            channel_count,
            trials,
            strategy,
            base_seed,
            mode: DetectionMode::Omniscient,
            true_case: TrueCase::Random,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentStats {
    pub channel_count: usize,
    pub trials: usize,
    pub mode: DetectionMode,
    pub strategy: EveStrategy,
    pub eve_success_rate: f64,
    pub detection_rate: f64,
    pub analytic_success_rate: f64,
    pub ci95_halfwidth: f64,
    pub base_seed: u64,
}

impl ExperimentStats {
    /// Empirical success rate lies within the 95% interval of the model.
    pub fn within_interval(&self) -> bool {
        (self.eve_success_rate - self.analytic_success_rate).abs() <= self.ci95_halfwidth + 1e-12
    }
}

fn check_case(channel_count: usize, case: &ProtocolCase) -> Result<()> {
    let n = channel_count;
    if case.channel_count != n || case.expected_layout.len() != n {
        return Err(Error::InvalidLayout(format!(
            "case describes {} channels, experiment has {n}",
            case.channel_count
        )));
    }
    let mut covered = vec![false; n + 1];
    for &ch in case.message_channels.iter().chain([&case.aux_channel]) {
        if ch == 0 || ch > n || std::mem::replace(&mut covered[ch], true) {
            return Err(Error::InvalidLayout(format!(
                "channel {ch} is out of range or used twice"
            )));
        }
    }
    if !covered[1..].iter().all(|&c| c) {
        return Err(Error::InvalidLayout("input channels do not cover the register".into()));
    }
    let residues = case
        .expected_layout
        .iter()
        .filter(|c| matches!(c, OutputClaim::Residue(_)))
        .count();
    if residues != 1 {
        return Err(Error::InvalidLayout(format!("{residues} residue channels, expected 1")));
    }
    Ok(())
}

/// The placement's case, built from its decoder.
pub fn case_for(channel_count: usize, id: CaseId) -> Result<ProtocolCase> {
    Ok(ProtocolCase::from_program(&decoder(
        channel_count,
        id.aux_channel,
        id.aux_value,
    )?))
}

fn position_of_message(case: &ProtocolCase, index: usize) -> Option<usize> {
    case.expected_layout
        .iter()
        .position(|c| *c == OutputClaim::Message(index))
}

fn residue_position(case: &ProtocolCase) -> Option<(usize, SingleQubit)> {
    case.expected_layout
        .iter()
        .enumerate()
        .find_map(|(p, c)| c.as_residue().map(|r| (p, r)))
}

/// Eve's verdict: every true message recovered where her layout puts it and
/// her residue as expected. A message sitting on what she took for the
/// auxiliary channel has no place in her layout, so a wrong guess fails.
fn eve_recovers(
    eve_out: &PureState,
    eve: &ProtocolCase,
    truth: &ProtocolCase,
    messages: &[SingleQubit],
) -> Result<bool> {
    for (j, &ch) in truth.message_channels.iter().enumerate() {
        let Some(i) = eve.message_channels.iter().position(|&c| c == ch) else {
            return Ok(false);
        };
        let p = position_of_message(eve, i).ok_or_else(|| Error::InvalidLayout("message missing from layout".into()))?;
        if channel_fidelity(eve_out, p + 1, &messages[j])? < 1.0 - SUCCESS_TOL {
            return Ok(false);
        }
    }
    let (p, residue) = residue_position(eve).ok_or_else(|| Error::InvalidLayout("no residue".into()))?;
    Ok(channel_fidelity(eve_out, p + 1, &residue)? >= 1.0 - SUCCESS_TOL)
}

/// Eve's forwarded register: `N + 1` channels, the last holding her
/// discarded residue.
fn resend(eve_out: &PureState, eve: &ProtocolCase) -> Result<PureState> {
    let n = eve.channel_count;
    let with_fresh = eve_out.tensor(&eve.aux_value.state().to_state())?;
    let mut destination = Vec::with_capacity(n + 1);
    for claim in &eve.expected_layout {
        destination.push(match *claim {
            OutputClaim::Message(i) => eve.message_channels[i],
            OutputClaim::Residue(_) => n + 1,
            OutputClaim::Psi(_) => return Err(Error::InvalidLayout("unexpected entangled block".into())),
        });
    }
    destination.push(eve.aux_channel);
    with_fresh
        .permute_channels(&destination)?
        .apply_all(&alice_encoder(n)?)
}

/// One interception. `trial_seed` drives the messages, Eve's guess and the
/// residue measurement.
pub fn run_trial(
    channel_count: usize,
    true_case: &ProtocolCase,
    strategy: EveStrategy,
    trial_seed: u64,
) -> Result<TrialOutcome> {
    check_case(channel_count, true_case)?;
    let n = channel_count;
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    let messages: Vec<SingleQubit> = (0..n - 1).map(|_| SingleQubit::random(&mut rng)).collect();
    let true_case_id = CaseId {
        aux_channel: true_case.aux_channel,
        aux_value: true_case.aux_value,
    };
    let guess = match strategy {
        EveStrategy::UniformGuess => Some(CaseId {
            aux_channel: rng.random_range(1..=n),
            aux_value: true_case.aux_value,
        }),
        EveStrategy::FixedGuess {
            aux_channel,
            aux_value,
        } => {
            if aux_channel == 0 || aux_channel > n {
                return Err(Error::ChannelOutOfRange {
                    channel: aux_channel,
                    channel_count: n,
                });
            }
            Some(CaseId {
                aux_channel,
                aux_value,
            })
        }
        EveStrategy::Absent => None,
    };
    let u: f64 = rng.random();

    let input = make_state(&input_factors(&true_case.input_roles(), &messages)?)?;
    let sent = input.apply_all(&alice_encoder(n)?)?;
    let (received, eve_success) = match guess {
        None => (sent, false),
        Some(id) => {
            let eve = case_for(n, id)?;
            let eve_out = sent.apply_all(&eve.bob_program)?;
            let success = eve_recovers(&eve_out, &eve, true_case, &messages)?;
            (resend(&eve_out, &eve)?, success)
        }
    };
    let bob_out = received.apply_all(&true_case.bob_program)?;

    let mut bob_detects = false;
    let mut detection_probability = 0.0;
    for (p, claim) in true_case.expected_layout.iter().enumerate() {
        let expected = match *claim {
            OutputClaim::Message(j) => messages[j],
            OutputClaim::Residue(r) => r,
            OutputClaim::Psi(_) => return Err(Error::InvalidLayout("unexpected entangled block".into())),
        };
        let fid = channel_fidelity(&bob_out, p + 1, &expected)?;
        bob_detects |= fid < 1.0 - SUCCESS_TOL;
        if claim.as_residue().is_some() {
            detection_probability = (1.0 - fid).clamp(0.0, 1.0);
        }
    }
    let bob_detects_sampled = detection_probability > SUCCESS_TOL && u < detection_probability;

    Ok(TrialOutcome {
        eve_success,
        bob_detects,
        bob_detects_sampled,
        detection_probability,
        true_case_id,
        guessed_case_id: guess,
    })
}

/// Success probability of `strategy` under the model.
pub fn analytic_success_rate(channel_count: usize, strategy: EveStrategy, true_case: TrueCase) -> f64 {
    let n = channel_count as f64;
    match (strategy, true_case) {
        (EveStrategy::UniformGuess, _) => 1.0 / n,
        (EveStrategy::Absent, _) => 0.0,
        (
            EveStrategy::FixedGuess {
                aux_channel,
                aux_value,
            },
            TrueCase::Fixed(id),
        ) => {
            if id.aux_channel == aux_channel && id.aux_value == aux_value {
                1.0
            } else {
                0.0
            }
        }
        (EveStrategy::FixedGuess { aux_channel, .. }, TrueCase::Random) => {
            if (1..=channel_count).contains(&aux_channel) {
                1.0 / (n * AuxValue::ALL.len() as f64)
            } else {
                0.0
            }
        }
    }
}

fn draw_case(channel_count: usize, true_case: TrueCase, seed: u64) -> CaseId {
    match true_case {
        TrueCase::Fixed(id) => id,
        TrueCase::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(CASE_STREAM);
            CaseId {
                aux_channel: rng.random_range(1..=channel_count),
                aux_value: AuxValue::ALL[rng.random_range(0..AuxValue::ALL.len())],
            }
        }
    }
}

/// Every trial's outcome, in trial order.
pub fn run_trials(config: &ExperimentConfig) -> Result<Vec<TrialOutcome>> {
    if config.trials == 0 {
        return Err(Error::InvalidInput("at least one trial is required".into()));
    }
    let n = config.channel_count;
    if !EXPERIMENT_CHANNELS.contains(&n) {
        return Err(Error::UnsupportedSize(n));
    }
    if let TrueCase::Fixed(id) = config.true_case {
        if id.aux_channel == 0 || id.aux_channel > n {
            return Err(Error::ChannelOutOfRange {
                channel: id.aux_channel,
                channel_count: n,
            });
        }
    }
    (0..config.trials as u64)
        .into_par_iter()
        .map(|index| {
            let seed = trial_seed(config.base_seed, index);
            let case = case_for(n, draw_case(n, config.true_case, seed))?;
            run_trial(n, &case, config.strategy, seed)
        })
        .collect()
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentStats> {
    let outcomes = run_trials(config)?;
    let trials = outcomes.len() as f64;
    let successes = outcomes.iter().filter(|o| o.eve_success).count();
    let detections = outcomes
        .iter()
        .filter(|o| match config.mode {
            DetectionMode::Omniscient => o.bob_detects,
            DetectionMode::Sampled => o.bob_detects_sampled,
        })
        .count();
    let p = analytic_success_rate(config.channel_count, config.strategy, config.true_case);
    Ok(ExperimentStats {
        channel_count: config.channel_count,
        trials: config.trials,
        mode: config.mode,
        strategy: config.strategy,
        eve_success_rate: successes as f64 / trials,
        detection_rate: detections as f64 / trials,
        analytic_success_rate: p,
        ci95_halfwidth: 1.96 * (p * (1.0 - p) / trials).sqrt(),
        base_seed: config.base_seed,
    })
}
