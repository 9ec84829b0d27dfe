//! Bounded synthesis of Bob programs: iterative-deepening search over gate
//! suffixes appended to the fixed five-gate prefix.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::ops::RangeInclusive;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::encoder::{alice_encoder, bob_prefix};
use super::{input_factors, placement, AuxValue, InputRole, OutputClaim};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::qsim::{apply_gate_raw, factor_all, make_state, Gate, PureState, SingleQubit, PURITY_TOL};

/// Default bound on the number of gates searched after the prefix.
pub const DEFAULT_MAX_GATES: usize = 10;
/// Largest accepted bound.
pub const MAX_SEARCH_GATES: usize = 14;
const SEARCH_CHANNELS: RangeInclusive<usize> = 3..=6;

const MATCH_TOL: f64 = 1e-9;
const PHASE_TOL: f64 = 1e-9;
const CONFIRM_RANDOM: usize = 20;
const PROBE_SEED: u64 = 0x1D7A_9027;
const CONFIRM_SEED: u64 = 0x5EA2_C4B1;
const ACTION_SEED: u64 = 0xAC71_0E0A;
const FINGERPRINT_SCALE: f64 = (1u64 << 32) as f64;
const SEEN_CAPACITY: usize = 1 << 24;

/// What a searched program has to achieve besides decoding every message.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum SearchGoal {
    /// Any output arrangement of messages and residue.
    #[default]
    AnyLayout,
    /// Exactly this output column (residues compared up to phase).
    Layout(Vec<OutputClaim>),
}

/// A decoder found by the search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BobProgram {
    pub channel_count: usize,
    pub aux_channel: usize,
    pub aux_value: AuxValue,
    /// Full Bob segment, prefix included.
    pub gates: Vec<Gate>,
    /// Output column produced by the program.
    pub layout: Vec<OutputClaim>,
}

impl BobProgram {
    pub fn suffix(&self) -> &[Gate] {
        &self.gates[5..]
    }

    pub fn input_roles(&self) -> Vec<InputRole> {
        placement(self.channel_count, self.aux_channel, self.aux_value)
    }

    /// Alice's encoder followed by this program.
    pub fn circuit(&self) -> Result<Circuit> {
        Circuit::split(self.channel_count, &alice_encoder(self.channel_count)?, &self.gates)
    }
}

/// Shortest decoder (then lowest in gate order) for the given input
/// placement, with at most `max_gates` gates after the prefix.
pub fn solve_bob_program(
    channel_count: usize,
    aux_channel: usize,
    aux_value: AuxValue,
    max_gates: usize,
) -> Result<Option<BobProgram>> {
    solve_bob_program_with(channel_count, aux_channel, aux_value, max_gates, &SearchGoal::AnyLayout)
}

pub fn solve_bob_program_with(
    channel_count: usize,
    aux_channel: usize,
    aux_value: AuxValue,
    max_gates: usize,
    goal: &SearchGoal,
) -> Result<Option<BobProgram>> {
    if !SEARCH_CHANNELS.contains(&channel_count) {
        return Err(Error::UnsupportedSize(channel_count));
    }
    if aux_channel == 0 || aux_channel > channel_count {
        return Err(Error::ChannelOutOfRange {
            channel: aux_channel,
            channel_count,
        });
    }
    if max_gates > MAX_SEARCH_GATES {
        return Err(Error::InvalidInput(format!(
            "max_gates {max_gates} exceeds {MAX_SEARCH_GATES}"
        )));
    }
    if let SearchGoal::Layout(layout) = goal {
        if layout.len() != channel_count {
            return Err(Error::ShapeMismatch {
                expected: channel_count,
                found: layout.len(),
            });
        }
    }
    let search = Search::new(channel_count, aux_channel, aux_value, goal)?;
    for depth in 0..=max_gates {
        if let Some((suffix, layout)) = search.run(depth)? {
            let mut gates = search.prefix.clone();
            gates.extend(suffix);
            return Ok(Some(BobProgram {
                channel_count,
                aux_channel,
                aux_value,
                gates,
                layout,
            }));
        }
    }
    Ok(None)
}

struct Search<'g> {
    n: usize,
    dim: usize,
    roles: Vec<InputRole>,
    goal: &'g SearchGoal,
    prefix: Vec<Gate>,
    /// Alice's encoder followed by the prefix.
    head: Vec<Gate>,
    alphabet: Vec<Gate>,
    /// `commutes[i][j]` for alphabet indices.
    commutes: Vec<Vec<bool>>,
    /// Index of the last prefix gate in the alphabet.
    prefix_last: usize,
    probe_messages: Vec<Vec<SingleQubit>>,
    /// Probe states after `head`, concatenated.
    probe_start: Vec<Complex64>,
}

impl<'g> Search<'g> {
    fn new(n: usize, aux_channel: usize, aux_value: AuxValue, goal: &'g SearchGoal) -> Result<Self> {
        let roles = placement(n, aux_channel, aux_value);
        let prefix = bob_prefix(n)?;
        let mut head = alice_encoder(n)?;
        head.extend(&prefix);

        let mut alphabet: Vec<Gate> = (1..=n).map(Gate::h).collect();
        for c in 1..=n {
            alphabet.extend((1..=n).filter(|&t| t != c).map(|t| Gate::cn(c, t)));
        }
        alphabet.sort();
        let commutes = alphabet
            .iter()
            .map(|a| alphabet.iter().map(|b| a.commutes_with(b)).collect())
            .collect();
        let prefix_last = alphabet
            .iter()
            .position(|g| Some(g) == prefix.last())
            .expect("prefix gates are in the alphabet");

        let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
        let probe_messages: Vec<Vec<SingleQubit>> = (0..2)
            .map(|_| (0..n - 1).map(|_| SingleQubit::random(&mut rng)).collect())
            .collect();
        let mut probe_start = Vec::with_capacity(2 << n);
        for messages in &probe_messages {
            let input = make_state(&input_factors(&roles, messages)?)?;
            probe_start.extend(input.apply_all(&head)?.into_amplitudes());
        }

        Ok(Search {
            n,
            dim: 1 << n,
            roles,
            goal,
            prefix,
            head,
            alphabet,
            commutes,
            prefix_last,
            probe_messages,
            probe_start,
        })
    }

    /// Suffixes of exactly `depth` gates, in lexicographic alphabet order.
    fn run(&self, depth: usize) -> Result<Option<(Vec<Gate>, Vec<OutputClaim>)>> {
        let mut walk = Walk {
            levels: vec![self.probe_start.clone(); depth + 1],
            path: Vec::with_capacity(depth),
            seen: HashMap::new(),
            depth,
        };
        self.dfs(&mut walk)
    }

    fn dfs(&self, walk: &mut Walk) -> Result<Option<(Vec<Gate>, Vec<OutputClaim>)>> {
        let level = walk.path.len();
        let here = &walk.levels[level];
        if level == walk.depth {
            return self.accept(here, &walk.path);
        }
        // H leaves every channel's purity unchanged and CN touches two
        // channels, so each remaining gate can disentangle at most two.
        let impure = (1..=self.n)
            .filter(|&ch| raw_purity(&here[..self.dim], self.n, ch) < 1.0 - PURITY_TOL)
            .count();
        if impure > 2 * (walk.depth - level) {
            return Ok(None);
        }
        if level > 0 {
            // Only the action on the probes matters; a state already expanded
            // at this level or a shallower one has nothing new to offer.
            let key = fingerprint(here);
            match walk.seen.get(&key) {
                Some(&l) if l <= level => return Ok(None),
                _ if walk.seen.len() < SEEN_CAPACITY => {
                    walk.seen.insert(key, level);
                }
                _ => {}
            }
        }
        let prev = walk.path.last().copied();
        for gi in 0..self.alphabet.len() {
            match prev {
                None if gi == self.prefix_last => continue,
                Some(p) if gi == p || (self.commutes[gi][p] && gi < p) => continue,
                _ => {}
            }
            let (done, rest) = walk.levels.split_at_mut(level + 1);
            let next = &mut rest[0];
            next.copy_from_slice(&done[level]);
            for chunk in next.chunks_exact_mut(self.dim) {
                apply_gate_raw(chunk, self.n, self.alphabet[gi]);
            }
            walk.path.push(gi);
            let found = self.dfs(walk)?;
            walk.path.pop();
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }

    fn accept(&self, amps: &[Complex64], path: &[usize]) -> Result<Option<(Vec<Gate>, Vec<OutputClaim>)>> {
        for chunk in amps.chunks_exact(self.dim) {
            if !(1..=self.n).all(|ch| raw_purity(chunk, self.n, ch) >= 1.0 - PURITY_TOL) {
                return Ok(None);
            }
        }
        let Some(layout) = self.discover_layout(&amps[..self.dim], &self.probe_messages[0])? else {
            return Ok(None);
        };
        if let SearchGoal::Layout(want) = self.goal {
            if !want.iter().zip(&layout).all(|(w, l)| w.matches(l, MATCH_TOL)) {
                return Ok(None);
            }
        }
        let suffix: Vec<Gate> = path.iter().map(|&i| self.alphabet[i]).collect();
        let mut program = self.head.clone();
        program.extend(&suffix);
        if confirm_layout(self.n, &self.roles, &program, &layout)? {
            Ok(Some((suffix, layout)))
        } else {
            Ok(None)
        }
    }

    fn discover_layout(&self, amps: &[Complex64], messages: &[SingleQubit]) -> Result<Option<Vec<OutputClaim>>> {
        let state = PureState::from_amplitudes(self.n, amps.to_vec())?;
        let Some(factors) = factor_all(&state) else {
            return Ok(None);
        };
        let mut used = vec![false; messages.len()];
        let mut layout = Vec::with_capacity(self.n);
        let mut residues = 0;
        for f in factors {
            match messages.iter().position(|m| f.fidelity(m) >= 1.0 - MATCH_TOL) {
                Some(i) if !used[i] => {
                    used[i] = true;
                    layout.push(OutputClaim::Message(i));
                }
                Some(_) => return Ok(None),
                None => {
                    residues += 1;
                    layout.push(OutputClaim::Residue(f));
                }
            }
        }
        Ok((residues == 1).then_some(layout))
    }
}

/// Mutable state of one depth-bounded pass.
struct Walk {
    levels: Vec<Vec<Complex64>>,
    path: Vec<usize>,
    /// Probe fingerprint to the shallowest level it was expanded at.
    seen: HashMap<u64, usize>,
    depth: usize,
}

fn fingerprint(amps: &[Complex64]) -> u64 {
    let mut h = DefaultHasher::new();
    for a in amps {
        ((a.re * FINGERPRINT_SCALE).round() as i64).hash(&mut h);
        ((a.im * FINGERPRINT_SCALE).round() as i64).hash(&mut h);
    }
    h.finish()
}

fn raw_purity(amps: &[Complex64], n: usize, channel: usize) -> f64 {
    let bit = 1usize << (n - channel);
    let (mut r00, mut r11, mut r01) = (0.0, 0.0, Complex64::default());
    for i in (0..amps.len()).filter(|i| i & bit == 0) {
        let (a0, a1) = (amps[i], amps[i | bit]);
        r00 += a0.norm_sqr();
        r11 += a1.norm_sqr();
        r01 += a0 * a1.conj();
    }
    r00 * r00 + r11 * r11 + 2.0 * r01.norm_sqr()
}

fn expected_output(layout: &[OutputClaim], messages: &[SingleQubit]) -> Result<PureState> {
    let factors = layout
        .iter()
        .map(|claim| match *claim {
            OutputClaim::Message(i) => messages.get(i).copied().ok_or(Error::ShapeMismatch {
                expected: i + 1,
                found: messages.len(),
            }),
            OutputClaim::Residue(q) => Ok(q),
            OutputClaim::Psi(_) => Err(Error::InvalidLayout(
                "entangled blocks are not a search target".into(),
            )),
        })
        .collect::<Result<Vec<_>>>()?;
    make_state(&factors)
}

/// Tracks `<expected|observed>` across inputs: each must have unit modulus
/// and all must agree, so the two maps are equal up to one global phase.
struct PhaseCheck {
    reference: Option<Complex64>,
}

impl PhaseCheck {
    fn new() -> Self {
        PhaseCheck { reference: None }
    }

    fn accept(&mut self, overlap: Complex64) -> bool {
        if (overlap.norm() - 1.0).abs() > PHASE_TOL {
            return false;
        }
        match self.reference {
            None => {
                self.reference = Some(overlap);
                true
            }
            Some(r) => (overlap - r).norm() <= PHASE_TOL,
        }
    }
}

/// Every message channel ranges over `{|0>, |1>, |+>, |+i>}`.
fn spanning_tuples(message_count: usize) -> impl Iterator<Item = Vec<SingleQubit>> {
    let basis = [
        SingleQubit::zero(),
        SingleQubit::one(),
        SingleQubit::plus(),
        SingleQubit::plus_i(),
    ];
    (0..4usize.pow(message_count as u32)).map(move |mut code| {
        (0..message_count)
            .map(|_| {
                let q = basis[code % 4];
                code /= 4;
                q
            })
            .collect()
    })
}

/// Checks that `gates` maps the placed inputs onto `layout` for a spanning
/// set of message tuples (linearity extends this to all inputs) and for
/// random tuples, with one consistent global phase.
pub(crate) fn confirm_layout(n: usize, roles: &[InputRole], gates: &[Gate], layout: &[OutputClaim]) -> Result<bool> {
    let message_count = n - 1;
    let mut phase = PhaseCheck::new();
    let mut rng = ChaCha8Rng::seed_from_u64(CONFIRM_SEED);
    let random = (0..CONFIRM_RANDOM)
        .map(|_| (0..message_count).map(|_| SingleQubit::random(&mut rng)).collect::<Vec<_>>())
        .collect::<Vec<_>>();
    for messages in spanning_tuples(message_count).chain(random) {
        let out = make_state(&input_factors(roles, &messages)?)?.apply_all(gates)?;
        let overlap = expected_output(layout, &messages)?.inner(&out)?;
        if !phase.accept(overlap) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> Result<PureState> {
    let amps = (0..1usize << n)
        .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    PureState::normalized(n, amps)
}

fn same_action<'a>(
    c1: &Circuit,
    c2: &Circuit,
    inputs: impl Iterator<Item = Result<PureState>> + 'a,
) -> Result<bool> {
    let mut phase = PhaseCheck::new();
    for input in inputs {
        let input = input?;
        let o1 = input.apply_all(c1.gates())?;
        let o2 = input.apply_all(c2.gates())?;
        if !phase.accept(o1.inner(&o2)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn check_shapes(c1: &Circuit, c2: &Circuit) -> Result<usize> {
    if c1.channel_count() != c2.channel_count() {
        return Err(Error::ShapeMismatch {
            expected: c1.channel_count(),
            found: c2.channel_count(),
        });
    }
    Ok(c1.channel_count())
}

/// True iff both circuits (all gates, border ignored) have the same unitary
/// up to global phase: compared on every basis state and one random state.
pub fn verify_circuit_action_equal(c1: &Circuit, c2: &Circuit) -> Result<bool> {
    let n = check_shapes(c1, c2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ACTION_SEED);
    let random = random_state(n, &mut rng);
    let inputs = (0..1usize << n)
        .map(move |i| PureState::basis(n, i))
        .chain(std::iter::once(random));
    same_action(c1, c2, inputs)
}

/// Like [`verify_circuit_action_equal`] but only over inputs whose
/// auxiliary channel holds `aux_value`: the equivalence that matters to the
/// protocol.
pub fn verify_protocol_action_equal(
    c1: &Circuit,
    c2: &Circuit,
    aux_channel: usize,
    aux_value: AuxValue,
) -> Result<bool> {
    let n = check_shapes(c1, c2)?;
    if aux_channel == 0 || aux_channel > n {
        return Err(Error::ChannelOutOfRange {
            channel: aux_channel,
            channel_count: n,
        });
    }
    let roles = placement(n, aux_channel, aux_value);
    let mut rng = ChaCha8Rng::seed_from_u64(ACTION_SEED);
    let random: Vec<SingleQubit> = (0..n - 1).map(|_| SingleQubit::random(&mut rng)).collect();
    let basis_tuples = (0..1usize << (n - 1)).map(move |code| {
        (0..n - 1)
            .map(|k| {
                if code >> (n - 2 - k) & 1 == 1 {
                    SingleQubit::one()
                } else {
                    SingleQubit::zero()
                }
            })
            .collect::<Vec<_>>()
    });
    let inputs = basis_tuples
        .chain(std::iter::once(random))
        .map(move |m| make_state(&input_factors(&roles, &m)?));
    same_action(c1, c2, inputs)
}
