use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::gate::{apply_gate_raw, Gate};
use crate::error::{Error, Result};

pub type Amplitude = Complex64;

/// Normalization slack accepted on constructed inputs.
pub const NORM_TOL: f64 = 1e-9;

/// Largest register the dense simulator will allocate.
pub const MAX_CHANNELS: usize = 16;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// A normalized single-channel state `coeff0|0> + coeff1|1>`.
///
/// States written as `a|1> + b|0>` map to `coeff1 = a`, `coeff0 = b`; use
/// [`SingleQubit::one_zero`] to build them in that order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleQubit {
    pub coeff0: Amplitude,
    pub coeff1: Amplitude,
}

impl SingleQubit {
    pub fn new(coeff0: Amplitude, coeff1: Amplitude) -> Result<Self> {
        if !(coeff0.is_finite() && coeff1.is_finite()) {
            return Err(Error::InvalidInput("non-finite amplitude".into()));
        }
        let norm_sqr = coeff0.norm_sqr() + coeff1.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(SingleQubit { coeff0, coeff1 })
    }

    /// `a|1> + b|0>`, the order the figures label their inputs in.
    pub fn one_zero(a: Amplitude, b: Amplitude) -> Result<Self> {
        Self::new(b, a)
    }

    /// Rescales `coeff0|0> + coeff1|1>` to unit norm.
    pub fn normalized(coeff0: Amplitude, coeff1: Amplitude) -> Result<Self> {
        let norm = (coeff0.norm_sqr() + coeff1.norm_sqr()).sqrt();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::InvalidInput(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        Ok(SingleQubit {
            coeff0: coeff0 / norm,
            coeff1: coeff1 / norm,
        })
    }

    pub fn zero() -> Self {
        SingleQubit {
            coeff0: c(1.0),
            coeff1: c(0.0),
        }
    }

    pub fn one() -> Self {
        SingleQubit {
            coeff0: c(0.0),
            coeff1: c(1.0),
        }
    }

    /// (|0> + |1>)/√2
    pub fn plus() -> Self {
        SingleQubit {
            coeff0: c(FRAC_1_SQRT_2),
            coeff1: c(FRAC_1_SQRT_2),
        }
    }

    /// (|0> − |1>)/√2
    pub fn minus() -> Self {
        SingleQubit {
            coeff0: c(FRAC_1_SQRT_2),
            coeff1: c(-FRAC_1_SQRT_2),
        }
    }

    /// (|0> + i|1>)/√2
    pub fn plus_i() -> Self {
        SingleQubit {
            coeff0: c(FRAC_1_SQRT_2),
            coeff1: Complex64::new(0.0, FRAC_1_SQRT_2),
        }
    }

    /// Haar-random state: a normalized complex Gaussian 2-vector.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let mut g = || rng.sample::<f64, _>(StandardNormal);
            let c0 = Complex64::new(g(), g());
            let c1 = Complex64::new(g(), g());
            if let Ok(q) = Self::normalized(c0, c1) {
                return q;
            }
        }
    }

    pub fn amplitudes(&self) -> [Amplitude; 2] {
        [self.coeff0, self.coeff1]
    }

    /// `<self|other>`
    pub fn inner(&self, other: &SingleQubit) -> Complex64 {
        self.coeff0.conj() * other.coeff0 + self.coeff1.conj() * other.coeff1
    }

    pub fn fidelity(&self, other: &SingleQubit) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// The state orthogonal to this one (fixed up to phase).
    pub fn orthogonal(&self) -> SingleQubit {
        SingleQubit {
            coeff0: -self.coeff1.conj(),
            coeff1: self.coeff0.conj(),
        }
    }

    pub fn to_state(&self) -> PureState {
        PureState {
            channel_count: 1,
            amplitudes: vec![self.coeff0, self.coeff1],
        }
    }
}

/// A normalized pure state of `channel_count` channels.
///
/// Channel 1 is the most significant bit of the basis index, so the label
/// `|b1 b2 … bN>` reads left to right as a binary number.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    channel_count: usize,
    amplitudes: Vec<Amplitude>,
}

impl PureState {
    pub fn from_amplitudes(channel_count: usize, amplitudes: Vec<Amplitude>) -> Result<Self> {
        check_channel_count(channel_count)?;
        if amplitudes.len() != 1 << channel_count {
            return Err(Error::ShapeMismatch {
                expected: 1 << channel_count,
                found: amplitudes.len(),
            });
        }
        if amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidInput("non-finite amplitude".into()));
        }
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(PureState {
            channel_count,
            amplitudes,
        })
    }

    /// Like [`PureState::from_amplitudes`] but rescales to unit norm first.
    pub fn normalized(channel_count: usize, mut amplitudes: Vec<Amplitude>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::InvalidInput(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self::from_amplitudes(channel_count, amplitudes)
    }

    /// Computational basis state with the given index.
    pub fn basis(channel_count: usize, index: usize) -> Result<Self> {
        check_channel_count(channel_count)?;
        if index >= 1 << channel_count {
            return Err(Error::InvalidInput(format!(
                "basis index {index} needs more than {channel_count} channels"
            )));
        }
        let mut amplitudes = vec![Complex64::default(); 1 << channel_count];
        amplitudes[index] = c(1.0);
        Ok(PureState {
            channel_count,
            amplitudes,
        })
    }

    /// Basis state from a bit label such as `"101"` (channel 1 first).
    pub fn from_label(label: &str) -> Result<Self> {
        let n = label.len();
        let index = usize::from_str_radix(label, 2)
            .map_err(|_| Error::InvalidInput(format!("bad basis label {label:?}")))?;
        Self::basis(n, index)
    }

    pub fn channel_count(&self) -> usize {
        self.channel_count
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Amplitude> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub(crate) fn bit(&self, channel: usize) -> usize {
        1 << (self.channel_count - channel)
    }

    pub(crate) fn check_channel(&self, channel: usize) -> Result<()> {
        if channel == 0 || channel > self.channel_count {
            return Err(Error::ChannelOutOfRange {
                channel,
                channel_count: self.channel_count,
            });
        }
        Ok(())
    }

    pub fn apply(&self, gate: Gate) -> Result<PureState> {
        gate.validate(self.channel_count)?;
        let mut out = self.clone();
        apply_gate_raw(&mut out.amplitudes, self.channel_count, gate);
        Ok(out)
    }

    pub fn apply_all(&self, gates: &[Gate]) -> Result<PureState> {
        for g in gates {
            g.validate(self.channel_count)?;
        }
        let mut out = self.clone();
        for &g in gates {
            apply_gate_raw(&mut out.amplitudes, self.channel_count, g);
        }
        Ok(out)
    }

    /// `<self|other>`
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.channel_count != other.channel_count {
            return Err(Error::ShapeMismatch {
                expected: self.channel_count,
                found: other.channel_count,
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Tensor product with `other` appended as the higher-numbered channels.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let n = self.channel_count + other.channel_count;
        check_channel_count(n)?;
        let mut amplitudes = Vec::with_capacity(1 << n);
        for a in &self.amplitudes {
            amplitudes.extend(other.amplitudes.iter().map(|b| a * b));
        }
        Ok(PureState {
            channel_count: n,
            amplitudes,
        })
    }

    /// Relabels channels: input channel `k` becomes output channel
    /// `destination[k - 1]`. `destination` must be a permutation of `1..=N`.
    pub fn permute_channels(&self, destination: &[usize]) -> Result<PureState> {
        let n = self.channel_count;
        check_permutation(destination, n)?;
        let mut amplitudes = vec![Complex64::default(); self.amplitudes.len()];
        for (index, amp) in self.amplitudes.iter().enumerate() {
            let mut moved = 0usize;
            for (k, &dest) in destination.iter().enumerate() {
                if index & (1 << (n - 1 - k)) != 0 {
                    moved |= 1 << (n - dest);
                }
            }
            amplitudes[moved] = *amp;
        }
        Ok(PureState {
            channel_count: n,
            amplitudes,
        })
    }

    /// Multiplies every amplitude by `phase` (expected to have modulus 1).
    pub fn with_global_phase(&self, phase: Complex64) -> PureState {
        PureState {
            channel_count: self.channel_count,
            amplitudes: self.amplitudes.iter().map(|a| a * phase).collect(),
        }
    }
}

pub(crate) fn check_channel_count(channel_count: usize) -> Result<()> {
    if channel_count == 0 || channel_count > MAX_CHANNELS {
        return Err(Error::UnsupportedSize(channel_count));
    }
    Ok(())
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::InvalidLayout(format!(
            "expected {n} entries, got {}",
            perm.len()
        )));
    }
    let mut seen = vec![false; n + 1];
    for &p in perm {
        if p == 0 || p > n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidLayout(format!(
                "{perm:?} is not a permutation of 1..={n}"
            )));
        }
    }
    Ok(())
}

/// Tensor product of single-channel factors, channel `k` taken from
/// `factors[k - 1]`.
pub fn make_state(factors: &[SingleQubit]) -> Result<PureState> {
    if factors.is_empty() {
        return Err(Error::InvalidInput("no factors given".into()));
    }
    check_channel_count(factors.len())?;
    let mut amplitudes = vec![c(1.0)];
    for f in factors {
        // Re-validate: the fields are public.
        SingleQubit::new(f.coeff0, f.coeff1)?;
        amplitudes = amplitudes
            .iter()
            .flat_map(|a| [a * f.coeff0, a * f.coeff1])
            .collect();
    }
    Ok(PureState {
        channel_count: factors.len(),
        amplitudes,
    })
}

pub fn apply_gate(state: &PureState, gate: Gate) -> Result<PureState> {
    state.apply(gate)
}

/// `|<s1|s2>|²`
pub fn fidelity(s1: &PureState, s2: &PureState) -> Result<f64> {
    Ok(s1.inner(s2)?.norm_sqr())
}

pub fn equal_up_to_global_phase(s1: &PureState, s2: &PureState, tol: f64) -> Result<bool> {
    Ok(fidelity(s1, s2)? >= 1.0 - tol)
}
