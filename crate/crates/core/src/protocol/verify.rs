use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::Serialize;

use super::OutputClaim;
use crate::error::{Error, Result};
use crate::qsim::{
    block_fidelity, channel_fidelity, factor_channel, purity, Amplitude, PureState, SingleQubit,
    NORM_TOL, PURITY_TOL,
};

/// The entangled pair produced from `c|1>+d|0>` and `e|1>+f|0>` by a
/// Hadamard on the first and a controlled-NOT from first to second:
///
/// `|00>: (c+d)f/√2, |01>: (c+d)e/√2, |10>: (d−c)e/√2, |11>: (d−c)f/√2`
pub fn construct_psi(c: Amplitude, d: Amplitude, e: Amplitude, f: Amplitude) -> Result<PureState> {
    for norm_sqr in [c.norm_sqr() + d.norm_sqr(), e.norm_sqr() + f.norm_sqr()] {
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
    }
    let s = (c + d) * FRAC_1_SQRT_2;
    let t = (d - c) * FRAC_1_SQRT_2;
    PureState::from_amplitudes(2, vec![s * f, s * e, t * e, t * f])
}

fn psi_from_messages(messages: &[SingleQubit]) -> Result<PureState> {
    let [m0, m1] = messages else {
        return Err(Error::ShapeMismatch {
            expected: 2,
            found: messages.len(),
        });
    };
    construct_psi(m0.coeff1, m0.coeff0, m1.coeff1, m1.coeff0)
}

/// Result of checking an output state against a claimed output column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    /// Overlap of each channel's reduced state with its claim; channels of an
    /// entangled block carry the block fidelity.
    pub per_channel_fidelity: Vec<f64>,
    /// Every channel claimed as a single-channel state is unentangled.
    pub product_ok: bool,
    pub entangled_block_fidelity: Option<f64>,
    pub passed: bool,
    /// Phase of `<expected|observed>`; unobservable, recorded for reference.
    pub relative_phase: Amplitude,
    pub expected: Vec<Option<SingleQubit>>,
    /// Each channel's own state where it factors out, else `None`.
    pub observed: Vec<Option<SingleQubit>>,
}

impl VerificationReport {
    pub fn min_fidelity(&self) -> f64 {
        self.per_channel_fidelity
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Compares `output` against `claims` (one per channel) for the given
/// message states.
pub fn evaluate_output(
    output: &PureState,
    claims: &[OutputClaim],
    messages: &[SingleQubit],
    tol: f64,
) -> Result<VerificationReport> {
    let n = output.channel_count();
    if claims.len() != n {
        return Err(Error::ShapeMismatch {
            expected: n,
            found: claims.len(),
        });
    }
    let psi_channels: Vec<usize> = {
        let mut found: Vec<(usize, usize)> = claims
            .iter()
            .enumerate()
            .filter_map(|(k, c)| match c {
                OutputClaim::Psi(p) => Some((*p, k + 1)),
                _ => None,
            })
            .collect();
        found.sort_unstable();
        found.into_iter().map(|(_, ch)| ch).collect()
    };
    let psi = match psi_channels.len() {
        0 => None,
        2 => Some(psi_from_messages(messages)?),
        k => {
            return Err(Error::InvalidLayout(format!(
                "an entangled block needs 2 channels, got {k}"
            )))
        }
    };

    let mut expected = Vec::with_capacity(n);
    for claim in claims {
        expected.push(match *claim {
            OutputClaim::Message(i) => Some(*messages.get(i).ok_or(Error::ShapeMismatch {
                expected: i + 1,
                found: messages.len(),
            })?),
            OutputClaim::Residue(q) => Some(q),
            OutputClaim::Psi(_) => None,
        });
    }

    let block_fid = match &psi {
        Some(psi) => Some(block_fidelity(output, &psi_channels, psi)?),
        None => None,
    };

    let mut per_channel_fidelity = Vec::with_capacity(n);
    let mut product_ok = true;
    let mut observed = Vec::with_capacity(n);
    for (k, exp) in expected.iter().enumerate() {
        let ch = k + 1;
        match exp {
            Some(q) => {
                per_channel_fidelity.push(channel_fidelity(output, ch, q)?);
                product_ok &= purity(output, ch)? >= 1.0 - PURITY_TOL;
            }
            None => per_channel_fidelity.push(block_fid.unwrap_or(0.0)),
        }
        observed.push(if n >= 2 {
            factor_channel(output, ch)?.map(|(f, _)| f)
        } else {
            let a = output.amplitudes();
            Some(SingleQubit::normalized(a[0], a[1])?)
        });
    }

    let expected_state = expected_state(&expected, &psi_channels, psi.as_ref())?;
    let overlap = expected_state.inner(output)?;
    let relative_phase = if overlap.norm() > 1e-12 {
        overlap / overlap.norm()
    } else {
        Complex64::new(0.0, 0.0)
    };

    let passed = product_ok && per_channel_fidelity.iter().all(|&f| f >= 1.0 - tol);
    Ok(VerificationReport {
        per_channel_fidelity,
        product_ok,
        entangled_block_fidelity: block_fid,
        passed,
        relative_phase,
        expected,
        observed,
    })
}

/// Full expected output: single-channel claims tensored with the block, the
/// block's channels being adjacent.
fn expected_state(
    expected: &[Option<SingleQubit>],
    psi_channels: &[usize],
    psi: Option<&PureState>,
) -> Result<PureState> {
    let mut state: Option<PureState> = None;
    let mut k = 1;
    while k <= expected.len() {
        let piece = match (expected[k - 1], psi) {
            (Some(q), _) => {
                k += 1;
                q.to_state()
            }
            (None, Some(psi)) => {
                if psi_channels != [k, k + 1] {
                    return Err(Error::InvalidLayout(format!(
                        "entangled block must occupy adjacent channels in order, got {psi_channels:?}"
                    )));
                }
                k += 2;
                psi.clone()
            }
            (None, None) => unreachable!("a missing claim implies a block"),
        };
        state = Some(match state {
            None => piece,
            Some(s) => s.tensor(&piece)?,
        });
    }
    state.ok_or_else(|| Error::InvalidInput("empty claim list".into()))
}
