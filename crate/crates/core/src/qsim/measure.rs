//! Single-channel measurement, reduced densities and product factorization.

use num_complex::Complex64;

use super::state::{PureState, SingleQubit};
use crate::error::{Error, Result};

/// Branches with probability below this are reported as impossible.
pub const IMPOSSIBLE_BRANCH: f64 = 1e-12;

/// Reduced purity at or above `1 - PURITY_TOL` counts as unentangled.
pub const PURITY_TOL: f64 = 1e-10;

/// 2×2 reduced density matrix `rho[a][b]` of one channel.
pub type Density2 = [[Complex64; 2]; 2];

/// Projects `channel` onto `|outcome>`, returning the branch probability and
/// the renormalized post-measurement state.
pub fn project(state: &PureState, channel: usize, outcome: u8) -> Result<(f64, PureState)> {
    state.check_channel(channel)?;
    if outcome > 1 {
        return Err(Error::InvalidInput(format!("outcome {outcome} is not 0 or 1")));
    }
    let bit = state.bit(channel);
    let keep = |i: usize| (i & bit != 0) == (outcome == 1);
    let probability: f64 = state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| keep(*i))
        .map(|(_, a)| a.norm_sqr())
        .sum();
    if probability < IMPOSSIBLE_BRANCH {
        return Err(Error::ImpossibleBranch { probability });
    }
    let scale = probability.sqrt().recip();
    let amplitudes = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, a)| if keep(i) { a * scale } else { Complex64::default() })
        .collect();
    let collapsed = PureState::normalized(state.channel_count(), amplitudes)?;
    Ok((probability, collapsed))
}

pub fn reduced_density(state: &PureState, channel: usize) -> Result<Density2> {
    state.check_channel(channel)?;
    let bit = state.bit(channel);
    let amps = state.amplitudes();
    let mut rho = [[Complex64::default(); 2]; 2];
    for i in (0..amps.len()).filter(|i| i & bit == 0) {
        let (a0, a1) = (amps[i], amps[i | bit]);
        rho[0][0] += a0 * a0.conj();
        rho[0][1] += a0 * a1.conj();
        rho[1][0] += a1 * a0.conj();
        rho[1][1] += a1 * a1.conj();
    }
    Ok(rho)
}

/// `tr(rho²)` of one channel; 1 for an unentangled channel, 1/2 at minimum.
pub fn purity(state: &PureState, channel: usize) -> Result<f64> {
    let rho = reduced_density(state, channel)?;
    Ok(rho[0][0].norm_sqr() + rho[1][1].norm_sqr() + 2.0 * rho[0][1].norm_sqr())
}

/// `<q|rho|q>` for the reduced state of `channel`; equals the fidelity to `q`
/// when the channel is unentangled.
pub fn channel_fidelity(state: &PureState, channel: usize, q: &SingleQubit) -> Result<f64> {
    let rho = reduced_density(state, channel)?;
    let v = q.amplitudes();
    let mut acc = Complex64::default();
    for a in 0..2 {
        for b in 0..2 {
            acc += v[a].conj() * rho[a][b] * v[b];
        }
    }
    Ok(acc.re)
}

/// `<t|rho|t>` where `rho` is the reduced state of `channels` (in the order
/// given) and `target` is a state on that many channels.
pub fn block_fidelity(state: &PureState, channels: &[usize], target: &PureState) -> Result<f64> {
    if target.channel_count() != channels.len() {
        return Err(Error::ShapeMismatch {
            expected: channels.len(),
            found: target.channel_count(),
        });
    }
    let mut mask = 0usize;
    for &ch in channels {
        state.check_channel(ch)?;
        if mask & state.bit(ch) != 0 {
            return Err(Error::InvalidInput(format!("channel {ch} listed twice")));
        }
        mask |= state.bit(ch);
    }
    let m = channels.len();
    let t = target.amplitudes();
    let mut acc = vec![Complex64::default(); state.amplitudes().len()];
    for (i, a) in state.amplitudes().iter().enumerate() {
        let x = channels
            .iter()
            .enumerate()
            .filter(|(_, &ch)| i & state.bit(ch) != 0)
            .fold(0usize, |x, (j, _)| x | 1 << (m - 1 - j));
        acc[i & !mask] += t[x].conj() * a;
    }
    Ok(acc.iter().map(|a| a.norm_sqr()).sum())
}

/// Removes the bit for `bit` from `index`, closing the gap.
fn squeeze(index: usize, bit: usize) -> usize {
    let low = index & (bit - 1);
    let high = (index >> 1) & !(bit - 1);
    high | low
}

/// Splits `channel` off as a pure factor when it is unentangled from the
/// rest; the remainder keeps the other channels in their original order.
///
/// The factor's largest coefficient is made real and positive, so any
/// global phase ends up on the remainder.
pub fn factor_channel(state: &PureState, channel: usize) -> Result<Option<(SingleQubit, PureState)>> {
    state.check_channel(channel)?;
    let n = state.channel_count();
    if n < 2 {
        return Err(Error::InvalidInput(
            "factoring needs at least two channels".into(),
        ));
    }
    if purity(state, channel)? < 1.0 - PURITY_TOL {
        return Ok(None);
    }
    let bit = state.bit(channel);
    let half = 1usize << (n - 1);
    let mut rows = [vec![Complex64::default(); half], vec![Complex64::default(); half]];
    for (i, a) in state.amplitudes().iter().enumerate() {
        let r = usize::from(i & bit != 0);
        rows[r][squeeze(i, bit)] = *a;
    }
    let row_norm = |r: &Vec<Complex64>| r.iter().map(|a| a.norm_sqr()).sum::<f64>();
    let pick = if row_norm(&rows[0]) >= row_norm(&rows[1]) { 0 } else { 1 };
    let w_norm = row_norm(&rows[pick]).sqrt();
    let w: Vec<Complex64> = rows[pick].iter().map(|a| a / w_norm).collect();
    let mut v = [Complex64::default(); 2];
    for (r, row) in rows.iter().enumerate() {
        v[r] = w.iter().zip(row).map(|(wj, mj)| wj.conj() * mj).sum();
    }
    let phase = lead_phase(v[0], v[1]);
    let factor = SingleQubit::normalized(v[0] / phase, v[1] / phase)?;
    let remainder = PureState::normalized(n - 1, w.iter().map(|a| a * phase).collect())?;
    Ok(Some((factor, remainder)))
}

/// Unit phase of the larger of two coefficients (the first on a tie).
fn lead_phase(c0: Complex64, c1: Complex64) -> Complex64 {
    let lead = if c0.norm() >= c1.norm() { c0 } else { c1 };
    lead / lead.norm()
}

/// Full product decomposition, or `None` if any split fails. Every factor
/// has its largest coefficient real and positive.
pub fn factor_all(state: &PureState) -> Option<Vec<SingleQubit>> {
    let mut factors = Vec::with_capacity(state.channel_count());
    let mut rest = state.clone();
    while rest.channel_count() > 1 {
        let (f, r) = factor_channel(&rest, 1).ok()??;
        factors.push(f);
        rest = r;
    }
    let a = rest.amplitudes();
    let phase = lead_phase(a[0], a[1]);
    factors.push(SingleQubit::normalized(a[0] / phase, a[1] / phase).ok()?);
    Some(factors)
}
