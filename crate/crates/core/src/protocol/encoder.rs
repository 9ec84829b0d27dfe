use crate::error::{Error, Result};
use crate::qsim::{Gate, MAX_CHANNELS};

fn check_size(channel_count: usize) -> Result<()> {
    if !(3..=MAX_CHANNELS).contains(&channel_count) {
        return Err(Error::UnsupportedSize(channel_count));
    }
    Ok(())
}

/// Alice's gates in temporal order:
/// `H(N-1), CN(N-1,N), H(N-2), CN(N-2,N-1), …, H(2), CN(2,3), CN(1,2), H(1)`.
///
/// The same encoder serves every auxiliary placement.
pub fn alice_encoder(channel_count: usize) -> Result<Vec<Gate>> {
    check_size(channel_count)?;
    let mut gates = Vec::with_capacity(2 * channel_count - 2);
    for k in (2..channel_count).rev() {
        gates.push(Gate::h(k));
        gates.push(Gate::cn(k, k + 1));
    }
    gates.push(Gate::cn(1, 2));
    gates.push(Gate::h(1));
    Ok(gates)
}

/// The five gates every Bob program starts with:
/// `CN(N-1,N), H(N), CN(1,N), H(1), H(N)`.
pub fn bob_prefix(channel_count: usize) -> Result<Vec<Gate>> {
    check_size(channel_count)?;
    let n = channel_count;
    Ok(vec![
        Gate::cn(n - 1, n),
        Gate::h(n),
        Gate::cn(1, n),
        Gate::h(1),
        Gate::h(n),
    ])
}

/// True if `program` can be reordered, exchanging only adjacent commuting
/// gates, so that it starts with `prefix`.
pub fn is_prefix_up_to_commutation(prefix: &[Gate], program: &[Gate]) -> bool {
    let mut rest = program.to_vec();
    for want in prefix {
        let Some(pos) = rest.iter().position(|g| g == want) else {
            return false;
        };
        if !rest[..pos].iter().all(|g| g.commutes_with(want)) {
            return false;
        }
        rest.remove(pos);
    }
    true
}
