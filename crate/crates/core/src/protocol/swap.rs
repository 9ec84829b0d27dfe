use crate::error::{Error, Result};
use crate::qsim::Gate;

/// `[CN(a,b), CN(b,a), CN(a,b)]`, which exchanges channels `a` and `b`.
pub fn swap_circuit(ch_a: usize, ch_b: usize) -> Result<Vec<Gate>> {
    if ch_a == ch_b {
        return Err(Error::InvalidGate(format!(
            "swap needs two distinct channels, got {ch_a} twice"
        )));
    }
    if ch_a == 0 || ch_b == 0 {
        return Err(Error::InvalidGate("channels are numbered from 1".into()));
    }
    Ok(vec![
        Gate::cn(ch_a, ch_b),
        Gate::cn(ch_b, ch_a),
        Gate::cn(ch_a, ch_b),
    ])
}

fn all_distinct<T: PartialEq>(items: &[T]) -> bool {
    items
        .iter()
        .enumerate()
        .all(|(i, x)| items[i + 1..].iter().all(|y| x != y))
}

/// Swap triples that move the contents of `current` (entry k sits on channel
/// k+1) into the arrangement `desired`.
///
/// Transpositions are chosen left to right: the first misplaced channel is
/// swapped with the channel currently holding what it should hold.
pub fn post_swap_plan<T: PartialEq>(current: &[T], desired: &[T]) -> Result<Vec<Gate>> {
    if current.len() != desired.len() {
        return Err(Error::InvalidLayout(format!(
            "layouts cover {} and {} channels",
            current.len(),
            desired.len()
        )));
    }
    if !all_distinct(current) || !all_distinct(desired) {
        return Err(Error::InvalidLayout("layout repeats an entry".into()));
    }
    if !desired.iter().all(|d| current.contains(d)) {
        return Err(Error::InvalidLayout(
            "layouts are not permutations of each other".into(),
        ));
    }

    let mut order: Vec<usize> = (0..current.len()).collect();
    let mut gates = Vec::new();
    for p in 0..order.len() {
        if current[order[p]] == desired[p] {
            continue;
        }
        let q = (p + 1..order.len())
            .find(|&q| current[order[q]] == desired[p])
            .expect("bijection checked above");
        gates.extend(swap_circuit(p + 1, q + 1)?);
        order.swap(p, q);
    }
    Ok(gates)
}
