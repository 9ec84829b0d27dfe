//! Decoders for every input placement at small sizes, bundled as data and
//! backed by the search for anything not bundled.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::Deserialize;

use super::encoder::bob_prefix;
use super::search::{solve_bob_program, BobProgram, DEFAULT_MAX_GATES};
use super::AuxValue;
use crate::error::{Error, Result};

const DECODERS: &str = include_str!("../../circuits/decoders.json");
const DECODERS_VERSION: u32 = 1;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DecoderFile {
    version: u32,
    programs: Vec<BobProgram>,
}

fn check_program(p: &BobProgram) -> Result<()> {
    let prefix = bob_prefix(p.channel_count)?;
    if !p.gates.starts_with(&prefix) {
        return Err(Error::Manifest(format!(
            "bundled decoder for {} channels, aux {} on {} lacks the prefix",
            p.channel_count, p.aux_value, p.aux_channel
        )));
    }
    for g in &p.gates {
        g.validate(p.channel_count)?;
    }
    if p.layout.len() != p.channel_count {
        return Err(Error::Manifest("bundled decoder layout has the wrong length".into()));
    }
    Ok(())
}

/// Every bundled decoder, in file order.
pub fn bundled_decoders() -> Result<&'static [BobProgram]> {
    static CACHE: OnceLock<Result<Vec<BobProgram>>> = OnceLock::new();
    CACHE
        .get_or_init(|| {
            let file: DecoderFile =
                serde_json::from_str(DECODERS).map_err(|e| Error::Manifest(e.to_string()))?;
            if file.version != DECODERS_VERSION {
                return Err(Error::Manifest(format!(
                    "unsupported decoder table version {}",
                    file.version
                )));
            }
            file.programs.iter().try_for_each(check_program)?;
            Ok(file.programs)
        })
        .as_ref()
        .map(Vec::as_slice)
        .map_err(Clone::clone)
}

pub fn bundled_decoder(channel_count: usize, aux_channel: usize, aux_value: AuxValue) -> Result<Option<&'static BobProgram>> {
    Ok(bundled_decoders()?.iter().find(|p| {
        p.channel_count == channel_count && p.aux_channel == aux_channel && p.aux_value == aux_value
    }))
}

/// The decoder for a placement: bundled if available, otherwise searched
/// with the default bound and remembered.
pub fn decoder(channel_count: usize, aux_channel: usize, aux_value: AuxValue) -> Result<BobProgram> {
    if let Some(p) = bundled_decoder(channel_count, aux_channel, aux_value)? {
        return Ok(p.clone());
    }
    type Key = (usize, usize, AuxValue);
    static SEARCHED: OnceLock<Mutex<HashMap<Key, BobProgram>>> = OnceLock::new();
    let key = (channel_count, aux_channel, aux_value);
    let cache = SEARCHED.get_or_init(Default::default);
    if let Some(p) = cache.lock().expect("decoder cache poisoned").get(&key) {
        return Ok(p.clone());
    }
    let program = solve_bob_program(channel_count, aux_channel, aux_value, DEFAULT_MAX_GATES)?
        .ok_or_else(|| Error::NoDecoder {
            channel_count,
            aux_channel,
            aux_value: aux_value.to_string(),
            max_gates: DEFAULT_MAX_GATES,
        })?;
    cache
        .lock()
        .expect("decoder cache poisoned")
        .insert(key, program.clone());
    Ok(program)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_covers_three_to_five_channels() {
        let all = bundled_decoders().unwrap();
        assert_eq!(all.len(), 3 * (3 + 4 + 5));
        for n in 3..=5 {
            for ch in 1..=n {
                for v in AuxValue::ALL {
                    assert!(bundled_decoder(n, ch, v).unwrap().is_some(), "{n} {ch} {v}");
                }
            }
        }
    }

    #[test]
    fn bundled_small_entries_match_search() {
        for p in bundled_decoders().unwrap().iter().filter(|p| p.channel_count == 3) {
            let found = solve_bob_program(3, p.aux_channel, p.aux_value, DEFAULT_MAX_GATES)
                .unwrap()
                .unwrap();
            assert_eq!(found.gates, p.gates);
        }
    }
}
