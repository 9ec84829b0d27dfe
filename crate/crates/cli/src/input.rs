//! Message sources, tolerance resolution and JSON shapes shared by commands.

use std::path::Path;

use intraport::qsim::{PureState, SingleQubit};
use intraport::protocol::DEFAULT_TOL;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::Failure;

pub const TOL_ENV: &str = "INTRAPORT_TOL";

/// `re` or `re,im`.
pub fn parse_amplitude(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| format!("bad amplitude {s:?}"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("bad amplitude {s:?}; expected `re` or `re,im`")),
    }
}

/// `--tol` wins over the environment, which wins over the default.
pub fn tolerance(flag: Option<f64>) -> Result<f64, Failure> {
    let tol = match flag {
        Some(t) => t,
        None => match std::env::var(TOL_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| Failure::usage(format!("{TOL_ENV}={v:?} is not a number")))?,
            Err(_) => DEFAULT_TOL,
        },
    };
    if !(tol.is_finite() && tol > 0.0 && tol < 1.0) {
        return Err(Failure::usage(format!("tolerance {tol} must lie in (0, 1)")));
    }
    Ok(tol)
}

/// Ways to supply message states on the command line.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct MessageArgs {
    /// Coefficient of |1> in the first message, `re` or `re,im`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_amplitude)]
    pub a: Option<Complex64>,
    /// Coefficient of |0> in the first message.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_amplitude)]
    pub b: Option<Complex64>,
    /// Coefficient of |1> in the second message.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_amplitude)]
    pub e: Option<Complex64>,
    /// Coefficient of |0> in the second message.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_amplitude)]
    pub f: Option<Complex64>,
    /// JSON file: array of messages, each `[[re,im],[re,im]]` for |0> and |1>.
    #[arg(long, conflicts_with_all = ["a", "b", "e", "f", "seed"])]
    pub messages: Option<std::path::PathBuf>,
    /// Draw Haar-random messages from this seed.
    #[arg(long, conflicts_with_all = ["a", "b", "e", "f"])]
    pub seed: Option<u64>,
}

impl MessageArgs {
    pub fn resolve(&self, count: usize) -> Result<Vec<SingleQubit>, Failure> {
        if let Some(path) = &self.messages {
            let pairs: Vec<[Complex64; 2]> = read_json(path)?;
            if pairs.len() != count {
                return Err(Failure::usage(format!("expected {count} messages, found {}", pairs.len())));
            }
            return pairs
                .into_iter()
                .map(|[c0, c1]| SingleQubit::new(c0, c1).map_err(Failure::from))
                .collect();
        }
        if let Some(seed) = self.seed {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            return Ok((0..count).map(|_| SingleQubit::random(&mut rng)).collect());
        }
        let flags = [self.a, self.b, self.e, self.f];
        if flags.iter().all(Option::is_none) {
            return Err(Failure::usage("give --a/--b/--e/--f, --messages or --seed"));
        }
        if count != 2 {
            return Err(Failure::usage(format!(
                "--a/--b/--e/--f describe two messages but {count} are needed; use --messages or --seed"
            )));
        }
        let [Some(a), Some(b), Some(e), Some(f)] = flags else {
            return Err(Failure::usage("--a, --b, --e and --f must be given together"));
        };
        Ok(vec![SingleQubit::one_zero(a, b)?, SingleQubit::one_zero(e, f)?])
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// Initial state for `exec`, given by exactly one key.
#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum ExecInput {
    /// Basis label such as `"110"`, channel 1 first.
    Basis(String),
    /// Full amplitude vector, channel 1 as the most significant bit.
    Amplitudes(Vec<Complex64>),
    /// One `[coeff0, coeff1]` pair per channel.
    Factors(Vec<[Complex64; 2]>),
}

impl ExecInput {
    pub fn state(self, channel_count: usize) -> Result<PureState, Failure> {
        let state = match self {
            ExecInput::Basis(label) => PureState::from_label(&label)?,
            ExecInput::Amplitudes(amps) => {
                let n = amps.len().trailing_zeros() as usize;
                if amps.len() != 1 << n {
                    return Err(Failure::usage(format!("{} amplitudes is not a power of two", amps.len())));
                }
                PureState::from_amplitudes(n, amps)?
            }
            ExecInput::Factors(pairs) => {
                let factors = pairs
                    .into_iter()
                    .map(|[c0, c1]| SingleQubit::new(c0, c1))
                    .collect::<Result<Vec<_>, _>>()?;
                intraport::qsim::make_state(&factors)?
            }
        };
        if state.channel_count() != channel_count {
            return Err(Failure::usage(format!(
                "input has {} channels but the circuit has {channel_count}",
                state.channel_count()
            )));
        }
        Ok(state)
    }
}

pub fn pair(q: &SingleQubit) -> Value {
    json!([q.coeff0, q.coeff1])
}

pub fn command_echo() -> Vec<String> {
    std::env::args().skip(1).collect()
}
