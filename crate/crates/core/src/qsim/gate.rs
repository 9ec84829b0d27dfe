use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A gate from the two-element library used by every circuit here.
///
/// Channels are 1-based, channel 1 being the top wire of a diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gate {
    Hadamard(usize),
    ControlledNot { control: usize, target: usize },
}

impl Gate {
    pub fn h(channel: usize) -> Self {
        Gate::Hadamard(channel)
    }

    pub fn cn(control: usize, target: usize) -> Self {
        Gate::ControlledNot { control, target }
    }

    pub fn channels(&self) -> impl Iterator<Item = usize> {
        let (a, b) = match *self {
            Gate::Hadamard(k) => (k, None),
            Gate::ControlledNot { control, target } => (control, Some(target)),
        };
        std::iter::once(a).chain(b)
    }

    pub fn max_channel(&self) -> usize {
        self.channels().max().unwrap_or(0)
    }

    /// Checks the gate against a register of `channel_count` channels.
    pub fn validate(&self, channel_count: usize) -> Result<()> {
        if let Gate::ControlledNot { control, target } = *self {
            if control == target {
                return Err(Error::InvalidGate(format!(
                    "controlled-NOT with control and target both on channel {control}"
                )));
            }
        }
        for channel in self.channels() {
            if channel == 0 || channel > channel_count {
                return Err(Error::ChannelOutOfRange {
                    channel,
                    channel_count,
                });
            }
        }
        Ok(())
    }

    /// True when the two gates commute as operators.
    ///
    /// Disjoint gates commute, as do two controlled-NOTs that never use one
    /// gate's target as the other's control.
    pub fn commutes_with(&self, other: &Gate) -> bool {
        if self == other {
            return true;
        }
        match (*self, *other) {
            (
                Gate::ControlledNot {
                    control: c1,
                    target: t1,
                },
                Gate::ControlledNot {
                    control: c2,
                    target: t2,
                },
            ) => c1 != t2 && c2 != t1,
            _ => self.channels().all(|a| other.channels().all(|b| a != b)),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::Hadamard(k) => write!(f, "h {k}"),
            Gate::ControlledNot { control, target } => write!(f, "cn {control} {target}"),
        }
    }
}

impl FromStr for Gate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let tokens: Vec<&str> = s.split_whitespace().collect();
        let num = |t: &str| {
            t.parse::<usize>()
                .map_err(|_| Error::InvalidGate(format!("bad channel index {t:?}")))
        };
        match tokens.as_slice() {
            ["h", k] => Ok(Gate::h(num(k)?)),
            ["cn", c, t] => Ok(Gate::cn(num(c)?, num(t)?)),
            _ => Err(Error::InvalidGate(format!("cannot parse gate {s:?}"))),
        }
    }
}

impl Serialize for Gate {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Gate {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Applies `gate` to a raw amplitude vector in place, with no normalization
/// or range checks. Channel `k` is bit `channel_count - k` of the index.
pub fn apply_gate_raw(amps: &mut [Complex64], channel_count: usize, gate: Gate) {
    debug_assert_eq!(amps.len(), 1 << channel_count);
    match gate {
        Gate::Hadamard(k) => {
            let bit = 1usize << (channel_count - k);
            for i in 0..amps.len() {
                if i & bit == 0 {
                    let j = i | bit;
                    let (a, b) = (amps[i], amps[j]);
                    amps[i] = (a + b) * FRAC_1_SQRT_2;
                    amps[j] = (a - b) * FRAC_1_SQRT_2;
                }
            }
        }
        Gate::ControlledNot { control, target } => {
            let cbit = 1usize << (channel_count - control);
            let tbit = 1usize << (channel_count - target);
            for i in 0..amps.len() {
                if i & cbit != 0 && i & tbit == 0 {
                    amps.swap(i, i | tbit);
                }
            }
        }
    }
}
