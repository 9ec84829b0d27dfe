use thiserror::Error;

use crate::circuit::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("state is not normalized (squared norm {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },
    #[error("channel {channel} is out of range 1..={channel_count}")]
    ChannelOutOfRange { channel: usize, channel_count: usize },
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("measurement branch is impossible (probability {probability})")]
    ImpossibleBranch { probability: f64 },
    #[error("unsupported channel count {0}")]
    UnsupportedSize(usize),
    #[error("figure {0} has no scenario")]
    UnknownScenario(usize),
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("scenario manifest: {0}")]
    Manifest(String),
    #[error("no decoder for {channel_count} channels, auxiliary {aux_value} on channel {aux_channel}, within {max_gates} gates")]
    NoDecoder {
        channel_count: usize,
        aux_channel: usize,
        aux_value: String,
        max_gates: usize,
    },
}
