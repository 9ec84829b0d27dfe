//! Statevector simulation and verification of multi-state intraportation
//! over Hadamard/controlled-NOT networks split between a sender (Alice) and
//! a receiver (Bob).

pub mod circuit;
pub mod eavesdrop;
pub mod error;
pub mod protocol;
pub mod qsim;

pub use circuit::{parse_circuit, serialize_circuit, Circuit, Measurement, ParseError, ParseErrorKind};
pub use error::{Error, Result};
