//! Circuits and their line-oriented text form.
//!
//! ```text
//! channels 3      # required first directive
//! h 2             # Hadamard on channel 2
//! cn 2 3          # controlled-NOT, control 2, target 3
//! border          # Alice's gates end here, at most once
//! measure 3 aux   # deferred computational-basis measurement
//! ```

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::error::{Error, Result};
use crate::qsim::{Gate, MAX_CHANNELS};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Measurement {
    pub channel: usize,
    pub label: String,
}

/// An ordered gate list with an optional Alice/Bob border and trailing
/// measurements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    channel_count: usize,
    gates: Vec<Gate>,
    border: Option<usize>,
    measurements: Vec<Measurement>,
}

fn valid_label(label: &str) -> bool {
    !label.is_empty() && !label.contains('#') && !label.chars().any(char::is_whitespace)
}

impl Circuit {
    pub fn new(
        channel_count: usize,
        gates: Vec<Gate>,
        border: Option<usize>,
        measurements: Vec<Measurement>,
    ) -> Result<Self> {
        if channel_count == 0 || channel_count > MAX_CHANNELS {
            return Err(Error::UnsupportedSize(channel_count));
        }
        for g in &gates {
            g.validate(channel_count)?;
        }
        if let Some(b) = border {
            if b > gates.len() {
                return Err(Error::InvalidInput(format!(
                    "border index {b} beyond {} gates",
                    gates.len()
                )));
            }
        }
        let mut labels = HashSet::new();
        for m in &measurements {
            if m.channel == 0 || m.channel > channel_count {
                return Err(Error::ChannelOutOfRange {
                    channel: m.channel,
                    channel_count,
                });
            }
            if !valid_label(&m.label) {
                return Err(Error::InvalidInput(format!("bad label {:?}", m.label)));
            }
            if !labels.insert(m.label.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate label {:?}", m.label)));
            }
        }
        Ok(Circuit {
            channel_count,
            gates,
            border,
            measurements,
        })
    }

    /// Alice's gates, a border, then Bob's gates.
    pub fn split(channel_count: usize, alice: &[Gate], bob: &[Gate]) -> Result<Self> {
        let gates = alice.iter().chain(bob).copied().collect();
        Self::new(channel_count, gates, Some(alice.len()), Vec::new())
    }

    /// A border-less circuit.
    pub fn from_gates(channel_count: usize, gates: Vec<Gate>) -> Result<Self> {
        Self::new(channel_count, gates, None, Vec::new())
    }

    pub fn channel_count(&self) -> usize {
        self.channel_count
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn border(&self) -> Option<usize> {
        self.border
    }

    pub fn measurements(&self) -> &[Measurement] {
        &self.measurements
    }

    pub fn alice_gates(&self) -> &[Gate] {
        &self.gates[..self.border.unwrap_or(self.gates.len())]
    }

    pub fn bob_gates(&self) -> &[Gate] {
        &self.gates[self.border.unwrap_or(self.gates.len())..]
    }

    pub fn with_measurement(mut self, channel: usize, label: &str) -> Result<Self> {
        self.measurements.push(Measurement {
            channel,
            label: label.to_string(),
        });
        Self::new(self.channel_count, self.gates, self.border, self.measurements)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnknownDirective,
    BadArity,
    ChannelOutOfRange,
    ControlEqualsTarget,
    DuplicateBorder,
    MissingChannels,
    DuplicateLabel,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line_number}: {kind}: {message}")]
pub struct ParseError {
    pub line_number: usize,
    pub kind: ParseErrorKind,
    pub message: String,
}

struct LineParser {
    line_number: usize,
}

impl LineParser {
    fn err(&self, kind: ParseErrorKind, message: impl Into<String>) -> ParseError {
        ParseError {
            line_number: self.line_number,
            kind,
            message: message.into(),
        }
    }

    fn arity(&self, tokens: &[&str], expected: usize) -> Result<(), ParseError> {
        if tokens.len() != expected {
            return Err(self.err(
                ParseErrorKind::BadArity,
                format!(
                    "`{}` takes {} argument(s), got {}",
                    tokens[0],
                    expected - 1,
                    tokens.len() - 1
                ),
            ));
        }
        Ok(())
    }

    fn channel(&self, token: &str, channel_count: usize) -> Result<usize, ParseError> {
        let k: usize = token.parse().map_err(|_| {
            self.err(
                ParseErrorKind::BadArity,
                format!("expected a channel number, got {token:?}"),
            )
        })?;
        if k == 0 || k > channel_count {
            return Err(self.err(
                ParseErrorKind::ChannelOutOfRange,
                format!("channel {k} outside 1..={channel_count}"),
            ));
        }
        Ok(k)
    }
}

const DIRECTIVES: [&str; 5] = ["channels", "h", "cn", "border", "measure"];

/// Parses the text form, stopping at the first error.
pub fn parse_circuit(source: &str) -> Result<Circuit, ParseError> {
    let mut channel_count: Option<usize> = None;
    let mut gates = Vec::new();
    let mut border = None;
    let mut measurements: Vec<Measurement> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in source.lines().enumerate() {
        let p = LineParser {
            line_number: idx + 1,
        };
        last_line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let Some(&directive) = tokens.first() else {
            continue;
        };
        if !DIRECTIVES.contains(&directive) {
            return Err(p.err(
                ParseErrorKind::UnknownDirective,
                format!("unknown directive {directive:?}"),
            ));
        }
        let Some(n) = channel_count else {
            if directive != "channels" {
                return Err(p.err(
                    ParseErrorKind::MissingChannels,
                    format!("`channels N` must come before `{directive}`"),
                ));
            }
            p.arity(&tokens, 2)?;
            let n: usize = tokens[1].parse().map_err(|_| {
                p.err(
                    ParseErrorKind::BadArity,
                    format!("expected a channel count, got {:?}", tokens[1]),
                )
            })?;
            if n == 0 || n > MAX_CHANNELS {
                return Err(p.err(
                    ParseErrorKind::ChannelOutOfRange,
                    format!("channel count {n} outside 1..={MAX_CHANNELS}"),
                ));
            }
            channel_count = Some(n);
            continue;
        };
        match directive {
            "channels" => {
                return Err(p.err(
                    ParseErrorKind::UnknownDirective,
                    "`channels` may appear only once",
                ))
            }
            "h" => {
                p.arity(&tokens, 2)?;
                gates.push(Gate::h(p.channel(tokens[1], n)?));
            }
            "cn" => {
                p.arity(&tokens, 3)?;
                let control = p.channel(tokens[1], n)?;
                let target = p.channel(tokens[2], n)?;
                if control == target {
                    return Err(p.err(
                        ParseErrorKind::ControlEqualsTarget,
                        format!("control and target are both channel {control}"),
                    ));
                }
                gates.push(Gate::cn(control, target));
            }
            "border" => {
                p.arity(&tokens, 1)?;
                if border.is_some() {
                    return Err(p.err(ParseErrorKind::DuplicateBorder, "second `border`"));
                }
                border = Some(gates.len());
            }
            "measure" => {
                p.arity(&tokens, 3)?;
                let channel = p.channel(tokens[1], n)?;
                let label = tokens[2];
                if measurements.iter().any(|m| m.label == label) {
                    return Err(p.err(
                        ParseErrorKind::DuplicateLabel,
                        format!("label {label:?} already used"),
                    ));
                }
                measurements.push(Measurement {
                    channel,
                    label: label.to_string(),
                });
            }
            _ => unreachable!("directive list checked above"),
        }
    }

    let Some(channel_count) = channel_count else {
        return Err(ParseError {
            line_number: last_line.max(1),
            kind: ParseErrorKind::MissingChannels,
            message: "no `channels N` directive".into(),
        });
    };
    Ok(Circuit {
        channel_count,
        gates,
        border,
        measurements,
    })
}

/// Canonical text: lower-case directives, single spaces, measurements last,
/// one trailing newline.
pub fn serialize_circuit(circuit: &Circuit) -> String {
    let mut out = format!("channels {}\n", circuit.channel_count);
    for (i, g) in circuit.gates.iter().enumerate() {
        if circuit.border == Some(i) {
            out.push_str("border\n");
        }
        out.push_str(&g.to_string());
        out.push('\n');
    }
    if circuit.border == Some(circuit.gates.len()) {
        out.push_str("border\n");
    }
    for m in &circuit.measurements {
        out.push_str(&format!("measure {} {}\n", m.channel, m.label));
    }
    out
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_circuit(self))
    }
}
