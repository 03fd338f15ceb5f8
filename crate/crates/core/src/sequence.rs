//! Symbol sequences and FASTA / plain-text ingestion.

use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::states::StateSpace;

/// A non-empty sequence of state indexes over an alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolSequence {
    states: StateSpace,
    symbols: Vec<usize>,
    name: String,
    description: String,
}

impl SymbolSequence {
    pub fn new(states: StateSpace, symbols: Vec<usize>, name: impl Into<String>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(argument("sequence is empty"));
        }
        if let Some(pos) = symbols.iter().position(|&s| s >= states.len()) {
            return Err(argument(format!(
                "state index {} at position {} is outside the alphabet",
                symbols[pos],
                pos + 1
            )));
        }
        Ok(Self {
            states,
            symbols,
            name: name.into(),
            description: String::new(),
        })
    }

    /// Attaches free text, e.g. the remainder of a FASTA header line.
    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = description.into();
        self
    }

    /// Parses a string strictly; every character must be in the alphabet.
    pub fn from_text(states: StateSpace, text: &str, name: impl Into<String>) -> Result<Self> {
        let symbols = map_symbols(&states, text.chars(), UnknownPolicy::Error, &mut 0)?;
        Self::new(states, symbols, name)
    }

    pub fn states(&self) -> &StateSpace {
        &self.states
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// The first `len` symbols (clamped to the sequence length).
    pub fn prefix(&self, len: usize) -> &[usize] {
        &self.symbols[..len.min(self.symbols.len())]
    }

    pub fn to_text(&self) -> String {
        self.symbols
            .iter()
            .map(|&s| self.states.symbol(s).expect("validated index"))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    Fasta,
    Plain,
    /// FASTA if the first non-blank line starts with `>`, plain otherwise.
    #[default]
    Auto,
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fasta" => Ok(Self::Fasta),
            "plain" => Ok(Self::Plain),
            "auto" => Ok(Self::Auto),
            other => Err(argument(format!("unknown input format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnknownPolicy {
    /// Drop symbols outside the alphabet (e.g. `N`).
    #[default]
    SkipUnknown,
    Error,
}

impl FromStr for UnknownPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "skip-unknown" => Ok(Self::SkipUnknown),
            "error" => Ok(Self::Error),
            other => Err(argument(format!("unknown symbol policy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ReadOptions {
    pub format: InputFormat,
    pub policy: UnknownPolicy,
    /// 0-based FASTA record to return; the first record by default.
    pub record: usize,
}

/// Maps characters to state indexes, upper-casing and ignoring whitespace.
/// `offset` counts consumed non-whitespace characters so that error
/// positions stay 1-based across lines.
fn map_symbols(
    states: &StateSpace,
    chars: impl Iterator<Item = char>,
    policy: UnknownPolicy,
    offset: &mut usize,
) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for c in chars.filter(|c| !c.is_whitespace()) {
        *offset += 1;
        let upper = c.to_ascii_uppercase();
        match states.index(upper) {
            Some(i) => out.push(i),
            None if policy == UnknownPolicy::SkipUnknown => {}
            None => {
                return Err(Error::UnknownSymbol {
                    symbol: c,
                    position: *offset,
                })
            }
        }
    }
    Ok(out)
}

/// Reads a single sequence from FASTA or plain text.
pub fn read_sequence<R: BufRead>(
    reader: R,
    states: &StateSpace,
    options: &ReadOptions,
    default_name: &str,
) -> Result<SymbolSequence> {
    let mut lines = Vec::new();
    for line in reader.lines() {
        lines.push(line?);
    }
    let is_fasta = match options.format {
        InputFormat::Fasta => true,
        InputFormat::Plain => false,
        InputFormat::Auto => lines
            .iter()
            .map(|l| l.trim())
            .find(|l| !l.is_empty())
            .is_some_and(|l| l.starts_with('>')),
    };

    let mut name = default_name.to_string();
    let mut description = String::new();
    let mut body = Vec::new();
    let mut offset = 0;
    if is_fasta {
        let mut record: Option<usize> = None;
        for line in &lines {
            let line = line.trim_end();
            if let Some(header) = line.strip_prefix('>') {
                let next = record.map_or(0, |r| r + 1);
                if next > options.record {
                    break;
                }
                record = Some(next);
                if next == options.record {
                    let header = header.trim();
                    let (first, rest) = header.split_once(char::is_whitespace).unwrap_or((header, ""));
                    name = first.to_string();
                    description = rest.trim().to_string();
                }
            } else if record == Some(options.record) && !line.starts_with(';') {
                body.extend(map_symbols(states, line.chars(), options.policy, &mut offset)?);
            }
        }
        if record.is_none_or(|r| r < options.record) {
            return Err(Error::Format(format!(
                "FASTA record {} not found",
                options.record + 1
            )));
        }
    } else {
        for line in &lines {
            body.extend(map_symbols(states, line.chars(), options.policy, &mut offset)?);
        }
    }
    if body.is_empty() {
        return Err(Error::Format("sequence body is empty".into()));
    }
    Ok(SymbolSequence::new(states.clone(), body, name)?.with_description(description))
}

/// Writes FASTA with the body wrapped at `width` columns.
pub fn write_fasta<W: std::io::Write>(
    mut out: W,
    header: &str,
    seq: &SymbolSequence,
    width: usize,
) -> std::io::Result<()> {
    writeln!(out, ">{header}")?;
    let text = seq.to_text();
    for chunk in text.as_bytes().chunks(width.max(1)) {
        out.write_all(chunk)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
