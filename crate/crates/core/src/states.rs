use serde::{Deserialize, Serialize};

use crate::error::{argument, Result};

/// An ordered alphabet of distinct symbols; a symbol's position is its state index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<char>", into = "Vec<char>")]
pub struct StateSpace {
    symbols: Vec<char>,
}

impl StateSpace {
    pub fn new(symbols: impl IntoIterator<Item = char>) -> Result<Self> {
        let symbols: Vec<char> = symbols.into_iter().collect();
        if symbols.len() < 2 {
            return Err(argument("a state space needs at least two symbols"));
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(argument(format!("duplicate symbol {s:?} in state space")));
            }
        }
        Ok(Self { symbols })
    }

    /// The nucleotide alphabet in the order A, C, G, T.
    pub fn dna() -> Self {
        Self {
            symbols: vec!['A', 'C', 'G', 'T'],
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn index(&self, symbol: char) -> Option<usize> {
        self.symbols.iter().position(|&s| s == symbol)
    }

    pub fn symbol(&self, index: usize) -> Option<char> {
        self.symbols.get(index).copied()
    }

    /// Like [`index`](Self::index) but reports an argument error for a foreign symbol.
    pub fn require(&self, symbol: char) -> Result<usize> {
        self.index(symbol)
            .ok_or_else(|| argument(format!("symbol {symbol:?} is not in the alphabet")))
    }
}

impl Default for StateSpace {
    fn default() -> Self {
        Self::dna()
    }
}

impl TryFrom<Vec<char>> for StateSpace {
    type Error = crate::Error;

    fn try_from(symbols: Vec<char>) -> Result<Self> {
        Self::new(symbols)
    }
}

impl From<StateSpace> for Vec<char> {
    fn from(s: StateSpace) -> Self {
        s.symbols
    }
}
