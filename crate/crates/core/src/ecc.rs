//! Pluggable block error-correcting codes for the payload positions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Symbol;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EccError {
    #[error("expected {expected} symbols, found {found}")]
    Length { expected: usize, found: usize },
    #[error("symbol {0} is outside the code alphabet")]
    Alphabet(Symbol),
    #[error("cannot decode: {0}")]
    Uncorrectable(String),
    #[error("invalid code parameters: {0}")]
    Parameters(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoded {
    pub payload: Vec<Symbol>,
    /// Number of received symbols that differ from the re-encoded payload.
    pub corrections: usize,
}

/// A q-ary block code of length `block_len` carrying `k` payload symbols.
pub trait BlockCode: Send + Sync + std::fmt::Debug {
    fn k(&self) -> usize;
    fn block_len(&self) -> usize;
    fn q(&self) -> usize;
    fn min_distance(&self) -> usize;
    fn encode(&self, payload: &[Symbol]) -> Result<Vec<Symbol>, EccError>;
    fn decode(&self, received: &[Symbol]) -> Result<Decoded, EccError>;

    /// Serializable description, for the built-in codes.
    fn config(&self) -> Option<EccConfig> {
        None
    }
}

/// JSON description of a built-in code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EccConfig {
    Identity,
    Repetition { repeat: usize },
}

impl EccConfig {
    pub fn build(&self, block_len: usize, q: usize) -> Result<Box<dyn BlockCode>, EccError> {
        Ok(match *self {
            EccConfig::Identity => Box::new(IdentityCode::new(block_len, q)?),
            EccConfig::Repetition { repeat } => Box::new(RepetitionCode::new(block_len, q, repeat)?),
        })
    }
}

fn check_symbols(symbols: &[Symbol], q: usize, expected: usize) -> Result<(), EccError> {
    if symbols.len() != expected {
        return Err(EccError::Length {
            expected,
            found: symbols.len(),
        });
    }
    match symbols.iter().find(|&&s| s as usize >= q) {
        Some(&s) => Err(EccError::Alphabet(s)),
        None => Ok(()),
    }
}

/// Uncoded payload, `d = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityCode {
    len: usize,
    q: usize,
}

impl IdentityCode {
    pub fn new(len: usize, q: usize) -> Result<Self, EccError> {
        if q < 2 {
            return Err(EccError::Parameters(format!("q = {q} must be at least 2")));
        }
        Ok(IdentityCode { len, q })
    }
}

impl BlockCode for IdentityCode {
    fn k(&self) -> usize {
        self.len
    }

    fn block_len(&self) -> usize {
        self.len
    }

    fn q(&self) -> usize {
        self.q
    }

    fn min_distance(&self) -> usize {
        1
    }

    fn encode(&self, payload: &[Symbol]) -> Result<Vec<Symbol>, EccError> {
        check_symbols(payload, self.q, self.len)?;
        Ok(payload.to_vec())
    }

    fn decode(&self, received: &[Symbol]) -> Result<Decoded, EccError> {
        check_symbols(received, self.q, self.len)?;
        Ok(Decoded {
            payload: received.to_vec(),
            corrections: 0,
        })
    }

    fn config(&self) -> Option<EccConfig> {
        Some(EccConfig::Identity)
    }
}

/// Each payload symbol repeated `repeat` times; `k = floor(block_len / repeat)`.
///
/// Leftover positions are filled with symbol 0 and ignored on decode. Decoding
/// is a plurality vote per group; a tied vote is uncorrectable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepetitionCode {
    block_len: usize,
    q: usize,
    repeat: usize,
}

impl RepetitionCode {
    pub fn new(block_len: usize, q: usize, repeat: usize) -> Result<Self, EccError> {
        if q < 2 {
            return Err(EccError::Parameters(format!("q = {q} must be at least 2")));
        }
        if repeat == 0 {
            return Err(EccError::Parameters("repeat must be positive".into()));
        }
        Ok(RepetitionCode { block_len, q, repeat })
    }

    pub fn repeat(&self) -> usize {
        self.repeat
    }
}

impl BlockCode for RepetitionCode {
    fn k(&self) -> usize {
        self.block_len / self.repeat
    }

    fn block_len(&self) -> usize {
        self.block_len
    }

    fn q(&self) -> usize {
        self.q
    }

    fn min_distance(&self) -> usize {
        self.repeat
    }

    fn encode(&self, payload: &[Symbol]) -> Result<Vec<Symbol>, EccError> {
        check_symbols(payload, self.q, self.k())?;
        let mut out = Vec::with_capacity(self.block_len);
        for &s in payload {
            out.extend(std::iter::repeat_n(s, self.repeat));
        }
        out.resize(self.block_len, 0);
        Ok(out)
    }

    fn decode(&self, received: &[Symbol]) -> Result<Decoded, EccError> {
        check_symbols(received, self.q, self.block_len)?;
        let mut votes = vec![0usize; self.q];
        let mut payload = Vec::with_capacity(self.k());
        let mut corrections = 0;
        for (group, chunk) in received.chunks_exact(self.repeat).enumerate() {
            votes.iter_mut().for_each(|v| *v = 0);
            for &s in chunk {
                votes[s as usize] += 1;
            }
            let top = *votes.iter().max().expect("q >= 2");
            let mut winners = votes.iter().enumerate().filter(|(_, &v)| v == top);
            let (winner, _) = winners.next().expect("nonempty");
            if winners.next().is_some() {
                return Err(EccError::Uncorrectable(format!("tied vote in group {group}")));
            }
            corrections += self.repeat - top;
            payload.push(winner as Symbol);
        }
        Ok(Decoded { payload, corrections })
    }

    fn config(&self) -> Option<EccConfig> {
        Some(EccConfig::Repetition { repeat: self.repeat })
    }
}
