//! Phase detection sequences from a self-synchronizing code.
//!
//! Frame `i` of the sequence is the codeword whose payload holds the base-q
//! digits of `i` (little-endian, zero-padded). Any `2n - 1` consecutive
//! symbols contain a whole frame, so one window pins down both the frame
//! boundary and the frame number.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{CodecError, SyncCode, SyncCodeConfig};
use crate::dss::UNBOUNDED_INDEX;
use crate::ecc::EccError;
use crate::text::{self, TextError};
use crate::Symbol;

/// Largest sequence accepted by [`verify_pds_bruteforce`].
pub const MAX_BRUTEFORCE_LENGTH: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PdsError {
    #[error("{frames} frames exceed the payload capacity of {capacity}")]
    Capacity { frames: usize, capacity: String },
    #[error("a PDS needs at least one frame")]
    NoFrames,
    #[error("sequence length {length} exceeds the brute-force limit of {max}")]
    TooLarge { length: usize, max: usize },
    #[error("window has {found} symbols, expected {expected}")]
    WindowLength { expected: usize, found: usize },
    #[error("frame alignment not confident: {mismatches} marker mismatches")]
    NotConfident { mismatches: usize },
    #[error("payload decoding failed: {0}")]
    EccFailure(EccError),
    #[error("decoded frame number {decoded} is not below the frame count {frames}")]
    FrameNumber { decoded: u128, frames: usize },
    #[error("code has no serializable configuration")]
    NotSerializable,
    #[error("stored sequence does not match the one generated from the code")]
    SequenceMismatch,
    #[error(transparent)]
    Codec(CodecError),
    #[error(transparent)]
    Text(#[from] TextError),
}

impl From<CodecError> for PdsError {
    fn from(err: CodecError) -> Self {
        match err {
            CodecError::Ecc(e) => PdsError::EccFailure(e),
            other => PdsError::Codec(other),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Pds {
    code: SyncCode,
    frame_count: usize,
    sequence: Vec<Symbol>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PhaseEstimate {
    /// Position of the window's last symbol, modulo the period.
    pub phase: usize,
    /// Frame containing the last symbol.
    pub frame_number: usize,
    pub offset_in_frame: usize,
    pub marker_mismatches: usize,
    pub ecc_corrections: usize,
}

/// Wire form: generator code, frame count and the sequence text.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PdsJson {
    pub code: SyncCodeConfig,
    pub frames: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claimed_min_distance: Option<u64>,
}

/// Little-endian base-q digits of `value`, padded to `width`.
pub fn frame_digits(value: usize, q: usize, width: usize) -> Vec<Symbol> {
    let mut rest = value;
    (0..width)
        .map(|_| {
            let d = rest % q;
            rest /= q;
            d as Symbol
        })
        .collect()
}

fn digits_value(digits: &[Symbol], q: usize) -> u128 {
    digits
        .iter()
        .rev()
        .fold(0u128, |acc, &d| acc.saturating_mul(q as u128).saturating_add(d as u128))
}

pub fn build_pds(code: &SyncCode, frame_count: usize) -> Result<Pds, PdsError> {
    if frame_count == 0 {
        return Err(PdsError::NoFrames);
    }
    let (q, k) = (code.q(), code.k());
    let fits = u32::try_from(k)
        .ok()
        .and_then(|k| (q as u128).checked_pow(k))
        .is_none_or(|cap| frame_count as u128 <= cap);
    if !fits {
        return Err(PdsError::Capacity {
            frames: frame_count,
            capacity: format!("{q}^{k}"),
        });
    }
    let mut sequence = Vec::with_capacity(code.n() * frame_count);
    for i in 0..frame_count {
        sequence.extend(code.encode(&frame_digits(i, q, k))?);
    }
    Ok(Pds {
        code: code.clone(),
        frame_count,
        sequence,
    })
}

impl Pds {
    pub fn code(&self) -> &SyncCode {
        &self.code
    }

    pub fn frame_count(&self) -> usize {
        self.frame_count
    }

    pub fn frame_length(&self) -> usize {
        self.code.n()
    }

    /// Period `N = n M`.
    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }

    pub fn sequence(&self) -> &[Symbol] {
        &self.sequence
    }

    pub fn window_size(&self) -> usize {
        2 * self.code.n() - 1
    }

    /// `min(rho, d)`.
    pub fn claimed_min_distance(&self) -> u64 {
        self.code.index().min(self.code.min_distance() as u64)
    }

    /// The `window_size()` symbols starting at `start`, read cyclically.
    pub fn window_at(&self, start: usize) -> Vec<Symbol> {
        let len = self.len();
        (0..self.window_size()).map(|l| self.sequence[(start + l) % len]).collect()
    }

    pub fn to_json(&self) -> Result<PdsJson, PdsError> {
        Ok(PdsJson {
            code: self.code.config().ok_or(PdsError::NotSerializable)?,
            frames: self.frame_count,
            sequence: Some(text::format_symbols(&self.sequence, self.code.q())),
            window_size: Some(self.window_size()),
            claimed_min_distance: Some(self.claimed_min_distance()),
        })
    }

    /// Rebuilds from the generator; a stored sequence must match it exactly.
    pub fn from_json(json: &PdsJson) -> Result<Self, PdsError> {
        let code = SyncCode::from_config(&json.code)?;
        let pds = build_pds(&code, json.frames)?;
        if let Some(stored) = &json.sequence {
            if text::parse_symbols(stored, code.q())? != pds.sequence {
                return Err(PdsError::SequenceMismatch);
            }
        }
        Ok(pds)
    }
}

/// Exact minimum Hamming distance between the length-`2n - 1` windows at any
/// two distinct cyclic positions. [`UNBOUNDED_INDEX`] when there is only one.
pub fn verify_pds_bruteforce(pds: &Pds) -> Result<u64, PdsError> {
    let len = pds.len();
    if len > MAX_BRUTEFORCE_LENGTH {
        return Err(PdsError::TooLarge {
            length: len,
            max: MAX_BRUTEFORCE_LENGTH,
        });
    }
    let k = pds.window_size();
    let extended: Vec<Symbol> = (0..len + k).map(|i| pds.sequence[i % len]).collect();
    let mut best = UNBOUNDED_INDEX;
    for i in 0..len {
        let wi = &extended[i..i + k];
        for j in i + 1..len {
            let wj = &extended[j..j + k];
            let mut d = 0u64;
            for (a, b) in wi.iter().zip(wj) {
                if a != b {
                    d += 1;
                    if d >= best {
                        break;
                    }
                }
            }
            best = best.min(d);
        }
    }
    Ok(best)
}

/// Phase of a `2n - 1` window: locate the whole frame inside it, decode its
/// payload to the frame number, and refer the result to the last symbol.
pub fn locate_phase(pds: &Pds, window: &[Symbol]) -> Result<PhaseEstimate, PdsError> {
    let k = pds.window_size();
    if window.len() != k {
        return Err(PdsError::WindowLength {
            expected: k,
            found: window.len(),
        });
    }
    let code = &pds.code;
    let n = code.n();
    let alignment = code.locate_frame(window)?;
    if !alignment.confident {
        return Err(PdsError::NotConfident {
            mismatches: alignment.marker_mismatches,
        });
    }
    let o = alignment.offset;
    let decoded = code.decode_payload(&window[o..o + n])?;
    let frame = digits_value(&decoded.payload, code.q());
    if frame >= pds.frame_count as u128 {
        return Err(PdsError::FrameNumber {
            decoded: frame,
            frames: pds.frame_count,
        });
    }
    let period = pds.len();
    let start = (frame as usize * n + period - o) % period;
    let phase = (start + k - 1) % period;
    Ok(PhaseEstimate {
        phase,
        frame_number: phase / n,
        offset_in_frame: phase % n,
        marker_mismatches: alignment.marker_mismatches,
        ecc_corrections: decoded.corrections,
    })
}
