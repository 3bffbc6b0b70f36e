//! Template sequences and self-synchronizing codes built from a DSS.
//!
//! The template of a DSS puts symbol `j` at every position of `Q_j` and a
//! wildcard elsewhere. Filling the wildcards with codewords of any block code
//! of length `n - r` gives a code whose splices differ from every codeword in
//! at least `rho` marker positions.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dss::{self, DifferenceProfile, Dss, DssError, UNBOUNDED_INDEX};
use crate::ecc::{BlockCode, Decoded, EccConfig, EccError};
use crate::text::{self, TextError};
use crate::Symbol;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("payload has {found} symbols, code expects {expected}")]
    PayloadLength { expected: usize, found: usize },
    #[error("frame has {found} symbols, expected {expected}")]
    FrameLength { expected: usize, found: usize },
    #[error("window of {found} symbols is too short; need at least {min}")]
    WindowTooShort { min: usize, found: usize },
    #[error("window of {found} symbols is too long; at most {max} allowed")]
    WindowTooLong { max: usize, found: usize },
    #[error("symbol {symbol} at position {position} is outside the alphabet of size {q}")]
    SymbolRange { symbol: Symbol, position: usize, q: usize },
    #[error("ECC failure: {0}")]
    Ecc(#[from] EccError),
    #[error("ECC does not fit template: {0}")]
    Mismatch(String),
    #[error("codebook of {size} words exceeds the limit of {max}")]
    TooLarge { size: String, max: usize },
    #[error(transparent)]
    Dss(#[from] DssError),
    #[error(transparent)]
    Text(#[from] TextError),
}

/// One template position: a marker symbol or the payload wildcard `*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TemplateSymbol {
    Marker(Symbol),
    Wildcard,
}

impl TemplateSymbol {
    pub fn marker(self) -> Option<Symbol> {
        match self {
            TemplateSymbol::Marker(s) => Some(s),
            TemplateSymbol::Wildcard => None,
        }
    }
}

/// 1 iff both arguments are markers and they differ.
pub fn h(x: TemplateSymbol, y: TemplateSymbol) -> u64 {
    match (x, y) {
        (TemplateSymbol::Marker(a), TemplateSymbol::Marker(b)) if a != b => 1,
        _ => 0,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemplateSequence {
    q: usize,
    symbols: Vec<TemplateSymbol>,
}

impl TemplateSequence {
    pub fn new(q: usize, symbols: Vec<TemplateSymbol>) -> Result<Self, CodecError> {
        if q < 2 {
            return Err(DssError::Domain(format!("alphabet size q = {q} must be at least 2")).into());
        }
        for (position, s) in symbols.iter().enumerate() {
            if let TemplateSymbol::Marker(symbol) = *s {
                if symbol as usize >= q {
                    return Err(CodecError::SymbolRange { symbol, position, q });
                }
            }
        }
        Ok(TemplateSequence { q, symbols })
    }

    pub fn n(&self) -> usize {
        self.symbols.len()
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn symbols(&self) -> &[TemplateSymbol] {
        &self.symbols
    }

    pub fn redundancy(&self) -> usize {
        self.symbols.iter().filter(|s| s.marker().is_some()).count()
    }

    /// Payload slots in ascending order.
    pub fn wildcard_positions(&self) -> Vec<usize> {
        (0..self.n())
            .filter(|&i| self.symbols[i] == TemplateSymbol::Wildcard)
            .collect()
    }

    /// `(position, symbol)` for every marker, ascending by position.
    pub fn markers(&self) -> Vec<(usize, Symbol)> {
        self.symbols
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.marker().map(|m| (i, m)))
            .collect()
    }

    pub fn to_text(&self) -> String {
        let cells: Vec<Option<Symbol>> = self.symbols.iter().map(|s| s.marker()).collect();
        text::format_cells(&cells, self.q)
    }

    pub fn parse(text_in: &str, q: usize) -> Result<Self, CodecError> {
        let cells = text::parse_cells(text_in, q)?;
        let symbols = cells
            .into_iter()
            .map(|c| c.map_or(TemplateSymbol::Wildcard, TemplateSymbol::Marker))
            .collect();
        TemplateSequence::new(q, symbols)
    }
}

impl fmt::Display for TemplateSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

pub fn template_from_dss(dss: &Dss) -> TemplateSequence {
    let symbols = dss
        .labels()
        .into_iter()
        .map(|l| l.map_or(TemplateSymbol::Wildcard, |s| TemplateSymbol::Marker(s as Symbol)))
        .collect();
    TemplateSequence { q: dss.q(), symbols }
}

pub fn dss_from_template(template: &TemplateSequence) -> Result<Dss, DssError> {
    let labels: Vec<Option<usize>> = template.symbols.iter().map(|s| s.marker().map(|m| m as usize)).collect();
    Dss::from_labels(template.q, &labels)
}

/// `counts[t] = sum_i h(v_i, v_{i+t mod n})`, computed on the template itself.
pub fn correlation_profile(template: &TemplateSequence) -> DifferenceProfile {
    let n = template.n();
    let v = &template.symbols;
    let counts = (0..n)
        .map(|t| (0..n).map(|i| h(v[i], v[(i + t) % n])).sum())
        .collect();
    DifferenceProfile::from_counts(counts)
}

/// Result of scoring every frame alignment against the marker pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AlignmentEstimate {
    /// Window position where a frame starts.
    pub offset: usize,
    pub marker_mismatches: usize,
    pub confident: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyncCodeConfig {
    pub dss: Dss,
    pub ecc: EccConfig,
}

/// A DSS template with a block code filling its wildcard positions.
#[derive(Clone, Debug)]
pub struct SyncCode {
    template: TemplateSequence,
    dss: Dss,
    ecc: Arc<dyn BlockCode>,
    markers: Vec<(usize, Symbol)>,
    payload_positions: Vec<usize>,
    index: u64,
}

impl SyncCode {
    pub fn new(dss: Dss, ecc: Arc<dyn BlockCode>) -> Result<Self, CodecError> {
        let template = template_from_dss(&dss);
        let payload_positions = template.wildcard_positions();
        if ecc.block_len() != payload_positions.len() {
            return Err(CodecError::Mismatch(format!(
                "block length {} but template has {} wildcard positions",
                ecc.block_len(),
                payload_positions.len()
            )));
        }
        if ecc.q() != dss.q() {
            return Err(CodecError::Mismatch(format!(
                "code alphabet {} but template alphabet {}",
                ecc.q(),
                dss.q()
            )));
        }
        let index = dss::difference_profile_with(&dss, dss::ProfileMethod::Auto).index;
        Ok(SyncCode {
            markers: template.markers(),
            template,
            dss,
            ecc,
            payload_positions,
            index,
        })
    }

    pub fn from_config(config: &SyncCodeConfig) -> Result<Self, CodecError> {
        let block_len = config.dss.n() - config.dss.redundancy();
        let ecc = config.ecc.build(block_len, config.dss.q())?;
        SyncCode::new(config.dss.clone(), Arc::from(ecc))
    }

    /// Serializable form, available when the code is a built-in one.
    pub fn config(&self) -> Option<SyncCodeConfig> {
        self.ecc.config().map(|ecc| SyncCodeConfig {
            dss: self.dss.clone(),
            ecc,
        })
    }

    pub fn n(&self) -> usize {
        self.template.n()
    }

    pub fn q(&self) -> usize {
        self.template.q()
    }

    pub fn k(&self) -> usize {
        self.ecc.k()
    }

    pub fn redundancy(&self) -> usize {
        self.markers.len()
    }

    pub fn dss(&self) -> &Dss {
        &self.dss
    }

    pub fn template(&self) -> &TemplateSequence {
        &self.template
    }

    pub fn ecc(&self) -> &dyn BlockCode {
        self.ecc.as_ref()
    }

    /// Index `rho` of the underlying DSS.
    pub fn index(&self) -> u64 {
        self.index
    }

    /// Minimum distance of the payload code.
    pub fn min_distance(&self) -> usize {
        self.ecc.min_distance()
    }

    /// Substitutions per n-window that alignment tolerates: `floor((rho - 1) / 2)`.
    pub fn alignment_tolerance(&self) -> Option<usize> {
        match self.index {
            0 => None,
            UNBOUNDED_INDEX => Some(self.redundancy()),
            rho => Some(((rho - 1) / 2) as usize),
        }
    }

    pub fn encode(&self, payload: &[Symbol]) -> Result<Vec<Symbol>, CodecError> {
        if payload.len() != self.k() {
            return Err(CodecError::PayloadLength {
                expected: self.k(),
                found: payload.len(),
            });
        }
        let block = self.ecc.encode(payload)?;
        let mut frame = vec![0; self.n()];
        for &(pos, s) in &self.markers {
            frame[pos] = s;
        }
        for (&pos, &s) in self.payload_positions.iter().zip(&block) {
            frame[pos] = s;
        }
        Ok(frame)
    }

    fn check_alphabet(&self, symbols: &[Symbol]) -> Result<(), CodecError> {
        match symbols.iter().position(|&s| s as usize >= self.q()) {
            Some(position) => Err(CodecError::SymbolRange {
                symbol: symbols[position],
                position,
                q: self.q(),
            }),
            None => Ok(()),
        }
    }

    /// Marker mismatches if a frame started at `offset` in `window`.
    pub fn marker_mismatches(&self, window: &[Symbol], offset: usize) -> usize {
        self.markers
            .iter()
            .filter(|&&(pos, s)| window[offset + pos] != s)
            .count()
    }

    /// Scores every offset `o` with `o + n <= window.len()` by marker
    /// mismatches; the minimum wins, ties go to the smallest offset.
    pub fn locate_frame(&self, window: &[Symbol]) -> Result<AlignmentEstimate, CodecError> {
        let n = self.n();
        if window.len() < n {
            return Err(CodecError::WindowTooShort {
                min: n,
                found: window.len(),
            });
        }
        if window.len() > 2 * n - 1 {
            return Err(CodecError::WindowTooLong {
                max: 2 * n - 1,
                found: window.len(),
            });
        }
        self.check_alphabet(window)?;
        let (offset, marker_mismatches) = (0..=window.len() - n)
            .map(|o| (o, self.marker_mismatches(window, o)))
            .min_by_key(|&(o, m)| (m, o))
            .expect("at least one offset");
        let confident = self
            .alignment_tolerance()
            .is_some_and(|tol| marker_mismatches <= tol);
        Ok(AlignmentEstimate {
            offset,
            marker_mismatches,
            confident,
        })
    }

    pub fn decode_payload(&self, frame: &[Symbol]) -> Result<Decoded, CodecError> {
        if frame.len() != self.n() {
            return Err(CodecError::FrameLength {
                expected: self.n(),
                found: frame.len(),
            });
        }
        self.check_alphabet(frame)?;
        let block: Vec<Symbol> = self.payload_positions.iter().map(|&p| frame[p]).collect();
        Ok(self.ecc.decode(&block)?)
    }

    /// Every codeword, payloads enumerated in lexicographic order.
    pub fn codebook(&self, max_codewords: usize) -> Result<Vec<Vec<Symbol>>, CodecError> {
        let k = self.k();
        let size = u32::try_from(k)
            .ok()
            .and_then(|k| (self.q() as u128).checked_pow(k))
            .filter(|&s| s <= max_codewords as u128)
            .ok_or_else(|| CodecError::TooLarge {
                size: format!("{}^{}", self.q(), k),
                max: max_codewords,
            })? as usize;
        let mut payload = vec![0 as Symbol; k];
        let mut words = Vec::with_capacity(size);
        for _ in 0..size {
            words.push(self.encode(&payload)?);
            for digit in payload.iter_mut().rev() {
                *digit += 1;
                if (*digit as usize) < self.q() {
                    break;
                }
                *digit = 0;
            }
        }
        Ok(words)
    }

    /// Minimum Hamming distance between any codeword and any splice
    /// `(x_t, .., x_{n-1}, y_0, .., y_{t-1})`, `1 <= t <= n-1`, over all ordered
    /// codeword pairs. [`UNBOUNDED_INDEX`] when `n = 1`.
    pub fn comma_free_index_bruteforce(&self, max_codewords: usize) -> Result<u64, CodecError> {
        let n = self.n();
        let words = self.codebook(max_codewords)?;
        if n == 1 {
            return Ok(UNBOUNDED_INDEX);
        }
        let mut best = u64::MAX;
        let mut splice = vec![0 as Symbol; n];
        for x in &words {
            for y in &words {
                for t in 1..n {
                    splice[..n - t].copy_from_slice(&x[t..]);
                    splice[n - t..].copy_from_slice(&y[..t]);
                    for z in &words {
                        let d = z.iter().zip(&splice).filter(|(a, b)| a != b).count() as u64;
                        best = best.min(d);
                    }
                }
            }
        }
        Ok(best)
    }
}
