//! Seeded Knuth shuffle with replayable transposition traces.
//!
//! A shuffle of length `n` is recorded as `n - 1` choices `t_0, .., t_{n-2}`
//! with `t_i` uniform on `[0, n-1-i]`. Step `i` swaps positions `n-1-i` and
//! `t_i`, so the output is `pi_{tau_{n-2}} .. pi_{tau_0}(v)`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShuffleError {
    #[error("choice t_{index} = {value} is outside [0, {max}]")]
    InvalidChoice { index: usize, value: usize, max: usize },
    #[error("trace has {found} choices, expected {expected}")]
    TraceLength { expected: usize, found: usize },
    #[error("sequence length {found} does not match trace length {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("index error: {0}")]
    Index(String),
}

/// Reproducible randomness: a master seed plus an independent substream.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl Seed {
    pub fn new(master_seed: u64) -> Self {
        Seed {
            master_seed,
            stream_index: 0,
        }
    }

    pub fn with_stream(self, stream_index: u64) -> Self {
        Seed {
            stream_index,
            ..self
        }
    }

    pub fn rng(&self) -> DetRng {
        DetRng::new(*self)
    }
}

/// ChaCha8 keyed by the master seed, with the stream index selecting the
/// ChaCha stream. The keystream is platform independent.
#[derive(Clone, Debug)]
pub struct DetRng {
    inner: ChaCha8Rng,
}

impl DetRng {
    pub fn new(seed: Seed) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed.master_seed);
        inner.set_stream(seed.stream_index);
        DetRng { inner }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform integer in `[0, bound)`, rejecting draws at or above the
    /// largest multiple of `bound` that fits in 64 bits.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let rem = (u64::MAX % bound + 1) % bound;
        if rem == 0 {
            return self.next_u64() % bound;
        }
        let limit = u64::MAX - rem;
        loop {
            let x = self.next_u64();
            if x <= limit {
                return x % bound;
            }
        }
    }

    /// Uniform on `[0, 1)` with 53 bits of precision.
    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// The transposition choices of one Knuth shuffle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct ShuffleTrace {
    n: usize,
    choices: Vec<usize>,
}

impl TryFrom<Vec<usize>> for ShuffleTrace {
    type Error = ShuffleError;

    fn try_from(choices: Vec<usize>) -> Result<Self, Self::Error> {
        ShuffleTrace::new(choices.len() + 1, choices)
    }
}

impl From<ShuffleTrace> for Vec<usize> {
    fn from(trace: ShuffleTrace) -> Self {
        trace.choices
    }
}

impl ShuffleTrace {
    pub fn new(n: usize, choices: Vec<usize>) -> Result<Self, ShuffleError> {
        let expected = n.saturating_sub(1);
        if choices.len() != expected {
            return Err(ShuffleError::TraceLength {
                expected,
                found: choices.len(),
            });
        }
        for (index, &value) in choices.iter().enumerate() {
            let max = n - 1 - index;
            if value > max {
                return Err(ShuffleError::InvalidChoice { index, value, max });
            }
        }
        Ok(ShuffleTrace { n, choices })
    }

    /// Trace that leaves every sequence unchanged.
    pub fn identity(n: usize) -> Self {
        let choices = (0..n.saturating_sub(1)).map(|i| n - 1 - i).collect();
        ShuffleTrace { n, choices }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn choices(&self) -> &[usize] {
        &self.choices
    }

    /// Same trace with `choices[j]` replaced by `alt`.
    pub fn with_choice(&self, j: usize, alt: usize) -> Result<Self, ShuffleError> {
        let mut choices = self.choices.clone();
        let slot = choices
            .get_mut(j)
            .ok_or_else(|| ShuffleError::Index(format!("j = {j} but trace has {} choices", self.choices.len())))?;
        *slot = alt;
        ShuffleTrace::new(self.n, choices)
    }

    /// Applies the transpositions in place.
    pub fn apply_in_place<T>(&self, v: &mut [T]) -> Result<(), ShuffleError> {
        if v.len() != self.n {
            return Err(ShuffleError::LengthMismatch {
                expected: self.n,
                found: v.len(),
            });
        }
        for (i, &t) in self.choices.iter().enumerate() {
            v.swap(self.n - 1 - i, t);
        }
        Ok(())
    }
}

/// Draws `t_i` uniformly from `[0, n-1-i]` for `i = 0, .., n-2`.
pub fn sample_trace(n: usize, seed: Seed) -> ShuffleTrace {
    let mut rng = seed.rng();
    sample_trace_with(n, &mut rng)
}

pub fn sample_trace_with(n: usize, rng: &mut DetRng) -> ShuffleTrace {
    let choices = (0..n.saturating_sub(1))
        .map(|i| rng.below((n - i) as u64) as usize)
        .collect();
    ShuffleTrace { n, choices }
}

pub fn apply_trace<T: Clone>(v: &[T], trace: &ShuffleTrace) -> Result<Vec<T>, ShuffleError> {
    let mut out = v.to_vec();
    trace.apply_in_place(&mut out)?;
    Ok(out)
}

/// Hamming distance between the shuffle of `v` under `trace` and under the
/// same trace with `choices[j]` replaced by `alt`. Never exceeds 3.
pub fn trace_distance_bound_check<T: Clone + PartialEq>(
    v: &[T],
    trace: &ShuffleTrace,
    j: usize,
    alt: usize,
) -> Result<usize, ShuffleError> {
    let Some(&current) = trace.choices.get(j) else {
        return Err(ShuffleError::Index(format!(
            "j = {j} outside [0, {}]",
            trace.choices.len() as isize - 1
        )));
    };
    if alt == current {
        return Err(ShuffleError::Index(format!("alternative {alt} equals the original choice")));
    }
    let perturbed = trace.with_choice(j, alt)?;
    let a = apply_trace(v, trace)?;
    let b = apply_trace(v, &perturbed)?;
    Ok(a.iter().zip(&b).filter(|(x, y)| x != y).count())
}
