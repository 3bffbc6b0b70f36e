//! Randomized linear-time DSS construction.
//!
//! Start from consecutive blocks `Q_0 = {0, .., s_0 - 1}`, `Q_1 = {s_0, ..}`,
//! with balanced sizes, Knuth-shuffle `(0, 1, .., n-1)` into `(v_0, .., v_{n-1})`
//! and replace every `Q_i` by `{v_j : j in Q_i}`. The index of the result
//! concentrates around
//!
//! ```text
//! E(Y_t) = [b(a+1)(r-a-1) + (q-b)a(r-a)] / (n-1),   r = aq + b, 0 <= b < q
//! ```
//!
//! for every shift `t`, with lower-tail deviations of `n^(2/3)` having
//! probability at most `exp(-2 n^(4/3) / (36 (n-1)))` per shift.

use std::collections::BTreeMap;

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dss::{self, Dss, ProfileMethod};
use crate::shuffle::{sample_trace, Seed, ShuffleTrace};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstructError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("redundancy {r} is outside [0, {n}]")]
    Range { r: usize, n: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("target index {target} not reached after {attempts} attempts (best index {best_index})")]
    TargetUnreached {
        target: u64,
        attempts: u64,
        best_index: u64,
        best: Box<ConstructionOutcome>,
    },
}

/// Attempt budget when none is given. At `n = 25, q = 2, r = 12` about one
/// shuffle in 3 * 10^5 reaches the optimal index 3.
pub const DEFAULT_MAX_ATTEMPTS: u64 = 1_000_000;

/// How many marker positions to place.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Redundancy {
    /// `r = floor(n p)` with `0 < p < 1`.
    Fraction(f64),
    /// `r` given directly.
    Count(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstructionConfig {
    pub n: usize,
    pub q: usize,
    pub redundancy: Redundancy,
    pub target_index: Option<u64>,
    pub max_attempts: u64,
    pub seed: Seed,
    pub method: ProfileMethod,
}

impl ConstructionConfig {
    pub fn new(n: usize, q: usize, p: f64, seed: Seed) -> Self {
        ConstructionConfig {
            n,
            q,
            redundancy: Redundancy::Fraction(p),
            target_index: None,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
            seed,
            method: ProfileMethod::Auto,
        }
    }

    pub fn with_redundancy(n: usize, q: usize, r: usize, seed: Seed) -> Self {
        ConstructionConfig {
            redundancy: Redundancy::Count(r),
            ..ConstructionConfig::new(n, q, 0.5, seed)
        }
    }

    pub fn target(mut self, target: u64) -> Self {
        self.target_index = Some(target);
        self
    }

    pub fn attempts(mut self, max_attempts: u64) -> Self {
        self.max_attempts = max_attempts;
        self
    }

    /// `r`, after checking every invariant of the configuration.
    pub fn validated_redundancy(&self) -> Result<usize, ConstructError> {
        if self.n == 0 {
            return Err(ConstructError::Config("n must be positive".into()));
        }
        if self.q < 2 {
            return Err(ConstructError::Config(format!("q = {} must be at least 2", self.q)));
        }
        if self.max_attempts == 0 {
            return Err(ConstructError::Config("max_attempts must be positive".into()));
        }
        let r = match self.redundancy {
            Redundancy::Fraction(p) => {
                if !(p > 0.0 && p < 1.0) {
                    return Err(ConstructError::Config(format!("p = {p} must lie in (0, 1)")));
                }
                floor_product(self.n, p)
            }
            Redundancy::Count(r) => r,
        };
        if r == 0 || r > self.n {
            return Err(ConstructError::Config(format!(
                "redundancy r = {r} must lie in [1, {}]",
                self.n
            )));
        }
        if let Some(target) = self.target_index {
            if target > self.n as u64 {
                return Err(ConstructError::Config(format!(
                    "target index {target} exceeds n = {}",
                    self.n
                )));
            }
        }
        Ok(r)
    }

    /// Marker density `r / n` (equal to `p` up to flooring).
    fn density(&self, r: usize) -> f64 {
        match self.redundancy {
            Redundancy::Fraction(p) => p,
            Redundancy::Count(_) => r as f64 / self.n as f64,
        }
    }
}

/// `floor(n p)`, snapping products within 1e-9 of an integer upward so that
/// e.g. `p = 0.29, n = 100` yields 29.
fn floor_product(n: usize, p: f64) -> usize {
    let x = n as f64 * p;
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-9 * x.max(1.0) {
        nearest as usize
    } else {
        x.floor() as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstructionOutcome {
    pub dss: Dss,
    pub achieved_index: u64,
    pub attempts_used: u64,
    pub trace_seed: Seed,
    /// Exact `E(Y_t)`, identical for every shift.
    pub expectation: f64,
    /// `n^(2/3)`, the lower-tail slack.
    pub predicted_slack: f64,
    pub warnings: Vec<String>,
}

impl ConstructionOutcome {
    /// `expectation - slack`, the level each `Y_t` exceeds with high probability.
    pub fn predicted_floor(&self) -> f64 {
        self.expectation - self.predicted_slack
    }
}

/// Set sizes for `q` symbols sharing `r` markers: `a + 1` for the first `b`
/// symbols and `a` for the rest, where `r = aq + b`.
pub fn balanced_allocation(n: usize, q: usize, r: usize) -> Result<Vec<usize>, ConstructError> {
    if q < 2 {
        return Err(ConstructError::Domain(format!("q = {q} must be at least 2")));
    }
    if r > n {
        return Err(ConstructError::Range { r, n });
    }
    let (a, b) = r.div_rem(&q);
    Ok((0..q).map(|j| if j < b { a + 1 } else { a }).collect())
}

/// Exact `E(Y_t)` as a reduced fraction `(numerator, denominator)`.
pub fn expected_index_exact(n: usize, q: usize, r: usize) -> Result<(u128, u128), ConstructError> {
    if n < 2 {
        return Err(ConstructError::Domain(format!("n = {n} must be at least 2")));
    }
    let sizes = balanced_allocation(n, q, r)?;
    // n * Pr(h = 1) = n * sum_j s_j (r - s_j) / (n (n - 1))
    let numer: u128 = sizes
        .iter()
        .map(|&s| s as u128 * (r - s) as u128)
        .sum();
    let denom = (n - 1) as u128;
    let g = numer.gcd(&denom);
    Ok((numer / g, denom / g))
}

pub fn expected_index(n: usize, q: usize, r: usize) -> Result<f64, ConstructError> {
    let (num, den) = expected_index_exact(n, q, r)?;
    Ok(num as f64 / den as f64)
}

/// McDiarmid lower tail for one shift with bounded differences `c_i = 6`
/// over the `n - 1` shuffle choices: `exp(-2 dev^2 / (36 (n - 1)))`.
pub fn mcdiarmid_tail(n: usize, deviation: f64) -> Result<f64, ConstructError> {
    if n < 2 {
        return Err(ConstructError::Domain(format!("n = {n} must be at least 2")));
    }
    if !deviation.is_finite() || deviation <= 0.0 {
        return Err(ConstructError::Domain(format!("deviation {deviation} must be positive")));
    }
    Ok((-2.0 * deviation * deviation / (36.0 * (n - 1) as f64)).exp())
}

/// Union bound over all `n - 1` shifts, `(n - 1) * tail`, capped at 1.
pub fn union_tail(n: usize, deviation: f64) -> Result<f64, ConstructError> {
    Ok(((n - 1) as f64 * mcdiarmid_tail(n, deviation)?).min(1.0))
}

/// Marker fraction aimed at relative index `delta`: `sqrt(q delta / (q - 1))`.
pub fn p_for_relative_index(q: usize, delta: f64) -> Result<f64, ConstructError> {
    if q < 2 {
        return Err(ConstructError::Domain(format!("q = {q} must be at least 2")));
    }
    let ceiling = 1.0 - 1.0 / q as f64;
    if !(delta > 0.0 && delta < ceiling) {
        return Err(ConstructError::Domain(format!(
            "relative index {delta} must lie in (0, {ceiling})"
        )));
    }
    Ok((q as f64 * delta / (q - 1) as f64).sqrt())
}

/// `ceil(E(Y_t) - n^(2/3))`, clamped at zero.
pub fn default_target(n: usize, q: usize, r: usize) -> Result<u64, ConstructError> {
    let floor = expected_index(n, q, r)? - (n as f64).powf(2.0 / 3.0);
    Ok(floor.ceil().max(0.0) as u64)
}

/// The shuffled DSS for one trace, without verification.
pub fn dss_from_trace(n: usize, q: usize, r: usize, trace: &ShuffleTrace) -> Result<Dss, ConstructError> {
    let sizes = balanced_allocation(n, q, r)?;
    let mut v: Vec<usize> = (0..n).collect();
    trace
        .apply_in_place(&mut v)
        .map_err(|e| ConstructError::Config(e.to_string()))?;
    let mut sets = Vec::with_capacity(q);
    let mut start = 0;
    for size in sizes {
        sets.push(v[start..start + size].to_vec());
        start += size;
    }
    Dss::new(n, q, sets).map_err(|e| ConstructError::Config(e.to_string()))
}

/// Shuffle and mapping only; the linear-time part of the construction.
pub fn shuffle_construct(n: usize, q: usize, r: usize, seed: Seed) -> Result<Dss, ConstructError> {
    dss_from_trace(n, q, r, &sample_trace(n, seed))
}

pub fn construct_once(config: &ConstructionConfig) -> Result<ConstructionOutcome, ConstructError> {
    let r = config.validated_redundancy()?;
    attempt(config, r, config.seed)
}

fn attempt(config: &ConstructionConfig, r: usize, seed: Seed) -> Result<ConstructionOutcome, ConstructError> {
    let (n, q) = (config.n, config.q);
    let mut warnings = Vec::new();
    if r < q {
        let msg = format!("r = {r} < q = {q}: {} marker set(s) will be empty", q - r);
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let dss = shuffle_construct(n, q, r, seed)?;
    let profile = dss::difference_profile_with(&dss, config.method);
    let achieved_index = if profile.is_degenerate() { 0 } else { profile.index };
    debug_assert!(dss::satisfies_levenshtein(n, q, r, achieved_index));
    let expectation = if n >= 2 { expected_index(n, q, r)? } else { 0.0 };
    Ok(ConstructionOutcome {
        dss,
        achieved_index,
        attempts_used: 1,
        trace_seed: seed,
        expectation,
        predicted_slack: (n as f64).powf(2.0 / 3.0),
        warnings,
    })
}

/// Repeats the construction on substreams `(master_seed, attempt)` until the
/// index reaches the target or the attempt budget runs out.
///
/// Targets ruled out by the Levenshtein bound stop after a single attempt.
pub fn construct_with_target(config: &ConstructionConfig) -> Result<ConstructionOutcome, ConstructError> {
    let r = config.validated_redundancy()?;
    let target = match config.target_index {
        Some(t) => t,
        None => default_target(config.n, config.q, r)?,
    };
    let feasible = dss::satisfies_levenshtein(config.n, config.q, r, target);
    let budget = if feasible { config.max_attempts } else { 1 };

    let mut best: Option<ConstructionOutcome> = None;
    for k in 0..budget {
        let seed = config.seed.with_stream(k);
        let mut outcome = attempt(config, r, seed)?;
        outcome.attempts_used = k + 1;
        if outcome.achieved_index >= target {
            return Ok(outcome);
        }
        if best.as_ref().is_none_or(|b| outcome.achieved_index > b.achieved_index) {
            best = Some(outcome);
        }
    }
    let mut best = best.expect("at least one attempt runs");
    let attempts = budget;
    best.attempts_used = attempts;
    Err(ConstructError::TargetUnreached {
        target,
        attempts,
        best_index: best.achieved_index,
        best: Box::new(best),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: Seed,
    pub achieved_index: u64,
    pub expectation: f64,
    pub ratio: f64,
    /// `Y_1`, the external-difference count at shift 1.
    pub shift_one: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexStatistics {
    pub n: usize,
    pub q: usize,
    pub r: usize,
    pub p: f64,
    pub trials: u64,
    pub min: u64,
    pub median: f64,
    pub mean: f64,
    /// `n (1 - 1/q) p^2`.
    pub scale: f64,
    pub min_ratio: f64,
    pub median_ratio: f64,
    pub mean_ratio: f64,
    pub expectation: f64,
    pub mean_shift_one: f64,
    pub shift_one_std_error: f64,
    pub histogram: BTreeMap<u64, u64>,
    pub records: Vec<TrialRecord>,
}

impl IndexStatistics {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,seed,achieved_index,expectation,ratio\n");
        for rec in &self.records {
            out.push_str(&format!(
                "{},{}:{},{},{},{}\n",
                rec.trial, rec.seed.master_seed, rec.seed.stream_index, rec.achieved_index, rec.expectation, rec.ratio
            ));
        }
        out
    }
}

fn median(sorted: &[u64]) -> f64 {
    let m = sorted.len();
    if m % 2 == 1 {
        sorted[m / 2] as f64
    } else {
        (sorted[m / 2 - 1] + sorted[m / 2]) as f64 / 2.0
    }
}

/// One construction per trial on substream `trial`, aggregated by trial index.
pub fn min_index_statistics(
    n: usize,
    q: usize,
    p: f64,
    trials: u64,
    seed: Seed,
) -> Result<IndexStatistics, ConstructError> {
    if trials == 0 {
        return Err(ConstructError::Config("trials must be positive".into()));
    }
    let config = ConstructionConfig::new(n, q, p, seed);
    let r = config.validated_redundancy()?;
    if n < 2 {
        return Err(ConstructError::Domain("statistics need n >= 2".into()));
    }
    let expectation = expected_index(n, q, r)?;
    let density = config.density(r);
    let scale = n as f64 * (1.0 - 1.0 / q as f64) * density * density;

    let records: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let trial_seed = seed.with_stream(trial);
            let dss = shuffle_construct(n, q, r, trial_seed)?;
            let profile = dss::difference_profile_with(&dss, config.method);
            Ok(TrialRecord {
                trial,
                seed: trial_seed,
                achieved_index: profile.index,
                expectation,
                ratio: profile.index as f64 / scale,
                shift_one: profile.counts[1],
            })
        })
        .collect::<Result<_, ConstructError>>()?;

    let mut indices: Vec<u64> = records.iter().map(|r| r.achieved_index).collect();
    indices.sort_unstable();
    let mut histogram = BTreeMap::new();
    for &i in &indices {
        *histogram.entry(i).or_insert(0) += 1;
    }
    let count = trials as f64;
    let mean = indices.iter().sum::<u64>() as f64 / count;
    let med = median(&indices);

    let ys: Vec<f64> = records.iter().map(|r| r.shift_one as f64).collect();
    let mean_y = ys.iter().sum::<f64>() / count;
    let std_error = if trials > 1 {
        let var = ys.iter().map(|y| (y - mean_y).powi(2)).sum::<f64>() / (count - 1.0);
        (var / count).sqrt()
    } else {
        0.0
    };

    Ok(IndexStatistics {
        n,
        q,
        r,
        p,
        trials,
        min: indices[0],
        median: med,
        mean,
        scale,
        min_ratio: indices[0] as f64 / scale,
        median_ratio: med / scale,
        mean_ratio: mean / scale,
        expectation,
        mean_shift_one: mean_y,
        shift_one_std_error: std_error,
        histogram,
        records,
    })
}
