//! Difference systems of sets over the cyclic group `Z_n`.
//!
//! A q-ary DSS is a family of `q` pairwise disjoint subsets `Q_0, .., Q_{q-1}`
//! of `{0, .., n-1}`. Its *external differences* are the residues `a - b mod n`
//! with `a` and `b` taken from different sets, and its *index* is the smallest
//! number of times any nonzero residue occurs among them.
//!
//! Two independent routes compute the difference multiset: a direct `O(r^2)`
//! enumeration of cross-set pairs, and a transform route built from cyclic
//! autocorrelations of indicator vectors.

use std::fmt;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index reported for `n = 1`, where there are no nonzero residues to cover.
pub const UNBOUNDED_INDEX: u64 = u64::MAX;

/// Largest tolerated distance between a transform output and the nearest integer.
const ROUNDING_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DssError {
    #[error("element {element} appears in both set {first} and set {second}")]
    Overlap {
        element: usize,
        first: usize,
        second: usize,
    },
    #[error("element {element} is outside Z_{n}")]
    Range { element: usize, n: usize },
    #[error("expected {expected} sets, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("modulus must be positive")]
    ZeroModulus,
    #[error("domain error: {0}")]
    Domain(String),
}

/// A q-ary difference system of sets. Always valid once constructed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DssJson", into = "DssJson")]
pub struct Dss {
    n: usize,
    q: usize,
    sets: Vec<Vec<usize>>,
}

/// Wire form of a DSS: `{"n": 25, "q": 2, "sets": [[..], [..]]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DssJson {
    pub n: usize,
    pub q: usize,
    pub sets: Vec<Vec<usize>>,
}

impl TryFrom<DssJson> for Dss {
    type Error = DssError;

    fn try_from(raw: DssJson) -> Result<Self, Self::Error> {
        Dss::new(raw.n, raw.q, raw.sets)
    }
}

impl From<Dss> for DssJson {
    fn from(dss: Dss) -> Self {
        DssJson {
            n: dss.n,
            q: dss.q,
            sets: dss.sets,
        }
    }
}

/// Checks the structural DSS conditions on raw parts.
///
/// Succeeds iff there are exactly `q` sets, every element lies in `[0, n-1]`
/// and no element occurs twice (within a set or across sets).
pub fn validate(n: usize, q: usize, sets: &[Vec<usize>]) -> Result<(), DssError> {
    if n == 0 {
        return Err(DssError::ZeroModulus);
    }
    if q < 2 {
        return Err(DssError::Domain(format!("alphabet size q = {q} must be at least 2")));
    }
    if sets.len() != q {
        return Err(DssError::Arity {
            expected: q,
            found: sets.len(),
        });
    }
    let mut owner: Vec<Option<usize>> = vec![None; n];
    for (symbol, set) in sets.iter().enumerate() {
        for &element in set {
            if element >= n {
                return Err(DssError::Range { element, n });
            }
            if let Some(first) = owner[element] {
                return Err(DssError::Overlap {
                    element,
                    first,
                    second: symbol,
                });
            }
            owner[element] = Some(symbol);
        }
    }
    Ok(())
}

impl Dss {
    /// Validates and normalizes (each set sorted ascending).
    pub fn new(n: usize, q: usize, mut sets: Vec<Vec<usize>>) -> Result<Self, DssError> {
        validate(n, q, &sets)?;
        for set in &mut sets {
            set.sort_unstable();
        }
        Ok(Dss { n, q, sets })
    }

    /// Builds a DSS from a position labelling: `labels[i] = Some(s)` puts `i` in `Q_s`.
    pub fn from_labels(q: usize, labels: &[Option<usize>]) -> Result<Self, DssError> {
        let mut sets = vec![Vec::new(); q];
        for (pos, label) in labels.iter().enumerate() {
            if let Some(s) = *label {
                if s >= q {
                    return Err(DssError::Arity {
                        expected: q,
                        found: s + 1,
                    });
                }
                sets[s].push(pos);
            }
        }
        Dss::new(labels.len(), q, sets)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    /// Total number of marker positions, `r = sum |Q_i|`.
    pub fn redundancy(&self) -> usize {
        self.sets.iter().map(Vec::len).sum()
    }

    /// Number of ordered cross-set pairs, `r^2 - sum |Q_i|^2`.
    pub fn cross_pair_count(&self) -> u64 {
        let r = self.redundancy() as u64;
        let same: u64 = self.sets.iter().map(|s| (s.len() as u64).pow(2)).sum();
        r * r - same
    }

    /// Position-to-symbol map of length `n`.
    pub fn labels(&self) -> Vec<Option<usize>> {
        let mut labels = vec![None; self.n];
        for (s, set) in self.sets.iter().enumerate() {
            for &e in set {
                labels[e] = Some(s);
            }
        }
        labels
    }

    /// Every element shifted by `c` modulo `n`.
    pub fn translate(&self, c: usize) -> Dss {
        let sets = self
            .sets
            .iter()
            .map(|set| set.iter().map(|&e| (e + c) % self.n).collect())
            .collect();
        Dss::new(self.n, self.q, sets).expect("translation preserves validity")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("DSS serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

impl fmt::Display for Dss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DSS(n={}, q={}, r={})", self.n, self.q, self.redundancy())
    }
}

/// Multiplicities of the external differences.
///
/// `counts[t]` is the number of ordered cross-set pairs `(a, b)` with
/// `a - b = t mod n`. `counts[0]` is always zero because the sets are disjoint
/// and it never enters the index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DifferenceProfile {
    pub counts: Vec<u64>,
    pub index: u64,
}

impl DifferenceProfile {
    pub fn from_counts(counts: Vec<u64>) -> Self {
        let index = counts.iter().skip(1).copied().min().unwrap_or(UNBOUNDED_INDEX);
        DifferenceProfile { counts, index }
    }

    pub fn n(&self) -> usize {
        self.counts.len()
    }

    /// True when `n = 1` and the index is the unbounded sentinel.
    pub fn is_degenerate(&self) -> bool {
        self.index == UNBOUNDED_INDEX
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Smallest shift attaining the index, if any.
    pub fn argmin_shift(&self) -> Option<usize> {
        (1..self.counts.len()).find(|&t| self.counts[t] == self.index)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileMethod {
    #[default]
    Auto,
    Naive,
    Fast,
}

impl std::str::FromStr for ProfileMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(ProfileMethod::Auto),
            "naive" => Ok(ProfileMethod::Naive),
            "fast" => Ok(ProfileMethod::Fast),
            other => Err(format!("unknown method '{other}' (expected auto, naive or fast)")),
        }
    }
}

/// Direct enumeration of all ordered cross-set pairs.
pub fn difference_profile(dss: &Dss) -> DifferenceProfile {
    let n = dss.n;
    let mut counts = vec![0u64; n];
    for (i, qi) in dss.sets.iter().enumerate() {
        for (j, qj) in dss.sets.iter().enumerate() {
            if i == j {
                continue;
            }
            for &a in qi {
                for &b in qj {
                    counts[(a + n - b) % n] += 1;
                }
            }
        }
    }
    debug_assert_eq!(counts[0], 0);
    DifferenceProfile::from_counts(counts)
}

/// Transform route: autocorrelation of the all-markers indicator minus the
/// per-symbol autocorrelations, `q` forward transforms and one inverse.
///
/// Falls back to [`difference_profile`] if any output is further than
/// `1e-6` from an integer.
pub fn difference_profile_fast(dss: &Dss) -> DifferenceProfile {
    match correlation_counts(dss) {
        Some(counts) => {
            assert_eq!(counts[0], 0, "disjoint sets cannot share a shift-0 pair");
            DifferenceProfile::from_counts(counts)
        }
        None => {
            log::warn!("transform round-off above tolerance for {dss}; using direct enumeration");
            difference_profile(dss)
        }
    }
}

/// Transform route without the fallback; `None` if round-off exceeded the tolerance.
pub fn difference_profile_fast_checked(dss: &Dss) -> Option<DifferenceProfile> {
    correlation_counts(dss).map(DifferenceProfile::from_counts)
}

fn correlation_counts(dss: &Dss) -> Option<Vec<u64>> {
    let n = dss.n;
    if dss.redundancy() == 0 {
        return Some(vec![0; n]);
    }
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let mut scratch = vec![Complex::new(0.0, 0.0); forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len())];

    let mut all = vec![Complex::new(0.0, 0.0); n];
    let mut own_power = vec![0.0f64; n];
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    for set in dss.sets.iter().filter(|s| !s.is_empty()) {
        buf.iter_mut().for_each(|c| *c = Complex::new(0.0, 0.0));
        for &e in set {
            buf[e].re = 1.0;
        }
        forward.process_with_scratch(&mut buf, &mut scratch);
        for ((acc, power), x) in all.iter_mut().zip(own_power.iter_mut()).zip(&buf) {
            *acc += *x;
            *power += x.norm_sqr();
        }
    }
    let mut spectrum: Vec<Complex<f64>> = all
        .iter()
        .zip(&own_power)
        .map(|(x, p)| Complex::new(x.norm_sqr() - p, 0.0))
        .collect();
    inverse.process_with_scratch(&mut spectrum, &mut scratch);
    round_counts(&spectrum, n)
}

fn round_counts(values: &[Complex<f64>], n: usize) -> Option<Vec<u64>> {
    let scale = 1.0 / n as f64;
    values
        .iter()
        .map(|v| {
            let x = v.re * scale;
            let rounded = x.round();
            if (x - rounded).abs() < ROUNDING_TOLERANCE && rounded >= 0.0 {
                Some(rounded as u64)
            } else {
                None
            }
        })
        .collect()
}

/// Whether the automatic method picks direct enumeration: `r^2 <= 16 q n log2(n)`.
pub fn prefers_naive(dss: &Dss) -> bool {
    let r = dss.redundancy() as f64;
    let n = dss.n as f64;
    r * r <= 16.0 * dss.q as f64 * n * n.log2().max(1.0)
}

pub fn difference_profile_with(dss: &Dss, method: ProfileMethod) -> DifferenceProfile {
    match method {
        ProfileMethod::Naive => difference_profile(dss),
        ProfileMethod::Fast => difference_profile_fast(dss),
        ProfileMethod::Auto if prefers_naive(dss) => difference_profile(dss),
        ProfileMethod::Auto => difference_profile_fast(dss),
    }
}

/// Lower bound on redundancy for any q-ary DSS over `Z_n` of index `rho`:
/// `sqrt(q rho (n-1) / (q-1))`.
pub fn levenshtein_bound(n: usize, q: usize, rho: u64) -> Result<f64, DssError> {
    if q < 2 {
        return Err(DssError::Domain(format!("alphabet size q = {q} must be at least 2")));
    }
    if n == 0 {
        return Err(DssError::ZeroModulus);
    }
    let numer = q as f64 * rho as f64 * (n - 1) as f64;
    Ok((numer / (q - 1) as f64).sqrt())
}

/// Whether `r^2 (q-1) >= q rho (n-1)`, in exact integer arithmetic.
pub fn satisfies_levenshtein(n: usize, q: usize, r: usize, rho: u64) -> bool {
    let lhs = (r as u128).pow(2) * (q as u128 - 1);
    let rhs = q as u128 * rho as u128 * (n as u128 - 1);
    lhs >= rhs
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DssReport {
    pub n: usize,
    pub q: usize,
    pub r: usize,
    pub rho: u64,
    pub levenshtein_bound: f64,
    pub meets_bound_with_equality: bool,
    pub redundancy_rate: f64,
    pub relative_index: f64,
    pub degenerate: bool,
}

pub fn report(dss: &Dss) -> DssReport {
    report_with(dss, ProfileMethod::Auto)
}

pub fn report_with(dss: &Dss, method: ProfileMethod) -> DssReport {
    let profile = difference_profile_with(dss, method);
    report_from_profile(dss, &profile)
}

pub fn report_from_profile(dss: &Dss, profile: &DifferenceProfile) -> DssReport {
    let (n, q, r) = (dss.n, dss.q, dss.redundancy());
    let degenerate = profile.is_degenerate();
    // n = 1 makes (n-1) vanish, so the bound is evaluated at rho = 0 there
    let rho_for_bound = if degenerate { 0 } else { profile.index };
    assert!(
        satisfies_levenshtein(n, q, r, rho_for_bound),
        "{dss} with index {} violates the Levenshtein bound",
        profile.index
    );
    let bound = levenshtein_bound(n, q, rho_for_bound).expect("q >= 2 for a valid DSS");
    let equality = (r as u128).pow(2) * (q as u128 - 1)
        == q as u128 * rho_for_bound as u128 * (n as u128 - 1);
    DssReport {
        n,
        q,
        r,
        rho: profile.index,
        levenshtein_bound: bound,
        meets_bound_with_equality: equality,
        redundancy_rate: r as f64 / n as f64,
        relative_index: if degenerate { f64::INFINITY } else { profile.index as f64 / n as f64 },
        degenerate,
    }
}
