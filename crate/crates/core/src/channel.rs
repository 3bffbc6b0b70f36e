//! Seeded q-ary substitution channel.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::shuffle::{DetRng, Seed};
use crate::Symbol;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum NoiseMode {
    /// Each symbol independently substituted with probability `rate`.
    IidRate { rate: f64 },
    /// Exactly `budget` substitutions in every disjoint block of `window`
    /// symbols (a trailing partial block gets `min(budget, len)`).
    ExactPerWindow { budget: usize, window: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    #[serde(flatten)]
    pub mode: NoiseMode,
    pub seed: Seed,
}

impl NoiseSpec {
    pub fn iid(rate: f64, seed: Seed) -> Self {
        NoiseSpec {
            mode: NoiseMode::IidRate { rate },
            seed,
        }
    }

    pub fn exact(budget: usize, window: usize, seed: Seed) -> Self {
        NoiseSpec {
            mode: NoiseMode::ExactPerWindow { budget, window },
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corrupted {
    pub symbols: Vec<Symbol>,
    /// Ascending positions that were substituted.
    pub error_positions: Vec<usize>,
}

/// Uniform over the `q - 1` symbols other than `original`.
fn substitute(original: Symbol, q: usize, rng: &mut DetRng) -> Symbol {
    let pick = rng.below(q as u64 - 1) as Symbol;
    if pick >= original {
        pick + 1
    } else {
        pick
    }
}

pub fn corrupt(stream: &[Symbol], q: usize, spec: &NoiseSpec) -> Result<Corrupted, ChannelError> {
    if q < 2 {
        return Err(ChannelError::Domain(format!("alphabet size q = {q} must be at least 2")));
    }
    if let Some(pos) = stream.iter().position(|&s| s as usize >= q) {
        return Err(ChannelError::Domain(format!(
            "symbol {} at position {pos} is outside the alphabet of size {q}",
            stream[pos]
        )));
    }
    let mut rng = spec.seed.rng();
    let mut symbols = stream.to_vec();
    let mut error_positions = Vec::new();
    match spec.mode {
        NoiseMode::IidRate { rate } => {
            if !(0.0..=1.0).contains(&rate) {
                return Err(ChannelError::Domain(format!("rate {rate} must lie in [0, 1]")));
            }
            for (i, s) in symbols.iter_mut().enumerate() {
                if rng.unit_f64() < rate {
                    *s = substitute(*s, q, &mut rng);
                    error_positions.push(i);
                }
            }
        }
        NoiseMode::ExactPerWindow { budget, window } => {
            if window == 0 {
                return Err(ChannelError::Domain("window length must be positive".into()));
            }
            if budget > window {
                return Err(ChannelError::Domain(format!("budget {budget} exceeds window length {window}")));
            }
            let mut slots: Vec<usize> = Vec::with_capacity(window);
            for start in (0..symbols.len()).step_by(window) {
                let len = window.min(symbols.len() - start);
                let take = budget.min(len);
                slots.clear();
                slots.extend(0..len);
                // partial Fisher-Yates: the first `take` slots become a uniform sample
                for i in 0..take {
                    let j = i + rng.below((len - i) as u64) as usize;
                    slots.swap(i, j);
                }
                let mut chosen: Vec<usize> = slots[..take].iter().map(|&o| start + o).collect();
                chosen.sort_unstable();
                for &pos in &chosen {
                    symbols[pos] = substitute(symbols[pos], q, &mut rng);
                }
                error_positions.extend(chosen);
            }
        }
    }
    Ok(Corrupted {
        symbols,
        error_positions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(len: usize, q: usize) -> Vec<Symbol> {
        (0..len).map(|i| (i * 7 % q) as Symbol).collect()
    }

    #[test]
    fn zero_rate_is_identity() {
        let s = stream(500, 3);
        let out = corrupt(&s, 3, &NoiseSpec::iid(0.0, Seed::new(1))).unwrap();
        assert_eq!(out.symbols, s);
        assert!(out.error_positions.is_empty());
    }

    #[test]
    fn full_rate_changes_everything() {
        let s = stream(200, 4);
        let out = corrupt(&s, 4, &NoiseSpec::iid(1.0, Seed::new(1))).unwrap();
        assert_eq!(out.error_positions.len(), 200);
        assert!(out.symbols.iter().zip(&s).all(|(a, b)| a != b));
    }

    #[test]
    fn exact_budget_per_half() {
        let s = stream(50, 2);
        let out = corrupt(&s, 2, &NoiseSpec::exact(1, 25, Seed::new(9))).unwrap();
        assert_eq!(out.error_positions.len(), 2);
        assert!(out.error_positions[0] < 25 && out.error_positions[1] >= 25);
    }

    #[test]
    fn exact_mode_partial_block() {
        let s = stream(27, 5);
        let out = corrupt(&s, 5, &NoiseSpec::exact(3, 25, Seed::new(2))).unwrap();
        assert_eq!(out.error_positions.len(), 5);
        assert_eq!(out.error_positions.iter().filter(|&&p| p >= 25).count(), 2);
    }

    #[test]
    fn substitutions_differ_from_original() {
        let s = stream(1000, 3);
        let out = corrupt(&s, 3, &NoiseSpec::exact(4, 10, Seed::new(4))).unwrap();
        for &p in &out.error_positions {
            assert_ne!(out.symbols[p], s[p]);
        }
        let changed = out.symbols.iter().zip(&s).filter(|(a, b)| a != b).count();
        assert_eq!(changed, out.error_positions.len());
    }

    #[test]
    fn deterministic() {
        let s = stream(300, 2);
        let spec = NoiseSpec::iid(0.2, Seed::new(77));
        assert_eq!(corrupt(&s, 2, &spec).unwrap(), corrupt(&s, 2, &spec).unwrap());
    }

    #[test]
    fn domain_errors() {
        let s = stream(10, 2);
        assert!(corrupt(&s, 2, &NoiseSpec::iid(1.5, Seed::new(0))).is_err());
        assert!(corrupt(&s, 2, &NoiseSpec::iid(-0.1, Seed::new(0))).is_err());
        assert!(corrupt(&s, 1, &NoiseSpec::iid(0.1, Seed::new(0))).is_err());
        assert!(corrupt(&s, 2, &NoiseSpec::exact(3, 2, Seed::new(0))).is_err());
        assert!(corrupt(&s, 2, &NoiseSpec::exact(0, 0, Seed::new(0))).is_err());
        assert!(corrupt(&[0, 2], 2, &NoiseSpec::iid(0.1, Seed::new(0))).is_err());
    }

    #[test]
    fn spec_json() {
        let spec = NoiseSpec::exact(1, 25, Seed::new(3));
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(
            json,
            r#"{"mode":"exact_per_window","budget":1,"window":25,"seed":{"master_seed":3,"stream_index":0}}"#
        );
        assert_eq!(serde_json::from_str::<NoiseSpec>(&json).unwrap(), spec);
    }
}
