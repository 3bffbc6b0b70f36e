//! Difference systems of sets (DSSes) for frame synchronization.
//!
//! - [`dss`]: the DSS data model, exact index computation (direct and
//!   transform-based) and the Levenshtein redundancy bound.
//! - [`shuffle`]: seeded Knuth shuffle with replayable transposition traces.
//! - [`constructor`]: randomized linear-time construction, the exact expected
//!   index and its concentration bound, retry and Monte-Carlo drivers.
//! - [`codec`]: template sequences and self-synchronizing codes over a
//!   pluggable payload code ([`ecc`]).
//! - [`channel`]: seeded q-ary substitution noise.
//! - [`pds`]: phase detection sequences built from a self-synchronizing code.

pub mod channel;
pub mod codec;
pub mod constructor;
pub mod dss;
pub mod ecc;
pub mod pds;
pub mod shuffle;
pub mod text;

/// A q-ary symbol, `0 <= s < q`.
pub type Symbol = u32;

pub use codec::{SyncCode, SyncCodeConfig, TemplateSequence};
pub use constructor::{ConstructionConfig, ConstructionOutcome};
pub use dss::{DifferenceProfile, Dss, DssReport};
pub use pds::Pds;
pub use shuffle::{Seed, ShuffleTrace};
