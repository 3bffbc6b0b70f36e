//! Pilot runs behind the pinned Monte-Carlo thresholds in the acceptance suite.
//!
//! `cargo run --release -p dss-sync --example pilot`

use std::time::Instant;

use dss_sync::constructor::{self, ConstructionConfig};
use dss_sync::dss;
use dss_sync::shuffle::Seed;

/// Master seed shared with the acceptance suite.
const CONCENTRATION_SEED: u64 = 20_240_601;

fn main() {
    println!("median ratio of min_t Y_t to n(1-1/q)p^2, q = 2, p = 0.5, 20 trials");
    for n in [512usize, 2048, 8192] {
        let stats = constructor::min_index_statistics(n, 2, 0.5, 20, Seed::new(CONCENTRATION_SEED)).unwrap();
        println!(
            "n = {n:5}  median ratio = {:.6}  min = {}  median = {}  expectation = {:.3}",
            stats.median_ratio, stats.min, stats.median, stats.expectation
        );
    }

    let stats = constructor::min_index_statistics(25, 2, 0.48, 10_000, Seed::new(CONCENTRATION_SEED)).unwrap();
    println!(
        "n = 25: mean Y_1 = {:.4} +- {:.4}, index histogram {:?}",
        stats.mean_shift_one, stats.shift_one_std_error, stats.histogram
    );

    let n = 1 << 17;
    let config = ConstructionConfig::new(n, 4, 0.3, Seed::new(1));
    let start = Instant::now();
    let out = constructor::construct_once(&ConstructionConfig {
        method: dss::ProfileMethod::Fast,
        ..config
    })
    .unwrap();
    println!(
        "n = 2^17, q = 4, p = 0.3: index {} (expectation {:.1}) in {:?}",
        out.achieved_index,
        out.expectation,
        start.elapsed()
    );
}
