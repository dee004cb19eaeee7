//! Exact double auction against the randomized baseline on small markets.

use mcs_auction::harness::{compare_randomized, CompareConfig};

fn main() {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let report = compare_randomized(&CompareConfig { trials, ..Default::default() }).unwrap();
    println!("{}", serde_json::to_string_pretty(&report.summary).unwrap());
}
