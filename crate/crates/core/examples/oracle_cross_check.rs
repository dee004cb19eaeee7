//! Compares the branch-and-bound solver with exhaustive enumeration on many
//! small random markets.

use mcs_auction::assign::solve_exact;
use mcs_auction::model::social_welfare;
use mcs_auction::oracle::brute_force_optimal;
use mcs_auction::simgen::tiny;

fn main() {
    let count = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200u64);
    let mut worst: f64 = 0.0;
    let mut explored = 0;
    for seed in 0..count {
        let inst = tiny(seed, 20);
        let oracle = brute_force_optimal(&inst).unwrap();
        explored += oracle.explored;
        worst = worst.max((social_welfare(&inst, &solve_exact(&inst)).unwrap() - oracle.welfare).abs());
    }
    println!("{count} markets, {explored} schedules enumerated, largest welfare gap {worst:.2e}");
}
