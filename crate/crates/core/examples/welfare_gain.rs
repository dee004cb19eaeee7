//! Optimal welfare with and without data reuse as the number of items grows.
//! Pass a trial count as the first argument (default 50).

use mcs_auction::harness::{welfare_gain_experiment, WelfareGainConfig};

fn main() {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let report = welfare_gain_experiment(&WelfareGainConfig { trials, ..Default::default() }).unwrap();
    println!("{:>3} {:>12} {:>12} {:>14} {:>15}", "K", "reuse", "no reuse", "mean gain %", "gain of means %");
    for s in &report.summary {
        println!(
            "{:>3} {:>12.3} {:>12.3} {:>14.1} {:>15.1}",
            s.k,
            s.welfare_reuse.mean,
            s.welfare_noreuse.mean,
            s.gain_percent.mean,
            s.gain_of_means_percent.unwrap_or(f64::NAN)
        );
    }
}
