//! Sweeps a uniform reserve price and reports where the platform breaks even.

use mcs_auction::harness::{reserve_sweep, ReserveSweepConfig};

fn main() {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let report = reserve_sweep(&ReserveSweepConfig { trials, ..Default::default() }).unwrap();
    println!("{:>4} {:>9} {:>9} {:>9} {:>9}", "pi", "welfare", "payments", "rewards", "budget");
    for s in &report.summary {
        println!(
            "{:>4.1} {:>9.3} {:>9.3} {:>9.3} {:>9.3}",
            s.pi, s.welfare.mean, s.total_payments.mean, s.total_rewards.mean, s.platform_budget.mean
        );
    }
    match report.balancing_pi {
        Some(pi) => println!("smallest price with a nonnegative mean budget: {pi}"),
        None => println!("no price on the grid balances the budget"),
    }
}
