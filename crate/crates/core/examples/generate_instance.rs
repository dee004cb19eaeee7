//! Generates a seeded market, prints its shape and what splitting shared
//! items into per-task copies does to it.

use mcs_auction::assign::solve_exact;
use mcs_auction::model::social_welfare;
use mcs_auction::simgen::{generate, no_reuse_transform, GenParams};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let inst = generate(&GenParams::default().with_items(10).with_seed(seed)).unwrap();
    let split = no_reuse_transform(&inst);
    let mean_cap = inst.users().iter().map(|u| u.capability().len()).sum::<usize>() as f64 / inst.num_users() as f64;
    println!("{} users, {} tasks, {} items, {} schedulable pairs", inst.num_users(), inst.num_tasks(), inst.num_items(), inst.num_pairs());
    println!("users sense {mean_cap:.1} items on average");
    println!("without reuse the market has {} items", split.num_items());
    let w = |i| social_welfare(i, &solve_exact(i)).unwrap();
    println!("optimal welfare {:.3} with reuse, {:.3} without", w(&inst), w(&split));
}
