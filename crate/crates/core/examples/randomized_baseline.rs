//! The randomized baseline on a small generated market: fractional VCG,
//! its lottery over integral allocations, and a few draws.

use mcs_auction::harness::compare_params;
use mcs_auction::randomized::{decompose, enumerate_allocations, fractional_vcg, realize};
use mcs_auction::simgen::generate;
use mcs_auction::vcg::run_double_auction;

fn main() {
    // Seed 8 has a fractional relaxation, so the lottery mixes several allocations.
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    let inst = generate(&compare_params().with_seed(seed)).unwrap();
    let frac = fractional_vcg(&inst);
    let allocations = enumerate_allocations(&inst).unwrap();
    println!("{} feasible integral allocations, LP objective {:.4}", allocations.len(), frac.objective());

    match decompose(&inst, &frac, &allocations) {
        Ok(dec) => {
            println!("alpha {:.4} beta {:.4}, {} allocations in the lottery", dec.alpha, dec.beta, dec.support.len());
            println!("expected welfare {:.4}", dec.expected_welfare(&frac));
            for draw in 0..3 {
                let r = realize(&inst, &dec, &frac, draw);
                println!("draw {draw}: allocation {} user payments {:.3?}", r.index, r.user_payments);
            }
        }
        Err(e) => println!("no decomposition: {e}"),
    }
    println!("exact double auction welfare {:.4}", run_double_auction(&inst).welfare);
}
