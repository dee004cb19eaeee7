//! How a uniform reserve price changes who stays in the market and what the
//! platform keeps.

use mcs_auction::model::Instance;
use mcs_auction::vcg::{run_reserve_auction, ReservePrices};

fn main() {
    let inst = Instance::from_json(include_str!("../tests/data/worked_example.json")).unwrap();
    println!("{:>5} {:>8} {:>9} {:>8} {:>8}  participants", "pi", "welfare", "payments", "rewards", "budget");
    for pi in [0.0, 0.3, 0.5, 0.55, 0.7] {
        let out = run_reserve_auction(&inst, &ReservePrices::uniform(inst.num_items(), pi).unwrap()).unwrap();
        println!(
            "{pi:>5.2} {:>8.3} {:>9.3} {:>8.3} {:>8.3}  {:?}",
            out.welfare,
            out.total_payments(),
            out.total_rewards(),
            out.platform_budget,
            out.participants
        );
    }
}
