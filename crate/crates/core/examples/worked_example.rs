//! One user senses an item that two tasks share. The VCG double auction
//! pays the user more than the tasks are charged, so the platform runs a
//! deficit.

use mcs_auction::model::Instance;
use mcs_auction::vcg::run_double_auction;

fn main() {
    let inst = Instance::from_json(include_str!("../tests/data/worked_example.json")).unwrap();
    let out = run_double_auction(&inst);
    println!("welfare         {:.3}", out.welfare);
    println!("task payments   {:?}", out.payments.iter().map(|p| format!("{:.3}", p.abs())).collect::<Vec<_>>());
    println!("user reward     {:.3}", out.rewards[0]);
    println!("platform budget {:.3}", out.platform_budget);
}
