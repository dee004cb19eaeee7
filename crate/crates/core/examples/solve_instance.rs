//! Exact assignment for a small overlapping-task market, next to its LP
//! bound and the brute-force optimum.

use mcs_auction::assign::{solve_exact_detailed, solve_relaxation};
use mcs_auction::model::Instance;
use mcs_auction::oracle::brute_force_optimal;

fn main() {
    let inst = Instance::from_json(include_str!("../tests/data/overlapping_tasks.json")).unwrap();
    let sol = solve_exact_detailed(&inst);
    let (_, lp) = solve_relaxation(&inst);
    let oracle = brute_force_optimal(&inst).unwrap();

    for (i, k) in sol.assignment.scheduled_pairs() {
        println!("user {i} senses item {k} at cost {:.2}", inst.user(i).cost(k).unwrap());
    }
    println!("completed tasks: {:?}", sol.assignment.completed_tasks());
    println!("welfare {:.4}  (LP bound {lp:.4}, oracle {:.4}, {} nodes)", sol.welfare, oracle.welfare, sol.nodes);
}
