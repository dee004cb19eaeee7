//! Helpers shared by the integration tests: the unilateral-deviation harness
//! and a few small checks.

#![allow(dead_code)]

use mcs_auction::model::{Instance, Task, User, EPS};
use mcs_auction::vcg::{run_double_auction, run_reserve_auction, AuctionOutcome, ReservePrices};

#[derive(Debug, Clone, Copy)]
pub enum Mechanism {
    Plain,
    /// Reserve auction with the same price on every item.
    Reserve(f64),
}

impl Mechanism {
    pub fn run(self, bids: &Instance) -> AuctionOutcome {
        match self {
            Mechanism::Plain => run_double_auction(bids),
            Mechanism::Reserve(pi) => {
                let prices = ReservePrices::uniform(bids.num_items(), pi).unwrap();
                run_reserve_auction(bids, &prices).unwrap()
            }
        }
    }
}

/// Utility of user `i` under its true type: reward minus the true cost of
/// what it was asked to sense. `None` when the schedule is impossible for
/// the true type (an item it cannot sense, or over its real budget).
pub fn user_utility(truth: &Instance, out: &AuctionOutcome, i: usize) -> Option<f64> {
    let user = truth.user(i);
    let mut cost = 0.0;
    for (k, &on) in out.assignment.x[i].iter().enumerate() {
        if on {
            cost += user.cost(k)?;
        }
    }
    (cost <= user.budget() + EPS).then_some(out.rewards[i] - cost)
}

pub fn task_utility(truth: &Instance, out: &AuctionOutcome, j: usize) -> f64 {
    let v = if out.assignment.z[j] { truth.task(j).valuation() } else { 0.0 };
    v - out.payments[j]
}

/// Eight alternative reports for a user.
pub fn user_deviations(inst: &Instance, i: usize) -> Vec<User> {
    let u = inst.user(i);
    let scaled = |f: f64| User::new(u.costs().iter().map(|(&k, &c)| (k, c * f)), u.budget()).unwrap();
    let mut out = vec![
        scaled(0.5),
        scaled(1.5),
        scaled(3.0),
        User::new(u.costs().iter().map(|(&k, &c)| (k, c + 0.2)), u.budget()).unwrap(),
        User::new(u.costs().clone(), u.budget() * 0.5).unwrap(),
        User::new(u.costs().clone(), u.budget() * 2.0 + 0.5).unwrap(),
    ];
    // Hide the cheapest item.
    let cheapest = u.costs().iter().min_by(|a, b| a.1.total_cmp(b.1)).map(|(&k, _)| k);
    out.push(User::new(u.costs().iter().filter(|e| Some(*e.0) != cheapest).map(|(&k, &c)| (k, c)), u.budget()).unwrap());
    // Claim a free item it cannot actually sense, or undercut every cost
    // when it already senses everything.
    match (0..inst.num_items()).find(|&k| !u.can_sense(k)) {
        Some(extra) => out.push(User::new(u.costs().iter().map(|(&k, &c)| (k, c)).chain([(extra, 0.0)]), u.budget()).unwrap()),
        None => out.push(User::new(u.costs().iter().map(|(&k, &c)| (k, (c - 0.1).max(0.0))), u.budget()).unwrap()),
    }
    out
}

/// Eight alternative valuation reports for a task.
pub fn task_deviations(inst: &Instance, j: usize) -> Vec<Task> {
    let t = inst.task(j);
    let v = t.valuation();
    [0.01 * v, 0.5 * v, 0.8 * v, 1.2 * v, 2.0 * v, v + 1.0, (v - 0.3).max(0.01 * v), 10.0 * v]
        .into_iter()
        .map(|r| t.with_valuation(r))
        .collect()
}

/// Largest utility gain any single bidder gets from any of its eight
/// deviations. Deviations that are impossible for the true type are skipped.
pub fn max_deviation_gain(truth: &Instance, mech: Mechanism) -> f64 {
    let honest = mech.run(truth);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..truth.num_users() {
        let base = user_utility(truth, &honest, i).expect("truthful schedules are feasible");
        for report in user_deviations(truth, i) {
            let out = mech.run(&truth.with_user(i, report).unwrap());
            if let Some(u) = user_utility(truth, &out, i) {
                worst = worst.max(u - base);
            }
        }
    }
    for j in 0..truth.num_tasks() {
        let base = task_utility(truth, &honest, j);
        for report in task_deviations(truth, j) {
            let out = mech.run(&truth.with_task(j, report).unwrap());
            worst = worst.max(task_utility(truth, &out, j) - base);
        }
    }
    worst
}

/// Smallest utility of any participant under truthful bidding.
pub fn min_truthful_utility(truth: &Instance, mech: Mechanism) -> f64 {
    let out = mech.run(truth);
    let users = (0..truth.num_users()).map(|i| user_utility(truth, &out, i).unwrap());
    let tasks = (0..truth.num_tasks()).map(|j| task_utility(truth, &out, j));
    users.chain(tasks).fold(f64::INFINITY, f64::min)
}

/// Rebuilds an instance with users and tasks reordered.
pub fn permuted(inst: &Instance, user_order: &[usize], task_order: &[usize]) -> Instance {
    let users = user_order.iter().map(|&i| inst.user(i).clone()).collect();
    let tasks = task_order.iter().map(|&j| inst.task(j).clone()).collect();
    Instance::new(inst.num_items(), users, tasks).unwrap()
}
