//! Truthful double auction and its reserve-price variant.
//!
//! The platform schedules the welfare-optimal assignment on the reported
//! bids, then charges each task and rewards each user its externality on the
//! rest of the market:
//!
//! * task `j` pays `W(-j) - (V - z_j v_j) + C`;
//! * user `i` receives `V - (C - C_i) - W(-i)`,
//!
//! where `V` and `C` are the value and cost of the chosen assignment, `C_i` is
//! user `i`'s share of the cost and `W(-p)` is the optimal welfare with
//! participant `p` removed. All quantities come from reports.

use serde_json::json;
use thiserror::Error;

use crate::assign::solve_exact;
use crate::model::{social_welfare, total_value, Assignment, BidProfile, Task};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VcgError {
    #[error("reserve prices cover {got} items but the instance has {expected}")]
    ReserveLength { got: usize, expected: usize },
    #[error("reserve price for item {item} is {value}; prices must be finite and nonnegative")]
    BadReserve { item: usize, value: f64 },
}

/// Result of one auction round, indexed like the bid profile it was run on.
#[derive(Debug, Clone, PartialEq)]
pub struct AuctionOutcome {
    pub assignment: Assignment,
    /// Charge to each task planner.
    pub payments: Vec<f64>,
    /// Money paid to each user.
    pub rewards: Vec<f64>,
    pub platform_budget: f64,
    pub welfare: f64,
    /// Tasks that stayed in the auction (all of them without a reserve).
    pub participants: Vec<usize>,
}

impl AuctionOutcome {
    pub fn total_payments(&self) -> f64 {
        self.payments.iter().sum()
    }

    pub fn total_rewards(&self) -> f64 {
        self.rewards.iter().sum()
    }

    /// Serializes to `{"welfare", "payments", "rewards", "platform_budget", "x", "z"}`
    /// where `x` lists scheduled `[user, item]` pairs.
    pub fn to_json_value(&self) -> serde_json::Value {
        let x: Vec<[usize; 2]> = self.assignment.scheduled_pairs().into_iter().map(|(i, k)| [i, k]).collect();
        json!({
            "welfare": self.welfare,
            "payments": self.payments,
            "rewards": self.rewards,
            "platform_budget": self.platform_budget,
            "x": x,
            "z": self.assignment.z,
        })
    }
}

/// Total task payments minus total user rewards.
pub fn platform_budget(outcome: &AuctionOutcome) -> f64 {
    outcome.total_payments() - outcome.total_rewards()
}

/// Per-item reserve prices.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservePrices {
    per_item: Vec<f64>,
}

impl ReservePrices {
    pub fn new(per_item: Vec<f64>) -> Result<Self, VcgError> {
        if let Some((item, &value)) = per_item.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(VcgError::BadReserve { item, value });
        }
        Ok(Self { per_item })
    }

    /// The same price on every item.
    pub fn uniform(num_items: usize, price: f64) -> Result<Self, VcgError> {
        Self::new(vec![price; num_items])
    }

    pub fn per_item(&self) -> &[f64] {
        &self.per_item
    }

    /// The least a task pays if completed: the sum of its items' prices.
    pub fn min_payment(&self, task: &Task) -> f64 {
        task.requirement().iter().map(|&k| self.per_item[k]).sum()
    }
}

/// Runs the double auction on reported bids.
pub fn run_double_auction(bids: &BidProfile) -> AuctionOutcome {
    let assignment = solve_exact(bids);
    let welfare = social_welfare(bids, &assignment).expect("solver output is consistent");
    let value = total_value(bids, &assignment.z);
    let cost = value - welfare;

    // Removing a participant that takes no part in the optimum leaves the
    // optimum unchanged, so only active participants need a re-solve.
    let payments = (0..bids.num_tasks())
        .map(|j| {
            if !assignment.z[j] {
                return 0.0;
            }
            let without = bids.without_task(j);
            let w_minus = social_welfare(&without, &solve_exact(&without)).unwrap();
            w_minus - (value - bids.task(j).valuation()) + cost
        })
        .collect();
    let rewards = (0..bids.num_users())
        .map(|i| {
            if !assignment.x[i].iter().any(|&b| b) {
                return 0.0;
            }
            let own = bids.user_cost(i, &assignment.x[i]);
            let without = bids.without_user(i);
            let w_minus = social_welfare(&without, &solve_exact(&without)).unwrap();
            value - (cost - own) - w_minus
        })
        .collect();
    let mut out = AuctionOutcome {
        assignment,
        payments,
        rewards,
        platform_budget: 0.0,
        welfare,
        participants: (0..bids.num_tasks()).collect(),
    };
    out.platform_budget = platform_budget(&out);
    out
}

/// Runs the auction with reserve prices. Tasks whose reported valuation is
/// below their minimum payment leave before assignment (a tie stays), the
/// auction is run on the rest, and each completed task pays at least its
/// minimum payment. Participants left incomplete pay nothing.
pub fn run_reserve_auction(bids: &BidProfile, reserve: &ReservePrices) -> Result<AuctionOutcome, VcgError> {
    if reserve.per_item.len() != bids.num_items() {
        return Err(VcgError::ReserveLength { got: reserve.per_item.len(), expected: bids.num_items() });
    }
    let participants: Vec<usize> =
        (0..bids.num_tasks()).filter(|&j| bids.task(j).valuation() >= reserve.min_payment(bids.task(j))).collect();
    let survivors = bids.retain_tasks(|j, _| participants.binary_search(&j).is_ok());
    let inner = run_double_auction(&survivors);

    let mut z = vec![false; bids.num_tasks()];
    let mut payments = vec![0.0; bids.num_tasks()];
    for (n, &j) in participants.iter().enumerate() {
        z[j] = inner.assignment.z[n];
        if z[j] {
            payments[j] = inner.payments[n].max(reserve.min_payment(bids.task(j)));
        }
    }
    let assignment = Assignment { x: inner.assignment.x, y: inner.assignment.y, z };
    let mut out = AuctionOutcome {
        assignment,
        payments,
        rewards: inner.rewards,
        platform_budget: 0.0,
        welfare: inner.welfare,
        participants,
    };
    out.platform_budget = platform_budget(&out);
    Ok(out)
}
