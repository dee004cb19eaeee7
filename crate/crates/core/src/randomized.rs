//! Randomized baseline: fractional VCG on the LP relaxation, decomposed into
//! a lottery over integral allocations.
//!
//! The fractional optimum `(x*, z*)` is scaled by `alpha` on the user side
//! and `beta` on the task side and written as a convex combination of
//! feasible integral allocations. Drawing one allocation from that lottery and
//! scaling each participant's fractional payment by its realized share of
//! cost (users) or value (tasks) gives a mechanism that is truthful in
//! expectation and individually rational in every realization.

use serde_json::json;
use thiserror::Error;

use crate::assign::{solve_relaxation, LinearProgram, LpStatus, Sense};
use crate::model::{derive_yz, Assignment, BidProfile, FractionalAssignment, Instance};
use crate::oracle::for_each_feasible;
use crate::simgen::SeededRng;

/// Largest number of schedulable pairs for which all allocations are listed.
pub const ENUMERATION_MAX_PAIRS: usize = 16;

/// Scale factors at or below this are treated as zero.
const SCALE_TOL: f64 = 1e-9;
/// Weights at or below this are dropped from the support.
const WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RandomizedError {
    #[error("instance has {pairs} schedulable pairs; allocation enumeration is capped at {cap}, use a smaller instance")]
    TooLarge { pairs: usize, cap: usize },
    #[error("no lottery over integral allocations reproduces a positively scaled fractional optimum")]
    Infeasible,
}

/// Fractional VCG outcome on the LP relaxation.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalVcgOutcome {
    pub assignment: FractionalAssignment,
    /// Fractional payment to each user.
    pub user_payments: Vec<f64>,
    /// Fractional charge to each task.
    pub task_charges: Vec<f64>,
    /// `V*`: value of the fractional optimum.
    pub value: f64,
    /// `C*`: cost of the fractional optimum.
    pub cost: f64,
}

impl FractionalVcgOutcome {
    pub fn objective(&self) -> f64 {
        self.value - self.cost
    }
}

/// VCG on the LP relaxation; every exclusion welfare is an LP optimum too.
pub fn fractional_vcg(bids: &BidProfile) -> FractionalVcgOutcome {
    let (assignment, _) = solve_relaxation(bids);
    let value = assignment.value(bids);
    let cost = assignment.cost(bids);
    let task_charges = (0..bids.num_tasks())
        .map(|j| {
            let w_minus = solve_relaxation(&bids.without_task(j)).1;
            w_minus - (value - assignment.z[j] * bids.task(j).valuation()) + cost
        })
        .collect();
    let user_payments = (0..bids.num_users())
        .map(|i| {
            let w_minus = solve_relaxation(&bids.without_user(i)).1;
            value - (cost - assignment.user_cost(bids, i)) - w_minus
        })
        .collect();
    FractionalVcgOutcome { assignment, user_payments, task_charges, value, cost }
}

/// Every budget-feasible integral allocation, with item and task indicators
/// derived from the schedule, in lexicographic order of the pair vector.
pub fn enumerate_allocations(inst: &Instance) -> Result<Vec<Assignment>, RandomizedError> {
    let pairs = inst.num_pairs();
    if pairs > ENUMERATION_MAX_PAIRS {
        return Err(RandomizedError::TooLarge { pairs, cap: ENUMERATION_MAX_PAIRS });
    }
    let mut out = Vec::new();
    for_each_feasible(inst, |pairs, bits| {
        let mut x = vec![vec![false; inst.num_items()]; inst.num_users()];
        for (&(i, k), &on) in pairs.iter().zip(bits) {
            x[i][k] = on;
        }
        out.push(derive_yz(inst, &x).expect("enumerated schedules are feasible"));
    });
    Ok(out)
}

/// A lottery over integral allocations that reproduces the scaled
/// fractional optimum in expectation.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub alpha: f64,
    pub beta: f64,
    /// Allocations with positive weight, in enumeration order.
    pub support: Vec<Assignment>,
    pub weights: Vec<f64>,
}

/// Finds the lottery maximizing `beta V* - alpha C*` whose expected schedule
/// is `alpha x*` and expected completion vector is `beta z*`.
///
/// When the optimum leaves `alpha` or `beta` at zero, or the cost term
/// vanishes, a second LP keeps the optimal objective and pushes `alpha + beta`
/// as high as possible. A scale factor whose fractional counterpart is
/// identically zero is unconstrained and reported as 1.
pub fn decompose(
    inst: &Instance,
    frac: &FractionalVcgOutcome,
    allocations: &[Assignment],
) -> Result<Decomposition, RandomizedError> {
    let n = allocations.len();
    let (a, b) = (n, n + 1);
    let x_star = &frac.assignment.x;
    let z_star = &frac.assignment.z;
    let mut lp = LinearProgram::new(n + 2);
    lp.upper[a] = 1.0;
    lp.upper[b] = 1.0;
    lp.objective[a] = -frac.cost;
    lp.objective[b] = frac.value;
    for (i, k) in inst.pairs() {
        let mut terms: Vec<(usize, f64)> = (0..n).filter(|&l| allocations[l].x[i][k]).map(|l| (l, 1.0)).collect();
        terms.push((a, -x_star[i][k]));
        lp.add(terms, Sense::Eq, 0.0);
    }
    for j in 0..inst.num_tasks() {
        let mut terms: Vec<(usize, f64)> = (0..n).filter(|&l| allocations[l].z[j]).map(|l| (l, 1.0)).collect();
        terms.push((b, -z_star[j]));
        lp.add(terms, Sense::Eq, 0.0);
    }
    lp.add((0..n).map(|l| (l, 1.0)).collect(), Sense::Eq, 1.0);

    let mut sol = lp.solve();
    if sol.status != LpStatus::Optimal {
        return Err(RandomizedError::Infeasible);
    }
    let alpha_free = x_star.iter().flatten().all(|&v| v.abs() <= SCALE_TOL);
    let beta_free = z_star.iter().all(|&v| v.abs() <= SCALE_TOL);
    let weak = |x: &[f64]| (!alpha_free && x[a] <= SCALE_TOL) || (!beta_free && x[b] <= SCALE_TOL);
    if weak(&sol.x) || frac.cost.abs() <= SCALE_TOL {
        let best = sol.objective;
        let mut second = lp.clone();
        second.add(vec![(a, -frac.cost), (b, frac.value)], Sense::Ge, best - 1e-9 * (1.0 + best.abs()));
        second.objective = vec![0.0; n + 2];
        second.objective[a] = 1.0;
        second.objective[b] = 1.0;
        let refined = second.solve();
        if refined.status == LpStatus::Optimal {
            sol = refined;
        }
    }
    if weak(&sol.x) {
        return Err(RandomizedError::Infeasible);
    }
    let alpha = if alpha_free { 1.0 } else { sol.x[a] };
    let beta = if beta_free { 1.0 } else { sol.x[b] };
    let (support, weights) =
        (0..n).filter(|&l| sol.x[l] > WEIGHT_TOL).map(|l| (allocations[l].clone(), sol.x[l])).unzip();
    Ok(Decomposition { alpha, beta, support, weights })
}

impl Decomposition {
    /// Serializes to `{"alpha", "beta", "support": [{"lambda", "x", "z"}]}`.
    pub fn to_json_value(&self) -> serde_json::Value {
        let support: Vec<serde_json::Value> = self
            .support
            .iter()
            .zip(&self.weights)
            .map(|(a, &w)| {
                let x: Vec<[usize; 2]> = a.scheduled_pairs().into_iter().map(|(i, k)| [i, k]).collect();
                json!({ "lambda": w, "x": x, "z": a.z })
            })
            .collect();
        json!({ "alpha": self.alpha, "beta": self.beta, "support": support })
    }

    /// Inverse-CDF draw of a support index.
    pub fn sample(&self, rng: &mut SeededRng) -> usize {
        let u = rng.uniform() * self.weights.iter().sum::<f64>();
        let mut acc = 0.0;
        for (l, &w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return l;
            }
        }
        self.weights.len() - 1
    }

    /// Payments when support allocation `l` is realized: each user gets
    /// `alpha p_i*` times its realized share of expected cost, each task is
    /// charged `beta q_j*` times its realized share of expected value. A
    /// participant with zero expected cost (or value) pays or gets nothing.
    pub fn payments_for(&self, inst: &Instance, frac: &FractionalVcgOutcome, l: usize) -> Realization {
        let share = |own: &dyn Fn(&Assignment) -> f64| {
            let expected: f64 = self.support.iter().zip(&self.weights).map(|(a, &w)| w * own(a)).sum();
            if expected <= WEIGHT_TOL {
                0.0
            } else {
                own(&self.support[l]) / expected
            }
        };
        let user_payments = (0..inst.num_users())
            .map(|i| self.alpha * frac.user_payments[i] * share(&|a: &Assignment| inst.user_cost(i, &a.x[i])))
            .collect();
        let task_charges = (0..inst.num_tasks())
            .map(|j| {
                let v = inst.task(j).valuation();
                self.beta * frac.task_charges[j] * share(&|a: &Assignment| if a.z[j] { v } else { 0.0 })
            })
            .collect();
        Realization { index: l, user_payments, task_charges }
    }

    /// Expected welfare of the lottery, `beta V* - alpha C*`.
    pub fn expected_welfare(&self, frac: &FractionalVcgOutcome) -> f64 {
        self.beta * frac.value - self.alpha * frac.cost
    }
}

/// One draw of the randomized mechanism.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    /// Index into [`Decomposition::support`].
    pub index: usize,
    pub user_payments: Vec<f64>,
    pub task_charges: Vec<f64>,
}

/// Draws an allocation with a generator seeded by `seed` and prices it.
pub fn realize(inst: &Instance, dec: &Decomposition, frac: &FractionalVcgOutcome, seed: u64) -> Realization {
    let l = dec.sample(&mut SeededRng::new(seed));
    dec.payments_for(inst, frac, l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::shared_item;
    use crate::model::{Task, User, EPS};

    fn single(v: f64, c: f64) -> Instance {
        Instance::new(1, vec![User::new([(0, c)], 1.0).unwrap()], vec![Task::new([0], v).unwrap()]).unwrap()
    }

    #[test]
    fn integral_lp_matches_integral_vcg() {
        let f = fractional_vcg(&single(1.0, 0.2));
        assert!((f.task_charges[0] - 0.2).abs() < EPS);
        assert!((f.user_payments[0] - 1.0).abs() < EPS);
    }

    #[test]
    fn shared_item_fractional_vcg() {
        let f = fractional_vcg(&shared_item(1.0));
        assert!(f.task_charges.iter().all(|q| q.abs() < EPS));
        assert!((f.user_payments[0] - 1.1).abs() < EPS);
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_allocations(&single(1.0, 0.2)).unwrap().len(), 2);
        let u = User::new([(0, 0.6), (1, 0.6)], 1.0).unwrap();
        let inst = Instance::new(2, vec![u], vec![]).unwrap();
        assert_eq!(enumerate_allocations(&inst).unwrap().len(), 3);
        let big = Instance::new(17, vec![User::new((0..17).map(|k| (k, 0.01)), 9.0).unwrap()], vec![]).unwrap();
        assert!(matches!(enumerate_allocations(&big), Err(RandomizedError::TooLarge { pairs: 17, .. })));
    }

    #[test]
    fn identity_decomposition() {
        let inst = shared_item(1.0);
        let f = fractional_vcg(&inst);
        let d = decompose(&inst, &f, &enumerate_allocations(&inst).unwrap()).unwrap();
        assert_eq!((d.alpha, d.beta), (1.0, 1.0));
        assert_eq!(d.support.len(), 1);
        let r = realize(&inst, &d, &f, 7);
        assert!((r.user_payments[0] - 1.1).abs() < 1e-9);
    }

    #[test]
    fn half_split_decomposition() {
        // x* = z* = 0.5 on a single pair, by hand.
        let inst = single(1.0, 0.2);
        let frac = FractionalVcgOutcome {
            assignment: FractionalAssignment { x: vec![vec![0.5]], y: vec![0.5], z: vec![0.5] },
            user_payments: vec![0.5],
            task_charges: vec![0.1],
            value: 0.5,
            cost: 0.1,
        };
        let d = decompose(&inst, &frac, &enumerate_allocations(&inst).unwrap()).unwrap();
        assert!((d.alpha - 1.0).abs() < 1e-9 && (d.beta - 1.0).abs() < 1e-9);
        assert_eq!(d.weights.len(), 2);
        assert!(d.weights.iter().all(|w| (w - 0.5).abs() < 1e-9));
    }

    #[test]
    fn decomposition_json_shape() {
        let inst = shared_item(1.0);
        let f = fractional_vcg(&inst);
        let d = decompose(&inst, &f, &enumerate_allocations(&inst).unwrap()).unwrap();
        let v = d.to_json_value();
        assert_eq!(v["support"][0]["x"], json!([[0, 0]]));
        assert_eq!(v["alpha"], json!(1.0));
    }
}
