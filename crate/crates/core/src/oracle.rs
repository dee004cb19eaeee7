//! Exhaustive ground-truth solver for tiny instances.
//!
//! Enumerates every budget-feasible schedule over the instance's schedulable
//! pairs in lexicographic order (pair order is by user, then item; the 0
//! branch is visited before the 1 branch), so the first maximizer found is the
//! lexicographically smallest one.

use thiserror::Error;

use crate::model::{derive_yz, Assignment, Instance, EPS};

/// Hard cap on schedulable pairs for [`brute_force_optimal`].
pub const ORACLE_MAX_PAIRS: usize = 22;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("instance has {pairs} schedulable pairs; exhaustive search is capped at {cap}")]
    TooLarge { pairs: usize, cap: usize },
    #[error("unknown participant {0:?}")]
    UnknownParticipant(Participant),
}

/// A user or a task, by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Participant {
    User(usize),
    Task(usize),
}

impl Participant {
    /// The instance with this participant removed.
    pub fn remove_from(self, inst: &Instance) -> Option<Instance> {
        match self {
            Participant::User(i) if i < inst.num_users() => Some(inst.without_user(i)),
            Participant::Task(j) if j < inst.num_tasks() => Some(inst.without_task(j)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub best: Assignment,
    pub welfare: f64,
    /// Number of budget-feasible schedules enumerated.
    pub explored: u64,
}

pub fn brute_force_optimal(inst: &Instance) -> Result<OracleResult, OracleError> {
    let pairs = inst.pairs();
    if pairs.len() > ORACLE_MAX_PAIRS {
        return Err(OracleError::TooLarge { pairs: pairs.len(), cap: ORACLE_MAX_PAIRS });
    }
    let mut search = Search::new(inst, pairs);
    search.descend(0);
    let mut x = vec![vec![false; inst.num_items()]; inst.num_users()];
    for (&(i, k), &on) in search.pairs.iter().zip(&search.best) {
        x[i][k] = on;
    }
    let best = derive_yz(inst, &x).expect("enumerated schedules are feasible");
    Ok(OracleResult { best, welfare: search.best_welfare, explored: search.explored })
}

pub fn brute_force_excluding(inst: &Instance, drop: Participant) -> Result<OracleResult, OracleError> {
    let reduced = drop.remove_from(inst).ok_or(OracleError::UnknownParticipant(drop))?;
    brute_force_optimal(&reduced)
}

/// Calls `visit` on every budget-feasible schedule, as a pair bit-vector, in
/// lexicographic order.
pub(crate) fn for_each_feasible(inst: &Instance, mut visit: impl FnMut(&[(usize, usize)], &[bool])) {
    let pairs = inst.pairs();
    let costs: Vec<f64> = pairs.iter().map(|&(i, k)| inst.user(i).cost(k).unwrap()).collect();
    let mut spent = vec![0.0; inst.num_users()];
    let mut bits = vec![false; pairs.len()];
    fn rec(
        p: usize,
        inst: &Instance,
        pairs: &[(usize, usize)],
        costs: &[f64],
        spent: &mut [f64],
        bits: &mut [bool],
        visit: &mut dyn FnMut(&[(usize, usize)], &[bool]),
    ) {
        if p == pairs.len() {
            visit(pairs, bits);
            return;
        }
        rec(p + 1, inst, pairs, costs, spent, bits, visit);
        let i = pairs[p].0;
        if spent[i] + costs[p] <= inst.user(i).budget() + EPS {
            spent[i] += costs[p];
            bits[p] = true;
            rec(p + 1, inst, pairs, costs, spent, bits, visit);
            bits[p] = false;
            spent[i] -= costs[p];
        }
    }
    rec(0, inst, &pairs, &costs, &mut spent, &mut bits, &mut visit);
}

struct Search<'a> {
    inst: &'a Instance,
    pairs: Vec<(usize, usize)>,
    costs: Vec<f64>,
    spent: Vec<f64>,
    sensed_by: Vec<u32>,
    missing: Vec<usize>,
    tasks_of_item: Vec<Vec<usize>>,
    value: f64,
    cost: f64,
    bits: Vec<bool>,
    best: Vec<bool>,
    best_welfare: f64,
    explored: u64,
}

impl<'a> Search<'a> {
    fn new(inst: &'a Instance, pairs: Vec<(usize, usize)>) -> Self {
        let costs = pairs.iter().map(|&(i, k)| inst.user(i).cost(k).unwrap()).collect();
        let tasks_of_item = (0..inst.num_items()).map(|k| inst.tasks_requiring(k)).collect();
        let n = pairs.len();
        Self {
            inst,
            costs,
            spent: vec![0.0; inst.num_users()],
            sensed_by: vec![0; inst.num_items()],
            missing: inst.tasks().iter().map(|t| t.requirement().len()).collect(),
            tasks_of_item,
            value: 0.0,
            cost: 0.0,
            bits: vec![false; n],
            best: vec![false; n],
            // The empty schedule is always feasible; it is also the first leaf.
            best_welfare: f64::NEG_INFINITY,
            explored: 0,
            pairs,
        }
    }

    fn descend(&mut self, p: usize) {
        if p == self.pairs.len() {
            self.explored += 1;
            let w = self.value - self.cost;
            if w > self.best_welfare + EPS {
                self.best_welfare = w;
                self.best.copy_from_slice(&self.bits);
            }
            return;
        }
        self.descend(p + 1);
        let (i, k) = self.pairs[p];
        let c = self.costs[p];
        if self.spent[i] + c > self.inst.user(i).budget() + EPS {
            return;
        }
        self.set(p, i, k, c, true);
        self.descend(p + 1);
        self.set(p, i, k, c, false);
    }

    fn set(&mut self, p: usize, i: usize, k: usize, c: f64, on: bool) {
        self.bits[p] = on;
        if on {
            self.spent[i] += c;
            self.cost += c;
            self.sensed_by[k] += 1;
            if self.sensed_by[k] == 1 {
                for &j in &self.tasks_of_item[k] {
                    self.missing[j] -= 1;
                    if self.missing[j] == 0 {
                        self.value += self.inst.task(j).valuation();
                    }
                }
            }
        } else {
            self.spent[i] -= c;
            self.cost -= c;
            self.sensed_by[k] -= 1;
            if self.sensed_by[k] == 0 {
                for &j in &self.tasks_of_item[k] {
                    if self.missing[j] == 0 {
                        self.value -= self.inst.task(j).valuation();
                    }
                    self.missing[j] += 1;
                }
            }
        }
    }
}
