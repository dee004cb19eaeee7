//! Market model and the social-welfare functional.
//!
//! Items, users and tasks are indexed from zero. A user's cost is only defined
//! for items in its capability set; items outside the set can never be
//! scheduled for that user.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Comparison tolerance for every welfare, budget and indicator test.
pub const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("item {item} is out of range (num_items = {num_items})")]
    ItemOutOfRange { item: usize, num_items: usize },
    #[error("duplicate item {item} in {what}")]
    DuplicateItem { item: usize, what: String },
    #[error("task {task} has an empty requirement")]
    EmptyRequirement { task: usize },
    #[error("user {user}: cost keys do not match the capability set")]
    CostKeysMismatch { user: usize },
    #[error("user {user}: invalid cost {cost} for item {item}")]
    InvalidCost { user: usize, item: usize, cost: f64 },
    #[error("user {user}: invalid budget {budget}")]
    InvalidBudget { user: usize, budget: f64 },
    #[error("task {task}: valuation must be positive, got {valuation}")]
    InvalidValuation { task: usize, valuation: f64 },
    #[error("task {task}: item valuations sum to {sum}, valuation is {valuation}")]
    ItemValuationMismatch { task: usize, sum: f64, valuation: f64 },
    #[error("assignment shape does not match the instance: {0}")]
    Shape(String),
    #[error("user {user} is scheduled for item {item} outside its capability")]
    OutsideCapability { user: usize, item: usize },
    #[error("user {user} exceeds its budget: spends {spent}, budget {budget}")]
    BudgetExceeded { user: usize, spent: f64, budget: f64 },
}

/// A mobile user with per-item sensing costs and a total budget.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct User {
    capability: Vec<usize>,
    costs: BTreeMap<usize, f64>,
    budget: f64,
}

impl User {
    /// Builds a user from `(item, cost)` pairs. The capability set is the set
    /// of items named.
    pub fn new(costs: impl IntoIterator<Item = (usize, f64)>, budget: f64) -> Result<Self, ModelError> {
        let mut map = BTreeMap::new();
        for (item, cost) in costs {
            if map.insert(item, cost).is_some() {
                return Err(ModelError::DuplicateItem { item, what: "capability".into() });
            }
        }
        Ok(Self { capability: map.keys().copied().collect(), costs: map, budget })
    }

    pub fn capability(&self) -> &[usize] {
        &self.capability
    }

    pub fn costs(&self) -> &BTreeMap<usize, f64> {
        &self.costs
    }

    pub fn cost(&self, item: usize) -> Option<f64> {
        self.costs.get(&item).copied()
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn can_sense(&self, item: usize) -> bool {
        self.costs.contains_key(&item)
    }
}

/// A sensing task: the items it needs and what completion is worth.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Task {
    requirement: Vec<usize>,
    valuation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    item_valuations: Option<BTreeMap<usize, f64>>,
}

impl Task {
    pub fn new(requirement: impl IntoIterator<Item = usize>, valuation: f64) -> Result<Self, ModelError> {
        Ok(Self { requirement: canonical_set(requirement, "requirement")?, valuation, item_valuations: None })
    }

    /// Builds a task whose valuation is the sum of per-item valuations.
    pub fn from_item_values(values: impl IntoIterator<Item = (usize, f64)>) -> Result<Self, ModelError> {
        let mut map = BTreeMap::new();
        for (item, v) in values {
            if map.insert(item, v).is_some() {
                return Err(ModelError::DuplicateItem { item, what: "requirement".into() });
            }
        }
        let valuation = map.values().sum();
        Ok(Self { requirement: map.keys().copied().collect(), valuation, item_valuations: Some(map) })
    }

    pub fn requirement(&self) -> &[usize] {
        &self.requirement
    }

    pub fn valuation(&self) -> f64 {
        self.valuation
    }

    pub fn item_valuations(&self) -> Option<&BTreeMap<usize, f64>> {
        self.item_valuations.as_ref()
    }

    /// Same requirement, different reported valuation. Per-item values are
    /// dropped since they no longer sum to the valuation.
    pub fn with_valuation(&self, valuation: f64) -> Self {
        Self { requirement: self.requirement.clone(), valuation, item_valuations: None }
    }
}

fn canonical_set(items: impl IntoIterator<Item = usize>, what: &str) -> Result<Vec<usize>, ModelError> {
    let mut v: Vec<usize> = items.into_iter().collect();
    v.sort_unstable();
    if let Some(w) = v.windows(2).find(|w| w[0] == w[1]) {
        return Err(ModelError::DuplicateItem { item: w[0], what: what.into() });
    }
    Ok(v)
}

/// A crowd-sensing market. Immutable once validated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance")]
pub struct Instance {
    num_items: usize,
    users: Vec<User>,
    tasks: Vec<Task>,
}

/// Reported bids are structurally an instance built from the reports.
pub type BidProfile = Instance;

impl Instance {
    pub fn new(num_items: usize, users: Vec<User>, tasks: Vec<Task>) -> Result<Self, ModelError> {
        let inst = Self { num_items, users, tasks };
        inst.check()?;
        Ok(inst)
    }

    fn check(&self) -> Result<(), ModelError> {
        let k_max = self.num_items;
        for (i, u) in self.users.iter().enumerate() {
            if !(u.budget >= 0.0 && u.budget.is_finite()) {
                return Err(ModelError::InvalidBudget { user: i, budget: u.budget });
            }
            if u.capability.len() != u.costs.len() || u.capability.iter().any(|k| !u.costs.contains_key(k)) {
                return Err(ModelError::CostKeysMismatch { user: i });
            }
            for (&k, &c) in &u.costs {
                if k >= k_max {
                    return Err(ModelError::ItemOutOfRange { item: k, num_items: k_max });
                }
                if !(c >= 0.0 && c.is_finite()) {
                    return Err(ModelError::InvalidCost { user: i, item: k, cost: c });
                }
            }
        }
        for (j, t) in self.tasks.iter().enumerate() {
            if t.requirement.is_empty() {
                return Err(ModelError::EmptyRequirement { task: j });
            }
            if let Some(&k) = t.requirement.iter().find(|&&k| k >= k_max) {
                return Err(ModelError::ItemOutOfRange { item: k, num_items: k_max });
            }
            if !(t.valuation > 0.0 && t.valuation.is_finite()) {
                return Err(ModelError::InvalidValuation { task: j, valuation: t.valuation });
            }
            if let Some(iv) = &t.item_valuations {
                let sum: f64 = iv.values().sum();
                let keys_match = iv.keys().copied().eq(t.requirement.iter().copied());
                if !keys_match || (sum - t.valuation).abs() > EPS {
                    return Err(ModelError::ItemValuationMismatch { task: j, sum, valuation: t.valuation });
                }
            }
        }
        Ok(())
    }

    pub fn num_items(&self) -> usize {
        self.num_items
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn num_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn users(&self) -> &[User] {
        &self.users
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn user(&self, i: usize) -> &User {
        &self.users[i]
    }

    pub fn task(&self, j: usize) -> &Task {
        &self.tasks[j]
    }

    /// Every schedulable `(user, item)` pair, sorted by user then item.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.users
            .iter()
            .enumerate()
            .flat_map(|(i, u)| u.capability.iter().map(move |&k| (i, k)))
            .collect()
    }

    pub fn num_pairs(&self) -> usize {
        self.users.iter().map(|u| u.capability.len()).sum()
    }

    /// Users able to sense `item`, ascending.
    pub fn users_of(&self, item: usize) -> Vec<usize> {
        (0..self.users.len()).filter(|&i| self.users[i].can_sense(item)).collect()
    }

    /// Tasks whose requirement contains `item`, ascending.
    pub fn tasks_requiring(&self, item: usize) -> Vec<usize> {
        (0..self.tasks.len()).filter(|&j| self.tasks[j].requirement.binary_search(&item).is_ok()).collect()
    }

    pub fn without_user(&self, i: usize) -> Self {
        let mut users = self.users.clone();
        users.remove(i);
        Self { num_items: self.num_items, users, tasks: self.tasks.clone() }
    }

    pub fn without_task(&self, j: usize) -> Self {
        let mut tasks = self.tasks.clone();
        tasks.remove(j);
        Self { num_items: self.num_items, users: self.users.clone(), tasks }
    }

    /// Keeps only the tasks whose index satisfies `keep`, preserving order.
    pub fn retain_tasks(&self, mut keep: impl FnMut(usize, &Task) -> bool) -> Self {
        let tasks = self.tasks.iter().enumerate().filter(|(j, t)| keep(*j, t)).map(|(_, t)| t.clone()).collect();
        Self { num_items: self.num_items, users: self.users.clone(), tasks }
    }

    pub fn with_user(&self, i: usize, user: User) -> Result<Self, ModelError> {
        let mut users = self.users.clone();
        users[i] = user;
        Self::new(self.num_items, users, self.tasks.clone())
    }

    pub fn with_task(&self, j: usize, task: Task) -> Result<Self, ModelError> {
        let mut tasks = self.tasks.clone();
        tasks[j] = task;
        Self::new(self.num_items, self.users.clone(), tasks)
    }

    /// Sensing cost of user `i` under schedule row `row` (dense over items).
    pub fn user_cost(&self, i: usize, row: &[bool]) -> f64 {
        self.users[i].costs.iter().filter(|(&k, _)| row.get(k).copied().unwrap_or(false)).map(|(_, &c)| c).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUser {
    capability: Vec<usize>,
    costs: BTreeMap<usize, f64>,
    budget: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTask {
    requirement: Vec<usize>,
    valuation: f64,
    #[serde(default)]
    item_valuations: Option<BTreeMap<usize, f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    num_items: usize,
    users: Vec<RawUser>,
    tasks: Vec<RawTask>,
}

impl TryFrom<RawInstance> for Instance {
    type Error = ModelError;

    fn try_from(raw: RawInstance) -> Result<Self, ModelError> {
        let mut users = Vec::with_capacity(raw.users.len());
        for (i, u) in raw.users.into_iter().enumerate() {
            let capability = canonical_set(u.capability, "capability")?;
            if !capability.iter().copied().eq(u.costs.keys().copied()) {
                return Err(ModelError::CostKeysMismatch { user: i });
            }
            users.push(User { capability, costs: u.costs, budget: u.budget });
        }
        let mut tasks = Vec::with_capacity(raw.tasks.len());
        for t in raw.tasks {
            let requirement = canonical_set(t.requirement, "requirement")?;
            tasks.push(Task { requirement, valuation: t.valuation, item_valuations: t.item_valuations });
        }
        Instance::new(raw.num_items, users, tasks)
    }
}

/// Dense schedule matrix: `x[i][k]` is true when user `i` senses item `k`.
pub type Schedule = Vec<Vec<bool>>;

/// An integral task-data-user assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub x: Schedule,
    pub y: Vec<bool>,
    pub z: Vec<bool>,
}

impl Assignment {
    /// The do-nothing assignment.
    pub fn empty(inst: &Instance) -> Self {
        Self {
            x: vec![vec![false; inst.num_items()]; inst.num_users()],
            y: vec![false; inst.num_items()],
            z: vec![false; inst.num_tasks()],
        }
    }

    /// Scheduled `(user, item)` pairs in ascending order.
    pub fn scheduled_pairs(&self) -> Vec<(usize, usize)> {
        self.x
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().filter(|(_, &b)| b).map(move |(k, _)| (i, k)))
            .collect()
    }

    pub fn completed_tasks(&self) -> Vec<usize> {
        (0..self.z.len()).filter(|&j| self.z[j]).collect()
    }

    fn check_shape(&self, inst: &Instance) -> Result<(), ModelError> {
        if self.x.len() != inst.num_users() {
            return Err(ModelError::Shape(format!("x has {} rows, expected {}", self.x.len(), inst.num_users())));
        }
        if let Some(row) = self.x.iter().find(|r| r.len() != inst.num_items()) {
            return Err(ModelError::Shape(format!("x row has {} columns, expected {}", row.len(), inst.num_items())));
        }
        if self.y.len() != inst.num_items() {
            return Err(ModelError::Shape(format!("y has {} entries, expected {}", self.y.len(), inst.num_items())));
        }
        if self.z.len() != inst.num_tasks() {
            return Err(ModelError::Shape(format!("z has {} entries, expected {}", self.z.len(), inst.num_tasks())));
        }
        Ok(())
    }
}

/// Total valuation of completed tasks.
pub fn total_value(inst: &Instance, z: &[bool]) -> f64 {
    inst.tasks().iter().zip(z).filter(|(_, &done)| done).map(|(t, _)| t.valuation()).sum()
}

/// Total sensing cost of a schedule. Entries outside capability sets are ignored.
pub fn total_cost(inst: &Instance, x: &[Vec<bool>]) -> f64 {
    (0..inst.num_users()).map(|i| inst.user_cost(i, &x[i])).sum()
}

/// Completed-task value minus sensing cost.
pub fn social_welfare(inst: &Instance, a: &Assignment) -> Result<f64, ModelError> {
    a.check_shape(inst)?;
    for (i, row) in a.x.iter().enumerate() {
        if let Some(k) = (0..row.len()).find(|&k| row[k] && !inst.user(i).can_sense(k)) {
            return Err(ModelError::OutsideCapability { user: i, item: k });
        }
    }
    Ok(total_value(inst, &a.z) - total_cost(inst, &a.x))
}

/// Fills in the item and task indicators implied by a schedule: an item is
/// sensed if any user senses it, a task completes if all its items are sensed.
pub fn derive_yz(inst: &Instance, x: &[Vec<bool>]) -> Result<Assignment, ModelError> {
    if x.len() != inst.num_users() || x.iter().any(|r| r.len() != inst.num_items()) {
        return Err(ModelError::Shape("schedule matrix must be users x items".into()));
    }
    for (i, row) in x.iter().enumerate() {
        let user = inst.user(i);
        if let Some(k) = (0..row.len()).find(|&k| row[k] && !user.can_sense(k)) {
            return Err(ModelError::OutsideCapability { user: i, item: k });
        }
        let spent = inst.user_cost(i, row);
        if spent > user.budget() + EPS {
            return Err(ModelError::BudgetExceeded { user: i, spent, budget: user.budget() });
        }
    }
    let y: Vec<bool> = (0..inst.num_items()).map(|k| x.iter().any(|row| row[k])).collect();
    let z = inst.tasks().iter().map(|t| t.requirement().iter().all(|&k| y[k])).collect();
    Ok(Assignment { x: x.to_vec(), y, z })
}

/// A single broken invariant found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Shape(String),
    OutsideCapability { user: usize, item: usize },
    Budget { user: usize, spent: f64, budget: f64 },
    ItemIndicator { item: usize, expected: bool },
    TaskIndicator { task: usize, expected: bool },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape(s) => write!(f, "shape: {s}"),
            Violation::OutsideCapability { user, item } => write!(f, "capability at i={user}, k={item}"),
            Violation::Budget { user, spent, budget } => write!(f, "budget at i={user} ({spent} > {budget})"),
            Violation::ItemIndicator { item, expected } => write!(f, "item indicator at k={item} (expected {expected})"),
            Violation::TaskIndicator { task, expected } => write!(f, "task indicator at j={task} (expected {expected})"),
        }
    }
}

/// Reports every violated constraint. An empty list means the assignment is
/// consistent with the instance.
pub fn validate(inst: &Instance, a: &Assignment) -> Vec<Violation> {
    if let Err(ModelError::Shape(s)) = a.check_shape(inst) {
        return vec![Violation::Shape(s)];
    }
    let mut out = Vec::new();
    for (i, row) in a.x.iter().enumerate() {
        let user = inst.user(i);
        for k in (0..row.len()).filter(|&k| row[k] && !user.can_sense(k)) {
            out.push(Violation::OutsideCapability { user: i, item: k });
        }
        let spent = inst.user_cost(i, row);
        if spent > user.budget() + EPS {
            out.push(Violation::Budget { user: i, spent, budget: user.budget() });
        }
    }
    for k in 0..inst.num_items() {
        let expected = a.x.iter().enumerate().any(|(i, row)| row[k] && inst.user(i).can_sense(k));
        if a.y[k] != expected {
            out.push(Violation::ItemIndicator { item: k, expected });
        }
    }
    for (j, t) in inst.tasks().iter().enumerate() {
        let expected = t.requirement().iter().all(|&k| a.y[k]);
        if a.z[j] != expected {
            out.push(Violation::TaskIndicator { task: j, expected });
        }
    }
    out
}

/// The relaxation of an [`Assignment`] with every indicator in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalAssignment {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl FractionalAssignment {
    pub fn value(&self, inst: &Instance) -> f64 {
        inst.tasks().iter().zip(&self.z).map(|(t, z)| t.valuation() * z).sum()
    }

    pub fn cost(&self, inst: &Instance) -> f64 {
        (0..inst.num_users()).map(|i| self.user_cost(inst, i)).sum()
    }

    pub fn user_cost(&self, inst: &Instance, i: usize) -> f64 {
        inst.user(i).costs().iter().map(|(&k, &c)| c * self.x[i][k]).sum()
    }

    pub fn welfare(&self, inst: &Instance) -> f64 {
        self.value(inst) - self.cost(inst)
    }

    /// True when every entry is within `tol` of 0 or 1.
    pub fn is_integral(&self, tol: f64) -> bool {
        let near = |v: f64| v.abs() <= tol || (v - 1.0).abs() <= tol;
        self.x.iter().flatten().all(|&v| near(v)) && self.y.iter().all(|&v| near(v)) && self.z.iter().all(|&v| near(v))
    }

    /// Rounds every entry to the nearest of 0 and 1.
    pub fn round(&self) -> Assignment {
        Assignment {
            x: self.x.iter().map(|r| r.iter().map(|&v| v > 0.5).collect()).collect(),
            y: self.y.iter().map(|&v| v > 0.5).collect(),
            z: self.z.iter().map(|&v| v > 0.5).collect(),
        }
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn schedule(inst: &Instance, pairs: &[(usize, usize)]) -> Schedule {
        let mut x = vec![vec![false; inst.num_items()]; inst.num_users()];
        for &(i, k) in pairs {
            x[i][k] = true;
        }
        x
    }

    #[test]
    fn shared_item_welfare() {
        let inst = shared_item(1.0);
        let a = derive_yz(&inst, &schedule(&inst, &[(0, 0)])).unwrap();
        assert_eq!(a.z, vec![true, true]);
        assert!((social_welfare(&inst, &a).unwrap() - 0.9).abs() < EPS);
    }

    #[test]
    fn empty_assignment_has_zero_welfare() {
        let inst = overlapping_tasks();
        assert_eq!(social_welfare(&inst, &Assignment::empty(&inst)).unwrap(), 0.0);
    }

    #[test]
    fn overlapping_tasks_welfare_matches_hand_sum() {
        let inst = overlapping_tasks();
        // Covers all of task 0's items; task 1 misses item 8 (nobody senses it).
        let pairs = [(0, 0), (0, 3), (0, 5), (0, 6), (1, 1), (1, 4), (1, 7), (2, 2), (2, 9), (2, 10)];
        let a = derive_yz(&inst, &schedule(&inst, &pairs)).unwrap();
        assert_eq!(a.z, vec![true, false]);
        let hand_cost = 0.3 + 0.4 + 0.5 + 0.1 + 0.3 + 0.6 + 0.35 + 0.4 + 0.3 + 0.2;
        let w = social_welfare(&inst, &a).unwrap();
        assert!((w - (3.0 - hand_cost)).abs() < EPS, "{w}");
    }

    #[test]
    fn overlapping_tasks_single_item_derivation() {
        let inst = overlapping_tasks();
        let a = derive_yz(&inst, &schedule(&inst, &[(0, 0)])).unwrap();
        assert!(a.y[0]);
        assert!(a.y[1..].iter().all(|&b| !b));
        assert_eq!(a.z, vec![false, false]);
    }

    #[test]
    fn second_task_completes_without_item_three() {
        // Everything task 1 needs except that item 8 is made sensible here.
        let mut users = overlapping_tasks().users().to_vec();
        users[1] = User::new([(0, 0.2), (1, 0.3), (2, 0.25), (4, 0.6), (7, 0.35), (8, 0.1)], 2.0).unwrap();
        let inst = Instance::new(12, users, overlapping_tasks().tasks().to_vec()).unwrap();
        let pairs = [(1, 0), (1, 1), (1, 2), (1, 7), (1, 8), (2, 9), (2, 10)];
        let a = derive_yz(&inst, &schedule(&inst, &pairs)).unwrap();
        assert!(!a.y[3]);
        assert_eq!(a.z, vec![false, true]);
    }

    #[test]
    fn zero_schedule_derives_zero_indicators() {
        let inst = overlapping_tasks();
        let a = derive_yz(&inst, &schedule(&inst, &[])).unwrap();
        assert_eq!(a, Assignment::empty(&inst));
    }

    #[test]
    fn derive_rejects_budget_violation() {
        let inst = shared_item(0.1);
        let err = derive_yz(&inst, &schedule(&inst, &[(0, 0)])).unwrap_err();
        assert!(matches!(err, ModelError::BudgetExceeded { user: 0, .. }));
    }

    #[test]
    fn derive_rejects_outside_capability() {
        let inst = overlapping_tasks();
        let err = derive_yz(&inst, &schedule(&inst, &[(0, 1)])).unwrap_err();
        assert_eq!(err, ModelError::OutsideCapability { user: 0, item: 1 });
    }

    #[test]
    fn validate_reports_each_violation() {
        let inst = overlapping_tasks();
        let ok = derive_yz(&inst, &schedule(&inst, &[(1, 0)])).unwrap();
        assert!(validate(&inst, &ok).is_empty());

        let mut bad = Assignment::empty(&inst);
        bad.y[0] = true;
        let v = validate(&inst, &bad);
        assert_eq!(v, vec![Violation::ItemIndicator { item: 0, expected: false }]);
        assert_eq!(v[0].to_string(), "item indicator at k=0 (expected false)");

        let tight = shared_item(0.1);
        let mut over = Assignment::empty(&tight);
        over.x[0][0] = true;
        over.y[0] = true;
        over.z = vec![true, true];
        let v = validate(&tight, &over);
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0], Violation::Budget { user: 0, .. }));
    }

    #[test]
    fn validate_flags_task_indicator() {
        let inst = shared_item(1.0);
        let mut a = derive_yz(&inst, &schedule(&inst, &[(0, 0)])).unwrap();
        a.z[1] = false;
        assert_eq!(validate(&inst, &a), vec![Violation::TaskIndicator { task: 1, expected: true }]);
    }

    #[test]
    fn construction_rejects_duplicates_and_bad_values() {
        assert!(matches!(Task::new([1, 2, 1], 1.0), Err(ModelError::DuplicateItem { item: 1, .. })));
        assert!(matches!(User::new([(0, 0.1), (0, 0.2)], 1.0), Err(ModelError::DuplicateItem { .. })));
        let t = Task::new([0], 0.0).unwrap();
        assert!(matches!(Instance::new(1, vec![], vec![t]), Err(ModelError::InvalidValuation { .. })));
        let t = Task::new([3], 1.0).unwrap();
        assert!(matches!(Instance::new(2, vec![], vec![t]), Err(ModelError::ItemOutOfRange { item: 3, .. })));
        let u = User::new([(0, -0.1)], 1.0).unwrap();
        assert!(matches!(Instance::new(1, vec![u], vec![]), Err(ModelError::InvalidCost { .. })));
        let t = Task::new(Vec::<usize>::new(), 1.0).unwrap();
        assert!(matches!(Instance::new(1, vec![], vec![t]), Err(ModelError::EmptyRequirement { task: 0 })));
    }

    #[test]
    fn json_format_uses_string_item_keys() {
        let inst = shared_item(1.0);
        let v: serde_json::Value = serde_json::from_str(&inst.to_json()).unwrap();
        assert_eq!(v["users"][0]["costs"]["0"], 0.2);
        assert_eq!(v["tasks"][1]["valuation"], 0.6);
        assert_eq!(Instance::from_json(&inst.to_json()).unwrap(), inst);
    }

    #[test]
    fn json_rejects_mismatched_costs() {
        let s = r#"{"num_items":2,"users":[{"capability":[0,1],"costs":{"0":0.1},"budget":1}],"tasks":[]}"#;
        assert!(Instance::from_json(s).is_err());
        let s = r#"{"num_items":2,"users":[],"tasks":[{"requirement":[0,1],"valuation":1.0,"item_valuations":{"0":0.4,"1":0.5}}]}"#;
        assert!(Instance::from_json(s).is_err());
        let s = r#"{"num_items":2,"users":[],"tasks":[{"requirement":[0,1],"valuation":0.9,"item_valuations":{"0":0.4,"1":0.5}}]}"#;
        assert!(Instance::from_json(s).is_ok());
    }

    #[test]
    fn item_valuations_sum_to_valuation() {
        let t = Task::from_item_values([(2, 0.25), (0, 0.5)]).unwrap();
        assert_eq!(t.requirement(), &[0, 2]);
        assert!((t.valuation() - 0.75).abs() < EPS);
    }
}
