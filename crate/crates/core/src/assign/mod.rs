//! Welfare-maximizing assignment.
//!
//! The max/min indicator equalities are replaced by linear rows: an item is
//! sensed at least as much as any user sensing it and at most the sum of
//! them, and a task completes no more than any of its items. Together with
//! the per-user budget rows this gives a binary program whose LP relaxation
//! drives an exact branch-and-bound.
//!
//! The search itself works on an equivalent smaller LP with the item
//! indicators projected out. Node bounds are tightened with knapsack cover
//! cuts on the budget rows plus reduced-cost fixing. Schedules that differ
//! from a canonical one only by permuting interchangeable items are skipped.

mod simplex;

use std::collections::BTreeMap;
use std::fmt;

pub use simplex::{Constraint, LinearProgram, LpResult, LpStatus, Pricing, Sense};
use simplex::Tableau;

use crate::model::{derive_yz, social_welfare, Assignment, FractionalAssignment, Instance, Schedule, Task, User, EPS};

/// Entries closer than this to 0 or 1 count as integral.
const INTEGRALITY_TOL: f64 = 1e-9;
/// A cut must be violated by more than this to be added.
const CUT_TOL: f64 = 1e-6;
/// Cut rounds at the root and at every other node.
const ROOT_CUT_ROUNDS: usize = 20;
const NODE_CUT_ROUNDS: usize = 2;

/// One binary decision variable of the assignment program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    /// User senses item.
    X { user: usize, item: usize },
    /// Item is sensed.
    Y { item: usize },
    /// Task completes.
    Z { task: usize },
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X { user, item } => write!(f, "x{user}_{item}"),
            Var::Y { item } => write!(f, "y{item}"),
            Var::Z { task } => write!(f, "z{task}"),
        }
    }
}

/// What a row of the program encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    /// Sensing cost of `user` within its budget.
    Budget { user: usize },
    /// `y_item >= x_user,item`.
    Covers { item: usize, user: usize },
    /// `y_item <= sum of x_*,item`.
    Support { item: usize },
    /// `z_task <= y_item`.
    Needs { task: usize, item: usize },
}

impl fmt::Display for RowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowKind::Budget { user } => write!(f, "budget[{user}]"),
            RowKind::Covers { item, user } => write!(f, "covers[{item},{user}]"),
            RowKind::Support { item } => write!(f, "support[{item}]"),
            RowKind::Needs { task, item } => write!(f, "needs[{task},{item}]"),
        }
    }
}

/// The linearized binary program for one instance. Variables are ordered
/// x (by user, item), then y (by item), then z (by task).
#[derive(Debug, Clone, PartialEq)]
pub struct MilpModel {
    pub vars: Vec<Var>,
    pub rows: Vec<RowKind>,
    pub lp: LinearProgram,
    x_index: BTreeMap<(usize, usize), usize>,
    num_users: usize,
    num_items: usize,
    num_tasks: usize,
}

impl MilpModel {
    pub fn num_x(&self) -> usize {
        self.x_index.len()
    }

    pub fn x_var(&self, user: usize, item: usize) -> Option<usize> {
        self.x_index.get(&(user, item)).copied()
    }

    pub fn y_var(&self, item: usize) -> usize {
        self.num_x() + item
    }

    pub fn z_var(&self, task: usize) -> usize {
        self.num_x() + self.num_items + task
    }

    pub fn count_rows(&self, pred: impl Fn(&RowKind) -> bool) -> usize {
        self.rows.iter().filter(|r| pred(r)).count()
    }

    /// Maps a variable vector back to assignment shape.
    pub fn to_fractional(&self, values: &[f64]) -> FractionalAssignment {
        let mut x = vec![vec![0.0; self.num_items]; self.num_users];
        for (&(i, k), &v) in &self.x_index {
            x[i][k] = values[v];
        }
        let y = (0..self.num_items).map(|k| values[self.y_var(k)]).collect();
        let z = (0..self.num_tasks).map(|j| values[self.z_var(j)]).collect();
        FractionalAssignment { x, y, z }
    }
}

/// Plain-text dump: an objective line, one line per row, then the bounds.
impl fmt::Display for MilpModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let term = |f: &mut fmt::Formatter<'_>, j: usize, a: f64| write!(f, " {a:+} {}", self.vars[j]);
        write!(f, "max:")?;
        for (j, &c) in self.lp.objective.iter().enumerate().filter(|(_, &c)| c != 0.0) {
            term(f, j, c)?;
        }
        writeln!(f)?;
        for (kind, c) in self.rows.iter().zip(&self.lp.constraints) {
            write!(f, "{kind}:")?;
            for &(j, a) in &c.terms {
                term(f, j, a)?;
            }
            let op = match c.sense {
                Sense::Le => "<=",
                Sense::Ge => ">=",
                Sense::Eq => "=",
            };
            writeln!(f, " {op} {}", c.rhs)?;
        }
        writeln!(f, "bounds: 0 <= all <= 1")
    }
}

/// Builds the linearized program for `inst`.
pub fn linearize(inst: &Instance) -> MilpModel {
    let pairs = inst.pairs();
    let mut vars: Vec<Var> = pairs.iter().map(|&(user, item)| Var::X { user, item }).collect();
    let x_index: BTreeMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(v, &p)| (p, v)).collect();
    vars.extend((0..inst.num_items()).map(|item| Var::Y { item }));
    vars.extend((0..inst.num_tasks()).map(|task| Var::Z { task }));

    let n = vars.len();
    let mut lp = LinearProgram::new(n);
    lp.upper = vec![1.0; n];
    let nx = pairs.len();
    let y = |k: usize| nx + k;
    let z = |j: usize| nx + inst.num_items() + j;
    for (v, &(i, k)) in pairs.iter().enumerate() {
        lp.objective[v] = -inst.user(i).cost(k).unwrap();
    }
    for (j, t) in inst.tasks().iter().enumerate() {
        lp.objective[z(j)] = t.valuation();
    }

    let mut rows = Vec::new();
    for (i, u) in inst.users().iter().enumerate() {
        let terms = u.capability().iter().map(|&k| (x_index[&(i, k)], u.cost(k).unwrap())).collect();
        lp.add(terms, Sense::Le, u.budget());
        rows.push(RowKind::Budget { user: i });
    }
    for k in 0..inst.num_items() {
        let sensers = inst.users_of(k);
        for &i in &sensers {
            lp.add(vec![(x_index[&(i, k)], 1.0), (y(k), -1.0)], Sense::Le, 0.0);
            rows.push(RowKind::Covers { item: k, user: i });
        }
        let mut terms = vec![(y(k), 1.0)];
        terms.extend(sensers.iter().map(|&i| (x_index[&(i, k)], -1.0)));
        lp.add(terms, Sense::Le, 0.0);
        rows.push(RowKind::Support { item: k });
    }
    for (j, t) in inst.tasks().iter().enumerate() {
        for &k in t.requirement() {
            lp.add(vec![(z(j), 1.0), (y(k), -1.0)], Sense::Le, 0.0);
            rows.push(RowKind::Needs { task: j, item: k });
        }
    }
    MilpModel {
        vars,
        rows,
        lp,
        x_index,
        num_users: inst.num_users(),
        num_items: inst.num_items(),
        num_tasks: inst.num_tasks(),
    }
}

/// Optimal LP solution of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<f64>,
    pub objective: f64,
}

/// Solves the LP relaxation with some variables fixed to 0 or 1.
pub fn solve_lp(model: &MilpModel, fixings: &[(usize, bool)]) -> LpSolution {
    let mut lp = model.lp.clone();
    for &(v, on) in fixings {
        let b = if on { 1.0 } else { 0.0 };
        lp.lower[v] = b;
        lp.upper[v] = b;
    }
    let r = lp.solve();
    LpSolution { status: r.status, values: r.x, objective: r.objective }
}

/// LP relaxation of the assignment program; its objective bounds the
/// integral optimum from above.
pub fn solve_relaxation(inst: &Instance) -> (FractionalAssignment, f64) {
    let model = linearize(inst);
    let sol = solve_lp(&model, &[]);
    assert_eq!(sol.status, LpStatus::Optimal, "assignment LP always has the zero point and is bounded");
    (model.to_fractional(&sol.values), sol.objective)
}

/// Result of [`solve_exact_detailed`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    pub assignment: Assignment,
    pub welfare: f64,
    /// Root LP bound of the reduced program.
    pub root_bound: f64,
    pub nodes: usize,
}

/// Welfare-optimal integral assignment.
pub fn solve_exact(inst: &Instance) -> Assignment {
    solve_exact_detailed(inst).assignment
}

pub fn solve_exact_detailed(inst: &Instance) -> ExactSolution {
    let reduced = Reduction::new(inst);
    let (x, root_bound, nodes) = branch_and_bound(&reduced.instance);
    let assignment = derive_yz(inst, &reduced.lift(&x)).expect("branch-and-bound schedules are feasible");
    let welfare = social_welfare(inst, &assignment).unwrap();
    ExactSolution { assignment, welfare, root_bound, nodes }
}

/// Presolve. Tasks that can never complete are dropped first, then any item
/// no remaining task needs. Pairs costing more than the user's whole budget
/// go too. None of these can contribute positive welfare.
struct Reduction {
    instance: Instance,
    items: Vec<usize>,
    num_items: usize,
}

impl Reduction {
    fn new(inst: &Instance) -> Self {
        let usable = |i: usize, k: usize| inst.user(i).cost(k).is_some_and(|c| c <= inst.user(i).budget() + EPS);
        let coverable: Vec<bool> = (0..inst.num_items()).map(|k| (0..inst.num_users()).any(|i| usable(i, k))).collect();
        let tasks: Vec<&Task> = inst.tasks().iter().filter(|t| t.requirement().iter().all(|&k| coverable[k])).collect();
        let mut needed = vec![false; inst.num_items()];
        for t in &tasks {
            for &k in t.requirement() {
                needed[k] = true;
            }
        }
        let items: Vec<usize> = (0..inst.num_items()).filter(|&k| needed[k]).collect();
        let mut new_index = vec![usize::MAX; inst.num_items()];
        for (n, &k) in items.iter().enumerate() {
            new_index[k] = n;
        }
        let users = (0..inst.num_users())
            .map(|i| {
                let u = inst.user(i);
                let costs = u.capability().iter().filter(|&&k| needed[k] && usable(i, k)).map(|&k| (new_index[k], u.cost(k).unwrap()));
                User::new(costs, u.budget()).unwrap()
            })
            .collect();
        let tasks = tasks
            .iter()
            .map(|t| Task::new(t.requirement().iter().map(|&k| new_index[k]), t.valuation()).unwrap())
            .collect();
        let instance = Instance::new(items.len(), users, tasks).expect("reduction preserves validity");
        Self { instance, items, num_items: inst.num_items() }
    }

    fn lift(&self, x: &Schedule) -> Schedule {
        x.iter()
            .map(|row| {
                let mut full = vec![false; self.num_items];
                for (n, &on) in row.iter().enumerate() {
                    full[self.items[n]] = on;
                }
                full
            })
            .collect()
    }
}


/// The linearized program with y projected out: every task row reads
/// z_j <= sum of x over the users able to sense k. Choosing
/// y_k = min(1, sum_i x_ik) recovers a feasible point of the full program
/// with the same objective, so both LPs have the same optimum, but this one
/// has far fewer rows. Variables are the x pairs in `inst.pairs()` order,
/// then z.
fn projected_lp(inst: &Instance) -> (LinearProgram, Vec<(usize, usize)>) {
    let pairs = inst.pairs();
    let nx = pairs.len();
    let index: BTreeMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(v, &p)| (p, v)).collect();
    let mut lp = LinearProgram::new(nx + inst.num_tasks());
    lp.upper = vec![1.0; lp.objective.len()];
    for (v, &(i, k)) in pairs.iter().enumerate() {
        lp.objective[v] = -inst.user(i).cost(k).unwrap();
    }
    for (i, u) in inst.users().iter().enumerate() {
        let terms = u.capability().iter().map(|&k| (index[&(i, k)], u.cost(k).unwrap())).collect();
        lp.add(terms, Sense::Le, u.budget());
    }
    let sensers: Vec<Vec<usize>> = (0..inst.num_items()).map(|k| inst.users_of(k)).collect();
    for (j, t) in inst.tasks().iter().enumerate() {
        lp.objective[nx + j] = t.valuation();
        for &k in t.requirement() {
            let mut terms = vec![(nx + j, 1.0)];
            terms.extend(sensers[k].iter().map(|&i| (index[&(i, k)], -1.0)));
            lp.add(terms, Sense::Le, 0.0);
        }
    }
    (lp, pairs)
}

fn most_fractional(values: &[f64], range: std::ops::Range<usize>) -> Option<usize> {
    let mut branch = None;
    let mut most = INTEGRALITY_TOL;
    for v in range {
        let frac = values[v].min(1.0 - values[v]);
        if frac > most {
            most = frac;
            branch = Some(v);
        }
    }
    branch
}

/// Local search on a feasible schedule: keeps one sensing user per item,
/// then repeatedly moves items to cheaper users, swaps items between pairs
/// of users, adds tasks that pay for their missing items and drops tasks
/// that cost more than they are worth, until nothing improves.
fn polish(inst: &Instance, x: &Schedule) -> Schedule {
    let cost = |i: usize, k: usize| inst.user(i).cost(k).unwrap();
    let mut owner: Vec<Option<usize>> = vec![None; inst.num_items()];
    let mut left: Vec<f64> = inst.users().iter().map(User::budget).collect();
    for (i, row) in x.iter().enumerate() {
        for k in (0..row.len()).filter(|&k| row[k]) {
            match owner[k] {
                Some(o) if cost(o, k) <= cost(i, k) => {}
                _ => owner[k] = Some(i),
            }
        }
    }
    for (k, o) in owner.iter().enumerate() {
        if let Some(i) = *o {
            left[i] -= cost(i, k);
        }
    }
    let users_of: Vec<Vec<usize>> = (0..inst.num_items()).map(|k| inst.users_of(k)).collect();
    let tasks_of: Vec<Vec<usize>> = (0..inst.num_items()).map(|k| inst.tasks_requiring(k)).collect();
    let complete = |owner: &[Option<usize>], j: usize| inst.task(j).requirement().iter().all(|&k| owner[k].is_some());
    // Items no completed task needs are released.
    let release_unused = |owner: &mut Vec<Option<usize>>, left: &mut Vec<f64>| {
        for k in 0..owner.len() {
            if let Some(i) = owner[k] {
                if !tasks_of[k].iter().any(|&j| complete(owner, j)) {
                    left[i] += cost(i, k);
                    owner[k] = None;
                }
            }
        }
    };
    release_unused(&mut owner, &mut left);

    for _ in 0..inst.num_items() + inst.num_tasks() + 1 {
        let mut improved = false;
        for k in 0..owner.len() {
            let Some(i) = owner[k] else { continue };
            for &u in &users_of[k] {
                let c = cost(u, k);
                if u != i && c < cost(i, k) - EPS && c <= left[u] + EPS {
                    left[i] += cost(i, k);
                    left[u] -= c;
                    owner[k] = Some(u);
                    improved = true;
                    break;
                }
            }
        }
        for k in 0..owner.len() {
            for l in k + 1..owner.len() {
                let (Some(i), Some(u)) = (owner[k], owner[l]) else { continue };
                if i == u || !inst.user(u).can_sense(k) || !inst.user(i).can_sense(l) {
                    continue;
                }
                let (old_i, old_u) = (cost(i, k), cost(u, l));
                let (new_i, new_u) = (cost(i, l), cost(u, k));
                if new_i + new_u < old_i + old_u - EPS
                    && new_i <= left[i] + old_i + EPS
                    && new_u <= left[u] + old_u + EPS
                {
                    left[i] += old_i - new_i;
                    left[u] += old_u - new_u;
                    owner[k] = Some(u);
                    owner[l] = Some(i);
                    improved = true;
                }
            }
        }
        for j in 0..inst.num_tasks() {
            if complete(&owner, j) {
                continue;
            }
            let mut picks = Vec::new();
            let mut extra = 0.0;
            for &k in inst.task(j).requirement() {
                if owner[k].is_some() {
                    continue;
                }
                let best = users_of[k]
                    .iter()
                    .copied()
                    .filter(|&u| cost(u, k) <= left[u] + EPS)
                    .min_by(|&a, &b| cost(a, k).total_cmp(&cost(b, k)).then(a.cmp(&b)));
                let Some(u) = best else {
                    extra = f64::INFINITY;
                    break;
                };
                left[u] -= cost(u, k);
                extra += cost(u, k);
                picks.push((u, k));
            }
            if inst.task(j).valuation() > extra + EPS {
                for &(u, k) in &picks {
                    owner[k] = Some(u);
                }
                improved = true;
            } else {
                for &(u, k) in &picks {
                    left[u] += cost(u, k);
                }
            }
        }
        for j in 0..inst.num_tasks() {
            if !complete(&owner, j) {
                continue;
            }
            // Items that only this completed task uses.
            let own: Vec<usize> = inst
                .task(j)
                .requirement()
                .iter()
                .copied()
                .filter(|&k| tasks_of[k].iter().all(|&t| t == j || !complete(&owner, t)))
                .collect();
            let saving: f64 = own.iter().map(|&k| cost(owner[k].unwrap(), k)).sum();
            if saving > inst.task(j).valuation() + EPS {
                for &k in &own {
                    left[owner[k].unwrap()] += cost(owner[k].unwrap(), k);
                    owner[k] = None;
                }
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    let mut out = vec![vec![false; inst.num_items()]; inst.num_users()];
    for (k, o) in owner.iter().enumerate() {
        if let Some(i) = *o {
            out[i][k] = true;
        }
    }
    out
}

/// Rounding heuristic: visits tasks by decreasing LP completion and adds a
/// task whenever its missing items can be bought within the remaining
/// budgets at a cost below its value. Each missing item goes to the user with
/// the largest LP share, cheapest first on ties.
fn greedy_completion(inst: &Instance, pairs: &[(usize, usize)], values: &[f64]) -> Schedule {
    let nx = pairs.len();
    let share: BTreeMap<(usize, usize), f64> = pairs.iter().copied().zip(values.iter().copied()).collect();
    let mut order: Vec<usize> = (0..inst.num_tasks()).collect();
    order.sort_by(|&a, &b| values[nx + b].total_cmp(&values[nx + a]).then(a.cmp(&b)));
    let mut x = vec![vec![false; inst.num_items()]; inst.num_users()];
    let mut sensed = vec![false; inst.num_items()];
    let mut left: Vec<f64> = inst.users().iter().map(User::budget).collect();
    let mut picks = Vec::new();
    for j in order {
        let task = inst.task(j);
        picks.clear();
        let mut cost = 0.0;
        let mut ok = true;
        for &k in task.requirement() {
            if sensed[k] {
                continue;
            }
            let pick = inst
                .users_of(k)
                .into_iter()
                .map(|i| (i, inst.user(i).cost(k).unwrap()))
                .filter(|&(i, c)| c <= left[i] + EPS)
                .max_by(|a, b| share[&(a.0, k)].total_cmp(&share[&(b.0, k)]).then(b.1.total_cmp(&a.1)).then(b.0.cmp(&a.0)));
            match pick {
                Some((i, c)) => {
                    left[i] -= c;
                    cost += c;
                    picks.push((i, k, c));
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && task.valuation() > cost {
            for &(i, k, _) in &picks {
                x[i][k] = true;
                sensed[k] = true;
            }
        } else {
            for &(i, _, c) in &picks {
                left[i] += c;
            }
        }
    }
    x
}

/// Separates knapsack cover inequalities from the budget rows: if a set of a
/// user's pairs costs more than the budget, at most all but one of them can
/// be scheduled. Covers are grown greedily by `(1 - x) / cost`, made minimal,
/// then extended with every pair at least as costly as the dearest member.
struct CoverSeparator {
    by_user: Vec<Vec<(usize, f64)>>,
    budgets: Vec<f64>,
}

impl CoverSeparator {
    fn new(inst: &Instance, pairs: &[(usize, usize)]) -> Self {
        let mut by_user = vec![Vec::new(); inst.num_users()];
        for (v, &(i, k)) in pairs.iter().enumerate() {
            by_user[i].push((v, inst.user(i).cost(k).unwrap()));
        }
        Self { by_user, budgets: inst.users().iter().map(User::budget).collect() }
    }

    fn separate(&self, values: &[f64]) -> Vec<(Vec<(usize, f64)>, f64)> {
        let mut cuts = Vec::new();
        for (pairs, &budget) in self.by_user.iter().zip(&self.budgets) {
            let mut order: Vec<(usize, f64)> = pairs.iter().copied().filter(|&(v, _)| values[v] > INTEGRALITY_TOL).collect();
            order.sort_by(|a, b| ((1.0 - values[a.0]) / a.1).total_cmp(&((1.0 - values[b.0]) / b.1)).then(a.0.cmp(&b.0)));
            let mut cover = Vec::new();
            let mut weight = 0.0;
            for &(v, c) in &order {
                if weight > budget + EPS {
                    break;
                }
                cover.push((v, c));
                weight += c;
            }
            if weight <= budget + EPS {
                continue;
            }
            // Drop the loosest members while the set still overflows.
            cover.sort_by(|a, b| values[a.0].total_cmp(&values[b.0]).then(a.0.cmp(&b.0)));
            let mut n = 0;
            while n < cover.len() {
                if weight - cover[n].1 > budget + EPS {
                    weight -= cover[n].1;
                    cover.remove(n);
                } else {
                    n += 1;
                }
            }
            let slack: f64 = cover.iter().map(|&(v, _)| 1.0 - values[v]).sum();
            if slack >= 1.0 - CUT_TOL {
                continue;
            }
            let dearest = cover.iter().map(|&(_, c)| c).fold(0.0, f64::max);
            let terms = pairs
                .iter()
                .filter(|&&(v, c)| c >= dearest || cover.iter().any(|&(u, _)| u == v))
                .map(|&(v, _)| (v, 1.0))
                .collect();
            cuts.push((terms, (cover.len() - 1) as f64));
        }
        cuts
    }
}

/// Fixings implied by scheduling a pair, restricted to a canonical family of
/// schedules that always contains an optimum: every sensed item has exactly
/// one sensing user, and among interchangeable items (same users, same
/// costs) a lower-numbered item never has a higher-numbered user than a
/// higher-numbered one when both are sensed. Any optimum maps into the family
/// by dropping duplicate sensers and sorting users within each class.
struct Symmetry {
    implied_zero: Vec<Vec<usize>>,
}

impl Symmetry {
    fn new(inst: &Instance, pairs: &[(usize, usize)]) -> Self {
        let index: BTreeMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(v, &p)| (p, v)).collect();
        let sensers: Vec<Vec<(usize, f64)>> = (0..inst.num_items())
            .map(|k| inst.users_of(k).into_iter().map(|i| (i, inst.user(i).cost(k).unwrap())).collect())
            .collect();
        let implied_zero = pairs
            .iter()
            .map(|&(u, k)| {
                let mut out: Vec<usize> = sensers[k].iter().filter(|&&(i, _)| i != u).map(|&(i, _)| index[&(i, k)]).collect();
                for other in (0..inst.num_items()).filter(|&l| l != k && sensers[l] == sensers[k]) {
                    let wrong_side = |i: usize| if other > k { i < u } else { i > u };
                    out.extend(sensers[other].iter().filter(|&&(i, _)| wrong_side(i)).map(|&(i, _)| index[&(i, other)]));
                }
                out.sort_unstable();
                out
            })
            .collect();
        Self { implied_zero }
    }
}

struct Node {
    tableau: Tableau,
    fixings: Vec<(usize, bool)>,
    solved: bool,
}

/// Depth-first branch-and-bound. A fractional task indicator is branched on
/// first; once every z is integral the most fractional x is chosen. Ties go
/// to the lowest index and the 1-branch is explored first. Returns the
/// schedule, the root bound and the node count.
fn branch_and_bound(inst: &Instance) -> (Schedule, f64, usize) {
    let (lp, pairs) = projected_lp(inst);
    let nx = pairs.len();
    let mut best_x = vec![vec![false; inst.num_items()]; inst.num_users()];
    let mut best_w = 0.0;
    if nx == 0 {
        return (best_x, 0.0, 0);
    }
    let mut root = Tableau::new(&lp, Pricing::Hybrid);
    let status = root.solve();
    assert_eq!(status, LpStatus::Optimal, "root LP of the assignment program is always solvable");
    let root_bound = root.objective();

    let schedule = |values: &[f64], round: &dyn Fn(f64) -> bool| {
        let mut x = vec![vec![false; inst.num_items()]; inst.num_users()];
        for (&(i, k), &v) in pairs.iter().zip(values) {
            x[i][k] = round(v);
        }
        x
    };
    let consider = |x: Schedule, best_x: &mut Schedule, best_w: &mut f64| {
        let a = derive_yz(inst, &x).expect("rounded schedules respect budgets");
        let w = social_welfare(inst, &a).unwrap();
        if w > *best_w + EPS {
            *best_w = w;
            *best_x = x;
        }
    };

    let separator = CoverSeparator::new(inst, &pairs);
    let symmetry = Symmetry::new(inst, &pairs);
    let max_rows = 2 * lp.constraints.len() + 4 * inst.num_users();
    // Re-solves a node after bound changes or new cuts. A stalled warm start
    // falls back to a cold Bland solve without the node's cuts.
    let settle = |node: &mut Node| {
        let status = node.tableau.reoptimize();
        if status != LpStatus::Stalled {
            return status;
        }
        let mut lp = lp.clone();
        for &(v, on) in &node.fixings {
            let b = if on { 1.0 } else { 0.0 };
            lp.lower[v] = b;
            lp.upper[v] = b;
        }
        node.tableau = Tableau::new(&lp, Pricing::Bland);
        node.tableau.solve()
    };

    let mut nodes = 0;
    let mut stack = vec![Node { tableau: root, fixings: Vec::new(), solved: true }];
    'nodes: while let Some(mut node) = stack.pop() {
        nodes += 1;
        if !node.solved && settle(&mut node) != LpStatus::Optimal {
            continue;
        }
        let rounds = if nodes == 1 { ROOT_CUT_ROUNDS } else { NODE_CUT_ROUNDS };
        for _ in 0..rounds {
            if node.tableau.objective() <= best_w + EPS || node.tableau.num_rows() >= max_rows {
                break;
            }
            let cuts = separator.separate(&node.tableau.values());
            if cuts.is_empty() {
                break;
            }
            for (terms, rhs) in &cuts {
                node.tableau.add_le_row(terms, *rhs);
            }
            if settle(&mut node) != LpStatus::Optimal {
                continue 'nodes;
            }
        }
        let bound = node.tableau.objective();
        if bound <= best_w + EPS {
            continue;
        }
        node.tableau.fix_by_reduced_cost(bound - best_w - EPS);
        let values = node.tableau.values();
        let branch = most_fractional(&values, nx..values.len()).or_else(|| most_fractional(&values, 0..nx));
        let Some(p) = branch else {
            consider(schedule(&values, &|v| v > 0.5), &mut best_x, &mut best_w);
            continue;
        };
        consider(schedule(&values, &|v| v >= 1.0 - INTEGRALITY_TOL), &mut best_x, &mut best_w);
        consider(polish(inst, &greedy_completion(inst, &pairs, &values)), &mut best_x, &mut best_w);

        let mut zero = node.tableau.clone();
        zero.set_bounds(p, 0.0, 0.0);
        let mut zero_fix = node.fixings.clone();
        zero_fix.push((p, false));
        stack.push(Node { tableau: zero, fixings: zero_fix, solved: false });
        let mut one = node.tableau;
        one.set_bounds(p, 1.0, 1.0);
        let mut one_fix = node.fixings;
        one_fix.push((p, true));
        if p < nx {
            let implied = &symmetry.implied_zero[p];
            if implied.iter().any(|&q| one.bounds(q).0 > 0.5) {
                continue;
            }
            for &q in implied {
                one.set_bounds(q, 0.0, 0.0);
                one_fix.push((q, false));
            }
        }
        stack.push(Node { tableau: one, fixings: one_fix, solved: false });
    }
    (best_x, root_bound, nodes)
}
