//! Seeded random markets and the no-reuse transform.
//!
//! Randomness comes from [`SeededRng`], a ChaCha8 stream. Draw order for
//! [`generate`] is fixed: item positions, user positions, task requirements,
//! costs, budgets, item values, each in ascending index order.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{Instance, ModelError, Task, User};

/// Portable 64-bit generator. `next_u64` is the raw ChaCha8 stream seeded
/// through `seed_from_u64`; floats take the top 53 bits.
#[derive(Debug, Clone)]
pub struct SeededRng(ChaCha8Rng);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[lo, hi)`.
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }

    /// `count` distinct values from `0..n` via a partial Fisher-Yates
    /// shuffle, returned sorted.
    pub fn distinct(&mut self, n: usize, count: usize) -> Vec<usize> {
        let mut pool: Vec<usize> = (0..n).collect();
        for t in 0..count {
            let r = t + self.index(n - t);
            pool.swap(t, r);
        }
        let mut out = pool[..count].to_vec();
        out.sort_unstable();
        out
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("items_per_task ({items_per_task}) exceeds num_items ({num_items})")]
    TooManyItemsPerTask { items_per_task: usize, num_items: usize },
    #[error("invalid range for {0}")]
    BadRange(&'static str),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Simulation setup. Defaults: 8 users and 8 tasks on a 10 km square, 5 km
/// sensing radius, 5 items per task, costs in [0, 1], budgets in [0, 5],
/// per-item task values in [0, 1.5].
#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub num_users: usize,
    pub num_tasks: usize,
    pub num_items: usize,
    pub area_km: f64,
    pub sense_radius_km: f64,
    pub items_per_task: usize,
    pub cost_range: (f64, f64),
    pub budget_range: (f64, f64),
    pub item_value_range: (f64, f64),
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            num_users: 8,
            num_tasks: 8,
            num_items: 5,
            area_km: 10.0,
            sense_radius_km: 5.0,
            items_per_task: 5,
            cost_range: (0.0, 1.0),
            budget_range: (0.0, 5.0),
            item_value_range: (0.0, 1.5),
            seed: 0,
        }
    }
}

impl GenParams {
    pub fn with_items(mut self, num_items: usize) -> Self {
        self.num_items = num_items;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn check(&self) -> Result<(), GenError> {
        if self.items_per_task > self.num_items {
            return Err(GenError::TooManyItemsPerTask { items_per_task: self.items_per_task, num_items: self.num_items });
        }
        let ok = |(lo, hi): (f64, f64)| lo >= 0.0 && hi >= lo && hi.is_finite();
        if !ok(self.cost_range) {
            return Err(GenError::BadRange("cost_range"));
        }
        if !ok(self.budget_range) {
            return Err(GenError::BadRange("budget_range"));
        }
        if !ok(self.item_value_range) {
            return Err(GenError::BadRange("item_value_range"));
        }
        if !(self.area_km > 0.0 && self.sense_radius_km >= 0.0) {
            return Err(GenError::BadRange("area_km / sense_radius_km"));
        }
        Ok(())
    }
}

/// Places items and users uniformly in the square; each user can sense the
/// items within its radius.
pub fn generate(params: &GenParams) -> Result<Instance, GenError> {
    params.check()?;
    let mut rng = SeededRng::new(params.seed);
    let side = params.area_km;
    let point = |rng: &mut SeededRng| (rng.range(0.0, side), rng.range(0.0, side));
    let items: Vec<(f64, f64)> = (0..params.num_items).map(|_| point(&mut rng)).collect();
    let users: Vec<(f64, f64)> = (0..params.num_users).map(|_| point(&mut rng)).collect();
    let requirements: Vec<Vec<usize>> =
        (0..params.num_tasks).map(|_| rng.distinct(params.num_items, params.items_per_task)).collect();

    let r2 = params.sense_radius_km * params.sense_radius_km;
    let capabilities: Vec<Vec<usize>> = users
        .iter()
        .map(|&(ux, uy)| {
            (0..params.num_items)
                .filter(|&k| {
                    let (dx, dy) = (items[k].0 - ux, items[k].1 - uy);
                    dx * dx + dy * dy <= r2
                })
                .collect()
        })
        .collect();
    let (c_lo, c_hi) = params.cost_range;
    let costs: Vec<Vec<(usize, f64)>> =
        capabilities.iter().map(|cap| cap.iter().map(|&k| (k, rng.range(c_lo, c_hi))).collect()).collect();
    let (b_lo, b_hi) = params.budget_range;
    let budgets: Vec<f64> = (0..params.num_users).map(|_| rng.range(b_lo, b_hi)).collect();
    let (v_lo, v_hi) = params.item_value_range;
    let tasks = requirements
        .iter()
        .map(|req| Task::from_item_values(req.iter().map(|&k| (k, rng.range(v_lo, v_hi)))))
        .collect::<Result<Vec<_>, _>>()?;
    let users = costs.into_iter().zip(budgets).map(|(c, b)| User::new(c, b)).collect::<Result<Vec<_>, _>>()?;
    Ok(Instance::new(params.num_items, users, tasks)?)
}

/// Small random market for exhaustive cross-checks: 1-4 users, 1-4 tasks,
/// 2-6 items, each capability entry present with probability 1/2, and at
/// most `max_pairs` schedulable pairs overall.
pub fn tiny(seed: u64, max_pairs: usize) -> Instance {
    let mut rng = SeededRng::new(seed);
    let num_users = 1 + rng.index(4);
    let num_tasks = 1 + rng.index(4);
    let num_items = 2 + rng.index(5);
    let mut pairs_left = max_pairs;
    let mut users = Vec::with_capacity(num_users);
    for _ in 0..num_users {
        let mut costs = Vec::new();
        for k in 0..num_items {
            if rng.uniform() < 0.5 && pairs_left > 0 {
                pairs_left -= 1;
                costs.push((k, rng.range(0.0, 1.0)));
            }
        }
        let budget = rng.range(0.0, 2.5);
        users.push(User::new(costs, budget).unwrap());
    }
    let tasks = (0..num_tasks)
        .map(|_| {
            let size = 1 + rng.index(3.min(num_items));
            let req = rng.distinct(num_items, size);
            let v = rng.range(0.05, 0.75) * size as f64;
            Task::new(req, v).unwrap()
        })
        .collect();
    Instance::new(num_items, users, tasks).unwrap()
}

/// Replaces every item shared by several tasks with one private copy per
/// requiring task. Users keep their costs for every copy; items needed by at
/// most one task keep a single (renumbered) index.
pub fn no_reuse_transform(inst: &Instance) -> Instance {
    // copies[k] lists (task, new item) for each task requiring k, or a single
    // (usize::MAX, new item) when k is not shared.
    let mut copies: Vec<Vec<(usize, usize)>> = Vec::with_capacity(inst.num_items());
    let mut next = 0;
    for k in 0..inst.num_items() {
        let requiring = inst.tasks_requiring(k);
        if requiring.len() >= 2 {
            copies.push(requiring.iter().enumerate().map(|(c, &j)| (j, next + c)).collect());
            next += requiring.len();
        } else {
            copies.push(vec![(usize::MAX, next)]);
            next += 1;
        }
    }
    let copy_for = |k: usize, j: usize| -> usize {
        let c = &copies[k];
        if c.len() == 1 {
            c[0].1
        } else {
            c.iter().find(|(t, _)| *t == j).expect("task requires the item").1
        }
    };
    let users = inst
        .users()
        .iter()
        .map(|u| {
            let costs = u.costs().iter().flat_map(|(&k, &c)| copies[k].iter().map(move |&(_, n)| (n, c)));
            User::new(costs, u.budget()).unwrap()
        })
        .collect();
    let tasks = inst
        .tasks()
        .iter()
        .enumerate()
        .map(|(j, t)| match t.item_valuations() {
            Some(iv) => Task::from_item_values(iv.iter().map(|(&k, &v)| (copy_for(k, j), v))).unwrap(),
            None => Task::new(t.requirement().iter().map(|&k| copy_for(k, j)), t.valuation()).unwrap(),
        })
        .collect();
    Instance::new(next, users, tasks).expect("transform preserves validity")
}
