//! Dense bounded-variable simplex.
//!
//! Every row `a·x (<=|>=|=) b` gets a logical column `s` with `a·x + s = b`
//! and bounds chosen by the row sense. Nonbasic columns sit at one of their
//! bounds. Infeasible starting rows get an artificial column and a phase-one
//! objective. Pricing is Dantzig's largest-reduced-cost rule; after a run of
//! degenerate pivots it switches to Bland's smallest-index rule until the
//! objective moves again, which rules out cycling. Ties are always broken by
//! the smallest column index, so results are deterministic.
//!
//! The tableau keeps `B^-1 A` explicitly so a solved instance can be
//! re-optimized with the dual simplex after bound changes (used by
//! branch-and-bound).

/// Tolerance for primal feasibility and reduced-cost signs.
const TOL: f64 = 1e-9;
/// Smallest magnitude accepted as a pivot element.
const PIVOT_TOL: f64 = 1e-9;
/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_RUN: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `maximize objective·x` subject to the constraints and `lower <= x <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration cap hit; never expected on well-posed inputs.
    Stalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pricing {
    /// Dantzig with a Bland fallback on degenerate runs.
    Hybrid,
    /// Bland's rule throughout.
    Bland,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        Self {
            objective: vec![0.0; num_vars],
            lower: vec![0.0; num_vars],
            upper: vec![f64::INFINITY; num_vars],
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.constraints.push(Constraint { terms, sense, rhs });
    }

    pub fn solve(&self) -> LpResult {
        self.solve_with(Pricing::Hybrid)
    }

    pub fn solve_with(&self, pricing: Pricing) -> LpResult {
        let mut t = Tableau::new(self, pricing);
        let status = t.solve();
        t.result(status)
    }

    /// Largest violation of any constraint or bound by `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        for c in &self.constraints {
            let lhs: f64 = c.terms.iter().map(|&(j, a)| a * x[j]).sum();
            let viol = match c.sense {
                Sense::Le => lhs - c.rhs,
                Sense::Ge => c.rhs - lhs,
                Sense::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Tableau {
    m: usize,
    ncols: usize,
    nstruct: usize,
    /// `B^-1 A`, row-major.
    tab: Vec<f64>,
    /// Value of the basic column in each row.
    beta: Vec<f64>,
    basis: Vec<usize>,
    /// Row holding each column when basic, `usize::MAX` otherwise.
    row_of: Vec<usize>,
    /// Current value of each nonbasic column.
    value: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    /// Reduced costs for the active objective.
    d: Vec<f64>,
    artificial_start: usize,
    pricing: Pricing,
    iterations: usize,
}

const NONBASIC: usize = usize::MAX;

impl Tableau {
    pub(crate) fn new(lp: &LinearProgram, pricing: Pricing) -> Self {
        let n = lp.num_vars();
        let m = lp.constraints.len();
        let mut value = vec![0.0; n + m];
        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();
        for j in 0..n {
            value[j] = if lower[j].is_finite() {
                lower[j]
            } else if upper[j].is_finite() {
                upper[j]
            } else {
                0.0
            };
        }
        for c in &lp.constraints {
            let (l, u) = match c.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            lower.push(l);
            upper.push(u);
        }

        // Decide which rows need an artificial column.
        let mut residual = Vec::with_capacity(m);
        let mut art_rows = Vec::new();
        for (i, c) in lp.constraints.iter().enumerate() {
            let r = c.rhs - c.terms.iter().map(|&(j, a)| a * value[j]).sum::<f64>();
            let (l, u) = (lower[n + i], upper[n + i]);
            if r < l - TOL || r > u + TOL {
                let s = if r < l { l } else { u };
                value[n + i] = s;
                art_rows.push(i);
            }
            residual.push(r);
        }
        let na = art_rows.len();
        let ncols = n + m + na;
        value.resize(ncols, 0.0);
        lower.resize(ncols, 0.0);
        upper.resize(ncols, f64::INFINITY);
        let mut cost = lp.objective.clone();
        cost.resize(ncols, 0.0);

        let mut tab = vec![0.0; m * ncols];
        let mut beta = vec![0.0; m];
        let mut basis = vec![0; m];
        let mut row_of = vec![NONBASIC; ncols];
        let mut art_iter = art_rows.iter().enumerate().peekable();
        for (i, c) in lp.constraints.iter().enumerate() {
            let row = &mut tab[i * ncols..(i + 1) * ncols];
            for &(j, a) in &c.terms {
                row[j] += a;
            }
            row[n + i] = 1.0;
            match art_iter.peek() {
                Some(&(a_idx, &ri)) if ri == i => {
                    art_iter.next();
                    let gap = residual[i] - value[n + i];
                    let sigma = if gap >= 0.0 { 1.0 } else { -1.0 };
                    let col = n + m + a_idx;
                    row[col] = sigma;
                    // Normalize so the artificial has unit coefficient.
                    if sigma < 0.0 {
                        row.iter_mut().for_each(|v| *v = -*v);
                    }
                    basis[i] = col;
                    row_of[col] = i;
                    beta[i] = gap.abs();
                }
                _ => {
                    basis[i] = n + i;
                    row_of[n + i] = i;
                    beta[i] = residual[i];
                }
            }
        }
        Self {
            m,
            ncols,
            nstruct: n,
            tab,
            beta,
            basis,
            row_of,
            value,
            lower,
            upper,
            cost,
            d: vec![0.0; ncols],
            artificial_start: n + m,
            pricing,
            iterations: 0,
        }
    }

    fn iteration_cap(&self) -> usize {
        200 * (self.m + self.ncols) + 1000
    }

    /// Two-phase primal solve from the constructed starting basis.
    pub(crate) fn solve(&mut self) -> LpStatus {
        if self.artificial_start < self.ncols {
            let phase1: Vec<f64> = (0..self.ncols).map(|j| if j >= self.artificial_start { -1.0 } else { 0.0 }).collect();
            self.set_reduced_costs(&phase1);
            match self.primal() {
                LpStatus::Optimal => {}
                LpStatus::Unbounded => unreachable!("phase one is bounded"),
                other => return other,
            }
            let infeas: f64 = (self.artificial_start..self.ncols).map(|j| self.col_value(j)).sum();
            if infeas > 1e-7 {
                return LpStatus::Infeasible;
            }
            for j in self.artificial_start..self.ncols {
                self.upper[j] = 0.0;
                if self.row_of[j] == NONBASIC {
                    self.value[j] = 0.0;
                }
            }
        }
        let cost = self.cost.clone();
        self.set_reduced_costs(&cost);
        self.primal()
    }

    fn set_reduced_costs(&mut self, c: &[f64]) {
        self.d.copy_from_slice(c);
        for i in 0..self.m {
            let cb = c[self.basis[i]];
            if cb != 0.0 {
                let row = &self.tab[i * self.ncols..(i + 1) * self.ncols];
                for (dj, &t) in self.d.iter_mut().zip(row) {
                    *dj -= cb * t;
                }
            }
        }
        for i in 0..self.m {
            self.d[self.basis[i]] = 0.0;
        }
    }

    fn col_value(&self, j: usize) -> f64 {
        match self.row_of[j] {
            NONBASIC => self.value[j],
            r => self.beta[r],
        }
    }

    fn can_increase(&self, j: usize) -> bool {
        self.value[j] < self.upper[j] - TOL
    }

    fn can_decrease(&self, j: usize) -> bool {
        self.value[j] > self.lower[j] + TOL
    }

    fn primal(&mut self) -> LpStatus {
        let mut degenerate = 0usize;
        loop {
            if self.iterations > self.iteration_cap() {
                return LpStatus::Stalled;
            }
            let bland = self.pricing == Pricing::Bland || degenerate >= DEGENERATE_RUN;
            let mut entering = None;
            let mut best = 0.0;
            for j in 0..self.ncols {
                if self.row_of[j] != NONBASIC {
                    continue;
                }
                let dj = self.d[j];
                let dir = if dj > TOL && self.can_increase(j) {
                    1.0
                } else if dj < -TOL && self.can_decrease(j) {
                    -1.0
                } else {
                    continue;
                };
                if bland {
                    entering = Some((j, dir));
                    break;
                }
                if dj.abs() > best {
                    best = dj.abs();
                    entering = Some((j, dir));
                }
            }
            let Some((q, dir)) = entering else {
                return LpStatus::Optimal;
            };
            self.iterations += 1;

            let mut step = self.upper[q] - self.lower[q];
            let mut leave: Option<(usize, bool)> = None;
            for i in 0..self.m {
                let a = dir * self.tab[i * self.ncols + q];
                let b = self.basis[i];
                let limit = if a > PIVOT_TOL && self.lower[b].is_finite() {
                    ((self.beta[i] - self.lower[b]) / a).max(0.0)
                } else if a < -PIVOT_TOL && self.upper[b].is_finite() {
                    ((self.upper[b] - self.beta[i]) / -a).max(0.0)
                } else {
                    continue;
                };
                let better = match leave {
                    _ if limit < step - 1e-12 => true,
                    Some((r, _)) => limit <= step + 1e-12 && b < self.basis[r],
                    None => false,
                };
                if better {
                    step = step.min(limit);
                    leave = Some((i, a > 0.0));
                }
            }
            if !step.is_finite() {
                return LpStatus::Unbounded;
            }
            if step * self.d[q].abs() > 1e-12 {
                degenerate = 0;
            } else {
                degenerate += 1;
            }
            for i in 0..self.m {
                let t = self.tab[i * self.ncols + q];
                if t != 0.0 {
                    self.beta[i] -= dir * step * t;
                }
            }
            let entering_value = self.value[q] + dir * step;
            match leave {
                None => self.value[q] = if dir > 0.0 { self.upper[q] } else { self.lower[q] },
                Some((r, to_lower)) => {
                    let b = self.basis[r];
                    self.value[b] = if to_lower { self.lower[b] } else { self.upper[b] };
                    self.pivot(r, q);
                    self.beta[r] = entering_value;
                }
            }
        }
    }

    /// Dual simplex from a dual-feasible basis whose basic values may violate
    /// their bounds.
    fn dual(&mut self) -> LpStatus {
        loop {
            if self.iterations > self.iteration_cap() {
                return LpStatus::Stalled;
            }
            let mut leave = None;
            let mut worst = TOL;
            for i in 0..self.m {
                let b = self.basis[i];
                let viol = (self.lower[b] - self.beta[i]).max(self.beta[i] - self.upper[b]);
                if viol > worst {
                    worst = viol;
                    leave = Some(i);
                }
            }
            let Some(r) = leave else {
                return LpStatus::Optimal;
            };
            self.iterations += 1;
            let b = self.basis[r];
            let below = self.beta[r] < self.lower[b];
            let target = if below { self.lower[b] } else { self.upper[b] };
            let row = r * self.ncols;
            let mut entering = None;
            let mut best = f64::INFINITY;
            for j in 0..self.ncols {
                if self.row_of[j] != NONBASIC {
                    continue;
                }
                let t = self.tab[row + j];
                // Moving j must push the leaving variable towards `target`.
                let eligible = if below {
                    (t < -PIVOT_TOL && self.can_increase(j)) || (t > PIVOT_TOL && self.can_decrease(j))
                } else {
                    (t > PIVOT_TOL && self.can_increase(j)) || (t < -PIVOT_TOL && self.can_decrease(j))
                };
                if !eligible {
                    continue;
                }
                let ratio = self.d[j].abs() / t.abs();
                if ratio < best - 1e-12 {
                    best = ratio;
                    entering = Some(j);
                }
            }
            let Some(q) = entering else {
                return LpStatus::Infeasible;
            };
            let delta = (self.beta[r] - target) / self.tab[row + q];
            for i in 0..self.m {
                let t = self.tab[i * self.ncols + q];
                if t != 0.0 {
                    self.beta[i] -= t * delta;
                }
            }
            let entering_value = self.value[q] + delta;
            self.value[b] = target;
            self.pivot(r, q);
            self.beta[r] = entering_value;
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let nc = self.ncols;
        let p = self.tab[r * nc + q];
        {
            let row = &mut self.tab[r * nc..(r + 1) * nc];
            for v in row.iter_mut() {
                *v /= p;
            }
            row[q] = 1.0;
        }
        let nz: Vec<usize> = (0..nc).filter(|&j| self.tab[r * nc + j] != 0.0).collect();
        let (before, rest) = self.tab.split_at_mut(r * nc);
        let (pivot_row, after) = rest.split_at_mut(nc);
        for other in before.chunks_exact_mut(nc).chain(after.chunks_exact_mut(nc)) {
            let f = other[q];
            if f != 0.0 {
                for &j in &nz {
                    other[j] -= f * pivot_row[j];
                }
                other[q] = 0.0;
            }
        }
        let f = self.d[q];
        if f != 0.0 {
            for &j in &nz {
                self.d[j] -= f * pivot_row[j];
            }
            self.d[q] = 0.0;
        }
        let old = self.basis[r];
        self.row_of[old] = NONBASIC;
        self.basis[r] = q;
        self.row_of[q] = r;
    }

    /// Changes the bounds of a structural column, keeping the basis.
    pub(crate) fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lower[j] = lower;
        self.upper[j] = upper;
        if self.row_of[j] == NONBASIC {
            let v = self.value[j].clamp(lower, upper);
            let shift = v - self.value[j];
            if shift != 0.0 {
                for i in 0..self.m {
                    let t = self.tab[i * self.ncols + j];
                    if t != 0.0 {
                        self.beta[i] -= t * shift;
                    }
                }
                self.value[j] = v;
            }
        }
    }

    /// Appends the row `terms·x <= rhs` over structural columns, with a new
    /// basic logical column. The basis stays dual feasible, so
    /// [`Tableau::reoptimize`] restores optimality if the row cuts off the
    /// current point.
    pub(crate) fn add_le_row(&mut self, terms: &[(usize, f64)], rhs: f64) {
        let (m, nc) = (self.m, self.ncols);
        let wide = nc + 1;
        let mut tab = vec![0.0; (m + 1) * wide];
        for i in 0..m {
            tab[i * wide..i * wide + nc].copy_from_slice(&self.tab[i * nc..(i + 1) * nc]);
        }
        let new_row = &mut tab[m * wide..];
        for &(j, a) in terms {
            new_row[j] += a;
        }
        new_row[nc] = 1.0;
        // Express the row in nonbasic columns by eliminating basic ones.
        for i in 0..m {
            let f = new_row[self.basis[i]];
            if f != 0.0 {
                let src = &self.tab[i * nc..(i + 1) * nc];
                for (v, &s) in new_row[..nc].iter_mut().zip(src) {
                    *v -= f * s;
                }
                new_row[self.basis[i]] = 0.0;
            }
        }
        let lhs: f64 = terms.iter().map(|&(j, a)| a * self.col_value(j)).sum();
        self.tab = tab;
        self.beta.push(rhs - lhs);
        self.basis.push(nc);
        self.row_of.push(m);
        self.value.push(0.0);
        self.lower.push(0.0);
        self.upper.push(f64::INFINITY);
        self.cost.push(0.0);
        self.d.push(0.0);
        self.m += 1;
        self.ncols = wide;
    }

    /// Reduced-cost fixing on an optimal tableau. Moving a nonbasic
    /// structural column off its bound to the other one lowers the objective
    /// bound by at least `|d_j|` per unit, so when that loss exceeds `slack`
    /// the column is pinned where it is. Returns the number of pinned columns.
    pub(crate) fn fix_by_reduced_cost(&mut self, slack: f64) -> usize {
        let mut fixed = 0;
        for j in 0..self.nstruct {
            if self.row_of[j] != NONBASIC || self.lower[j] >= self.upper[j] {
                continue;
            }
            let width = self.upper[j] - self.lower[j];
            if !width.is_finite() {
                continue;
            }
            if self.value[j] == self.lower[j] && -self.d[j] * width > slack {
                self.upper[j] = self.lower[j];
                fixed += 1;
            } else if self.value[j] == self.upper[j] && self.d[j] * width > slack {
                self.lower[j] = self.upper[j];
                fixed += 1;
            }
        }
        fixed
    }

    pub(crate) fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    pub(crate) fn num_rows(&self) -> usize {
        self.m
    }

    /// Re-optimizes after [`Tableau::set_bounds`] on a previously optimal tableau.
    pub(crate) fn reoptimize(&mut self) -> LpStatus {
        self.iterations = 0;
        match self.dual() {
            LpStatus::Optimal => self.primal(),
            other => other,
        }
    }

    pub(crate) fn values(&self) -> Vec<f64> {
        (0..self.nstruct).map(|j| self.col_value(j)).collect()
    }

    pub(crate) fn objective(&self) -> f64 {
        (0..self.nstruct).map(|j| self.cost[j] * self.col_value(j)).sum()
    }

    pub(crate) fn result(&self, status: LpStatus) -> LpResult {
        match status {
            LpStatus::Optimal => LpResult { status, x: self.values(), objective: self.objective() },
            _ => LpResult { status, x: vec![0.0; self.nstruct], objective: f64::NAN },
        }
    }
}
