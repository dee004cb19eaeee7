//! Seeded experiments over generated markets, with CSV and JSON output.
//!
//! Trial `t` at the `n`-th entry of the K list uses seed
//! `base_seed + t + 10000 n`, so every mechanism and every reserve price sees
//! the same instances. Trials run on a worker pool but records are always
//! emitted in trial order, so output does not depend on the number of jobs.

use std::io;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::assign::solve_exact;
use crate::model::{social_welfare, Instance, EPS};
use crate::randomized::{decompose, enumerate_allocations, fractional_vcg, ENUMERATION_MAX_PAIRS};
use crate::simgen::{generate, no_reuse_transform, GenError, GenParams};
use crate::vcg::{run_double_auction, run_reserve_auction, ReservePrices};

/// Seed offset between consecutive K values.
pub const K_SEED_STRIDE: u64 = 10_000;

pub const CSV_HEADER: [&str; 13] = [
    "experiment",
    "seed",
    "K",
    "trial",
    "pi",
    "welfare_reuse",
    "welfare_noreuse",
    "welfare_randomized",
    "gain_percent",
    "total_payments",
    "total_rewards",
    "platform_budget",
    "runtime_ms",
];

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("reserve price grid must be nonempty, nonnegative and ascending")]
    BadGrid,
    #[error("could not start worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("bad CSV record: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    WelfareGain,
    ReserveSweep,
    CompareRandomized,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::WelfareGain => "welfare-gain",
            Experiment::ReserveSweep => "reserve-sweep",
            Experiment::CompareRandomized => "compare-randomized",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [Experiment::WelfareGain, Experiment::ReserveSweep, Experiment::CompareRandomized]
            .into_iter()
            .find(|e| e.as_str() == s)
    }
}

/// One row of experiment output. Fields that do not apply to an experiment
/// are `None` and serialize as empty CSV cells.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub experiment: Experiment,
    pub seed: u64,
    pub k: usize,
    pub trial: usize,
    pub pi: Option<f64>,
    pub welfare_reuse: Option<f64>,
    pub welfare_noreuse: Option<f64>,
    pub welfare_randomized: Option<f64>,
    pub gain_percent: Option<f64>,
    pub total_payments: Option<f64>,
    pub total_rewards: Option<f64>,
    pub platform_budget: Option<f64>,
    pub runtime_ms: f64,
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.6}")).unwrap_or_default()
}

fn parse_cell(s: &str) -> Result<Option<f64>, HarnessError> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| HarnessError::Parse(format!("not a number: {s:?}")))
}

/// Percentage by which `reuse` exceeds `noreuse`; undefined when the
/// no-reuse welfare is zero.
pub fn gain_percent(reuse: f64, noreuse: f64) -> Option<f64> {
    (noreuse > EPS).then(|| 100.0 * (reuse - noreuse) / noreuse)
}

impl ExperimentRecord {
    fn blank(experiment: Experiment, seed: u64, k: usize, trial: usize) -> Self {
        Self {
            experiment,
            seed,
            k,
            trial,
            pi: None,
            welfare_reuse: None,
            welfare_noreuse: None,
            welfare_randomized: None,
            gain_percent: None,
            total_payments: None,
            total_rewards: None,
            platform_budget: None,
            runtime_ms: 0.0,
        }
    }

    /// CSV cells in [`CSV_HEADER`] order, reals rounded to 6 decimals.
    pub fn to_csv_row(&self) -> Vec<String> {
        vec![
            self.experiment.as_str().to_owned(),
            self.seed.to_string(),
            self.k.to_string(),
            self.trial.to_string(),
            cell(self.pi),
            cell(self.welfare_reuse),
            cell(self.welfare_noreuse),
            cell(self.welfare_randomized),
            cell(self.gain_percent),
            cell(self.total_payments),
            cell(self.total_rewards),
            cell(self.platform_budget),
            format!("{:.3}", self.runtime_ms),
        ]
    }

    pub fn from_csv_row(row: &csv::StringRecord) -> Result<Self, HarnessError> {
        if row.len() != CSV_HEADER.len() {
            return Err(HarnessError::Parse(format!("expected {} fields, got {}", CSV_HEADER.len(), row.len())));
        }
        let int = |s: &str| s.parse::<u64>().map_err(|_| HarnessError::Parse(format!("not an integer: {s:?}")));
        Ok(Self {
            experiment: Experiment::parse(&row[0]).ok_or_else(|| HarnessError::Parse(format!("unknown experiment {:?}", &row[0])))?,
            seed: int(&row[1])?,
            k: int(&row[2])? as usize,
            trial: int(&row[3])? as usize,
            pi: parse_cell(&row[4])?,
            welfare_reuse: parse_cell(&row[5])?,
            welfare_noreuse: parse_cell(&row[6])?,
            welfare_randomized: parse_cell(&row[7])?,
            gain_percent: parse_cell(&row[8])?,
            total_payments: parse_cell(&row[9])?,
            total_rewards: parse_cell(&row[10])?,
            platform_budget: parse_cell(&row[11])?,
            runtime_ms: parse_cell(&row[12])?.unwrap_or(0.0),
        })
    }
}

/// Writes a header line and one line per record.
pub fn write_csv<W: io::Write>(out: W, records: &[ExperimentRecord]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(r.to_csv_row())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<ExperimentRecord>, HarnessError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(HarnessError::Parse("unexpected header".into()));
    }
    r.records().map(|row| ExperimentRecord::from_csv_row(&row?)).collect()
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub stddev: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        if values.is_empty() {
            return Self { mean: 0.0, stddev: 0.0 };
        }
        let mean = values.iter().sum::<f64>() / n;
        let stddev = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Self { mean, stddev }
    }
}

/// Runs `f` over `0..n` on `jobs` threads (0 means one per logical core) and
/// returns the results in index order.
fn run_trials<T: Send>(jobs: usize, n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Result<Vec<T>, HarnessError> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| HarnessError::Pool(e.to_string()))?;
    Ok(pool.install(|| (0..n).into_par_iter().map(f).collect()))
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn optimal_welfare(inst: &Instance) -> f64 {
    social_welfare(inst, &solve_exact(inst)).expect("solver output is consistent")
}

/// Expected welfare of the randomized baseline, or `None` when the instance
/// is over the enumeration cap or admits no decomposition.
pub fn randomized_welfare(inst: &Instance) -> Option<f64> {
    if inst.num_pairs() > ENUMERATION_MAX_PAIRS {
        return None;
    }
    let frac = fractional_vcg(inst);
    let allocations = enumerate_allocations(inst).ok()?;
    decompose(inst, &frac, &allocations).ok().map(|d| d.expected_welfare(&frac))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WelfareGainConfig {
    /// Instance shape; `num_items` and `seed` are overridden per trial.
    pub params: GenParams,
    pub k_list: Vec<usize>,
    pub trials: usize,
    pub base_seed: u64,
    pub jobs: usize,
}

impl Default for WelfareGainConfig {
    fn default() -> Self {
        Self { params: GenParams::default(), k_list: vec![5, 10, 15, 20], trials: 200, base_seed: 0, jobs: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainSummary {
    #[serde(rename = "K")]
    pub k: usize,
    pub trials: usize,
    pub welfare_reuse: Stat,
    pub welfare_noreuse: Stat,
    /// Mean and spread of the per-trial gains, over trials where the gain is defined.
    pub gain_percent: Stat,
    /// Trials whose no-reuse welfare is zero, leaving the gain undefined.
    pub undefined_gain_trials: usize,
    /// Gain of the mean welfares, in percent. Less sensitive to trials with
    /// tiny no-reuse welfare than the per-trial mean.
    pub gain_of_means_percent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WelfareGainReport {
    pub records: Vec<ExperimentRecord>,
    pub summary: Vec<GainSummary>,
}

/// Optimal welfare with and without data reuse on seeded instances.
pub fn welfare_gain_experiment(cfg: &WelfareGainConfig) -> Result<WelfareGainReport, HarnessError> {
    if cfg.trials == 0 {
        return Err(HarnessError::NoTrials);
    }
    let mut records = Vec::new();
    let mut summary = Vec::new();
    for (n, &k) in cfg.k_list.iter().enumerate() {
        let seed_of = |t: usize| cfg.base_seed + t as u64 + K_SEED_STRIDE * n as u64;
        // Fail on bad parameters before spawning work.
        generate(&cfg.params.clone().with_items(k).with_seed(seed_of(0)))?;
        let rows = run_trials(cfg.jobs, cfg.trials, |t| {
            let start = Instant::now();
            let seed = seed_of(t);
            let inst = generate(&cfg.params.clone().with_items(k).with_seed(seed)).expect("parameters validated");
            let reuse = optimal_welfare(&inst);
            let noreuse = optimal_welfare(&no_reuse_transform(&inst));
            let mut r = ExperimentRecord::blank(Experiment::WelfareGain, seed, k, t);
            r.welfare_reuse = Some(reuse);
            r.welfare_noreuse = Some(noreuse);
            r.welfare_randomized = randomized_welfare(&inst);
            r.gain_percent = gain_percent(reuse, noreuse);
            r.runtime_ms = elapsed_ms(start);
            r
        })?;
        let reuse: Vec<f64> = rows.iter().filter_map(|r| r.welfare_reuse).collect();
        let noreuse: Vec<f64> = rows.iter().filter_map(|r| r.welfare_noreuse).collect();
        let gains: Vec<f64> = rows.iter().filter_map(|r| r.gain_percent).collect();
        let (reuse, noreuse) = (Stat::of(&reuse), Stat::of(&noreuse));
        summary.push(GainSummary {
            k,
            trials: cfg.trials,
            welfare_reuse: reuse,
            welfare_noreuse: noreuse,
            gain_percent: Stat::of(&gains),
            undefined_gain_trials: cfg.trials - gains.len(),
            gain_of_means_percent: gain_percent(reuse.mean, noreuse.mean),
        });
        records.extend(rows);
    }
    Ok(WelfareGainReport { records, summary })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReserveSweepConfig {
    pub params: GenParams,
    pub k: usize,
    pub pi_grid: Vec<f64>,
    pub trials: usize,
    pub base_seed: u64,
    pub jobs: usize,
}

/// `0, 0.1, ..., 1.5`.
pub fn default_pi_grid() -> Vec<f64> {
    (0..=15).map(|n| n as f64 / 10.0).collect()
}

impl Default for ReserveSweepConfig {
    fn default() -> Self {
        Self { params: GenParams::default(), k: 5, pi_grid: default_pi_grid(), trials: 200, base_seed: 0, jobs: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiSummary {
    pub pi: f64,
    pub welfare: Stat,
    pub total_payments: Stat,
    pub total_rewards: Stat,
    pub platform_budget: Stat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReserveSweepReport {
    pub records: Vec<ExperimentRecord>,
    pub summary: Vec<PiSummary>,
    /// Smallest grid price whose mean platform budget is nonnegative.
    pub balancing_pi: Option<f64>,
}

/// Reserve auction under truthful bids for every uniform price on the grid.
/// Each trial's instance is shared by all prices.
pub fn reserve_sweep(cfg: &ReserveSweepConfig) -> Result<ReserveSweepReport, HarnessError> {
    if cfg.trials == 0 {
        return Err(HarnessError::NoTrials);
    }
    let ascending = cfg.pi_grid.windows(2).all(|w| w[0] < w[1]);
    if cfg.pi_grid.is_empty() || !ascending || cfg.pi_grid.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(HarnessError::BadGrid);
    }
    let params = cfg.params.clone().with_items(cfg.k);
    generate(&params.clone().with_seed(cfg.base_seed))?;
    let per_trial = run_trials(cfg.jobs, cfg.trials, |t| {
        let seed = cfg.base_seed + t as u64;
        let inst = generate(&params.clone().with_seed(seed)).expect("parameters validated");
        cfg.pi_grid
            .iter()
            .map(|&pi| {
                let start = Instant::now();
                let reserve = ReservePrices::uniform(inst.num_items(), pi).expect("grid validated");
                let out = run_reserve_auction(&inst, &reserve).expect("reserve sized to the instance");
                let mut r = ExperimentRecord::blank(Experiment::ReserveSweep, seed, cfg.k, t);
                r.pi = Some(pi);
                r.welfare_reuse = Some(out.welfare);
                r.total_payments = Some(out.total_payments());
                r.total_rewards = Some(out.total_rewards());
                r.platform_budget = Some(out.platform_budget);
                r.runtime_ms = elapsed_ms(start);
                r
            })
            .collect::<Vec<_>>()
    })?;
    // Order by price, then trial.
    let mut records = Vec::with_capacity(cfg.trials * cfg.pi_grid.len());
    let mut summary = Vec::new();
    for (p, &pi) in cfg.pi_grid.iter().enumerate() {
        let rows: Vec<&ExperimentRecord> = per_trial.iter().map(|trial| &trial[p]).collect();
        let col = |f: fn(&ExperimentRecord) -> Option<f64>| Stat::of(&rows.iter().filter_map(|r| f(r)).collect::<Vec<_>>());
        summary.push(PiSummary {
            pi,
            welfare: col(|r| r.welfare_reuse),
            total_payments: col(|r| r.total_payments),
            total_rewards: col(|r| r.total_rewards),
            platform_budget: col(|r| r.platform_budget),
        });
        records.extend(rows.into_iter().cloned());
    }
    let balancing_pi = summary.iter().find(|s| s.platform_budget.mean >= 0.0).map(|s| s.pi);
    Ok(ReserveSweepReport { records, summary, balancing_pi })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareConfig {
    pub params: GenParams,
    pub trials: usize,
    pub base_seed: u64,
    pub jobs: usize,
}

/// Reduced sizes that keep every instance under the enumeration cap:
/// 3 users, 3 tasks, 2 items per task, K = 5.
pub fn compare_params() -> GenParams {
    GenParams { num_users: 3, num_tasks: 3, items_per_task: 2, ..GenParams::default() }.with_items(5)
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self { params: compare_params(), trials: 200, base_seed: 0, jobs: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareSummary {
    pub trials: usize,
    pub decomposed: usize,
    pub infeasible_decompositions: usize,
    pub over_cap: usize,
    /// Over decomposed trials, like the two fields after it.
    pub exact_welfare: Stat,
    pub randomized_welfare: Stat,
    /// Mean of randomized / exact welfare over decomposed trials with positive exact welfare.
    pub mean_ratio: Option<f64>,
    /// Gain of the exact mean over the randomized mean, in percent, over decomposed trials.
    pub gain_percent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub records: Vec<ExperimentRecord>,
    pub summary: CompareSummary,
}

/// Exact double auction against the expected welfare of the randomized
/// baseline on the same small instances.
pub fn compare_randomized(cfg: &CompareConfig) -> Result<CompareReport, HarnessError> {
    if cfg.trials == 0 {
        return Err(HarnessError::NoTrials);
    }
    generate(&cfg.params.clone().with_seed(cfg.base_seed))?;
    let rows = run_trials(cfg.jobs, cfg.trials, |t| {
        let start = Instant::now();
        let seed = cfg.base_seed + t as u64;
        let inst = generate(&cfg.params.clone().with_seed(seed)).expect("parameters validated");
        let out = run_double_auction(&inst);
        let mut r = ExperimentRecord::blank(Experiment::CompareRandomized, seed, cfg.params.num_items, t);
        r.welfare_reuse = Some(out.welfare);
        r.welfare_randomized = randomized_welfare(&inst);
        r.total_payments = Some(out.total_payments());
        r.total_rewards = Some(out.total_rewards());
        r.platform_budget = Some(out.platform_budget);
        r.runtime_ms = elapsed_ms(start);
        (r, inst.num_pairs() > ENUMERATION_MAX_PAIRS)
    })?;
    let over_cap = rows.iter().filter(|(_, over)| *over).count();
    let records: Vec<ExperimentRecord> = rows.into_iter().map(|(r, _)| r).collect();
    let paired: Vec<(f64, f64)> =
        records.iter().filter_map(|r| Some((r.welfare_reuse?, r.welfare_randomized?))).collect();
    let ratios: Vec<f64> = paired.iter().filter(|(e, _)| *e > EPS).map(|(e, r)| r / e).collect();
    let exact = Stat::of(&paired.iter().map(|p| p.0).collect::<Vec<_>>());
    let randomized = Stat::of(&paired.iter().map(|p| p.1).collect::<Vec<_>>());
    let summary = CompareSummary {
        trials: cfg.trials,
        decomposed: paired.len(),
        infeasible_decompositions: cfg.trials - paired.len() - over_cap,
        over_cap,
        exact_welfare: exact,
        randomized_welfare: randomized,
        mean_ratio: (!ratios.is_empty()).then(|| Stat::of(&ratios).mean),
        gain_percent: gain_percent(exact.mean, randomized.mean),
    };
    Ok(CompareReport { records, summary })
}
