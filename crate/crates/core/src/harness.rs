//! Config-driven experiments: λ sweeps over the four methods, fault studies,
//! and the β*/α/C_α table, all reported as CSV.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::drl::{run_drl_rlr, run_drl_rpca, Aggregation, DrlConfig, DrlRun, FaultModel};
use crate::error::{invalid, DrlError, Result};
use crate::estimate::Estimate;
use crate::geom_median::MedianConfig;
use crate::par;
use crate::rlr::{base_rotr, least_squares_baseline};
use crate::rng::derive_seed;
use crate::rpca::{base_rpca, projection_from_basis, standard_pca};
use crate::synth::{gen_lr, gen_pca, Dataset, LrScenario, PcaScenario, PlacementPolicy};
use crate::theory::{lambda_prime, rlr_bound, rpca_bound, TheoryPoint};

/// Column order of sweep reports.
pub const SWEEP_HEADER: &str = "task,method,lambda,placement,fault,repetition,relative_error,lambda_prime,\
bound_value,comm_bytes,elapsed_ms,std_relative_error,status";

pub const FAULT_HEADER: &str = "fault,method,lambda,placement,mean_relative_error,std_relative_error,repetitions,failures";

pub const TABLE1_BETAS: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];

/// Keeps fault seeds apart from data seeds of the same cell.
const FAULT_SEED_TAG: u64 = 0xfa;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Pca,
    Lr,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Pca => "pca",
            Task::Lr => "lr",
        })
    }
}

impl FromStr for Task {
    type Err = DrlError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pca" => Ok(Task::Pca),
            "lr" => Ok(Task::Lr),
            other => Err(DrlError::Parse(format!("unknown task `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Node estimates fused by geometric median.
    Drl,
    /// Same node estimates, averaged.
    DivAvg,
    /// The robust base learner on all data.
    Centralized,
    /// Standard PCA or ordinary least squares on all data.
    Standard,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Drl, Method::DivAvg, Method::Centralized, Method::Standard];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Drl => "drl",
            Method::DivAvg => "div_avg",
            Method::Centralized => "centralized",
            Method::Standard => "standard",
        })
    }
}

/// Trim level handed to the robust learners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TrimLevel {
    /// The scheduled λ.
    #[default]
    Known,
    /// λ unknown: trim half.
    Unknown,
    /// A fixed level regardless of λ.
    Fixed(f64),
}

impl TrimLevel {
    fn resolve(self, lambda: f64) -> Option<f64> {
        match self {
            TrimLevel::Known => Some(lambda),
            TrimLevel::Unknown => None,
            TrimLevel::Fixed(t) => Some(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleEntry {
    pub lambda: f64,
    #[serde(default)]
    pub placement: PlacementPolicy,
}

/// Constants used for the bound column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TheoryParams {
    /// Fraction of nodes allowed to be badly contaminated when picking λ′.
    pub gamma: f64,
    pub alpha: f64,
    /// Constant of the regression bound.
    pub c_prime: f64,
}

impl Default for TheoryParams {
    fn default() -> Self {
        TheoryParams { gamma: 0.1, alpha: 0.358, c_prime: 1.0 }
    }
}

fn default_p() -> usize {
    50
}
fn default_d() -> usize {
    5
}
fn default_n_total() -> usize {
    100_000
}
fn default_k() -> usize {
    20
}
fn default_sigma_e() -> f64 {
    1.0
}
fn default_sigma_o() -> f64 {
    10.0
}
fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}
fn default_repetitions() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    #[serde(default = "default_p")]
    pub p: usize,
    /// Subspace dimension; ignored for regression.
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default = "default_n_total")]
    pub n_total: usize,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_sigma_e")]
    pub sigma_e: f64,
    #[serde(default = "default_sigma_o")]
    pub sigma_o: f64,
    pub lambda_schedule: Vec<ScheduleEntry>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub faults: FaultModel,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub trim: TrimLevel,
    #[serde(default)]
    pub median: MedianConfig,
    #[serde(default)]
    pub theory: TheoryParams,
}

impl ExperimentConfig {
    /// Desk-scale scenario (p=50, d=5, n=1e5, k=20) with an empty schedule.
    pub fn desk_scale(task: Task) -> Self {
        ExperimentConfig {
            task,
            p: default_p(),
            d: default_d(),
            n_total: default_n_total(),
            k: default_k(),
            sigma_e: default_sigma_e(),
            sigma_o: default_sigma_o(),
            lambda_schedule: Vec::new(),
            methods: default_methods(),
            faults: FaultModel::none(),
            repetitions: default_repetitions(),
            master_seed: 0,
            output_path: None,
            trim: TrimLevel::Known,
            median: MedianConfig::default(),
            theory: TheoryParams::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| DrlError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DrlError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| DrlError::Parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(invalid("repetitions must be at least 1"));
        }
        if self.lambda_schedule.is_empty() {
            return Err(invalid("lambda_schedule must not be empty"));
        }
        if self.methods.is_empty() {
            return Err(invalid("methods must not be empty"));
        }
        if self.p == 0 || self.k == 0 || self.k > self.n_total {
            return Err(invalid(format!("need p >= 1 and 1 <= k <= n_total, got p={}, k={}", self.p, self.k)));
        }
        if self.task == Task::Pca && (self.d == 0 || self.d >= self.p) {
            return Err(invalid(format!("subspace dimension {} must satisfy 1 <= d < p = {}", self.d, self.p)));
        }
        if !(self.sigma_e > 0.0) || !(self.sigma_o > 0.0) {
            return Err(invalid("sigma_e and sigma_o must be positive"));
        }
        if let Some(e) = self.lambda_schedule.iter().find(|e| !(0.0..1.0).contains(&e.lambda)) {
            return Err(invalid(format!("scheduled lambda {} outside [0, 1)", e.lambda)));
        }
        if let TrimLevel::Fixed(t) = self.trim {
            if !(0.0..1.0).contains(&t) {
                return Err(invalid(format!("trim level {t} outside [0, 1)")));
            }
        }
        self.faults.validate(self.k)?;
        self.median.validate()
    }

    /// Data seed of one sweep cell.
    pub fn cell_seed(&self, schedule_index: usize, repetition: usize) -> u64 {
        derive_seed(self.master_seed, &[schedule_index as u64, repetition as u64])
    }

    /// Fault-injection seed of one sweep cell.
    pub fn fault_seed(&self, schedule_index: usize, repetition: usize) -> u64 {
        derive_seed(self.cell_seed(schedule_index, repetition), &[FAULT_SEED_TAG])
    }

    pub fn generate(&self, schedule_index: usize, repetition: usize) -> Result<Dataset> {
        let entry = self
            .lambda_schedule
            .get(schedule_index)
            .ok_or_else(|| invalid(format!("no schedule entry {schedule_index}")))?;
        let seed = self.cell_seed(schedule_index, repetition);
        match self.task {
            Task::Pca => gen_pca(
                &PcaScenario {
                    p: self.p,
                    d: self.d,
                    n_total: self.n_total,
                    lambda: entry.lambda,
                    sigma_e: self.sigma_e,
                    sigma_o: self.sigma_o,
                    placement: entry.placement.clone(),
                    seed,
                },
                self.k,
            ),
            Task::Lr => gen_lr(
                &LrScenario {
                    p: self.p,
                    n_total: self.n_total,
                    lambda: entry.lambda,
                    sigma_e: self.sigma_e,
                    sigma_o: self.sigma_o,
                    placement: entry.placement.clone(),
                    seed,
                },
                self.k,
            ),
        }
    }

    /// Runs DRL on `dataset` with the given faults; the result carries the
    /// geometric-median aggregate and can be re-fused by averaging.
    pub fn run_drl(&self, dataset: &Dataset, lambda: f64, faults: &FaultModel, seed: u64) -> Result<DrlRun> {
        let cfg = DrlConfig {
            k: self.k,
            lambda: self.trim.resolve(lambda),
            aggregation: Aggregation::GeometricMedian,
            faults: faults.clone(),
            seed,
            median: self.median,
        };
        match self.task {
            Task::Pca => run_drl_rpca(dataset, self.d, &cfg),
            Task::Lr => run_drl_rlr(dataset, &cfg),
        }
    }

    pub fn run_centralized(&self, dataset: &Dataset, lambda: f64) -> Result<Estimate> {
        let trim = self.trim.resolve(lambda).unwrap_or(crate::drl::UNKNOWN_LAMBDA);
        match self.task {
            Task::Pca => base_rpca(dataset.x.view(), self.d, trim).map(|m| projection_from_basis(&m)),
            Task::Lr => base_rotr(dataset.x.view(), responses(dataset)?, trim).map(|m| m.theta),
        }
    }

    pub fn run_standard(&self, dataset: &Dataset) -> Result<Estimate> {
        match self.task {
            Task::Pca => standard_pca(dataset.x.view(), self.d).map(|m| projection_from_basis(&m)),
            Task::Lr => least_squares_baseline(dataset.x.view(), responses(dataset)?).map(|m| m.theta),
        }
    }

    fn bound(&self, dataset: &Dataset, lambda_prime: f64) -> Option<f64> {
        match self.task {
            // Inlier covariance θθᵀ + σ_e²I has eigengap exactly 1 at d and
            // largest variance 1 + σ_e².
            Task::Pca => {
                rpca_bound(1.0, lambda_prime, 1.0 + self.sigma_e.powi(2), self.p, self.theory.alpha).ok()
            }
            Task::Lr => {
                let theta = dataset.truth.as_ref()?.target().norm();
                rlr_bound(theta, self.sigma_e, lambda_prime, self.p, self.theory.c_prime).ok()
            }
        }
    }
}

fn responses(dataset: &Dataset) -> Result<&[f64]> {
    dataset.y.as_deref().ok_or_else(|| invalid("regression needs responses"))
}

/// Relative error against the dataset's ground truth.
pub fn relative_error(dataset: &Dataset, estimate: &Estimate) -> Result<f64> {
    let truth = dataset.truth.as_ref().ok_or_else(|| invalid("dataset has no ground truth"))?;
    let target = truth.target();
    Ok(estimate.distance(target)? / target.norm())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub relative_error: f64,
    pub lambda_prime: Option<f64>,
    pub bound_value: Option<f64>,
    pub comm_bytes: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Repetition {
    Run(usize),
    Summary,
}

impl fmt::Display for Repetition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Repetition::Run(r) => write!(f, "{r}"),
            Repetition::Summary => f.write_str("summary"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub task: Task,
    pub method: Method,
    pub schedule_index: usize,
    pub lambda: f64,
    pub placement: String,
    pub fault: String,
    pub repetition: Repetition,
    pub outcome: std::result::Result<RunOutcome, String>,
    pub elapsed_ms: f64,
    /// Summary rows only.
    pub std_relative_error: Option<f64>,
}

fn opt<T: fmt::Display>(v: Option<T>) -> String {
    v.map_or(String::new(), |v| v.to_string())
}

impl SweepRow {
    pub fn relative_error(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|o| o.relative_error)
    }

    fn csv(&self) -> String {
        let (err, lp, bound, bytes, status) = match &self.outcome {
            Ok(o) => (
                o.relative_error.to_string(),
                opt(o.lambda_prime),
                opt(o.bound_value),
                opt(o.comm_bytes),
                "ok".to_string(),
            ),
            // Keep messages on one CSV field.
            Err(e) => (String::new(), String::new(), String::new(), String::new(), format!("error: {}", e.replace([',', '\n'], ";"))),
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{:.3},{},{}",
            self.task,
            self.method,
            self.lambda,
            self.placement,
            self.fault,
            self.repetition,
            err,
            lp,
            bound,
            bytes,
            self.elapsed_ms,
            opt(self.std_relative_error),
            status
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SWEEP_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.csv());
            out.push('\n');
        }
        out
    }

    pub fn summary(&self, schedule_index: usize, method: Method) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.schedule_index == schedule_index && r.method == method && r.repetition == Repetition::Summary)
    }

    /// Mean relative error over the successful repetitions.
    pub fn mean_error(&self, schedule_index: usize, method: Method) -> Option<f64> {
        self.summary(schedule_index, method)?.relative_error()
    }

    pub fn details(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.repetition != Repetition::Summary)
    }
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

type CellResult = (Method, std::result::Result<RunOutcome, String>, f64);

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn run_cell(config: &ExperimentConfig, schedule_index: usize, repetition: usize) -> Vec<CellResult> {
    let lambda = config.lambda_schedule[schedule_index].lambda;
    let started = Instant::now();
    let dataset = match config.generate(schedule_index, repetition) {
        Ok(d) => d,
        Err(e) => {
            let ms = elapsed_ms(started);
            return config.methods.iter().map(|&m| (m, Err(format!("data generation: {e}")), ms)).collect();
        }
    };

    let wants_nodes = config.methods.iter().any(|m| matches!(m, Method::Drl | Method::DivAvg));
    let fault_seed = config.fault_seed(schedule_index, repetition);
    let started = Instant::now();
    let drl = wants_nodes.then(|| config.run_drl(&dataset, lambda, &config.faults, fault_seed));
    let drl_ms = elapsed_ms(started);

    config
        .methods
        .iter()
        .map(|&method| {
            let started = Instant::now();
            let outcome: Result<RunOutcome> = match method {
                Method::Drl | Method::DivAvg => match drl.as_ref().expect("node runs requested") {
                    Err(e) => Err(e.clone()),
                    Ok(run) => {
                        let run = if method == Method::DivAvg {
                            run.reaggregate(Aggregation::Average, &config.median)
                        } else {
                            Ok(run.clone())
                        };
                        run.and_then(|run| {
                            let lp = if method == Method::Drl {
                                lambda_prime(&run.per_node_lambda, config.theory.gamma).ok()
                            } else {
                                None
                            };
                            Ok(RunOutcome {
                                relative_error: relative_error(&dataset, &run.aggregate)?,
                                lambda_prime: lp,
                                bound_value: lp.and_then(|lp| config.bound(&dataset, lp)),
                                comm_bytes: Some(run.comm_bytes),
                            })
                        })
                    }
                },
                Method::Centralized => config.run_centralized(&dataset, lambda).and_then(|e| {
                    Ok(RunOutcome {
                        relative_error: relative_error(&dataset, &e)?,
                        lambda_prime: None,
                        bound_value: None,
                        comm_bytes: None,
                    })
                }),
                Method::Standard => config.run_standard(&dataset).and_then(|e| {
                    Ok(RunOutcome {
                        relative_error: relative_error(&dataset, &e)?,
                        lambda_prime: None,
                        bound_value: None,
                        comm_bytes: None,
                    })
                }),
            };
            let mut ms = elapsed_ms(started);
            if matches!(method, Method::Drl | Method::DivAvg) {
                ms += drl_ms;
            }
            (method, outcome.map_err(|e| e.to_string()), ms)
        })
        .collect()
}

fn summarize(details: &[SweepRow]) -> SweepRow {
    let first = &details[0];
    let ok: Vec<&RunOutcome> = details.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
    let failures = details.len() - ok.len();
    let outcome = if ok.is_empty() {
        Err(format!("all {failures} repetitions failed"))
    } else {
        let errs: Vec<f64> = ok.iter().map(|o| o.relative_error).collect();
        let mean_of = |f: &dyn Fn(&RunOutcome) -> Option<f64>| {
            let v: Vec<f64> = ok.iter().filter_map(|o| f(o)).collect();
            (v.len() == ok.len()).then(|| mean_std(&v).0)
        };
        Ok(RunOutcome {
            relative_error: mean_std(&errs).0,
            lambda_prime: mean_of(&|o| o.lambda_prime),
            bound_value: mean_of(&|o| o.bound_value),
            comm_bytes: ok[0].comm_bytes,
        })
    };
    let std = outcome.is_ok().then(|| {
        let errs: Vec<f64> = ok.iter().map(|o| o.relative_error).collect();
        mean_std(&errs).1
    });
    SweepRow {
        repetition: Repetition::Summary,
        outcome,
        elapsed_ms: details.iter().map(|r| r.elapsed_ms).sum::<f64>() / details.len() as f64,
        std_relative_error: std,
        ..first.clone()
    }
}

/// Runs every (schedule entry, repetition) cell, possibly concurrently, and
/// reports rows in (λ, method, repetition) order with a summary row closing
/// each (λ, method) group. Per-run failures become rows with an error status.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepReport> {
    config.validate()?;
    let reps = config.repetitions;
    let cells = par::map_indexed(config.lambda_schedule.len() * reps, |c| run_cell(config, c / reps, c % reps));
    let fault = config.faults.label();

    let mut rows = Vec::new();
    for (si, entry) in config.lambda_schedule.iter().enumerate() {
        for (mi, &method) in config.methods.iter().enumerate() {
            let details: Vec<SweepRow> = (0..reps)
                .map(|r| {
                    let (m, outcome, ms) = &cells[si * reps + r][mi];
                    debug_assert_eq!(*m, method);
                    SweepRow {
                        task: config.task,
                        method,
                        schedule_index: si,
                        lambda: entry.lambda,
                        placement: entry.placement.to_string(),
                        fault: fault.clone(),
                        repetition: Repetition::Run(r),
                        outcome: outcome.clone(),
                        elapsed_ms: *ms,
                        std_relative_error: None,
                    }
                })
                .collect();
            let summary = summarize(&details);
            rows.extend(details);
            rows.push(summary);
        }
    }
    Ok(SweepReport { rows })
}

/// α and C_α for each β* in [`TABLE1_BETAS`].
pub fn table1_points() -> Result<Vec<TheoryPoint>> {
    TABLE1_BETAS.iter().map(|&b| TheoryPoint::from_beta_star(b)).collect()
}

pub fn run_table1() -> Result<String> {
    let mut out = String::from("beta_star,alpha,c_alpha\n");
    for t in table1_points()? {
        writeln!(out, "{:e},{:.6},{:.6}", t.beta_star, t.alpha, t.c_alpha).expect("writing to a String");
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaultStudyRow {
    pub fault: String,
    pub method: Method,
    pub schedule_index: usize,
    pub lambda: f64,
    pub placement: String,
    pub errors: Vec<f64>,
    pub failures: usize,
}

impl FaultStudyRow {
    pub fn mean(&self) -> Option<f64> {
        (!self.errors.is_empty()).then(|| mean_std(&self.errors).0)
    }

    pub fn std(&self) -> Option<f64> {
        (!self.errors.is_empty()).then(|| mean_std(&self.errors).1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaultStudyReport {
    pub rows: Vec<FaultStudyRow>,
}

impl FaultStudyReport {
    pub fn row(&self, fault: &str, method: Method, schedule_index: usize) -> Option<&FaultStudyRow> {
        self.rows.iter().find(|r| r.fault == fault && r.method == method && r.schedule_index == schedule_index)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(FAULT_HEADER);
        out.push('\n');
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.fault,
                r.method,
                r.lambda,
                r.placement,
                opt(r.mean()),
                opt(r.std()),
                r.errors.len() + r.failures,
                r.failures
            )
            .expect("writing to a String");
        }
        out
    }
}

/// The fault scenarios compared by [`run_fault_study`]: no faults, latency
/// only, communication errors only. Parameters come from the config's fault
/// model where given, defaults otherwise.
pub fn fault_variants(config: &ExperimentConfig) -> Vec<(String, FaultModel)> {
    vec![
        ("none".into(), FaultModel::none()),
        ("latency".into(), FaultModel::latency(config.faults.latency.unwrap_or_default())),
        ("comm_error".into(), FaultModel::comm_error(config.faults.comm_error.unwrap_or_default())),
    ]
}

/// For each schedule entry and fault scenario, DRL versus averaging over the
/// same node outputs. Data seeds match [`run_sweep`]; every fault scenario
/// sees the same datasets.
pub fn run_fault_study(config: &ExperimentConfig) -> Result<FaultStudyReport> {
    config.validate()?;
    let variants = fault_variants(config);
    let reps = config.repetitions;
    let cells: Vec<Vec<[Option<f64>; 2]>> = par::map_indexed(config.lambda_schedule.len() * reps, |c| {
        let (si, r) = (c / reps, c % reps);
        let lambda = config.lambda_schedule[si].lambda;
        let Ok(dataset) = config.generate(si, r) else {
            return vec![[None, None]; variants.len()];
        };
        let fault_seed = config.fault_seed(si, r);
        variants
            .iter()
            .map(|(_, model)| {
                let Ok(run) = config.run_drl(&dataset, lambda, model, fault_seed) else {
                    return [None, None];
                };
                let drl = relative_error(&dataset, &run.aggregate).ok();
                let avg = run
                    .reaggregate(Aggregation::Average, &config.median)
                    .and_then(|a| relative_error(&dataset, &a.aggregate))
                    .ok();
                [drl, avg]
            })
            .collect()
    });

    let mut rows = Vec::new();
    for (si, entry) in config.lambda_schedule.iter().enumerate() {
        for (vi, (name, _)) in variants.iter().enumerate() {
            for (mi, method) in [Method::Drl, Method::DivAvg].into_iter().enumerate() {
                let results: Vec<Option<f64>> = (0..reps).map(|r| cells[si * reps + r][vi][mi]).collect();
                rows.push(FaultStudyRow {
                    fault: name.clone(),
                    method,
                    schedule_index: si,
                    lambda: entry.lambda,
                    placement: entry.placement.to_string(),
                    errors: results.iter().flatten().copied().collect(),
                    failures: results.iter().filter(|e| e.is_none()).count(),
                });
            }
        }
    }
    Ok(FaultStudyReport { rows })
}

/// Drops the named columns from a CSV document.
pub fn strip_columns(csv: &str, columns: &[&str]) -> String {
    let mut lines = csv.lines();
    let Some(header) = lines.next() else { return String::new() };
    let keep: Vec<bool> = header.split(',').map(|h| !columns.contains(&h)).collect();
    let filter = |line: &str| {
        line.split(',').zip(&keep).filter(|(_, &k)| k).map(|(f, _)| f).collect::<Vec<_>>().join(",")
    };
    let mut out = filter(header);
    out.push('\n');
    for line in lines {
        out.push_str(&filter(line));
        out.push('\n');
    }
    out
}
