//! Distributed robust learning on simulated nodes: contiguous partitioning,
//! per-node base learners, fault injection, and aggregation by geometric
//! median or by averaging.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::seq::index;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, DrlError, Result};
use crate::estimate::{serialized_size, Estimate, EstimateKind};
use crate::geom_median::{coordinate_mean, geometric_median, MedianConfig};
use crate::matrix::MatrixView;
use crate::par;
use crate::rlr::base_rotr;
use crate::rng::{derive_seed, stream_rng, streams};
use crate::rpca::{base_rpca, projection_from_basis};
use crate::synth::{empirical_lambda, Dataset};

/// Trim level used when the outlier fraction is unknown.
pub const UNKNOWN_LAMBDA: f64 = 0.5;

const COMM_PURPOSE: u64 = 1;
const BREAKDOWN_PURPOSE: u64 = 2;

/// Contiguous, balanced column ranges, one per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodePlan {
    ranges: Vec<Range<usize>>,
}

impl NodePlan {
    pub fn k(&self) -> usize {
        self.ranges.len()
    }

    pub fn ranges(&self) -> &[Range<usize>] {
        &self.ranges
    }

    pub fn total(&self) -> usize {
        self.ranges.last().map_or(0, |r| r.end)
    }
}

/// Splits `total` columns into `k` contiguous ranges whose sizes differ by at
/// most one; the larger ranges come first.
pub fn partition(total: usize, k: usize) -> Result<NodePlan> {
    if k == 0 {
        return Err(invalid("node count must be positive"));
    }
    if k > total {
        return Err(invalid(format!("cannot split {total} columns over {k} nodes")));
    }
    let (base, extra) = (total / k, total % k);
    let mut start = 0;
    let ranges = (0..k)
        .map(|i| {
            let len = base + usize::from(i < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect();
    Ok(NodePlan { ranges })
}

fn default_late_fraction() -> f64 {
    0.5
}
fn default_data_fraction() -> f64 {
    0.1
}
fn default_node_fraction() -> f64 {
    0.1
}
fn default_flip_fraction() -> f64 {
    0.3
}
fn default_magnitude() -> f64 {
    1e6
}

/// Late nodes only get through a prefix of their data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatencyFault {
    #[serde(default = "default_late_fraction")]
    pub late_fraction: f64,
    #[serde(default = "default_data_fraction")]
    pub data_fraction: f64,
}

impl Default for LatencyFault {
    fn default() -> Self {
        LatencyFault { late_fraction: default_late_fraction(), data_fraction: default_data_fraction() }
    }
}

/// Sign flips on a random subset of entries of some nodes' estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommErrorFault {
    #[serde(default = "default_node_fraction")]
    pub node_fraction: f64,
    #[serde(default = "default_flip_fraction")]
    pub element_flip_fraction: f64,
}

impl Default for CommErrorFault {
    fn default() -> Self {
        CommErrorFault { node_fraction: default_node_fraction(), element_flip_fraction: default_flip_fraction() }
    }
}

/// Listed nodes (0-based) report a random estimate of the given norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BreakdownFault {
    pub node_indices: Vec<usize>,
    #[serde(default = "default_magnitude")]
    pub replacement_magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultModel {
    #[serde(default)]
    pub latency: Option<LatencyFault>,
    #[serde(default)]
    pub comm_error: Option<CommErrorFault>,
    #[serde(default)]
    pub breakdown: Option<BreakdownFault>,
}

impl FaultModel {
    pub fn none() -> Self {
        FaultModel::default()
    }

    pub fn latency(fault: LatencyFault) -> Self {
        FaultModel { latency: Some(fault), ..Default::default() }
    }

    pub fn comm_error(fault: CommErrorFault) -> Self {
        FaultModel { comm_error: Some(fault), ..Default::default() }
    }

    pub fn breakdown(fault: BreakdownFault) -> Self {
        FaultModel { breakdown: Some(fault), ..Default::default() }
    }

    pub fn is_empty(&self) -> bool {
        self.latency.is_none() && self.comm_error.is_none() && self.breakdown.is_none()
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if let Some(l) = &self.latency {
            if !(0.0..1.0).contains(&l.late_fraction) {
                return Err(invalid(format!("late_fraction {} outside [0, 1)", l.late_fraction)));
            }
            if !(l.data_fraction > 0.0 && l.data_fraction <= 1.0) {
                return Err(invalid(format!("data_fraction {} outside (0, 1]", l.data_fraction)));
            }
        }
        if let Some(c) = &self.comm_error {
            if !(0.0..=1.0).contains(&c.node_fraction) {
                return Err(invalid(format!("node_fraction {} outside [0, 1]", c.node_fraction)));
            }
            if !(0.0..=1.0).contains(&c.element_flip_fraction) {
                return Err(invalid(format!("element_flip_fraction {} outside [0, 1]", c.element_flip_fraction)));
            }
        }
        if let Some(b) = &self.breakdown {
            if let Some(&i) = b.node_indices.iter().find(|&&i| i >= k) {
                return Err(invalid(format!("breakdown node {i} out of range for {k} nodes")));
            }
            if !(b.replacement_magnitude >= 0.0 && b.replacement_magnitude.is_finite()) {
                return Err(invalid("replacement magnitude must be finite and non-negative"));
            }
        }
        Ok(())
    }

    /// Short label such as `none` or `latency+comm_error`.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.latency.is_some() {
            parts.push("latency");
        }
        if self.comm_error.is_some() {
            parts.push("comm_error");
        }
        if self.breakdown.is_some() {
            parts.push("breakdown");
        }
        if parts.is_empty() {
            "none".into()
        } else {
            parts.join("+")
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    GeometricMedian,
    Average,
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregation::GeometricMedian => "geometric_median",
            Aggregation::Average => "average",
        })
    }
}

impl FromStr for Aggregation {
    type Err = DrlError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geometric_median" | "median" => Ok(Aggregation::GeometricMedian),
            "average" | "mean" => Ok(Aggregation::Average),
            other => Err(DrlError::Parse(format!("unknown aggregation `{other}`"))),
        }
    }
}

/// Seeded choice of `⌈fraction · k⌉` distinct nodes, ascending.
fn choose_nodes(k: usize, fraction: f64, seed: u64, stream: u64) -> Vec<usize> {
    let amount = ((fraction * k as f64).ceil() as usize).min(k);
    let mut nodes = index::sample(&mut stream_rng(seed, stream), k, amount).into_vec();
    nodes.sort_unstable();
    nodes
}

/// Nodes that only finish a prefix of their data under `model`.
pub fn late_nodes(model: &FaultModel, k: usize, seed: u64) -> Vec<usize> {
    match &model.latency {
        Some(l) => choose_nodes(k, l.late_fraction, seed, streams::LATENCY_SELECT),
        None => Vec::new(),
    }
}

/// A random estimate shaped like `template` with norm `magnitude`.
fn breakdown_estimate(template: &Estimate, magnitude: f64, seed: u64, node: usize) -> Result<Estimate> {
    let mut rng = stream_rng(derive_seed(seed, &[BREAKDOWN_PURPOSE]), streams::NODE_BASE + node as u64);
    let mut v: Vec<f64> = StandardNormal.sample_iter(&mut rng).take(template.values().len()).collect();
    let norm = v.iter().map(|x| x * x).fold(0.0, |a, x| a + x).sqrt();
    let scale = if norm > 0.0 { magnitude / norm } else { 0.0 };
    v.iter_mut().for_each(|x| *x *= scale);
    template.with_values(v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InjectedFaults {
    pub estimates: Vec<Estimate>,
    pub late_nodes: Vec<usize>,
    pub comm_corrupted: Vec<usize>,
    pub broken: Vec<usize>,
}

/// Applies communication errors, then breakdown replacements. Latency acts
/// upstream on the data each node sees; here it is only recorded.
pub fn inject_faults(estimates: &[Estimate], model: &FaultModel, seed: u64) -> Result<InjectedFaults> {
    let k = estimates.len();
    if k == 0 {
        return Err(DrlError::Empty("node estimates"));
    }
    model.validate(k)?;
    let mut out = estimates.to_vec();

    let mut comm_corrupted = Vec::new();
    if let Some(c) = &model.comm_error {
        comm_corrupted = choose_nodes(k, c.node_fraction, seed, streams::FAULT_SELECT);
        let comm_seed = derive_seed(seed, &[COMM_PURPOSE]);
        for &node in &comm_corrupted {
            let mut values = out[node].values().to_vec();
            let flips = (c.element_flip_fraction * values.len() as f64).floor() as usize;
            let mut rng = stream_rng(comm_seed, streams::NODE_BASE + node as u64);
            for pos in index::sample(&mut rng, values.len(), flips) {
                values[pos] = -values[pos];
            }
            out[node] = out[node].with_values(values)?;
        }
    }

    let mut broken = Vec::new();
    if let Some(b) = &model.breakdown {
        broken = b.node_indices.clone();
        broken.sort_unstable();
        broken.dedup();
        for &node in &broken {
            out[node] = breakdown_estimate(&out[node], b.replacement_magnitude, seed, node)?;
        }
    }

    Ok(InjectedFaults { estimates: out, late_nodes: late_nodes(model, k, seed), comm_corrupted, broken })
}

/// Fuses node estimates. Returns the aggregate and, for the median, the
/// Weiszfeld iteration count and convergence flag.
pub fn aggregate(
    estimates: &[Estimate],
    aggregation: Aggregation,
    median: &MedianConfig,
) -> Result<(Estimate, Option<(usize, bool)>)> {
    match aggregation {
        Aggregation::Average => Ok((coordinate_mean(estimates)?, None)),
        Aggregation::GeometricMedian => {
            let r = geometric_median(estimates, median)?;
            Ok((r.median, Some((r.iterations, r.converged))))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrlConfig {
    pub k: usize,
    /// Trim level handed to every node; `None` uses [`UNKNOWN_LAMBDA`].
    pub lambda: Option<f64>,
    pub aggregation: Aggregation,
    pub faults: FaultModel,
    /// Seeds fault injection; data generation is seeded separately.
    pub seed: u64,
    pub median: MedianConfig,
}

impl DrlConfig {
    pub fn new(k: usize, lambda: Option<f64>) -> Self {
        DrlConfig {
            k,
            lambda,
            aggregation: Aggregation::GeometricMedian,
            faults: FaultModel::none(),
            seed: 0,
            median: MedianConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrlRun {
    /// What each node computed (failed nodes already replaced).
    pub node_estimates: Vec<Estimate>,
    /// What the aggregator received.
    pub faulted_estimates: Vec<Estimate>,
    pub aggregate: Estimate,
    pub aggregation: Aggregation,
    pub per_node_lambda: Vec<f64>,
    pub comm_bytes: usize,
    pub wall_times: Vec<Duration>,
    pub late_nodes: Vec<usize>,
    pub comm_corrupted: Vec<usize>,
    pub broken_nodes: Vec<usize>,
    /// Nodes whose base learner returned an error.
    pub failed_nodes: Vec<usize>,
    /// Kind and shape of the message each node sends.
    pub message_shape: (EstimateKind, usize, usize),
    pub median_iterations: Option<usize>,
    pub median_converged: bool,
}

impl DrlRun {
    pub fn k(&self) -> usize {
        self.node_estimates.len()
    }

    /// Same node outputs and faults, different fusion rule.
    pub fn reaggregate(&self, aggregation: Aggregation, median: &MedianConfig) -> Result<DrlRun> {
        let (agg, info) = aggregate(&self.faulted_estimates, aggregation, median)?;
        Ok(DrlRun {
            aggregate: agg,
            aggregation,
            median_iterations: info.map(|i| i.0),
            median_converged: info.is_none_or(|i| i.1),
            ..self.clone()
        })
    }
}

/// `k · s`, where `s` is the serialized size of one node's message.
pub fn comm_cost(run: &DrlRun) -> usize {
    let (kind, rows, cols) = run.message_shape;
    run.k() * serialized_size(kind, rows, cols)
}

type Learner<'a> = dyn Fn(MatrixView<'_>, Option<&[f64]>, f64) -> Result<Estimate> + Sync + 'a;

fn run_drl(
    dataset: &Dataset,
    config: &DrlConfig,
    output: (EstimateKind, usize, usize),
    message: (EstimateKind, usize, usize),
    learner: &Learner<'_>,
) -> Result<DrlRun> {
    dataset.validate()?;
    config.median.validate()?;
    config.faults.validate(config.k)?;
    let lambda = config.lambda.unwrap_or(UNKNOWN_LAMBDA);
    let plan = partition(dataset.n_total(), config.k)?;
    let late = late_nodes(&config.faults, config.k, config.seed);
    let data_fraction = config.faults.latency.map_or(1.0, |l| l.data_fraction);

    let results: Vec<(Result<Estimate>, Duration)> = par::map_indexed(config.k, |i| {
        let started = Instant::now();
        let mut range = plan.ranges()[i].clone();
        if late.binary_search(&i).is_ok() {
            let seen = ((data_fraction * range.len() as f64).ceil() as usize).clamp(1, range.len());
            range.end = range.start + seen;
        }
        let x = dataset.x.columns(range.clone());
        let y = dataset.y.as_ref().map(|y| &y[range]);
        (learner(x, y, lambda), started.elapsed())
    });

    let template = Estimate::zeros(output.0, output.1, output.2)?;
    let magnitude = config.faults.breakdown.as_ref().map_or(default_magnitude(), |b| b.replacement_magnitude);
    let mut node_estimates = Vec::with_capacity(config.k);
    let mut failed_nodes = Vec::new();
    let mut wall_times = Vec::with_capacity(config.k);
    let mut first_error = None;
    for (i, (result, elapsed)) in results.into_iter().enumerate() {
        wall_times.push(elapsed);
        match result {
            Ok(e) => node_estimates.push(e),
            Err(e) => {
                failed_nodes.push(i);
                first_error.get_or_insert(e);
                node_estimates.push(breakdown_estimate(&template, magnitude, config.seed, i)?);
            }
        }
    }
    if failed_nodes.len() == config.k {
        return Err(first_error.expect("at least one node"));
    }

    let injected = inject_faults(&node_estimates, &config.faults, config.seed)?;
    let (agg, info) = aggregate(&injected.estimates, config.aggregation, &config.median)?;
    let mut broken_nodes = injected.broken;
    broken_nodes.extend(&failed_nodes);
    broken_nodes.sort_unstable();
    broken_nodes.dedup();

    let run = DrlRun {
        node_estimates,
        faulted_estimates: injected.estimates,
        aggregate: agg,
        aggregation: config.aggregation,
        per_node_lambda: empirical_lambda(&dataset.labels, &plan)?,
        comm_bytes: 0,
        wall_times,
        late_nodes: late,
        comm_corrupted: injected.comm_corrupted,
        broken_nodes,
        failed_nodes,
        message_shape: message,
        median_iterations: info.map(|i| i.0),
        median_converged: info.is_none_or(|i| i.1),
    };
    Ok(DrlRun { comm_bytes: comm_cost(&run), ..run })
}

/// Each node runs trimmed PCA and reports its top-`d` eigenbasis; the
/// aggregator fuses the corresponding projection matrices.
pub fn run_drl_rpca(dataset: &Dataset, d: usize, config: &DrlConfig) -> Result<DrlRun> {
    let p = dataset.p();
    if d == 0 || d >= p {
        return Err(invalid(format!("subspace dimension {d} must satisfy 1 <= d < p = {p}")));
    }
    run_drl(
        dataset,
        config,
        (EstimateKind::ProjectionMatrix, p, p),
        (EstimateKind::EigenBasis, p, d),
        &|x, _, lambda| base_rpca(x, d, lambda).map(|m| projection_from_basis(&m)),
    )
}

/// Each node runs trimmed-correlation regression; the aggregator fuses the
/// regression vectors.
pub fn run_drl_rlr(dataset: &Dataset, config: &DrlConfig) -> Result<DrlRun> {
    if dataset.y.is_none() {
        return Err(invalid("regression needs responses"));
    }
    let p = dataset.p();
    run_drl(
        dataset,
        config,
        (EstimateKind::RegressionParam, p, 1),
        (EstimateKind::RegressionParam, p, 1),
        &|x, y, lambda| base_rotr(x, y.expect("checked above"), lambda).map(|m| m.theta),
    )
}
