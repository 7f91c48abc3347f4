//! Seeded synthetic scenarios for robust PCA and robust regression, with
//! outlier placement policies that control the per-node outlier fractions
//! seen under contiguous partitioning.

use std::fmt;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::drl::{partition, NodePlan};
use crate::error::{invalid, DrlError, Result};
use crate::estimate::{Estimate, EstimateKind};
use crate::matrix::Matrix;
use crate::rng::{stream_rng, streams};

/// How outlier columns are distributed across nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PlacementPolicy {
    /// Labels shuffled uniformly over all columns.
    #[default]
    Uniform,
    /// One target fraction per node; the mean must match the overall λ.
    PerNodeFractions(Vec<f64>),
    /// Every outlier on the first node.
    SingleNodeConcentrated,
    /// The first `⌊2k/5⌋` nodes hold only outliers; any remaining outliers
    /// are spread evenly over the other nodes.
    FavorableHalf,
}

impl PlacementPolicy {
    /// Number of all-outlier nodes used by [`PlacementPolicy::FavorableHalf`].
    pub fn favorable_nodes(k: usize) -> usize {
        2 * k / 5
    }

    /// The overall λ for which `FavorableHalf` leaves the other nodes clean.
    pub fn favorable_lambda(k: usize, n_total: usize) -> Result<f64> {
        let plan = partition(n_total, k)?;
        let bad: usize = plan.ranges()[..Self::favorable_nodes(k)].iter().map(|r| r.len()).sum();
        Ok(bad as f64 / n_total as f64)
    }
}

impl fmt::Display for PlacementPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlacementPolicy::Uniform => f.write_str("uniform"),
            PlacementPolicy::PerNodeFractions(fr) => {
                // Runs of equal fractions are collapsed: "10x0.8/10x0.4".
                let mut parts: Vec<String> = Vec::new();
                let mut i = 0;
                while i < fr.len() {
                    let mut j = i;
                    while j < fr.len() && fr[j] == fr[i] {
                        j += 1;
                    }
                    parts.push(format!("{}x{}", j - i, fr[i]));
                    i = j;
                }
                write!(f, "per_node:{}", parts.join("/"))
            }
            PlacementPolicy::SingleNodeConcentrated => f.write_str("single_node"),
            PlacementPolicy::FavorableHalf => f.write_str("favorable_half"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaScenario {
    pub p: usize,
    pub d: usize,
    pub n_total: usize,
    pub lambda: f64,
    pub sigma_e: f64,
    pub sigma_o: f64,
    pub placement: PlacementPolicy,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrScenario {
    pub p: usize,
    pub n_total: usize,
    pub lambda: f64,
    pub sigma_e: f64,
    pub sigma_o: f64,
    pub placement: PlacementPolicy,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Truth {
    Pca { basis: Estimate, projection: Estimate },
    Lr { theta: Estimate },
}

impl Truth {
    /// The estimate DRL output is compared against.
    pub fn target(&self) -> &Estimate {
        match self {
            Truth::Pca { projection, .. } => projection,
            Truth::Lr { theta } => theta,
        }
    }
}

/// Samples are columns of `x`; `labels[i]` is true for outliers.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Option<Vec<f64>>,
    pub labels: Vec<bool>,
    pub truth: Option<Truth>,
}

impl Dataset {
    pub fn n_total(&self) -> usize {
        self.x.cols()
    }

    pub fn p(&self) -> usize {
        self.x.rows()
    }

    pub fn outlier_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.x.cols();
        if n == 0 || self.x.rows() == 0 {
            return Err(DrlError::Empty("dataset"));
        }
        if self.labels.len() != n {
            return Err(DrlError::ShapeMismatch {
                expected: format!("{n} labels"),
                found: format!("{} labels", self.labels.len()),
            });
        }
        if let Some(y) = &self.y {
            if y.len() != n {
                return Err(DrlError::ShapeMismatch {
                    expected: format!("{n} responses"),
                    found: format!("{} responses", y.len()),
                });
            }
            if y.iter().any(|v| !v.is_finite()) {
                return Err(DrlError::NonFinite("responses"));
            }
        }
        if !self.x.is_finite() {
            return Err(DrlError::NonFinite("samples"));
        }
        Ok(())
    }

    /// Writes a header line and then one sample per line:
    /// `label[,y],x1,...,xp` with label 1 for outliers.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut header = vec!["label".to_string()];
        if self.y.is_some() {
            header.push("y".into());
        }
        header.extend((1..=self.p()).map(|j| format!("x{j}")));
        writeln!(out, "{}", header.join(","))?;
        let mut line = String::new();
        for i in 0..self.n_total() {
            line.clear();
            line.push(if self.labels[i] { '1' } else { '0' });
            if let Some(y) = &self.y {
                line.push_str(&format!(",{:e}", y[i]));
            }
            for j in 0..self.p() {
                line.push_str(&format!(",{:e}", self.x.get(j, i)));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    /// Parses the format written by [`Dataset::write_csv`]. Ground truth is
    /// not part of the file.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines.next().ok_or(DrlError::Empty("dataset file"))??;
        let names: Vec<&str> = header.trim().split(',').collect();
        if names.first() != Some(&"label") {
            return Err(DrlError::Parse("header must start with `label`".into()));
        }
        let has_y = names.get(1) == Some(&"y");
        let p = names.len() - 1 - usize::from(has_y);
        if p == 0 {
            return Err(DrlError::Parse("no feature columns".into()));
        }
        let mut labels = Vec::new();
        let mut y = Vec::new();
        let mut cols: Vec<f64> = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != names.len() {
                return Err(DrlError::Parse(format!(
                    "line {}: expected {} fields, found {}",
                    lineno + 2,
                    names.len(),
                    fields.len()
                )));
            }
            labels.push(match fields[0] {
                "0" => false,
                "1" => true,
                other => return Err(DrlError::Parse(format!("line {}: bad label `{other}`", lineno + 2))),
            });
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| DrlError::Parse(format!("line {}: `{s}`: {e}", lineno + 2)))
            };
            let mut rest = &fields[1..];
            if has_y {
                y.push(parse(rest[0])?);
                rest = &rest[1..];
            }
            for f in rest {
                cols.push(parse(f)?);
            }
        }
        let n = labels.len();
        if n == 0 {
            return Err(DrlError::Empty("dataset file"));
        }
        // `cols` is sample-major; the matrix stores one feature per row.
        let mut x = Matrix::zeros(p, n);
        for i in 0..n {
            for j in 0..p {
                x.set(j, i, cols[i * p + j]);
            }
        }
        let ds = Dataset { x, y: has_y.then_some(y), labels, truth: None };
        ds.validate()?;
        Ok(ds)
    }
}

fn check_common(p: usize, n_total: usize, lambda: f64, sigma_e: f64, sigma_o: f64, k: usize) -> Result<()> {
    if p == 0 {
        return Err(invalid("dimension p must be positive"));
    }
    if !(0.0..1.0).contains(&lambda) {
        return Err(invalid(format!("lambda {lambda} outside [0, 1)")));
    }
    if !(sigma_e > 0.0 && sigma_e.is_finite()) || !(sigma_o > 0.0 && sigma_o.is_finite()) {
        return Err(invalid("sigma_e and sigma_o must be positive and finite"));
    }
    if k == 0 || k > n_total {
        return Err(invalid(format!("node count {k} must be in 1..={n_total}")));
    }
    Ok(())
}

/// Distributes `total` units over slots with real-valued `quotas`, never
/// exceeding `caps`. Largest remainders win; ties go to the lower index.
fn apportion(quotas: &[f64], caps: &[usize], total: usize) -> Result<Vec<usize>> {
    if total > caps.iter().sum() {
        return Err(DrlError::Infeasible(format!("{total} outliers do not fit in the node ranges")));
    }
    let mut counts: Vec<usize> = quotas.iter().zip(caps).map(|(&q, &c)| (q.floor() as usize).min(c)).collect();
    let mut assigned: usize = counts.iter().sum();
    while assigned < total {
        let i = (0..counts.len())
            .filter(|&i| counts[i] < caps[i])
            .max_by(|&a, &b| {
                let ra = quotas[a] - counts[a] as f64;
                let rb = quotas[b] - counts[b] as f64;
                ra.total_cmp(&rb).then(b.cmp(&a))
            })
            .expect("capacity checked above");
        counts[i] += 1;
        assigned += 1;
    }
    while assigned > total {
        let i = (0..counts.len())
            .filter(|&i| counts[i] > 0)
            .min_by(|&a, &b| {
                let ra = quotas[a] - counts[a] as f64;
                let rb = quotas[b] - counts[b] as f64;
                ra.total_cmp(&rb).then(b.cmp(&a))
            })
            .expect("assigned > 0");
        counts[i] -= 1;
        assigned -= 1;
    }
    Ok(counts)
}

/// Outlier labels for `n_total` columns laid out over `k` contiguous nodes.
pub fn place_outliers(
    placement: &PlacementPolicy,
    lambda: f64,
    n_total: usize,
    k: usize,
    seed: u64,
) -> Result<Vec<bool>> {
    let plan = partition(n_total, k)?;
    let total = (lambda * n_total as f64).round() as usize;
    let caps: Vec<usize> = plan.ranges().iter().map(|r| r.len()).collect();
    let counts = match placement {
        PlacementPolicy::Uniform => {
            let mut labels: Vec<bool> = (0..n_total).map(|i| i < total).collect();
            labels.shuffle(&mut stream_rng(seed, streams::PLACEMENT));
            return Ok(labels);
        }
        PlacementPolicy::PerNodeFractions(fractions) => {
            if fractions.len() != k {
                return Err(invalid(format!("{} per-node fractions for {k} nodes", fractions.len())));
            }
            if let Some(f) = fractions.iter().find(|f| !(0.0..1.0).contains(*f)) {
                return Err(invalid(format!("per-node fraction {f} outside [0, 1)")));
            }
            let mean = fractions.iter().sum::<f64>() / k as f64;
            if (mean - lambda).abs() > 1.0 / n_total as f64 {
                return Err(DrlError::Infeasible(format!(
                    "per-node fractions average {mean}, overall lambda is {lambda}"
                )));
            }
            let quotas: Vec<f64> = fractions.iter().zip(&caps).map(|(f, &c)| f * c as f64).collect();
            apportion(&quotas, &caps, total)?
        }
        PlacementPolicy::SingleNodeConcentrated => {
            if total >= caps[0] && total > 0 {
                return Err(DrlError::Infeasible(format!(
                    "{total} outliers would fill the first node of {} samples",
                    caps[0]
                )));
            }
            let mut counts = vec![0; k];
            counts[0] = total;
            counts
        }
        PlacementPolicy::FavorableHalf => {
            let bad = PlacementPolicy::favorable_nodes(k);
            let full: usize = caps[..bad].iter().sum();
            if total < full {
                return Err(DrlError::Infeasible(format!(
                    "favorable placement needs at least {full} outliers, lambda gives {total}"
                )));
            }
            let rest_caps = &caps[bad..];
            let rest_n: usize = rest_caps.iter().sum();
            let spill = (total - full) as f64 / rest_n.max(1) as f64;
            let quotas: Vec<f64> = rest_caps.iter().map(|&c| spill * c as f64).collect();
            let mut counts = caps[..bad].to_vec();
            counts.extend(apportion(&quotas, rest_caps, total - full)?);
            counts
        }
    };
    let mut labels = vec![false; n_total];
    for (range, &count) in plan.ranges().iter().zip(&counts) {
        labels[range.start..range.start + count].fill(true);
    }
    Ok(labels)
}

/// Per-node outlier fractions under `plan`.
pub fn empirical_lambda(labels: &[bool], plan: &NodePlan) -> Result<Vec<f64>> {
    if plan.total() != labels.len() {
        return Err(DrlError::ShapeMismatch {
            expected: format!("{} labels", plan.total()),
            found: format!("{} labels", labels.len()),
        });
    }
    Ok(plan
        .ranges()
        .iter()
        .map(|r| labels[r.clone()].iter().filter(|&&l| l).count() as f64 / r.len() as f64)
        .collect())
}

/// Orthonormalizes the columns of a row-major `rows × cols` block in place.
fn modified_gram_schmidt(a: &mut [f64], rows: usize, cols: usize) -> Result<()> {
    for j in 0..cols {
        for prev in 0..j {
            let dot: f64 = (0..rows).map(|r| a[r * cols + prev] * a[r * cols + j]).fold(0.0, |s, v| s + v);
            for r in 0..rows {
                a[r * cols + j] -= dot * a[r * cols + prev];
            }
        }
        let norm = (0..rows).map(|r| a[r * cols + j].powi(2)).fold(0.0, |s, v| s + v).sqrt();
        if norm < 1e-12 {
            return Err(DrlError::IllConditioned { condition: f64::INFINITY });
        }
        for r in 0..rows {
            a[r * cols + j] /= norm;
        }
    }
    Ok(())
}

fn normals(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    StandardNormal.sample_iter(rng).take(n).collect()
}

/// `x = θ* z + v` for inliers, i.i.d. `U[−σ_o, σ_o]` entries for outliers.
pub fn gen_pca(s: &PcaScenario, k: usize) -> Result<Dataset> {
    check_common(s.p, s.n_total, s.lambda, s.sigma_e, s.sigma_o, k)?;
    let (p, d, n) = (s.p, s.d, s.n_total);
    if d == 0 || d >= p {
        return Err(invalid(format!("subspace dimension {d} must satisfy 1 <= d < p = {p}")));
    }
    let labels = place_outliers(&s.placement, s.lambda, n, k, s.seed)?;

    let mut theta = normals(&mut stream_rng(s.seed, streams::SUBSPACE), p * d);
    modified_gram_schmidt(&mut theta, p, d)?;

    let mut signal = stream_rng(s.seed, streams::SIGNAL);
    let mut noise = stream_rng(s.seed, streams::NOISE);
    let mut outliers = stream_rng(s.seed, streams::OUTLIERS);
    let box_dist = Uniform::new_inclusive(-s.sigma_o, s.sigma_o).map_err(|e| invalid(e.to_string()))?;
    let mut x = Matrix::zeros(p, n);
    let mut z = vec![0.0; d];
    for (i, &is_outlier) in labels.iter().enumerate() {
        if is_outlier {
            for r in 0..p {
                x.set(r, i, box_dist.sample(&mut outliers));
            }
        } else {
            for zj in z.iter_mut() {
                *zj = signal.sample(StandardNormal);
            }
            for r in 0..p {
                let clean = (0..d).map(|j| theta[r * d + j] * z[j]).fold(0.0, |a, v| a + v);
                let v: f64 = noise.sample(StandardNormal);
                x.set(r, i, clean + s.sigma_e * v);
            }
        }
    }

    let basis = Estimate::new(EstimateKind::EigenBasis, p, d, theta)?;
    let projection = crate::rpca::projection_from_eigenbasis(&basis)?;
    Ok(Dataset { x, y: None, labels, truth: Some(Truth::Pca { basis, projection }) })
}

/// `y = θ*ᵀx + v` for inliers; outliers have uniform covariates and the
/// sign-flipped response `−θ*ᵀx + v`. Both noise terms have std σ_e.
pub fn gen_lr(s: &LrScenario, k: usize) -> Result<Dataset> {
    check_common(s.p, s.n_total, s.lambda, s.sigma_e, s.sigma_o, k)?;
    let (p, n) = (s.p, s.n_total);
    let labels = place_outliers(&s.placement, s.lambda, n, k, s.seed)?;
    let theta = normals(&mut stream_rng(s.seed, streams::THETA), p);

    let mut signal = stream_rng(s.seed, streams::SIGNAL);
    let mut response = stream_rng(s.seed, streams::RESPONSE_NOISE);
    let mut outliers = stream_rng(s.seed, streams::OUTLIERS);
    let box_dist = Uniform::new_inclusive(-s.sigma_o, s.sigma_o).map_err(|e| invalid(e.to_string()))?;
    let mut x = Matrix::zeros(p, n);
    let mut y = Vec::with_capacity(n);
    for (i, &is_outlier) in labels.iter().enumerate() {
        let mut fit = 0.0;
        for (r, t) in theta.iter().enumerate() {
            let v = if is_outlier { box_dist.sample(&mut outliers) } else { signal.sample(StandardNormal) };
            x.set(r, i, v);
            fit += t * v;
        }
        let e: f64 = response.sample(StandardNormal);
        let sign = if is_outlier { -1.0 } else { 1.0 };
        y.push(sign * fit + s.sigma_e * e);
    }
    Ok(Dataset { x, y: Some(y), labels, truth: Some(Truth::Lr { theta: Estimate::regression(theta)? }) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pca(lambda: f64, placement: PlacementPolicy) -> PcaScenario {
        PcaScenario { p: 8, d: 2, n_total: 2000, lambda, sigma_e: 1.0, sigma_o: 10.0, placement, seed: 5 }
    }

    #[test]
    fn apportion_largest_remainder() {
        assert_eq!(apportion(&[1.5, 1.5, 1.0], &[5, 5, 5], 4).unwrap(), vec![2, 1, 1]);
        assert_eq!(apportion(&[0.9, 0.2, 0.6], &[5, 5, 5], 2).unwrap(), vec![1, 0, 1]);
        assert_eq!(apportion(&[3.0, 3.0], &[2, 5], 5).unwrap(), vec![2, 3]);
        assert_eq!(apportion(&[2.0, 2.0], &[5, 5], 3).unwrap(), vec![2, 1]);
        assert!(apportion(&[1.0], &[1], 2).is_err());
    }

    #[test]
    fn exact_total_and_per_node_fractions() {
        let k = 20;
        let fractions: Vec<f64> = (0..k).map(|i| if i < 10 { 0.8 } else { 0.4 }).collect();
        let labels =
            place_outliers(&PlacementPolicy::PerNodeFractions(fractions.clone()), 0.6, 10_000, k, 1).unwrap();
        assert_eq!(labels.iter().filter(|&&l| l).count(), 6000);
        let plan = partition(10_000, k).unwrap();
        for (got, want) in empirical_lambda(&labels, &plan).unwrap().iter().zip(&fractions) {
            assert!((got - want).abs() <= 1.0 / 500.0 + 1e-12);
        }
    }

    #[test]
    fn per_node_fractions_must_average_to_lambda() {
        let f = PlacementPolicy::PerNodeFractions(vec![0.5, 0.1]);
        assert!(matches!(place_outliers(&f, 0.5, 100, 2, 0), Err(DrlError::Infeasible(_))));
        assert!(place_outliers(&f, 0.3, 100, 3, 0).is_err());
        let bad = PlacementPolicy::PerNodeFractions(vec![1.0, 0.0]);
        assert!(place_outliers(&bad, 0.5, 100, 2, 0).is_err());
    }

    #[test]
    fn favorable_half_layout() {
        let k = 10;
        let lambda = PlacementPolicy::favorable_lambda(k, 1000).unwrap();
        assert_eq!(lambda, 0.4);
        let labels = place_outliers(&PlacementPolicy::FavorableHalf, lambda, 1000, k, 0).unwrap();
        let frac = empirical_lambda(&labels, &partition(1000, k).unwrap()).unwrap();
        assert_eq!(frac, [1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let more = place_outliers(&PlacementPolicy::FavorableHalf, 0.46, 1000, k, 0).unwrap();
        let frac = empirical_lambda(&more, &partition(1000, k).unwrap()).unwrap();
        assert!(frac[4..].iter().all(|&f| f == 0.1));
        assert!(place_outliers(&PlacementPolicy::FavorableHalf, 0.2, 1000, k, 0).is_err());
    }

    #[test]
    fn single_node_concentrated() {
        let labels = place_outliers(&PlacementPolicy::SingleNodeConcentrated, 0.02, 1000, 10, 0).unwrap();
        let frac = empirical_lambda(&labels, &partition(1000, 10).unwrap()).unwrap();
        assert_eq!(frac[0], 0.2);
        assert!(frac[1..].iter().all(|&f| f == 0.0));
        assert!(place_outliers(&PlacementPolicy::SingleNodeConcentrated, 0.2, 1000, 10, 0).is_err());
    }

    #[test]
    fn uniform_concentrates_per_node() {
        let labels = place_outliers(&PlacementPolicy::Uniform, 0.3, 100_000, 20, 3).unwrap();
        assert_eq!(labels.iter().filter(|&&l| l).count(), 30_000);
        let frac = empirical_lambda(&labels, &partition(100_000, 20).unwrap()).unwrap();
        assert!(frac.iter().all(|f| (f - 0.3).abs() < 0.05), "{frac:?}");
        let mean = frac.iter().sum::<f64>() / 20.0;
        assert!((mean - 0.3).abs() <= 1e-5);
    }

    #[test]
    fn empirical_lambda_of_clean_data_is_zero() {
        let plan = partition(50, 5).unwrap();
        assert_eq!(empirical_lambda(&[false; 50], &plan).unwrap(), vec![0.0; 5]);
        assert!(empirical_lambda(&[false; 49], &plan).is_err());
    }

    #[test]
    fn pca_truth_is_orthonormal_and_labels_match() {
        let ds = gen_pca(&pca(0.25, PlacementPolicy::Uniform), 4).unwrap();
        assert_eq!(ds.outlier_count(), 500);
        let Some(Truth::Pca { basis, projection }) = &ds.truth else { panic!("missing truth") };
        for a in 0..2 {
            for b in 0..2 {
                let dot: f64 = (0..8).map(|r| basis.get(r, a) * basis.get(r, b)).sum();
                assert!((dot - if a == b { 1.0 } else { 0.0 }).abs() < 1e-10);
            }
        }
        let trace: f64 = (0..8).map(|i| projection.get(i, i)).sum();
        assert!((trace - 2.0).abs() < 1e-12);
        for (i, &l) in ds.labels.iter().enumerate() {
            let max = ds.x.column(i).iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if l {
                assert!(max <= 10.0);
            }
        }
    }

    #[test]
    fn generation_is_reproducible() {
        let s = pca(0.3, PlacementPolicy::Uniform);
        assert_eq!(gen_pca(&s, 4).unwrap(), gen_pca(&s, 4).unwrap());
        let other = PcaScenario { seed: 6, ..s.clone() };
        assert_ne!(gen_pca(&s, 4).unwrap().x, gen_pca(&other, 4).unwrap().x);
        let lr = LrScenario {
            p: 5,
            n_total: 300,
            lambda: 0.1,
            sigma_e: 1.0,
            sigma_o: 10.0,
            placement: PlacementPolicy::Uniform,
            seed: 2,
        };
        let mut a = Vec::new();
        let mut b = Vec::new();
        gen_lr(&lr, 3).unwrap().write_csv(&mut a).unwrap();
        gen_lr(&lr, 3).unwrap().write_csv(&mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn lr_noise_channels_have_std_sigma_e() {
        let s = LrScenario {
            p: 10,
            n_total: 100_000,
            lambda: 0.3,
            sigma_e: 0.7,
            sigma_o: 10.0,
            placement: PlacementPolicy::Uniform,
            seed: 9,
        };
        let ds = gen_lr(&s, 1).unwrap();
        let theta = ds.truth.as_ref().unwrap().target().values().to_vec();
        let y = ds.y.as_ref().unwrap();
        let (mut inl, mut out) = (Vec::new(), Vec::new());
        for (i, (yi, &is_outlier)) in y.iter().zip(&ds.labels).enumerate() {
            let fit: f64 = theta.iter().enumerate().map(|(r, t)| t * ds.x.get(r, i)).sum();
            if is_outlier {
                out.push(yi + fit);
            } else {
                inl.push(yi - fit);
            }
        }
        let std = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            (v.iter().map(|e| (e - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
        };
        assert!((std(&inl) / 0.7 - 1.0).abs() < 0.05);
        assert!((std(&out) / 0.7 - 1.0).abs() < 0.05);
    }

    #[test]
    fn csv_round_trip() {
        let lr = LrScenario {
            p: 3,
            n_total: 40,
            lambda: 0.2,
            sigma_e: 1.0,
            sigma_o: 5.0,
            placement: PlacementPolicy::Uniform,
            seed: 1,
        };
        let ds = gen_lr(&lr, 2).unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let back = Dataset::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.x, ds.x);
        assert_eq!(back.y, ds.y);
        assert_eq!(back.labels, ds.labels);

        let pc = gen_pca(&pca(0.1, PlacementPolicy::Uniform), 2).unwrap();
        let mut buf = Vec::new();
        pc.write_csv(&mut buf).unwrap();
        let back = Dataset::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.x, pc.x);
        assert!(back.y.is_none());

        assert!(Dataset::read_csv("label,x1\n2,0.5\n".as_bytes()).is_err());
        assert!(Dataset::read_csv("label,x1\n1,abc\n".as_bytes()).is_err());
        assert!(Dataset::read_csv("".as_bytes()).is_err());
    }

    #[test]
    fn invalid_scenarios_rejected() {
        assert!(gen_pca(&PcaScenario { d: 8, ..pca(0.1, PlacementPolicy::Uniform) }, 2).is_err());
        assert!(gen_pca(&pca(1.0, PlacementPolicy::Uniform), 2).is_err());
        assert!(gen_pca(&PcaScenario { sigma_o: 0.0, ..pca(0.1, PlacementPolicy::Uniform) }, 2).is_err());
        assert!(gen_pca(&pca(0.1, PlacementPolicy::Uniform), 0).is_err());
    }

    #[test]
    fn placement_labels() {
        let p = PlacementPolicy::PerNodeFractions(vec![0.8, 0.8, 0.4]);
        assert_eq!(p.to_string(), "per_node:2x0.8/1x0.4");
        assert_eq!(PlacementPolicy::FavorableHalf.to_string(), "favorable_half");
    }
}
