//! Diagonal-covariance Gaussian mixture models.
//!
//! All likelihood arithmetic stays in the natural-log domain; component
//! densities are combined with log-sum-exp and never exponentiated on their
//! own.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_VARIANCE_FLOOR: f64 = 1e-4;

/// Responsibility mass below which a component counts as starved.
pub const STARVED_MASS: f64 = 1e-10;

const WEIGHT_SUM_TOL: f64 = 1e-9;
const KMEANS_MAX_ITER: usize = 100;
const FORMAT_VERSION: u64 = 1;

/// `log(sum(exp(xs)))` without overflow or underflow.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Mixture parameters: weights, means and diagonal variances.
#[derive(Debug, Clone, PartialEq)]
pub struct GmmModel {
    weights: Vec<f64>,
    means: Vec<Vec<f64>>,
    variances: Vec<Vec<f64>>,
    // -0.5 * sum(ln(2 pi var)) per component
    log_norms: Vec<f64>,
}

impl GmmModel {
    /// Validates and builds a model. Weights must be non-negative and sum to
    /// one within 1e-9; variances must be finite and positive.
    pub fn new(weights: Vec<f64>, means: Vec<Vec<f64>>, variances: Vec<Vec<f64>>) -> Result<Self> {
        let m = weights.len();
        if m == 0 {
            return Err(Error::InvalidModel("model needs at least one component".into()));
        }
        if means.len() != m || variances.len() != m {
            return Err(Error::InvalidModel(format!(
                "{m} weights but {} means and {} variance vectors",
                means.len(),
                variances.len()
            )));
        }
        let dim = means[0].len();
        if dim == 0 {
            return Err(Error::InvalidModel("zero-dimensional model".into()));
        }
        for (mu, var) in means.iter().zip(&variances) {
            for v in [mu, var] {
                if v.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        actual: v.len(),
                    });
                }
            }
            if mu.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidModel("non-finite mean".into()));
            }
            if var.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
                return Err(Error::InvalidModel("variances must be finite and positive".into()));
            }
        }
        if weights.iter().any(|&w| !(w.is_finite() && w >= 0.0)) {
            return Err(Error::InvalidModel("weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidModel(format!("weights sum to {total}, not 1")));
        }
        let log_norms = variances
            .iter()
            .map(|var| -0.5 * var.iter().map(|s| (2.0 * PI * s).ln()).sum::<f64>())
            .collect();
        Ok(Self {
            weights,
            means,
            variances,
            log_norms,
        })
    }

    pub fn order(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.means[0].len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn variances(&self) -> &[Vec<f64>] {
        &self.variances
    }

    fn check_dim(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: y.len(),
            });
        }
        Ok(())
    }

    /// `ln b_i(y)` for component `i`, unweighted.
    pub fn component_log_density(&self, i: usize, y: &[f64]) -> f64 {
        let maha: f64 = y
            .iter()
            .zip(&self.means[i])
            .zip(&self.variances[i])
            .map(|((y, mu), var)| (y - mu) * (y - mu) / var)
            .sum();
        self.log_norms[i] - 0.5 * maha
    }

    /// Fills `out[i]` with `ln w_i + ln b_i(y)`.
    fn weighted_log_terms(&self, y: &[f64], out: &mut [f64]) {
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = self.weights[i].ln() + self.component_log_density(i, y);
        }
    }

    /// `ln p(y | model)`.
    pub fn log_density(&self, y: &[f64]) -> Result<f64> {
        self.check_dim(y)?;
        let mut terms = vec![0.0; self.order()];
        self.weighted_log_terms(y, &mut terms);
        Ok(log_sum_exp(&terms))
    }

    /// Mean of `ln p(y_t | model)` over the frames.
    pub fn avg_log_likelihood(&self, frames: &[Vec<f64>]) -> Result<f64> {
        if frames.is_empty() {
            return Err(Error::EmptyFrames);
        }
        let mut total = 0.0;
        for y in frames {
            total += self.log_density(y)?;
        }
        Ok(total / frames.len() as f64)
    }

    pub fn to_document(&self) -> GmmDocument {
        GmmDocument {
            format_version: FORMAT_VERSION,
            dim: self.dim(),
            order: self.order(),
            weights: self.weights.clone(),
            means: self.means.clone(),
            variances: self.variances.clone(),
        }
    }

    pub fn from_document(doc: GmmDocument) -> Result<Self> {
        if doc.format_version != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion(doc.format_version));
        }
        let model = Self::new(doc.weights, doc.means, doc.variances)?;
        if model.order() != doc.order || model.dim() != doc.dim {
            return Err(Error::InvalidModel(format!(
                "header says order {} dim {}, body has order {} dim {}",
                doc.order,
                doc.dim,
                model.order(),
                model.dim()
            )));
        }
        Ok(model)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Json {
            path: "<memory>".into(),
            source: e,
        })?;
        let version = value
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::InvalidModel("missing format_version".into()))?;
        if version != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let doc = serde_json::from_value(value).map_err(|e| Error::Json {
            path: "<memory>".into(),
            source: e,
        })?;
        Self::from_document(doc)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Versioned on-disk form of a [`GmmModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmDocument {
    pub format_version: u64,
    pub dim: usize,
    pub order: usize,
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmConfig {
    pub max_iter: usize,
    /// Stop once the relative gain in total log-likelihood drops below this.
    pub rel_tol: f64,
    pub variance_floor: f64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            max_iter: 200,
            rel_tol: 1e-6,
            variance_floor: DEFAULT_VARIANCE_FLOOR,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    /// Number of M-steps taken.
    pub iterations: usize,
    /// Total log-likelihood before each M-step and after the last one.
    pub log_likelihood_trace: Vec<f64>,
    pub converged: bool,
    /// Number of accepted starved-component rescues.
    pub rescues: usize,
}

fn check_data(data: &[Vec<f64>]) -> Result<usize> {
    let dim = data.first().ok_or(Error::EmptyData)?.len();
    for y in data {
        if y.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: y.len(),
            });
        }
    }
    Ok(dim)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(centers: &[Vec<f64>], y: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centers.iter().enumerate() {
        let d = sq_dist(c, y);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Per-dimension population variance of the whole data set, floored.
fn global_variance(data: &[Vec<f64>], floor: f64) -> Vec<f64> {
    let dim = data[0].len();
    let t = data.len() as f64;
    (0..dim)
        .map(|d| {
            let mean = data.iter().map(|y| y[d]).sum::<f64>() / t;
            let var = data.iter().map(|y| (y[d] - mean).powi(2)).sum::<f64>() / t;
            var.max(floor)
        })
        .collect()
}

/// k-means++ seeding followed by Lloyd iterations, turned into a mixture.
///
/// Means are the centroids, weights the cluster fractions and variances the
/// per-cluster per-dimension variances, floored. A cluster left empty gets
/// weight zero and the global variance. Deterministic for a given seed.
pub fn kmeans_init(data: &[Vec<f64>], m: usize, seed: u64, variance_floor: f64) -> Result<GmmModel> {
    check_data(data)?;
    if m == 0 || data.len() < m {
        return Err(Error::TooFewPoints {
            needed: m.max(1),
            got: data.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut centers = vec![data[rng.gen_range(0..data.len())].clone()];
    let mut d2: Vec<f64> = data.iter().map(|y| sq_dist(y, &centers[0])).collect();
    while centers.len() < m {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (t, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc >= target {
                    chosen = Some(t);
                    break;
                }
            }
            // rounding can leave target just above the final sum
            chosen.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).unwrap())
        } else {
            rng.gen_range(0..data.len())
        };
        let c = data[pick].clone();
        for (slot, y) in d2.iter_mut().zip(data) {
            *slot = slot.min(sq_dist(y, &c));
        }
        centers.push(c);
    }

    let dim = data[0].len();
    let mut assign = vec![usize::MAX; data.len()];
    for _ in 0..KMEANS_MAX_ITER {
        let next: Vec<usize> = data.par_iter().map(|y| nearest(&centers, y).0).collect();
        if next == assign {
            break;
        }
        assign = next;
        let mut sums = vec![vec![0.0; dim]; m];
        let mut counts = vec![0usize; m];
        for (y, &j) in data.iter().zip(&assign) {
            counts[j] += 1;
            for (s, v) in sums[j].iter_mut().zip(y) {
                *s += v;
            }
        }
        for j in 0..m {
            if counts[j] > 0 {
                centers[j] = sums[j].iter().map(|s| s / counts[j] as f64).collect();
            }
        }
    }

    let global = global_variance(data, variance_floor);
    let mut counts = vec![0usize; m];
    let mut var_sums = vec![vec![0.0; dim]; m];
    for (y, &j) in data.iter().zip(&assign) {
        counts[j] += 1;
        for ((s, v), c) in var_sums[j].iter_mut().zip(y).zip(&centers[j]) {
            *s += (v - c) * (v - c);
        }
    }
    let t = data.len() as f64;
    let weights = counts.iter().map(|&c| c as f64 / t).collect();
    let variances = (0..m)
        .map(|j| {
            if counts[j] == 0 {
                global.clone()
            } else {
                var_sums[j]
                    .iter()
                    .map(|s| (s / counts[j] as f64).max(variance_floor))
                    .collect()
            }
        })
        .collect();
    GmmModel::new(weights, centers, variances)
}

struct EStep {
    /// Row-major `T x M` responsibilities.
    resp: Vec<f64>,
    total: f64,
}

fn e_step(model: &GmmModel, data: &[Vec<f64>]) -> EStep {
    let m = model.order();
    let mut resp = vec![0.0; data.len() * m];
    let point_ll: Vec<f64> = resp
        .par_chunks_mut(m)
        .zip(data.par_iter())
        .map(|(row, y)| {
            model.weighted_log_terms(y, row);
            let ll = log_sum_exp(row);
            for r in row.iter_mut() {
                *r = (*r - ll).exp();
            }
            ll
        })
        .collect();
    // sequential sum keeps the reduction order fixed
    let total = point_ll.iter().sum();
    EStep { resp, total }
}

fn total_log_likelihood(model: &GmmModel, data: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let point_ll: Vec<f64> = data
        .par_iter()
        .map(|y| {
            let mut terms = vec![0.0; model.order()];
            model.weighted_log_terms(y, &mut terms);
            log_sum_exp(&terms)
        })
        .collect();
    let total = point_ll.iter().sum();
    (point_ll, total)
}

/// Re-estimates parameters; returns the model and per-component masses.
fn m_step(prev: &GmmModel, data: &[Vec<f64>], resp: &[f64], floor: f64) -> Result<(GmmModel, Vec<f64>)> {
    let m = prev.order();
    let dim = prev.dim();
    let t = data.len() as f64;
    let mut mass = vec![0.0; m];
    let mut sums = vec![vec![0.0; dim]; m];
    for (y, row) in data.iter().zip(resp.chunks(m)) {
        for i in 0..m {
            let r = row[i];
            mass[i] += r;
            for (s, v) in sums[i].iter_mut().zip(y) {
                *s += r * v;
            }
        }
    }
    let mut means = prev.means.clone();
    for i in 0..m {
        if mass[i] > 0.0 {
            means[i] = sums[i].iter().map(|s| s / mass[i]).collect();
        }
    }
    let mut var_sums = vec![vec![0.0; dim]; m];
    for (y, row) in data.iter().zip(resp.chunks(m)) {
        for i in 0..m {
            let r = row[i];
            if r == 0.0 {
                continue;
            }
            for ((s, v), mu) in var_sums[i].iter_mut().zip(y).zip(&means[i]) {
                *s += r * (v - mu) * (v - mu);
            }
        }
    }
    let variances = (0..m)
        .map(|i| {
            if mass[i] > 0.0 {
                var_sums[i].iter().map(|s| (s / mass[i]).max(floor)).collect()
            } else {
                prev.variances[i].clone()
            }
        })
        .collect();
    let mut weights: Vec<f64> = mass.iter().map(|&r| r / t).collect();
    let wsum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= wsum;
    }
    Ok((GmmModel::new(weights, means, variances)?, mass))
}

/// Moves starved components onto the worst-explained points.
fn rescue(model: &GmmModel, data: &[Vec<f64>], mass: &[f64], point_ll: &[f64], floor: f64) -> Result<GmmModel> {
    let mut worst: Vec<usize> = (0..data.len()).collect();
    worst.sort_by(|&a, &b| point_ll[a].total_cmp(&point_ll[b]).then(a.cmp(&b)));
    let global = global_variance(data, floor);
    let t = data.len() as f64;

    let mut weights = model.weights.clone();
    let mut means = model.means.clone();
    let mut variances = model.variances.clone();
    let starved = (0..model.order()).filter(|&i| mass[i] < STARVED_MASS);
    for (i, &point) in starved.zip(worst.iter().cycle()) {
        means[i] = data[point].clone();
        variances[i] = global.clone();
        weights[i] = 1.0 / t;
    }
    let wsum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= wsum;
    }
    GmmModel::new(weights, means, variances)
}

fn relative_gain(prev: f64, next: f64) -> f64 {
    let scale = if prev == 0.0 { 1.0 } else { prev.abs() };
    (next - prev) / scale
}

/// Expectation-maximization from `init`.
///
/// Variances are floored at `config.variance_floor`. A component whose
/// responsibility mass falls below [`STARVED_MASS`] is moved onto the data
/// point with the lowest likelihood (global variance, weight `1/T`, weights
/// renormalized); the move is kept only if it does not lower the total
/// log-likelihood, so the trace stays non-decreasing.
pub fn em_fit(data: &[Vec<f64>], init: &GmmModel, config: &EmConfig) -> Result<(GmmModel, FitReport)> {
    let dim = check_data(data)?;
    if dim != init.dim() {
        return Err(Error::DimensionMismatch {
            expected: init.dim(),
            actual: dim,
        });
    }
    let mut model = init.clone();
    let mut report = FitReport {
        iterations: 0,
        log_likelihood_trace: Vec::new(),
        converged: false,
        rescues: 0,
    };
    loop {
        let e = e_step(&model, data);
        if let Some(&prev) = report.log_likelihood_trace.last() {
            report.log_likelihood_trace.push(e.total);
            if relative_gain(prev, e.total) < config.rel_tol {
                report.converged = true;
                break;
            }
        } else {
            report.log_likelihood_trace.push(e.total);
        }
        if report.iterations >= config.max_iter {
            break;
        }
        let (next, mass) = m_step(&model, data, &e.resp, config.variance_floor)?;
        report.iterations += 1;
        model = next;

        if mass.iter().any(|&r| r < STARVED_MASS) {
            let (point_ll, before) = total_log_likelihood(&model, data);
            let candidate = rescue(&model, data, &mass, &point_ll, config.variance_floor)?;
            let (_, after) = total_log_likelihood(&candidate, data);
            if after >= before {
                model = candidate;
                report.rescues += 1;
            }
        }
    }
    Ok((model, report))
}

/// [`kmeans_init`] followed by [`em_fit`].
pub fn fit(data: &[Vec<f64>], m: usize, seed: u64, config: &EmConfig) -> Result<(GmmModel, FitReport)> {
    let init = kmeans_init(data, m, seed, config.variance_floor)?;
    em_fit(data, &init, config)
}
