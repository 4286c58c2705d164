//! Spherical k-means and diametrical k-means.
//!
//! Both alternate an assignment step (argmax of `x^T mu_j`, respectively
//! `(x^T mu_j)^2`, lowest index on ties) with a centroid update, starting from
//! k-means++-style seeding. They are the hard-assignment limits of vMF and
//! Watson mixtures with a shared concentration tending to infinity.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{dot, Dataset, UnitVector};
use crate::error::{Error, Result};
use crate::linalg::{power_iteration, CHUNK_ROWS};
use crate::rng;

/// Seeding attempts (streams `SEEDING + t`) that may fail before giving up.
pub const SEEDING_ATTEMPTS: u64 = 8;

/// Power-iteration tolerance and cap for diametrical centroids.
pub const POWER_TOL: f64 = 1e-10;
pub const POWER_MAX_ITERS: usize = 1000;

/// Which similarity drives the clustering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Similarity {
    /// `x^T mu`, spherical k-means.
    Cosine,
    /// `(x^T mu)^2`, diametrical k-means.
    SquaredCosine,
}

impl Similarity {
    #[inline]
    pub fn eval(self, x: &[f64], mu: &[f64]) -> f64 {
        let t = dot(x, mu);
        match self {
            Self::Cosine => t,
            Self::SquaredCosine => t * t,
        }
    }
}

/// Iteration limits for the partitional algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionConfig {
    pub max_iters: usize,
    /// Stop once the relative objective gain `(f_t - f_{t-1}) / (|f_t| + 1)`
    /// falls below `tol`; `0` leaves only the label fixpoint.
    pub tol: f64,
    /// Independent seedings; the run with the largest final objective wins
    /// (earliest on ties).
    pub restarts: usize,
    /// Keep the labels of every assignment step.
    pub record_labels: bool,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        Self {
            max_iters: 100,
            tol: 0.0,
            restarts: 10,
            record_labels: false,
        }
    }
}

/// A hard clustering with unit-norm centroids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub labels: Vec<usize>,
    pub centroids: Vec<UnitVector>,
    /// `sum_i sim(x_i, mu_{label(i)})` after every centroid update.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Labels after every assignment step, starting with the initial ones,
    /// when requested.
    pub label_history: Vec<Vec<usize>>,
}

impl Partition {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(f64::NAN)
    }
}

fn check_k(data: &Dataset, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidInput(
            "number of clusters must be at least 1".into(),
        ));
    }
    if data.len() < k {
        return Err(Error::InvalidInput(format!(
            "{} points cannot form {k} clusters",
            data.len()
        )));
    }
    Ok(())
}

/// Spherical k-means from k-means++ seeding on stream `SEEDING + t`.
pub fn spkmeans(
    data: &Dataset,
    k: usize,
    seed: u64,
    config: &PartitionConfig,
) -> Result<Partition> {
    cluster(data, k, seed, Similarity::Cosine, config)
}

/// Diametrical k-means from k-means++ seeding on stream `SEEDING + t`.
pub fn diametrical_kmeans(
    data: &Dataset,
    k: usize,
    seed: u64,
    config: &PartitionConfig,
) -> Result<Partition> {
    cluster(data, k, seed, Similarity::SquaredCosine, config)
}

/// Runs from `restarts` k-means++ seedings, read from streams `SEEDING + t`
/// (a seeding that finds fewer than `k` distinct centroids is skipped), and
/// keeps the best.
pub fn cluster(
    data: &Dataset,
    k: usize,
    seed: u64,
    sim: Similarity,
    config: &PartitionConfig,
) -> Result<Partition> {
    check_k(data, k)?;
    let mut best: Option<Partition> = None;
    let (mut runs, mut failures, mut t) = (0, 0, 0);
    while runs < config.restarts.max(1) {
        let mut rng = rng::stream(seed, rng::SEEDING + t);
        t += 1;
        let Some(centroids) = seed_centroids(data, k, sim, &mut rng) else {
            failures += 1;
            if failures >= SEEDING_ATTEMPTS {
                break;
            }
            continue;
        };
        runs += 1;
        let run = run_from_centroids(data, centroids, sim, config)?;
        if best
            .as_ref()
            .map_or(true, |b| run.objective() > b.objective())
        {
            best = Some(run);
        }
    }
    best.ok_or_else(|| {
        Error::InvalidInput(format!(
            "could not seed {k} distinct centroids in {SEEDING_ATTEMPTS} attempts"
        ))
    })
}

/// k-means++ seeding with dissimilarity `1 - sim`. `None` when the data
/// contain fewer than `k` distinct directions (axes).
pub fn seed_centroids<R: Rng + ?Sized>(
    data: &Dataset,
    k: usize,
    sim: Similarity,
    rng: &mut R,
) -> Option<Vec<UnitVector>> {
    let n = data.len();
    let first = rng.random_range(0..n);
    let mut centroids = vec![data.row(first).to_vec()];
    let mut dist: Vec<f64> = data
        .rows()
        .map(|x| (1.0 - sim.eval(x, &centroids[0])).max(0.0))
        .collect();
    while centroids.len() < k {
        let total: f64 = dist.iter().sum();
        if !(total > 0.0) {
            return None;
        }
        let mut u = rng.random::<f64>() * total;
        let mut pick = None;
        for (i, &d) in dist.iter().enumerate() {
            if d > 0.0 {
                pick = Some(i);
                if u < d {
                    break;
                }
                u -= d;
            }
        }
        let c = data.row(pick?).to_vec();
        for (d, x) in dist.iter_mut().zip(data.rows()) {
            *d = d.min((1.0 - sim.eval(x, &c)).max(0.0));
        }
        centroids.push(c);
    }
    centroids
        .into_iter()
        .map(|c| UnitVector::normalize(c).ok())
        .collect()
}

/// Index of the most similar centroid, lowest index on ties.
#[inline]
pub fn best_centroid(x: &[f64], centroids: &[UnitVector], sim: Similarity) -> (usize, f64) {
    let mut best = (0, sim.eval(x, &centroids[0]));
    for (j, c) in centroids.iter().enumerate().skip(1) {
        let s = sim.eval(x, c);
        if s > best.1 {
            best = (j, s);
        }
    }
    best
}

/// Assignment step, data-parallel over rows.
pub fn assign(data: &Dataset, centroids: &[UnitVector], sim: Similarity) -> Vec<usize> {
    let p = data.dim();
    data.as_flat()
        .par_chunks(p)
        .map(|x| best_centroid(x, centroids, sim).0)
        .collect()
}

/// Gives every empty cluster the point least similar to its own centroid,
/// taken from a cluster with at least two members (lowest index on ties).
/// Returns `false` if no such point exists.
fn rescue_empty(
    data: &Dataset,
    labels: &mut [usize],
    centroids: &mut [UnitVector],
    sim: Similarity,
) -> bool {
    let k = centroids.len();
    let mut counts = vec![0usize; k];
    labels.iter().for_each(|&l| counts[l] += 1);
    for j in 0..k {
        if counts[j] > 0 {
            continue;
        }
        let mut worst: Option<(usize, f64)> = None;
        for (i, x) in data.rows().enumerate() {
            if counts[labels[i]] < 2 {
                continue;
            }
            let s = sim.eval(x, &centroids[labels[i]]);
            if worst.map_or(true, |(_, w)| s < w) {
                worst = Some((i, s));
            }
        }
        let Some((i, _)) = worst else { return false };
        counts[labels[i]] -= 1;
        counts[j] = 1;
        labels[i] = j;
        centroids[j] = UnitVector::normalize(data.row(i).to_vec()).expect("data rows are unit");
    }
    true
}

/// Per-cluster resultants `sum_{label(i) = j} x_i`, accumulated in chunks of
/// [`CHUNK_ROWS`] rows that are reduced in order.
pub(crate) fn cluster_resultants(data: &Dataset, labels: &[usize], k: usize) -> Vec<Vec<f64>> {
    let p = data.dim();
    let chunks: Vec<Vec<f64>> = (0..data.len().div_ceil(CHUNK_ROWS))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; k * p];
            for i in c * CHUNK_ROWS..((c + 1) * CHUNK_ROWS).min(data.len()) {
                let dst = &mut acc[labels[i] * p..(labels[i] + 1) * p];
                dst.iter_mut().zip(data.row(i)).for_each(|(a, x)| *a += x);
            }
            acc
        })
        .collect();
    let mut out = vec![vec![0.0; p]; k];
    for acc in &chunks {
        for (j, r) in out.iter_mut().enumerate() {
            r.iter_mut()
                .zip(&acc[j * p..(j + 1) * p])
                .for_each(|(a, b)| *a += b);
        }
    }
    out
}

/// Centroid update. A cluster whose resultant (spherical) vanishes keeps its
/// previous centroid; diametrical centroids come from power iteration on the
/// cluster scatter warm-started at the previous centroid.
fn update_centroids(
    data: &Dataset,
    labels: &[usize],
    centroids: &mut [UnitVector],
    sim: Similarity,
) {
    let k = centroids.len();
    match sim {
        Similarity::Cosine => {
            for (c, r) in centroids
                .iter_mut()
                .zip(cluster_resultants(data, labels, k))
            {
                let norm = dot(&r, &r).sqrt();
                if norm > 0.0 {
                    if let Ok(u) = UnitVector::normalize(r) {
                        *c = u;
                    }
                }
            }
        }
        Similarity::SquaredCosine => {
            let mut members = vec![Vec::new(); k];
            labels
                .iter()
                .enumerate()
                .for_each(|(i, &l)| members[l].push(i));
            let updated: Vec<Option<UnitVector>> = centroids
                .par_iter()
                .zip(&members)
                .map(|(c, idx)| {
                    if idx.is_empty() {
                        return None;
                    }
                    let (v, _) = power_iteration(c, POWER_TOL, POWER_MAX_ITERS, |v, out| {
                        out.iter_mut().for_each(|o| *o = 0.0);
                        for &i in idx {
                            let x = data.row(i);
                            let t = dot(x, v);
                            out.iter_mut().zip(x).for_each(|(o, xi)| *o += t * xi);
                        }
                    });
                    UnitVector::normalize(v).ok()
                })
                .collect();
            for (c, u) in centroids.iter_mut().zip(updated) {
                if let Some(u) = u {
                    *c = u;
                }
            }
        }
    }
}

fn objective(data: &Dataset, labels: &[usize], centroids: &[UnitVector], sim: Similarity) -> f64 {
    let p = data.dim();
    let parts: Vec<f64> = data
        .as_flat()
        .par_chunks(CHUNK_ROWS * p)
        .enumerate()
        .map(|(c, rows)| {
            rows.chunks_exact(p)
                .enumerate()
                .map(|(o, x)| sim.eval(x, &centroids[labels[c * CHUNK_ROWS + o]]))
                .sum()
        })
        .collect();
    parts.iter().sum()
}

/// Runs the iteration from given initial centroids.
pub fn run_from_centroids(
    data: &Dataset,
    centroids: Vec<UnitVector>,
    sim: Similarity,
    config: &PartitionConfig,
) -> Result<Partition> {
    check_k(data, centroids.len())?;
    let labels = assign(data, &centroids, sim);
    iterate(data, labels, centroids, sim, config)
}

/// Runs the iteration from an initial partition: centroids are computed from
/// `labels` first, then assignment and update alternate.
pub fn run_from_labels(
    data: &Dataset,
    labels: Vec<usize>,
    k: usize,
    sim: Similarity,
    config: &PartitionConfig,
) -> Result<Partition> {
    check_k(data, k)?;
    if labels.len() != data.len() || labels.iter().any(|&l| l >= k) {
        return Err(Error::InvalidInput(
            "initial labels do not match the data".into(),
        ));
    }
    // placeholders, replaced by the first update (or by rescue)
    let centroids = (0..k)
        .map(|_| UnitVector::normalize(data.row(0).to_vec()))
        .collect::<Result<_>>()?;
    iterate(data, labels, centroids, sim, config)
}

fn iterate(
    data: &Dataset,
    mut labels: Vec<usize>,
    mut centroids: Vec<UnitVector>,
    sim: Similarity,
    config: &PartitionConfig,
) -> Result<Partition> {
    let mut history = Vec::new();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    if config.record_labels {
        history.push(labels.clone());
    }
    while iterations < config.max_iters {
        if !rescue_empty(data, &mut labels, &mut centroids, sim) {
            return Err(Error::InvalidInput(
                "cannot refill an empty cluster: too few distinct points".into(),
            ));
        }
        update_centroids(data, &labels, &mut centroids, sim);
        let f = objective(data, &labels, &centroids, sim);
        iterations += 1;
        let gain_small = trace
            .last()
            .is_some_and(|&prev: &f64| (f - prev) / (f.abs() + 1.0) < config.tol);
        trace.push(f);
        let next = assign(data, &centroids, sim);
        if config.record_labels {
            history.push(next.clone());
        }
        let fixpoint = next == labels;
        labels = next;
        if fixpoint || gain_small {
            converged = true;
            break;
        }
    }
    Ok(Partition {
        labels,
        centroids,
        objective_trace: trace,
        iterations,
        converged,
        label_history: history,
    })
}
