//! EM for mixtures of vMF (movMF) and Watson (moW) distributions.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{check_same_dim, dot, Dataset, UnitVector};
use crate::distributions::{
    sample_vmf_with, sample_watson_with, vmf_log_normalizer, watson_log_normalizer, VmfParams,
    WatsonParams,
};
use crate::error::{Error, Result};
use crate::estimation::{
    estimate_kappa, vmf_mle, vmf_suff_stats, watson_from_scatter, watson_mle, KappaMethod, R_CLAMP,
};
use crate::linalg::{ScatterMatrix, CHUNK_ROWS};
use crate::partitional::{self, PartitionConfig, Similarity};
use crate::rng;

/// Accepted deviation of the mixing weights from summing to one; weights are
/// renormalized on construction.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

/// Column mass below which a component counts as empty.
pub const EMPTY_MASS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Vmf,
    Watson,
}

impl Family {
    /// Similarity of the limiting partitional algorithm.
    pub fn similarity(self) -> Similarity {
        match self {
            Self::Vmf => Similarity::Cosine,
            Self::Watson => Similarity::SquaredCosine,
        }
    }

    pub fn default_init(self) -> InitStrategy {
        match self {
            Self::Vmf => InitStrategy::Spkmeans,
            Self::Watson => InitStrategy::Diametrical,
        }
    }

    fn log_normalizer(self, p: usize, kappa: f64) -> Result<f64> {
        match self {
            Self::Vmf => vmf_log_normalizer(p, kappa),
            Self::Watson => watson_log_normalizer(p, kappa),
        }
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vmf" => Ok(Self::Vmf),
            "watson" => Ok(Self::Watson),
            _ => Err(Error::InvalidInput(format!("unknown family '{s}'"))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Vmf => "vmf",
            Self::Watson => "watson",
        })
    }
}

/// Mean direction (axis) and concentration of one component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub mu: UnitVector,
    pub kappa: f64,
}

/// `sum_j pi_j f(x; mu_j, kappa_j)` for a vMF or Watson family `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct MixtureModel {
    family: Family,
    weights: Vec<f64>,
    components: Vec<Component>,
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    family: Family,
    weights: Vec<f64>,
    components: Vec<Component>,
}

impl TryFrom<RawModel> for MixtureModel {
    type Error = Error;
    fn try_from(r: RawModel) -> Result<Self> {
        Self::new(r.family, r.weights, r.components)
    }
}

impl From<MixtureModel> for RawModel {
    fn from(m: MixtureModel) -> Self {
        Self {
            family: m.family,
            weights: m.weights,
            components: m.components,
        }
    }
}

impl MixtureModel {
    /// Validates and renormalizes the weights.
    pub fn new(family: Family, mut weights: Vec<f64>, components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidInput(
                "a mixture needs at least one component".into(),
            ));
        }
        check_same_dim(components.len(), weights.len())?;
        let p = components[0].mu.dim();
        for c in &components {
            check_same_dim(p, c.mu.dim())?;
            if !c.kappa.is_finite() {
                return Err(Error::NonFinite(format!("kappa = {}", c.kappa)));
            }
            if family == Family::Vmf && c.kappa < 0.0 {
                return Err(Error::Domain(format!(
                    "vMF concentration {} must be non-negative",
                    c.kappa
                )));
            }
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidInput(
                "mixing weights must be finite and non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidInput(format!(
                "mixing weights sum to {total}, not 1"
            )));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self {
            family,
            weights,
            components,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.components[0].mu.dim()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn means(&self) -> Vec<&UnitVector> {
        self.components.iter().map(|c| &c.mu).collect()
    }

    pub fn kappas(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.kappa).collect()
    }

    /// Per-component `ln pi_j + ln c_p(kappa_j)`.
    fn log_offsets(&self) -> Result<Vec<f64>> {
        let p = self.dim();
        self.weights
            .iter()
            .zip(&self.components)
            .map(|(w, c)| Ok(w.ln() + self.family.log_normalizer(p, c.kappa)?))
            .collect()
    }

    /// `ln pi_j + ln f(x; mu_j, kappa_j)` for every `j`.
    fn scores(&self, offsets: &[f64], x: &[f64], out: &mut [f64]) {
        for ((o, c), off) in out.iter_mut().zip(&self.components).zip(offsets) {
            let t = dot(&c.mu, x);
            *o = off
                + match self.family {
                    Family::Vmf => c.kappa * t,
                    Family::Watson => c.kappa * t * t,
                };
        }
    }
}

/// Posterior membership probabilities, row-major `n x K`.
#[derive(Debug, Clone, PartialEq)]
pub struct Responsibilities {
    k: usize,
    values: Vec<f64>,
}

impl Responsibilities {
    /// Standard basis rows from hard labels.
    pub fn from_labels(labels: &[usize], k: usize) -> Result<Self> {
        if k == 0 || labels.iter().any(|&l| l >= k) {
            return Err(Error::InvalidInput(format!("labels must lie in [0, {k})")));
        }
        let mut values = vec![0.0; labels.len() * k];
        labels
            .iter()
            .enumerate()
            .for_each(|(i, &l)| values[i * k + l] = 1.0);
        Ok(Self { k, values })
    }

    /// Wraps a row-major matrix whose rows are probability vectors.
    pub fn from_matrix(k: usize, values: Vec<f64>) -> Result<Self> {
        if k == 0 || values.is_empty() || values.len() % k != 0 {
            return Err(Error::InvalidInput(
                "responsibility matrix has the wrong shape".into(),
            ));
        }
        for (i, row) in values.chunks_exact(k).enumerate() {
            let s: f64 = row.iter().sum();
            if row.iter().any(|v| !(0.0..=1.0).contains(v)) || (s - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidInput(format!(
                    "row {i} is not a probability vector"
                )));
            }
        }
        Ok(Self { k, values })
    }

    pub fn n(&self) -> usize {
        self.values.len() / self.k
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.k..(i + 1) * self.k]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    /// Column `j` as a weight vector over points.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.chunks_exact(self.k).map(|r| r[j]).collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.k];
        for r in self.values.chunks_exact(self.k) {
            s.iter_mut().zip(r).for_each(|(a, b)| *a += b);
        }
        s
    }

    /// Row argmax, lowest index on ties.
    pub fn labels(&self) -> Vec<usize> {
        self.values.chunks_exact(self.k).map(argmax).collect()
    }
}

#[inline]
fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for j in 1..v.len() {
        if v[j] > v[best] {
            best = j;
        }
    }
    best
}

/// Soft or hard E-step, returning responsibilities and the mixture
/// log-likelihood of `model`. Rows are processed in parallel; the
/// log-likelihood is reduced in chunks of [`CHUNK_ROWS`] in order.
fn e_step(model: &MixtureModel, data: &Dataset, hard: bool) -> Result<(Responsibilities, f64)> {
    check_same_dim(model.dim(), data.dim())?;
    let k = model.k();
    let p = data.dim();
    let offsets = model.log_offsets()?;
    let mut values = vec![0.0; data.len() * k];
    let parts: Vec<Result<f64>> = values
        .par_chunks_mut(CHUNK_ROWS * k)
        .zip(data.as_flat().par_chunks(CHUNK_ROWS * p))
        .enumerate()
        .map(|(c, (beta, rows))| {
            let mut ll = 0.0;
            for (o, (b, x)) in beta
                .chunks_exact_mut(k)
                .zip(rows.chunks_exact(p))
                .enumerate()
            {
                model.scores(&offsets, x, b);
                let j = argmax(b);
                let m = b[j];
                if m == f64::NEG_INFINITY {
                    return Err(Error::ZeroDensity {
                        index: c * CHUNK_ROWS + o,
                    });
                }
                let mut s = 0.0;
                b.iter_mut().for_each(|v| {
                    *v = (*v - m).exp();
                    s += *v;
                });
                ll += m + s.ln();
                if hard {
                    b.iter_mut().for_each(|v| *v = 0.0);
                    b[j] = 1.0;
                } else {
                    b.iter_mut().for_each(|v| *v /= s);
                }
            }
            Ok(ll)
        })
        .collect();
    let mut ll = 0.0;
    for part in parts {
        ll += part?;
    }
    if !ll.is_finite() {
        return Err(Error::NonFinite("mixture log-likelihood".into()));
    }
    Ok((Responsibilities { k, values }, ll))
}

/// `sum_i ln sum_j pi_j f(x_i; mu_j, kappa_j)` via log-sum-exp.
pub fn mixture_log_likelihood(model: &MixtureModel, data: &Dataset) -> Result<f64> {
    e_step(model, data, false).map(|(_, ll)| ll)
}

/// Posterior probabilities `beta_ij`.
pub fn e_step_soft(model: &MixtureModel, data: &Dataset) -> Result<Responsibilities> {
    e_step(model, data, false).map(|(r, _)| r)
}

/// Each point wholly assigned to `argmax_j ln pi_j + ln f(x_i; mu_j, kappa_j)`,
/// lowest index on ties.
pub fn e_step_hard(model: &MixtureModel, data: &Dataset) -> Result<Responsibilities> {
    e_step(model, data, true).map(|(r, _)| r)
}

/// Parameters of the M-step that are not data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MStepOptions {
    pub kappa_method: KappaMethod,
    /// Shared concentration held fixed instead of estimated.
    pub fixed_kappa: Option<f64>,
    /// Keep the weights uniform instead of estimating them.
    pub fixed_weights: bool,
}

impl Default for MStepOptions {
    fn default() -> Self {
        Self {
            kappa_method: KappaMethod::Newton2,
            fixed_kappa: None,
            fixed_weights: false,
        }
    }
}

/// M-step. vMF: `mu_j = r_j / ||r_j||`, `kappa_j = A_p^{-1}(r_bar_j)`; Watson:
/// axis and concentration from the weighted scatter; `pi_j = sum_i beta_ij / n`.
///
/// A component with (near) zero mass or a vanishing resultant is rescued:
/// its mean becomes the point with the lowest maximal responsibility (lowest
/// index on ties), its concentration the whole-data estimate and its weight
/// `1/n`, taken proportionally from the others.
pub fn m_step(
    family: Family,
    data: &Dataset,
    beta: &Responsibilities,
    options: &MStepOptions,
) -> Result<MixtureModel> {
    check_same_dim(data.len(), beta.n())?;
    let k = beta.k();
    let n = data.len() as f64;
    let mass = beta.column_sums();
    let mut components = Vec::with_capacity(k);
    let mut rescued = Vec::new();
    for j in 0..k {
        let fitted = if mass[j] <= EMPTY_MASS {
            None
        } else {
            fit_component(family, data, &beta.column(j), options)?
        };
        match fitted {
            Some(c) => components.push(c),
            None => {
                rescued.push(j);
                components.push(Component {
                    mu: data_direction(data, 0)?,
                    kappa: 0.0,
                });
            }
        }
    }
    let mut weights: Vec<f64> = if options.fixed_weights {
        vec![1.0 / k as f64; k]
    } else {
        mass.iter().map(|m| m / n).collect()
    };
    if !rescued.is_empty() {
        let kappa = match options.fixed_kappa {
            Some(kappa) => kappa,
            None => whole_data_kappa(family, data, options.kappa_method),
        };
        let mut used = vec![false; data.len()];
        for &j in &rescued {
            let i = lowest_max_responsibility(beta, &used);
            used[i] = true;
            components[j] = Component {
                mu: data_direction(data, i)?,
                kappa,
            };
            if !options.fixed_weights {
                let take = 1.0 / n;
                weights.iter_mut().for_each(|w| *w *= 1.0 - take);
                weights[j] = take;
            }
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    MixtureModel::new(family, weights, components)
}

fn data_direction(data: &Dataset, i: usize) -> Result<UnitVector> {
    UnitVector::normalize(data.row(i).to_vec())
}

fn lowest_max_responsibility(beta: &Responsibilities, used: &[bool]) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for i in 0..beta.n() {
        if used[i] {
            continue;
        }
        let m = beta
            .row(i)
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        if best.map_or(true, |(_, b)| m < b) {
            best = Some((i, m));
        }
    }
    best.map_or(0, |(i, _)| i)
}

fn whole_data_kappa(family: Family, data: &Dataset, method: KappaMethod) -> f64 {
    match family {
        Family::Vmf => vmf_mle(data, method).map_or(0.0, |v| v.kappa()),
        Family::Watson => watson_mle(data).map_or(0.0, |w| w.params.kappa()),
    }
}

/// Weighted single-component fit; `None` when the mean is undefined.
fn fit_component(
    family: Family,
    data: &Dataset,
    w: &[f64],
    options: &MStepOptions,
) -> Result<Option<Component>> {
    let p = data.dim();
    match family {
        Family::Vmf => {
            let stats = vmf_suff_stats(data, Some(w))?;
            let mu = match stats.mean_direction() {
                Ok(mu) => mu,
                Err(Error::UndefinedMean) => return Ok(None),
                Err(e) => return Err(e),
            };
            let kappa = match options.fixed_kappa {
                Some(kappa) => kappa,
                None => {
                    // r_bar = 1 would send kappa to infinity
                    let r = stats.r_bar().min(1.0 - R_CLAMP);
                    estimate_kappa(r, p, options.kappa_method)?.max(0.0)
                }
            };
            Ok(Some(Component { mu, kappa }))
        }
        Family::Watson => {
            let scatter = ScatterMatrix::from_data(data, Some(w))?;
            match options.fixed_kappa {
                None => {
                    let fit = watson_from_scatter(&scatter)?;
                    Ok(Some(Component {
                        mu: fit.params.mu().clone(),
                        kappa: fit.params.kappa(),
                    }))
                }
                Some(kappa) => {
                    let eig = scatter.eigen()?;
                    let k = if kappa >= 0.0 { 0 } else { p - 1 };
                    let mu = UnitVector::normalize(eig.vector(k).to_vec())?;
                    Ok(Some(Component { mu, kappa }))
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Assignment {
    Soft,
    Hard,
}

impl FromStr for Assignment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "soft" => Ok(Self::Soft),
            "hard" => Ok(Self::Hard),
            _ => Err(Error::InvalidInput(format!(
                "unknown assignment mode '{s}'"
            ))),
        }
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Soft => "soft",
            Self::Hard => "hard",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitStrategy {
    Spkmeans,
    Diametrical,
    Random,
}

impl FromStr for InitStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spkmeans" => Ok(Self::Spkmeans),
            "diametrical" => Ok(Self::Diametrical),
            "random" => Ok(Self::Random),
            _ => Err(Error::InvalidInput(format!("unknown init strategy '{s}'"))),
        }
    }
}

impl fmt::Display for InitStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Spkmeans => "spkmeans",
            Self::Diametrical => "diametrical",
            Self::Random => "random",
        })
    }
}

/// EM settings. `init = None` picks the family default (spkmeans for vMF,
/// diametrical for Watson).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmConfig {
    pub assignment: Assignment,
    pub kappa_method: KappaMethod,
    pub max_iters: usize,
    /// Stop once `|l_t - l_{t-1}| / (|l_t| + 1) < rel_tol`.
    pub rel_tol: f64,
    pub seed: u64,
    pub init: Option<InitStrategy>,
    /// Iteration cap of the partitional initializer.
    pub init_iters: usize,
    pub fixed_kappa: Option<f64>,
    pub fixed_weights: bool,
    /// Keep the hard labels of every E-step.
    pub record_labels: bool,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            assignment: Assignment::Soft,
            kappa_method: KappaMethod::Newton2,
            max_iters: 200,
            rel_tol: 1e-6,
            seed: 0,
            init: None,
            init_iters: 100,
            fixed_kappa: None,
            fixed_weights: false,
            record_labels: false,
        }
    }
}

/// Outcome of [`fit_em`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// Mixture log-likelihood of the model after each M-step.
    pub log_likelihood_trace: Vec<f64>,
    /// Number of M-steps performed.
    pub iterations: usize,
    pub converged: bool,
    pub final_model: MixtureModel,
    /// Hard labels of the final model (argmax posterior).
    pub labels: Vec<usize>,
    /// Labels of the initial partition and of every E-step, when requested.
    pub label_history: Vec<Vec<usize>>,
}

impl FitReport {
    pub fn log_likelihood(&self) -> f64 {
        self.log_likelihood_trace
            .last()
            .copied()
            .unwrap_or(f64::NAN)
    }
}

/// Initial hard partition. Partitional strategies use k-means++ seeding on
/// streams `SEEDING + t`; `random` deals a shuffled order round-robin from
/// stream `RANDOM_INIT`, so no cluster is empty.
pub fn init_assignments(
    data: &Dataset,
    k: usize,
    strategy: InitStrategy,
    seed: u64,
    max_iters: usize,
) -> Result<Vec<usize>> {
    if k == 0 || data.len() < k {
        return Err(Error::InvalidInput(format!(
            "{} points cannot form {k} clusters",
            data.len()
        )));
    }
    let config = PartitionConfig {
        max_iters,
        ..Default::default()
    };
    match strategy {
        InitStrategy::Spkmeans => Ok(partitional::spkmeans(data, k, seed, &config)?.labels),
        InitStrategy::Diametrical => {
            Ok(partitional::diametrical_kmeans(data, k, seed, &config)?.labels)
        }
        InitStrategy::Random => {
            let mut rng = rng::stream(seed, rng::RANDOM_INIT);
            let mut order: Vec<usize> = (0..data.len()).collect();
            for i in (1..order.len()).rev() {
                order.swap(i, rng.random_range(0..=i));
            }
            let mut labels = vec![0; data.len()];
            order
                .iter()
                .enumerate()
                .for_each(|(pos, &i)| labels[i] = pos % k);
            Ok(labels)
        }
    }
}

/// EM from the configured initialization.
pub fn fit_em(family: Family, data: &Dataset, k: usize, config: &EmConfig) -> Result<FitReport> {
    let init = config.init.unwrap_or(family.default_init());
    let labels = init_assignments(data, k, init, config.seed, config.init_iters)?;
    fit_em_from_labels(family, data, &labels, k, config)
}

/// EM from a given initial partition: M-step on the partition, then E- and
/// M-steps alternate until the relative log-likelihood change drops below
/// `rel_tol`, hard labels stop changing (hard EM), or `max_iters` M-steps.
pub fn fit_em_from_labels(
    family: Family,
    data: &Dataset,
    labels: &[usize],
    k: usize,
    config: &EmConfig,
) -> Result<FitReport> {
    check_same_dim(data.len(), labels.len())?;
    if let (Family::Vmf, Some(kappa)) = (family, config.fixed_kappa) {
        if kappa < 0.0 {
            return Err(Error::Domain(format!(
                "vMF concentration {kappa} must be non-negative"
            )));
        }
    }
    let options = MStepOptions {
        kappa_method: config.kappa_method,
        fixed_kappa: config.fixed_kappa,
        fixed_weights: config.fixed_weights,
    };
    let hard = config.assignment == Assignment::Hard;
    let mut beta = Responsibilities::from_labels(labels, k)?;
    let mut history = Vec::new();
    if config.record_labels {
        history.push(labels.to_vec());
    }
    let mut prev_labels = labels.to_vec();
    let mut trace: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut model = m_step(family, data, &beta, &options)?;
    iterations += 1;
    loop {
        let (next, ll) = e_step(&model, data, hard)?;
        let small_change = trace
            .last()
            .is_some_and(|&prev| (ll - prev).abs() / (ll.abs() + 1.0) < config.rel_tol);
        trace.push(ll);
        let next_labels = next.labels();
        if config.record_labels {
            history.push(next_labels.clone());
        }
        let fixpoint = hard && next_labels == prev_labels;
        beta = next;
        prev_labels = next_labels;
        if small_change || fixpoint {
            converged = true;
            break;
        }
        if iterations >= config.max_iters {
            break;
        }
        model = m_step(family, data, &beta, &options)?;
        iterations += 1;
    }
    let labels = if hard { prev_labels } else { beta.labels() };
    Ok(FitReport {
        log_likelihood_trace: trace,
        iterations,
        converged,
        final_model: model,
        labels,
        label_history: history,
    })
}

/// `n` draws: component labels from stream 0 of `seed`, the points of
/// component `j` from stream `1 + j`, so the draws of one component do not
/// depend on the parameters of the others.
pub fn sample_mixture(model: &MixtureModel, n: usize, seed: u64) -> Result<(Dataset, Vec<usize>)> {
    if n == 0 {
        return Err(Error::InvalidInput("sample size must be at least 1".into()));
    }
    let mut label_rng = rng::stream(seed, 0);
    let cumulative: Vec<f64> = model
        .weights
        .iter()
        .scan(0.0, |acc, w| {
            *acc += w;
            Some(*acc)
        })
        .collect();
    let labels: Vec<usize> = (0..n)
        .map(|_| {
            let u = label_rng.random::<f64>() * cumulative[cumulative.len() - 1];
            cumulative
                .iter()
                .position(|&c| u < c)
                .unwrap_or(model.k() - 1)
        })
        .collect();
    sample_with_labels(model, &labels, seed)
}

/// Exactly `counts[j]` draws from component `j`, in an order shuffled by
/// stream 0 of `seed`; component streams as in [`sample_mixture`].
pub fn sample_mixture_counts(
    model: &MixtureModel,
    counts: &[usize],
    seed: u64,
) -> Result<(Dataset, Vec<usize>)> {
    check_same_dim(model.k(), counts.len())?;
    let mut labels: Vec<usize> = counts
        .iter()
        .enumerate()
        .flat_map(|(j, &c)| std::iter::repeat(j).take(c))
        .collect();
    if labels.is_empty() {
        return Err(Error::InvalidInput("sample size must be at least 1".into()));
    }
    let mut r = rng::stream(seed, 0);
    for i in (1..labels.len()).rev() {
        labels.swap(i, r.random_range(0..=i));
    }
    sample_with_labels(model, &labels, seed)
}

fn sample_with_labels(
    model: &MixtureModel,
    labels: &[usize],
    seed: u64,
) -> Result<(Dataset, Vec<usize>)> {
    let mut counts = vec![0usize; model.k()];
    labels.iter().for_each(|&l| counts[l] += 1);
    let p = model.dim();
    let draws: Vec<Option<Dataset>> = model
        .components
        .par_iter()
        .enumerate()
        .map(|(j, c)| {
            if counts[j] == 0 {
                return Ok(None);
            }
            let mut r = rng::component_stream(seed, j);
            let ds = match model.family {
                Family::Vmf => {
                    sample_vmf_with(&VmfParams::new(c.mu.clone(), c.kappa)?, counts[j], &mut r)?
                }
                Family::Watson => sample_watson_with(
                    &WatsonParams::new(c.mu.clone(), c.kappa)?,
                    counts[j],
                    &mut r,
                )?,
            };
            Ok(Some(ds))
        })
        .collect::<Result<_>>()?;
    let mut next = vec![0usize; model.k()];
    let mut values = Vec::with_capacity(labels.len() * p);
    for &l in labels {
        let ds = draws[l]
            .as_ref()
            .expect("component with members was sampled");
        values.extend_from_slice(ds.row(next[l]));
        next[l] += 1;
    }
    Ok((Dataset::from_flat_unchecked(p, values), labels.to_vec()))
}

/// Greedy matching of true to estimated directions by decreasing `|mu^T mu'|`.
/// Entry `j` of the result is the estimated index matched to true index `j`.
pub fn match_components<A: AsRef<[f64]>, B: AsRef<[f64]>>(truth: &[A], est: &[B]) -> Vec<usize> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(truth.len() * est.len());
    for (i, a) in truth.iter().enumerate() {
        for (j, b) in est.iter().enumerate() {
            pairs.push((dot(a.as_ref(), b.as_ref()).abs(), i, j));
        }
    }
    // stable sort keeps lowest indices first among equal similarities
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut out = vec![usize::MAX; truth.len()];
    let mut taken = vec![false; est.len()];
    for (_, i, j) in pairs {
        if out[i] == usize::MAX && !taken[j] {
            out[i] = j;
            taken[j] = true;
        }
    }
    out
}
