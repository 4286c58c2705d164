//! Synthetic datasets: the four-component high-dimensional vMF mixture
//! ("bigsim"), two-axis antipodal Watson data and sparse text-like vectors.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::data::{Dataset, UnitVector};
use crate::distributions::uniform_direction;
use crate::error::{Error, Result};
use crate::mixture::{sample_mixture, sample_mixture_counts, Component, Family, MixtureModel};
use crate::rng;

pub const BIGSIM_DIM: usize = 1000;
pub const BIGSIM_N: usize = 5000;
pub const BIGSIM_WEIGHTS: [f64; 4] = [0.25, 0.24, 0.25, 0.26];
pub const BIGSIM_KAPPAS: [f64; 4] = [651.0, 267.8, 267.8, 612.9];

/// `k` uniformly random directions in `R^p` from the [`rng::MEANS`] stream.
pub fn random_means(p: usize, k: usize, seed: u64) -> Result<Vec<UnitVector>> {
    if p < 2 {
        return Err(Error::Domain(format!(
            "dimension p = {p} must be at least 2"
        )));
    }
    let mut r = rng::stream(seed, rng::MEANS);
    (0..k)
        .map(|_| {
            let mut v = vec![0.0; p];
            uniform_direction(&mut r, &mut v);
            UnitVector::normalize(v)
        })
        .collect()
}

/// The bigsim mixture: `p = 1000`, four vMF components with random means.
pub fn bigsim_model(seed: u64) -> Result<MixtureModel> {
    let comps = random_means(BIGSIM_DIM, 4, seed)?
        .into_iter()
        .zip(BIGSIM_KAPPAS)
        .map(|(mu, kappa)| Component { mu, kappa })
        .collect();
    MixtureModel::new(Family::Vmf, BIGSIM_WEIGHTS.to_vec(), comps)
}

/// Component sizes `pi_j n`: (1250, 1200, 1250, 1300).
pub fn bigsim_counts() -> Vec<usize> {
    BIGSIM_WEIGHTS
        .iter()
        .map(|w| (w * BIGSIM_N as f64).round() as usize)
        .collect()
}

/// Model, `n = 5000` points and their component labels. Component sizes are
/// exactly `pi_j n`, so the sample proportions equal the mixing weights.
pub fn sample_bigsim(seed: u64) -> Result<(MixtureModel, Dataset, Vec<usize>)> {
    let model = bigsim_model(seed)?;
    let (data, labels) = sample_mixture_counts(&model, &bigsim_counts(), seed)?;
    Ok((model, data, labels))
}

/// Equal-weight Watson mixture on the axes `e_1` and `e_2` of `R^p`; each
/// component puts its mass on both `+e_j` and `-e_j`.
pub fn two_axis_model(p: usize, kappa: f64) -> Result<MixtureModel> {
    let comps = (0..2)
        .map(|j| {
            Ok(Component {
                mu: UnitVector::basis(p, j)?,
                kappa,
            })
        })
        .collect::<Result<_>>()?;
    MixtureModel::new(Family::Watson, vec![0.5, 0.5], comps)
}

pub fn sample_two_axis(p: usize, kappa: f64, n: usize, seed: u64) -> Result<(Dataset, Vec<usize>)> {
    sample_mixture(&two_axis_model(p, kappa)?, n, seed)
}

/// Sparse non-negative term-frequency vectors, a stand-in for document data.
///
/// The vocabulary has Zipf-distributed background frequencies; topic `j`
/// mixes the background half-and-half with its own Zipf law over a random
/// permutation of the vocabulary (stream [`rng::MEANS`]). A document picks its
/// topic from stream 0 with equal weights and draws `doc_len.0..=doc_len.1`
/// words from stream `1 + topic`; rows are unit-normalized counts.
pub fn sample_text_like(
    vocab: usize,
    k: usize,
    n: usize,
    doc_len: (usize, usize),
    seed: u64,
) -> Result<(Dataset, Vec<usize>)> {
    if vocab < 2 || k == 0 || n == 0 || doc_len.0 == 0 || doc_len.0 > doc_len.1 {
        return Err(Error::InvalidInput(format!(
            "need vocab >= 2, k >= 1, n >= 1 and 1 <= min length <= max length, got \
             vocab = {vocab}, k = {k}, n = {n}, lengths {doc_len:?}"
        )));
    }
    let zipf: Vec<f64> = (1..=vocab).map(|r| 1.0 / r as f64).collect();
    let total: f64 = zipf.iter().sum();
    let mut topic_rng = rng::stream(seed, rng::MEANS);
    let topics: Vec<WeightedIndex<f64>> = (0..k)
        .map(|_| {
            let mut perm: Vec<usize> = (0..vocab).collect();
            for i in (1..vocab).rev() {
                perm.swap(i, topic_rng.random_range(0..=i));
            }
            let w: Vec<f64> = (0..vocab)
                .map(|v| 0.5 * zipf[v] / total + 0.5 * zipf[perm[v]] / total)
                .collect();
            WeightedIndex::new(w).map_err(|e| Error::InvalidInput(e.to_string()))
        })
        .collect::<Result<_>>()?;
    let mut label_rng = rng::stream(seed, 0);
    let labels: Vec<usize> = (0..n).map(|_| label_rng.random_range(0..k)).collect();
    let mut streams: Vec<_> = (0..k).map(|j| rng::component_stream(seed, j)).collect();
    let mut values = vec![0.0; n * vocab];
    for (row, &t) in values.chunks_exact_mut(vocab).zip(&labels) {
        let r = &mut streams[t];
        let len = r.random_range(doc_len.0..=doc_len.1);
        for _ in 0..len {
            row[topics[t].sample(r)] += 1.0;
        }
        let norm = row.iter().map(|c| c * c).sum::<f64>().sqrt();
        row.iter_mut().for_each(|c| *c /= norm);
    }
    Ok((Dataset::from_flat(vocab, values)?, labels))
}
