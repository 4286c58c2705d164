#![allow(dead_code)]

pub mod oracle;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_unit(rng: &mut impl Rng, p: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

/// Random orthogonal matrix (rows) by Gram-Schmidt on Gaussian vectors.
pub fn random_rotation(rng: &mut impl Rng, p: usize) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(p);
    while q.len() < p {
        let mut v: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
        for _ in 0..2 {
            for u in &q {
                let d: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= d * y);
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            q.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    q
}

pub fn apply(q: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    q.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Chi-square statistic of `samples` (angles in `[0, pi]`) against the density
/// `exp(ln_density(theta))`, using `bins` equal-probability bins.
pub fn chi_square_angles(samples: &[f64], bins: usize, ln_density: impl Fn(f64) -> f64) -> f64 {
    const GRID: usize = 200_000;
    let h = std::f64::consts::PI / GRID as f64;
    let logs: Vec<f64> = (0..=GRID).map(|i| ln_density(i as f64 * h)).collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let dens: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let mut cdf = vec![0.0; GRID + 1];
    for i in 1..=GRID {
        cdf[i] = cdf[i - 1] + 0.5 * h * (dens[i - 1] + dens[i]);
    }
    let total = cdf[GRID];
    let mut edges = Vec::with_capacity(bins - 1);
    let mut j = 0;
    for b in 1..bins {
        let target = total * b as f64 / bins as f64;
        while cdf[j + 1] < target {
            j += 1;
        }
        let frac = (target - cdf[j]) / (cdf[j + 1] - cdf[j]);
        edges.push((j as f64 + frac) * h);
    }
    let mut counts = vec![0usize; bins];
    for &s in samples {
        counts[edges.partition_point(|&e| e < s)] += 1;
    }
    let expected = samples.len() as f64 / bins as f64;
    counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum()
}

/// `n` points from an equal-weight `k`-component mixture of `family` with
/// random means and common concentration `kappa`.
pub fn clustered(
    family: dirstat::Family,
    p: usize,
    k: usize,
    n: usize,
    kappa: f64,
    seed: u64,
) -> (dirstat::MixtureModel, dirstat::Dataset, Vec<usize>) {
    use dirstat::mixture::{sample_mixture, Component};
    let comps = dirstat::synthetic::random_means(p, k, seed)
        .unwrap()
        .into_iter()
        .map(|mu| Component { mu, kappa })
        .collect();
    let model = dirstat::MixtureModel::new(family, vec![1.0 / k as f64; k], comps).unwrap();
    let (data, labels) = sample_mixture(&model, n, seed).unwrap();
    (model, data, labels)
}

/// Plain Euclidean k-means (Lloyd) in the ambient space, seeded with the
/// first `k` distinct rows; centroids are not projected onto the sphere.
pub fn euclidean_kmeans(data: &dirstat::Dataset, k: usize, iters: usize) -> Vec<usize> {
    let p = data.dim();
    let mut centroids: Vec<Vec<f64>> = Vec::new();
    for x in data.rows() {
        if centroids.len() == k {
            break;
        }
        if centroids
            .iter()
            .all(|c| c.iter().zip(x).any(|(a, b)| a != b))
        {
            centroids.push(x.to_vec());
        }
    }
    let mut labels = vec![0; data.len()];
    for _ in 0..iters {
        for (l, x) in labels.iter_mut().zip(data.rows()) {
            let d = |c: &Vec<f64>| c.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
            *l = (0..k)
                .min_by(|&a, &b| d(&centroids[a]).total_cmp(&d(&centroids[b])))
                .unwrap();
        }
        let mut sums = vec![vec![0.0; p]; k];
        let mut counts = vec![0usize; k];
        for (&l, x) in labels.iter().zip(data.rows()) {
            counts[l] += 1;
            sums[l].iter_mut().zip(x).for_each(|(s, v)| *s += v);
        }
        for j in 0..k {
            if counts[j] > 0 {
                centroids[j] = sums[j].iter().map(|s| s / counts[j] as f64).collect();
            }
        }
    }
    labels
}
