//! External clustering evaluation by normalized mutual information.
//!
//! All quantities are plug-in estimates from empirical frequencies, in nats.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Joint counts of two labelings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contingency {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows x cols` counts; row index from the first labeling.
    pub counts: Vec<u64>,
    pub n: u64,
}

impl Contingency {
    pub fn new(y1: &[usize], y2: &[usize]) -> Result<Self> {
        check(y1, y2)?;
        let rows = y1.iter().max().map_or(0, |m| m + 1);
        let cols = y2.iter().max().map_or(0, |m| m + 1);
        let mut counts = vec![0u64; rows * cols];
        for (&a, &b) in y1.iter().zip(y2) {
            counts[a * cols + b] += 1;
        }
        Ok(Self {
            rows,
            cols,
            counts,
            n: y1.len() as u64,
        })
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.counts[r * self.cols + c]
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts
            .chunks_exact(self.cols)
            .map(|r| r.iter().sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        let mut s = vec![0u64; self.cols];
        for r in self.counts.chunks_exact(self.cols) {
            s.iter_mut().zip(r).for_each(|(a, b)| *a += b);
        }
        s
    }

    /// `I(Y1, Y2) = sum_ab (n_ab / n) ln(n n_ab / (n_a n_b))`.
    pub fn mutual_information(&self) -> f64 {
        let n = self.n as f64;
        let (rs, cs) = (self.row_sums(), self.col_sums());
        let mut mi = 0.0;
        for r in 0..self.rows {
            for c in 0..self.cols {
                let nab = self.get(r, c);
                if nab > 0 {
                    let nab = nab as f64;
                    mi += nab / n * (n * nab / (rs[r] as f64 * cs[c] as f64)).ln();
                }
            }
        }
        mi.max(0.0)
    }
}

fn check(y1: &[usize], y2: &[usize]) -> Result<()> {
    if y1.is_empty() {
        return Err(Error::InvalidInput(
            "label vectors must not be empty".into(),
        ));
    }
    if y1.len() != y2.len() {
        return Err(Error::DimensionMismatch {
            expected: y1.len(),
            found: y2.len(),
        });
    }
    Ok(())
}

fn entropy_of_counts(counts: impl IntoIterator<Item = u64>, n: f64) -> f64 {
    let h: f64 = counts
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let q = c as f64 / n;
            -q * q.ln()
        })
        .sum();
    h.max(0.0)
}

/// `H(Y) = -sum_a q_a ln q_a`.
pub fn entropy(y: &[usize]) -> Result<f64> {
    if y.is_empty() {
        return Err(Error::InvalidInput("label vector must not be empty".into()));
    }
    let k = y.iter().max().map_or(0, |m| m + 1);
    let mut counts = vec![0u64; k];
    y.iter().for_each(|&l| counts[l] += 1);
    Ok(entropy_of_counts(counts, y.len() as f64))
}

pub fn mutual_information(y1: &[usize], y2: &[usize]) -> Result<f64> {
    Ok(Contingency::new(y1, y2)?.mutual_information())
}

/// `I(Y, Y') / sqrt(H(Y) H(Y'))`, clamped to `[0, 1]`.
///
/// When either labeling has a single class the ratio is `0/0`; the result is
/// then 1 if both labelings are single-class (hence identical as partitions)
/// and 0 otherwise.
pub fn nmi(y_true: &[usize], y_pred: &[usize]) -> Result<f64> {
    let t = Contingency::new(y_true, y_pred)?;
    let n = t.n as f64;
    let h1 = entropy_of_counts(t.row_sums(), n);
    let h2 = entropy_of_counts(t.col_sums(), n);
    let single1 = t.row_sums().iter().filter(|&&c| c > 0).count() == 1;
    let single2 = t.col_sums().iter().filter(|&&c| c > 0).count() == 1;
    if single1 || single2 {
        return Ok(if single1 && single2 { 1.0 } else { 0.0 });
    }
    Ok((t.mutual_information() / (h1 * h2).sqrt()).clamp(0.0, 1.0))
}

/// Fraction of points whose predicted cluster's majority true class is their
/// own.
pub fn purity(y_true: &[usize], y_pred: &[usize]) -> Result<f64> {
    let t = Contingency::new(y_pred, y_true)?;
    let hits: u64 = t
        .counts
        .chunks_exact(t.cols)
        .map(|r| r.iter().copied().max().unwrap_or(0))
        .sum();
    Ok(hits as f64 / t.n as f64)
}
