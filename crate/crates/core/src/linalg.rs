//! Dense symmetric eigenproblems for scatter matrices.
//!
//! Cyclic Jacobi for `p <= 512`; above that Householder tridiagonalization
//! followed by the implicit QL algorithm (after the EISPACK `tred2`/`tql2`
//! routines).

use rayon::prelude::*;

use crate::data::{check_same_dim, dot, Dataset};
use crate::error::{Error, Result};

/// Largest dimension handled by the Jacobi solver.
pub const JACOBI_MAX_DIM: usize = 512;

const JACOBI_SWEEPS: usize = 100;
const QL_ITERS: usize = 60;

/// Rows per parallel work item when accumulating scatter matrices.
pub(crate) const CHUNK_ROWS: usize = 512;

/// Weighted second-moment matrix `S = sum_i w_i x_i x_i^T / sum_i w_i`,
/// stored densely in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterMatrix {
    dim: usize,
    values: Vec<f64>,
    weight: f64,
}

impl ScatterMatrix {
    /// Scatter of `data` with optional non-negative `weights`.
    pub fn from_data(data: &Dataset, weights: Option<&[f64]>) -> Result<Self> {
        let p = data.dim();
        if let Some(w) = weights {
            check_same_dim(data.len(), w.len())?;
            if w.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                return Err(Error::InvalidInput(
                    "weights must be finite and non-negative".into(),
                ));
            }
        }
        let total: f64 = weights.map_or(data.len() as f64, |w| w.iter().sum());
        if !(total > 0.0) {
            return Err(Error::ZeroWeight);
        }
        // upper triangle per chunk, reduced in chunk order
        let chunks: Vec<Vec<f64>> = (0..data.len().div_ceil(CHUNK_ROWS))
            .into_par_iter()
            .map(|c| {
                let mut acc = vec![0.0; p * p];
                let end = ((c + 1) * CHUNK_ROWS).min(data.len());
                for i in c * CHUNK_ROWS..end {
                    let wi = weights.map_or(1.0, |w| w[i]);
                    if wi == 0.0 {
                        continue;
                    }
                    let x = data.row(i);
                    for a in 0..p {
                        let f = wi * x[a];
                        let dst = &mut acc[a * p + a..(a + 1) * p];
                        dst.iter_mut().zip(&x[a..]).for_each(|(d, xb)| *d += f * xb);
                    }
                }
                acc
            })
            .collect();
        let mut values = vec![0.0; p * p];
        for c in &chunks {
            values.iter_mut().zip(c).for_each(|(v, x)| *v += x);
        }
        for a in 0..p {
            for b in a..p {
                let v = values[a * p + b] / total;
                values[a * p + b] = v;
                values[b * p + a] = v;
            }
        }
        Ok(Self {
            dim: p,
            values,
            weight: total,
        })
    }

    /// Wraps a symmetric row-major matrix.
    pub fn from_matrix(dim: usize, values: Vec<f64>, weight: f64) -> Result<Self> {
        if values.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("scatter matrix entry".into()));
        }
        let scale = values
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        for a in 0..dim {
            for b in 0..a {
                if (values[a * dim + b] - values[b * dim + a]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not symmetric at ({a}, {b})"
                    )));
                }
            }
        }
        Ok(Self {
            dim,
            values,
            weight,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Total weight the matrix was normalized by.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// `v^T S v`.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        self.values
            .chunks_exact(self.dim)
            .zip(v)
            .map(|(row, vi)| vi * dot(row, v))
            .sum()
    }

    pub fn mul_vec(&self, v: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(self.values.chunks_exact(self.dim)) {
            *o = dot(row, v);
        }
    }

    pub fn eigen(&self) -> Result<Eigen> {
        symmetric_eigs(self)
    }
}

/// Spectral decomposition with eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// Row `k` (`vectors[k*p..(k+1)*p]`) is the unit eigenvector for `values[k]`.
    pub vectors: Vec<f64>,
}

impl Eigen {
    pub fn vector(&self, k: usize) -> &[f64] {
        let p = self.values.len();
        &self.vectors[k * p..(k + 1) * p]
    }
}

/// Full eigendecomposition of a scatter matrix.
pub fn symmetric_eigs(s: &ScatterMatrix) -> Result<Eigen> {
    symmetric_eigs_dense(s.dim, &s.values)
}

/// Full eigendecomposition of the symmetric row-major `dim x dim` matrix `a`.
pub fn symmetric_eigs_dense(dim: usize, a: &[f64]) -> Result<Eigen> {
    if a.len() != dim * dim {
        return Err(Error::DimensionMismatch {
            expected: dim * dim,
            found: a.len(),
        });
    }
    if dim == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    let (values, vectors_t) = if dim <= JACOBI_MAX_DIM {
        jacobi(dim, a)?
    } else {
        tridiagonal_ql(dim, a)?
    };
    // vectors_t holds eigenvectors as rows; order by descending eigenvalue
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    let mut vals = Vec::with_capacity(dim);
    let mut vecs = Vec::with_capacity(dim * dim);
    for &k in &order {
        vals.push(values[k]);
        vecs.extend_from_slice(&vectors_t[k * dim..(k + 1) * dim]);
    }
    Ok(Eigen {
        values: vals,
        vectors: vecs,
    })
}

/// Cyclic Jacobi rotations. Returns eigenvalues and eigenvectors as rows.
fn jacobi(n: usize, a_in: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut a = a_in.to_vec();
    // v holds eigenvectors as rows, so rotations touch contiguous memory
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let frob = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if frob == 0.0 {
        return Ok((vec![0.0; n], v));
    }
    let mut converged = false;
    for _ in 0..JACOBI_SWEEPS {
        let off: f64 = (0..n)
            .map(|i| (i + 1..n).map(|j| a[i * n + j].powi(2)).sum::<f64>())
            .sum();
        if off.sqrt() <= 1e-15 * frob {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                let (vp, vq) = rows_mut(&mut v, n, p, q);
                for (x, y) in vp.iter_mut().zip(vq.iter_mut()) {
                    let (xp, xq) = (*x, *y);
                    *x = c * xp - s * xq;
                    *y = s * xp + c * xq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            what: "Jacobi eigenvalue sweeps",
            iterations: JACOBI_SWEEPS,
        });
    }
    Ok(((0..n).map(|i| a[i * n + i]).collect(), v))
}

/// Disjoint mutable rows `i < j` of a row-major matrix with `n` columns.
fn rows_mut(m: &mut [f64], n: usize, i: usize, j: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert!(i < j);
    let (head, tail) = m.split_at_mut(j * n);
    (&mut head[i * n..(i + 1) * n], &mut tail[..n])
}

/// Householder reduction to tridiagonal form followed by implicit QL.
/// Returns eigenvalues and eigenvectors as rows.
fn tridiagonal_ql(n: usize, a: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut v = a.to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(n, &mut v, &mut d, &mut e);
    // columns of v are the accumulated transformation; QL rotates columns,
    // which are rows of the transpose
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            w[j * n + i] = v[i * n + j];
        }
    }
    tql2(n, &mut w, &mut d, &mut e)?;
    Ok((d, w))
}

fn tred2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    let at = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
                v[at(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in j + 1..i {
                    g += v[at(k, j)] * d[k];
                    e[k] += v[at(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[at(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[at(k, i + 1)] * v[at(k, j)];
                }
                for k in 0..=i {
                    v[at(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = 0.0;
    }
    v[at(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL on the tridiagonal `(d, e)`; `w` holds the transformation
/// transposed (row `k` is column `k`).
fn tql2(n: usize, w: &mut [f64], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > QL_ITERS {
                    return Err(Error::NonConvergence {
                        what: "tridiagonal QL",
                        iterations: QL_ITERS,
                    });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (wi, wi1) = rows_mut(w, n, i, i + 1);
                    for (x, y) in wi.iter_mut().zip(wi1.iter_mut()) {
                        let hk = *y;
                        *y = s * *x + c * hk;
                        *x = c * *x - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Leading eigenvector of the positive semidefinite `apply` operator by power
/// iteration from `start`. Stops when successive iterates differ by less than
/// `tol` in norm, or after `max_iters` steps; the flag reports which.
///
/// For a PSD operator every step does not decrease the Rayleigh quotient.
pub fn power_iteration(
    start: &[f64],
    tol: f64,
    max_iters: usize,
    mut apply: impl FnMut(&[f64], &mut [f64]),
) -> (Vec<f64>, bool) {
    let mut v = start.to_vec();
    let n0 = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= n0);
    let mut next = vec![0.0; v.len()];
    for _ in 0..max_iters {
        apply(&v, &mut next);
        let n = dot(&next, &next).sqrt();
        if !(n > 0.0) {
            return (v, true);
        }
        next.iter_mut().for_each(|x| *x /= n);
        let diff: f64 = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        std::mem::swap(&mut v, &mut next);
        if diff < tol {
            return (v, true);
        }
    }
    (v, false)
}
