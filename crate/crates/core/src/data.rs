//! Points on the unit sphere and row-major collections of them.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `| ||x|| - 1 |` accepted for a unit vector.
pub const UNIT_NORM_TOL: f64 = 1e-9;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// A direction in `R^p`, `p >= 2`, with Euclidean norm one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Wraps `coords`, which must already have unit norm.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_dim(coords.len())?;
        let n = norm(&coords);
        if !n.is_finite() {
            return Err(Error::NonFinite("unit vector coordinates".into()));
        }
        if (n - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::InvalidInput(format!(
                "vector norm {n} is not 1 within {UNIT_NORM_TOL}"
            )));
        }
        Ok(Self(coords))
    }

    /// Scales `coords` to unit length.
    pub fn normalize(mut coords: Vec<f64>) -> Result<Self> {
        check_dim(coords.len())?;
        let n = norm(&coords);
        if !n.is_finite() {
            return Err(Error::NonFinite("vector coordinates".into()));
        }
        if n == 0.0 {
            return Err(Error::InvalidInput(
                "cannot normalize the zero vector".into(),
            ));
        }
        coords.iter_mut().for_each(|c| *c /= n);
        Ok(Self(coords))
    }

    /// The `i`-th standard basis vector of `R^p`.
    pub fn basis(p: usize, i: usize) -> Result<Self> {
        check_dim(p)?;
        if i >= p {
            return Err(Error::InvalidInput(format!(
                "basis index {i} out of range for p = {p}"
            )));
        }
        let mut v = vec![0.0; p];
        v[i] = 1.0;
        Ok(Self(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|c| -c).collect())
    }
}

impl Deref for UnitVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for UnitVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for UnitVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<UnitVector> for Vec<f64> {
    fn from(v: UnitVector) -> Self {
        v.0
    }
}

fn check_dim(p: usize) -> Result<()> {
    if p < 2 {
        return Err(Error::Domain(format!(
            "dimension p = {p} must be at least 2"
        )));
    }
    Ok(())
}

/// `n` unit vectors in `R^p`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    values: Vec<f64>,
}

impl Dataset {
    /// Builds a dataset from flat row-major storage; every row must have unit norm.
    pub fn from_flat(dim: usize, values: Vec<f64>) -> Result<Self> {
        check_dim(dim)?;
        if values.is_empty() || values.len() % dim != 0 {
            return Err(Error::InvalidInput(format!(
                "{} values cannot be split into rows of length {dim}",
                values.len()
            )));
        }
        let ds = Self { dim, values };
        for (i, row) in ds.rows().enumerate() {
            let n = norm(row);
            if !n.is_finite() {
                return Err(Error::NonFinite(format!("row {i}")));
            }
            if (n - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::InvalidInput(format!(
                    "row {i} has norm {n}, expected 1 within {UNIT_NORM_TOL}"
                )));
            }
        }
        Ok(ds)
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows
            .first()
            .map(|r| r.as_ref().len())
            .ok_or_else(|| Error::InvalidInput("dataset has no rows".into()))?;
        let mut values = Vec::with_capacity(dim * rows.len());
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} coordinates, expected {dim}",
                    r.len()
                )));
            }
            values.extend_from_slice(r);
        }
        Self::from_flat(dim, values)
    }

    pub fn from_unit_vectors(rows: &[UnitVector]) -> Result<Self> {
        Self::from_rows(rows)
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Ambient dimension `p`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    /// Applies `f` to every row; rows are renormalized afterwards.
    pub fn map_rows(&self, mut f: impl FnMut(&[f64], &mut [f64])) -> Result<Self> {
        let mut out = vec![0.0; self.values.len()];
        for (src, dst) in self.rows().zip(out.chunks_exact_mut(self.dim)) {
            f(src, dst);
            let n = norm(dst);
            dst.iter_mut().for_each(|c| *c /= n);
        }
        Self::from_flat(self.dim, out)
    }

    /// Rows selected by index, in the given order.
    pub fn select(&self, idx: &[usize]) -> Self {
        let mut values = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            values.extend_from_slice(self.row(i));
        }
        Self {
            dim: self.dim,
            values,
        }
    }

    /// Concatenates the rows of `other` after the rows of `self`.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        Ok(Self {
            dim: self.dim,
            values,
        })
    }

    pub(crate) fn from_flat_unchecked(dim: usize, values: Vec<f64>) -> Self {
        debug_assert!(values.len() % dim == 0);
        Self { dim, values }
    }
}

pub(crate) fn check_same_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}
