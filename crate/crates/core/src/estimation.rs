//! Maximum-likelihood estimation for single vMF and Watson distributions.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{check_same_dim, Dataset, UnitVector};
use crate::distributions::{watson_log_normalizer, VmfParams, WatsonParams};
use crate::error::{domain, Error, Result};
use crate::linalg::{ScatterMatrix, CHUNK_ROWS};
use crate::specfun::{bessel_ratio, g_complement, g_ratio};

/// Mean resultant lengths and Watson eigenvalues are kept in
/// `[R_CLAMP, 1 - R_CLAMP]` wherever a finite concentration is required.
pub const R_CLAMP: f64 = 1e-8;

/// Tolerance used by [`KappaMethod::Exact`] and the Watson estimators.
pub const EXACT_TOL: f64 = 1e-12;

const ROOT_ITERS: usize = 400;

/// Weighted resultant `sum_i w_i x_i` and total weight `sum_i w_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct VmfSuffStats {
    pub resultant: Vec<f64>,
    pub weight: f64,
}

impl VmfSuffStats {
    pub fn dim(&self) -> usize {
        self.resultant.len()
    }

    pub fn resultant_norm(&self) -> f64 {
        self.resultant.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Mean resultant length `||resultant|| / weight`, at most 1.
    pub fn r_bar(&self) -> f64 {
        (self.resultant_norm() / self.weight).min(1.0)
    }

    /// `resultant / ||resultant||`; undefined for a zero resultant.
    pub fn mean_direction(&self) -> Result<UnitVector> {
        let n = self.resultant_norm();
        if !(n > 0.0) || n <= 1e-12 * self.weight {
            return Err(Error::UndefinedMean);
        }
        UnitVector::normalize(self.resultant.clone())
    }
}

/// Resultant and weight of `data` (unit weights when `weights` is `None`).
pub fn vmf_suff_stats(data: &Dataset, weights: Option<&[f64]>) -> Result<VmfSuffStats> {
    let p = data.dim();
    if let Some(w) = weights {
        check_same_dim(data.len(), w.len())?;
        if w.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidInput(
                "weights must be finite and non-negative".into(),
            ));
        }
    }
    let chunks: Vec<(Vec<f64>, f64)> = (0..data.len().div_ceil(CHUNK_ROWS))
        .into_par_iter()
        .map(|c| {
            let mut r = vec![0.0; p];
            let mut total = 0.0;
            for i in c * CHUNK_ROWS..((c + 1) * CHUNK_ROWS).min(data.len()) {
                let wi = weights.map_or(1.0, |w| w[i]);
                total += wi;
                r.iter_mut()
                    .zip(data.row(i))
                    .for_each(|(a, x)| *a += wi * x);
            }
            (r, total)
        })
        .collect();
    let mut resultant = vec![0.0; p];
    let mut weight = 0.0;
    for (r, w) in chunks {
        resultant.iter_mut().zip(&r).for_each(|(a, b)| *a += b);
        weight += w;
    }
    if !(weight > 0.0) {
        return Err(Error::ZeroWeight);
    }
    Ok(VmfSuffStats { resultant, weight })
}

/// How the vMF concentration is recovered from the mean resultant length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KappaMethod {
    /// `r (p - r^2) / (1 - r^2)`.
    Banerjee,
    /// Two Newton steps from the Banerjee value.
    Newton2,
    /// Root of `A_p(kappa) = r` to [`EXACT_TOL`].
    Exact,
}

impl FromStr for KappaMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "banerjee" => Ok(Self::Banerjee),
            "newton2" => Ok(Self::Newton2),
            "exact" => Ok(Self::Exact),
            _ => Err(Error::InvalidInput(format!("unknown kappa method '{s}'"))),
        }
    }
}

impl fmt::Display for KappaMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Banerjee => "banerjee",
            Self::Newton2 => "newton2",
            Self::Exact => "exact",
        })
    }
}

fn check_r_bar(r_bar: f64, p: usize) -> Result<()> {
    if p < 2 {
        return domain(format!("dimension p = {p} must be at least 2"));
    }
    if !(0.0..=1.0).contains(&r_bar) {
        return domain(format!("mean resultant length {r_bar} outside [0, 1]"));
    }
    if r_bar == 1.0 {
        return Err(Error::Unbounded(format!(
            "mean resultant length 1 in dimension {p}"
        )));
    }
    Ok(())
}

/// `r (p - r^2) / (1 - r^2)`.
pub fn kappa_banerjee(r_bar: f64, p: usize) -> Result<f64> {
    check_r_bar(r_bar, p)?;
    let r2 = r_bar * r_bar;
    Ok(r_bar * (p as f64 - r2) / (1.0 - r2))
}

/// The Newton correction `(A_p(k) - r) / (1 - A_p(k)^2 - (p-1) A_p(k) / k)`
/// subtracted from `kappa` by one step.
pub fn newton_increment(kappa: f64, r_bar: f64, p: usize) -> Result<f64> {
    check_r_bar(r_bar, p)?;
    if !(kappa > 0.0) {
        return domain(format!("Newton step needs kappa > 0, got {kappa}"));
    }
    let a = bessel_ratio(p, kappa)?;
    let deriv = 1.0 - a * a - (p as f64 - 1.0) / kappa * a;
    if !(deriv > 0.0) {
        return Ok(0.0);
    }
    Ok((a - r_bar) / deriv)
}

/// `steps` Newton iterations for `A_p(kappa) = r_bar` from the Banerjee value,
/// clamped at zero.
pub fn kappa_newton(r_bar: f64, p: usize, steps: usize) -> Result<f64> {
    let mut kappa = kappa_banerjee(r_bar, p)?;
    for _ in 0..steps {
        if kappa <= 0.0 {
            break;
        }
        kappa = (kappa - newton_increment(kappa, r_bar, p)?).max(0.0);
    }
    Ok(kappa)
}

/// `kappa` with `|A_p(kappa) - r_bar| <= tol`, by Newton's method safeguarded
/// with bisection. The bracket starts at `[0, banerjee + 1]` and doubles
/// its upper end until it contains the root.
pub fn ap_inverse(r_bar: f64, p: usize, tol: f64) -> Result<f64> {
    check_r_bar(r_bar, p)?;
    if !(tol > 0.0) {
        return domain(format!("tolerance {tol} must be positive"));
    }
    if r_bar == 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = kappa_banerjee(r_bar, p)? + 1.0;
    let mut grow = 0;
    while bessel_ratio(p, hi)? < r_bar {
        lo = hi;
        hi *= 2.0;
        grow += 1;
        if grow > 200 || !hi.is_finite() {
            return Err(Error::BracketViolation {
                lower: lo,
                upper: hi,
                r: r_bar,
            });
        }
    }
    let pm1 = p as f64 - 1.0;
    let mut kappa = kappa_newton(r_bar, p, 0)?.clamp(lo, hi);
    if !(kappa > lo && kappa < hi) {
        kappa = 0.5 * (lo + hi);
    }
    for _ in 0..ROOT_ITERS {
        let a = bessel_ratio(p, kappa)?;
        let resid = a - r_bar;
        if resid.abs() <= tol {
            return Ok(kappa);
        }
        if resid < 0.0 {
            lo = kappa;
        } else {
            hi = kappa;
        }
        let deriv = 1.0 - a * a - pm1 / kappa * a;
        let newton = kappa - resid / deriv;
        let next = if deriv > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if next == kappa || hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(kappa);
        }
        kappa = next;
    }
    Err(Error::NonConvergence {
        what: "A_p inversion",
        iterations: ROOT_ITERS,
    })
}

/// Concentration for mean resultant length `r_bar` by `method`.
pub fn estimate_kappa(r_bar: f64, p: usize, method: KappaMethod) -> Result<f64> {
    match method {
        KappaMethod::Banerjee => kappa_banerjee(r_bar, p),
        KappaMethod::Newton2 => kappa_newton(r_bar, p, 2),
        KappaMethod::Exact => ap_inverse(r_bar, p, EXACT_TOL),
    }
}

/// vMF parameters from sufficient statistics.
pub fn vmf_from_stats(stats: &VmfSuffStats, method: KappaMethod) -> Result<VmfParams> {
    let mu = stats.mean_direction()?;
    let kappa = estimate_kappa(stats.r_bar(), stats.dim(), method)?;
    VmfParams::new(mu, kappa.max(0.0))
}

/// Maximum-likelihood vMF fit: `mu = sum x_i / ||sum x_i||`,
/// `kappa = A_p^{-1}(r_bar)` by `method`.
pub fn vmf_mle(data: &Dataset, method: KappaMethod) -> Result<VmfParams> {
    vmf_from_stats(&vmf_suff_stats(data, None)?, method)
}

// ---------------------------------------------------------------------------
// Watson
// ---------------------------------------------------------------------------

/// Lower, middle and upper bounds on the root of `g(a, c; kappa) = r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundTriple {
    pub lower: f64,
    pub mid: f64,
    pub upper: f64,
}

fn check_watson_args(a: f64, c: f64, r: f64) -> Result<()> {
    if !(a > 0.0 && c > a && a.is_finite() && c.is_finite()) {
        return domain(format!("need c > a > 0, got a = {a}, c = {c}"));
    }
    if !(r > 0.0 && r < 1.0) {
        return domain(format!("r = {r} must lie strictly between 0 and 1"));
    }
    Ok(())
}

/// ```text
/// L(r) = (rc - a) / (r(1-r)) * (1 + (1-r)/(c-a))
/// B(r) = (rc - a) / (2r(1-r)) * (1 + sqrt(1 + 4(c+1) r(1-r) / (a(c-a))))
/// U(r) = (rc - a) / (r(1-r)) * (1 + r/a)
/// ```
pub fn watson_bounds(a: f64, c: f64, r: f64) -> Result<BoundTriple> {
    check_watson_args(a, c, r)?;
    let lead = (r * c - a) / (r * (1.0 - r));
    let lower = lead * (1.0 + (1.0 - r) / (c - a));
    let mid = 0.5 * lead * (1.0 + (1.0 + 4.0 * (c + 1.0) * r * (1.0 - r) / (a * (c - a))).sqrt());
    let upper = lead * (1.0 + r / a);
    Ok(BoundTriple { lower, mid, upper })
}

/// `(cr - a) / (r(1-r)) + r / (2c(1-r))`.
pub fn kappa_bbg(a: f64, c: f64, r: f64) -> Result<f64> {
    check_watson_args(a, c, r)?;
    Ok((c * r - a) / (r * (1.0 - r)) + r / (2.0 * c * (1.0 - r)))
}

/// `g(a, c; kappa) - r`, evaluated through `1 - g` when `r > 1/2` so that the
/// residual keeps full relative precision near both ends.
fn g_residual(a: f64, c: f64, r: f64, kappa: f64) -> Result<f64> {
    if r <= 0.5 {
        Ok(g_ratio(a, c, kappa)? - r)
    } else {
        Ok((1.0 - r) - g_complement(a, c, kappa)?)
    }
}

/// Root of `g(a, c; kappa) = r`.
///
/// Bisection on the bracket `[L(r), U(r)]` interleaved with Newton steps whose
/// derivative is a central difference with step `max(1e-6, 1e-6 |kappa|)`.
/// Iteration stops once `|g - r| <= tol * min(r, 1 - r)` (never looser than
/// the absolute `tol`) or the bracket has shrunk to a few ulps. A bracket whose
/// ends do not straddle the root is reported as [`Error::BracketViolation`].
pub fn g_inverse(a: f64, c: f64, r: f64, tol: f64) -> Result<f64> {
    check_watson_args(a, c, r)?;
    if !(tol > 0.0) {
        return domain(format!("tolerance {tol} must be positive"));
    }
    if r == a / c {
        return Ok(0.0);
    }
    let bounds = watson_bounds(a, c, r)?;
    let (mut lo, mut hi) = (bounds.lower, bounds.upper);
    let f_lo = g_residual(a, c, r, lo)?;
    let f_hi = g_residual(a, c, r, hi)?;
    if f_lo > 0.0 || f_hi < 0.0 {
        return Err(Error::BracketViolation {
            lower: lo,
            upper: hi,
            r,
        });
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    let target = tol * r.min(1.0 - r);
    let mut kappa = bounds.mid.clamp(lo, hi);
    let mut polished = false;
    for _ in 0..ROOT_ITERS {
        let f = g_residual(a, c, r, kappa)?;
        if f < 0.0 {
            lo = kappa;
        } else if f > 0.0 {
            hi = kappa;
        } else {
            return Ok(kappa);
        }
        let h = (1e-6 * kappa.abs()).max(1e-6);
        let deriv = (g_residual(a, c, r, kappa + h)? - g_residual(a, c, r, kappa - h)?) / (2.0 * h);
        let newton = kappa - f / deriv;
        let converged = f.abs() <= target;
        if converged && polished {
            return Ok(kappa);
        }
        let next = if deriv > 0.0 && newton > lo && newton < hi {
            // one extra Newton step past the tolerance costs little and pins
            // the root to near machine precision
            polished = converged;
            newton
        } else if converged {
            return Ok(kappa);
        } else {
            0.5 * (lo + hi)
        };
        if next == kappa || (hi - lo) <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            return Ok(kappa);
        }
        kappa = next;
    }
    Err(Error::NonConvergence {
        what: "g inversion",
        iterations: ROOT_ITERS,
    })
}

/// A fitted Watson distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct WatsonFit {
    pub params: WatsonParams,
    /// The eigenvalue the axis came from was tied with its neighbour, so the
    /// axis is not unique.
    pub degenerate: bool,
    /// Log-likelihood per unit weight, `ln d_p(kappa) + kappa mu^T S mu`.
    pub mean_log_likelihood: f64,
}

/// Relative gap below which neighbouring eigenvalues count as tied.
const EIGEN_TIE: f64 = 1e-12;

/// Watson maximum-likelihood fit from a (weighted) scatter matrix: the better
/// of the bipolar candidate `(s_1, g^{-1}(lambda_1))` and the girdle candidate
/// `(s_p, g^{-1}(lambda_p))`.
pub fn watson_from_scatter(scatter: &ScatterMatrix) -> Result<WatsonFit> {
    let p = scatter.dim();
    let eig = scatter.eigen()?;
    let (a, c) = (0.5, 0.5 * p as f64);
    let scale = eig.values[0].abs().max(f64::MIN_POSITIVE);
    let candidate = |k: usize, neighbour: usize| -> Result<WatsonFit> {
        let r = eig.values[k].clamp(R_CLAMP, 1.0 - R_CLAMP);
        let kappa = g_inverse(a, c, r, EXACT_TOL)?;
        let ll = watson_log_normalizer(p, kappa)? + kappa * r;
        let mu = UnitVector::normalize(eig.vector(k).to_vec())?;
        Ok(WatsonFit {
            params: WatsonParams::new(mu, kappa)?,
            degenerate: (eig.values[k] - eig.values[neighbour]).abs() <= EIGEN_TIE * scale,
            mean_log_likelihood: ll,
        })
    };
    let top = candidate(0, 1)?;
    let bottom = candidate(p - 1, p - 2)?;
    Ok(if bottom.mean_log_likelihood > top.mean_log_likelihood {
        bottom
    } else {
        top
    })
}

/// Watson maximum-likelihood fit of `data`.
pub fn watson_mle(data: &Dataset) -> Result<WatsonFit> {
    watson_from_scatter(&ScatterMatrix::from_data(data, None)?)
}
