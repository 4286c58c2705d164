//! Uniform, von Mises-Fisher and Watson distributions on the unit sphere.
//!
//! Densities are with respect to the surface measure of `S^{p-1}` and are
//! always returned as logarithms.

use std::f64::consts::{LN_2, PI};

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{check_same_dim, dot, Dataset, UnitVector};
use crate::error::{domain, Error, Result};
use crate::rng;
use crate::specfun::{ln_gamma, log_bessel_i, log_kummer_m};

/// Proposals drawn per accepted point before a sampler gives up.
pub const REJECTION_CAP: usize = 10_000;

/// Mean direction and concentration `kappa >= 0` of a vMF distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct VmfParams {
    mu: UnitVector,
    kappa: f64,
}

/// Axis and concentration (any sign) of a Watson distribution. `mu` and
/// `-mu` describe the same distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct WatsonParams {
    mu: UnitVector,
    kappa: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    mu: UnitVector,
    kappa: f64,
}

impl VmfParams {
    pub fn new(mu: UnitVector, kappa: f64) -> Result<Self> {
        if !kappa.is_finite() {
            return Err(Error::NonFinite(format!("kappa = {kappa}")));
        }
        if kappa < 0.0 {
            return domain(format!("vMF concentration {kappa} must be non-negative"));
        }
        Ok(Self { mu, kappa })
    }

    pub fn mu(&self) -> &UnitVector {
        &self.mu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn dim(&self) -> usize {
        self.mu.dim()
    }

    /// `ln c_p(kappa)`.
    pub fn log_normalizer(&self) -> Result<f64> {
        vmf_log_normalizer(self.dim(), self.kappa)
    }
}

impl WatsonParams {
    pub fn new(mu: UnitVector, kappa: f64) -> Result<Self> {
        if !kappa.is_finite() {
            return Err(Error::NonFinite(format!("kappa = {kappa}")));
        }
        Ok(Self { mu, kappa })
    }

    pub fn mu(&self) -> &UnitVector {
        &self.mu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn dim(&self) -> usize {
        self.mu.dim()
    }

    /// `ln d_p(kappa)`.
    pub fn log_normalizer(&self) -> Result<f64> {
        watson_log_normalizer(self.dim(), self.kappa)
    }
}

impl TryFrom<RawParams> for VmfParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        Self::new(r.mu, r.kappa)
    }
}

impl TryFrom<RawParams> for WatsonParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        Self::new(r.mu, r.kappa)
    }
}

impl From<VmfParams> for RawParams {
    fn from(v: VmfParams) -> Self {
        Self {
            mu: v.mu,
            kappa: v.kappa,
        }
    }
}

impl From<WatsonParams> for RawParams {
    fn from(v: WatsonParams) -> Self {
        Self {
            mu: v.mu,
            kappa: v.kappa,
        }
    }
}

fn check_p(p: usize) -> Result<()> {
    if p < 2 {
        return domain(format!("dimension p = {p} must be at least 2"));
    }
    Ok(())
}

/// `ln(Gamma(p/2) / (2 pi^{p/2}))`, the log density of the uniform distribution
/// on `S^{p-1}`.
pub fn log_uniform_density(p: usize) -> Result<f64> {
    check_p(p)?;
    let h = 0.5 * p as f64;
    Ok(ln_gamma(h) - LN_2 - h * PI.ln())
}

/// `ln c_p(kappa) = (p/2 - 1) ln kappa - (p/2) ln(2 pi) - ln I_{p/2-1}(kappa)`.
pub fn vmf_log_normalizer(p: usize, kappa: f64) -> Result<f64> {
    check_p(p)?;
    if kappa == 0.0 {
        return log_uniform_density(p);
    }
    if kappa < 0.0 || !kappa.is_finite() {
        return domain(format!(
            "vMF concentration {kappa} must be finite and non-negative"
        ));
    }
    let s = 0.5 * p as f64 - 1.0;
    Ok(s * kappa.ln() - 0.5 * p as f64 * (2.0 * PI).ln() - log_bessel_i(s, kappa)?)
}

/// `ln d_p(kappa) = ln Gamma(p/2) - ln 2 - (p/2) ln pi - ln M(1/2, p/2, kappa)`.
pub fn watson_log_normalizer(p: usize, kappa: f64) -> Result<f64> {
    let base = log_uniform_density(p)?;
    if kappa == 0.0 {
        return Ok(base);
    }
    Ok(base - log_kummer_m(0.5, 0.5 * p as f64, kappa)?)
}

pub fn vmf_log_pdf(params: &VmfParams, x: &[f64]) -> Result<f64> {
    check_same_dim(params.dim(), x.len())?;
    Ok(params.log_normalizer()? + params.kappa * dot(&params.mu, x))
}

pub fn watson_log_pdf(params: &WatsonParams, x: &[f64]) -> Result<f64> {
    check_same_dim(params.dim(), x.len())?;
    let t = dot(&params.mu, x);
    Ok(params.log_normalizer()? + params.kappa * t * t)
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput("sample size must be at least 1".into()));
    }
    Ok(())
}

/// Fills `out` with a uniformly distributed unit vector.
pub(crate) fn uniform_direction<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    loop {
        for c in out.iter_mut() {
            *c = rng.sample(StandardNormal);
        }
        let n = dot(out, out).sqrt();
        if n > 1e-150 {
            out.iter_mut().for_each(|c| *c /= n);
            return;
        }
    }
}

/// `n` independent uniform points on `S^{p-1}` from stream 0 of `seed`.
pub fn sample_uniform(p: usize, n: usize, seed: u64) -> Result<Dataset> {
    check_p(p)?;
    check_n(n)?;
    sample_uniform_with(p, n, &mut rng::stream(seed, 0))
}

pub fn sample_uniform_with<R: Rng + ?Sized>(p: usize, n: usize, rng: &mut R) -> Result<Dataset> {
    check_p(p)?;
    check_n(n)?;
    let mut values = vec![0.0; n * p];
    for row in values.chunks_exact_mut(p) {
        uniform_direction(rng, row);
    }
    Ok(Dataset::from_flat_unchecked(p, values))
}

/// Writes `t mu + sqrt(1 - t^2) v`, with `v` uniform on the unit sphere of the
/// orthogonal complement of `mu`, into `out`.
///
/// The point `(t, sqrt(1 - t^2) v')` is built in coordinates where `mu = e_1`
/// and then moved by the Householder reflection exchanging `e_1` and `mu`.
fn place_around<R: Rng + ?Sized>(rng: &mut R, mu: &[f64], t: f64, out: &mut [f64]) {
    let p = mu.len();
    uniform_direction(rng, &mut out[1..]);
    let radial = (1.0 - t * t).max(0.0).sqrt();
    out[1..].iter_mut().for_each(|c| *c *= radial);
    out[0] = t;
    // u = e_1 - mu, H = I - 2 u u^T / |u|^2
    let uu = 2.0 * (1.0 - mu[0]);
    if uu > 1e-300 {
        let mut ux = out[0] * (1.0 - mu[0]);
        for i in 1..p {
            ux -= mu[i] * out[i];
        }
        let f = 2.0 * ux / uu;
        out[0] -= f * (1.0 - mu[0]);
        for i in 1..p {
            out[i] += f * mu[i];
        }
    }
    let n = dot(out, out).sqrt();
    out.iter_mut().for_each(|c| *c /= n);
}

/// `n` vMF draws from stream 0 of `seed`.
pub fn sample_vmf(params: &VmfParams, n: usize, seed: u64) -> Result<Dataset> {
    check_n(n)?;
    sample_vmf_with(params, n, &mut rng::stream(seed, 0))
}

/// vMF draws by Wood's rejection sampler for `w = mu^T x`, whose density is
/// proportional to `e^{kappa w} (1 - w^2)^{(p-3)/2}` on `[-1, 1]`.
pub fn sample_vmf_with<R: Rng + ?Sized>(
    params: &VmfParams,
    n: usize,
    rng: &mut R,
) -> Result<Dataset> {
    check_n(n)?;
    let p = params.dim();
    let kappa = params.kappa;
    let pm1 = (p - 1) as f64;
    // b = (-2k + sqrt(4k^2 + (p-1)^2)) / (p-1), rationalized
    let b = pm1 / (2.0 * kappa + (4.0 * kappa * kappa + pm1 * pm1).sqrt());
    let x0 = (1.0 - b) / (1.0 + b);
    let c = kappa * x0 + pm1 * (1.0 - x0 * x0).ln();
    let beta = Beta::new(0.5 * pm1, 0.5 * pm1).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut values = vec![0.0; n * p];
    for row in values.chunks_exact_mut(p) {
        let mut accepted = None;
        for _ in 0..REJECTION_CAP {
            let z: f64 = beta.sample(rng);
            let w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
            let u: f64 = rng.random();
            if kappa * w + pm1 * (1.0 - x0 * w).ln() - c >= u.ln() {
                accepted = Some(w);
                break;
            }
        }
        let w = accepted.ok_or(Error::RejectionCap(REJECTION_CAP))?;
        place_around(rng, &params.mu, w, row);
    }
    Ok(Dataset::from_flat_unchecked(p, values))
}

/// `n` Watson draws from stream 0 of `seed`.
pub fn sample_watson(params: &WatsonParams, n: usize, seed: u64) -> Result<Dataset> {
    check_n(n)?;
    sample_watson_with(params, n, &mut rng::stream(seed, 0))
}

/// Watson draws. `s = (mu^T x)^2` has density proportional to
/// `s^{-1/2} (1 - s)^{(p-3)/2} e^{kappa s}` on `[0, 1]` and is sampled by
/// rejection (see [`WatsonEnvelope`]); `mu^T x = +-sqrt(s)` with a fair sign.
pub fn sample_watson_with<R: Rng + ?Sized>(
    params: &WatsonParams,
    n: usize,
    rng: &mut R,
) -> Result<Dataset> {
    check_n(n)?;
    let p = params.dim();
    let env = WatsonEnvelope::new(p, params.kappa)?;
    let mut values = vec![0.0; n * p];
    for row in values.chunks_exact_mut(p) {
        let s = env.draw(rng)?;
        let t = if rng.random::<bool>() {
            s.sqrt()
        } else {
            -s.sqrt()
        };
        place_around(rng, &params.mu, t, row);
    }
    Ok(Dataset::from_flat_unchecked(p, values))
}

/// Rejection envelope for `f(s) = s^{-1/2} (1 - s)^{k-1} e^{kappa s}`, `k = (p-1)/2`.
///
/// * `BetaHead`: `Beta(1/2, beta)` with `beta <= k`, for `kappa >= 0`.
/// * `BetaTail`: `Beta(alpha, k)` with `alpha <= 1/2`, for `kappa < 0`.
/// * `GammaSplit`, for large positive `kappa`: in `y = 1 - s` the target is
///   `(1-y)^{-1/2} y^{k-1} e^{-kappa y}` up to a constant. It is covered by
///   `sqrt(2) y^{k-1} e^{-kappa y}` on `[0, 1/2]` (a Gamma proposal) and by
///   `h (1-y)^{-1/2}` on `(1/2, 1)`.
///
/// The free shape parameter is chosen to minimize the envelope mass, and the
/// cheaper of `BetaHead` and `GammaSplit` is used.
#[derive(Debug, Clone)]
enum WatsonEnvelope {
    BetaHead {
        dist: Beta<f64>,
        kappa: f64,
        d: f64,
        h_max: f64,
    },
    BetaTail {
        dist: Beta<f64>,
        kappa: f64,
        e: f64,
        h_max: f64,
    },
    GammaSplit {
        dist: Gamma<f64>,
        kappa: f64,
        k: f64,
        ln_h: f64,
        p_gamma: f64,
    },
}

const GOLDEN_ITERS: usize = 80;

/// Minimizes a unimodal `f` on `[lo, hi]`.
fn golden_section(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..GOLDEN_ITERS {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    // the upper end is usually optimal for small |kappa|
    let x = 0.5 * (a + b);
    if f(hi) <= f(x) {
        hi
    } else {
        x
    }
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `max_{s in [0,1]} d ln(1-s) + kappa s` for `d >= 0`, `kappa >= 0`.
fn head_max(d: f64, kappa: f64) -> f64 {
    if kappa <= d {
        0.0
    } else if d == 0.0 {
        kappa
    } else {
        kappa - d + d * (d / kappa).ln()
    }
}

/// `max_{s in [0,1]} e ln s - |kappa| s` for `e >= 0`, `kappa < 0`.
fn tail_max(e: f64, kappa: f64) -> f64 {
    let a = -kappa;
    if e == 0.0 {
        0.0
    } else if e >= a {
        -a
    } else {
        e * (e / a).ln() - e
    }
}

fn beta_dist(a: f64, b: f64) -> Result<Beta<f64>> {
    Beta::new(a, b).map_err(|e| Error::InvalidInput(e.to_string()))
}

impl WatsonEnvelope {
    fn new(p: usize, kappa: f64) -> Result<Self> {
        let k = 0.5 * (p - 1) as f64;
        if kappa < 0.0 {
            let cost = |alpha: f64| tail_max(0.5 - alpha, kappa) + ln_beta(alpha, k);
            let alpha = golden_section(1e-6, 0.5, cost);
            let e = 0.5 - alpha;
            return Ok(Self::BetaTail {
                dist: beta_dist(alpha, k)?,
                kappa,
                e,
                h_max: tail_max(e, kappa),
            });
        }
        let cost = |beta: f64| head_max(k - beta, kappa) + ln_beta(0.5, beta);
        let beta = golden_section(1e-6, k, cost);
        let d = k - beta;
        let head = Self::BetaHead {
            dist: beta_dist(0.5, beta)?,
            kappa,
            d,
            h_max: head_max(d, kappa),
        };
        // both masses in the y = 1 - s scale, where the target carries e^{-kappa}
        if kappa == 0.0 {
            return Ok(head);
        }
        let head_mass = cost(beta) - kappa;
        let ln_wa = 0.5 * LN_2 + ln_gamma(k) - k * kappa.ln();
        let y = if k > 1.0 {
            ((k - 1.0) / kappa).clamp(0.5, 1.0)
        } else {
            0.5
        };
        let ln_h = (k - 1.0) * y.ln() - kappa * y;
        let ln_wb = 0.5 * LN_2 + ln_h;
        let hi = ln_wa.max(ln_wb);
        let split_mass = hi + ((ln_wa - hi).exp() + (ln_wb - hi).exp()).ln();
        if split_mass < head_mass {
            let dist =
                Gamma::new(k, 1.0 / kappa).map_err(|e| Error::InvalidInput(e.to_string()))?;
            let p_gamma = 1.0 / (1.0 + (ln_wb - ln_wa).exp());
            Ok(Self::GammaSplit {
                dist,
                kappa,
                k,
                ln_h,
                p_gamma,
            })
        } else {
            Ok(head)
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        for _ in 0..REJECTION_CAP {
            match self {
                Self::BetaHead {
                    dist,
                    kappa,
                    d,
                    h_max,
                } => {
                    let s: f64 = dist.sample(rng);
                    let u: f64 = rng.random();
                    if u.ln() <= d * (-s).ln_1p() + kappa * s - h_max {
                        return Ok(s);
                    }
                }
                Self::BetaTail {
                    dist,
                    kappa,
                    e,
                    h_max,
                } => {
                    let s: f64 = dist.sample(rng);
                    let u: f64 = rng.random();
                    let h = if *e == 0.0 {
                        kappa * s
                    } else {
                        e * s.ln() + kappa * s
                    };
                    if u.ln() <= h - h_max {
                        return Ok(s);
                    }
                }
                Self::GammaSplit {
                    dist,
                    kappa,
                    k,
                    ln_h,
                    p_gamma,
                } => {
                    let y = if rng.random::<f64>() < *p_gamma {
                        dist.sample(rng)
                    } else {
                        let v: f64 = rng.random();
                        1.0 - 0.5 * v * v
                    };
                    if y >= 1.0 {
                        continue;
                    }
                    // ln f(y) and ln of the envelope density at y
                    let ln_f = -0.5 * (-y).ln_1p() + (k - 1.0) * y.ln() - kappa * y;
                    let ln_a = 0.5 * LN_2 + (k - 1.0) * y.ln() - kappa * y;
                    let ln_g = if y > 0.5 {
                        let ln_b = ln_h - 0.5 * (-y).ln_1p();
                        let m = ln_a.max(ln_b);
                        m + ((ln_a - m).exp() + (ln_b - m).exp()).ln()
                    } else {
                        ln_a
                    };
                    let u: f64 = rng.random();
                    if u.ln() <= ln_f - ln_g {
                        return Ok(1.0 - y);
                    }
                }
            }
        }
        Err(Error::RejectionCap(REJECTION_CAP))
    }
}
