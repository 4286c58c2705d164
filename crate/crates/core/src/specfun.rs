//! Special functions behind the vMF and Watson normalizers.
//!
//! Everything is evaluated in the log domain or as ratios of like-scaled
//! quantities, so that dimensions in the thousands and concentrations in the
//! hundreds of thousands neither overflow nor lose precision to cancellation.
//!
//! * `ln I_s(x)`: power series when `x^2/4 <= 25 (s + 1)`. Otherwise the
//!   order is split as `s = nu0 + m` with `nu0` in `[0, 1)`; `ln I_nu0` comes
//!   from a closed form (`nu0 = 1/2`), the power series or the large-argument
//!   Hankel expansion, and the `m` ratios `I_{nu+1} / I_nu` are produced by one
//!   Perron continued fraction at the top order followed by the (stable)
//!   downward three-term recurrence.
//! * `M(a, c, x)`: positive-term series with exact power-of-two rescaling, or
//!   the large-argument expansion once the series would need more than
//!   [`SERIES_CAP`] terms. Negative arguments go through Kummer's
//!   transformation `M(a, c, x) = e^x M(c - a, c, -x)`.

use std::f64::consts::{LN_2, PI};

use crate::error::{domain, Error, Result};

/// Maximum number of terms summed by any series in this module.
pub const SERIES_CAP: usize = 10_000;

/// Continued fractions stop once successive convergents differ by less than this.
const CF_TOL: f64 = 1e-15;

/// Relative size of the last retained series term.
const SERIES_TOL: f64 = 1e-17;

/// Orders with `x^2/4` below this multiple of `s + 1` use the direct power series.
const DIRECT_SERIES_RATIO: f64 = 25.0;

/// Below this argument `ln I_nu0` uses the power series, above it the Hankel expansion.
const HANKEL_SWITCH: f64 = 25.0;

/// Natural log of the gamma function.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::NonFinite(format!("{name} = {v}")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Modified Bessel function of the first kind
// ---------------------------------------------------------------------------

/// `ln I_s(kappa)` for `s >= 0`, `kappa >= 0`.
///
/// Returns `-inf` for `kappa = 0` and `s > 0` (and `0` when both vanish).
pub fn log_bessel_i(s: f64, kappa: f64) -> Result<f64> {
    check_finite("order", s)?;
    check_finite("kappa", kappa)?;
    if s < 0.0 {
        return domain(format!("Bessel order {s} must be non-negative"));
    }
    if kappa < 0.0 {
        return domain(format!("Bessel argument {kappa} must be non-negative"));
    }
    if kappa == 0.0 {
        return Ok(if s == 0.0 { 0.0 } else { f64::NEG_INFINITY });
    }
    let q = 0.25 * kappa * kappa;
    if q <= DIRECT_SERIES_RATIO * (s + 1.0) {
        return bessel_i_series(s, kappa);
    }
    let m = s.floor();
    let nu0 = s - m;
    let base = ln_bessel_i_fractional(nu0, kappa)?;
    if m == 0.0 {
        return Ok(base);
    }
    // ratio(nu) = I_nu / I_{nu-1}; the top one from the continued fraction,
    // the rest from 1 / ratio(nu) = 2 nu / x + ratio(nu + 1).
    let steps = m as usize;
    let mut ratio = perron_ratio(s, kappa)?;
    let mut acc = ratio.ln();
    for j in (1..steps).rev() {
        let nu = nu0 + j as f64;
        ratio = 1.0 / (2.0 * nu / kappa + ratio);
        acc += ratio.ln();
    }
    Ok(base + acc)
}

/// `A_p(kappa) = I_{p/2}(kappa) / I_{p/2-1}(kappa)`, the mean resultant length
/// of a `p`-dimensional vMF with concentration `kappa`.
pub fn bessel_ratio(p: usize, kappa: f64) -> Result<f64> {
    if p < 2 {
        return domain(format!("dimension p = {p} must be at least 2"));
    }
    check_finite("kappa", kappa)?;
    if kappa < 0.0 {
        return domain(format!("kappa = {kappa} must be non-negative"));
    }
    if kappa == 0.0 {
        return Ok(0.0);
    }
    perron_ratio(0.5 * p as f64, kappa)
}

/// `I_nu(x) / I_{nu-1}(x)` for `nu > 0`, `x >= 0`, via Perron's continued fraction
///
/// ```text
/// x / (2nu + x - (2nu+1)x / (2nu+1+2x - (2nu+3)x / (2nu+2+2x - ...)))
/// ```
///
/// evaluated with the modified Lentz algorithm. It converges in a handful of
/// terms for large `x`, unlike the Gauss fraction.
pub fn bessel_ratio_order(nu: f64, x: f64) -> Result<f64> {
    check_finite("order", nu)?;
    check_finite("x", x)?;
    if nu <= 0.0 || x < 0.0 {
        return domain(format!(
            "Bessel ratio needs nu > 0 and x >= 0, got ({nu}, {x})"
        ));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    perron_ratio(nu, x)
}

fn perron_ratio(nu: f64, x: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let two_nu = 2.0 * nu;
    let mut f = two_nu + x;
    let mut c = f;
    let mut d = 0.0;
    for k in 1..=SERIES_CAP {
        let kf = k as f64;
        let a = -(two_nu + 2.0 * kf - 1.0) * x;
        let b = two_nu + kf + 2.0 * x;
        d = b + a * d;
        if d == 0.0 {
            d = TINY;
        }
        d = 1.0 / d;
        c = b + a / c;
        if c == 0.0 {
            c = TINY;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < CF_TOL {
            return Ok(x / f);
        }
    }
    Err(Error::NonConvergence {
        what: "Bessel ratio continued fraction",
        iterations: SERIES_CAP,
    })
}

/// Power series `I_s(x) = (x/2)^s sum_k (x^2/4)^k / (k! Gamma(k+s+1))`.
fn bessel_i_series(s: f64, x: f64) -> Result<f64> {
    let q = 0.25 * x * x;
    // terms peak where k (k + s) = q
    let peak = 0.5 * (-s + (s * s + 4.0 * q).sqrt());
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=SERIES_CAP {
        let kf = k as f64;
        term *= q / (kf * (kf + s));
        sum += term;
        if term <= SERIES_TOL * sum && kf > peak {
            return Ok(s * (0.5 * x).ln() - ln_gamma(s + 1.0) + sum.ln());
        }
    }
    Err(Error::NonConvergence {
        what: "Bessel power series",
        iterations: SERIES_CAP,
    })
}

/// `ln I_nu(x)` for `nu` in `[0, 1)` and `x > 0`.
fn ln_bessel_i_fractional(nu: f64, x: f64) -> Result<f64> {
    if nu == 0.5 {
        // I_{1/2}(x) = sqrt(2 / (pi x)) sinh x
        let lead = 0.5 * (2.0 / (PI * x)).ln();
        return Ok(if x < 1.0 {
            lead + x.sinh().ln()
        } else {
            lead + x + (-(-2.0 * x).exp()).ln_1p() - LN_2
        });
    }
    if x <= HANKEL_SWITCH {
        bessel_i_series(nu, x)
    } else {
        bessel_i_hankel(nu, x)
    }
}

/// Large-argument expansion
/// `I_nu(x) ~ e^x / sqrt(2 pi x) sum_k (-1)^k a_k(nu) / x^k`.
fn bessel_i_hankel(nu: f64, x: f64) -> Result<f64> {
    let mu = 4.0 * nu * nu;
    let mut term: f64 = 1.0;
    let mut sum = 1.0;
    for k in 1..=200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = -term * (mu - odd * odd) / (8.0 * kf * x);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() <= SERIES_TOL * sum.abs() {
            return Ok(x - 0.5 * (2.0 * PI * x).ln() + sum.ln());
        }
    }
    if term.abs() <= 1e-14 * sum.abs() {
        return Ok(x - 0.5 * (2.0 * PI * x).ln() + sum.ln());
    }
    Err(Error::NonConvergence {
        what: "Bessel large-argument expansion",
        iterations: 200,
    })
}

// ---------------------------------------------------------------------------
// Kummer's confluent hypergeometric function
// ---------------------------------------------------------------------------

const RESCALE_EXP: i32 = 600;

/// `mant * 2^exp2`, for sums far outside the range of `f64`.
#[derive(Debug, Clone, Copy)]
struct Scaled {
    mant: f64,
    exp2: i64,
}

impl Scaled {
    fn ln(self) -> f64 {
        self.mant.ln() + self.exp2 as f64 * LN_2
    }
}

fn check_kummer_params(a: f64, c: f64, x: f64) -> Result<()> {
    check_finite("a", a)?;
    check_finite("c", c)?;
    check_finite("kappa", x)?;
    if !(a > 0.0 && c >= a) {
        return domain(format!(
            "Kummer parameters need c >= a > 0, got a = {a}, c = {c}"
        ));
    }
    Ok(())
}

/// Index of the largest series term of `M(a, c, x)`, `x >= 0`.
fn kummer_series_peak(a: f64, c: f64, x: f64) -> f64 {
    let d = x - c;
    (0.5 * (d + (d * d + 4.0 * a * x).sqrt())).max(0.0)
}

fn kummer_series_fits(a: f64, c: f64, x: f64) -> bool {
    let j = kummer_series_peak(a, c, x);
    j + 10.0 * j.sqrt() + 100.0 <= SERIES_CAP as f64
}

/// Sum of `(a)_j / (c)_j x^j / j!` for `x >= 0` and `a >= 0`, `c > 0`.
fn kummer_series(a: f64, c: f64, x: f64) -> Result<Scaled> {
    let scale_down = 2f64.powi(-RESCALE_EXP);
    let limit = 2f64.powi(RESCALE_EXP);
    let peak = kummer_series_peak(a, c, x);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut exp2 = 0i64;
    for j in 1..=SERIES_CAP {
        let jf = j as f64;
        term *= (a + jf - 1.0) / (c + jf - 1.0) * x / jf;
        sum += term;
        if sum > limit {
            sum *= scale_down;
            term *= scale_down;
            exp2 += RESCALE_EXP as i64;
        }
        if term <= SERIES_TOL * sum && jf > peak {
            return Ok(Scaled { mant: sum, exp2 });
        }
    }
    Err(Error::NonConvergence {
        what: "Kummer series",
        iterations: SERIES_CAP,
    })
}

/// `S(a, c, x) = sum_k (c-a)_k (1-a)_k / (k! x^k)`, the large-`x` correction in
/// `M(a, c, x) ~ Gamma(c)/Gamma(a) e^x x^(a-c) S(a, c, x)`.
fn kummer_asymptotic_sum(a: f64, c: f64, x: f64) -> Result<f64> {
    const CAP: usize = 2000;
    let mut term: f64 = 1.0;
    let mut sum = 1.0;
    for k in 0..CAP {
        let kf = k as f64;
        let next = term * (c - a + kf) * (1.0 - a + kf) / ((kf + 1.0) * x);
        if next.abs() > term.abs() && k > 0 {
            break;
        }
        term = next;
        sum += term;
        if term.abs() <= SERIES_TOL * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence {
        what: "Kummer asymptotic expansion",
        iterations: CAP,
    })
}

/// `ln M(a, c, x)` for `x >= 0`.
fn ln_kummer_nonneg(a: f64, c: f64, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    if kummer_series_fits(a, c, x) {
        Ok(kummer_series(a, c, x)?.ln())
    } else {
        let s = kummer_asymptotic_sum(a, c, x)?;
        Ok(ln_gamma(c) - ln_gamma(a) + x + (a - c) * x.ln() + s.ln())
    }
}

/// `Gamma(x1) / Gamma(x0)`, exact product when the arguments differ by a small integer.
fn gamma_ratio(x1: f64, x0: f64) -> f64 {
    let d = x1 - x0;
    if d == d.round() && d.abs() <= 16.0 {
        let n = d.abs() as usize;
        let lo = x1.min(x0);
        let prod: f64 = (0..n).map(|i| lo + i as f64).product();
        if d >= 0.0 {
            prod
        } else {
            1.0 / prod
        }
    } else {
        (ln_gamma(x1) - ln_gamma(x0)).exp()
    }
}

/// `M(a1, c1, x) / M(a0, c0, x)` for `x >= 0`, with both evaluated in the same
/// regime so the ratio keeps full relative precision.
fn kummer_ratio(a1: f64, c1: f64, a0: f64, c0: f64, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(1.0);
    }
    if kummer_series_fits(a1, c1, x) && kummer_series_fits(a0, c0, x) {
        let num = kummer_series(a1, c1, x)?;
        let den = kummer_series(a0, c0, x)?;
        let shift = (num.exp2 - den.exp2) as i32;
        Ok(num.mant / den.mant * 2f64.powi(shift))
    } else {
        let s1 = kummer_asymptotic_sum(a1, c1, x)?;
        let s0 = kummer_asymptotic_sum(a0, c0, x)?;
        let power = (a1 - c1) - (a0 - c0);
        Ok(gamma_ratio(c1, c0) * gamma_ratio(a0, a1) * x.powf(power) * s1 / s0)
    }
}

/// `ln M(a, c, kappa)` for `c >= a > 0` and any finite `kappa`.
pub fn log_kummer_m(a: f64, c: f64, kappa: f64) -> Result<f64> {
    check_kummer_params(a, c, kappa)?;
    if a == c {
        return Ok(kappa);
    }
    if kappa >= 0.0 {
        ln_kummer_nonneg(a, c, kappa)
    } else {
        Ok(kappa + ln_kummer_nonneg(c - a, c, -kappa)?)
    }
}

/// `g(a, c; kappa) = M'(a, c, kappa) / M(a, c, kappa)`, using
/// `M'(a, c, x) = (a/c) M(a+1, c+1, x)`. Strictly increasing in `kappa` with
/// range `(0, 1)` and `g(a, c; 0) = a / c`.
pub fn g_ratio(a: f64, c: f64, kappa: f64) -> Result<f64> {
    check_kummer_params(a, c, kappa)?;
    if a == c {
        return Ok(1.0);
    }
    if kappa == 0.0 {
        return Ok(a / c);
    }
    let direct = g_direct(a, c, kappa)?;
    if direct <= 0.5 {
        Ok(direct)
    } else {
        Ok(1.0 - g_complement_unchecked(a, c, kappa)?)
    }
}

/// `1 - g(a, c; kappa)`, accurate to full relative precision even when `g` is
/// within a few ulps of one. Uses `M - M' = ((c-a)/c) M(a, c+1, x)`.
pub fn g_complement(a: f64, c: f64, kappa: f64) -> Result<f64> {
    check_kummer_params(a, c, kappa)?;
    if a == c {
        return Ok(0.0);
    }
    if kappa == 0.0 {
        return Ok(1.0 - a / c);
    }
    g_complement_unchecked(a, c, kappa)
}

fn g_direct(a: f64, c: f64, kappa: f64) -> Result<f64> {
    let ratio = if kappa >= 0.0 {
        kummer_ratio(a + 1.0, c + 1.0, a, c, kappa)?
    } else {
        // e^kappa cancels between M(a+1, c+1, kappa) and M(a, c, kappa)
        kummer_ratio(c - a, c + 1.0, c - a, c, -kappa)?
    };
    Ok(a / c * ratio)
}

fn g_complement_unchecked(a: f64, c: f64, kappa: f64) -> Result<f64> {
    let ratio = if kappa >= 0.0 {
        kummer_ratio(a, c + 1.0, a, c, kappa)?
    } else {
        kummer_ratio(c + 1.0 - a, c + 1.0, c - a, c, -kappa)?
    };
    Ok((c - a) / c * ratio)
}
