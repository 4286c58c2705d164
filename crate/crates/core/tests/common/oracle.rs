//! Brute-force reference values at high precision.
//!
//! Every quantity is a plain power-series sum carried out in `astro-float`
//! arithmetic (256 bits, ~77 significant digits, raised further to absorb the
//! cancellation of alternating sums). Nothing here shares code or algorithms
//! with the library under test: no continued fractions, no asymptotic
//! expansions, no Kummer transformation.

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

const RM: RoundingMode = RoundingMode::ToEven;

/// Working precision in bits.
pub const PREC: usize = 256;

/// Stirling terms used by `ln_gamma`.
const STIRLING_TERMS: usize = 30;

pub struct Oracle {
    cc: Consts,
    /// `B_2, B_4, ..., B_{2 STIRLING_TERMS}`.
    bernoulli: Vec<BigFloat>,
}

impl Default for Oracle {
    fn default() -> Self {
        Self::new()
    }
}

impl Oracle {
    pub fn new() -> Self {
        let mut cc = Consts::new().expect("constants cache");
        let bernoulli = bernoulli_even(2 * STIRLING_TERMS)
            .into_iter()
            .map(|b| {
                let num =
                    BigFloat::parse(&b.numer().to_string(), Radix::Dec, PREC + 64, RM, &mut cc);
                let den =
                    BigFloat::parse(&b.denom().to_string(), Radix::Dec, PREC + 64, RM, &mut cc);
                num.div(&den, PREC + 64, RM)
            })
            .collect();
        Self { cc, bernoulli }
    }

    fn big(x: f64) -> BigFloat {
        BigFloat::from_f64(x, PREC)
    }

    pub fn to_f64(x: &BigFloat) -> f64 {
        format!("{x}")
            .parse()
            .expect("decimal rendering of a finite BigFloat")
    }

    /// `ln Gamma(x)` for `x > 0`: upward shift to `z >= 80`, then Stirling's
    /// series with exact Bernoulli numbers.
    pub fn ln_gamma(&mut self, x: &BigFloat, p: usize) -> BigFloat {
        let p = p + 64;
        let shift = {
            let xf = Self::to_f64(x);
            if xf < 80.0 {
                (80.0 - xf).ceil() as usize
            } else {
                0
            }
        };
        let mut prod = BigFloat::from_f64(1.0, p);
        let mut z = x.clone();
        for _ in 0..shift {
            prod = prod.mul(&z, p, RM);
            z = z.add(&BigFloat::from_f64(1.0, p), p, RM);
        }
        let half = BigFloat::from_f64(0.5, p);
        let ln_z = z.ln(p, RM, &mut self.cc);
        let two_pi = self.cc.pi(p, RM).mul(&BigFloat::from_f64(2.0, p), p, RM);
        let mut acc = z.sub(&half, p, RM).mul(&ln_z, p, RM);
        acc = acc.sub(&z, p, RM);
        acc = acc.add(&two_pi.ln(p, RM, &mut self.cc).mul(&half, p, RM), p, RM);
        let z2 = z.mul(&z, p, RM);
        let mut zpow = z.clone();
        for (k, b) in self.bernoulli.iter().enumerate() {
            let two_k = 2.0 * (k + 1) as f64;
            let den = BigFloat::from_f64(two_k * (two_k - 1.0), p).mul(&zpow, p, RM);
            acc = acc.add(&b.div(&den, p, RM), p, RM);
            zpow = zpow.mul(&z2, p, RM);
        }
        if shift > 0 {
            acc = acc.sub(&prod.ln(p, RM, &mut self.cc), p, RM);
        }
        acc
    }

    /// `ln I_s(x)` from `(x/2)^s / Gamma(s+1) * sum_k (x^2/4)^k / (k! (s+1)_k)`.
    pub fn ln_bessel_i_big(&mut self, s: f64, x: f64) -> BigFloat {
        assert!(x > 0.0 && s >= 0.0);
        let p = PREC;
        let sb = Self::big(s);
        let xb = Self::big(x);
        let q = xb.mul(&xb, p, RM).mul(&Self::big(0.25), p, RM);
        let peak = 0.5 * (-s + (s * s + x * x).sqrt());
        let mut term = Self::big(1.0);
        let mut sum = Self::big(1.0);
        let mut k = 1usize;
        loop {
            let kb = Self::big(k as f64);
            let den = kb.mul(&kb.add(&sb, p, RM), p, RM);
            term = term.mul(&q, p, RM).div(&den, p, RM);
            sum = sum.add(&term, p, RM);
            if (k as f64) > peak && negligible(&term, &sum, p) {
                break;
            }
            k += 1;
        }
        let half_x = xb.mul(&Self::big(0.5), p, RM);
        let lead = sb.mul(&half_x.ln(p, RM, &mut self.cc), p, RM);
        let s1 = sb.add(&Self::big(1.0), p, RM);
        let lg = self.ln_gamma(&s1, p);
        lead.sub(&lg, p, RM)
            .add(&sum.ln(p, RM, &mut self.cc), p, RM)
    }

    pub fn ln_bessel_i(&mut self, s: f64, x: f64) -> f64 {
        Self::to_f64(&self.ln_bessel_i_big(s, x))
    }

    /// `I_{p/2}(x) / I_{p/2-1}(x)`.
    pub fn bessel_ratio(&mut self, p: usize, x: f64) -> f64 {
        let nu = 0.5 * p as f64;
        let hi = self.ln_bessel_i_big(nu, x);
        let lo = self.ln_bessel_i_big(nu - 1.0, x);
        Self::to_f64(&hi.sub(&lo, PREC, RM).exp(PREC, RM, &mut self.cc))
    }

    /// `M(a, c, x)` by direct summation of `sum_j (a)_j/(c)_j x^j/j!`.
    pub fn kummer_big(&mut self, a: f64, c: f64, x: f64) -> (BigFloat, usize) {
        // alternating sums cancel about |x| / ln 2 bits
        let p = if x < 0.0 {
            PREC + (x.abs() * std::f64::consts::LOG2_E).ceil() as usize + 64
        } else {
            PREC
        };
        let ab = BigFloat::from_f64(a, p);
        let cb = BigFloat::from_f64(c, p);
        let xb = BigFloat::from_f64(x, p);
        let ax = x.abs();
        let peak = 0.5 * ((ax - c) + ((ax - c).powi(2) + 4.0 * a * ax).sqrt()).max(0.0) + ax;
        let mut term = BigFloat::from_f64(1.0, p);
        let mut sum = BigFloat::from_f64(1.0, p);
        let mut j = 1usize;
        loop {
            let jm1 = BigFloat::from_f64((j - 1) as f64, p);
            let num = ab.add(&jm1, p, RM).mul(&xb, p, RM);
            let den = cb
                .add(&jm1, p, RM)
                .mul(&BigFloat::from_f64(j as f64, p), p, RM);
            term = term.mul(&num, p, RM).div(&den, p, RM);
            sum = sum.add(&term, p, RM);
            if (j as f64) > peak && negligible(&term, &sum, PREC) {
                break;
            }
            j += 1;
        }
        (sum, p)
    }

    pub fn ln_kummer(&mut self, a: f64, c: f64, x: f64) -> f64 {
        let (m, p) = self.kummer_big(a, c, x);
        Self::to_f64(&m.ln(p, RM, &mut self.cc))
    }

    /// `(a/c) M(a+1, c+1, x) / M(a, c, x)`.
    pub fn g_ratio(&mut self, a: f64, c: f64, x: f64) -> f64 {
        let (num, p1) = self.kummer_big(a + 1.0, c + 1.0, x);
        let (den, p0) = self.kummer_big(a, c, x);
        let p = p1.max(p0);
        let r = num
            .div(&den, p, RM)
            .mul(&BigFloat::from_f64(a / c, p), p, RM);
        Self::to_f64(&r)
    }
}

/// `|term| < 2^-(p+8) |sum|`.
fn negligible(term: &BigFloat, sum: &BigFloat, p: usize) -> bool {
    if term.is_zero() {
        return true;
    }
    match (term.exponent(), sum.exponent()) {
        (Some(et), Some(es)) => (es as i64) - (et as i64) > (p as i64) + 8,
        _ => false,
    }
}

/// Exact `B_2, B_4, ..., B_max` from `sum_{j<=m} C(m+1, j) B_j = 0`.
fn bernoulli_even(max: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = vec![BigRational::one()];
    for m in 1..=max {
        let mut acc = BigRational::zero();
        let mut binom = BigInt::one(); // C(m+1, 0)
        for (j, bj) in b.iter().enumerate() {
            acc += BigRational::from_integer(binom.clone()) * bj;
            binom = binom * BigInt::from(m + 1 - j) / BigInt::from(j + 1);
        }
        b.push(-acc / BigRational::from_integer(BigInt::from(m + 1)));
    }
    (1..=max / 2).map(|k| b[2 * k].clone()).collect()
}
