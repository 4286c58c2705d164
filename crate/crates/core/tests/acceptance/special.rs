//! Criterion 4: library special functions against the brute-force oracle.

use dirstat::specfun::{bessel_ratio, g_ratio, log_bessel_i, log_kummer_m};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::common::oracle::Oracle;
use crate::{ensure, Outcome};

const POINTS: usize = 200;
const LN_I_TOL: f64 = 1e-10;
const RATIO_TOL: f64 = 1e-10;
const LN_M_TOL: f64 = 1e-9;
const G_TOL: f64 = 1e-10;
const CLOSED_FORM_TOL: f64 = 1e-10;

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Relative error, measured against `max(1, |want|)` for log-scale quantities.
fn log_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1.0)
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

pub fn criterion() -> Outcome {
    let mut o = Oracle::new();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = [0.0f64; 4];

    for i in 0..POINTS {
        // half the orders are the p/2 - 1 used by the vMF, the rest arbitrary reals
        let s = if i % 2 == 0 {
            0.5 * rng.random_range(2..=10_000u32) as f64 - 1.0
        } else {
            rng.random_range(0.0..5000.0)
        };
        let x = log_uniform(&mut rng, 1e-3, 2e4);
        let want = o.ln_bessel_i(s, x);
        let got = log_bessel_i(s, x).map_err(|e| e.to_string())?;
        let err = log_err(got, want);
        worst[0] = worst[0].max(err);
        ensure!(err <= LN_I_TOL, "ln I_{s}({x}) = {got}, oracle {want}");
    }

    for _ in 0..POINTS {
        let p = rng.random_range(2..=5000usize);
        let x = log_uniform(&mut rng, 1e-3, 2e4);
        let want = o.bessel_ratio(p, x);
        let got = bessel_ratio(p, x).map_err(|e| e.to_string())?;
        let err = rel_err(got, want);
        worst[1] = worst[1].max(err);
        ensure!(err <= RATIO_TOL, "A_{p}({x}) = {got}, oracle {want}");
    }

    for i in 0..POINTS {
        let (a, c) = kummer_params(&mut rng, i);
        // negative arguments are limited by the oracle's cancellation budget
        let x = if rng.random_bool(0.3) {
            -log_uniform(&mut rng, 1e-3, 2e3)
        } else {
            log_uniform(&mut rng, 1e-3, 1e4)
        };
        let want = o.ln_kummer(a, c, x);
        let got = log_kummer_m(a, c, x).map_err(|e| e.to_string())?;
        let err = log_err(got, want);
        worst[2] = worst[2].max(err);
        ensure!(
            err <= LN_M_TOL,
            "ln M({a}, {c}, {x}) = {got}, oracle {want}"
        );

        let want = o.g_ratio(a, c, x);
        let got = g_ratio(a, c, x).map_err(|e| e.to_string())?;
        let err = rel_err(got, want);
        worst[3] = worst[3].max(err);
        ensure!(err <= G_TOL, "g({a}, {c}; {x}) = {got}, oracle {want}");
    }

    closed_forms()?;
    Ok(format!(
        "{POINTS} points each; worst errors ln I {:.1e}, A_p {:.1e}, ln M {:.1e}, g {:.1e}",
        worst[0], worst[1], worst[2], worst[3]
    ))
}

/// Watson parameters `(1/2, p/2)` for even indices, general `c > a > 0` otherwise.
fn kummer_params(rng: &mut ChaCha8Rng, i: usize) -> (f64, f64) {
    if i % 2 == 0 {
        (0.5, 0.5 * rng.random_range(2..=5000u32) as f64)
    } else {
        let a = rng.random_range(0.05..50.0);
        (a, a + rng.random_range(0.05..2500.0 - a))
    }
}

fn closed_forms() -> Result<(), String> {
    for &k in &[1e-3, 0.1, 1.0, 5.0, 30.0, 300.0, 3000.0] {
        let want = 0.5 * (2.0 / (std::f64::consts::PI * k)).ln() + ln_sinh(k);
        let got = log_bessel_i(0.5, k).map_err(|e| e.to_string())?;
        ensure!(
            log_err(got, want) <= CLOSED_FORM_TOL,
            "ln I_1/2({k}) = {got}, expected {want}"
        );

        let want = if k < 0.1 {
            k / 3.0 - k.powi(3) / 45.0
        } else {
            1.0 / k.tanh() - 1.0 / k
        };
        let got = bessel_ratio(3, k).map_err(|e| e.to_string())?;
        ensure!(
            rel_err(got, want) <= CLOSED_FORM_TOL,
            "A_3({k}) = {got}, expected {want}"
        );

        for &kk in &[k, -k] {
            let got = log_kummer_m(0.7, 0.7, kk).map_err(|e| e.to_string())?;
            ensure!(
                log_err(got, kk) <= CLOSED_FORM_TOL,
                "ln M(a, a, {kk}) = {got}"
            );
        }
    }
    Ok(())
}

fn ln_sinh(k: f64) -> f64 {
    if k > 20.0 {
        k - std::f64::consts::LN_2 + (-(-2.0 * k).exp()).ln_1p()
    } else {
        k.sinh().ln()
    }
}
