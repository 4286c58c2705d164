//! Criteria 2 and 3: Watson bound orderings and vMF concentration estimates.

use dirstat::estimation::{g_inverse, kappa_banerjee, kappa_newton, watson_bounds};
use dirstat::specfun::bessel_ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{ensure, Outcome};

const TRIPLES: usize = 500;
const ROOT_TOL: f64 = 1e-12;
const BANERJEE_MAX_RESIDUAL: f64 = 0.05;

pub fn bound_ordering() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut above, mut below) = (0, 0);
    let mut tightest = f64::INFINITY;
    for i in 0..TRIPLES {
        let p = rng.random_range(3..=2000u32);
        let (a, c) = (0.5, 0.5 * p as f64);
        let r = loop {
            let r = stratified_r(&mut rng, i, a / c);
            if r > 0.0 && r < 1.0 && r != a / c {
                break r;
            }
        };
        let b = watson_bounds(a, c, r).map_err(|e| e.to_string())?;
        let k = g_inverse(a, c, r, ROOT_TOL).map_err(|e| format!("p={p} r={r}: {e}"))?;
        if r > a / c {
            above += 1;
            ensure!(
                b.lower < k && k < b.mid && b.mid < b.upper,
                "p={p} r={r}: expected L < k < B < U, got L={} k={k} B={} U={}",
                b.lower,
                b.mid,
                b.upper
            );
            tightest = tightest.min((k - b.lower).min(b.mid - k) / k.abs());
        } else {
            below += 1;
            ensure!(
                b.lower < b.mid && b.mid < k && k < b.upper,
                "p={p} r={r}: expected L < B < k < U, got L={} B={} k={k} U={}",
                b.lower,
                b.mid,
                b.upper
            );
            tightest = tightest.min((k - b.mid).min(b.upper - k) / k.abs());
        }
    }
    for p in [3u32, 10, 100, 2000] {
        let c = 0.5 * p as f64;
        let k = g_inverse(0.5, c, 0.5 / c, ROOT_TOL).map_err(|e| e.to_string())?;
        ensure!(k == 0.0, "kappa(a/c) = {k} for p = {p}");
    }
    Ok(format!(
        "{TRIPLES} triples ({above} with r > a/c, {below} below), no violations; \
         smallest relative gap between root and a bound {tightest:.1e}; kappa(a/c) = 0"
    ))
}

/// `r` drawn from one of four strata in turn: uniform above `a/c`, uniform
/// below it, log-uniformly close to 1, and log-uniformly close to 0.
///
/// The last stratum stops at `1e-3 a/c`. Near `r = 0` the root sits about
/// `6 r^2` (relative) below `U`, which for `r` around `1e-8` is already under
/// the spacing of doubles, so `k < U` is no longer representable.
fn stratified_r(rng: &mut ChaCha8Rng, i: usize, ac: f64) -> f64 {
    let log_u = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| rng.random_range(lo.ln()..hi.ln()).exp();
    match i % 4 {
        0 => rng.random_range(ac..1.0),
        1 => rng.random_range(0.0..ac),
        2 => 1.0 - log_u(rng, 1e-6, 1e-1),
        _ => ac * log_u(rng, 1e-3, 1.0),
    }
}

pub fn approximation_quality() -> Outcome {
    let mut worst_banerjee = 0.0f64;
    for p in [10usize, 100, 1000] {
        for i in 1..=19 {
            let r = 0.05 * i as f64;
            let kb = kappa_banerjee(r, p).map_err(|e| e.to_string())?;
            let kn = kappa_newton(r, p, 2).map_err(|e| e.to_string())?;
            let rb = (bessel_ratio(p, kb).map_err(|e| e.to_string())? - r).abs();
            let rn = (bessel_ratio(p, kn).map_err(|e| e.to_string())? - r).abs();
            ensure!(
                rn <= rb,
                "p={p} r={r}: Newton-2 residual {rn:e} > Banerjee {rb:e}"
            );
            ensure!(
                rb <= BANERJEE_MAX_RESIDUAL,
                "p={p} r={r}: Banerjee residual {rb:e}"
            );
            worst_banerjee = worst_banerjee.max(rb);
        }
    }
    Ok(format!(
        "57 grid points; worst Banerjee residual {worst_banerjee:.2e}"
    ))
}
