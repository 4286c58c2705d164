use std::path::Path;
use std::time::Instant;

use dirstat::data::norm;
use dirstat::estimation::{
    ap_inverse, g_inverse, kappa_banerjee, kappa_bbg, kappa_newton, watson_bounds, EXACT_TOL,
};
use dirstat::eval::{entropy, mutual_information, nmi, Contingency};
use dirstat::mixture::{fit_em, sample_mixture, Component};
use dirstat::partitional::{self, PartitionConfig};
use dirstat::specfun::{bessel_ratio, g_ratio};
use dirstat::synthetic::{self, random_means, sample_bigsim, sample_text_like};
use dirstat::{Dataset, EmConfig, Family, MixtureModel};
use serde::Serialize;

use crate::args::*;
use crate::error::{CliError, CliResult};
use crate::io;

/// Fields written to every model file.
#[derive(Serialize)]
struct ModelFile<'a, C: Serialize, F: Serialize> {
    version: u32,
    generator: String,
    family: Family,
    p: usize,
    #[serde(rename = "K")]
    k: usize,
    weights: &'a [f64],
    components: &'a [Component],
    config: &'a C,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit: Option<F>,
}

fn model_file<'a, C: Serialize, F: Serialize>(
    model: &'a MixtureModel,
    config: &'a C,
    fit: Option<F>,
) -> ModelFile<'a, C, F> {
    ModelFile {
        version: io::FORMAT_VERSION,
        generator: format!("dirstat {}", env!("CARGO_PKG_VERSION")),
        family: model.family(),
        p: model.dim(),
        k: model.k(),
        weights: model.weights(),
        components: model.components(),
        config,
        fit,
    }
}

fn elapsed(start: Instant) -> String {
    format!("{:.3} s", start.elapsed().as_secs_f64())
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct IngestConfig<'a> {
    input: &'a Path,
    normalize: Normalize,
}

pub fn ingest(args: &IngestArgs) -> CliResult<()> {
    let start = Instant::now();
    let table = io::read_table(&args.input)?;
    let p = table.cols;
    let mut values = table.values;
    for (i, row) in values.chunks_exact_mut(p).enumerate() {
        let line = || format!("{}: data row {}", args.input.display(), i + 1);
        match args.normalize {
            Normalize::None => {}
            Normalize::Unit => {
                let n = norm(row);
                if n == 0.0 {
                    return Err(CliError::data(format!("{}: zero-norm row", line())));
                }
                row.iter_mut().for_each(|v| *v /= n);
            }
            Normalize::Pearson => {
                let mean = row.iter().sum::<f64>() / p as f64;
                row.iter_mut().for_each(|v| *v -= mean);
                let n = norm(row);
                if !(n > 1e-300) {
                    return Err(CliError::data(format!(
                        "{}: constant row has zero variance",
                        line()
                    )));
                }
                row.iter_mut().for_each(|v| *v /= n);
            }
        }
    }
    let data = Dataset::from_flat(p, values)
        .map_err(|e| CliError::data(format!("{}: {e}", args.input.display())))?;
    let config = IngestConfig {
        input: &args.input,
        normalize: args.normalize,
    };
    io::write_rows(&args.out, &io::header("ingest", &config), data.rows())?;
    eprintln!(
        "ingest: {} rows of dimension {p} in {}",
        data.len(),
        elapsed(start)
    );
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SampleConfig {
    preset: Option<Preset>,
    family: Family,
    p: usize,
    k: usize,
    n: usize,
    seed: u64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    kappa: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    weights: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    doc_len: Option<(usize, usize)>,
}

fn broadcast(name: &str, values: &[f64], k: usize) -> CliResult<Vec<f64>> {
    match values.len() {
        1 => Ok(vec![values[0]; k]),
        n if n == k => Ok(values.to_vec()),
        n => Err(CliError::usage(format!(
            "--{name} needs 1 or {k} values, got {n}"
        ))),
    }
}

pub fn sample(args: &SampleArgs) -> CliResult<()> {
    let start = Instant::now();
    let custom = args.p.is_some() || !args.kappa.is_empty() || !args.weights.is_empty();
    let (config, model, data, labels) = match args.preset {
        Some(Preset::Bigsim) => {
            if custom || args.n.is_some() || args.k.is_some() || args.family.is_some() {
                return Err(CliError::usage(
                    "the bigsim preset fixes --family, --p, --k, --n, --kappa and --weights",
                ));
            }
            let (model, data, labels) = sample_bigsim(args.seed)?;
            let config = SampleConfig {
                preset: args.preset,
                family: Family::Vmf,
                p: synthetic::BIGSIM_DIM,
                k: 4,
                n: synthetic::BIGSIM_N,
                seed: args.seed,
                kappa: model.kappas(),
                weights: model.weights().to_vec(),
                doc_len: None,
            };
            (config, Some(model), data, labels)
        }
        Some(Preset::TextLike) => {
            if !args.kappa.is_empty() || !args.weights.is_empty() || args.family.is_some() {
                return Err(CliError::usage(
                    "the text-like preset takes only --p (vocabulary), --k, --n and --doc-len",
                ));
            }
            let (p, k, n) = (
                args.p.unwrap_or(1000),
                args.k.unwrap_or(4),
                args.n.unwrap_or(1000),
            );
            let doc_len = (args.doc_len[0], args.doc_len[1]);
            let (data, labels) = sample_text_like(p, k, n, doc_len, args.seed)
                .map_err(|e| CliError::usage(e.to_string()))?;
            let config = SampleConfig {
                preset: args.preset,
                family: Family::Vmf,
                p,
                k,
                n,
                seed: args.seed,
                kappa: Vec::new(),
                weights: Vec::new(),
                doc_len: Some(doc_len),
            };
            (config, None, data, labels)
        }
        None => {
            let family: Family = args.family.unwrap_or(FamilyArg::Vmf).into();
            let p = args
                .p
                .ok_or_else(|| CliError::usage("--p is required without --preset"))?;
            let n = args
                .n
                .ok_or_else(|| CliError::usage("--n is required without --preset"))?;
            let k = args.k.unwrap_or(1);
            if args.kappa.is_empty() {
                return Err(CliError::usage("--kappa is required without --preset"));
            }
            let kappa = broadcast("kappa", &args.kappa, k)?;
            let weights = if args.weights.is_empty() {
                vec![1.0 / k as f64; k]
            } else {
                broadcast("weights", &args.weights, k)?
            };
            let means =
                random_means(p, k, args.seed).map_err(|e| CliError::usage(e.to_string()))?;
            let comps = means
                .into_iter()
                .zip(&kappa)
                .map(|(mu, &kappa)| Component { mu, kappa });
            let model = MixtureModel::new(family, weights.clone(), comps.collect())
                .map_err(|e| CliError::usage(e.to_string()))?;
            let (data, labels) = sample_mixture(&model, n, args.seed)?;
            let config = SampleConfig {
                preset: None,
                family,
                p,
                k,
                n,
                seed: args.seed,
                kappa,
                weights,
                doc_len: None,
            };
            (config, Some(model), data, labels)
        }
    };
    let header = io::header("sample", &config);
    io::write_rows(&args.out.join("data.txt"), &header, data.rows())?;
    io::write_labels(&args.out.join("labels.txt"), &header, &labels)?;
    if let Some(model) = &model {
        io::write_json(
            &args.out.join("model.json"),
            &model_file::<_, ()>(model, &config, None),
        )?;
    }
    eprintln!(
        "sample: {} points of dimension {} in {}",
        data.len(),
        data.dim(),
        elapsed(start)
    );
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct FitConfig<'a> {
    data: &'a Path,
    family: Family,
    k: usize,
    #[serde(flatten)]
    em: EmConfig,
}

#[derive(Serialize)]
struct FitSummary {
    iterations: usize,
    converged: bool,
    log_likelihood: f64,
}

pub fn fit(args: &FitArgs) -> CliResult<()> {
    let start = Instant::now();
    let family: Family = args.family.into();
    check_tol(args.tol)?;
    let data = io::read_dataset(&args.data)?;
    let em = EmConfig {
        assignment: args.assign.into(),
        kappa_method: args.kappa_method.into(),
        max_iters: args.max_iters,
        rel_tol: args.tol,
        seed: args.seed,
        init: Some(args.init.map_or(family.default_init(), Into::into)),
        ..Default::default()
    };
    let report = fit_em(family, &data, args.k, &em)?;
    let config = FitConfig {
        data: &args.data,
        family,
        k: args.k,
        em,
    };
    let header = io::header("fit", &config);
    let summary = FitSummary {
        iterations: report.iterations,
        converged: report.converged,
        log_likelihood: report.log_likelihood(),
    };
    io::write_json(
        &args.out.join("model.json"),
        &model_file(&report.final_model, &config, Some(summary)),
    )?;
    io::write_labels(&args.out.join("labels.txt"), &header, &report.labels)?;
    let records: Vec<Vec<String>> = report
        .log_likelihood_trace
        .iter()
        .enumerate()
        .map(|(i, ll)| vec![(i + 1).to_string(), fmt(*ll)])
        .collect();
    io::write_csv(
        &args.out.join("trace.csv"),
        &header,
        &["iteration", "log_likelihood"],
        &records,
    )?;
    eprintln!(
        "fit: {family} mixture, K = {}, {} iterations, {}, log-likelihood {:.6}, {}",
        args.k,
        report.iterations,
        if report.converged {
            "converged"
        } else {
            "not converged"
        },
        report.log_likelihood(),
        elapsed(start)
    );
    Ok(())
}

fn check_tol(tol: f64) -> CliResult<()> {
    if !(tol >= 0.0) || !tol.is_finite() {
        return Err(CliError::usage(format!(
            "--tol must be a non-negative number, got {tol}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ClusterConfig<'a> {
    data: &'a Path,
    method: Method,
    k: usize,
    seed: u64,
    #[serde(flatten)]
    partition: PartitionConfig,
}

#[derive(Serialize)]
struct CentroidFile<'a> {
    version: u32,
    generator: String,
    method: Method,
    p: usize,
    #[serde(rename = "K")]
    k: usize,
    centroids: &'a [dirstat::UnitVector],
    objective: f64,
    iterations: usize,
    converged: bool,
    config: &'a ClusterConfig<'a>,
}

pub fn cluster(args: &ClusterArgs) -> CliResult<()> {
    let start = Instant::now();
    check_tol(args.tol)?;
    let data = io::read_dataset(&args.data)?;
    let partition = PartitionConfig {
        max_iters: args.max_iters,
        tol: args.tol,
        restarts: args.restarts,
        record_labels: false,
    };
    let part = match args.method {
        Method::Spkmeans => partitional::spkmeans(&data, args.k, args.seed, &partition)?,
        Method::Diametrical => {
            partitional::diametrical_kmeans(&data, args.k, args.seed, &partition)?
        }
    };
    let config = ClusterConfig {
        data: &args.data,
        method: args.method,
        k: args.k,
        seed: args.seed,
        partition,
    };
    let header = io::header("cluster", &config);
    io::write_labels(&args.out.join("labels.txt"), &header, &part.labels)?;
    let file = CentroidFile {
        version: io::FORMAT_VERSION,
        generator: format!("dirstat {}", env!("CARGO_PKG_VERSION")),
        method: args.method,
        p: data.dim(),
        k: args.k,
        centroids: &part.centroids,
        objective: part.objective(),
        iterations: part.iterations,
        converged: part.converged,
        config: &config,
    };
    io::write_json(&args.out.join("centroids.json"), &file)?;
    let records: Vec<Vec<String>> = part
        .objective_trace
        .iter()
        .enumerate()
        .map(|(i, f)| vec![(i + 1).to_string(), fmt(*f)])
        .collect();
    io::write_csv(
        &args.out.join("trace.csv"),
        &header,
        &["iteration", "objective"],
        &records,
    )?;
    eprintln!(
        "cluster: {:?}, K = {}, {} iterations, objective {:.6}, {}",
        args.method,
        args.k,
        part.iterations,
        part.objective(),
        elapsed(start)
    );
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct EvalReport {
    n: u64,
    nmi: f64,
    mutual_information: f64,
    entropy_true: f64,
    entropy_pred: f64,
    contingency: Vec<Vec<u64>>,
}

pub fn eval(args: &EvalArgs) -> CliResult<()> {
    let truth = io::read_labels(&args.truth)?;
    let pred = io::read_labels(&args.pred)?;
    if truth.len() != pred.len() {
        return Err(CliError::data(format!(
            "label files differ in length: {} has {}, {} has {}",
            args.truth.display(),
            truth.len(),
            args.pred.display(),
            pred.len()
        )));
    }
    let table = Contingency::new(&truth, &pred)?;
    let report = EvalReport {
        n: table.n,
        nmi: nmi(&truth, &pred)?,
        mutual_information: mutual_information(&truth, &pred)?,
        entropy_true: entropy(&truth)?,
        entropy_pred: entropy(&pred)?,
        contingency: table
            .counts
            .chunks(table.cols)
            .map(|r| r.to_vec())
            .collect(),
    };
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        );
        return Ok(());
    }
    println!("n                   {}", report.n);
    println!("nmi                 {}", report.nmi);
    println!("mutual_information  {}", report.mutual_information);
    println!("entropy_true        {}", report.entropy_true);
    println!("entropy_pred        {}", report.entropy_pred);
    println!("contingency (rows: true labels, columns: predicted labels)");
    let width = report
        .contingency
        .iter()
        .flatten()
        .map(|c| c.to_string().len())
        .max()
        .unwrap_or(1);
    for (i, row) in report.contingency.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
        println!("  {i:>3} | {}", cells.join(" "));
    }
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct BenchConfig {
    family: Family,
    p: Vec<usize>,
    r: Vec<f64>,
    a: f64,
    timing: bool,
}

/// Median wall time of `f` in nanoseconds over enough calls to fill ~2 ms.
fn time_ns(mut f: impl FnMut()) -> f64 {
    let mut reps = 1usize;
    loop {
        let start = Instant::now();
        for _ in 0..reps {
            f();
        }
        let t = start.elapsed().as_secs_f64();
        if t > 2e-3 || reps >= 1 << 20 {
            let mut samples: Vec<f64> = (0..5)
                .map(|_| {
                    let s = Instant::now();
                    for _ in 0..reps {
                        f();
                    }
                    s.elapsed().as_secs_f64() * 1e9 / reps as f64
                })
                .collect();
            samples.sort_by(f64::total_cmp);
            return samples[2];
        }
        reps *= 2;
    }
}

fn fmt(v: f64) -> String {
    io::fmt_f64(v)
}

pub fn bench_kappa(args: &BenchArgs) -> CliResult<()> {
    let family: Family = args.family.into();
    let r_grid: Vec<f64> = if args.r.is_empty() {
        (1..20).map(|i| i as f64 * 0.05).collect()
    } else {
        args.r.clone()
    };
    if let Some(bad) = r_grid.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
        return Err(CliError::usage(format!(
            "grid value r = {bad} is outside (0, 1)"
        )));
    }
    if let Some(bad) = args.p.iter().find(|&&p| p < 2) {
        return Err(CliError::usage(format!(
            "grid dimension p = {bad} must be at least 2"
        )));
    }
    if !(args.a > 0.0) {
        return Err(CliError::usage(format!(
            "--a must be positive, got {}",
            args.a
        )));
    }
    let config = BenchConfig {
        family,
        p: args.p.clone(),
        r: r_grid.clone(),
        a: args.a,
        timing: args.timing,
    };
    let mut records = Vec::new();
    let columns: Vec<&str> = match family {
        Family::Vmf => {
            let mut c = vec![
                "p",
                "r",
                "banerjee",
                "banerjee_residual",
                "newton2",
                "newton2_residual",
                "exact",
                "exact_residual",
            ];
            if args.timing {
                c.extend(["banerjee_ns", "newton2_ns", "exact_ns"]);
            }
            for &p in &args.p {
                for &r in &r_grid {
                    let res = |k: f64| -> CliResult<f64> { Ok((bessel_ratio(p, k)? - r).abs()) };
                    let b = kappa_banerjee(r, p)?;
                    let n2 = kappa_newton(r, p, 2)?;
                    let ex = ap_inverse(r, p, EXACT_TOL)?;
                    let mut rec = vec![
                        p.to_string(),
                        fmt(r),
                        fmt(b),
                        fmt(res(b)?),
                        fmt(n2),
                        fmt(res(n2)?),
                        fmt(ex),
                        fmt(res(ex)?),
                    ];
                    if args.timing {
                        rec.push(fmt(time_ns(|| {
                            std::hint::black_box(kappa_banerjee(std::hint::black_box(r), p).ok());
                        })));
                        rec.push(fmt(time_ns(|| {
                            std::hint::black_box(kappa_newton(std::hint::black_box(r), p, 2).ok());
                        })));
                        rec.push(fmt(time_ns(|| {
                            std::hint::black_box(
                                ap_inverse(std::hint::black_box(r), p, EXACT_TOL).ok(),
                            );
                        })));
                    }
                    records.push(rec);
                }
            }
            c
        }
        Family::Watson => {
            let mut c = vec![
                "a",
                "c",
                "r",
                "bbg",
                "bbg_residual",
                "lower",
                "lower_residual",
                "mid",
                "mid_residual",
                "upper",
                "upper_residual",
                "root",
                "root_residual",
            ];
            if args.timing {
                c.extend(["bbg_ns", "bounds_ns", "root_ns"]);
            }
            let a = args.a;
            for &p in &args.p {
                let cc = 0.5 * p as f64;
                if !(cc > a) {
                    return Err(CliError::usage(format!(
                        "need c = p/2 > a, got p = {p}, a = {a}"
                    )));
                }
                let mut rs = r_grid.clone();
                if args.include_null {
                    rs.push(a / cc);
                }
                for &r in &rs {
                    let res = |k: f64| -> CliResult<f64> { Ok((g_ratio(a, cc, k)? - r).abs()) };
                    let bbg = kappa_bbg(a, cc, r)?;
                    let bounds = watson_bounds(a, cc, r)?;
                    let root = g_inverse(a, cc, r, EXACT_TOL)?;
                    let (l, m, u) = (bounds.lower, bounds.mid, bounds.upper);
                    let mut rec = vec![
                        fmt(a),
                        fmt(cc),
                        fmt(r),
                        fmt(bbg),
                        fmt(res(bbg)?),
                        fmt(l),
                        fmt(res(l)?),
                        fmt(m),
                        fmt(res(m)?),
                        fmt(u),
                        fmt(res(u)?),
                        fmt(root),
                        fmt(res(root)?),
                    ];
                    if args.timing {
                        rec.push(fmt(time_ns(|| {
                            std::hint::black_box(kappa_bbg(a, cc, std::hint::black_box(r)).ok());
                        })));
                        rec.push(fmt(time_ns(|| {
                            std::hint::black_box(
                                watson_bounds(a, cc, std::hint::black_box(r)).ok(),
                            );
                        })));
                        rec.push(fmt(time_ns(|| {
                            std::hint::black_box(
                                g_inverse(a, cc, std::hint::black_box(r), EXACT_TOL).ok(),
                            );
                        })));
                    }
                    records.push(rec);
                }
            }
            c
        }
    };
    let header = io::header("bench-kappa", &config);
    match &args.out {
        Some(path) => io::write_csv(path, &header, &columns, &records)?,
        None => print!("{header}{}", io::csv_body(&columns, &records)),
    }
    Ok(())
}
