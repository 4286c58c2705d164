use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dirstat::{Assignment, Family, InitStrategy, KappaMethod};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "dirstat",
    version,
    about = "Directional statistics on the unit sphere"
)]
pub struct Cli {
    /// Worker threads for data-parallel steps (default: all cores). Results do
    /// not depend on this value.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalize a table of reals into a dataset of unit rows.
    Ingest(IngestArgs),
    /// Draw a synthetic dataset with ground-truth labels.
    Sample(SampleArgs),
    /// Fit a vMF or Watson mixture by EM.
    Fit(FitArgs),
    /// Run spherical or diametrical k-means.
    Cluster(ClusterArgs),
    /// Compare two labelings (NMI, mutual information, contingency table).
    Eval(EvalArgs),
    /// Tabulate concentration estimators and their residuals over a grid.
    BenchKappa(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalize {
    /// Divide each row by its Euclidean norm.
    Unit,
    /// Center each row, then divide by its norm.
    Pearson,
    /// Keep rows as they are; they must already have unit norm.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Four vMF components in 1000 dimensions, 5000 points.
    Bigsim,
    /// Sparse non-negative unit rows resembling normalized term counts.
    TextLike,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Vmf,
    Watson,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Vmf => Family::Vmf,
            FamilyArg::Watson => Family::Watson,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AssignArg {
    Soft,
    Hard,
}

impl From<AssignArg> for Assignment {
    fn from(a: AssignArg) -> Self {
        match a {
            AssignArg::Soft => Assignment::Soft,
            AssignArg::Hard => Assignment::Hard,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KappaArg {
    Banerjee,
    Newton2,
    Exact,
}

impl From<KappaArg> for KappaMethod {
    fn from(k: KappaArg) -> Self {
        match k {
            KappaArg::Banerjee => KappaMethod::Banerjee,
            KappaArg::Newton2 => KappaMethod::Newton2,
            KappaArg::Exact => KappaMethod::Exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Spkmeans,
    Diametrical,
    Random,
}

impl From<InitArg> for InitStrategy {
    fn from(i: InitArg) -> Self {
        match i {
            InitArg::Spkmeans => InitStrategy::Spkmeans,
            InitArg::Diametrical => InitStrategy::Diametrical,
            InitArg::Random => InitStrategy::Random,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Cosine similarity, centroids are normalized resultants.
    Spkmeans,
    /// Squared cosine, centroids are leading eigenvectors.
    Diametrical,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Input table: one row per line, reals separated by whitespace or commas.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Normalize::Unit)]
    pub normalize: Normalize,
    /// Output dataset file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Distribution family of a custom mixture [default: vmf].
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    /// Dimension (vocabulary size for text-like).
    #[arg(long)]
    pub p: Option<usize>,
    /// Number of components [default: 1; 4 for text-like].
    #[arg(long)]
    pub k: Option<usize>,
    /// Number of points.
    #[arg(long)]
    pub n: Option<usize>,
    /// Concentrations, one per component or a single shared value.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub kappa: Vec<f64>,
    /// Mixing weights, one per component [default: uniform].
    #[arg(long, value_delimiter = ',')]
    pub weights: Vec<f64>,
    /// Document length range of the text-like preset.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [20, 200])]
    pub doc_len: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory (data.txt, labels.txt, model.json).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Dataset of unit rows.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = AssignArg::Soft)]
    pub assign: AssignArg,
    #[arg(long, value_enum, default_value_t = KappaArg::Newton2)]
    pub kappa_method: KappaArg,
    /// Initializer [default: spkmeans for vmf, diametrical for watson].
    #[arg(long, value_enum)]
    pub init: Option<InitArg>,
    /// Relative log-likelihood change that counts as converged.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory (model.json, labels.txt, trace.csv).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Spkmeans)]
    pub method: Method,
    #[arg(long)]
    pub k: usize,
    /// Relative objective gain below which iteration stops.
    #[arg(long, default_value_t = 0.0)]
    pub tol: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
    /// Independent seedings; the best objective is kept.
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory (labels.txt, centroids.json, trace.csv).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub pred: PathBuf,
    /// Print a JSON report instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// Dimensions; Watson rows use a = --a and c = p / 2.
    #[arg(long, value_delimiter = ',', default_values_t = [3, 10, 100, 1000])]
    pub p: Vec<usize>,
    /// Mean resultant lengths (vmf) or scatter eigenvalues (watson) in (0, 1)
    /// [default: 0.05, 0.10, ..., 0.95].
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub r: Vec<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub a: f64,
    /// Add the row r = a / c for each Watson dimension.
    #[arg(long)]
    pub include_null: bool,
    /// Add per-estimator timing columns (nanoseconds, not reproducible).
    #[arg(long)]
    pub timing: bool,
    /// CSV output file [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}
