use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mfgp_core::bench::{NormalizationMode, SelectionScope};
use mfgp_core::featsel::DiscretizationMethod;
use mfgp_core::mfgp::ImputationMode;
use mfgp_core::Method;

#[derive(Debug, Parser)]
#[command(name = "mfgp", version, about = "Multi-fidelity Gaussian process toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one model and write it as JSON with a fit summary.
    Fit(FitArgs),
    /// Predict with a saved model at the rows of a feature CSV.
    Predict(PredictArgs),
    /// Rank features by MRMR and sweep the subset size.
    SelectFeatures(SelectArgs),
    /// Repeated-split comparison of methods across training sizes.
    Benchmark(BenchmarkArgs),
    /// Write a two-level synthetic dataset as CSV.
    MakeSynthetic(SyntheticArgs),
    /// Project the features onto their principal components.
    Pca(PcaArgs),
}

/// Where the data comes from: a CSV file or a named synthetic task.
#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Input CSV with a header row.
    #[arg(long, required_unless_present = "task", conflicts_with = "task")]
    pub data: Option<PathBuf>,
    /// Target column.
    #[arg(long, required_unless_present = "task")]
    pub target: Option<String>,
    /// Fidelity column.
    #[arg(long, default_value = "fidelity")]
    pub fidelity_col: String,
    /// Feature columns; every other column by default.
    #[arg(long, value_delimiter = ',')]
    pub features: Option<Vec<String>>,
    /// Fidelity labels from lowest to highest; needed for non-integer labels.
    #[arg(long, value_delimiter = ',')]
    pub fidelity_order: Option<Vec<String>>,
    /// Synthetic task (linear_link, nonlinear_link) instead of --data.
    #[arg(long)]
    pub task: Option<String>,
    /// Low-fidelity grid size of the synthetic task.
    #[arg(long, default_value_t = 20)]
    pub n_low: usize,
    /// Noise-free test grid size of the synthetic task.
    #[arg(long, default_value_t = 100)]
    pub n_test: usize,
}

#[derive(Debug, Clone, Args)]
pub struct FitOptions {
    /// Optimizer starts per GP.
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    /// One lengthscale shared by every input instead of one per input.
    #[arg(long)]
    pub shared_lengthscale: bool,
    /// Keep the prior mean at zero instead of estimating it.
    #[arg(long)]
    pub zero_mean: bool,
    /// How missing lower-level rows are filled.
    #[arg(long, value_enum, default_value_t = Imputation::Mean)]
    pub imputation: Imputation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Imputation {
    Mean,
    Sample,
}

impl Imputation {
    pub fn mode(self, seed: u64) -> ImputationMode {
        match self {
            Imputation::Mean => ImputationMode::PosteriorMean,
            Imputation::Sample => ImputationMode::Sample { seed },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Discretization {
    EqualFrequency,
    Mdl,
}

impl From<Discretization> for DiscretizationMethod {
    fn from(d: Discretization) -> Self {
        match d {
            Discretization::EqualFrequency => DiscretizationMethod::EqualFrequency,
            Discretization::Mdl => DiscretizationMethod::FayyadIraniMdl,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Normalization {
    AllRows,
    TrainOnly,
}

impl From<Normalization> for NormalizationMode {
    fn from(n: Normalization) -> Self {
        match n {
            Normalization::AllRows => NormalizationMode::AllRows,
            Normalization::TrainOnly => NormalizationMode::TrainOnly,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scope {
    Global,
    PerSplit,
}

impl From<Scope> for SelectionScope {
    fn from(s: Scope) -> Self {
        match s {
            Scope::Global => SelectionScope::Global,
            Scope::PerSplit => SelectionScope::PerSplit,
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, default_value = "largp")]
    pub method: Method,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub fit: FitOptions,
    /// Train on raw values instead of min/max-scaled ones.
    #[arg(long)]
    pub no_normalize: bool,
    /// Model file; the summary goes next to it as `<stem>.summary.json`.
    #[arg(long, default_value = "model.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// CSV holding the model's feature columns.
    #[arg(long)]
    pub input: PathBuf,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_enum, default_value_t = Discretization::EqualFrequency)]
    pub discretization: Discretization,
    #[arg(long, default_value_t = 5)]
    pub n_bins: usize,
    /// Method whose RMSE drives the subset-size sweep.
    #[arg(long, default_value = "largp")]
    pub method: Method,
    /// High-fidelity training size used in the sweep.
    #[arg(long, default_value_t = 6)]
    pub nt: usize,
    #[arg(long, default_value_t = 30)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[command(flatten)]
    pub fit: FitOptions,
    #[arg(long, value_enum, default_value_t = Normalization::AllRows)]
    pub normalization: Normalization,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_delimiter = ',', default_value = "gp-low,gp-high,gp-aug,largp,nargp")]
    pub methods: Vec<Method>,
    #[arg(long, value_delimiter = ',', default_value = "6,10,14")]
    pub nt: Vec<usize>,
    #[arg(long, default_value_t = 30)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses every core. Output does not depend on it.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[command(flatten)]
    pub fit: FitOptions,
    /// Keep only the top N_f MRMR-ranked features.
    #[arg(long)]
    pub n_features: Option<usize>,
    #[arg(long, value_enum, default_value_t = Scope::Global)]
    pub selection: Scope,
    #[arg(long, value_enum, default_value_t = Discretization::EqualFrequency)]
    pub discretization: Discretization,
    #[arg(long, default_value_t = 5)]
    pub n_bins: usize,
    #[arg(long, value_enum, default_value_t = Normalization::AllRows)]
    pub normalization: Normalization,
    /// Report RMSE in target units.
    #[arg(long)]
    pub original_units: bool,
    /// GP-Aug indicator value per level, lowest first.
    #[arg(long, value_delimiter = ',')]
    pub indicator: Option<Vec<f64>>,
    /// Also run leave-one-out over the high-fidelity rows of `--data`.
    #[arg(long, conflicts_with = "task")]
    pub loo: bool,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SyntheticArgs {
    #[arg(long)]
    pub task: String,
    #[arg(long, default_value_t = 20)]
    pub n_low: usize,
    #[arg(long, default_value_t = 8)]
    pub n_high: usize,
    #[arg(long, default_value_t = 0.0)]
    pub noise_low: f64,
    #[arg(long, default_value_t = 0.0)]
    pub noise_high: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "synthetic.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PcaArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, default_value_t = 2)]
    pub components: usize,
    /// Project raw features instead of min/max-scaled ones.
    #[arg(long)]
    pub no_normalize: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}
