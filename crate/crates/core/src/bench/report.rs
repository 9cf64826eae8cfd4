use serde::{Deserialize, Serialize};

use super::{indicator_values, ExperimentConfig, ExperimentData, Method};
use crate::error::Result;
use crate::seed::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub repeat: usize,
    pub seed: u64,
    pub rmse: Option<f64>,
    pub error: Option<String>,
}

impl SeedOutcome {
    pub(crate) fn from_result(repeat: usize, seed: u64, result: Result<f64>) -> Self {
        match result {
            Ok(v) => SeedOutcome { repeat, seed, rmse: Some(v), error: None },
            Err(e) => {
                log::warn!("repeat {repeat} (seed {seed}) failed: {e}");
                SeedOutcome { repeat, seed, rmse: None, error: Some(e.to_string()) }
            }
        }
    }
}

/// Summary of one `(method, N_t)` cell over all repeats. Failed repeats are
/// excluded from the mean and std.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub method: Method,
    pub n_t: usize,
    pub mean_rmse: Option<f64>,
    /// Population standard deviation; 0 for a single successful repeat.
    pub std_rmse: Option<f64>,
    pub n_failures: usize,
    pub outcomes: Vec<SeedOutcome>,
}

impl CellReport {
    pub fn new(method: Method, n_t: usize, outcomes: Vec<SeedOutcome>) -> Self {
        let values = Self::successes(&outcomes);
        let (mean_rmse, std_rmse) = summarize(&values);
        CellReport {
            method,
            n_t,
            mean_rmse,
            std_rmse,
            n_failures: outcomes.len() - values.len(),
            outcomes,
        }
    }

    fn successes(outcomes: &[SeedOutcome]) -> Vec<f64> {
        outcomes.iter().filter_map(|o| o.rmse).collect()
    }

    pub fn rmses(&self) -> Vec<f64> {
        Self::successes(&self.outcomes)
    }
}

fn summarize(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let mean = crate::numerics::mean(values);
    (Some(mean), Some(crate::numerics::variance(values).sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub toolkit_version: String,
    pub data: String,
    pub data_sha256: String,
    pub config: ExperimentConfig,
    /// Seed of repeat `i`, shared by every method and N_t.
    pub repeat_seeds: Vec<u64>,
    pub seed_derivation: String,
    pub indicator: Vec<f64>,
    /// Columns kept by global feature selection.
    pub selected_features: Option<Vec<usize>>,
    /// Caller-supplied run configuration, embedded verbatim.
    pub run_config: Option<serde_json::Value>,
}

impl ReportMetadata {
    pub(crate) fn new(data: &ExperimentData, config: &ExperimentConfig, selected_features: Option<Vec<usize>>) -> Self {
        ReportMetadata {
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            data: data.description.clone(),
            data_sha256: data.content_hash(),
            config: config.clone(),
            repeat_seeds: (0..config.repeats).map(|i| derive_seed(config.seed, i as u64)).collect(),
            seed_derivation: "repeat i: splitmix64(splitmix64(seed) ^ i * 0x9E3779B97F4A7C15); split draw and model fit share it".into(),
            indicator: indicator_values(config, data.dataset.n_levels()).unwrap_or_default(),
            selected_features,
            run_config: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub metadata: ReportMetadata,
    pub cells: Vec<CellReport>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ExperimentReport {
    pub fn cell(&self, method: Method, n_t: usize) -> Option<&CellReport> {
        self.cells.iter().find(|c| c.method == method && c.n_t == n_t)
    }

    pub fn mean_rmse(&self, method: Method, n_t: usize) -> Option<f64> {
        self.cell(method, n_t).and_then(|c| c.mean_rmse)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `method,n_t,mean_rmse,std_rmse,n_failures` preceded by `#` lines that
    /// carry the version, data hash and configuration.
    pub fn write_summary_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        let m = &self.metadata;
        writeln!(out, "# mfgp benchmark report, version {}", m.toolkit_version)?;
        writeln!(out, "# data: {}", m.data)?;
        writeln!(out, "# data_sha256: {}", m.data_sha256)?;
        writeln!(out, "# config: {}", serde_json::to_string(&m.config)?)?;
        if let Some(rc) = &m.run_config {
            writeln!(out, "# run_config: {}", serde_json::to_string(rc)?)?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["method", "n_t", "mean_rmse", "std_rmse", "n_failures"])?;
        for c in &self.cells {
            w.write_record([
                c.method.name().to_string(),
                c.n_t.to_string(),
                opt(c.mean_rmse),
                opt(c.std_rmse),
                c.n_failures.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
