use std::io::Write;
use std::path::{Path, PathBuf};

use mfgp_core::bench::{ExperimentData, SyntheticTask};
use mfgp_core::data::{load_csv, CsvSchema};
use mfgp_core::featsel::DiscretizationMethod;
use mfgp_core::{Method, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::args::SourceArgs;

/// Input of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Source {
    Csv { path: PathBuf, schema: CsvSchema },
    Synthetic { task: String, n_low: usize, n_test: usize },
    Model { model: PathBuf, input: PathBuf },
}

/// Everything that determines a run's output, resolved before it starts.
/// `--jobs` is left out because it never changes the output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub source: Source,
    pub methods: Vec<Method>,
    pub n_t: Vec<usize>,
    pub repeats: Option<usize>,
    pub n_features: Option<usize>,
    pub discretization: Option<DiscretizationMethod>,
    pub seed: u64,
    pub output: PathBuf,
    /// Command-specific settings.
    pub options: serde_json::Value,
}

impl RunConfig {
    pub fn new(command: &str, source: Source, seed: u64, output: PathBuf) -> Self {
        RunConfig {
            command: command.into(),
            source,
            methods: Vec::new(),
            n_t: Vec::new(),
            repeats: None,
            n_features: None,
            discretization: None,
            seed,
            output,
            options: serde_json::Value::Null,
        }
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("run config serializes")
    }

    /// `#` lines carrying the version, input hash and this configuration.
    pub fn write_preamble<W: Write>(&self, out: &mut W, input_sha256: &str) -> Result<()> {
        writeln!(out, "# mfgp {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(out, "# input_sha256: {input_sha256}")?;
        writeln!(out, "# run_config: {}", serde_json::to_string(self)?)?;
        Ok(())
    }
}

impl SourceArgs {
    pub fn source(&self) -> Source {
        match (&self.data, &self.task) {
            (Some(path), _) => Source::Csv { path: path.clone(), schema: self.schema() },
            (None, task) => Source::Synthetic {
                task: task.clone().unwrap_or_default(),
                n_low: self.n_low,
                n_test: self.n_test,
            },
        }
    }

    fn schema(&self) -> CsvSchema {
        CsvSchema {
            target: self.target.clone().unwrap_or_default(),
            fidelity: self.fidelity_col.clone(),
            features: self.features.clone(),
            fidelity_order: self.fidelity_order.clone(),
        }
    }

    /// Loads the CSV or generates the synthetic task (seeded by `seed`).
    pub fn load(&self, seed: u64) -> Result<ExperimentData> {
        match (&self.data, &self.task) {
            (Some(path), _) => Ok(ExperimentData::from_dataset(load_csv(path, &self.schema())?)),
            (None, Some(task)) => {
                ExperimentData::synthetic(&SyntheticTask::by_name(task)?, self.n_low, self.n_test, seed)
            }
            (None, None) => Err(mfgp_core::Error::Config("either --data or --task is required".into())),
        }
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(std::fs::read(path)?)))
}

pub fn sha256_many(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0u8]);
    }
    hex::encode(h.finalize())
}
