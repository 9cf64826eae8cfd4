//! Versioned JSON document for trained models.

use serde::{Deserialize, Serialize};

use crate::bench::{Method, TrainedModel};
use crate::data::NormalizationStats;
use crate::error::{Error, Result};
use crate::gp::PredictiveDistribution;
use crate::numerics::DenseMatrix;

pub const MODEL_FORMAT: &str = "mfgp-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEnvelope {
    pub format: String,
    pub version: u32,
    pub kind: Method,
    pub feature_names: Vec<String>,
    pub target_name: String,
    /// Stats used to normalize the training data; predictions are mapped back
    /// through them.
    pub normalization: Option<NormalizationStats>,
    pub model: TrainedModel,
    /// Free-form record of how the model was produced.
    pub provenance: serde_json::Value,
}

impl ModelEnvelope {
    pub fn new(
        kind: Method,
        model: TrainedModel,
        feature_names: Vec<String>,
        target_name: String,
        normalization: Option<NormalizationStats>,
        provenance: serde_json::Value,
    ) -> Self {
        ModelEnvelope {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            kind,
            feature_names,
            target_name,
            normalization,
            model,
            provenance,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("format").and_then(|f| f.as_str()) {
            Some(MODEL_FORMAT) => {}
            other => return Err(Error::ModelFormat(format!("format {other:?}, expected {MODEL_FORMAT:?}"))),
        }
        match value.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(MODEL_VERSION) => {}
            other => return Err(Error::ModelFormat(format!("version {other:?}, expected {MODEL_VERSION}"))),
        }
        let envelope: ModelEnvelope = serde_json::from_value(value)?;
        if envelope.model.input_dim() != envelope.feature_names.len() {
            return Err(Error::ModelFormat("feature names do not match the model input dimension".into()));
        }
        Ok(envelope)
    }

    /// Predicts at raw (unnormalized) inputs; mean and variance are returned
    /// in target units when normalization stats are present.
    pub fn predict(&self, x: &DenseMatrix) -> Result<PredictiveDistribution> {
        match &self.normalization {
            Some(stats) => {
                let p = self.model.predict(&stats.transform_features(x)?)?;
                Ok(PredictiveDistribution {
                    mean: stats.inverse_target(&p.mean),
                    variance: stats.inverse_target_variance(&p.variance),
                })
            }
            None => self.model.predict(x),
        }
    }
}
