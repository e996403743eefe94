//! Versioned JSON persistence for fitted models.
//!
//! JSON keeps the file human-inspectable and schema-evolvable; serde_json
//! prints floats in shortest round-trip form, so save/load reproduces
//! predictions bitwise.

use serde::{Deserialize, Serialize};

use csdsvm::{CensoringModel, FittedModel, KernelSpec};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CensoringDescriptor {
    Uniform { tau: f64, floor: f64 },
    Kde { samples: Vec<f64>, bandwidth: f64, floor: f64 },
}

impl CensoringDescriptor {
    pub fn from_model(model: &CensoringModel) -> Option<Self> {
        if let Some(samples) = model.kde_samples() {
            return Some(CensoringDescriptor::Kde {
                samples: samples.to_vec(),
                bandwidth: model.bandwidth().unwrap(),
                floor: model.floor(),
            });
        }
        match model.known_density() {
            Some(csdsvm::KnownDensity::Uniform { tau }) => {
                Some(CensoringDescriptor::Uniform { tau: *tau, floor: model.floor() })
            }
            _ => None,
        }
    }

    pub fn to_model(&self) -> Result<CensoringModel, csdsvm::Error> {
        match self {
            CensoringDescriptor::Uniform { tau, floor } => {
                CensoringModel::known_uniform(*tau, *floor)
            }
            CensoringDescriptor::Kde { samples, bandwidth, floor } => {
                CensoringModel::from_kde_parts(samples.clone(), *bandwidth, *floor)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub n: usize,
    pub d: usize,
    pub tau: f64,
    pub data_digest: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub kernel: KernelSpec,
    pub support: Vec<Vec<f64>>,
    pub alpha: Vec<f64>,
    pub intercept: Option<f64>,
    pub lambda: f64,
    pub censoring: CensoringDescriptor,
    pub meta: TrainingMeta,
}

impl ModelFile {
    pub fn new(model: &FittedModel, censoring: CensoringDescriptor, meta: TrainingMeta) -> Self {
        ModelFile {
            format_version: FORMAT_VERSION,
            kernel: model.kernel,
            support: model.support.clone(),
            alpha: model.alpha.clone(),
            intercept: model.intercept,
            lambda: model.lambda,
            censoring,
            meta,
        }
    }

    pub fn to_fitted(&self) -> FittedModel {
        FittedModel {
            kernel: self.kernel,
            support: self.support.clone(),
            alpha: self.alpha.clone(),
            intercept: self.intercept,
            lambda: self.lambda,
            train_n: self.meta.n,
            censoring: match &self.censoring {
                CensoringDescriptor::Uniform { tau, .. } => format!("known-uniform(tau={tau})"),
                CensoringDescriptor::Kde { samples, bandwidth, .. } => {
                    format!("kde(n={},h={bandwidth})", samples.len())
                }
            },
        }
    }
}

/// FNV-1a digest of the raw training bytes, hex encoded.
pub fn data_digest(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}
