//! `crsom-model/1` model files.
//!
//! Floats are written in shortest round-trip form and parsed exactly, so a
//! reloaded network is bitwise identical to the saved one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Network, NetworkConfig, OutputLayer};
use crate::preprocess::Preprocessor;
use crate::topo::{GridShape, TopographicLayer};

pub const MODEL_SCHEMA: &str = "crsom-model/1";

/// A network together with what is needed to apply it to raw data.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub network: Network,
    pub preprocessor: Preprocessor,
    pub class_names: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct LayerRecord {
    grid: GridShape,
    input_dim: usize,
    reference_vectors: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct OutputRecord {
    /// One row per hidden node of the last layer.
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    schema: String,
    rng_seed: u64,
    config: NetworkConfig,
    class_names: Vec<String>,
    preprocessing: Preprocessor,
    hidden_layers: Vec<LayerRecord>,
    output_layer: OutputRecord,
}

impl TrainedModel {
    pub fn to_json(&self) -> Result<String> {
        let net = &self.network;
        let file = ModelFile {
            schema: MODEL_SCHEMA.to_string(),
            rng_seed: net.config().rng_seed,
            config: net.config().clone(),
            class_names: self.class_names.clone(),
            preprocessing: self.preprocessor.clone(),
            hidden_layers: net
                .hidden_layers()
                .iter()
                .map(|l| LayerRecord {
                    grid: l.shape(),
                    input_dim: l.input_dim(),
                    reference_vectors: l.weights().chunks_exact(l.input_dim()).map(<[f64]>::to_vec).collect(),
                })
                .collect(),
            output_layer: OutputRecord {
                weights: net
                    .output_layer()
                    .weights()
                    .chunks_exact(net.output_layer().num_classes())
                    .map(<[f64]>::to_vec)
                    .collect(),
                biases: net.output_layer().biases().to_vec(),
            },
        };
        let mut text = serde_json::to_string_pretty(&file)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.schema != MODEL_SCHEMA {
            return Err(Error::Format(format!("unsupported model schema {:?}", file.schema)));
        }
        if file.rng_seed != file.config.rng_seed {
            return Err(Error::Format("rng_seed disagrees with config".into()));
        }
        let hidden = file
            .hidden_layers
            .into_iter()
            .map(|l| {
                if l.reference_vectors.iter().any(|r| r.len() != l.input_dim) {
                    return Err(Error::Format("ragged reference vectors".into()));
                }
                TopographicLayer::from_weights(l.grid, l.input_dim, l.reference_vectors.concat())
            })
            .collect::<Result<Vec<_>>>()?;
        let classes = file.config.num_classes;
        if file.output_layer.weights.iter().any(|r| r.len() != classes) {
            return Err(Error::Format("ragged output weights".into()));
        }
        let rows = file.output_layer.weights.len();
        let output = OutputLayer::from_parts(
            rows,
            classes,
            file.output_layer.weights.concat(),
            file.output_layer.biases,
        )?;
        Error::check_dim("class names", classes, file.class_names.len())?;
        Ok(TrainedModel {
            network: Network::from_parts(file.config, hidden, output)?,
            preprocessor: file.preprocessing,
            class_names: file.class_names,
        })
    }
}
