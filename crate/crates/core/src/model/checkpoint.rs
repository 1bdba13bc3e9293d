//! JSON checkpoints. Floats are written in shortest round-trip form and
//! parsed exactly, so a save/load cycle reproduces every bit.

use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{MlpParams, SVarMModel};
use crate::varifold::Representation;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub seed: u64,
    pub epochs: usize,
    pub representation: Representation,
    /// Total mass every input was rescaled to during training, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_normalization: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct CheckpointJson {
    dims: Vec<usize>,
    activation: String,
    weights: Vec<Vec<Vec<f64>>>,
    biases: Vec<Vec<f64>>,
    output_bias: Vec<f64>,
    meta: CheckpointMeta,
}

pub(crate) fn to_json(model: &SVarMModel, meta: &CheckpointMeta) -> String {
    let raw = CheckpointJson {
        dims: model.dims().to_vec(),
        activation: "sigmoid".into(),
        weights: model
            .mlp()
            .weights()
            .iter()
            .map(|w| w.rows().into_iter().map(|r| r.to_vec()).collect())
            .collect(),
        biases: model.mlp().biases().iter().map(|b| b.to_vec()).collect(),
        output_bias: model.output_bias().to_vec(),
        meta: meta.clone(),
    };
    serde_json::to_string_pretty(&raw).expect("plain numeric data serializes")
}

pub(crate) fn from_json(text: &str) -> Result<(SVarMModel, CheckpointMeta)> {
    let raw: CheckpointJson = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    if raw.activation != "sigmoid" {
        return Err(Error::Schema(format!("unsupported activation {:?}", raw.activation)));
    }
    let layers = raw.dims.len().saturating_sub(1);
    if raw.dims.len() < 2 || raw.weights.len() != layers || raw.biases.len() != layers {
        return Err(Error::Schema(format!(
            "dims {:?} need {layers} weight matrices and bias vectors, got {} and {}",
            raw.dims,
            raw.weights.len(),
            raw.biases.len()
        )));
    }
    let mut weights = Vec::with_capacity(layers);
    for (l, rows) in raw.weights.iter().enumerate() {
        let (out, inp) = (raw.dims[l + 1], raw.dims[l]);
        if rows.len() != out || rows.iter().any(|r| r.len() != inp) {
            return Err(Error::Schema(format!("layer {l} weights are not {out}x{inp}")));
        }
        weights.push(Array2::from_shape_vec((out, inp), rows.concat()).expect("checked shape"));
    }
    for (l, b) in raw.biases.iter().enumerate() {
        if b.len() != raw.dims[l + 1] {
            return Err(Error::Schema(format!("layer {l} bias has {} entries", b.len())));
        }
    }
    let biases = raw.biases.into_iter().map(Array1::from).collect();
    let mlp = MlpParams::from_parts(weights, biases).map_err(|e| Error::Schema(e.to_string()))?;
    let model = SVarMModel::new(mlp, Array1::from(raw.output_bias)).map_err(|e| Error::Schema(e.to_string()))?;
    Ok((model, raw.meta))
}

pub fn save_checkpoint(model: &SVarMModel, meta: &CheckpointMeta, path: &Path) -> Result<()> {
    std::fs::write(path, to_json(model, meta)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<(SVarMModel, CheckpointMeta)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text)
}
