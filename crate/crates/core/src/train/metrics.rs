use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dataset::{Label, LabelKind, LabeledDataset};
use crate::model::{FeatureSet, SVarMModel};
use crate::so3::{geodesic_distance_so3, project_to_so3, RotationMatrix};
use crate::{Error, Result};

/// Training curve and final evaluation numbers. Only fields relevant to the
/// task are set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metrics {
    pub epoch_loss: Vec<f64>,
    pub epoch_accuracy: Vec<f64>,
    pub accuracy: Option<f64>,
    pub mean_error: Option<f64>,
    pub r2: Option<f64>,
    pub wall_clock_secs: f64,
}

impl Metrics {
    /// Per-epoch CSV: `epoch,loss[,accuracy]`.
    pub fn curve_csv(&self) -> String {
        let with_acc = self.epoch_accuracy.len() == self.epoch_loss.len() && !self.epoch_accuracy.is_empty();
        let mut out = String::from(if with_acc { "epoch,loss,accuracy\n" } else { "epoch,loss\n" });
        for (e, loss) in self.epoch_loss.iter().enumerate() {
            if with_acc {
                writeln!(out, "{},{loss},{}", e + 1, self.epoch_accuracy[e]).unwrap();
            } else {
                writeln!(out, "{},{loss}", e + 1).unwrap();
            }
        }
        out
    }

    /// Final metrics as a one-row CSV: `accuracy` or `mean_error,r2`.
    pub fn summary_csv(&self) -> String {
        let mut out = String::new();
        if let Some(a) = self.accuracy {
            writeln!(out, "accuracy\n{a}").unwrap();
        } else {
            let f = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
            writeln!(out, "mean_error,r2\n{},{}", f(self.mean_error), f(self.r2)).unwrap();
        }
        out
    }
}

/// How regression predictions are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegressionKind {
    /// Scalar angle in radians; error reported in degrees.
    Angle,
    /// Nine matrix entries, projected onto SO(3); geodesic error in degrees.
    Rotation9,
    /// Plain scalar; error in label units.
    Scalar,
}

impl FromStr for RegressionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "angle" => Ok(RegressionKind::Angle),
            "rotation9" => Ok(RegressionKind::Rotation9),
            "scalar" => Ok(RegressionKind::Scalar),
            _ => Err(Error::Config(format!("unknown regression kind {s:?}"))),
        }
    }
}

/// What a dataset is scored on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Classification,
    Regression(RegressionKind),
}

/// `1 − SS_res / SS_tot`. A constant truth scores 1 when matched exactly and
/// 0 otherwise.
pub fn r_squared(predicted: &[f64], truth: &[f64]) -> f64 {
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    let ss_res: f64 = predicted.iter().zip(truth).map(|(p, t)| (p - t).powi(2)).sum();
    let ss_tot: f64 = truth.iter().map(|t| (t - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return if ss_res == 0.0 { 1.0 } else { 0.0 };
    }
    1.0 - ss_res / ss_tot
}

pub(crate) fn predict_all(model: &SVarMModel, dataset: &LabeledDataset) -> Result<Vec<Vec<f64>>> {
    if dataset.feature_dim() != model.input_dim() {
        return Err(Error::ShapeMismatch(format!(
            "dataset has {} features per support, model expects {}",
            dataset.feature_dim(),
            model.input_dim()
        )));
    }
    dataset
        .items()
        .iter()
        .map(|it| model.output(&FeatureSet::from_measure(&it.measure)))
        .collect()
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

pub fn evaluate_classification(model: &SVarMModel, dataset: &LabeledDataset) -> Result<Metrics> {
    if dataset.label_kind() != LabelKind::Class {
        return Err(Error::KindMismatch("classification needs class labels".into()));
    }
    let classes = dataset.num_classes().unwrap_or(0);
    if model.output_dim() != classes {
        return Err(Error::Schema(format!(
            "model has {} outputs but the dataset has {classes} classes",
            model.output_dim()
        )));
    }
    let preds = predict_all(model, dataset)?;
    let correct = preds
        .iter()
        .zip(dataset.items())
        .filter(|(p, it)| it.label == Label::Class(argmax(p)))
        .count();
    Ok(Metrics {
        accuracy: Some(correct as f64 / dataset.len() as f64),
        ..Metrics::default()
    })
}

pub fn evaluate_regression(model: &SVarMModel, dataset: &LabeledDataset, kind: RegressionKind) -> Result<Metrics> {
    let expected = match kind {
        RegressionKind::Angle | RegressionKind::Scalar => LabelKind::Scalar,
        RegressionKind::Rotation9 => LabelKind::Rotation,
    };
    if dataset.label_kind() != expected {
        return Err(Error::KindMismatch(format!("{kind:?} evaluation needs {expected:?} labels")));
    }
    let width = if expected == LabelKind::Rotation { 9 } else { 1 };
    if model.output_dim() != width {
        return Err(Error::Schema(format!(
            "model has {} outputs, {kind:?} needs {width}",
            model.output_dim()
        )));
    }
    let preds = predict_all(model, dataset)?;
    let (errors, fitted, truth): (Vec<f64>, Vec<f64>, Vec<f64>) = match kind {
        RegressionKind::Angle | RegressionKind::Scalar => {
            let unit = if kind == RegressionKind::Angle { 180.0 / std::f64::consts::PI } else { 1.0 };
            let truth: Vec<f64> = dataset
                .items()
                .iter()
                .map(|it| match it.label {
                    Label::Scalar(y) => y,
                    _ => unreachable!("kind checked"),
                })
                .collect();
            let fitted: Vec<f64> = preds.iter().map(|p| p[0]).collect();
            let errors = fitted.iter().zip(&truth).map(|(p, t)| (p - t).abs() * unit).collect();
            (errors, fitted, truth)
        }
        RegressionKind::Rotation9 => {
            let id = RotationMatrix::identity();
            let mut errors = Vec::with_capacity(preds.len());
            let mut fitted = Vec::with_capacity(preds.len());
            let mut truth = Vec::with_capacity(preds.len());
            for (p, it) in preds.iter().zip(dataset.items()) {
                let Label::Rotation(r) = &it.label else {
                    unreachable!("kind checked")
                };
                let target = RotationMatrix::from_row_major(r)?;
                let pr: [f64; 9] = p.as_slice().try_into().expect("nine outputs");
                let estimate = project_to_so3(&pr)?;
                errors.push(geodesic_distance_so3(&estimate, &target).to_degrees());
                fitted.push(geodesic_distance_so3(&id, &estimate));
                truth.push(geodesic_distance_so3(&id, &target));
            }
            (errors, fitted, truth)
        }
    };
    Ok(Metrics {
        mean_error: Some(errors.iter().sum::<f64>() / errors.len() as f64),
        r2: Some(r_squared(&fitted, &truth)),
        ..Metrics::default()
    })
}

pub fn evaluate(model: &SVarMModel, dataset: &LabeledDataset, task: Task) -> Result<Metrics> {
    match task {
        Task::Classification => evaluate_classification(model, dataset),
        Task::Regression(kind) => evaluate_regression(model, dataset, kind),
    }
}
