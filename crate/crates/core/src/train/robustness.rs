use std::fmt::Write as _;
use std::str::FromStr;

use super::config::TrainConfig;
use super::dataset::{Label, LabeledDataset, LabeledItem};
use super::fit::{fit, LossKind};
use super::metrics::{evaluate, Metrics, Task};
use crate::mesh::{decimate_cluster, remove_faces, TriMesh};
use crate::model::SVarMModel;
use crate::varifold::{DiscreteVarifold, Measure, Representation};
use crate::{Error, Result};

/// Mesh perturbation applied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perturbation {
    /// Level is the fraction of faces deleted; 0 leaves the mesh intact.
    RemoveFaces,
    /// Level is the target face ratio; 1 leaves the mesh intact.
    Decimate,
}

impl FromStr for Perturbation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "remove_faces" | "remove-faces" => Ok(Perturbation::RemoveFaces),
            "decimate" => Ok(Perturbation::Decimate),
            _ => Err(Error::Config(format!("unknown perturbation {s:?}"))),
        }
    }
}

impl Perturbation {
    pub fn apply(&self, mesh: &TriMesh, level: f64, seed: u64) -> Result<TriMesh> {
        match self {
            Perturbation::RemoveFaces => remove_faces(mesh, level, seed),
            Perturbation::Decimate => decimate_cluster(mesh, level),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub level: f64,
    pub metrics: Metrics,
}

/// Scores `model` on perturbed copies of `meshes` at each level. Varifolds
/// are rebuilt from the perturbed meshes; with `rescale` set, each one is
/// normalized to that mass first. Mesh `i` uses seed `seed + i`.
#[allow(clippy::too_many_arguments)]
pub fn robustness_sweep(
    model: &SVarMModel,
    meshes: &[(TriMesh, Label)],
    representation: Representation,
    task: Task,
    perturbation: Perturbation,
    levels: &[f64],
    rescale: Option<f64>,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    levels
        .iter()
        .map(|&level| {
            let items = meshes
                .iter()
                .enumerate()
                .map(|(i, (mesh, label))| {
                    let perturbed = perturbation.apply(mesh, level, seed.wrapping_add(i as u64))?;
                    let mu = DiscreteVarifold::from_mesh(&perturbed)?;
                    let mu = match rescale {
                        Some(target) => mu.normalize_mass(target)?,
                        None => mu,
                    };
                    Ok(LabeledItem {
                        measure: Measure::from_varifold(mu, representation),
                        label: label.clone(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let mut data = LabeledDataset::new(items)?;
            if let Task::Classification = task {
                data = data.with_num_classes(model.output_dim())?;
            }
            let metrics = evaluate(model, &data, task)?;
            log::debug!("level {level}: {metrics:?}");
            Ok(SweepRow { level, metrics })
        })
        .collect()
}

fn metric_header(task: Task) -> &'static str {
    match task {
        Task::Classification => "accuracy",
        Task::Regression(_) => "mean_error,r2",
    }
}

fn metric_fields(m: &Metrics) -> String {
    match m.accuracy {
        Some(a) => a.to_string(),
        None => format!(
            "{},{}",
            m.mean_error.map(|v| v.to_string()).unwrap_or_default(),
            m.r2.map(|v| v.to_string()).unwrap_or_default()
        ),
    }
}

/// `level,accuracy` or `level,mean_error,r2`.
pub fn sweep_csv(rows: &[SweepRow], task: Task) -> String {
    let mut out = format!("level,{}\n", metric_header(task));
    for r in rows {
        writeln!(out, "{},{}", r.level, metric_fields(&r.metrics)).unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub representation: Representation,
    pub metrics: Metrics,
}

/// Trains one model per representation with the same budget and scores
/// each on `test`. Both datasets must hold varifolds; the first layer width
/// of `config.dims` is replaced to match each representation.
pub fn ablate_representation(
    train: &LabeledDataset,
    test: &LabeledDataset,
    config: &TrainConfig,
    task: Task,
) -> Result<Vec<AblationRow>> {
    let loss = match task {
        Task::Classification => LossKind::CrossEntropy,
        Task::Regression(_) => LossKind::Mse,
    };
    Representation::ALL
        .iter()
        .map(|&rep| {
            let tr = train.to_representation(rep)?;
            let te = test.to_representation(rep)?;
            let mut cfg = config.clone();
            cfg.representation = rep;
            cfg.dims[0] = tr.feature_dim();
            let (model, curve) = fit(&tr, &cfg, loss)?;
            let mut metrics = evaluate(&model, &te, task)?;
            metrics.epoch_loss = curve.epoch_loss;
            metrics.epoch_accuracy = curve.epoch_accuracy;
            metrics.wall_clock_secs = curve.wall_clock_secs;
            log::info!("{rep}: {}", metric_fields(&metrics));
            Ok(AblationRow {
                representation: rep,
                metrics,
            })
        })
        .collect()
}

/// `representation,accuracy` or `representation,mean_error,r2`.
pub fn ablation_csv(rows: &[AblationRow], task: Task) -> String {
    let mut out = format!("representation,{}\n", metric_header(task));
    for r in rows {
        writeln!(out, "{},{}", r.representation, metric_fields(&r.metrics)).unwrap();
    }
    out
}
