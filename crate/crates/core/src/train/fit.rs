use std::time::Instant;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::{adam_step, AdamState};
use super::config::TrainConfig;
use super::dataset::{Label, LabelKind, LabeledDataset};
use super::metrics::{argmax, Metrics};
use crate::model::{mse_loss, softmax_cross_entropy, FeatureSet, Gradients, SVarMModel};
use crate::varifold::SupportMeasure;
use crate::{Error, Result};

/// Training objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    Mse,
    CrossEntropy,
}

/// Per-item loss and its gradient with respect to the model output.
fn item_loss(output: &[f64], label: &Label, kind: LossKind) -> Result<(f64, Vec<f64>)> {
    match (kind, label) {
        (LossKind::CrossEntropy, Label::Class(c)) => softmax_cross_entropy(output, *c),
        (LossKind::Mse, Label::Scalar(_) | Label::Rotation(_)) => {
            let target = label.target().expect("regression label");
            let (loss, mut grads) = mse_loss(&[output.to_vec()], &[target])?;
            Ok((loss, grads.pop().expect("one item")))
        }
        _ => Err(Error::KindMismatch(format!("{kind:?} loss does not apply to {:?} labels", label.kind()))),
    }
}

fn check_compatible(dataset: &LabeledDataset, config: &TrainConfig, kind: LossKind) -> Result<()> {
    config.validate()?;
    if dataset.representation() != config.representation {
        return Err(Error::Config(format!(
            "dataset is {} but the config asks for {}",
            dataset.representation(),
            config.representation
        )));
    }
    if config.dims[0] != dataset.feature_dim() {
        return Err(Error::ShapeMismatch(format!(
            "first layer takes {} inputs, supports have {} features",
            config.dims[0],
            dataset.feature_dim()
        )));
    }
    let out = *config.dims.last().expect("validated dims");
    match kind {
        LossKind::Mse => {
            let width = match dataset.label_kind() {
                LabelKind::Scalar => 1,
                LabelKind::Rotation => 9,
                LabelKind::Class => return Err(Error::KindMismatch("regression needs scalar or rotation labels".into())),
            };
            if out != width {
                return Err(Error::ShapeMismatch(format!("labels have {width} entries, network outputs {out}")));
            }
        }
        LossKind::CrossEntropy => {
            if dataset.label_kind() != LabelKind::Class {
                return Err(Error::KindMismatch("classification needs class labels".into()));
            }
            let classes = dataset.num_classes().unwrap_or(0);
            if out != classes {
                return Err(Error::ShapeMismatch(format!("{classes} classes but the network outputs {out}")));
            }
        }
    }
    Ok(())
}

/// Minibatch Adam from a fresh initialization seeded by `config.seed`.
/// Each batch minimizes the mean per-item loss; the reported epoch loss is
/// the mean over all items seen in that epoch, evaluated before each update.
pub fn fit(dataset: &LabeledDataset, config: &TrainConfig, kind: LossKind) -> Result<(SVarMModel, Metrics)> {
    check_compatible(dataset, config, kind)?;
    let start = Instant::now();
    let mut model = SVarMModel::init(&config.dims, config.seed)?;
    let mut adam = AdamState::new(&model, config.lr);
    let sets = dataset
        .items()
        .iter()
        .map(|it| match config.mass_normalization {
            Some(target) => it.measure.normalize_mass(target).map(|m| FeatureSet::from_measure(&m)),
            None => Ok(FeatureSet::from_measure(&it.measure)),
        })
        .collect::<Result<Vec<_>>>()?;
    let labels: Vec<&Label> = dataset.items().iter().map(|it| &it.label).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5348_5546);
    let mut order: Vec<usize> = (0..sets.len()).collect();
    let mut metrics = Metrics::default();
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        let mut correct = 0usize;
        for batch in order.chunks(config.batch_size) {
            let mut grads = Gradients::zeros_like(&model);
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let (out, cache) = model.forward_cached(&sets[i])?;
                let (loss, mut upstream) = item_loss(&out, labels[i], kind)?;
                if let Label::Class(c) = labels[i] {
                    correct += usize::from(argmax(&out) == *c);
                }
                total += loss;
                upstream.iter_mut().for_each(|u| *u *= scale);
                model.accumulate_backward(&sets[i], &cache, &upstream, &mut grads)?;
            }
            adam_step(&mut adam, &mut model, &grads)?;
        }
        let loss = total / sets.len() as f64;
        metrics.epoch_loss.push(loss);
        if kind == LossKind::CrossEntropy {
            let acc = correct as f64 / sets.len() as f64;
            metrics.epoch_accuracy.push(acc);
            log::debug!("epoch {} loss {loss:.6} accuracy {acc:.4}", epoch + 1);
        } else {
            log::debug!("epoch {} loss {loss:.6e}", epoch + 1);
        }
    }
    metrics.wall_clock_secs = start.elapsed().as_secs_f64();
    Ok((model, metrics))
}

/// MSE training on scalar or rotation labels.
pub fn train_regression(dataset: &LabeledDataset, config: &TrainConfig) -> Result<(SVarMModel, Metrics)> {
    fit(dataset, config, LossKind::Mse)
}

/// Softmax cross-entropy training on class labels.
pub fn train_classification(dataset: &LabeledDataset, config: &TrainConfig) -> Result<(SVarMModel, Metrics)> {
    fit(dataset, config, LossKind::CrossEntropy)
}

/// Largest relative error `|a − n| / max(|a| + |n|, 1e-6)` between
/// back-propagated and central-difference gradients of one item's loss.
/// Networks above 10⁴ parameters are checked on a random subsample of 200
/// parameters. Large `eps` inflates truncation error.
pub fn grad_check<M: SupportMeasure + ?Sized>(
    model: &SVarMModel,
    measure: &M,
    label: &Label,
    kind: LossKind,
    eps: f64,
) -> Result<f64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Config(format!("finite-difference step must be positive, got {eps}")));
    }
    let set = FeatureSet::from_measure(measure);
    let (out, cache) = model.forward_cached(&set)?;
    let (_, upstream) = item_loss(&out, label, kind)?;
    let mut grads = Gradients::zeros_like(model);
    model.accumulate_backward(&set, &cache, &upstream, &mut grads)?;

    let n = model.num_params();
    let slots: Vec<usize> = if n > 10_000 {
        let mut s = index::sample(&mut ChaCha8Rng::seed_from_u64(0), n, 200).into_vec();
        s.sort_unstable();
        s
    } else {
        (0..n).collect()
    };
    let mut probe = model.clone();
    let mut loss_at = |k: usize, value: f64| -> Result<f64> {
        probe.set_param(k, value);
        let out = probe.output(&set)?;
        Ok(item_loss(&out, label, kind)?.0)
    };
    let mut worst: f64 = 0.0;
    for k in slots {
        let p = model.param(k);
        let plus = loss_at(k, p + eps)?;
        let minus = loss_at(k, p - eps)?;
        loss_at(k, p)?;
        let numeric = (plus - minus) / (2.0 * eps);
        let analytic = grads.get(k);
        worst = worst.max((analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-6));
    }
    Ok(worst)
}
