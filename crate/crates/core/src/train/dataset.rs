use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::varifold::{DiscreteVarifold, Measure, Representation, SupportMeasure};
use crate::{Error, Result};

/// Target attached to one shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Class(usize),
    /// A real scalar; rotation angles are stored in radians.
    Scalar(f64),
    /// Row-major rotation matrix.
    Rotation([f64; 9]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelKind {
    Class,
    Scalar,
    Rotation,
}

impl Label {
    pub fn kind(&self) -> LabelKind {
        match self {
            Label::Class(_) => LabelKind::Class,
            Label::Scalar(_) => LabelKind::Scalar,
            Label::Rotation(_) => LabelKind::Rotation,
        }
    }

    /// Regression target vector; `None` for class labels.
    pub fn target(&self) -> Option<Vec<f64>> {
        match self {
            Label::Class(_) => None,
            Label::Scalar(y) => Some(vec![*y]),
            Label::Rotation(r) => Some(r.to_vec()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledItem {
    pub measure: Measure,
    pub label: Label,
}

/// Shapes with homogeneous labels, all in one representation.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    items: Vec<LabeledItem>,
    representation: Representation,
    label_kind: LabelKind,
    num_classes: Option<usize>,
}

impl LabeledDataset {
    /// Checks that labels share one kind and that all measures share one
    /// representation and ambient dimension. For class labels the number of
    /// classes is `max label + 1` unless set with [`Self::with_num_classes`].
    pub fn new(items: Vec<LabeledItem>) -> Result<Self> {
        let first = items
            .first()
            .ok_or_else(|| Error::Config("dataset has no items".into()))?;
        let representation = first.measure.representation();
        let label_kind = first.label.kind();
        let n = first.measure.ambient_dim();
        for (i, item) in items.iter().enumerate() {
            if item.label.kind() != label_kind {
                return Err(Error::KindMismatch(format!("item {i} has a different label kind")));
            }
            if item.measure.representation() != representation || item.measure.ambient_dim() != n {
                return Err(Error::Config(format!(
                    "item {i} is not a {representation} measure in dimension {n}"
                )));
            }
        }
        let num_classes = match label_kind {
            LabelKind::Class => items
                .iter()
                .map(|it| match it.label {
                    Label::Class(c) => c + 1,
                    _ => 0,
                })
                .max(),
            _ => None,
        };
        Ok(Self {
            items,
            representation,
            label_kind,
            num_classes,
        })
    }

    /// Varifold items converted to the requested representation.
    pub fn from_varifolds(items: Vec<(DiscreteVarifold, Label)>, rep: Representation) -> Result<Self> {
        Self::new(
            items
                .into_iter()
                .map(|(mu, label)| LabeledItem {
                    measure: Measure::from_varifold(mu, rep),
                    label,
                })
                .collect(),
        )
    }

    pub fn with_num_classes(mut self, classes: usize) -> Result<Self> {
        if self.label_kind != LabelKind::Class {
            return Err(Error::KindMismatch("class count set on a regression dataset".into()));
        }
        if let Some(found) = self.num_classes.filter(|&c| c > classes) {
            return Err(Error::BadLabel {
                label: found - 1,
                classes,
            });
        }
        self.num_classes = Some(classes);
        Ok(self)
    }

    pub fn items(&self) -> &[LabeledItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn label_kind(&self) -> LabelKind {
        self.label_kind
    }

    pub fn num_classes(&self) -> Option<usize> {
        self.num_classes
    }

    /// Input width of a test function on these measures.
    pub fn feature_dim(&self) -> usize {
        self.items[0].measure.feature_dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.items[0].measure.ambient_dim()
    }

    pub fn mean_mass(&self) -> f64 {
        self.items.iter().map(|it| it.measure.total_mass()).sum::<f64>() / self.len() as f64
    }

    /// Same items in another representation; only varifold datasets can be
    /// converted.
    pub fn to_representation(&self, rep: Representation) -> Result<Self> {
        let items = self
            .items
            .iter()
            .map(|it| match &it.measure {
                Measure::Varifold(mu) => Ok(LabeledItem {
                    measure: Measure::from_varifold(mu.clone(), rep),
                    label: it.label.clone(),
                }),
                _ if it.measure.representation() == rep => Ok(it.clone()),
                _ => Err(Error::Config(format!(
                    "cannot convert a {} measure to {rep}",
                    it.measure.representation()
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = Self::new(items)?;
        out.num_classes = self.num_classes;
        Ok(out)
    }

    /// The items at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            items: indices.iter().map(|&i| self.items[i].clone()).collect(),
            representation: self.representation,
            label_kind: self.label_kind,
            num_classes: self.num_classes,
        }
    }

    /// Shuffled split into `round(fraction·len)` training items and the rest.
    pub fn split(&self, fraction: f64, seed: u64) -> Result<(Self, Self)> {
        let (train, test) = split_indices(self.len(), fraction, seed)?;
        Ok((self.subset(&train), self.subset(&test)))
    }
}

/// Item indices of the training and test parts chosen by
/// [`LabeledDataset::split`] for a dataset of `len` items.
pub fn split_indices(len: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config(format!("split fraction must be in (0, 1), got {fraction}")));
    }
    let mut order: Vec<usize> = (0..len).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = ((fraction * len as f64).round() as usize).min(len);
    let test = order.split_off(cut);
    Ok((order, test))
}
