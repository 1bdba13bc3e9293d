use crate::{Error, Result};

/// Mean squared error `(1/R) Σ ‖pred − y‖²` and its gradient
/// `(2/R)(pred − y)` with respect to each prediction.
pub fn mse_loss(predictions: &[Vec<f64>], labels: &[Vec<f64>]) -> Result<(f64, Vec<Vec<f64>>)> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch(predictions.len(), labels.len()));
    }
    if predictions.is_empty() {
        return Ok((0.0, Vec::new()));
    }
    let r = predictions.len() as f64;
    let mut loss = 0.0;
    let mut grads = Vec::with_capacity(predictions.len());
    for (p, y) in predictions.iter().zip(labels) {
        if p.len() != y.len() {
            return Err(Error::ShapeMismatch(format!(
                "prediction has {} entries, label has {}",
                p.len(),
                y.len()
            )));
        }
        loss += p.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        grads.push(p.iter().zip(y).map(|(a, b)| 2.0 * (a - b) / r).collect());
    }
    Ok((loss / r, grads))
}

/// `−log softmax(logits)[label]` with max-subtraction, and its gradient
/// `softmax − one_hot(label)`.
pub fn softmax_cross_entropy(logits: &[f64], label: usize) -> Result<(f64, Vec<f64>)> {
    if label >= logits.len() {
        return Err(Error::BadLabel {
            label,
            classes: logits.len(),
        });
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    let loss = sum.ln() - (logits[label] - max);
    let mut grad: Vec<f64> = exps.iter().map(|e| e / sum).collect();
    grad[label] -= 1.0;
    Ok((loss, grad))
}
