use crate::model::{Gradients, SVarMModel};
use crate::{Error, Result};

/// Adam moments, stored flat in the parameter order of
/// [`SVarMModel::param`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamState {
    /// Fresh state with β₁ = 0.9, β₂ = 0.999, ε = 1e-8.
    pub fn new(model: &SVarMModel, lr: f64) -> Self {
        Self::with_hyper(model, lr, 0.9, 0.999, 1e-8)
    }

    pub fn with_hyper(model: &SVarMModel, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        let n = model.num_params();
        Self {
            lr,
            beta1,
            beta2,
            eps,
            t: 0,
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    pub fn first_moment(&self) -> &[f64] {
        &self.m
    }

    pub fn second_moment(&self) -> &[f64] {
        &self.v
    }
}

/// One bias-corrected Adam update of `model` in place.
pub fn adam_step(state: &mut AdamState, model: &mut SVarMModel, grads: &Gradients) -> Result<()> {
    grads.check_shape(model)?;
    if state.m.len() != model.num_params() {
        return Err(Error::ShapeMismatch(format!(
            "optimizer tracks {} parameters, model has {}",
            state.m.len(),
            model.num_params()
        )));
    }
    state.t += 1;
    let (b1, b2, lr, eps) = (state.beta1, state.beta2, state.lr, state.eps);
    let bc1 = 1.0 - b1.powi(state.t as i32);
    let bc2 = 1.0 - b2.powi(state.t as i32);
    let (m, v) = (&mut state.m, &mut state.v);
    model.update_with(grads, |p, g, k| {
        m[k] = b1 * m[k] + (1.0 - b1) * g;
        v[k] = b2 * v[k] + (1.0 - b2) * g * g;
        let m_hat = m[k] / bc1;
        let v_hat = v[k] / bc2;
        *p -= lr * m_hat / (v_hat.sqrt() + eps);
    });
    Ok(())
}

#[cfg(test)]
mod tests {
    use ndarray::array;

    use super::*;
    use crate::model::MlpParams;

    fn scalar_model(p: f64) -> SVarMModel {
        SVarMModel::new(
            MlpParams::from_parts(vec![array![[p]]], vec![array![0.0]]).unwrap(),
            array![0.0],
        )
        .unwrap()
    }

    fn grads_for(model: &SVarMModel, g: f64) -> Gradients {
        let mut out = Gradients::zeros_like(model);
        out.weights[0][[0, 0]] = g;
        out
    }

    #[test]
    fn zero_gradient_keeps_parameters() {
        let mut m = SVarMModel::init(&[6, 4, 2], 0).unwrap();
        let before = m.clone();
        let mut s = AdamState::new(&m, 0.005);
        adam_step(&mut s, &mut m, &Gradients::zeros_like(&before)).unwrap();
        assert_eq!(m, before);
        assert_eq!(s.step_count(), 1);
    }

    #[test]
    fn first_step_is_signed_learning_rate() {
        let mut m = SVarMModel::init(&[3, 2], 1).unwrap();
        let before = m.clone();
        let mut g = Gradients::zeros_like(&m);
        g.weights[0] = array![[3.0, -0.2, 1e-3], [-50.0, 7.0, 0.5]];
        let mut s = AdamState::new(&m, 0.01);
        adam_step(&mut s, &mut m, &g).unwrap();
        for k in 0..6 {
            let step = m.param(k) - before.param(k);
            let expected = -0.01 * g.get(k).signum();
            assert!((step - expected).abs() < 1e-7, "{step} vs {expected}");
        }
    }

    #[test]
    fn two_steps_match_hand_trace() {
        // p = 1, g = 0.5, lr = 0.1:
        // t=1: m = 0.05, v = 2.5e-4, m̂ = 0.5, v̂ = 0.25, p = 1 − 0.1·0.5/(0.5 + 1e-8)
        // t=2: m = 0.095, v = 4.9975e-4, m̂ = 0.5, v̂ = 0.25, same step again.
        let mut m = scalar_model(1.0);
        let mut s = AdamState::new(&m, 0.1);
        let g = grads_for(&m, 0.5);
        adam_step(&mut s, &mut m, &g).unwrap();
        assert!((m.param(0) - (1.0 - 0.05 / (0.5 + 1e-8))).abs() < 1e-15);
        assert!((s.first_moment()[0] - 0.05).abs() < 1e-16);
        assert!((s.second_moment()[0] - 2.5e-4).abs() < 1e-18);
        adam_step(&mut s, &mut m, &g).unwrap();
        assert!((s.first_moment()[0] - 0.095).abs() < 1e-15);
        assert!((s.second_moment()[0] - 4.9975e-4).abs() < 1e-17);
        assert!((m.param(0) - 0.800000004).abs() < 1e-12, "{}", m.param(0));
    }

    #[test]
    fn shape_mismatch() {
        let mut a = SVarMModel::init(&[3, 2], 0).unwrap();
        let b = SVarMModel::init(&[3, 4, 2], 0).unwrap();
        let mut s = AdamState::new(&a, 0.1);
        assert!(matches!(
            adam_step(&mut s, &mut a, &Gradients::zeros_like(&b)),
            Err(Error::ShapeMismatch(_))
        ));
        let mut s_b = AdamState::new(&b, 0.1);
        let g = Gradients::zeros_like(&a);
        assert!(adam_step(&mut s_b, &mut a, &g).is_err());
    }
}
