//! The test-function network `h_θ`, the affine head `μ ↦ ⟨μ, h_θ⟩ + β`,
//! losses, a Lipschitz upper bound and checkpoint I/O.

mod checkpoint;
mod lipschitz;
mod loss;

use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointMeta};
pub use lipschitz::{lipschitz_upper_bound, spectral_norm};
pub use loss::{mse_loss, softmax_cross_entropy};

use crate::varifold::SupportMeasure;
use crate::{Error, Result};

/// Number of weights and biases in an MLP with layer widths `dims`
/// (the output bias β is not included).
pub fn param_count(dims: &[usize]) -> usize {
    dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.len() < 2 {
        return Err(Error::BadDims(format!("need at least input and output widths, got {dims:?}")));
    }
    if dims.contains(&0) {
        return Err(Error::BadDims(format!("zero-width layer in {dims:?}")));
    }
    Ok(())
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Layer `l` maps width `dims[l]` to `dims[l+1]` with a `dims[l+1] × dims[l]`
/// weight matrix. Hidden layers use the logistic sigmoid; the last layer is
/// affine.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    dims: Vec<usize>,
    weights: Vec<Array2<f64>>,
    biases: Vec<Array1<f64>>,
}

impl MlpParams {
    /// Glorot-uniform weights, zero biases.
    pub fn init(dims: &[usize], seed: u64) -> Result<Self> {
        check_dims(dims)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = dims
            .windows(2)
            .map(|w| {
                let bound = (6.0 / (w[0] + w[1]) as f64).sqrt();
                Array2::from_shape_simple_fn((w[1], w[0]), || rng.random_range(-bound..=bound))
            })
            .collect();
        let biases = dims[1..].iter().map(|&d| Array1::zeros(d)).collect();
        Ok(Self {
            dims: dims.to_vec(),
            weights,
            biases,
        })
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        check_dims(dims)?;
        Ok(Self {
            dims: dims.to_vec(),
            weights: dims.windows(2).map(|w| Array2::zeros((w[1], w[0]))).collect(),
            biases: dims[1..].iter().map(|&d| Array1::zeros(d)).collect(),
        })
    }

    pub fn from_parts(weights: Vec<Array2<f64>>, biases: Vec<Array1<f64>>) -> Result<Self> {
        if weights.is_empty() || weights.len() != biases.len() {
            return Err(Error::BadDims(format!(
                "{} weight matrices and {} bias vectors",
                weights.len(),
                biases.len()
            )));
        }
        let mut dims = vec![weights[0].ncols()];
        for (l, (w, b)) in weights.iter().zip(&biases).enumerate() {
            if w.ncols() != *dims.last().unwrap() || b.len() != w.nrows() {
                return Err(Error::BadDims(format!(
                    "layer {l}: weight {:?} and bias {} do not chain",
                    w.shape(),
                    b.len()
                )));
            }
            dims.push(w.nrows());
        }
        check_dims(&dims)?;
        if weights.iter().flatten().chain(biases.iter().flatten()).any(|x| !x.is_finite()) {
            return Err(Error::BadDims("non-finite parameter".into()));
        }
        Ok(Self { dims, weights, biases })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    pub fn num_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Array2<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Array1<f64>] {
        &self.biases
    }

    pub fn param_count(&self) -> usize {
        param_count(&self.dims)
    }

    /// `h(point)` for a single input.
    pub fn forward(&self, point: &[f64]) -> Result<Vec<f64>> {
        if point.len() != self.input_dim() {
            return Err(Error::ShapeMismatch(format!(
                "input has {} entries, network expects {}",
                point.len(),
                self.input_dim()
            )));
        }
        let x = ArrayView2::from_shape((1, point.len()), point).expect("contiguous row");
        Ok(self.forward_batch(x)?.row(0).to_vec())
    }

    /// Row-wise `h` over an `m × d₀` matrix of inputs.
    pub fn forward_batch(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.input_dim() {
            return Err(Error::ShapeMismatch(format!(
                "inputs have {} columns, network expects {}",
                x.ncols(),
                self.input_dim()
            )));
        }
        let mut acts = self.activations(x);
        Ok(acts.pop().expect("at least one layer"))
    }

    /// Outputs of every layer, last one included.
    fn activations(&self, x: ArrayView2<f64>) -> Vec<Array2<f64>> {
        let last = self.num_layers() - 1;
        let mut acts: Vec<Array2<f64>> = Vec::with_capacity(self.num_layers());
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let input = if l == 0 { x } else { acts[l - 1].view() };
            let mut z = input.dot(&w.t());
            z += b;
            if l < last {
                z.mapv_inplace(sigmoid);
            }
            acts.push(z);
        }
        acts
    }
}

/// Feature matrix and weights of a measure, prepared once for repeated
/// evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub features: Array2<f64>,
    pub weights: Array1<f64>,
}

impl FeatureSet {
    pub fn from_measure<M: SupportMeasure + ?Sized>(mu: &M) -> Self {
        Self {
            features: mu.feature_matrix(),
            weights: Array1::from(mu.weights().to_vec()),
        }
    }

    pub fn num_atoms(&self) -> usize {
        self.weights.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.sum()
    }
}

/// Intermediate activations kept between a forward and a backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    acts: Vec<Array2<f64>>,
}

/// The affine functional `μ ↦ ⟨μ, h⟩ + β`.
#[derive(Debug, Clone, PartialEq)]
pub struct SVarMModel {
    mlp: MlpParams,
    output_bias: Array1<f64>,
}

impl SVarMModel {
    pub fn new(mlp: MlpParams, output_bias: Array1<f64>) -> Result<Self> {
        if output_bias.len() != mlp.output_dim() {
            return Err(Error::BadDims(format!(
                "output bias has {} entries, network outputs {}",
                output_bias.len(),
                mlp.output_dim()
            )));
        }
        if output_bias.iter().any(|x| !x.is_finite()) {
            return Err(Error::BadDims("non-finite output bias".into()));
        }
        Ok(Self { mlp, output_bias })
    }

    /// Glorot-initialised network with β = 0.
    pub fn init(dims: &[usize], seed: u64) -> Result<Self> {
        let mlp = MlpParams::init(dims, seed)?;
        let c = mlp.output_dim();
        Self::new(mlp, Array1::zeros(c))
    }

    pub fn mlp(&self) -> &MlpParams {
        &self.mlp
    }

    pub fn output_bias(&self) -> &Array1<f64> {
        &self.output_bias
    }

    pub fn dims(&self) -> &[usize] {
        self.mlp.dims()
    }

    pub fn input_dim(&self) -> usize {
        self.mlp.input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.mlp.output_dim()
    }

    /// Trainable parameters including β.
    pub fn num_params(&self) -> usize {
        self.mlp.param_count() + self.output_bias.len()
    }

    fn check_features(&self, set: &FeatureSet) -> Result<()> {
        if set.features.ncols() != self.input_dim() {
            return Err(Error::ShapeMismatch(format!(
                "supports have {} features, network expects {}",
                set.features.ncols(),
                self.input_dim()
            )));
        }
        if set.features.nrows() != set.weights.len() {
            return Err(Error::ShapeMismatch("feature rows and weights differ in length".into()));
        }
        Ok(())
    }

    /// `⟨μ, h⟩ + β` for a measure.
    pub fn model_output<M: SupportMeasure + ?Sized>(&self, mu: &M) -> Result<Vec<f64>> {
        self.output(&FeatureSet::from_measure(mu))
    }

    pub fn output(&self, set: &FeatureSet) -> Result<Vec<f64>> {
        Ok(self.forward_cached(set)?.0)
    }

    /// Output together with the activations needed by
    /// [`SVarMModel::accumulate_backward`].
    pub fn forward_cached(&self, set: &FeatureSet) -> Result<(Vec<f64>, ForwardCache)> {
        self.check_features(set)?;
        let acts = self.mlp.activations(set.features.view());
        let h = acts.last().expect("at least one layer");
        if let Some((i, _)) = h
            .rows()
            .into_iter()
            .enumerate()
            .find(|(_, r)| r.iter().any(|x| !x.is_finite()))
        {
            return Err(Error::NonFiniteValue(i));
        }
        // Fixed-order weighted sum over supports.
        let mut out = self.output_bias.to_vec();
        for (w, row) in set.weights.iter().zip(h.rows()) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += w * v;
            }
        }
        Ok((out, ForwardCache { acts }))
    }

    /// Adds the gradient of `⟨upstream, output⟩` to `grads`.
    pub fn accumulate_backward(
        &self,
        set: &FeatureSet,
        cache: &ForwardCache,
        upstream: &[f64],
        grads: &mut Gradients,
    ) -> Result<()> {
        self.check_features(set)?;
        if upstream.len() != self.output_dim() {
            return Err(Error::ShapeMismatch(format!(
                "upstream has {} entries, model outputs {}",
                upstream.len(),
                self.output_dim()
            )));
        }
        grads.check_shape(self)?;
        let up = ArrayView2::from_shape((1, upstream.len()), upstream).expect("contiguous row");
        // Each support contributes with its weight.
        let mut delta = set.weights.view().insert_axis(Axis(1)).dot(&up);
        for l in (0..self.mlp.num_layers()).rev() {
            let input = if l == 0 {
                set.features.view()
            } else {
                cache.acts[l - 1].view()
            };
            general_mat_mul(1.0, &delta.t(), &input, 1.0, &mut grads.weights[l]);
            grads.biases[l] += &delta.sum_axis(Axis(0));
            if l > 0 {
                let mut next = delta.dot(&self.mlp.weights[l]);
                Zip::from(&mut next)
                    .and(&cache.acts[l - 1])
                    .for_each(|d, &a| *d *= a * (1.0 - a));
                delta = next;
            }
        }
        for (g, u) in grads.output_bias.iter_mut().zip(upstream) {
            *g += u;
        }
        Ok(())
    }

    /// Exact gradients of `⟨upstream, model_output(μ)⟩`.
    pub fn backward<M: SupportMeasure + ?Sized>(&self, mu: &M, upstream: &[f64]) -> Result<Gradients> {
        let set = FeatureSet::from_measure(mu);
        let (_, cache) = self.forward_cached(&set)?;
        let mut grads = Gradients::zeros_like(self);
        self.accumulate_backward(&set, &cache, upstream, &mut grads)?;
        Ok(grads)
    }

    /// Parameter `k` in the flat order: each layer's weights (row-major) then
    /// its bias, layer by layer, then β.
    pub fn param(&self, k: usize) -> f64 {
        *self.locate(k)
    }

    pub fn set_param(&mut self, k: usize, value: f64) {
        *self.locate_mut(k) = value;
    }

    fn locate(&self, k: usize) -> &f64 {
        let mut k = k;
        for (w, b) in self.mlp.weights.iter().zip(&self.mlp.biases) {
            if k < w.len() {
                return &w.as_slice().expect("standard layout")[k];
            }
            k -= w.len();
            if k < b.len() {
                return &b[k];
            }
            k -= b.len();
        }
        &self.output_bias[k]
    }

    fn locate_mut(&mut self, k: usize) -> &mut f64 {
        let mut k = k;
        for (w, b) in self.mlp.weights.iter_mut().zip(self.mlp.biases.iter_mut()) {
            if k < w.len() {
                return &mut w.as_slice_mut().expect("standard layout")[k];
            }
            k -= w.len();
            if k < b.len() {
                return &mut b[k];
            }
            k -= b.len();
        }
        &mut self.output_bias[k]
    }

    /// Applies `f(param, grad, slot)` to every parameter alongside the
    /// matching gradient entry; `slot` is the flat index.
    pub(crate) fn update_with<F>(&mut self, grads: &Gradients, mut f: F)
    where
        F: FnMut(&mut f64, f64, usize),
    {
        let mut slot = 0;
        for l in 0..self.mlp.num_layers() {
            for (p, g) in self.mlp.weights[l].iter_mut().zip(&grads.weights[l]) {
                f(p, *g, slot);
                slot += 1;
            }
            for (p, g) in self.mlp.biases[l].iter_mut().zip(&grads.biases[l]) {
                f(p, *g, slot);
                slot += 1;
            }
        }
        for (p, g) in self.output_bias.iter_mut().zip(&grads.output_bias) {
            f(p, *g, slot);
            slot += 1;
        }
    }
}

/// Gradients with the same shapes as an [`SVarMModel`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    pub output_bias: Array1<f64>,
}

impl Gradients {
    pub fn zeros_like(model: &SVarMModel) -> Self {
        Self {
            weights: model.mlp.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            biases: model.mlp.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
            output_bias: Array1::zeros(model.output_bias.len()),
        }
    }

    pub fn check_shape(&self, model: &SVarMModel) -> Result<()> {
        let ok = self.weights.len() == model.mlp.weights.len()
            && self.biases.len() == model.mlp.biases.len()
            && self.weights.iter().zip(&model.mlp.weights).all(|(a, b)| a.shape() == b.shape())
            && self.biases.iter().zip(&model.mlp.biases).all(|(a, b)| a.len() == b.len())
            && self.output_bias.len() == model.output_bias.len();
        if ok {
            Ok(())
        } else {
            Err(Error::ShapeMismatch("gradient shapes do not match the model".into()))
        }
    }

    /// Entry `k` in the flat order used by [`SVarMModel::param`].
    pub fn get(&self, k: usize) -> f64 {
        let mut k = k;
        for (w, b) in self.weights.iter().zip(&self.biases) {
            if k < w.len() {
                return w.as_slice().expect("standard layout")[k];
            }
            k -= w.len();
            if k < b.len() {
                return b[k];
            }
            k -= b.len();
        }
        self.output_bias[k]
    }

    pub fn len(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
            + self.output_bias.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn scale(&mut self, factor: f64) {
        for w in &mut self.weights {
            *w *= factor;
        }
        for b in &mut self.biases {
            *b *= factor;
        }
        self.output_bias *= factor;
    }

    pub fn max_abs(&self) -> f64 {
        self.weights
            .iter()
            .flatten()
            .chain(self.biases.iter().flatten())
            .chain(self.output_bias.iter())
            .fold(0.0, |m, x| m.max(x.abs()))
    }
}
