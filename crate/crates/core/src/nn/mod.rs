//! Small neural-network core: dense layers, layer norm, multi-head
//! self-attention, a transformer encoder layer, and AdamW, all in f64 with
//! explicit forward caches and hand-written backward passes.
//!
//! Forward passes come in two flavors: `forward` is pure and used for
//! inference; `forward_cached` returns the activations needed by
//! `backward`, which accumulates parameter gradients in place and returns
//! the input gradient. Dropout only applies on cached (training) passes.

mod activation;
mod adamw;
mod attention;
mod dropout;
mod encoder_layer;
pub mod gradcheck;
mod linear;
mod norm;
mod positional;

pub use activation::Activation;
pub use adamw::AdamW;
pub use attention::{AttentionCache, MultiHeadAttention};
pub use dropout::dropout_mask;
pub use encoder_layer::{EncoderLayer, EncoderLayerCache};
pub use linear::Linear;
pub use norm::{LayerNorm, LayerNormCache};
pub use positional::sinusoidal_encoding;

use ndarray::{Array1, Array2, ArrayViewMutD};
use rand_distr::{Distribution, Normal};

/// Deterministic RNG used for all stochastic components.
pub type Rng = rand_chacha::ChaCha8Rng;

/// A matrix parameter with its gradient accumulator.
#[derive(Debug, Clone)]
pub struct Param2 {
    pub v: Array2<f64>,
    pub g: Array2<f64>,
}

impl Param2 {
    pub fn zeros(rows: usize, cols: usize) -> Param2 {
        Param2 {
            v: Array2::zeros((rows, cols)),
            g: Array2::zeros((rows, cols)),
        }
    }

    pub fn randn(rows: usize, cols: usize, std: f64, rng: &mut Rng) -> Param2 {
        let normal = Normal::new(0.0, std).expect("valid std");
        Param2 {
            v: Array2::from_shape_simple_fn((rows, cols), || normal.sample(rng)),
            g: Array2::zeros((rows, cols)),
        }
    }
}

/// A vector parameter with its gradient accumulator.
#[derive(Debug, Clone)]
pub struct Param1 {
    pub v: Array1<f64>,
    pub g: Array1<f64>,
}

impl Param1 {
    pub fn zeros(len: usize) -> Param1 {
        Param1 {
            v: Array1::zeros(len),
            g: Array1::zeros(len),
        }
    }

    pub fn ones(len: usize) -> Param1 {
        Param1 {
            v: Array1::ones(len),
            g: Array1::zeros(len),
        }
    }
}

/// Anything holding trainable parameters. Visit order must be stable; the
/// optimizer, checkpointing, and the gradient checker all rely on it.
pub trait Params {
    fn visit_params(
        &mut self,
        prefix: &str,
        f: &mut dyn FnMut(&str, ArrayViewMutD<'_, f64>, ArrayViewMutD<'_, f64>),
    );
}

impl Params for Param2 {
    fn visit_params(
        &mut self,
        prefix: &str,
        f: &mut dyn FnMut(&str, ArrayViewMutD<'_, f64>, ArrayViewMutD<'_, f64>),
    ) {
        f(prefix, self.v.view_mut().into_dyn(), self.g.view_mut().into_dyn());
    }
}

impl Params for Param1 {
    fn visit_params(
        &mut self,
        prefix: &str,
        f: &mut dyn FnMut(&str, ArrayViewMutD<'_, f64>, ArrayViewMutD<'_, f64>),
    ) {
        f(prefix, self.v.view_mut().into_dyn(), self.g.view_mut().into_dyn());
    }
}

pub fn zero_grads(model: &mut impl Params) {
    model.visit_params("", &mut |_, _, mut g| g.fill(0.0));
}

pub fn param_count(model: &mut impl Params) -> usize {
    let mut n = 0;
    model.visit_params("", &mut |_, v, _| n += v.len());
    n
}

/// Scales all accumulated gradients, e.g. to turn a sum over a batch into
/// a mean before the optimizer step.
pub fn scale_grads(model: &mut impl Params, factor: f64) {
    model.visit_params("", &mut |_, _, mut g| g.mapv_inplace(|x| x * factor));
}

/// Copies every parameter value into a tensor store under its visit name.
pub fn export_params(model: &mut impl Params, store: &mut crate::store::TensorStore) {
    model.visit_params("", &mut |name, v, _| {
        store.insert(name, v.to_owned());
    });
}

/// Loads parameter values from a tensor store; every parameter must be
/// present with the exact shape.
pub fn import_params(
    model: &mut impl Params,
    store: &crate::store::TensorStore,
) -> crate::error::Result<()> {
    let mut problems: Vec<String> = Vec::new();
    model.visit_params("", &mut |name, mut v, _| match store.get(name) {
        Some(t) if t.shape() == v.shape() => v.assign(t),
        Some(t) => problems.push(format!(
            "'{name}': shape {:?} in file, {:?} expected",
            t.shape(),
            v.shape()
        )),
        None => problems.push(format!("'{name}': missing from weights file")),
    });
    if problems.is_empty() {
        Ok(())
    } else {
        Err(crate::error::Error::config(format!(
            "weight mismatch: {}",
            problems.join("; ")
        )))
    }
}

/// Snapshot of all parameter values in visit order (used for best-epoch
/// checkpointing during training).
pub fn snapshot_params(model: &mut impl Params) -> Vec<f64> {
    let mut flat = Vec::new();
    model.visit_params("", &mut |_, v, _| flat.extend(v.iter().copied()));
    flat
}

pub fn restore_params(model: &mut impl Params, snapshot: &[f64]) {
    let mut offset = 0;
    model.visit_params("", &mut |_, mut v, _| {
        for x in v.iter_mut() {
            *x = snapshot[offset];
            offset += 1;
        }
    });
    assert_eq!(offset, snapshot.len(), "snapshot length mismatch");
}

/// Row-wise softmax.
pub fn softmax_rows(x: &Array2<f64>) -> Array2<f64> {
    let mut out = x.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    out
}

/// Backward of row-wise softmax given its output `p` and upstream `dp`.
pub fn softmax_rows_backward(p: &Array2<f64>, dp: &Array2<f64>) -> Array2<f64> {
    let mut out = Array2::zeros(p.raw_dim());
    for ((p_row, dp_row), mut o_row) in p.rows().into_iter().zip(dp.rows()).zip(out.rows_mut()) {
        let dot: f64 = p_row.iter().zip(dp_row.iter()).map(|(a, b)| a * b).sum();
        for ((o, &pv), &dv) in o_row.iter_mut().zip(p_row.iter()).zip(dp_row.iter()) {
            *o = pv * (dv - dot);
        }
    }
    out
}

/// Softmax of a single logit vector.
pub fn softmax_vec(x: &Array1<f64>) -> Array1<f64> {
    let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut e = x.mapv(|v| (v - max).exp());
    let sum = e.sum();
    e.mapv_inplace(|v| v / sum);
    e
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
