//! Multi-head scaled dot-product self-attention.

use ndarray::{s, Array2, ArrayViewMutD};

use super::{dropout_mask, softmax_rows, softmax_rows_backward, Linear, Params, Rng};

#[derive(Debug, Clone)]
pub struct MultiHeadAttention {
    pub num_heads: usize,
    pub wq: Linear,
    pub wk: Linear,
    pub wv: Linear,
    pub wo: Linear,
    /// Dropout on attention probabilities during training passes.
    pub dropout: f64,
}

#[derive(Debug)]
pub struct AttentionCache {
    q: Array2<f64>,
    k: Array2<f64>,
    v: Array2<f64>,
    /// Per-head softmax outputs, before dropout.
    probs: Vec<Array2<f64>>,
    drop_masks: Option<Vec<Array2<f64>>>,
    /// Concatenated head contexts, the input to the output projection.
    concat: Array2<f64>,
}

impl MultiHeadAttention {
    pub fn new(dim: usize, num_heads: usize, dropout: f64, std: f64, rng: &mut Rng) -> MultiHeadAttention {
        assert!(dim % num_heads == 0, "dim must be divisible by num_heads");
        MultiHeadAttention {
            num_heads,
            wq: Linear::new(dim, dim, std, rng),
            wk: Linear::new(dim, dim, std, rng),
            wv: Linear::new(dim, dim, std, rng),
            wo: Linear::new(dim, dim, std, rng),
            dropout,
        }
    }

    pub fn dim(&self) -> usize {
        self.wq.in_dim()
    }

    fn head_dim(&self) -> usize {
        self.dim() / self.num_heads
    }

    pub fn forward(&self, x: &Array2<f64>) -> Array2<f64> {
        self.run(x, None).0
    }

    /// Training pass; `rng` enables attention-probability dropout.
    pub fn forward_cached(&self, x: &Array2<f64>, rng: Option<&mut Rng>) -> (Array2<f64>, AttentionCache) {
        let (y, cache) = self.run(x, rng);
        (y, cache.expect("cache requested"))
    }

    fn run(&self, x: &Array2<f64>, mut rng: Option<&mut Rng>) -> (Array2<f64>, Option<AttentionCache>) {
        let seq = x.nrows();
        let dh = self.head_dim();
        let scale = 1.0 / (dh as f64).sqrt();

        let q = self.wq.forward(x);
        let k = self.wk.forward(x);
        let v = self.wv.forward(x);

        let mut concat = Array2::zeros((seq, self.dim()));
        let mut probs = Vec::with_capacity(self.num_heads);
        let mut masks = Vec::new();
        for h in 0..self.num_heads {
            let cols = s![.., h * dh..(h + 1) * dh];
            let qh = q.slice(cols);
            let kh = k.slice(cols);
            let vh = v.slice(cols);
            let scores = qh.dot(&kh.t()) * scale;
            let p = softmax_rows(&scores);
            let attended = match rng.as_deref_mut() {
                Some(rng) if self.dropout > 0.0 => {
                    let mask = dropout_mask(seq, seq, self.dropout, rng);
                    let dropped = &p * &mask;
                    masks.push(mask);
                    dropped.dot(&vh)
                }
                _ => p.dot(&vh),
            };
            concat.slice_mut(cols).assign(&attended);
            probs.push(p);
        }
        let y = self.wo.forward(&concat);
        let cache = AttentionCache {
            q,
            k,
            v,
            probs,
            drop_masks: (!masks.is_empty()).then_some(masks),
            concat,
        };
        (y, Some(cache))
    }

    /// Accumulates parameter gradients and returns dx. `x` must be the
    /// forward input that produced `cache`.
    pub fn backward(&mut self, x: &Array2<f64>, cache: &AttentionCache, dy: &Array2<f64>) -> Array2<f64> {
        let dh = self.head_dim();
        let scale = 1.0 / (dh as f64).sqrt();

        let dconcat = self.wo.backward(&cache.concat, dy);

        let mut dq = Array2::zeros(cache.q.raw_dim());
        let mut dk = Array2::zeros(cache.k.raw_dim());
        let mut dv = Array2::zeros(cache.v.raw_dim());
        for h in 0..self.num_heads {
            let cols = s![.., h * dh..(h + 1) * dh];
            let qh = cache.q.slice(cols);
            let kh = cache.k.slice(cols);
            let vh = cache.v.slice(cols);
            let p = &cache.probs[h];
            let dctx = dconcat.slice(cols);

            // context = dropped @ v_h, dropped = p (.* mask)
            let ddropped = dctx.dot(&vh.t());
            let (dp, dropped_t);
            if let Some(masks) = &cache.drop_masks {
                dp = &ddropped * &masks[h];
                dropped_t = (p * &masks[h]).t().to_owned();
            } else {
                dp = ddropped;
                dropped_t = p.t().to_owned();
            }
            dv.slice_mut(cols).assign(&dropped_t.dot(&dctx));

            let dscores = softmax_rows_backward(p, &dp);
            dq.slice_mut(cols).assign(&(dscores.dot(&kh) * scale));
            dk.slice_mut(cols).assign(&(dscores.t().dot(&qh) * scale));
        }

        let mut dx = self.wq.backward(x, &dq);
        dx += &self.wk.backward(x, &dk);
        dx += &self.wv.backward(x, &dv);
        dx
    }
}

impl Params for MultiHeadAttention {
    fn visit_params(
        &mut self,
        prefix: &str,
        f: &mut dyn FnMut(&str, ArrayViewMutD<'_, f64>, ArrayViewMutD<'_, f64>),
    ) {
        self.wq.visit_params(&format!("{prefix}.wq"), f);
        self.wk.visit_params(&format!("{prefix}.wk"), f);
        self.wv.visit_params(&format!("{prefix}.wv"), f);
        self.wo.visit_params(&format!("{prefix}.wo"), f);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn output_shape_matches_input() {
        let mut rng = Rng::seed_from_u64(11);
        let attn = MultiHeadAttention::new(8, 2, 0.0, 0.2, &mut rng);
        let x = Array2::from_shape_fn((5, 8), |(i, j)| ((i * 8 + j) as f64).sin());
        let y = attn.forward(&x);
        assert_eq!(y.dim(), (5, 8));
    }

    #[test]
    fn singleton_sequence_is_well_defined() {
        let mut rng = Rng::seed_from_u64(11);
        let attn = MultiHeadAttention::new(8, 2, 0.0, 0.2, &mut rng);
        let x = Array2::from_shape_fn((1, 8), |(_, j)| j as f64 * 0.1);
        let y = attn.forward(&x);
        assert_eq!(y.dim(), (1, 8));
        assert!(y.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn cached_forward_without_dropout_equals_plain_forward() {
        let mut rng = Rng::seed_from_u64(11);
        let attn = MultiHeadAttention::new(8, 4, 0.0, 0.2, &mut rng);
        let x = Array2::from_shape_fn((3, 8), |(i, j)| (i as f64) - (j as f64) * 0.3);
        let y1 = attn.forward(&x);
        let (y2, _) = attn.forward_cached(&x, None);
        assert_eq!(y1, y2);
    }
}
