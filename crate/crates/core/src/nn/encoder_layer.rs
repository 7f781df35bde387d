//! One transformer encoder layer: self-attention and a position-wise
//! feedforward block, each wrapped in residual + post-layer-norm.

use ndarray::{Array2, ArrayViewMutD};

use super::{
    dropout_mask, Activation, AttentionCache, LayerNorm, LayerNormCache, Linear,
    MultiHeadAttention, Params, Rng,
};

#[derive(Debug, Clone)]
pub struct EncoderLayer {
    pub attn: MultiHeadAttention,
    pub norm1: LayerNorm,
    pub ff1: Linear,
    pub ff2: Linear,
    pub norm2: LayerNorm,
    pub activation: Activation,
    /// Dropout on the attention output, the feedforward inner activation,
    /// and the feedforward output (training passes only).
    pub dropout: f64,
}

#[derive(Debug)]
pub struct EncoderLayerCache {
    attn: AttentionCache,
    drop_attn: Option<Array2<f64>>,
    norm1: LayerNormCache,
    /// norm1 output: feedforward input and residual source.
    h1: Array2<f64>,
    /// ff1 output before activation.
    pre_act: Array2<f64>,
    drop_inner: Option<Array2<f64>>,
    /// activation output after inner dropout: ff2 input.
    inner: Array2<f64>,
    drop_ff: Option<Array2<f64>>,
    norm2: LayerNormCache,
}

impl EncoderLayer {
    pub fn new(
        dim: usize,
        num_heads: usize,
        ff_dim: usize,
        activation: Activation,
        dropout: f64,
        layer_norm_eps: f64,
        init_std: f64,
        rng: &mut Rng,
    ) -> EncoderLayer {
        EncoderLayer {
            attn: MultiHeadAttention::new(dim, num_heads, dropout, init_std, rng),
            norm1: LayerNorm::new(dim, layer_norm_eps),
            ff1: Linear::new(dim, ff_dim, init_std, rng),
            ff2: Linear::new(ff_dim, dim, init_std, rng),
            norm2: LayerNorm::new(dim, layer_norm_eps),
            activation,
            dropout,
        }
    }

    pub fn dim(&self) -> usize {
        self.attn.dim()
    }

    /// Inference pass: no dropout, no cache.
    pub fn forward(&self, x: &Array2<f64>) -> Array2<f64> {
        let a = self.attn.forward(x);
        let h1 = self.norm1.forward(&(x + &a));
        let inner = self.activation.forward(&self.ff1.forward(&h1));
        let f = self.ff2.forward(&inner);
        self.norm2.forward(&(&h1 + &f))
    }

    /// Training pass with dropout; returns the cache for `backward`.
    pub fn forward_cached(&self, x: &Array2<f64>, mut rng: Option<&mut Rng>) -> (Array2<f64>, EncoderLayerCache) {
        let (rows, _) = x.dim();
        let mask = |r: usize, c: usize, rng: &mut Option<&mut Rng>| -> Option<Array2<f64>> {
            match rng.as_deref_mut() {
                Some(rng) if self.dropout > 0.0 => Some(dropout_mask(r, c, self.dropout, rng)),
                _ => None,
            }
        };

        let (mut a, attn_cache) = self.attn.forward_cached(x, rng.as_deref_mut());
        let drop_attn = mask(rows, a.ncols(), &mut rng);
        if let Some(m) = &drop_attn {
            a *= m;
        }
        let (h1, norm1_cache) = self.norm1.forward_cached(&(x + &a));

        let pre_act = self.ff1.forward(&h1);
        let mut inner = self.activation.forward(&pre_act);
        let drop_inner = mask(rows, inner.ncols(), &mut rng);
        if let Some(m) = &drop_inner {
            inner *= m;
        }
        let mut f = self.ff2.forward(&inner);
        let drop_ff = mask(rows, f.ncols(), &mut rng);
        if let Some(m) = &drop_ff {
            f *= m;
        }
        let (y, norm2_cache) = self.norm2.forward_cached(&(&h1 + &f));

        let cache = EncoderLayerCache {
            attn: attn_cache,
            drop_attn,
            norm1: norm1_cache,
            h1,
            pre_act,
            drop_inner,
            inner,
            drop_ff,
            norm2: norm2_cache,
        };
        (y, cache)
    }

    /// Accumulates gradients and returns dx. `x` must be the forward input.
    pub fn backward(&mut self, x: &Array2<f64>, cache: &EncoderLayerCache, dy: &Array2<f64>) -> Array2<f64> {
        let dn2_in = self.norm2.backward(&cache.norm2, dy);

        // feedforward branch
        let mut df = dn2_in.clone();
        if let Some(m) = &cache.drop_ff {
            df *= m;
        }
        let mut dinner = self.ff2.backward(&cache.inner, &df);
        if let Some(m) = &cache.drop_inner {
            dinner *= m;
        }
        let dpre = self.activation.backward(&cache.pre_act, &dinner);
        let mut dh1 = dn2_in;
        dh1 += &self.ff1.backward(&cache.h1, &dpre);

        let dn1_in = self.norm1.backward(&cache.norm1, &dh1);

        // attention branch
        let mut da = dn1_in.clone();
        if let Some(m) = &cache.drop_attn {
            da *= m;
        }
        let mut dx = dn1_in;
        dx += &self.attn.backward(x, &cache.attn, &da);
        dx
    }
}

impl Params for EncoderLayer {
    fn visit_params(
        &mut self,
        prefix: &str,
        f: &mut dyn FnMut(&str, ArrayViewMutD<'_, f64>, ArrayViewMutD<'_, f64>),
    ) {
        self.attn.visit_params(&format!("{prefix}.attn"), f);
        self.norm1.visit_params(&format!("{prefix}.norm1"), f);
        self.ff1.visit_params(&format!("{prefix}.ff1"), f);
        self.ff2.visit_params(&format!("{prefix}.ff2"), f);
        self.norm2.visit_params(&format!("{prefix}.norm2"), f);
    }
}
