//! Affine layer `y = x Wᵀ + b` over row-major sequences.

use ndarray::{Array2, ArrayViewMutD, Axis};

use super::{Param1, Param2, Params, Rng};

#[derive(Debug, Clone)]
pub struct Linear {
    /// (out_dim, in_dim)
    pub w: Param2,
    pub b: Param1,
}

impl Linear {
    pub fn new(in_dim: usize, out_dim: usize, std: f64, rng: &mut Rng) -> Linear {
        Linear {
            w: Param2::randn(out_dim, in_dim, std, rng),
            b: Param1::zeros(out_dim),
        }
    }

    pub fn in_dim(&self) -> usize {
        self.w.v.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.w.v.nrows()
    }

    /// x: (seq, in) -> (seq, out)
    pub fn forward(&self, x: &Array2<f64>) -> Array2<f64> {
        x.dot(&self.w.v.t()) + &self.b.v
    }

    /// Accumulates dW and db from `dy` and returns dx. `x` must be the
    /// forward input.
    pub fn backward(&mut self, x: &Array2<f64>, dy: &Array2<f64>) -> Array2<f64> {
        self.w.g += &dy.t().dot(x);
        self.b.g += &dy.sum_axis(Axis(0));
        dy.dot(&self.w.v)
    }
}

impl Params for Linear {
    fn visit_params(
        &mut self,
        prefix: &str,
        f: &mut dyn FnMut(&str, ArrayViewMutD<'_, f64>, ArrayViewMutD<'_, f64>),
    ) {
        self.w.visit_params(&format!("{prefix}.weight"), f);
        self.b.visit_params(&format!("{prefix}.bias"), f);
    }
}
