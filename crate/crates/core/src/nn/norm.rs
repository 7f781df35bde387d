//! Layer normalization over the feature axis of each row.

use ndarray::{Array1, Array2, ArrayViewMutD, Axis};

use super::{Param1, Params};

#[derive(Debug, Clone)]
pub struct LayerNorm {
    pub gamma: Param1,
    pub beta: Param1,
    pub eps: f64,
}

#[derive(Debug, Clone)]
pub struct LayerNormCache {
    xhat: Array2<f64>,
    inv_std: Array1<f64>,
}

impl LayerNorm {
    pub fn new(dim: usize, eps: f64) -> LayerNorm {
        LayerNorm {
            gamma: Param1::ones(dim),
            beta: Param1::zeros(dim),
            eps,
        }
    }

    pub fn forward(&self, x: &Array2<f64>) -> Array2<f64> {
        self.forward_cached(x).0
    }

    pub fn forward_cached(&self, x: &Array2<f64>) -> (Array2<f64>, LayerNormCache) {
        let d = x.ncols() as f64;
        let mean = x.mean_axis(Axis(1)).expect("non-empty rows");
        let mut xhat = x.clone();
        for (mut row, &mu) in xhat.rows_mut().into_iter().zip(mean.iter()) {
            row.mapv_inplace(|v| v - mu);
        }
        let var = xhat.mapv(|v| v * v).sum_axis(Axis(1)) / d;
        let inv_std = var.mapv(|v| 1.0 / (v + self.eps).sqrt());
        for (mut row, &is) in xhat.rows_mut().into_iter().zip(inv_std.iter()) {
            row.mapv_inplace(|v| v * is);
        }
        let y = &xhat * &self.gamma.v + &self.beta.v;
        (y, LayerNormCache { xhat, inv_std })
    }

    pub fn backward(&mut self, cache: &LayerNormCache, dy: &Array2<f64>) -> Array2<f64> {
        let LayerNormCache { xhat, inv_std } = cache;
        self.gamma.g += &(dy * xhat).sum_axis(Axis(0));
        self.beta.g += &dy.sum_axis(Axis(0));

        let dxhat = dy * &self.gamma.v;
        let mean_dxhat = dxhat.mean_axis(Axis(1)).expect("non-empty rows");
        let mean_dxhat_xhat = (&dxhat * xhat).mean_axis(Axis(1)).expect("non-empty rows");

        let mut dx = dxhat;
        for (((mut row, xh_row), (&m1, &m2)), &is) in dx
            .rows_mut()
            .into_iter()
            .zip(xhat.rows())
            .zip(mean_dxhat.iter().zip(mean_dxhat_xhat.iter()))
            .zip(inv_std.iter())
        {
            for (v, &xh) in row.iter_mut().zip(xh_row.iter()) {
                *v = is * (*v - m1 - xh * m2);
            }
        }
        dx
    }
}

impl Params for LayerNorm {
    fn visit_params(
        &mut self,
        prefix: &str,
        f: &mut dyn FnMut(&str, ArrayViewMutD<'_, f64>, ArrayViewMutD<'_, f64>),
    ) {
        self.gamma.visit_params(&format!("{prefix}.weight"), f);
        self.beta.visit_params(&format!("{prefix}.bias"), f);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn normalizes_rows_to_zero_mean_unit_var() {
        let ln = LayerNorm::new(4, 1e-12);
        let x = array![[1.0, 2.0, 3.0, 4.0], [10.0, 10.0, 20.0, 20.0]];
        let y = ln.forward(&x);
        for row in y.rows() {
            let mean: f64 = row.mean().unwrap();
            let var: f64 = row.mapv(|v| (v - mean) * (v - mean)).mean().unwrap();
            assert_abs_diff_eq!(mean, 0.0, epsilon = 1e-10);
            assert_abs_diff_eq!(var, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn gamma_beta_apply() {
        let mut ln = LayerNorm::new(2, 1e-12);
        ln.gamma.v = array![2.0, 2.0];
        ln.beta.v = array![1.0, 1.0];
        let x = array![[0.0, 2.0]];
        let y = ln.forward(&x);
        assert_abs_diff_eq!(y[[0, 0]], -1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(y[[0, 1]], 3.0, epsilon = 1e-9);
    }
}
