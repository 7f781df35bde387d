//! Elementwise activations with exact derivatives for the backward pass.

use ndarray::Array2;

const GELU_C: f64 = 0.7978845608028654; // sqrt(2/pi)
const GELU_A: f64 = 0.044715;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Gelu,
    Relu,
}

impl Activation {
    pub fn forward(self, x: &Array2<f64>) -> Array2<f64> {
        match self {
            Activation::Gelu => x.mapv(gelu),
            Activation::Relu => x.mapv(|v| v.max(0.0)),
        }
    }

    /// dx from upstream dy, given the pre-activation input x.
    pub fn backward(self, x: &Array2<f64>, dy: &Array2<f64>) -> Array2<f64> {
        match self {
            Activation::Gelu => {
                let mut dx = dy.clone();
                dx.zip_mut_with(x, |d, &v| *d *= gelu_grad(v));
                dx
            }
            Activation::Relu => {
                let mut dx = dy.clone();
                dx.zip_mut_with(x, |d, &v| {
                    if v <= 0.0 {
                        *d = 0.0;
                    }
                });
                dx
            }
        }
    }
}

// tanh form of GELU
fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + (GELU_C * (x + GELU_A * x * x * x)).tanh())
}

fn gelu_grad(x: f64) -> f64 {
    let inner = GELU_C * (x + GELU_A * x * x * x);
    let t = inner.tanh();
    let sech2 = 1.0 - t * t;
    0.5 * (1.0 + t) + 0.5 * x * sech2 * GELU_C * (1.0 + 3.0 * GELU_A * x * x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn gelu_reference_values() {
        // gelu(0) = 0, gelu is ~x for large x, ~0 for very negative x
        assert_abs_diff_eq!(gelu(0.0), 0.0);
        assert_abs_diff_eq!(gelu(10.0), 10.0, epsilon = 1e-6);
        assert_abs_diff_eq!(gelu(-10.0), 0.0, epsilon = 1e-6);
        // known value: gelu(1) ~ 0.841192 under the tanh approximation
        assert_abs_diff_eq!(gelu(1.0), 0.841192, epsilon = 1e-5);
    }

    #[test]
    fn gelu_grad_matches_finite_difference() {
        for &x in &[-3.0, -1.0, -0.1, 0.0, 0.5, 2.0, 4.0] {
            let eps = 1e-6;
            let numeric = (gelu(x + eps) - gelu(x - eps)) / (2.0 * eps);
            assert_abs_diff_eq!(gelu_grad(x), numeric, epsilon = 1e-8);
        }
    }

    #[test]
    fn relu_backward_masks_negative_inputs() {
        let x = array![[-1.0, 2.0], [0.0, 3.0]];
        let dy = array![[5.0, 5.0], [5.0, 5.0]];
        let dx = Activation::Relu.backward(&x, &dy);
        assert_eq!(dx, array![[0.0, 5.0], [0.0, 5.0]]);
    }
}
