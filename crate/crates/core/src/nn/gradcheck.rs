//! Central finite-difference gradient checking.
//!
//! The numerical side only ever evaluates the loss forward, so it is
//! independent of every analytic backward pass it is used to verify.

use super::{Params, snapshot_params};

/// Collects analytic gradients in visit order.
pub fn analytic_grads(model: &mut impl Params) -> Vec<f64> {
    let mut flat = Vec::new();
    model.visit_params("", &mut |_, _, g| flat.extend(g.iter().copied()));
    flat
}

/// Central differences (f(x+e) - f(x-e)) / 2e for every parameter.
pub fn numerical_grads<M, F>(model: &mut M, mut loss: F, eps: f64) -> Vec<f64>
where
    M: Params,
    F: FnMut(&mut M) -> f64,
{
    let n = snapshot_params(model).len();
    let mut grads = Vec::with_capacity(n);
    for i in 0..n {
        nudge(model, i, eps);
        let plus = loss(model);
        nudge(model, i, -2.0 * eps);
        let minus = loss(model);
        nudge(model, i, eps);
        grads.push((plus - minus) / (2.0 * eps));
    }
    grads
}

fn nudge(model: &mut impl Params, flat_index: usize, delta: f64) {
    let mut offset = 0usize;
    model.visit_params("", &mut |_, mut v, _| {
        let len = v.len();
        if flat_index >= offset && flat_index < offset + len {
            let local = flat_index - offset;
            *v.iter_mut().nth(local).expect("index in range") += delta;
        }
        offset += len;
    });
}

/// |a - n| / max(|a|, |n|, floor); symmetric and stable near zero.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let denom = analytic.abs().max(numeric.abs()).max(1e-6);
    (analytic - numeric).abs() / denom
}

/// Maximum relative error across all parameters, with the offending
/// parameter's flat index.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> (f64, usize) {
    assert_eq!(analytic.len(), numeric.len());
    let mut worst = (0.0f64, 0usize);
    for (i, (&a, &n)) in analytic.iter().zip(numeric).enumerate() {
        let e = relative_error(a, n);
        if e > worst.0 {
            worst = (e, i);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{zero_grads, Linear, Params, Rng};
    use ndarray::Array2;
    use rand::SeedableRng;

    // loss = sum(linear(x)) on a fixed input; analytic vs numeric.
    #[test]
    fn linear_layer_gradients_match() {
        let mut rng = Rng::seed_from_u64(2);
        let mut lin = Linear::new(3, 2, 0.5, &mut rng);
        let x = Array2::from_shape_fn((4, 3), |(i, j)| (i as f64 * 0.7) - (j as f64 * 0.4));

        zero_grads(&mut lin);
        let y = lin.forward(&x);
        let dy = Array2::ones(y.raw_dim());
        lin.backward(&x, &dy);
        let analytic = analytic_grads(&mut lin);

        let numeric = numerical_grads(&mut lin, |l| l.forward(&x).sum(), 1e-6);
        let (err, _) = max_relative_error(&analytic, &numeric);
        assert!(err < 1e-8, "max relative error {err}");
    }
}
