//! AdamW: Adam with decoupled weight decay.

use ndarray::ArrayD;

use super::Params;

#[derive(Debug, Clone)]
pub struct AdamW {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    t: u64,
    slots: Vec<Slot>,
}

#[derive(Debug, Clone)]
struct Slot {
    m: ArrayD<f64>,
    v: ArrayD<f64>,
    decay: bool,
}

impl AdamW {
    pub fn new(lr: f64, weight_decay: f64) -> AdamW {
        AdamW {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay,
            t: 0,
            slots: Vec::new(),
        }
    }

    /// Applies one update from the gradients accumulated in `model`.
    /// Biases and layer-norm parameters are exempt from weight decay.
    pub fn step(&mut self, model: &mut impl Params) {
        self.t += 1;
        let t = self.t as i32;
        let bias1 = 1.0 - self.beta1.powi(t);
        let bias2 = 1.0 - self.beta2.powi(t);
        let (lr, b1, b2, eps, wd) = (self.lr, self.beta1, self.beta2, self.eps, self.weight_decay);

        let slots = &mut self.slots;
        let mut idx = 0usize;
        model.visit_params("", &mut |name, mut value, grad| {
            if slots.len() == idx {
                slots.push(Slot {
                    m: ArrayD::zeros(value.raw_dim()),
                    v: ArrayD::zeros(value.raw_dim()),
                    decay: !(name.ends_with(".bias") || name.contains("norm")),
                });
            }
            let slot = &mut slots[idx];
            assert_eq!(slot.m.shape(), value.shape(), "parameter set changed between steps");
            ndarray::Zip::from(&mut value)
                .and(&grad)
                .and(&mut slot.m)
                .and(&mut slot.v)
                .for_each(|w, &g, m, v| {
                    *m = b1 * *m + (1.0 - b1) * g;
                    *v = b2 * *v + (1.0 - b2) * g * g;
                    let mhat = *m / bias1;
                    let vhat = *v / bias2;
                    let mut update = mhat / (vhat.sqrt() + eps);
                    if slot.decay {
                        update += wd * *w;
                    }
                    *w -= lr * update;
                });
            idx += 1;
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{zero_grads, Param2, Params};

    #[test]
    fn minimizes_a_quadratic() {
        // f(w) = 0.5 * sum(w^2), grad = w
        let mut p = Param2::zeros(2, 2);
        p.v.fill(5.0);
        let mut opt = AdamW::new(0.1, 0.0);
        for _ in 0..500 {
            zero_grads(&mut p);
            p.g.assign(&p.v);
            opt.step(&mut p);
        }
        assert!(p.v.iter().all(|&w| w.abs() < 1e-3), "{:?}", p.v);
    }

    #[test]
    fn weight_decay_shrinks_weights_without_gradient() {
        let mut p = Param2::zeros(1, 1);
        p.v[[0, 0]] = 1.0;
        let mut opt = AdamW::new(0.01, 0.1);
        for _ in 0..10 {
            zero_grads(&mut p);
            opt.step(&mut p);
        }
        assert!(p.v[[0, 0]] < 1.0);
    }

    #[test]
    fn bias_named_params_skip_decay() {
        struct Head {
            b: crate::nn::Param1,
        }
        impl Params for Head {
            fn visit_params(
                &mut self,
                _prefix: &str,
                f: &mut dyn FnMut(&str, ndarray::ArrayViewMutD<'_, f64>, ndarray::ArrayViewMutD<'_, f64>),
            ) {
                self.b.visit_params("head.bias", f);
            }
        }
        let mut h = Head {
            b: crate::nn::Param1::ones(1),
        };
        let mut opt = AdamW::new(0.01, 0.5);
        for _ in 0..10 {
            opt.step(&mut h);
        }
        assert_eq!(h.b.v[0], 1.0);
    }
}
