//! Inverted dropout masks. Entries are 0 or 1/(1-p), so inference needs no
//! rescaling and backward reuses the same mask.

use ndarray::Array2;
use rand::Rng as _;

use super::Rng;

pub fn dropout_mask(rows: usize, cols: usize, p: f64, rng: &mut Rng) -> Array2<f64> {
    assert!((0.0..1.0).contains(&p), "dropout probability must be in [0, 1)");
    let keep = 1.0 - p;
    Array2::from_shape_simple_fn((rows, cols), || {
        if rng.random::<f64>() < keep {
            1.0 / keep
        } else {
            0.0
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn mask_preserves_expectation() {
        let mut rng = Rng::seed_from_u64(3);
        let mask = dropout_mask(200, 50, 0.4, &mut rng);
        let mean = mask.mean().unwrap();
        assert!((mean - 1.0).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn zero_probability_keeps_everything() {
        let mut rng = Rng::seed_from_u64(3);
        let mask = dropout_mask(4, 4, 0.0, &mut rng);
        assert!(mask.iter().all(|&v| v == 1.0));
    }
}
