//! Fixed sinusoidal positional encodings.

use ndarray::Array2;

/// PE[pos, 2i] = sin(pos / 10000^(2i/d)), PE[pos, 2i+1] = cos(same).
pub fn sinusoidal_encoding(len: usize, dim: usize) -> Array2<f64> {
    let mut pe = Array2::zeros((len, dim));
    for pos in 0..len {
        for i in 0..dim.div_ceil(2) {
            let angle = pos as f64 / 10000f64.powf(2.0 * i as f64 / dim as f64);
            pe[[pos, 2 * i]] = angle.sin();
            if 2 * i + 1 < dim {
                pe[[pos, 2 * i + 1]] = angle.cos();
            }
        }
    }
    pe
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn first_position_is_sin0_cos0_pattern() {
        let pe = sinusoidal_encoding(3, 6);
        for i in 0..3 {
            assert_abs_diff_eq!(pe[[0, 2 * i]], 0.0);
            assert_abs_diff_eq!(pe[[0, 2 * i + 1]], 1.0);
        }
    }

    #[test]
    fn values_bounded_and_distinct_across_positions() {
        let pe = sinusoidal_encoding(16, 8);
        assert!(pe.iter().all(|v| v.abs() <= 1.0));
        assert_ne!(pe.row(1), pe.row(2));
    }

    #[test]
    fn odd_dimension_supported() {
        let pe = sinusoidal_encoding(4, 7);
        assert_eq!(pe.dim(), (4, 7));
    }
}
