//! Weights for equally spaced samples.

/// Composite Simpson weights for `len` samples spaced by `h`, closing with the
/// 3/8 rule when the number of intervals is odd. Exact for cubics.
pub fn simpson_weights(len: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; len];
    match len {
        0 | 1 => {}
        2 => {
            w[0] = h / 2.0;
            w[1] = h / 2.0;
        }
        _ => {
            let intervals = len - 1;
            let simpson_end = if intervals.is_multiple_of(2) { intervals } else { intervals - 3 };
            for i in (0..simpson_end).step_by(2) {
                w[i] += h / 3.0;
                w[i + 1] += 4.0 * h / 3.0;
                w[i + 2] += h / 3.0;
            }
            if simpson_end < intervals {
                for (j, c) in [1.0, 3.0, 3.0, 1.0].into_iter().enumerate() {
                    w[simpson_end + j] += 3.0 * h / 8.0 * c;
                }
            }
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_cubics() {
        for len in [3, 4, 5, 8, 11] {
            let h = 0.5;
            let w = simpson_weights(len, h);
            let s: f64 = (0..len).map(|i| w[i] * (i as f64 * h).powi(3)).sum();
            let b = (len - 1) as f64 * h;
            assert!((s - b.powi(4) / 4.0).abs() < 1e-12, "len {len}");
        }
    }
}
