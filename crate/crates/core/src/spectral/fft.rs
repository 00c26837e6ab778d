//! Square 2-D complex FFTs built from 1-D `rustfft` plans.
//!
//! Plans come from a per-thread planner, so there is no shared mutable
//! state between solver instances or rayon workers.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> std::sync::Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// In-place unnormalized 2-D transform of a row-major `n x n` array.
fn transform(data: &mut [Complex64], n: usize, inverse: bool) {
    debug_assert_eq!(data.len(), n * n);
    let fft = plan(n, inverse);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    // rows are contiguous: one batched call covers every row
    fft.process_with_scratch(data, &mut scratch);

    let mut column = vec![Complex64::default(); n];
    for q in 0..n {
        for p in 0..n {
            column[p] = data[p * n + q];
        }
        fft.process_with_scratch(&mut column, &mut scratch);
        for p in 0..n {
            data[p * n + q] = column[p];
        }
    }
}

/// Grid values to Fourier coefficients, `c_k = n^-2 sum_j f_j e^{-i k.theta_j}`.
pub(crate) fn forward(grid: &[f64], n: usize) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = grid.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    transform(&mut data, n, false);
    let scale = 1.0 / (n * n) as f64;
    for c in &mut data {
        *c *= scale;
    }
    data
}

/// Fourier coefficients to (real parts of) grid values.
pub(crate) fn inverse(coeffs: &[Complex64], n: usize) -> Vec<f64> {
    let mut data = coeffs.to_vec();
    transform(&mut data, n, true);
    data.into_iter().map(|c| c.re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_of_single_exponential_is_delta() {
        let n = 8;
        let mut grid = vec![0.0; n * n];
        for p in 0..n {
            for q in 0..n {
                let t1 = std::f64::consts::TAU * p as f64 / n as f64;
                let t2 = std::f64::consts::TAU * q as f64 / n as f64;
                grid[p * n + q] = (2.0 * t1 - t2).cos();
            }
        }
        let c = forward(&grid, n);
        // cos = (e^{ik.theta} + e^{-ik.theta}) / 2 with k = (2, -1)
        assert!((c[2 * n + (n - 1)] - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        assert!((c[(n - 2) * n + 1] - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        let total: f64 = c.iter().map(|z| z.norm()).sum();
        assert!((total - 1.0).abs() < 1e-13);
        let back = inverse(&c, n);
        for (a, b) in grid.iter().zip(&back) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
