//! Independent oracles: explicit trigonometric polynomials evaluated pointwise
//! from closed-form derivatives and integrated by grid quadrature (exact for
//! polynomials whose band is below the grid size).
#![allow(dead_code)]

use std::f64::consts::TAU;

use num_complex::Complex64;
use qgs_core::spectral::{SpectralField, VelocityField, WaveIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `sum_j a_j cos(k_j.theta) + b_j sin(k_j.theta)`.
#[derive(Clone, Debug)]
pub struct Trig {
    pub terms: Vec<(i64, i64, f64, f64)>,
}

impl Trig {
    pub fn single(k1: i64, k2: i64, a: f64, b: f64) -> Self {
        Trig {
            terms: vec![(k1, k2, a, b)],
        }
    }

    /// Random polynomial on the half lattice with `max(|k1|, |k2|) <= band`.
    pub fn random(rng: &mut ChaCha8Rng, band: i64, modes: usize) -> Self {
        let mut terms = Vec::new();
        while terms.len() < modes {
            let k1 = rng.gen_range(0..=band);
            let k2 = rng.gen_range(-band..=band);
            if k1 == 0 && k2 <= 0 {
                continue;
            }
            terms.push((k1, k2, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
        Trig { terms }
    }

    /// Value of `d1^i d2^j` of the polynomial.
    pub fn deriv(&self, i: u32, j: u32, t: [f64; 2]) -> f64 {
        let mut s = 0.0;
        for &(k1, k2, a, b) in &self.terms {
            let ph = k1 as f64 * t[0] + k2 as f64 * t[1];
            // d^m/dx^m of (a cos + b sin) at order m = i + j
            let (c, sn) = (ph.cos(), ph.sin());
            let m = i + j;
            let v = match m % 4 {
                0 => a * c + b * sn,
                1 => -a * sn + b * c,
                2 => -a * c - b * sn,
                _ => a * sn - b * c,
            };
            s += (k1 as f64).powi(i as i32) * (k2 as f64).powi(j as i32) * v;
        }
        s
    }

    pub fn value(&self, t: [f64; 2]) -> f64 {
        self.deriv(0, 0, t)
    }

    /// Velocity `grad_perp = (-d2, d1)` of the polynomial as a stream function.
    pub fn velocity(&self, t: [f64; 2]) -> [f64; 2] {
        [-self.deriv(0, 1, t), self.deriv(1, 0, t)]
    }

    pub fn field(&self, n: usize) -> SpectralField {
        let mut f = SpectralField::zeros(n);
        for &(k1, k2, a, b) in &self.terms {
            let k = WaveIndex::new(k1, k2);
            let c = f.coeff(k) + Complex64::new(a / 2.0, -b / 2.0);
            f.set_coeff(k, c).unwrap();
        }
        f
    }

    pub fn velocity_field(&self, n: usize) -> VelocityField {
        VelocityField::new(self.field(n), [0.0; 2])
    }

    pub fn scaled(&self, s: f64) -> Self {
        Trig {
            terms: self.terms.iter().map(|&(a, b, c, d)| (a, b, s * c, s * d)).collect(),
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn grid_points(n: usize) -> impl Iterator<Item = [f64; 2]> {
    (0..n).flat_map(move |p| {
        (0..n).map(move |q| [TAU * p as f64 / n as f64, TAU * q as f64 / n as f64])
    })
}

/// `int g dtheta` by the rectangle rule on an `n x n` grid.
pub fn quad(n: usize, g: impl Fn([f64; 2]) -> f64) -> f64 {
    let h = TAU / n as f64;
    grid_points(n).map(g).sum::<f64>() * h * h
}

/// `beta int psi_u (v)_2` with both polynomials as stream functions.
pub fn cocycle_oracle(n: usize, beta: f64, u: &Trig, v: &Trig) -> f64 {
    quad(n, |t| beta * u.value(t) * v.deriv(1, 0, t))
}

/// `int <grad_perp u, grad_perp v>`
pub fn inner_oracle(n: usize, u: &Trig, v: &Trig) -> f64 {
    quad(n, |t| {
        let a = u.velocity(t);
        let b = v.velocity(t);
        a[0] * b[0] + a[1] * b[1]
    })
}

/// Largest pointwise difference between two velocity fields on the grid.
pub fn max_grid_diff(a: &VelocityField, b: &VelocityField) -> f64 {
    let [a1, a2] = a.to_grid();
    let [b1, b2] = b.to_grid();
    a1.iter()
        .zip(&b1)
        .chain(a2.iter().zip(&b2))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Print one line per criterion and fail the test when it does not hold.
pub fn report(id: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {id:>2} [{name}]: {} | {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id} failed: {detail}");
}
