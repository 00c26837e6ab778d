//! Noise directions `H_i` driving the stochastic flows.

use serde::{Deserialize, Serialize};

use crate::algebra::{basis_field, half_lattice, lambda, viscosity_coefficient, BasisFieldSpec, BasisKind};
use crate::error::{Error, Result};
use crate::spectral::{SpectralField, VelocityField, WaveIndex};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum NoiseModel {
    /// `{A_k, B_k}` over the half-lattice `|k|_1 <= m`, `lambda = |k|_1^-r`.
    KolmogorovBasis { m: i64, r: f64 },
    /// `H_1 = (sqrt(2 nu), 0)`, `H_2 = (0, sqrt(2 nu))`.
    TwoConstantFields { nu: f64 },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::KolmogorovBasis { m, r } => {
                if m < 0 {
                    return Err(Error::InvalidArgument(format!("noise m must be >= 0, got {m}")));
                }
                if !(r.is_finite() && r > 0.0) {
                    return Err(Error::InvalidArgument(format!("noise r must be > 0, got {r}")));
                }
            }
            NoiseModel::TwoConstantFields { nu } => {
                if !(nu.is_finite() && nu >= 0.0) {
                    return Err(Error::InvalidArgument(format!("noise nu must be >= 0, got {nu}")));
                }
            }
        }
        Ok(())
    }

    /// Effective viscosity: the generator of the flow is `u.grad + nu laplacian`.
    pub fn viscosity(&self) -> f64 {
        match *self {
            NoiseModel::KolmogorovBasis { m, r } => viscosity_coefficient(m, r),
            NoiseModel::TwoConstantFields { nu } => nu,
        }
    }

    /// Number of independent Brownian motions.
    pub fn dimension(&self) -> usize {
        match *self {
            NoiseModel::KolmogorovBasis { m, .. } => 2 * half_lattice(m).len(),
            NoiseModel::TwoConstantFields { .. } => 2,
        }
    }

    /// Noise directions as velocity fields, in the order used by [`PointNoise`].
    pub fn fields(&self, n: usize) -> Result<Vec<VelocityField>> {
        match *self {
            NoiseModel::KolmogorovBasis { m, r } => {
                let mut out = Vec::new();
                for k in half_lattice(m) {
                    for kind in [BasisKind::A, BasisKind::B] {
                        out.push(basis_field(BasisFieldSpec { kind, k, r }, n)?);
                    }
                }
                Ok(out)
            }
            NoiseModel::TwoConstantFields { nu } => {
                let s = (2.0 * nu).sqrt();
                Ok(vec![
                    VelocityField::constant(n, [s, 0.0]),
                    VelocityField::constant(n, [0.0, s]),
                ])
            }
        }
    }

    /// `sum_i H_i.grad(H_i.grad f)`, the second-order part of the generator,
    /// evaluated pseudo-spectrally (exact while `band(f) + 2m < n/2`).
    pub fn generator_sum(&self, f: &SpectralField) -> Result<SpectralField> {
        let n = f.n();
        let mut out = SpectralField::zeros(n);
        for h in self.fields(n)? {
            let [h1, h2] = h.to_grid();
            let directional = |g: &SpectralField| -> Result<SpectralField> {
                let d1 = g.dx1().to_grid();
                let d2 = g.dx2().to_grid();
                let v: Vec<f64> = (0..n * n).map(|i| h1[i] * d1[i] + h2[i] * d2[i]).collect();
                SpectralField::from_grid(n, &v)
            };
            out += &directional(&directional(f)?)?;
        }
        Ok(out)
    }

    /// Precomputed table for fast pointwise evaluation.
    pub fn point_noise(&self) -> PointNoise {
        match *self {
            NoiseModel::KolmogorovBasis { m, r } => PointNoise::Basis(
                half_lattice(m)
                    .into_iter()
                    .map(|k| (k, lambda(k, r)))
                    .collect(),
            ),
            NoiseModel::TwoConstantFields { nu } => PointNoise::Constant((2.0 * nu).sqrt()),
        }
    }
}

/// Pointwise evaluation of the noise directions.
#[derive(Clone, Debug)]
pub enum PointNoise {
    Basis(Vec<(WaveIndex, f64)>),
    Constant(f64),
}

impl PointNoise {
    pub fn dimension(&self) -> usize {
        match self {
            PointNoise::Basis(v) => 2 * v.len(),
            PointNoise::Constant(_) => 2,
        }
    }

    /// `sum_i H_i(theta) dw_i`, with `dw` ordered as `A_k, B_k` per wave index.
    pub fn apply(&self, theta: [f64; 2], dw: &[f64]) -> [f64; 2] {
        match self {
            PointNoise::Basis(modes) => {
                let mut out = [0.0; 2];
                for (i, &(k, lam)) in modes.iter().enumerate() {
                    // A_k = lam cos(phi) (k2, -k1), B_k = lam sin(phi) (k2, -k1)
                    let (s, c) = k.phase(theta).sin_cos();
                    let w = lam * (c * dw[2 * i] + s * dw[2 * i + 1]);
                    out[0] += w * k.k2 as f64;
                    out[1] -= w * k.k1 as f64;
                }
                out
            }
            PointNoise::Constant(s) => [s * dw[0], s * dw[1]],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pointwise_matches_fields() {
        let model = NoiseModel::KolmogorovBasis { m: 3, r: 3.0 };
        let fields = model.fields(16).unwrap();
        let pn = model.point_noise();
        assert_eq!(fields.len(), pn.dimension());
        let theta = [0.3, 5.1];
        for (i, f) in fields.iter().enumerate() {
            let mut dw = vec![0.0; pn.dimension()];
            dw[i] = 1.0;
            let a = pn.apply(theta, &dw);
            let b = f.eval(theta);
            assert!((a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn two_field_model() {
        let model = NoiseModel::TwoConstantFields { nu: 0.125 };
        assert_eq!(model.viscosity(), 0.125);
        let f = model.fields(8).unwrap();
        assert_eq!(f[0].harmonic(), [0.5, 0.0]);
        assert_eq!(f[1].harmonic(), [0.0, 0.5]);
        assert!(NoiseModel::TwoConstantFields { nu: -1.0 }.validate().is_err());
    }
}
