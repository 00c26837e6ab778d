//! The centrally extended algebra of divergence-free fields on the torus.
//!
//! Elements are pairs `(u, a)` of a [`VelocityField`] and a real central
//! coordinate. The extension is built from the cocycle
//! `omega(u, v) = beta * int psi_u v_2 dtheta` (the `alpha = beta dtheta_2`
//! Roger cocycle) and its metric representative `T`, `<<Tu, v>> = omega(u, v)`.
//!
//! Bracket conventions: `[u, v]` is the vector-field commutator
//! `(u.grad)v - (v.grad)u`, projected. For the right-invariant metric the
//! coadjoint operator satisfies `<<ad*_X Y, Z>> = -<<Y, [X, Z]>>`.
//!
//! Every nonlinear product is formed on the grid and dealiased, so all
//! identities here are exact for inputs whose band stays inside the 2/3
//! cutoff after each product.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{
    advect_components, advection_grid, l2_inner, project_grid, SpectralField, VelocityField,
    WaveIndex, AREA,
};

/// Coefficient `beta` of `dtheta_2` in the closed one-form defining the cocycle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CocycleParams {
    pub beta: f64,
}

impl CocycleParams {
    pub const fn new(beta: f64) -> Self {
        CocycleParams { beta }
    }

    /// The `alpha = -(1/2pi) dtheta_2` configuration.
    pub fn singular_curve() -> Self {
        CocycleParams {
            beta: -1.0 / (2.0 * PI),
        }
    }
}

/// Element `(u, a)` of the extended algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedElement {
    pub u: VelocityField,
    pub a: f64,
}

impl ExtendedElement {
    pub fn new(u: VelocityField, a: f64) -> Self {
        ExtendedElement { u, a }
    }

    pub fn zeros(n: usize) -> Self {
        ExtendedElement {
            u: VelocityField::zeros(n),
            a: 0.0,
        }
    }

    /// Purely central element `(0, a)`.
    pub fn central(n: usize, a: f64) -> Self {
        ExtendedElement {
            u: VelocityField::zeros(n),
            a,
        }
    }

    /// `<<(X, a), (Y, b)>> = <<X, Y>> + a b`
    pub fn inner(&self, other: &Self) -> Result<f64> {
        Ok(l2_inner(&self.u, &other.u)? + self.a * other.a)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).expect("same resolution").max(0.0).sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        ExtendedElement {
            u: &self.u * s,
            a: self.a * s,
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        ExtendedElement {
            u: &self.u + &other.u,
            a: self.a + other.a,
        }
    }

    pub fn minus(&self, other: &Self) -> Self {
        ExtendedElement {
            u: &self.u - &other.u,
            a: self.a - other.a,
        }
    }
}

/// The two families of Kolmogorov fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisKind {
    /// `A_k = -lambda grad_perp sin(k.theta)`
    A,
    /// `B_k = lambda grad_perp cos(k.theta)`
    B,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasisFieldSpec {
    pub kind: BasisKind,
    pub k: WaveIndex,
    pub r: f64,
}

/// Noise amplitude `lambda(k) = (|k1| + |k2|)^-r`.
pub fn lambda(k: WaveIndex, r: f64) -> f64 {
    (k.l1() as f64).powf(-r)
}

/// Half-lattice `{k1 > 0} u {k1 = 0, k2 > 0}` restricted to `|k|_1 <= m`,
/// ordered by `k1` then `k2`.
pub fn half_lattice(m: i64) -> Vec<WaveIndex> {
    let mut out = Vec::new();
    for k1 in 0..=m.max(0) {
        let rest = m - k1;
        for k2 in -rest..=rest {
            let k = WaveIndex::new(k1, k2);
            if k.in_half_lattice() {
                out.push(k);
            }
        }
    }
    out
}

/// Kolmogorov basis field as a stream-function representation at resolution `n`.
pub fn basis_field(spec: BasisFieldSpec, n: usize) -> Result<VelocityField> {
    let k = spec.k;
    if k.is_zero() {
        return Err(Error::ZeroWaveIndex);
    }
    let lam = lambda(k, spec.r);
    // sin(x) = (e^{ix} - e^{-ix}) / 2i, so c_k = -lam / (2i) = i lam / 2
    let c = match spec.kind {
        BasisKind::A => Complex64::new(0.0, 0.5 * lam),
        BasisKind::B => Complex64::new(0.5 * lam, 0.0),
    };
    let psi = SpectralField::from_modes(n, &[(k, c)]).map_err(|_| Error::ModeOutOfBand {
        k1: k.k1,
        k2: k.k2,
        n,
    })?;
    Ok(VelocityField::new(psi, [0.0; 2]))
}

/// `omega(u, v) = beta * int psi_u (v_H)_2 dtheta` by Parseval; harmonic parts drop out.
pub fn roger_cocycle(u: &VelocityField, v: &VelocityField, p: CocycleParams) -> Result<f64> {
    if u.n() != v.n() {
        return Err(Error::ResolutionMismatch {
            left: u.n(),
            right: v.n(),
        });
    }
    let s: f64 = u
        .stream()
        .modes()
        .zip(v.stream().coeffs())
        .map(|((k, a), b)| (a * b.conj() * Complex64::new(0.0, -(k.k1 as f64))).re)
        .sum();
    Ok(p.beta * AREA * s)
}

/// Same cocycle evaluated by grid quadrature of `psi_u * beta * v_2`.
pub fn roger_cocycle_quadrature(
    u: &VelocityField,
    v: &VelocityField,
    p: CocycleParams,
) -> Result<f64> {
    if u.n() != v.n() {
        return Err(Error::ResolutionMismatch {
            left: u.n(),
            right: v.n(),
        });
    }
    let n = u.n();
    let psi = u.stream().to_grid();
    let [_, v2] = v.hamiltonian_part().to_grid();
    let s: f64 = psi.iter().zip(&v2).map(|(a, b)| a * b).sum();
    Ok(p.beta * s * AREA / (n * n) as f64)
}

/// Operator `T`: stream multiplier `-i beta k1 / |k|^2`, i.e. `laplacian(psi_T) = beta d1 psi`.
pub fn t_operator(u: &VelocityField, p: CocycleParams) -> VelocityField {
    let beta = p.beta;
    let psi = u.stream().apply_symbol(|k| {
        if k.is_zero() {
            Complex64::default()
        } else {
            Complex64::new(0.0, -beta * k.k1 as f64 / k.norm_sq())
        }
    });
    VelocityField::new(psi, [0.0; 2])
}

/// `[u, v] = P((u.grad)v - (v.grad)u)`
pub fn lie_bracket(u: &VelocityField, v: &VelocityField) -> Result<VelocityField> {
    let [a1, a2] = advection_grid(u, v)?;
    let [b1, b2] = advection_grid(v, u)?;
    let d1 = a1.iter().zip(&b1).map(|(x, y)| x - y).collect();
    let d2 = a2.iter().zip(&b2).map(|(x, y)| x - y).collect();
    project_grid(u.n(), &[d1, d2], true)
}

/// `ad*_X Y = P((X.grad)Y + (grad X)^T Y)`
pub fn ad_star(x: &VelocityField, y: &VelocityField) -> Result<VelocityField> {
    let [mut w1, mut w2] = advection_grid(x, y)?;
    let [x1, x2] = x.components();
    let [y1, y2] = y.to_grid();
    // ((grad X)^T Y)_j = Y_i d_j X_i
    let d11 = x1.dx1().to_grid();
    let d12 = x1.dx2().to_grid();
    let d21 = x2.dx1().to_grid();
    let d22 = x2.dx2().to_grid();
    for i in 0..w1.len() {
        w1[i] += y1[i] * d11[i] + y2[i] * d21[i];
        w2[i] += y1[i] * d12[i] + y2[i] * d22[i];
    }
    project_grid(x.n(), &[w1, w2], true)
}

/// Levi-Civita connection of the flat `L^2` metric: `P((X.grad)Y)`.
pub fn covariant(x: &VelocityField, y: &VelocityField) -> Result<VelocityField> {
    let w = advection_grid(x, y)?;
    project_grid(x.n(), &w, true)
}

/// `[(u, a), (v, b)] = ([u, v], omega(u, v))`
pub fn ext_bracket(
    x: &ExtendedElement,
    y: &ExtendedElement,
    p: CocycleParams,
) -> Result<ExtendedElement> {
    Ok(ExtendedElement {
        u: lie_bracket(&x.u, &y.u)?,
        a: roger_cocycle(&x.u, &y.u, p)?,
    })
}

/// `ad^_{(u,a)} (v,b) = -[(u,a),(v,b)]`, the right-invariant adjoint action.
pub fn ext_ad(x: &ExtendedElement, y: &ExtendedElement, p: CocycleParams) -> Result<ExtendedElement> {
    Ok(ext_bracket(x, y, p)?.scaled(-1.0))
}

/// `coad((X, a), (Y, b)) = (ad*_X Y - b TX, 0)`
pub fn coad(x: &ExtendedElement, y: &ExtendedElement, p: CocycleParams) -> Result<ExtendedElement> {
    let mut u = ad_star(&x.u, &y.u)?;
    if y.a != 0.0 {
        u = &u - &(&t_operator(&x.u, p) * y.a);
    }
    Ok(ExtendedElement { u, a: 0.0 })
}

/// `nabla^_{(X,a)} (Y,b) = (nabla_X Y - (b TX + a TY)/2, omega(X, Y)/2)`
pub fn ext_covariant_derivative(
    x: &ExtendedElement,
    y: &ExtendedElement,
    p: CocycleParams,
) -> Result<ExtendedElement> {
    let mut u = covariant(&x.u, &y.u)?;
    if y.a != 0.0 {
        u = &u - &(&t_operator(&x.u, p) * (0.5 * y.a));
    }
    if x.a != 0.0 {
        u = &u - &(&t_operator(&y.u, p) * (0.5 * x.a));
    }
    Ok(ExtendedElement {
        u,
        a: 0.5 * roger_cocycle(&x.u, &y.u, p)?,
    })
}

/// Tolerance on `|nabla_X X|` (relative to `|X|^2`) for a field to count as geodesic.
pub const GEODESIC_TOL: f64 = 1e-10;

/// Correction `K^((u, a), (X, 0))` for a geodesic noise direction `X`.
///
/// The second covariant derivative along `X` is taken together with the
/// curvature of the volume-preserving group, which on the flat torus sums to
/// the projected flat second derivative `P((X.grad)(X.grad)u)`. The result is
/// `( (P((X.grad)^2 u) + omega(u, X) TX) / 2, 0 )`.
pub fn correction_khat(
    u_hat: &ExtendedElement,
    x_hat: &ExtendedElement,
    p: CocycleParams,
) -> Result<ExtendedElement> {
    if x_hat.a != 0.0 {
        return Err(Error::InvalidArgument(
            "noise direction must have zero central component".into(),
        ));
    }
    let x = &x_hat.u;
    let acc = covariant(x, x)?.norm();
    let scale = l2_inner(x, x)?.max(1.0);
    if acc > GEODESIC_TOL * scale {
        return Err(Error::NotGeodesic(acc));
    }
    let u = &u_hat.u;
    let n = u.n();
    let [x1, x2] = x.to_grid();
    let [u1, u2] = u.components();
    let [g1, g2] = advect_components(&x1, &x2, &u1, &u2);
    // The intermediate keeps its full band so that the sum over a basis, which
    // is band-preserving, is exact up to the cutoff (while `cutoff + m < n/2`).
    let g1 = SpectralField::from_grid(n, &g1)?;
    let g2 = SpectralField::from_grid(n, &g2)?;
    let second = advect_components(&x1, &x2, &g1, &g2);
    let mut out = project_grid(n, &second, true)?;
    let w = roger_cocycle(u, x, p)?;
    if w != 0.0 {
        out += &(&t_operator(x, p) * w);
    }
    Ok(ExtendedElement {
        u: &out * 0.5,
        a: 0.0,
    })
}

/// `nu = (1/2) sum_{half lattice, |k|_1 <= m} lambda(k)^2 k1^2`
pub fn viscosity_coefficient(m: i64, r: f64) -> f64 {
    0.5 * half_lattice(m)
        .into_iter()
        .map(|k| lambda(k, r).powi(2) * (k.k1 * k.k1) as f64)
        .sum::<f64>()
}

/// Per-mode multiplier of the cocycle damping sum
/// `S(u) = sum_k omega(u, A_k) TA_k + omega(u, B_k) TB_k`:
/// `D(k) = -beta^2 N lambda(k)^2 k1^2 / (2 |k|^2)` inside the basis span, 0 outside.
pub fn damping_multiplier(k: WaveIndex, m: i64, r: f64, p: CocycleParams) -> f64 {
    if k.is_zero() || k.l1() > m {
        return 0.0;
    }
    -p.beta * p.beta * AREA * lambda(k, r).powi(2) * (k.k1 * k.k1) as f64 / (2.0 * k.norm_sq())
}

/// Idealized constant damping rate: the sum equals `-beta^2 N u = -2 sigma u`
/// when the basis is orthonormal, giving `sigma = beta^2 N / 2`.
pub fn idealized_sigma(p: CocycleParams) -> f64 {
    0.5 * p.beta * p.beta * AREA
}

/// Damping sum over the basis `|k|_1 <= m`; errors if `u` has modes outside it.
pub fn damping_sum(u: &VelocityField, m: i64, r: f64, p: CocycleParams) -> Result<VelocityField> {
    let tol = 1e-14 * u.stream().max_coeff().max(f64::MIN_POSITIVE);
    if let Some(k) = u
        .stream()
        .support(tol)
        .into_iter()
        .find(|k| k.l1() > m)
    {
        return Err(Error::IncompleteBasis {
            k1: k.k1,
            k2: k.k2,
            m,
        });
    }
    Ok(u.apply_stream_symbol(|k| damping_multiplier(k, m, r, p)))
}

/// The idealized damping `-beta^2 N u` (harmonic part dropped).
pub fn damping_sum_idealized(u: &VelocityField, p: CocycleParams) -> VelocityField {
    &u.hamiltonian_part() * (-2.0 * idealized_sigma(p))
}
