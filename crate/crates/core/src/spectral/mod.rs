//! Fourier representation of real fields on the torus `[0, 2pi)^2`.
//!
//! A [`SpectralField`] stores the full `n x n` array of Fourier coefficients
//! `c_k` of a real function `f(theta) = sum_k c_k e^{i k.theta}`. Coefficient
//! `(p, q)` of the array carries the wave index `(wn(p), wn(q))` where
//! `wn(p) = p` for `p < n/2` and `p - n` otherwise. The Nyquist row and
//! column (`|k_j| = n/2`) are kept at zero so that every stored mode has a
//! conjugate partner, which keeps the field real.
//!
//! [`VelocityField`] packs a divergence-free field as `grad_perp(psi) + c`,
//! with `psi` of zero mean and a constant harmonic part `c`.

mod fft;
pub mod snapshot;

use std::f64::consts::{PI, TAU};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Area of the torus `[0, 2pi)^2`.
pub const AREA: f64 = 4.0 * PI * PI;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Lattice vector `k = (k1, k2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WaveIndex {
    pub k1: i64,
    pub k2: i64,
}

impl WaveIndex {
    pub const fn new(k1: i64, k2: i64) -> Self {
        WaveIndex { k1, k2 }
    }

    /// `|k|^2 = k1^2 + k2^2`, the Laplacian symbol.
    pub fn norm_sq(self) -> f64 {
        (self.k1 * self.k1 + self.k2 * self.k2) as f64
    }

    /// `|k1| + |k2|`, the argument of the noise decay weight.
    pub fn l1(self) -> i64 {
        self.k1.abs() + self.k2.abs()
    }

    pub fn max_abs(self) -> i64 {
        self.k1.abs().max(self.k2.abs())
    }

    pub fn is_zero(self) -> bool {
        self.k1 == 0 && self.k2 == 0
    }

    /// Representative half of the lattice: `k1 > 0`, or `k1 = 0` and `k2 > 0`.
    pub fn in_half_lattice(self) -> bool {
        self.k1 > 0 || (self.k1 == 0 && self.k2 > 0)
    }

    /// `k . theta`
    pub fn phase(self, theta: [f64; 2]) -> f64 {
        self.k1 as f64 * theta[0] + self.k2 as f64 * theta[1]
    }
}

impl Neg for WaveIndex {
    type Output = WaveIndex;
    fn neg(self) -> WaveIndex {
        WaveIndex::new(-self.k1, -self.k2)
    }
}

pub(crate) fn check_resolution(n: usize) -> Result<()> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::InvalidResolution(n));
    }
    Ok(())
}

fn check_same(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::ResolutionMismatch { left: a, right: b });
    }
    Ok(())
}

#[inline]
fn wavenumber(p: usize, n: usize) -> i64 {
    if p < n / 2 {
        p as i64
    } else {
        p as i64 - n as i64
    }
}

/// Angle of grid node `j` on an `n`-point axis.
#[inline]
pub fn grid_angle(j: usize, n: usize) -> f64 {
    TAU * j as f64 / n as f64
}

/// Truncated Fourier series of a real scalar on the torus.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    n: usize,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    /// # Panics
    /// If `n` is odd or smaller than 4.
    pub fn zeros(n: usize) -> Self {
        check_resolution(n).expect("invalid resolution");
        SpectralField {
            n,
            coeffs: vec![Complex64::default(); n * n],
        }
    }

    /// Constant function.
    pub fn constant(n: usize, value: f64) -> Self {
        let mut f = Self::zeros(n);
        f.coeffs[0] = Complex64::new(value, 0.0);
        f
    }

    /// Transform row-major grid values `f(theta1_p, theta2_q)` at index `p * n + q`.
    pub fn from_grid(n: usize, grid: &[f64]) -> Result<Self> {
        check_resolution(n)?;
        if grid.len() != n * n {
            return Err(Error::ShapeMismatch {
                expected: n * n,
                got: grid.len(),
            });
        }
        let mut f = SpectralField {
            n,
            coeffs: fft::forward(grid, n),
        };
        f.clear_nyquist();
        f.symmetrize();
        Ok(f)
    }

    /// Sample `f(theta1, theta2)` on the grid and transform.
    pub fn from_fn(n: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        check_resolution(n).expect("invalid resolution");
        let mut grid = Vec::with_capacity(n * n);
        for p in 0..n {
            for q in 0..n {
                grid.push(f(grid_angle(p, n), grid_angle(q, n)));
            }
        }
        Self::from_grid(n, &grid).expect("grid has the right shape")
    }

    /// Field with the listed coefficients; each `(k, c)` also sets `c_{-k} = conj(c)`.
    pub fn from_modes(n: usize, modes: &[(WaveIndex, Complex64)]) -> Result<Self> {
        let mut f = Self::zeros(n);
        for &(k, c) in modes {
            f.set_coeff(k, c)?;
        }
        Ok(f)
    }

    /// Wrap a coefficient array that is already conjugate-symmetric.
    pub(crate) fn from_raw(n: usize, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), n * n);
        SpectralField { n, coeffs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    fn index_of(&self, k: WaveIndex) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if k.k1.abs() >= half || k.k2.abs() >= half {
            return None;
        }
        let n = self.n as i64;
        let p = k.k1.rem_euclid(n) as usize;
        let q = k.k2.rem_euclid(n) as usize;
        Some(p * self.n + q)
    }

    /// Whether `k` is representable at this resolution (Nyquist excluded).
    pub fn supports(&self, k: WaveIndex) -> bool {
        self.index_of(k).is_some()
    }

    /// Coefficient of `e^{i k.theta}`; zero for unrepresentable modes.
    pub fn coeff(&self, k: WaveIndex) -> Complex64 {
        self.index_of(k)
            .map(|i| self.coeffs[i])
            .unwrap_or_default()
    }

    /// Set `c_k = c` and `c_{-k} = conj(c)`. For `k = 0` only the real part is kept.
    pub fn set_coeff(&mut self, k: WaveIndex, c: Complex64) -> Result<()> {
        let i = self.index_of(k).ok_or(Error::ModeOutOfBand {
            k1: k.k1,
            k2: k.k2,
            n: self.n,
        })?;
        if k.is_zero() {
            self.coeffs[i] = Complex64::new(c.re, 0.0);
        } else {
            let j = self.index_of(-k).expect("negated index is in band");
            self.coeffs[i] = c;
            self.coeffs[j] = c.conj();
        }
        Ok(())
    }

    /// Iterate over `(k, c_k)` for the whole stored lattice.
    pub fn modes(&self) -> impl Iterator<Item = (WaveIndex, Complex64)> + '_ {
        let n = self.n;
        self.coeffs.iter().enumerate().map(move |(i, &c)| {
            let k = WaveIndex::new(wavenumber(i / n, n), wavenumber(i % n, n));
            (k, c)
        })
    }

    /// Wave indices with `|c_k|` above `tol`.
    pub fn support(&self, tol: f64) -> Vec<WaveIndex> {
        self.modes()
            .filter(|(_, c)| c.norm() > tol)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn without_mean(&self) -> Self {
        let mut f = self.clone();
        f.coeffs[0] = Complex64::default();
        f
    }

    /// Grid values, row-major.
    pub fn to_grid(&self) -> Vec<f64> {
        fft::inverse(&self.coeffs, self.n)
    }

    /// Evaluate the trigonometric polynomial at an arbitrary point.
    pub fn eval(&self, theta: [f64; 2]) -> f64 {
        self.modes()
            .filter(|(_, c)| *c != Complex64::default())
            .map(|(k, c)| {
                let ph = k.phase(theta);
                c.re * ph.cos() - c.im * ph.sin()
            })
            .sum()
    }

    /// Multiply every coefficient by a symbol `m(k)`.
    pub fn apply_symbol(&self, symbol: impl Fn(WaveIndex) -> Complex64) -> Self {
        let n = self.n;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                if c == Complex64::default() {
                    c
                } else {
                    c * symbol(WaveIndex::new(wavenumber(i / n, n), wavenumber(i % n, n)))
                }
            })
            .collect();
        SpectralField { n, coeffs }
    }

    /// Same as [`apply_symbol`](Self::apply_symbol) for real symbols.
    pub fn apply_real_symbol(&self, symbol: impl Fn(WaveIndex) -> f64) -> Self {
        self.apply_symbol(|k| Complex64::new(symbol(k), 0.0))
    }

    /// `d/dtheta1`
    pub fn dx1(&self) -> Self {
        self.apply_symbol(|k| I * k.k1 as f64)
    }

    /// `d/dtheta2`
    pub fn dx2(&self) -> Self {
        self.apply_symbol(|k| I * k.k2 as f64)
    }

    pub fn laplacian(&self) -> Self {
        self.apply_real_symbol(|k| -k.norm_sq())
    }

    /// Solve `laplacian(psi) = self` for zero-mean `psi`.
    pub fn inv_laplacian(&self) -> Result<Self> {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if self.mean().abs() > 1e-12 * scale.max(1.0) {
            return Err(Error::NonZeroMean(self.mean()));
        }
        Ok(self.apply_real_symbol(|k| {
            if k.is_zero() {
                0.0
            } else {
                -1.0 / k.norm_sq()
            }
        }))
    }

    /// Zero every mode with `3 max(|k1|, |k2|) >= n` (2/3 rule).
    pub fn dealias(&mut self) {
        let n = self.n;
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            let k = WaveIndex::new(wavenumber(i / n, n), wavenumber(i % n, n));
            if 3 * k.max_abs() as usize >= n {
                *c = Complex64::default();
            }
        }
    }

    pub fn dealiased(mut self) -> Self {
        self.dealias();
        self
    }

    /// Largest wave number kept by [`dealias`](Self::dealias).
    pub fn dealias_cutoff(n: usize) -> i64 {
        ((n - 1) / 3) as i64
    }

    fn clear_nyquist(&mut self) {
        let n = self.n;
        let h = n / 2;
        for j in 0..n {
            self.coeffs[h * n + j] = Complex64::default();
            self.coeffs[j * n + h] = Complex64::default();
        }
    }

    // Enforce c_{-k} = conj(c_k) exactly after a round trip through the grid.
    fn symmetrize(&mut self) {
        let n = self.n;
        for p in 0..n {
            for q in 0..n {
                let pp = (n - p) % n;
                let qq = (n - q) % n;
                let i = p * n + q;
                let j = pp * n + qq;
                if i < j {
                    let avg = (self.coeffs[i] + self.coeffs[j].conj()) * 0.5;
                    self.coeffs[i] = avg;
                    self.coeffs[j] = avg.conj();
                } else if i == j {
                    self.coeffs[i].im = 0.0;
                }
            }
        }
    }

    /// `int f g dtheta` by Parseval.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        check_same(self.n, other.n)?;
        let s: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a * b.conj()).re)
            .sum();
        Ok(AREA * s)
    }

    /// `(int f^2 dtheta)^(1/2)`
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        (AREA * s).sqrt()
    }

    /// Largest `|c_k|`.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Pointwise product evaluated on the grid, then dealiased.
    pub fn product(&self, other: &Self) -> Result<Self> {
        check_same(self.n, other.n)?;
        let a = self.to_grid();
        let b = other.to_grid();
        let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        Ok(Self::from_grid(self.n, &prod)?.dealiased())
    }
}

impl Add<&SpectralField> for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        assert_eq!(self.n, rhs.n, "resolution mismatch");
        SpectralField {
            n: self.n,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub<&SpectralField> for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        assert_eq!(self.n, rhs.n, "resolution mismatch");
        SpectralField {
            n: self.n,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl AddAssign<&SpectralField> for SpectralField {
    fn add_assign(&mut self, rhs: &SpectralField) {
        assert_eq!(self.n, rhs.n, "resolution mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, s: f64) -> SpectralField {
        SpectralField {
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self * -1.0
    }
}

/// Poisson bracket `{f, g} = d1 f d2 g - d2 f d1 g`, pseudo-spectral and dealiased.
pub fn poisson_bracket(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    check_same(f.n, g.n)?;
    let n = f.n;
    let f1 = f.dx1().to_grid();
    let f2 = f.dx2().to_grid();
    let g1 = g.dx1().to_grid();
    let g2 = g.dx2().to_grid();
    let grid: Vec<f64> = (0..n * n)
        .map(|i| f1[i] * g2[i] - f2[i] * g1[i])
        .collect();
    Ok(SpectralField::from_grid(n, &grid)?.dealiased())
}

/// Divergence-free field `grad_perp(stream) + harmonic`.
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityField {
    stream: SpectralField,
    harmonic: [f64; 2],
}

impl VelocityField {
    pub fn zeros(n: usize) -> Self {
        VelocityField {
            stream: SpectralField::zeros(n),
            harmonic: [0.0; 2],
        }
    }

    /// Field with the given stream function (its mean is dropped) and harmonic part.
    pub fn new(stream: SpectralField, harmonic: [f64; 2]) -> Self {
        VelocityField {
            stream: stream.without_mean(),
            harmonic,
        }
    }

    /// Constant field `(c1, c2)`.
    pub fn constant(n: usize, harmonic: [f64; 2]) -> Self {
        VelocityField {
            stream: SpectralField::zeros(n),
            harmonic,
        }
    }

    pub fn n(&self) -> usize {
        self.stream.n
    }

    /// Zero-mean stream function.
    pub fn stream(&self) -> &SpectralField {
        &self.stream
    }

    pub fn harmonic(&self) -> [f64; 2] {
        self.harmonic
    }

    /// Hamiltonian part only (harmonic part dropped).
    pub fn hamiltonian_part(&self) -> Self {
        VelocityField {
            stream: self.stream.clone(),
            harmonic: [0.0; 2],
        }
    }

    /// Spectral components `(u1, u2) = (-d2 psi + c1, d1 psi + c2)`.
    pub fn components(&self) -> [SpectralField; 2] {
        let mut u1 = -&self.stream.dx2();
        let mut u2 = self.stream.dx1();
        u1.coeffs[0] = Complex64::new(self.harmonic[0], 0.0);
        u2.coeffs[0] = Complex64::new(self.harmonic[1], 0.0);
        [u1, u2]
    }

    pub fn to_grid(&self) -> [Vec<f64>; 2] {
        let [u1, u2] = self.components();
        [u1.to_grid(), u2.to_grid()]
    }

    /// Point value `u(theta)`.
    pub fn eval(&self, theta: [f64; 2]) -> [f64; 2] {
        let mut u = self.harmonic;
        for (k, c) in self.stream.modes() {
            if c == Complex64::default() {
                continue;
            }
            let ph = k.phase(theta);
            // d/dtheta_j of Re(c e^{i ph}) = -k_j Im(c e^{i ph})
            let im = c.re * ph.sin() + c.im * ph.cos();
            u[0] += k.k2 as f64 * im;
            u[1] -= k.k1 as f64 * im;
        }
        u
    }

    /// Spectral divergence of the stored components.
    pub fn divergence(&self) -> SpectralField {
        let [u1, u2] = self.components();
        &u1.dx1() + &u2.dx2()
    }

    /// Vorticity `laplacian(psi)`.
    pub fn vorticity(&self) -> SpectralField {
        self.stream.laplacian()
    }

    /// Componentwise Laplacian (harmonic part is annihilated).
    pub fn laplacian(&self) -> Self {
        VelocityField {
            stream: self.stream.laplacian(),
            harmonic: [0.0; 2],
        }
    }

    /// Multiply the stream function by a real Fourier symbol; harmonic part dropped.
    pub fn apply_stream_symbol(&self, symbol: impl Fn(WaveIndex) -> f64) -> Self {
        VelocityField {
            stream: self.stream.apply_real_symbol(symbol).without_mean(),
            harmonic: [0.0; 2],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.stream.is_finite() && self.harmonic.iter().all(|c| c.is_finite())
    }

    pub fn norm(&self) -> f64 {
        l2_inner(self, self).expect("same resolution").max(0.0).sqrt()
    }
}

impl Add<&VelocityField> for &VelocityField {
    type Output = VelocityField;
    fn add(self, rhs: &VelocityField) -> VelocityField {
        VelocityField {
            stream: &self.stream + &rhs.stream,
            harmonic: [
                self.harmonic[0] + rhs.harmonic[0],
                self.harmonic[1] + rhs.harmonic[1],
            ],
        }
    }
}

impl Sub<&VelocityField> for &VelocityField {
    type Output = VelocityField;
    fn sub(self, rhs: &VelocityField) -> VelocityField {
        VelocityField {
            stream: &self.stream - &rhs.stream,
            harmonic: [
                self.harmonic[0] - rhs.harmonic[0],
                self.harmonic[1] - rhs.harmonic[1],
            ],
        }
    }
}

impl AddAssign<&VelocityField> for VelocityField {
    fn add_assign(&mut self, rhs: &VelocityField) {
        self.stream += &rhs.stream;
        self.harmonic[0] += rhs.harmonic[0];
        self.harmonic[1] += rhs.harmonic[1];
    }
}

impl Mul<f64> for &VelocityField {
    type Output = VelocityField;
    fn mul(self, s: f64) -> VelocityField {
        VelocityField {
            stream: &self.stream * s,
            harmonic: [self.harmonic[0] * s, self.harmonic[1] * s],
        }
    }
}

impl Neg for &VelocityField {
    type Output = VelocityField;
    fn neg(self) -> VelocityField {
        self * -1.0
    }
}

/// `u = grad_perp(psi) = (-d2 psi, d1 psi)`.
pub fn grad_perp(psi: &SpectralField) -> VelocityField {
    VelocityField::new(psi.clone(), [0.0; 2])
}

/// Hodge projection of spectral components onto divergence-free fields.
///
/// The stream function is recovered from the curl, which annihilates the
/// gradient part; the harmonic part is the mean of the input.
pub fn project_components(v1: &SpectralField, v2: &SpectralField) -> Result<VelocityField> {
    check_same(v1.n, v2.n)?;
    let curl = &v2.dx1() - &v1.dx2();
    let stream = curl.apply_real_symbol(|k| {
        if k.is_zero() {
            0.0
        } else {
            -1.0 / k.norm_sq()
        }
    });
    Ok(VelocityField {
        stream,
        harmonic: [v1.mean(), v2.mean()],
    })
}

/// Divergence-free part of a raw vector field given on the grid.
pub fn leray_project(n: usize, v1: &[f64], v2: &[f64]) -> Result<VelocityField> {
    let a = SpectralField::from_grid(n, v1)?;
    let b = SpectralField::from_grid(n, v2)?;
    project_components(&a, &b)
}

/// `int <u, v> dtheta`, exact by Parseval.
pub fn l2_inner(u: &VelocityField, v: &VelocityField) -> Result<f64> {
    check_same(u.n(), v.n())?;
    let s: f64 = u
        .stream
        .modes()
        .zip(v.stream.coeffs.iter())
        .map(|((k, a), b)| k.norm_sq() * (a * b.conj()).re)
        .sum();
    Ok(AREA * (s + u.harmonic[0] * v.harmonic[0] + u.harmonic[1] * v.harmonic[1]))
}

/// Grid components of `(X . grad) Y`, i.e. `sum_j X_j d_j Y_i`.
pub(crate) fn advection_grid(x: &VelocityField, y: &VelocityField) -> Result<[Vec<f64>; 2]> {
    check_same(x.n(), y.n())?;
    let [x1, x2] = x.to_grid();
    let [y1, y2] = y.components();
    Ok(advect_components(&x1, &x2, &y1, &y2))
}

pub(crate) fn advect_components(
    x1: &[f64],
    x2: &[f64],
    y1: &SpectralField,
    y2: &SpectralField,
) -> [Vec<f64>; 2] {
    let d11 = y1.dx1().to_grid();
    let d12 = y1.dx2().to_grid();
    let d21 = y2.dx1().to_grid();
    let d22 = y2.dx2().to_grid();
    let a = (0..x1.len())
        .map(|i| x1[i] * d11[i] + x2[i] * d12[i])
        .collect();
    let b = (0..x1.len())
        .map(|i| x1[i] * d21[i] + x2[i] * d22[i])
        .collect();
    [a, b]
}

/// Transform grid components, dealias, and Hodge-project.
pub(crate) fn project_grid(n: usize, v: &[Vec<f64>; 2], dealias: bool) -> Result<VelocityField> {
    let mut a = SpectralField::from_grid(n, &v[0])?;
    let mut b = SpectralField::from_grid(n, &v[1])?;
    if dealias {
        a.dealias();
        b.dealias();
    }
    project_components(&a, &b)
}
