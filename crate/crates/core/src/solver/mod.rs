//! Time integration of the viscous quasi-geostrophic equation
//!
//! ```text
//! d/dt q + {psi, q} + a beta d1 psi - nu laplacian(q) + sigma(q) = 0,   q = laplacian(psi)
//! ```
//!
//! The linear part is diagonal in Fourier space and is integrated exactly
//! with an integrating factor; the bracket is advanced with classical RK4
//! in the integrating-factor frame.

mod extended;
mod variational;

pub use extended::{euler_arnold_rhs, extended_state, velocity_of_tendency, AbstractSolver};
pub use variational::{variational_residual, variational_residuals, TestDirection, Trajectory};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{damping_multiplier, idealized_sigma, CocycleParams};
use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::spectral::{
    advection_grid, check_resolution, grad_perp, SpectralField, VelocityField, WaveIndex, AREA,
};

/// Zeroth-order (Rayleigh) damping.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SigmaMode {
    None,
    /// `sigma * q` with a constant rate.
    Constant(f64),
    /// Half the cocycle damping sum over the basis `|k|_1 <= m`, a Fourier-diagonal rate.
    Spectral { m: i64, r: f64 },
}

impl SigmaMode {
    /// Constant rate `beta^2 N / 2` of the idealized orthonormal-basis limit.
    pub fn idealized(beta: f64) -> Self {
        SigmaMode::Constant(idealized_sigma(CocycleParams::new(beta)))
    }

    /// Damping matching a noise model: spectral for the basis noise, none for
    /// the two constant fields (their cocycle terms vanish identically).
    pub fn for_noise(noise: &NoiseModel) -> Self {
        match *noise {
            NoiseModel::KolmogorovBasis { m, r } => SigmaMode::Spectral { m, r },
            NoiseModel::TwoConstantFields { .. } => SigmaMode::None,
        }
    }

    /// Damping rate of mode `k` (nonnegative for physical settings).
    pub fn rate(&self, k: WaveIndex, beta: f64) -> f64 {
        match *self {
            SigmaMode::None => 0.0,
            SigmaMode::Constant(s) => {
                if k.is_zero() {
                    0.0
                } else {
                    s
                }
            }
            SigmaMode::Spectral { m, r } => {
                -0.5 * damping_multiplier(k, m, r, CocycleParams::new(beta))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub n: usize,
    pub dt: f64,
    pub steps: usize,
    pub beta: f64,
    /// Central coordinate multiplying the beta term.
    pub a: f64,
    pub nu: f64,
    pub sigma_mode: SigmaMode,
    pub dealias: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            n: 64,
            dt: 1e-3,
            steps: 1000,
            beta: 1.0,
            a: 1.0,
            nu: 0.0,
            sigma_mode: SigmaMode::None,
            dealias: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        check_resolution(self.n)?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.nu.is_finite() && self.nu >= 0.0) {
            return Err(Error::InvalidArgument(format!("nu must be >= 0, got {}", self.nu)));
        }
        if !self.beta.is_finite() || !self.a.is_finite() {
            return Err(Error::InvalidArgument("beta and a must be finite".into()));
        }
        match self.sigma_mode {
            SigmaMode::Constant(s) if !(s.is_finite() && s >= 0.0) => {
                return Err(Error::InvalidArgument(format!("sigma must be >= 0, got {s}")))
            }
            SigmaMode::Spectral { m, r } if m < 0 || !(r > 0.0) => {
                return Err(Error::InvalidArgument(format!(
                    "spectral sigma needs m >= 0 and r > 0, got m = {m}, r = {r}"
                )))
            }
            _ => {}
        }
        Ok(())
    }

    pub fn params(&self) -> CocycleParams {
        CocycleParams::new(self.beta)
    }

    /// Linear symbol acting on the vorticity coefficient `q_k`.
    pub fn linear_symbol(&self, k: WaveIndex) -> Complex64 {
        if k.is_zero() {
            return Complex64::default();
        }
        let k2 = k.norm_sq();
        Complex64::new(
            -self.nu * k2 - self.sigma_mode.rate(k, self.beta),
            self.a * self.beta * k.k1 as f64 / k2,
        )
    }
}

/// Energy-type diagnostics of a stream function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `(1/2) <<u, u>>`
    pub energy: f64,
    /// `(1/2) int q^2`
    pub enstrophy: f64,
    /// `max |q|` on the grid
    pub max_vorticity: f64,
}

impl Diagnostics {
    pub fn of(psi: &SpectralField) -> Self {
        let (mut e, mut z) = (0.0, 0.0);
        for (k, c) in psi.modes() {
            let k2 = k.norm_sq();
            let c2 = c.norm_sqr();
            e += k2 * c2;
            z += k2 * k2 * c2;
        }
        let q = psi.laplacian().to_grid();
        Diagnostics {
            energy: 0.5 * AREA * e,
            enstrophy: 0.5 * AREA * z,
            max_vorticity: q.iter().map(|x| x.abs()).fold(0.0, f64::max),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    pub t: f64,
    pub psi: SpectralField,
    pub diagnostics: Diagnostics,
}

impl SolverState {
    pub fn new(t: f64, psi: SpectralField) -> Self {
        let psi = psi.without_mean();
        let diagnostics = Diagnostics::of(&psi);
        SolverState { t, psi, diagnostics }
    }

    pub fn velocity(&self) -> VelocityField {
        grad_perp(&self.psi)
    }
}

fn bracket(psi: &SpectralField, q: &SpectralField, dealias: bool) -> Result<SpectralField> {
    let n = psi.n();
    let f1 = psi.dx1().to_grid();
    let f2 = psi.dx2().to_grid();
    let g1 = q.dx1().to_grid();
    let g2 = q.dx2().to_grid();
    let grid: Vec<f64> = (0..n * n).map(|i| f1[i] * g2[i] - f2[i] * g1[i]).collect();
    let mut b = SpectralField::from_grid(n, &grid)?;
    if dealias {
        b.dealias();
    }
    Ok(b)
}

fn stream_of(q: &SpectralField) -> SpectralField {
    q.apply_real_symbol(|k| if k.is_zero() { 0.0 } else { -1.0 / k.norm_sq() })
}

/// `-{psi, q}` with `psi = laplacian^-1 q`.
fn nonlinear(q: &SpectralField, dealias: bool) -> Result<SpectralField> {
    Ok(-&bracket(&stream_of(q), q, dealias)?)
}

/// `d/dt q = -{psi, q} - a beta d1 psi + nu laplacian(q) - sigma(q)`.
pub fn vorticity_rhs(psi: &SpectralField, config: &SolverConfig) -> Result<SpectralField> {
    if psi.n() != config.n {
        return Err(Error::ResolutionMismatch {
            left: psi.n(),
            right: config.n,
        });
    }
    let psi = psi.without_mean();
    let q = psi.laplacian();
    let mut rhs = -&bracket(&psi, &q, config.dealias)?;
    rhs += &(&psi.dx1() * (-config.a * config.beta));
    rhs += &(&q.laplacian() * config.nu);
    rhs += &q.apply_real_symbol(|k| -config.sigma_mode.rate(k, config.beta));
    Ok(rhs)
}

/// Pressure diagnostic: solves `laplacian(p) = -div((u.grad)u)` (zero mean).
pub fn pressure(u: &VelocityField) -> Result<SpectralField> {
    let n = u.n();
    let [w1, w2] = advection_grid(u, u)?;
    let w1 = SpectralField::from_grid(n, &w1)?.dealiased();
    let w2 = SpectralField::from_grid(n, &w2)?.dealiased();
    let div = &w1.dx1() + &w2.dx2();
    (-&div).without_mean().inv_laplacian()
}

/// Integrating-factor RK4 solver for the vorticity form.
#[derive(Clone, Debug)]
pub struct Solver {
    config: SolverConfig,
    state: SolverState,
    q: SpectralField,
    e_full: Vec<Complex64>,
    e_half: Vec<Complex64>,
}

impl Solver {
    pub fn new(config: SolverConfig, psi0: SpectralField) -> Result<Self> {
        config.validate()?;
        if psi0.n() != config.n {
            return Err(Error::ResolutionMismatch {
                left: psi0.n(),
                right: config.n,
            });
        }
        let state = SolverState::new(0.0, psi0);
        let ones = SpectralField::from_modes(config.n, &[])?;
        let symbols: Vec<Complex64> = ones
            .modes()
            .map(|(k, _)| config.linear_symbol(k))
            .collect();
        let e_full = symbols.iter().map(|l| (l * config.dt).exp()).collect();
        let e_half = symbols.iter().map(|l| (l * (0.5 * config.dt)).exp()).collect();
        let mut q = state.psi.laplacian();
        if config.dealias {
            q.dealias();
        }
        Ok(Solver {
            config,
            state,
            q,
            e_full,
            e_half,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    /// Courant number `dt max|u| n / 2`; values above 1 signal an unresolved time step.
    pub fn cfl(&self) -> f64 {
        let [u1, u2] = self.state.velocity().to_grid();
        let umax = u1
            .iter()
            .zip(&u2)
            .map(|(a, b)| a.hypot(*b))
            .fold(0.0, f64::max);
        self.config.dt * umax * self.config.n as f64 / 2.0
    }

    fn scale(f: &SpectralField, e: &[Complex64]) -> SpectralField {
        let coeffs = f.coeffs().iter().zip(e).map(|(c, e)| c * e).collect();
        SpectralField::from_raw(f.n(), coeffs)
    }

    /// Advance one time step.
    pub fn step(&mut self) -> Result<&SolverState> {
        let dt = self.config.dt;
        let dl = self.config.dealias;
        let (e, e2) = (&self.e_full, &self.e_half);
        let q = &self.q;

        let ka = nonlinear(q, dl)?;
        let qa = Self::scale(&(q + &(&ka * (0.5 * dt))), e2);
        let kb = nonlinear(&qa, dl)?;
        let q_half = Self::scale(q, e2);
        let qb = &q_half + &(&kb * (0.5 * dt));
        let kc = nonlinear(&qb, dl)?;
        let qc = &Self::scale(q, e) + &Self::scale(&(&kc * dt), e2);
        let kd = nonlinear(&qc, dl)?;

        let mut incr = Self::scale(&ka, e);
        incr += &Self::scale(&(&(&kb + &kc) * 2.0), e2);
        incr += &kd;
        let q_new = &Self::scale(q, e) + &(&incr * (dt / 6.0));

        let t = self.state.t + dt;
        if !q_new.is_finite() {
            return Err(Error::Instability(t));
        }
        let psi = stream_of(&q_new);
        let state = SolverState::new(t, psi);
        if !(state.diagnostics.energy.is_finite() && state.diagnostics.max_vorticity.is_finite()) {
            return Err(Error::Instability(t));
        }
        self.q = q_new;
        self.state = state;
        Ok(&self.state)
    }

    /// Run `config.steps` steps, calling `observe` after each one.
    pub fn run(&mut self, mut observe: impl FnMut(&SolverState)) -> Result<&SolverState> {
        for _ in 0..self.config.steps {
            self.step()?;
            observe(&self.state);
        }
        Ok(&self.state)
    }
}
