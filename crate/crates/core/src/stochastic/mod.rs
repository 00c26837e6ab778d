//! Particle representation of the stochastic flows
//!
//! ```text
//! d theta = sum_i H_i(theta) o dW^i + u(t, theta) dt,     dc = a dt
//! ```
//!
//! on the torus, with the central phase `c` carried alongside each particle.
//!
//! Brownian increments are a pure function of `(seed, particle, step, index)`:
//! each particle owns a ChaCha stream, and every step consumes a fixed number
//! of words starting at a step-dependent position. Results are therefore
//! bit-identical for any thread count.

mod estimators;
pub mod output;

pub use estimators::{
    action_estimate, binned_reference, displacement_moments, estimate_drift, estimate_generator,
    occupancy_chi_square, ActionEstimate, BinEstimate, ChiSquareTest, DriftEstimate,
    GeneratorEstimate, Moments,
};

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{NoiseModel, PointNoise};
use crate::spectral::{VelocityField, WaveIndex};

/// Time-dependent drift `u(t, theta)`.
pub trait Drift: Sync {
    fn velocity(&self, t: f64, theta: [f64; 2]) -> [f64; 2];

    /// The drift as a field, when it has one (needed for the action).
    fn field(&self, t: f64) -> Option<VelocityField>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroDrift;

impl Drift for ZeroDrift {
    fn velocity(&self, _t: f64, _theta: [f64; 2]) -> [f64; 2] {
        [0.0; 2]
    }

    fn field(&self, _t: f64) -> Option<VelocityField> {
        None
    }
}

/// Time-independent drift evaluated from its nonzero Fourier modes.
#[derive(Clone, Debug)]
pub struct SteadyDrift {
    field: VelocityField,
    // (k, c_k) on the half lattice; the conjugate partner doubles the real part
    modes: Vec<(WaveIndex, Complex64)>,
}

impl SteadyDrift {
    pub fn new(field: VelocityField) -> Self {
        let tol = 1e-15 * field.stream().max_coeff();
        let modes = field
            .stream()
            .modes()
            .filter(|(k, c)| k.in_half_lattice() && c.norm() > tol)
            .collect();
        SteadyDrift { field, modes }
    }

    pub fn eval(&self, theta: [f64; 2]) -> [f64; 2] {
        let mut u = self.field.harmonic();
        for &(k, c) in &self.modes {
            let (s, co) = k.phase(theta).sin_cos();
            // psi = 2 Re(c e^{i k.theta}); u = (-d2 psi, d1 psi)
            let im = 2.0 * (c.re * s + c.im * co);
            u[0] += k.k2 as f64 * im;
            u[1] -= k.k1 as f64 * im;
        }
        u
    }
}

impl Drift for SteadyDrift {
    fn velocity(&self, _t: f64, theta: [f64; 2]) -> [f64; 2] {
        self.eval(theta)
    }

    fn field(&self, _t: f64) -> Option<VelocityField> {
        Some(self.field.clone())
    }
}

/// Drift sampled at increasing times, linearly interpolated in between
/// (and held constant outside the sampled range).
#[derive(Clone, Debug)]
pub struct SampledDrift {
    times: Vec<f64>,
    frames: Vec<SteadyDrift>,
}

impl SampledDrift {
    pub fn new(samples: Vec<(f64, VelocityField)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("sampled drift needs at least one frame".into()));
        }
        if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidArgument("drift sample times must increase".into()));
        }
        let (times, frames) = samples
            .into_iter()
            .map(|(t, f)| (t, SteadyDrift::new(f)))
            .unzip();
        Ok(SampledDrift { times, frames })
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let last = self.times.len() - 1;
        if t <= self.times[0] {
            return (0, 0.0);
        }
        if t >= self.times[last] {
            return (last, 0.0);
        }
        let j = self.times.partition_point(|&s| s <= t) - 1;
        let w = (t - self.times[j]) / (self.times[j + 1] - self.times[j]);
        (j, w)
    }
}

impl Drift for SampledDrift {
    fn velocity(&self, t: f64, theta: [f64; 2]) -> [f64; 2] {
        let (j, w) = self.locate(t);
        let a = self.frames[j].eval(theta);
        if w < 1e-12 {
            return a;
        }
        if w > 1.0 - 1e-12 {
            return self.frames[j + 1].eval(theta);
        }
        let b = self.frames[j + 1].eval(theta);
        [a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])]
    }

    fn field(&self, t: f64) -> Option<VelocityField> {
        let (j, w) = self.locate(t);
        let a = &self.frames[j].field;
        if w == 0.0 {
            return Some(a.clone());
        }
        let b = &self.frames[j + 1].field;
        Some(&(a * (1.0 - w)) + &(b * w))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Stratonovich predictor-corrector.
    Heun,
    /// Ito Euler-Maruyama.
    EulerMaruyama,
}

/// Starting state of the particles.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleEnsemble {
    pub positions: Vec<[f64; 2]>,
    pub phases: Vec<f64>,
    pub seed: u64,
}

// Initial positions are drawn from a seed domain disjoint from the noise.
const POSITION_DOMAIN: u64 = 0x9E37_79B9_7F4A_7C15;

impl ParticleEnsemble {
    /// `count` particles uniform on the torus, phases zero.
    pub fn uniform(count: usize, seed: u64) -> Self {
        let positions = (0..count)
            .into_par_iter()
            .map(|p| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ POSITION_DOMAIN);
                rng.set_stream(p as u64);
                [TAU * rng.gen::<f64>(), TAU * rng.gen::<f64>()]
            })
            .collect();
        ParticleEnsemble {
            positions,
            phases: vec![0.0; count],
            seed,
        }
    }

    /// `count` particles at the same point.
    pub fn at_point(count: usize, theta: [f64; 2], seed: u64) -> Self {
        ParticleEnsemble {
            positions: vec![wrap(theta); count],
            phases: vec![0.0; count],
            seed,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Reduce an angle pair to `[0, 2pi)^2`.
pub fn wrap(theta: [f64; 2]) -> [f64; 2] {
    let w = |x: f64| {
        let y = x.rem_euclid(TAU);
        if y >= TAU {
            0.0
        } else {
            y
        }
    };
    [w(theta[0]), w(theta[1])]
}

/// Minimal-image difference `b - a`, each component in `(-pi, pi]`.
pub fn minimal_image(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    let d = |x: f64| {
        let y = (x + std::f64::consts::PI).rem_euclid(TAU) - std::f64::consts::PI;
        if y <= -std::f64::consts::PI {
            y + TAU
        } else {
            y
        }
    };
    [d(b[0] - a[0]), d(b[1] - a[1])]
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationParams {
    pub dt: f64,
    pub steps: usize,
    /// Store a record every this many steps (the initial state is always stored).
    pub record_every: usize,
    pub scheme: Scheme,
    /// Central coordinate: the phase grows at rate `a`.
    pub a: f64,
}

/// Recorded particle states. Index `[record][particle]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathData {
    pub times: Vec<f64>,
    /// Positions reduced to `[0, 2pi)^2`.
    pub positions: Vec<Vec<[f64; 2]>>,
    /// Accumulated displacement since the start, without wrapping.
    pub displacements: Vec<Vec<[f64; 2]>>,
    pub phases: Vec<Vec<f64>>,
}

impl PathData {
    pub fn particles(&self) -> usize {
        self.positions.first().map_or(0, Vec::len)
    }

    pub fn records(&self) -> usize {
        self.times.len()
    }
}

/// Gaussian source with a fixed number of words per step.
struct Increments {
    rng: ChaCha8Rng,
    words_per_step: u128,
}

impl Increments {
    fn new(seed: u64, particle: usize, dim: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(particle as u64);
        // Box-Muller: each pair of normals uses two f64 uniforms (four 32-bit words)
        Increments {
            rng,
            words_per_step: 4 * dim.div_ceil(2) as u128,
        }
    }

    fn fill(&mut self, step: usize, scale: f64, out: &mut [f64]) {
        self.rng.set_word_pos(step as u128 * self.words_per_step);
        for pair in out.chunks_mut(2) {
            let u1 = 1.0 - self.rng.gen::<f64>();
            let u2: f64 = self.rng.gen();
            let r = (-2.0 * u1.ln()).sqrt() * scale;
            let (s, c) = (TAU * u2).sin_cos();
            pair[0] = r * c;
            if pair.len() > 1 {
                pair[1] = r * s;
            }
        }
    }
}

struct ParticleTrack {
    positions: Vec<[f64; 2]>,
    displacements: Vec<[f64; 2]>,
    phases: Vec<f64>,
}

fn add(a: [f64; 2], b: [f64; 2], s: f64) -> [f64; 2] {
    [a[0] + s * b[0], a[1] + s * b[1]]
}

#[allow(clippy::too_many_arguments)]
fn track(
    particle: usize,
    start: [f64; 2],
    phase0: f64,
    seed: u64,
    noise: &PointNoise,
    drift: &dyn Drift,
    params: &SimulationParams,
    records: usize,
) -> Result<ParticleTrack> {
    let dim = noise.dimension();
    let mut inc = Increments::new(seed, particle, dim);
    let mut dw = vec![0.0; dim];
    let sqrt_dt = params.dt.sqrt();

    let mut x = start;
    let mut disp = [0.0; 2];
    let mut phase = phase0;
    let mut out = ParticleTrack {
        positions: Vec::with_capacity(records),
        displacements: Vec::with_capacity(records),
        phases: Vec::with_capacity(records),
    };
    out.positions.push(x);
    out.displacements.push(disp);
    out.phases.push(phase);

    for step in 0..params.steps {
        let t = step as f64 * params.dt;
        if dim > 0 {
            inc.fill(step, sqrt_dt, &mut dw);
        }
        let u0 = drift.velocity(t, x);
        let g0 = if dim > 0 { noise.apply(x, &dw) } else { [0.0; 2] };
        let dx = match params.scheme {
            Scheme::EulerMaruyama => add(g0, u0, params.dt),
            Scheme::Heun => {
                let pred = add(add(x, u0, params.dt), g0, 1.0);
                let u1 = drift.velocity(t + params.dt, pred);
                let g1 = if dim > 0 { noise.apply(pred, &dw) } else { [0.0; 2] };
                [
                    0.5 * (u0[0] + u1[0]) * params.dt + 0.5 * (g0[0] + g1[0]),
                    0.5 * (u0[1] + u1[1]) * params.dt + 0.5 * (g0[1] + g1[1]),
                ]
            }
        };
        if !(dx[0].is_finite() && dx[1].is_finite()) {
            return Err(Error::NonFinitePosition { particle, step });
        }
        disp = add(disp, dx, 1.0);
        x = wrap(add(x, dx, 1.0));
        phase += params.a * params.dt;
        if (step + 1) % params.record_every == 0 {
            out.positions.push(x);
            out.displacements.push(disp);
            out.phases.push(phase);
        }
    }
    Ok(out)
}

/// Advance every particle and record the paths.
pub fn simulate(
    noise: &NoiseModel,
    drift: &dyn Drift,
    ensemble: &ParticleEnsemble,
    params: &SimulationParams,
) -> Result<PathData> {
    noise.validate()?;
    if !(params.dt.is_finite() && params.dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be > 0, got {}", params.dt)));
    }
    if params.record_every == 0 {
        return Err(Error::InvalidArgument("record_every must be >= 1".into()));
    }
    if ensemble.phases.len() != ensemble.positions.len() {
        return Err(Error::InvalidArgument("one phase per particle required".into()));
    }
    let pn = noise.point_noise();
    let records = 1 + params.steps / params.record_every;
    let tracks: Vec<ParticleTrack> = ensemble
        .positions
        .par_iter()
        .zip(&ensemble.phases)
        .enumerate()
        .map(|(p, (&x0, &c0))| track(p, x0, c0, ensemble.seed, &pn, drift, params, records))
        .collect::<Result<_>>()?;

    let times = (0..records)
        .map(|r| (r * params.record_every) as f64 * params.dt)
        .collect();
    let mut positions = vec![Vec::with_capacity(tracks.len()); records];
    let mut displacements = vec![Vec::with_capacity(tracks.len()); records];
    let mut phases = vec![Vec::with_capacity(tracks.len()); records];
    for tr in &tracks {
        for r in 0..records {
            positions[r].push(tr.positions[r]);
            displacements[r].push(tr.displacements[r]);
            phases[r].push(tr.phases[r]);
        }
    }
    Ok(PathData {
        times,
        positions,
        displacements,
        phases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{grad_perp, SpectralField};

    fn params(steps: usize) -> SimulationParams {
        SimulationParams {
            dt: 0.01,
            steps,
            record_every: 1,
            scheme: Scheme::Heun,
            a: 1.0,
        }
    }

    #[test]
    fn wrap_and_minimal_image() {
        let w = wrap([-0.5, 7.0]);
        assert!((w[0] - (TAU - 0.5)).abs() < 1e-15 && (w[1] - (7.0 - TAU)).abs() < 1e-15);
        let d = minimal_image([0.1, 6.2], [6.2, 0.1]);
        assert!((d[0] + (0.2 + TAU - 6.3)).abs() < 1e-12);
        assert!((d[1] - (TAU - 6.1)).abs() < 1e-12);
    }

    #[test]
    fn steady_drift_matches_field_eval() {
        let psi = SpectralField::from_fn(16, |a, b| (a + 2.0 * b).cos() - 0.3 * (3.0 * a - b).sin());
        let u = VelocityField::new(psi, [0.2, -0.1]);
        let d = SteadyDrift::new(u.clone());
        let th = [1.3, 4.4];
        let (a, b) = (d.eval(th), u.eval(th));
        assert!((a[0] - b[0]).abs() < 1e-13 && (a[1] - b[1]).abs() < 1e-13);
    }

    #[test]
    fn deterministic_and_phase_grows_linearly() {
        let noise = NoiseModel::KolmogorovBasis { m: 2, r: 3.0 };
        let ens = ParticleEnsemble::uniform(64, 7);
        let drift = SteadyDrift::new(grad_perp(&SpectralField::from_fn(16, |a, _| a.cos())));
        let p1 = simulate(&noise, &drift, &ens, &params(20)).unwrap();
        let p2 = simulate(&noise, &drift, &ens, &params(20)).unwrap();
        assert_eq!(p1, p2);
        let last = p1.phases.last().unwrap();
        assert!(last.iter().all(|c| (c - 0.2).abs() < 1e-14));
        let other = simulate(&noise, &drift, &ParticleEnsemble { seed: 8, ..ens }, &params(20)).unwrap();
        assert_ne!(p1.positions, other.positions);
    }

    #[test]
    fn increments_depend_only_on_step() {
        let mut a = Increments::new(3, 5, 6);
        let mut b = Increments::new(3, 5, 6);
        let (mut x, mut y) = (vec![0.0; 6], vec![0.0; 6]);
        a.fill(0, 1.0, &mut x);
        a.fill(1, 1.0, &mut x);
        a.fill(9, 1.0, &mut x);
        b.fill(9, 1.0, &mut y);
        assert_eq!(x, y);
    }

    #[test]
    fn zero_noise_reduces_to_ode() {
        let noise = NoiseModel::TwoConstantFields { nu: 0.0 };
        let ens = ParticleEnsemble::at_point(1, [1.0, 2.0], 1);
        let drift = SteadyDrift::new(VelocityField::constant(8, [0.5, -0.25]));
        let p = simulate(&noise, &drift, &ens, &params(100)).unwrap();
        let d = p.displacements.last().unwrap()[0];
        assert!((d[0] - 0.5).abs() < 1e-12 && (d[1] + 0.25).abs() < 1e-12);
    }

    #[test]
    fn sampled_drift_interpolates() {
        let f0 = VelocityField::constant(8, [0.0, 0.0]);
        let f1 = VelocityField::constant(8, [1.0, 2.0]);
        let d = SampledDrift::new(vec![(0.0, f0), (1.0, f1)]).unwrap();
        let v = d.velocity(0.25, [0.0, 0.0]);
        assert!((v[0] - 0.25).abs() < 1e-15 && (v[1] - 0.5).abs() < 1e-15);
        assert_eq!(d.velocity(5.0, [0.0, 0.0]), [1.0, 2.0]);
        assert!(SampledDrift::new(vec![]).is_err());
    }
}
