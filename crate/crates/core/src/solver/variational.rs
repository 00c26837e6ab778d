//! First variation of the reduced action along a trajectory.
//!
//! For a test direction `v^(t)` vanishing at both ends, the residual
//!
//! ```text
//! R = int_0^tau << d/dt v^ + ad^_{v^} u^ + (L v, 0), u^ >> dt,   ad^_{v^} u^ = -[v^, u^]
//! ```
//!
//! vanishes for every `v^` exactly when `u^` solves the damped extended
//! Euler-Arnold equation with linear dissipation `L`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::algebra::{roger_cocycle, ExtendedElement};
use crate::error::{Error, Result};
use crate::quadrature::simpson_weights;
use crate::spectral::{SpectralField, VelocityField, AREA};

use super::{extended_state, Solver, SolverConfig};

/// Time series of extended states on a uniform grid `t_0 < t_1 < ...`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ExtendedElement>,
}

impl Trajectory {
    /// Run the vorticity solver for `config.steps` steps and record every state.
    pub fn record(config: &SolverConfig, psi0: SpectralField) -> Result<Self> {
        let mut solver = Solver::new(config.clone(), psi0)?;
        let mut times = vec![0.0];
        let mut states = vec![extended_state(&solver.state().psi, config)];
        for _ in 0..config.steps {
            let s = solver.step()?;
            times.push(s.t);
            states.push(extended_state(&s.psi, config));
        }
        Ok(Trajectory { times, states })
    }

    /// The same times with `f` applied to every state.
    pub fn map(&self, f: impl Fn(&ExtendedElement) -> ExtendedElement) -> Self {
        Trajectory {
            times: self.times.clone(),
            states: self.states.iter().map(f).collect(),
        }
    }

    pub fn duration(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0) - self.times.first().copied().unwrap_or(0.0)
    }
}

type Envelope = dyn Fn(f64) -> (f64, f64) + Send + Sync;

/// Separable test direction `v^(t) = phi(t) w`; the envelope returns `(phi(t), phi'(t))`.
#[derive(Clone)]
pub struct TestDirection {
    pub w: ExtendedElement,
    envelope: Arc<Envelope>,
}

impl fmt::Debug for TestDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestDirection").field("w", &self.w).finish_non_exhaustive()
    }
}

impl TestDirection {
    pub fn new(w: ExtendedElement, envelope: impl Fn(f64) -> (f64, f64) + Send + Sync + 'static) -> Self {
        TestDirection {
            w,
            envelope: Arc::new(envelope),
        }
    }

    /// `phi(t) = sin(j pi (t - t0) / tau)` on `[t0, t0 + tau]`.
    pub fn sine(w: ExtendedElement, j: u32, t0: f64, tau: f64) -> Self {
        let c = j as f64 * PI / tau;
        Self::new(w, move |t| {
            let x = c * (t - t0);
            (x.sin(), c * x.cos())
        })
    }

    pub fn envelope(&self, t: f64) -> (f64, f64) {
        (self.envelope)(t)
    }
}

/// Linear dissipation `L = nu laplacian - sigma` of a config, acting on the stream function.
fn dissipation(config: &SolverConfig, x: &ExtendedElement) -> ExtendedElement {
    let u = x.u.apply_stream_symbol(|k| {
        -config.nu * k.norm_sq() - config.sigma_mode.rate(k, config.beta)
    });
    ExtendedElement::new(u, 0.0)
}

/// Endpoint tolerance on `|v^(0)|` and `|v^(tau)|`.
pub const ENDPOINT_TOL: f64 = 1e-12;

pub fn variational_residual(
    traj: &Trajectory,
    v: &TestDirection,
    config: &SolverConfig,
) -> Result<f64> {
    Ok(variational_residuals(traj, std::slice::from_ref(v), config)?[0])
}

/// Grid values of a field and its first derivatives.
struct Jet {
    v: [Vec<f64>; 2],
    // d[i][j] = d_j v_i
    d: [[Vec<f64>; 2]; 2],
}

impl Jet {
    fn of(u: &VelocityField) -> Self {
        let [c1, c2] = u.components();
        Jet {
            v: [c1.to_grid(), c2.to_grid()],
            d: [
                [c1.dx1().to_grid(), c1.dx2().to_grid()],
                [c2.dx1().to_grid(), c2.dx2().to_grid()],
            ],
        }
    }

    /// `int <[w, u], u>` for `[w, u] = (w.grad)u - (u.grad)w`, by grid
    /// quadrature (exact while `band(w) + 2 band(u) < n`).
    fn bracket_against(w: &Jet, u: &Jet) -> f64 {
        let len = u.v[0].len();
        let mut s = 0.0;
        for p in 0..len {
            for i in 0..2 {
                let c = w.v[0][p] * u.d[i][0][p] + w.v[1][p] * u.d[i][1][p]
                    - u.v[0][p] * w.d[i][0][p]
                    - u.v[1][p] * w.d[i][1][p];
                s += c * u.v[i][p];
            }
        }
        s * AREA / len as f64
    }
}

/// Residuals for several directions sharing one pass over the trajectory.
pub fn variational_residuals(
    traj: &Trajectory,
    dirs: &[TestDirection],
    config: &SolverConfig,
) -> Result<Vec<f64>> {
    let len = traj.times.len();
    if len < 2 || traj.states.len() != len {
        return Err(Error::InvalidArgument(
            "trajectory needs at least two samples and one state per time".into(),
        ));
    }
    let h = (traj.times[len - 1] - traj.times[0]) / (len - 1) as f64;
    let uniform = traj
        .times
        .windows(2)
        .all(|p| ((p[1] - p[0]) - h).abs() <= 1e-9 * h.abs().max(1e-300));
    if !(h > 0.0) || !uniform {
        return Err(Error::InvalidArgument("trajectory times must be uniformly increasing".into()));
    }
    let n = traj.states[0].u.n();
    let cutoff = SpectralField::dealias_cutoff(n);
    for v in dirs {
        let wn = v.w.norm();
        let start = v.envelope(traj.times[0]).0.abs() * wn;
        let end = v.envelope(traj.times[len - 1]).0.abs() * wn;
        if start > ENDPOINT_TOL || end > ENDPOINT_TOL {
            return Err(Error::EndpointsNotZero { start, end });
        }
        if v.w.u.n() != n {
            return Err(Error::ResolutionMismatch { left: v.w.u.n(), right: n });
        }
        let tol = 1e-13 * v.w.u.stream().max_coeff();
        if v.w.u.stream().support(tol).iter().any(|k| k.max_abs() > cutoff) {
            return Err(Error::InvalidArgument(
                "test direction must lie inside the dealiased band".into(),
            ));
        }
    }

    let p = config.params();
    let jets: Vec<Jet> = dirs.iter().map(|v| Jet::of(&v.w.u)).collect();
    let lws: Vec<ExtendedElement> = dirs.iter().map(|v| dissipation(config, &v.w)).collect();
    let weights = simpson_weights(len, h);
    let integrand: Vec<Vec<f64>> = traj
        .times
        .par_iter()
        .zip(&traj.states)
        .map(|(&t, u)| {
            let uj = Jet::of(&u.u);
            dirs.iter()
                .zip(&jets)
                .zip(&lws)
                .map(|((v, wj), lw)| {
                    if v.w.norm() == 0.0 {
                        return Ok(0.0);
                    }
                    let (phi, dphi) = v.envelope(t);
                    // << ad^_w u^, u^ >> = -<<[w, u], u>> - omega(w, u) a^
                    let ad = -Jet::bracket_against(wj, &uj) - roger_cocycle(&v.w.u, &u.u, p)? * u.a;
                    Ok(v.w.inner(u)? * dphi + (ad + lw.inner(u)?) * phi)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    // fixed-order reduction keeps the result independent of the thread count
    Ok((0..dirs.len())
        .map(|j| integrand.iter().zip(&weights).map(|(g, w)| g[j] * w).sum())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batched_matches_extended_bracket() {
        use crate::algebra::ext_bracket;
        let cfg = SolverConfig {
            n: 32,
            dt: 0.01,
            steps: 6,
            nu: 0.01,
            ..Default::default()
        };
        let psi = SpectralField::from_fn(32, |a, b| 0.3 * (a + 2.0 * b).cos() + 0.2 * (a - b).sin());
        let traj = Trajectory::record(&cfg, psi).unwrap();
        let w = ExtendedElement::new(
            crate::spectral::grad_perp(&SpectralField::from_fn(32, |a, b| (a + b).cos() + (2.0 * a).sin())),
            0.4,
        );
        let v = TestDirection::sine(w.clone(), 1, 0.0, traj.duration());
        let got = variational_residual(&traj, &v, &cfg).unwrap();
        // direct evaluation through the extended bracket
        let weights = simpson_weights(traj.times.len(), cfg.dt);
        let lw = dissipation(&cfg, &w);
        let mut want = 0.0;
        for ((&t, u), wt) in traj.times.iter().zip(&traj.states).zip(weights) {
            let (phi, dphi) = v.envelope(t);
            let ad = ext_bracket(&w, u, cfg.params()).unwrap().scaled(-1.0);
            want += wt * (w.inner(u).unwrap() * dphi + (ad.inner(u).unwrap() + lw.inner(u).unwrap()) * phi);
        }
        assert!((got - want).abs() < 1e-12 * want.abs().max(1.0), "{got} vs {want}");
    }

    #[test]
    fn zero_direction_and_endpoint_check() {
        let cfg = SolverConfig {
            n: 16,
            dt: 0.01,
            steps: 10,
            ..Default::default()
        };
        let psi = SpectralField::from_fn(16, |a, b| 1e-3 * (a + 2.0 * b).cos());
        let traj = Trajectory::record(&cfg, psi).unwrap();
        let zero = TestDirection::sine(ExtendedElement::zeros(16), 1, 0.0, traj.duration());
        assert_eq!(variational_residual(&traj, &zero, &cfg).unwrap(), 0.0);

        let w = ExtendedElement::new(traj.states[0].u.clone(), 1.0);
        let bad = TestDirection::new(w, |t| (t.cos(), -t.sin()));
        assert!(matches!(
            variational_residual(&traj, &bad, &cfg),
            Err(Error::EndpointsNotZero { .. })
        ));
    }
}
