//! Integral criterion comparing the cocycle of `alpha = c dtheta_2` with the
//! singular cocycle of the closed curve `N = {(t, s0) : t in [0, 2pi)}`.
//!
//! The two cocycles are cohomologous iff `int_N gamma = int_{T^2} alpha ^ gamma`
//! for every closed one-form `gamma`. For `gamma = F dtheta_1 + G dtheta_2`,
//! `alpha ^ gamma = -c F dtheta_1 ^ dtheta_2`, so the criterion holds for all
//! closed forms exactly when `c = -1/(2 pi)`.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{SpectralField, WaveIndex, AREA};

/// `alpha` coefficient for which the criterion holds.
pub const CRITICAL_ALPHA: f64 = -1.0 / (2.0 * PI);

/// Relative tolerance of the closedness check.
pub const CLOSED_TOL: f64 = 1e-12;

/// Tolerance on `|int_N gamma - int alpha ^ gamma|` and on the spread of
/// `h(s) = int_0^{2pi} F(t, s) dt`.
pub const PASS_TOL: f64 = 1e-10;

/// Number of levels `s` at which `h(s)` is sampled.
pub const S_SAMPLES: usize = 8;

/// `gamma = (f + c1) dtheta_1 + (g + c2) dtheta_2`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneForm {
    pub f: SpectralField,
    pub g: SpectralField,
    pub c1: f64,
    pub c2: f64,
}

impl OneForm {
    pub fn constant(n: usize, c1: f64, c2: f64) -> Self {
        OneForm {
            f: SpectralField::zeros(n),
            g: SpectralField::zeros(n),
            c1,
            c2,
        }
    }

    pub fn new(f: SpectralField, g: SpectralField) -> Result<Self> {
        if f.n() != g.n() {
            return Err(Error::ResolutionMismatch {
                left: f.n(),
                right: g.n(),
            });
        }
        Ok(OneForm {
            f,
            g,
            c1: 0.0,
            c2: 0.0,
        })
    }

    /// `d phi`
    pub fn exact(phi: &SpectralField) -> Self {
        OneForm {
            f: phi.dx1(),
            g: phi.dx2(),
            c1: 0.0,
            c2: 0.0,
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        OneForm {
            f: &self.f + &other.f,
            g: &self.g + &other.g,
            c1: self.c1 + other.c1,
            c2: self.c2 + other.c2,
        }
    }

    /// `|| d2 F - d1 G ||_{L^2}` (constants drop out).
    pub fn closed_residual(&self) -> f64 {
        (&self.f.dx2() - &self.g.dx1()).l2_norm()
    }

    fn closed_scale(&self) -> f64 {
        self.f.dx2().l2_norm() + self.g.dx1().l2_norm()
    }

    pub fn is_closed(&self) -> bool {
        self.closed_residual() <= CLOSED_TOL * self.closed_scale().max(1.0)
    }
}

/// `h(s) = int_0^{2pi} F(t, s) dt`, exact from the `k1 = 0` coefficients.
pub fn line_integral_at(gamma: &OneForm, s: f64) -> f64 {
    let h = (gamma.f.n() / 2) as i64;
    let sum: Complex64 = (-h + 1..h)
        .map(|k2| gamma.f.coeff(WaveIndex::new(0, k2)) * Complex64::from_polar(1.0, k2 as f64 * s))
        .sum();
    TAU * (sum.re + gamma.c1)
}

/// `int_N gamma` on `N = {(t, s0)}`; the `dtheta_2` part pulls back to zero.
pub fn integrate_over_n(gamma: &OneForm, s0: f64) -> f64 {
    line_integral_at(gamma, s0)
}

/// `int alpha ^ gamma` for `alpha = alpha_coeff dtheta_2`, `= -alpha_coeff int F`.
pub fn wedge_integral(alpha_coeff: f64, gamma: &OneForm) -> f64 {
    -alpha_coeff * AREA * (gamma.f.mean() + gamma.c1)
}

/// Largest deviation of `h(s)` from `h(s0)` over [`S_SAMPLES`] levels.
pub fn s_invariance(gamma: &OneForm, s0: f64) -> f64 {
    let h0 = line_integral_at(gamma, s0);
    (0..S_SAMPLES)
        .map(|j| line_integral_at(gamma, s0 + TAU * j as f64 / S_SAMPLES as f64 + 0.1))
        .map(|h| (h - h0).abs())
        .fold(0.0, f64::max)
}

/// One line of the cohomology report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CohomologyReport {
    pub gamma_id: String,
    pub closed_residual: f64,
    pub line_integral: Option<f64>,
    pub wedge_integral: Option<f64>,
    pub abs_diff: Option<f64>,
    pub pass: bool,
}

/// Check the criterion on each form; forms that are not closed are rejected
/// with their residual and no integrals.
pub fn check_cohomologous(
    family: &[(String, OneForm)],
    alpha_coeff: f64,
    s0: f64,
) -> Vec<CohomologyReport> {
    family
        .iter()
        .map(|(id, gamma)| {
            let closed_residual = gamma.closed_residual();
            if !gamma.is_closed() {
                return CohomologyReport {
                    gamma_id: id.clone(),
                    closed_residual,
                    line_integral: None,
                    wedge_integral: None,
                    abs_diff: None,
                    pass: false,
                };
            }
            let line = integrate_over_n(gamma, s0);
            let wedge = wedge_integral(alpha_coeff, gamma);
            let diff = (line - wedge).abs();
            let pass = diff < PASS_TOL && s_invariance(gamma, s0) < PASS_TOL;
            CohomologyReport {
                gamma_id: id.clone(),
                closed_residual,
                line_integral: Some(line),
                wedge_integral: Some(wedge),
                abs_diff: Some(diff),
                pass,
            }
        })
        .collect()
}

/// One JSON object per line.
pub fn write_report_jsonl<W: Write>(mut w: W, reports: &[CohomologyReport]) -> Result<()> {
    for r in reports {
        let line = serde_json::to_string(r)
            .map_err(|e| Error::InvalidArgument(format!("report serialization: {e}")))?;
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Forms exercising the four steps of the argument: constant forms, a form
/// depending on `theta_1` only, and general closed forms (constant plus exact).
pub fn standard_family(n: usize) -> Vec<(String, OneForm)> {
    let mut out = vec![
        ("theta1".to_string(), OneForm::constant(n, 1.0, 0.0)),
        ("theta2".to_string(), OneForm::constant(n, 0.0, 1.0)),
        ("3theta1+5theta2".to_string(), OneForm::constant(n, 3.0, 5.0)),
    ];
    let k = SpectralField::from_fn(n, |t, _| 2.0 + t.sin());
    out.push((
        "(2+sin t1) theta1".to_string(),
        OneForm::new(k, SpectralField::zeros(n)).expect("same resolution"),
    ));
    let c = SpectralField::from_fn(n, |a, b| (a + b).cos());
    out.push((
        "cos(t1+t2)(theta1+theta2)".to_string(),
        OneForm::new(c.clone(), c).expect("same resolution"),
    ));
    let phi = SpectralField::from_fn(n, |a, b| (2.0 * a - b).sin() + 0.5 * (a + 3.0 * b).cos());
    out.push((
        "-theta1+2theta2+d(phi)".to_string(),
        OneForm::constant(n, -1.0, 2.0).plus(&OneForm::exact(&phi)),
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const N: usize = 16;

    #[test]
    fn step_values() {
        let t1 = OneForm::constant(N, 1.0, 0.0);
        let t2 = OneForm::constant(N, 0.0, 1.0);
        assert!((integrate_over_n(&t1, 0.0) - TAU).abs() < 1e-15);
        assert_eq!(integrate_over_n(&t2, 0.0), 0.0);
        assert!((wedge_integral(CRITICAL_ALPHA, &t1) - TAU).abs() < 1e-14);
        assert_eq!(wedge_integral(CRITICAL_ALPHA, &t2), 0.0);
        // the opposite sign of alpha flips the wedge integral
        assert!((wedge_integral(1.0 / TAU, &t1) + TAU).abs() < 1e-14);
    }

    #[test]
    fn mean_of_f_only_survives() {
        let f = SpectralField::from_fn(N, |t, _| 1.0 + t.cos());
        let g = OneForm::new(f, SpectralField::zeros(N)).unwrap();
        assert!((wedge_integral(CRITICAL_ALPHA, &g) - TAU).abs() < 1e-13);
    }

    #[test]
    fn non_closed_is_rejected_with_residual() {
        let f = SpectralField::from_fn(N, |_, s| s.sin());
        let g = OneForm::new(f, SpectralField::zeros(N)).unwrap();
        let rep = check_cohomologous(&[("x".into(), g)], CRITICAL_ALPHA, 0.0);
        assert!(!rep[0].pass && rep[0].line_integral.is_none());
        // || cos theta2 || = sqrt(N / 2)
        assert!((rep[0].closed_residual - (AREA / 2.0).sqrt()).abs() < 1e-12);
        let json = serde_json::to_string(&rep[0]).unwrap();
        assert!(json.contains("\"line_integral\":null"));
    }

    #[test]
    fn standard_family_passes() {
        let rep = check_cohomologous(&standard_family(32), CRITICAL_ALPHA, 0.0);
        for r in &rep {
            assert!(r.pass, "{r:?}");
        }
        let mut buf = Vec::new();
        write_report_jsonl(&mut buf, &rep).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), rep.len());
    }
}
