//! Monte Carlo estimators on recorded paths. All reductions run in particle
//! order, so they are reproducible bit for bit.

use std::f64::consts::TAU;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{minimal_image, Drift, PathData};
use crate::error::{Error, Result};
use crate::quadrature::simpson_weights;
use crate::spectral::l2_inner;

/// Mean and standard error of one bin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BinEstimate {
    pub count: usize,
    pub mean: [f64; 2],
    pub stderr: [f64; 2],
}

/// Binned conditional-expectation estimate of the drift at one time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DriftEstimate {
    pub t: f64,
    pub eps: f64,
    /// Bins per axis.
    pub bins: usize,
    /// Row-major over `(theta1 bin, theta2 bin)`; `None` where fewer than two
    /// particles landed.
    pub cells: Vec<Option<BinEstimate>>,
    pub phase_rate: f64,
    pub phase_rate_stderr: f64,
}

impl DriftEstimate {
    /// Per-bin `(estimate - reference) / stderr`; `None` for missing bins or
    /// zero standard error.
    pub fn z_scores(&self, reference: &[Option<[f64; 2]>]) -> Vec<Option<[f64; 2]>> {
        self.cells
            .iter()
            .zip(reference)
            .map(|(c, r)| match (c, r) {
                (Some(c), Some(r)) if c.stderr[0] > 0.0 && c.stderr[1] > 0.0 => Some([
                    (c.mean[0] - r[0]) / c.stderr[0],
                    (c.mean[1] - r[1]) / c.stderr[1],
                ]),
                _ => None,
            })
            .collect()
    }

    /// Bin centre of cell `i`.
    pub fn centre(&self, i: usize) -> [f64; 2] {
        let h = TAU / self.bins as f64;
        [h * ((i / self.bins) as f64 + 0.5), h * ((i % self.bins) as f64 + 0.5)]
    }
}

pub(crate) fn bin_index(theta: [f64; 2], bins: usize) -> usize {
    let b = |x: f64| ((x / TAU * bins as f64) as usize).min(bins - 1);
    b(theta[0]) * bins + b(theta[1])
}

#[derive(Default, Clone, Copy)]
struct Acc {
    n: usize,
    s: [f64; 2],
    ss: [f64; 2],
}

impl Acc {
    fn push(&mut self, x: [f64; 2]) {
        self.n += 1;
        for j in 0..2 {
            self.s[j] += x[j];
            self.ss[j] += x[j] * x[j];
        }
    }

    fn finish(&self) -> Option<BinEstimate> {
        if self.n < 2 {
            return None;
        }
        let n = self.n as f64;
        let mut mean = [0.0; 2];
        let mut stderr = [0.0; 2];
        for j in 0..2 {
            mean[j] = self.s[j] / n;
            let var = ((self.ss[j] - n * mean[j] * mean[j]) / (n - 1.0)).max(0.0);
            stderr[j] = (var / n).sqrt();
        }
        Some(BinEstimate {
            count: self.n,
            mean,
            stderr,
        })
    }
}

fn check_window(paths: &PathData, record: usize, window: usize) -> Result<()> {
    if window == 0 || record + window >= paths.records() {
        return Err(Error::InvalidArgument(format!(
            "need records {record} and {} but only {} are stored",
            record + window,
            paths.records()
        )));
    }
    Ok(())
}

fn check_bins(bins: usize) -> Result<()> {
    if bins == 0 {
        return Err(Error::InvalidArgument("bins must be >= 1".into()));
    }
    Ok(())
}

/// Estimate `u(t, x)` from `(theta(t + eps) - theta(t)) / eps` averaged over
/// the particles found in each bin at time `t`, with `t` the time of `record`
/// and `eps` the span of `window` records.
pub fn estimate_drift(
    paths: &PathData,
    record: usize,
    window: usize,
    bins: usize,
) -> Result<DriftEstimate> {
    check_window(paths, record, window)?;
    check_bins(bins)?;
    let eps = paths.times[record + window] - paths.times[record];
    let x0 = &paths.positions[record];
    let x1 = &paths.positions[record + window];
    let mut acc = vec![Acc::default(); bins * bins];
    for (a, b) in x0.iter().zip(x1) {
        let d = minimal_image(*a, *b);
        acc[bin_index(*a, bins)].push([d[0] / eps, d[1] / eps]);
    }
    let mut phase = Acc::default();
    for (c0, c1) in paths.phases[record].iter().zip(&paths.phases[record + window]) {
        phase.push([(c1 - c0) / eps, 0.0]);
    }
    let (phase_rate, phase_rate_stderr) = phase
        .finish()
        .map_or((f64::NAN, f64::NAN), |e| (e.mean[0], e.stderr[0]));
    Ok(DriftEstimate {
        t: paths.times[record],
        eps,
        bins,
        cells: acc.iter().map(Acc::finish).collect(),
        phase_rate,
        phase_rate_stderr,
    })
}

/// Bin average of `u(t, theta_p)` over the given particles, the quantity the
/// drift estimator targets.
pub fn binned_reference(
    positions: &[[f64; 2]],
    drift: &dyn Drift,
    t: f64,
    bins: usize,
) -> Vec<Option<[f64; 2]>> {
    let mut acc = vec![Acc::default(); bins * bins];
    for &x in positions {
        acc[bin_index(x, bins)].push(drift.velocity(t, x));
    }
    acc.iter()
        .map(|a| {
            (a.n > 0).then(|| [a.s[0] / a.n as f64, a.s[1] / a.n as f64])
        })
        .collect()
}

/// Empirical generator on one test function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeneratorEstimate {
    pub samples: usize,
    /// Mean of `(f(theta(t + eps)) - f(theta(t))) / eps`.
    pub empirical: f64,
    /// Mean of the predicted `L f(theta(t))`.
    pub predicted: f64,
    /// Standard error of the per-particle difference.
    pub stderr: f64,
}

impl GeneratorEstimate {
    pub fn z(&self) -> f64 {
        (self.empirical - self.predicted) / self.stderr
    }
}

pub fn estimate_generator(
    paths: &PathData,
    record: usize,
    window: usize,
    f: impl Fn([f64; 2]) -> f64,
    lf: impl Fn([f64; 2]) -> f64,
) -> Result<GeneratorEstimate> {
    check_window(paths, record, window)?;
    let eps = paths.times[record + window] - paths.times[record];
    let mut inc = Acc::default();
    let mut diff = Acc::default();
    for (a, b) in paths.positions[record].iter().zip(&paths.positions[record + window]) {
        let df = (f(*b) - f(*a)) / eps;
        let l = lf(*a);
        inc.push([df, l]);
        diff.push([df - l, 0.0]);
    }
    let n = inc.n.max(1) as f64;
    let stderr = diff.finish().map_or(f64::NAN, |e| e.stderr[0]);
    Ok(GeneratorEstimate {
        samples: inc.n,
        empirical: inc.s[0] / n,
        predicted: inc.s[1] / n,
        stderr,
    })
}

/// Mean and unbiased variance of the unwrapped displacement per component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Moments {
    pub t: f64,
    pub mean: [f64; 2],
    pub var: [f64; 2],
}

pub fn displacement_moments(paths: &PathData) -> Vec<Moments> {
    paths
        .times
        .iter()
        .zip(&paths.displacements)
        .map(|(&t, d)| {
            let mut acc = Acc::default();
            d.iter().for_each(|x| acc.push(*x));
            let n = acc.n as f64;
            let mut mean = [0.0; 2];
            let mut var = [0.0; 2];
            if acc.n > 0 {
                for j in 0..2 {
                    mean[j] = acc.s[j] / n;
                }
            }
            if acc.n > 1 {
                for j in 0..2 {
                    var[j] = ((acc.ss[j] - n * mean[j] * mean[j]) / (n - 1.0)).max(0.0);
                }
            }
            Moments { t, mean, var }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson test of uniform occupancy over `bins x bins` cells.
pub fn occupancy_chi_square(positions: &[[f64; 2]], bins: usize) -> Result<ChiSquareTest> {
    check_bins(bins)?;
    let cells = bins * bins;
    if cells < 2 || positions.is_empty() {
        return Err(Error::InvalidArgument("need at least two cells and one particle".into()));
    }
    let mut counts = vec![0usize; cells];
    for &x in positions {
        counts[bin_index(x, bins)] += 1;
    }
    let expected = positions.len() as f64 / cells as f64;
    let statistic: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let dof = cells - 1;
    let dist = ChiSquared::new(dof as f64)
        .map_err(|e| Error::InvalidArgument(format!("chi-square distribution: {e}")))?;
    Ok(ChiSquareTest {
        statistic,
        dof,
        p_value: dist.sf(statistic),
    })
}

/// Reduced action together with the drift check that backs it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ActionEstimate {
    /// `(1/2) int (<<u, u>> + a^2) dt` over the recorded time span.
    pub value: f64,
    /// Largest `|z|` between the binned drift estimate at the first record and the drift.
    pub max_abs_z: f64,
    pub bins_compared: usize,
}

pub fn action_estimate(
    paths: &PathData,
    drift: &dyn Drift,
    a: f64,
    bins: usize,
) -> Result<ActionEstimate> {
    let len = paths.records();
    if len < 2 {
        return Err(Error::InvalidArgument("need at least two records".into()));
    }
    let h = paths.times[1] - paths.times[0];
    let weights = simpson_weights(len, h);
    let mut value = 0.0;
    for (&t, w) in paths.times.iter().zip(&weights) {
        let e = match drift.field(t) {
            Some(u) => l2_inner(&u, &u)?,
            None => 0.0,
        };
        value += w * 0.5 * (e + a * a);
    }

    let est = estimate_drift(paths, 0, 1, bins)?;
    let reference = binned_reference(&paths.positions[0], drift, paths.times[0], bins);
    let zs: Vec<[f64; 2]> = est.z_scores(&reference).into_iter().flatten().collect();
    let max_abs_z = zs
        .iter()
        .flat_map(|z| z.iter())
        .fold(0.0_f64, |m, z| m.max(z.abs()));
    Ok(ActionEstimate {
        value,
        max_abs_z,
        bins_compared: zs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseModel;
    use crate::stochastic::{simulate, ParticleEnsemble, Scheme, SimulationParams, ZeroDrift};

    fn run(particles: usize, steps: usize, nu: f64) -> PathData {
        simulate(
            &NoiseModel::TwoConstantFields { nu },
            &ZeroDrift,
            &ParticleEnsemble::uniform(particles, 11),
            &SimulationParams {
                dt: 0.01,
                steps,
                record_every: 1,
                scheme: Scheme::Heun,
                a: 1.0,
            },
        )
        .unwrap()
    }

    #[test]
    fn bins_are_row_major() {
        assert_eq!(bin_index([0.0, 0.0], 4), 0);
        assert_eq!(bin_index([0.0, 6.0], 4), 3);
        assert_eq!(bin_index([6.0, 0.0], 4), 12);
        assert_eq!(bin_index([TAU - 1e-16, TAU - 1e-16], 4), 15);
    }

    #[test]
    fn empty_bins_are_missing() {
        let p = run(3, 2, 0.1);
        let est = estimate_drift(&p, 0, 1, 16).unwrap();
        assert!(est.cells.iter().all(Option::is_none));
        assert!(estimate_drift(&p, 2, 1, 4).is_err());
    }

    #[test]
    fn action_of_zero_drift() {
        let p = run(200, 200, 0.1);
        let act = action_estimate(&p, &ZeroDrift, 1.0, 2).unwrap();
        assert!((act.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phase_rate_is_a() {
        let p = run(100, 3, 0.1);
        let est = estimate_drift(&p, 1, 2, 2).unwrap();
        assert!((est.phase_rate - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chi_square_of_uniform_start() {
        let p = run(20_000, 0, 0.1);
        let c = occupancy_chi_square(&p.positions[0], 16).unwrap();
        assert_eq!(c.dof, 255);
        assert!(c.p_value > 0.0 && c.p_value <= 1.0);
        let clumped = vec![[0.1, 0.1]; 1000];
        assert!(occupancy_chi_square(&clumped, 16).unwrap().p_value < 1e-12);
    }
}
