use qgs_core::noise::NoiseModel;
use qgs_core::spectral::{l2_inner, SpectralField, VelocityField};
use qgs_core::stochastic::output::{write_drift_csv, write_paths_csv};
use qgs_core::stochastic::{
    action_estimate, binned_reference, displacement_moments, estimate_drift, occupancy_chi_square,
    simulate, ParticleEnsemble, PathData, Scheme, SimulationParams, SteadyDrift, ZeroDrift,
};

fn params(dt: f64, steps: usize, record_every: usize, scheme: Scheme) -> SimulationParams {
    SimulationParams {
        dt,
        steps,
        record_every,
        scheme,
        a: 0.0,
    }
}

// With no drift every per-bin z-score is a standardized mean of noise
// increments, so pooled over seeds they should look standard normal.
#[test]
fn drift_z_scores_are_calibrated() {
    let model = NoiseModel::KolmogorovBasis { m: 1, r: 3.0 };
    let p = params(1e-3, 10, 10, Scheme::Heun);
    let mut zs = Vec::new();
    for seed in 0..10 {
        let ens = ParticleEnsemble::uniform(20_000, 1000 + seed);
        let paths = simulate(&model, &ZeroDrift, &ens, &p).unwrap();
        let est = estimate_drift(&paths, 0, 1, 4).unwrap();
        let reference = binned_reference(&paths.positions[0], &ZeroDrift, 0.0, 4);
        zs.extend(est.z_scores(&reference).into_iter().flat_map(|z| z.unwrap()));
    }
    let n = zs.len() as f64;
    let mean = zs.iter().sum::<f64>() / n;
    let var = zs.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!(mean.abs() < 0.2, "mean {mean}");
    assert!((var - 1.0).abs() < 0.25, "variance {var}");
}

#[test]
fn brownian_variance_is_two_nu_t() {
    let nu = 0.3;
    let model = NoiseModel::TwoConstantFields { nu };
    let ens = ParticleEnsemble::at_point(10_000, [1.0, 2.0], 5);
    let paths = simulate(&model, &ZeroDrift, &ens, &params(1e-2, 50, 10, Scheme::Heun)).unwrap();
    let m = displacement_moments(&paths);
    let last = m.last().unwrap();
    assert!((last.t - 0.5).abs() < 1e-12);
    for j in 0..2 {
        let expect = 2.0 * nu * last.t;
        assert!((last.var[j] / expect - 1.0).abs() < 0.05, "var {:?}", last.var);
        assert!(last.mean[j].abs() < 3.0 * (expect / 1e4).sqrt());
    }
}

#[test]
fn heun_and_euler_agree_for_additive_noise() {
    let model = NoiseModel::TwoConstantFields { nu: 0.2 };
    let ens = ParticleEnsemble::uniform(500, 9);
    let a = simulate(&model, &ZeroDrift, &ens, &params(1e-2, 20, 5, Scheme::Heun)).unwrap();
    let b = simulate(&model, &ZeroDrift, &ens, &params(1e-2, 20, 5, Scheme::EulerMaruyama)).unwrap();
    for (x, y) in a.displacements.iter().flatten().zip(b.displacements.iter().flatten()) {
        assert!((x[0] - y[0]).abs() < 1e-14 && (x[1] - y[1]).abs() < 1e-14);
    }
}

#[test]
fn noiseless_shear_flow_matches_ode() {
    // u = (sin theta2, 0): theta2 is frozen and theta1 moves at a constant rate
    let psi = SpectralField::from_fn(16, |_, b| b.cos());
    let drift = SteadyDrift::new(VelocityField::new(psi, [0.25, 0.0]));
    let model = NoiseModel::TwoConstantFields { nu: 0.0 };
    let ens = ParticleEnsemble::uniform(200, 3);
    let paths = simulate(&model, &drift, &ens, &params(1e-2, 100, 100, Scheme::Heun)).unwrap();
    let t = paths.times[1];
    for (p, x0) in ens.positions.iter().enumerate() {
        let d = paths.displacements[1][p];
        assert!((d[0] - (x0[1].sin() + 0.25) * t).abs() < 1e-12);
        assert_eq!(d[1], 0.0);
    }
}

fn csv(paths: &PathData) -> Vec<u8> {
    let mut buf = Vec::new();
    write_paths_csv(&mut buf, paths).unwrap();
    let est = estimate_drift(paths, 0, 1, 3).unwrap();
    write_drift_csv(&mut buf, &est, None).unwrap();
    buf
}

#[test]
fn output_is_independent_of_thread_count() {
    let model = NoiseModel::KolmogorovBasis { m: 2, r: 2.0 };
    let drift = SteadyDrift::new(VelocityField::new(
        SpectralField::from_fn(16, |a, b| (a + b).sin()),
        [0.0; 2],
    ));
    let ens = ParticleEnsemble::uniform(300, 17);
    let p = params(1e-3, 20, 10, Scheme::Heun);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| csv(&simulate(&model, &drift, &ens, &p).unwrap()))
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(1));
    let other = csv(&simulate(&model, &drift, &ParticleEnsemble::uniform(300, 18), &p).unwrap());
    assert_ne!(one, other);
}

#[test]
fn incompressible_flow_keeps_occupancy_uniform() {
    let model = NoiseModel::KolmogorovBasis { m: 2, r: 3.0 };
    let drift = SteadyDrift::new(VelocityField::new(
        SpectralField::from_fn(16, |a, b| a.cos() * b.cos()),
        [0.0; 2],
    ));
    let ens = ParticleEnsemble::uniform(20_000, 23);
    let before = occupancy_chi_square(&ens.positions, 5).unwrap();
    assert!(before.p_value > 1e-3, "{before:?}");
    let paths = simulate(&model, &drift, &ens, &params(1e-2, 50, 50, Scheme::Heun)).unwrap();
    let after = occupancy_chi_square(&paths.positions[1], 5).unwrap();
    assert!(after.p_value > 1e-3, "{after:?}");
    assert_eq!(after.dof, 24);
}

#[test]
fn action_of_steady_drift() {
    let u = VelocityField::new(SpectralField::from_fn(16, |a, _| 0.3 * a.sin()), [0.1, 0.0]);
    let drift = SteadyDrift::new(u.clone());
    let model = NoiseModel::TwoConstantFields { nu: 0.05 };
    let ens = ParticleEnsemble::uniform(20_000, 29);
    let a = 0.4;
    let p = SimulationParams {
        a,
        ..params(1e-3, 30, 1, Scheme::Heun)
    };
    let paths = simulate(&model, &drift, &ens, &p).unwrap();
    let est = action_estimate(&paths, &drift, a, 3).unwrap();
    let expect = 0.5 * (l2_inner(&u, &u).unwrap() + a * a) * 0.03;
    assert!((est.value - expect).abs() < 1e-12 * expect);
    assert_eq!(est.bins_compared, 9);
    assert!(est.max_abs_z.is_finite());
}
