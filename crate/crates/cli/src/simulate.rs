use std::io::Write;

use qgs_core::solver::Solver;
use qgs_core::spectral::grad_perp;
use qgs_core::stochastic::output::{write_drift_csv, write_moments_csv, write_paths_csv};
use qgs_core::stochastic::{
    binned_reference, displacement_moments, estimate_drift, occupancy_chi_square, simulate, Drift,
    ParticleEnsemble, PathData, SampledDrift, SimulationParams, SteadyDrift, ZeroDrift,
};
use serde::Serialize;

use crate::config::Config;
use crate::error::{io_err, CliError, CliResult};
use crate::run::{create, prepare_output};

#[derive(Serialize)]
struct Report {
    noise: String,
    viscosity: f64,
    drift: String,
    particles: usize,
    seed: u64,
    eps: f64,
    bins: usize,
    bins_compared: usize,
    max_abs_z: f64,
    within_3_sigma: bool,
    phase_rate: f64,
    phase_rate_expected: f64,
    t_final: f64,
    variance: [f64; 2],
    /// `2 nu t`, the variance of the pure-noise flow.
    variance_brownian: f64,
    variance_rel_err: [f64; 2],
    occupancy_chi_square: f64,
    occupancy_p_value: f64,
}

fn first_particles(paths: &PathData, count: usize) -> PathData {
    let cut = |v: &Vec<Vec<[f64; 2]>>| v.iter().map(|r| r[..count.min(r.len())].to_vec()).collect();
    PathData {
        times: paths.times.clone(),
        positions: cut(&paths.positions),
        displacements: cut(&paths.displacements),
        phases: paths
            .phases
            .iter()
            .map(|r| r[..count.min(r.len())].to_vec())
            .collect(),
    }
}

pub fn cmd_simulate(cfg: &Config, quiet: bool) -> CliResult<()> {
    prepare_output(cfg)?;
    let dir = cfg.out_dir();
    let model = cfg.noise_model()?.expect("resolved with noise");
    let ens_cfg = cfg.ensemble();
    let particles = ens_cfg.particles.expect("resolved");
    let seed = ens_cfg.seed.expect("resolved");
    let record_every = ens_cfg.record_every.expect("resolved");
    let bins = ens_cfg.bins.expect("resolved");
    let solver_cfg = cfg.solver_config()?;
    let time = cfg.time();
    let params = SimulationParams {
        dt: solver_cfg.dt,
        steps: solver_cfg.steps,
        record_every,
        scheme: cfg.scheme(),
        a: solver_cfg.a,
    };
    let window = (time.tau.expect("resolved") / (params.dt * record_every as f64)).round() as usize;
    if params.steps / record_every < window {
        return Err(CliError::Config(format!(
            "`time.tau` spans {window} records but only {} are simulated",
            params.steps / record_every
        )));
    }

    let drift_kind = ens_cfg.drift.clone().expect("resolved");
    let drift: Box<dyn Drift> = match drift_kind.as_str() {
        "zero" => Box::new(ZeroDrift),
        "steady" => Box::new(SteadyDrift::new(grad_perp(&cfg.initial_stream()?))),
        _ => {
            let mut solver = Solver::new(solver_cfg.clone(), cfg.initial_stream()?)?;
            let mut frames = vec![(0.0, solver.state().velocity())];
            for _ in 0..solver_cfg.steps {
                let s = solver.step()?;
                frames.push((s.t, s.velocity()));
            }
            Box::new(SampledDrift::new(frames)?)
        }
    };

    let ensemble = match ens_cfg.start {
        Some(x) => ParticleEnsemble::at_point(particles, x, seed),
        None => ParticleEnsemble::uniform(particles, seed),
    };
    let paths = simulate(&model, drift.as_ref(), &ensemble, &params)?;

    let est = estimate_drift(&paths, 0, window, bins)?;
    let reference = binned_reference(&paths.positions[0], drift.as_ref(), 0.0, bins);
    let zs: Vec<f64> = est
        .z_scores(&reference)
        .into_iter()
        .flatten()
        .flat_map(|z| z.into_iter())
        .collect();
    let max_abs_z = zs.iter().fold(0.0_f64, |m, z| m.max(z.abs()));

    let path = dir.join("drift.csv");
    let mut w = create(&path)?;
    write_drift_csv(&mut w, &est, Some(&reference))?;
    w.flush().map_err(io_err(&path))?;

    let moments = displacement_moments(&paths);
    let path = dir.join("moments.csv");
    let mut w = create(&path)?;
    write_moments_csv(&mut w, &moments)?;
    w.flush().map_err(io_err(&path))?;

    let keep = cfg.output().path_particles.expect("resolved");
    let path = dir.join("paths.csv");
    let mut w = create(&path)?;
    write_paths_csv(&mut w, &first_particles(&paths, keep))?;
    w.flush().map_err(io_err(&path))?;

    let last = moments.last().expect("initial record always stored");
    let nu = model.viscosity();
    let brownian = 2.0 * nu * last.t;
    let rel = |v: f64| if brownian > 0.0 { (v - brownian).abs() / brownian } else { f64::NAN };
    let chi = occupancy_chi_square(paths.positions.last().expect("records"), bins.max(2))?;
    let report = Report {
        noise: format!("{model:?}"),
        viscosity: nu,
        drift: drift_kind,
        particles,
        seed,
        eps: est.eps,
        bins,
        bins_compared: zs.len(),
        max_abs_z,
        within_3_sigma: max_abs_z < 3.0,
        phase_rate: est.phase_rate,
        phase_rate_expected: params.a,
        t_final: last.t,
        variance: last.var,
        variance_brownian: brownian,
        variance_rel_err: [rel(last.var[0]), rel(last.var[1])],
        occupancy_chi_square: chi.statistic,
        occupancy_p_value: chi.p_value,
    };
    let path = dir.join("report.json");
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    std::fs::write(&path, json + "\n").map_err(io_err(&path))?;

    if !quiet {
        println!(
            "simulate: {particles} particles, {} steps, eps = {}; drift max |z| = {max_abs_z:.3} over {} comparisons; phase rate {} (a = {})",
            params.steps,
            est.eps,
            zs.len(),
            est.phase_rate,
            params.a
        );
        println!(
            "displacement variance at t = {}: [{:.6}, {:.6}] vs 2 nu t = {brownian:.6}",
            last.t, last.var[0], last.var[1]
        );
        println!("outputs in {}", dir.display());
    }
    Ok(())
}
