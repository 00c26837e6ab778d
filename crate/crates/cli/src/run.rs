use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use qgs_core::solver::{Diagnostics, Solver};
use qgs_core::spectral::grad_perp;
use qgs_core::spectral::snapshot::write_snapshot;

use crate::config::Config;
use crate::error::{io_err, CliResult};

pub fn create(path: &Path) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

/// Create the output directory and write the resolved config into it.
pub fn prepare_output(cfg: &Config) -> CliResult<()> {
    let dir = cfg.out_dir();
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join("config.resolved.toml");
    fs::write(&path, cfg.to_toml()).map_err(io_err(&path))
}

fn diag_row(w: &mut impl Write, t: f64, d: &Diagnostics) -> std::io::Result<()> {
    writeln!(w, "{t},{},{},{}", d.energy, d.enstrophy, d.max_vorticity)
}

pub fn cmd_run(cfg: &Config, quiet: bool) -> CliResult<()> {
    prepare_output(cfg)?;
    let dir = cfg.out_dir();
    let solver_cfg = cfg.solver_config()?;
    let mut solver = Solver::new(solver_cfg.clone(), cfg.initial_stream()?)?;
    let cfl = solver.cfl();
    if cfl > 1.0 {
        eprintln!("warning: initial advective CFL number {cfl:.3} exceeds 1; the run may be unstable");
    }

    let snap_every = cfg.output().snapshot_every.unwrap_or(0);
    let snap_dir = dir.join("snapshots");
    if snap_every > 0 {
        fs::create_dir_all(&snap_dir).map_err(io_err(&snap_dir))?;
    }
    let write_snap = |step: usize, t: f64, psi: &qgs_core::spectral::SpectralField| -> CliResult<()> {
        let path = snap_dir.join(format!("snapshot_{step:06}.txt"));
        let mut w = create(&path)?;
        write_snapshot(&mut w, t, &grad_perp(psi))?;
        w.flush().map_err(io_err(&path))
    };

    let diag_path = dir.join("diagnostics.csv");
    let mut diag = create(&diag_path)?;
    let e = io_err(&diag_path);
    writeln!(diag, "t,energy,enstrophy,max_vorticity").map_err(e)?;
    let s0 = solver.state();
    diag_row(&mut diag, s0.t, &s0.diagnostics).map_err(io_err(&diag_path))?;
    if snap_every > 0 {
        write_snap(0, s0.t, &s0.psi)?;
    }
    let first = s0.diagnostics;

    for step in 1..=solver_cfg.steps {
        let s = match solver.step() {
            Ok(s) => s,
            Err(err) => {
                // keep what was computed before the failure
                diag.flush().map_err(io_err(&diag_path))?;
                return Err(err.into());
            }
        };
        diag_row(&mut diag, s.t, &s.diagnostics).map_err(io_err(&diag_path))?;
        if snap_every > 0 && step % snap_every == 0 {
            write_snap(step, s.t, &s.psi)?;
        }
    }
    diag.flush().map_err(io_err(&diag_path))?;

    if !quiet {
        let last = solver.state();
        println!(
            "run: n = {}, {} steps to t = {}; energy {:.12e} -> {:.12e}, enstrophy {:.12e} -> {:.12e}",
            solver_cfg.n,
            solver_cfg.steps,
            last.t,
            first.energy,
            last.diagnostics.energy,
            first.enstrophy,
            last.diagnostics.enstrophy
        );
        println!("outputs in {}", dir.display());
    }
    Ok(())
}
