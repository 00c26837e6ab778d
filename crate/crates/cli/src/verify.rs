//! Named invariant suites with a pass/fail table.

use std::path::Path;

use clap::ValueEnum;
use qgs_core::algebra::{
    basis_field, damping_multiplier, damping_sum, half_lattice, lie_bracket, roger_cocycle,
    roger_cocycle_quadrature, t_operator, BasisFieldSpec, BasisKind, CocycleParams,
};
use qgs_core::integrability::{check_cohomologous, standard_family, write_report_jsonl, CRITICAL_ALPHA};
use qgs_core::noise::NoiseModel;
use qgs_core::solver::{
    euler_arnold_rhs, extended_state, velocity_of_tendency, vorticity_rhs, SigmaMode, SolverConfig,
};
use qgs_core::spectral::{grad_perp, l2_inner, SpectralField, VelocityField};
use qgs_core::stochastic::{estimate_generator, simulate, ParticleEnsemble, Scheme, SimulationParams, ZeroDrift};

use crate::config::random_stream;
use crate::error::{io_err, CliError, CliResult};
use crate::run::create;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Cocycle,
    Lemma,
    Generator,
    Formulation,
    Integrability,
}

pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value < tol`.
    fn below(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            value,
            tol,
            pass: value < tol,
        }
    }
}

fn velocity(n: usize, band: i64, modes: usize, seed: u64) -> VelocityField {
    grad_perp(&random_stream(n, band, modes, 1.0, seed))
}

fn max_diff(a: &VelocityField, b: &VelocityField) -> f64 {
    let [a1, a2] = a.to_grid();
    let [b1, b2] = b.to_grid();
    a1.iter()
        .zip(&b1)
        .chain(a2.iter().zip(&b2))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn cocycle(seed: u64) -> CliResult<Vec<Check>> {
    let n = 32;
    let p = CocycleParams::new(1.3);
    let (mut adj, mut paths, mut anti, mut ident) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for i in 0..20 {
        let s = seed.wrapping_mul(1000).wrapping_add(3 * i);
        let u = velocity(n, 3, 4, s);
        let v = velocity(n, 3, 4, s + 1);
        let w = velocity(n, 3, 4, s + 2);
        let om = |a: &VelocityField, b: &VelocityField| roger_cocycle(a, b, p);
        adj = adj.max((l2_inner(&t_operator(&u, p), &v)? - om(&u, &v)?).abs());
        paths = paths.max((roger_cocycle_quadrature(&u, &v, p)? - om(&u, &v)?).abs());
        anti = anti.max((om(&u, &v)? + om(&v, &u)?).abs());
        let cyc = om(&lie_bracket(&u, &v)?, &w)? + om(&lie_bracket(&v, &w)?, &u)? + om(&lie_bracket(&w, &u)?, &v)?;
        ident = ident.max(cyc.abs());
    }
    Ok(vec![
        Check::below("<<Tu,v>> = omega(u,v)", adj, 1e-10),
        Check::below("spectral = quadrature cocycle", paths, 1e-10),
        Check::below("antisymmetry", anti, 1e-12),
        Check::below("cocycle identity", ident, 1e-9),
    ])
}

fn lemma() -> CliResult<Vec<Check>> {
    let (n, m, r) = (32, 4, 3.0);
    let p = CocycleParams::new(1.0);
    let field = |kind, k| basis_field(BasisFieldSpec { kind, k, r }, n);
    let (mut ta, mut tb, mut closed, mut d_err) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    let (mut diag, mut nsd) = (0.0_f64, f64::NEG_INFINITY);
    for k in half_lattice(m) {
        let a = field(BasisKind::A, k)?;
        let b = field(BasisKind::B, k)?;
        let c = l2_inner(&t_operator(&a, p), &b)? / l2_inner(&b, &b)?;
        ta = ta.max((&t_operator(&a, p) - &(&b * c)).norm());
        tb = tb.max((&t_operator(&b, p) + &(&a * c)).norm());
        closed = closed.max((c - p.beta * k.k1 as f64 / k.norm_sq()).abs());
        // S(A_k) = omega(A_k, B_k) T B_k = -c omega(A_k, B_k) A_k
        let d = -c * roger_cocycle_quadrature(&a, &b, p)?;
        d_err = d_err.max((d - damping_multiplier(k, m, r, p)).abs());
        for h in [&a, &b] {
            let s = damping_sum(h, m, r, p)?;
            let lam = l2_inner(&s, h)? / l2_inner(h, h)?;
            diag = diag.max((&s - &(h * lam)).norm());
            nsd = nsd.max(lam);
        }
    }
    let mut sym = 0.0_f64;
    for i in 0..10u64 {
        let span = |seed: u64| {
            let mut psi = SpectralField::zeros(n);
            for (j, k) in half_lattice(m).into_iter().enumerate() {
                let x = ((seed * 31 + j as u64) as f64 * 0.618_033_988_749).fract() - 0.5;
                let y = ((seed * 17 + 3 * j as u64) as f64 * 0.414_213_562_373).fract() - 0.5;
                psi.set_coeff(k, num_complex::Complex64::new(x, y)).expect("in band");
            }
            grad_perp(&psi)
        };
        let (u, v) = (span(2 * i + 1), span(2 * i + 2));
        let lhs = l2_inner(&damping_sum(&u, m, r, p)?, &v)?;
        let rhs = l2_inner(&u, &damping_sum(&v, m, r, p)?)?;
        sym = sym.max((lhs - rhs).abs());
    }
    Ok(vec![
        Check::below("T A_k - c B_k", ta, 1e-10),
        Check::below("T B_k + c A_k", tb, 1e-10),
        Check::below("c = beta k1 / |k|^2", closed, 1e-10),
        Check::below("damping sum off-diagonal part", diag, 1e-10),
        Check::below("damping sum asymmetry", sym, 1e-10),
        Check {
            name: "damping sum largest eigenvalue <= 0".into(),
            value: nsd,
            tol: 0.0,
            pass: nsd <= 0.0,
        },
        Check::below("D(k) closed form vs quadrature", d_err, 1e-10),
    ])
}

fn generator(seed: u64) -> CliResult<Vec<Check>> {
    let (n, m, r) = (64, 4, 3.0);
    let model = NoiseModel::KolmogorovBasis { m, r };
    let nu = model.viscosity();
    let mut grid = 0.0_f64;
    for i in 0..5 {
        let f = random_stream(n, 6, 5, 1.0, seed.wrapping_add(i));
        let lhs = model.generator_sum(&f)?.to_grid();
        let rhs = f.laplacian().to_grid();
        for (a, b) in lhs.iter().zip(&rhs) {
            grid = grid.max((a - 2.0 * nu * b).abs());
        }
    }
    let ens = ParticleEnsemble::at_point(100_000, [1.0, 0.5], seed);
    let params = SimulationParams {
        dt: 1e-3,
        steps: 10,
        record_every: 10,
        scheme: Scheme::Heun,
        a: 0.0,
    };
    let paths = simulate(&model, &ZeroDrift, &ens, &params)?;
    let est = estimate_generator(&paths, 0, 1, |x| x[0].cos(), |x| -nu * x[0].cos())?;
    Ok(vec![
        Check::below("sum H.grad(H.grad f) = 2 nu lap f", grid, 1e-10),
        Check::below("Monte Carlo generator |z|", est.z().abs(), 3.0),
    ])
}

fn formulation(seed: u64) -> CliResult<Vec<Check>> {
    let n = 64;
    let mut out = Vec::new();
    for (name, model) in [
        ("basis noise", NoiseModel::KolmogorovBasis { m: 3, r: 3.0 }),
        ("two constant fields", NoiseModel::TwoConstantFields { nu: 0.05 }),
    ] {
        let cfg = SolverConfig {
            n,
            beta: 1.3,
            a: 0.7,
            nu: model.viscosity(),
            sigma_mode: SigmaMode::for_noise(&model),
            ..Default::default()
        };
        let mut worst = 0.0_f64;
        for i in 0..3 {
            let psi = random_stream(n, SpectralField::dealias_cutoff(n), 12, 1.0, seed.wrapping_add(i));
            let a = velocity_of_tendency(&vorticity_rhs(&psi, &cfg)?)?;
            let b = euler_arnold_rhs(&extended_state(&psi, &cfg), Some(&model), &cfg)?;
            worst = worst.max(max_diff(&a, &b.u));
        }
        out.push(Check::below(format!("vorticity vs abstract rhs ({name})"), worst, 1e-8));
    }
    Ok(out)
}

fn integrability(out: Option<&Path>) -> CliResult<Vec<Check>> {
    let reports = check_cohomologous(&standard_family(32), CRITICAL_ALPHA, 0.0);
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let path = dir.join("integrability.jsonl");
        let mut w = create(&path)?;
        write_report_jsonl(&mut w, &reports)?;
        std::io::Write::flush(&mut w).map_err(io_err(&path))?;
    }
    Ok(reports
        .into_iter()
        .map(|r| Check {
            name: format!("int_N = int alpha^gamma: {}", r.gamma_id),
            value: r.abs_diff.unwrap_or(f64::INFINITY),
            tol: 1e-10,
            pass: r.pass,
        })
        .collect())
}

pub fn cmd_verify(suite: Suite, seed: u64, out: Option<&Path>, quiet: bool) -> CliResult<()> {
    let checks = match suite {
        Suite::Cocycle => cocycle(seed)?,
        Suite::Lemma => lemma()?,
        Suite::Generator => generator(seed)?,
        Suite::Formulation => formulation(seed)?,
        Suite::Integrability => integrability(out)?,
    };
    let failed = checks.iter().filter(|c| !c.pass).count();
    if !quiet {
        println!("{:<50} {:>12} {:>10}  result", "check", "value", "tol");
        for c in &checks {
            println!(
                "{:<50} {:>12.3e} {:>10.1e}  {}",
                c.name,
                c.value,
                c.tol,
                if c.pass { "PASS" } else { "FAIL" }
            );
        }
        println!("{} of {} checks passed", checks.len() - failed, checks.len());
    }
    if failed > 0 {
        return Err(CliError::VerifyFailed(failed));
    }
    Ok(())
}
