//! Experiment configuration: a sectioned TOML file. Every key is optional at
//! parse time so that a missing required key can be reported by name; the
//! resolved form has every default filled in and is written next to outputs.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use qgs_core::noise::NoiseModel;
use qgs_core::solver::{SigmaMode, SolverConfig};
use qgs_core::spectral::snapshot::read_snapshot;
use qgs_core::spectral::{SpectralField, WaveIndex};
use qgs_core::stochastic::Scheme;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub grid: Option<Grid>,
    pub time: Option<Time>,
    pub physics: Option<Physics>,
    pub noise: Option<Noise>,
    pub ensemble: Option<Ensemble>,
    pub output: Option<Output>,
    pub init: Option<Init>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub n: Option<usize>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Time {
    pub dt: Option<f64>,
    pub steps: Option<usize>,
    /// Drift-estimation window of `simulate`.
    pub tau: Option<f64>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Physics {
    pub beta: Option<f64>,
    pub a: Option<f64>,
    pub nu: Option<f64>,
    /// `none`, `constant`, `idealized`, `spectral` or `noise`.
    pub sigma_mode: Option<String>,
    pub sigma: Option<f64>,
    pub m: Option<i64>,
    pub r: Option<f64>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Noise {
    /// `kolmogorov` or `two_constant`.
    pub model: Option<String>,
    pub m: Option<i64>,
    pub r: Option<f64>,
    pub nu: Option<f64>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ensemble {
    pub particles: Option<usize>,
    pub seed: Option<u64>,
    /// `heun` or `euler`.
    pub scheme: Option<String>,
    pub record_every: Option<usize>,
    pub bins: Option<usize>,
    /// `zero`, `steady` (the initial field) or `solver` (the solver trajectory).
    pub drift: Option<String>,
    /// Start every particle here instead of uniformly.
    pub start: Option<[f64; 2]>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub dir: Option<PathBuf>,
    /// Steps between snapshots; 0 disables them.
    pub snapshot_every: Option<usize>,
    pub format: Option<String>,
    /// Particles written to the path file (the first ones).
    pub path_particles: Option<usize>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Init {
    /// `rossby`, `random` or `snapshot`.
    pub kind: Option<String>,
    pub k1: Option<i64>,
    pub k2: Option<i64>,
    /// Rossby: stream amplitude; random: peak speed.
    pub amplitude: Option<f64>,
    pub band: Option<i64>,
    pub modes: Option<usize>,
    pub seed: Option<u64>,
    pub path: Option<PathBuf>,
}

fn missing(key: &str) -> CliError {
    CliError::Config(format!("missing key `{key}`"))
}

fn bad(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("`{key}`: {msg}"))
}

impl Config {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    /// Fill in defaults, apply overrides and validate. `stochastic` requires
    /// the noise and ensemble sections.
    pub fn resolve(&self, seed: Option<u64>, out: Option<&Path>, stochastic: bool) -> CliResult<Self> {
        let grid = self.grid.clone().unwrap_or_default();
        let n = grid.n.ok_or_else(|| missing("grid.n"))?;
        if n < 4 || !n.is_multiple_of(2) {
            return Err(bad("grid.n", format!("must be even and >= 4, got {n}")));
        }

        let time = self.time.clone().unwrap_or_default();
        let dt = time.dt.ok_or_else(|| missing("time.dt"))?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(bad("time.dt", "must be > 0"));
        }
        let steps = time.steps.ok_or_else(|| missing("time.steps"))?;

        let noise = match (&self.noise, stochastic) {
            (None, true) => return Err(missing("noise.model")),
            (None, false) => None,
            (Some(s), _) => Some(resolve_noise(s)?),
        };
        let noise_model = noise.as_ref().map(noise_model).transpose()?;

        let ph = self.physics.clone().unwrap_or_default();
        let sigma_mode = ph.sigma_mode.clone().unwrap_or_else(|| "none".into());
        let mut physics = Physics {
            beta: Some(ph.beta.unwrap_or(1.0)),
            a: Some(ph.a.unwrap_or(1.0)),
            // with a noise model the matching viscosity is the natural default
            nu: Some(ph.nu.unwrap_or_else(|| noise_model.map_or(0.0, |m| m.viscosity()))),
            sigma_mode: Some(sigma_mode.clone()),
            sigma: None,
            m: None,
            r: None,
        };
        match sigma_mode.as_str() {
            "none" | "idealized" => {}
            "constant" => physics.sigma = Some(ph.sigma.ok_or_else(|| missing("physics.sigma"))?),
            "spectral" => {
                physics.m = Some(ph.m.unwrap_or(4));
                physics.r = Some(ph.r.unwrap_or(3.0));
            }
            "noise" => {
                if noise_model.is_none() {
                    return Err(bad("physics.sigma_mode", "`noise` needs a [noise] section"));
                }
            }
            other => {
                return Err(bad(
                    "physics.sigma_mode",
                    format!("unknown mode `{other}` (none, constant, idealized, spectral, noise)"),
                ))
            }
        }

        let ensemble = match (&self.ensemble, stochastic) {
            (None, true) => return Err(missing("ensemble.particles")),
            (e, _) => e.as_ref().map(|e| resolve_ensemble(e, seed)).transpose()?,
        };

        let record_dt = ensemble
            .as_ref()
            .map_or(dt, |e| dt * e.record_every.unwrap_or(1) as f64);
        let tau = match time.tau {
            Some(t) => {
                let w = t / record_dt;
                if !(t > 0.0) || (w - w.round()).abs() > 1e-9 * w.max(1.0) {
                    return Err(bad("time.tau", "must be a positive multiple of dt * ensemble.record_every"));
                }
                t
            }
            None => record_dt,
        };

        let o = self.output.clone().unwrap_or_default();
        let format = o.format.clone().unwrap_or_else(|| "csv".into());
        if format != "csv" {
            return Err(bad("output.format", format!("only `csv` is supported, got `{format}`")));
        }
        let output = Output {
            dir: Some(out.map(Path::to_path_buf).or(o.dir).unwrap_or_else(|| "out".into())),
            snapshot_every: Some(o.snapshot_every.unwrap_or(0)),
            format: Some(format),
            path_particles: Some(o.path_particles.unwrap_or(1000)),
        };

        let init = resolve_init(self.init.as_ref(), seed, ensemble.as_ref())?;

        let resolved = Config {
            grid: Some(Grid { n: Some(n) }),
            time: Some(Time {
                dt: Some(dt),
                steps: Some(steps),
                tau: Some(tau),
            }),
            physics: Some(physics),
            noise,
            ensemble,
            output: Some(output),
            init: Some(init),
        };
        resolved.solver_config()?.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(resolved)
    }

    // Accessors below assume a resolved config.

    pub fn n(&self) -> usize {
        self.grid.as_ref().and_then(|g| g.n).expect("resolved")
    }

    pub fn time(&self) -> &Time {
        self.time.as_ref().expect("resolved")
    }

    pub fn output(&self) -> &Output {
        self.output.as_ref().expect("resolved")
    }

    pub fn out_dir(&self) -> &Path {
        self.output().dir.as_deref().expect("resolved")
    }

    pub fn ensemble(&self) -> &Ensemble {
        self.ensemble.as_ref().expect("resolved with ensemble")
    }

    pub fn noise_model(&self) -> CliResult<Option<NoiseModel>> {
        self.noise.as_ref().map(noise_model).transpose()
    }

    pub fn solver_config(&self) -> CliResult<SolverConfig> {
        let ph = self.physics.as_ref().expect("resolved");
        let beta = ph.beta.expect("resolved");
        let sigma_mode = match ph.sigma_mode.as_deref().expect("resolved") {
            "none" => SigmaMode::None,
            "constant" => SigmaMode::Constant(ph.sigma.expect("resolved")),
            "idealized" => SigmaMode::idealized(beta),
            "spectral" => SigmaMode::Spectral {
                m: ph.m.expect("resolved"),
                r: ph.r.expect("resolved"),
            },
            _ => SigmaMode::for_noise(&self.noise_model()?.expect("checked in resolve")),
        };
        Ok(SolverConfig {
            n: self.n(),
            dt: self.time().dt.expect("resolved"),
            steps: self.time().steps.expect("resolved"),
            beta,
            a: ph.a.expect("resolved"),
            nu: ph.nu.expect("resolved"),
            sigma_mode,
            dealias: true,
        })
    }

    pub fn scheme(&self) -> Scheme {
        match self.ensemble().scheme.as_deref() {
            Some("euler") => Scheme::EulerMaruyama,
            _ => Scheme::Heun,
        }
    }

    /// Initial stream function.
    pub fn initial_stream(&self) -> CliResult<SpectralField> {
        let n = self.n();
        let init = self.init.as_ref().expect("resolved");
        match init.kind.as_deref().expect("resolved") {
            "rossby" => {
                let k = WaveIndex::new(init.k1.expect("resolved"), init.k2.expect("resolved"));
                let amp = init.amplitude.expect("resolved");
                let psi = SpectralField::from_fn(n, |a, b| {
                    amp * (k.k1 as f64 * a + k.k2 as f64 * b).cos()
                });
                if psi.max_coeff() == 0.0 || !psi.supports(k) {
                    return Err(bad("init.k1/k2", format!("mode ({}, {}) does not fit n = {n}", k.k1, k.k2)));
                }
                Ok(psi)
            }
            "random" => Ok(random_stream(
                n,
                init.band.expect("resolved"),
                init.modes.expect("resolved"),
                init.amplitude.expect("resolved"),
                init.seed.expect("resolved"),
            )),
            _ => {
                let path = init.path.as_ref().expect("resolved");
                let file = File::open(path)
                    .map_err(|e| bad("init.path", format!("{}: {e}", path.display())))?;
                let snap = read_snapshot(BufReader::new(file))?;
                if snap.field.n() != n {
                    return Err(bad(
                        "init.path",
                        format!("snapshot has n = {}, config has n = {n}", snap.field.n()),
                    ));
                }
                Ok(snap.field.stream().clone())
            }
        }
    }
}

fn resolve_noise(s: &Noise) -> CliResult<Noise> {
    let model = s.model.clone().ok_or_else(|| missing("noise.model"))?;
    let out = match model.as_str() {
        "kolmogorov" => Noise {
            model: Some(model),
            m: Some(s.m.unwrap_or(4)),
            r: Some(s.r.unwrap_or(3.0)),
            nu: None,
        },
        "two_constant" => Noise {
            model: Some(model),
            m: None,
            r: None,
            nu: Some(s.nu.ok_or_else(|| missing("noise.nu"))?),
        },
        other => {
            return Err(bad(
                "noise.model",
                format!("unknown model `{other}` (kolmogorov, two_constant)"),
            ))
        }
    };
    noise_model(&out)?
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(out)
}

fn noise_model(s: &Noise) -> CliResult<NoiseModel> {
    Ok(match s.model.as_deref() {
        Some("kolmogorov") => NoiseModel::KolmogorovBasis {
            m: s.m.unwrap_or(4),
            r: s.r.unwrap_or(3.0),
        },
        Some("two_constant") => NoiseModel::TwoConstantFields {
            nu: s.nu.ok_or_else(|| missing("noise.nu"))?,
        },
        _ => return Err(missing("noise.model")),
    })
}

fn resolve_ensemble(e: &Ensemble, seed: Option<u64>) -> CliResult<Ensemble> {
    let particles = e.particles.ok_or_else(|| missing("ensemble.particles"))?;
    if particles == 0 {
        return Err(bad("ensemble.particles", "must be >= 1"));
    }
    let scheme = e.scheme.clone().unwrap_or_else(|| "heun".into());
    if scheme != "heun" && scheme != "euler" {
        return Err(bad("ensemble.scheme", format!("unknown scheme `{scheme}` (heun, euler)")));
    }
    let drift = e.drift.clone().unwrap_or_else(|| "zero".into());
    if !["zero", "steady", "solver"].contains(&drift.as_str()) {
        return Err(bad("ensemble.drift", format!("unknown drift `{drift}` (zero, steady, solver)")));
    }
    let record_every = e.record_every.unwrap_or(1);
    let bins = e.bins.unwrap_or(4);
    if record_every == 0 {
        return Err(bad("ensemble.record_every", "must be >= 1"));
    }
    if bins == 0 {
        return Err(bad("ensemble.bins", "must be >= 1"));
    }
    Ok(Ensemble {
        particles: Some(particles),
        seed: Some(seed.or(e.seed).unwrap_or(0)),
        scheme: Some(scheme),
        record_every: Some(record_every),
        bins: Some(bins),
        drift: Some(drift),
        start: e.start,
    })
}

fn resolve_init(init: Option<&Init>, seed: Option<u64>, ens: Option<&Ensemble>) -> CliResult<Init> {
    let i = init.cloned().unwrap_or_default();
    let kind = i.kind.clone().unwrap_or_else(|| "rossby".into());
    let empty = Init {
        kind: Some(kind.clone()),
        ..Default::default()
    };
    Ok(match kind.as_str() {
        "rossby" => Init {
            k1: Some(i.k1.unwrap_or(1)),
            k2: Some(i.k2.unwrap_or(2)),
            amplitude: Some(i.amplitude.unwrap_or(1e-3)),
            ..empty
        },
        "random" => {
            let band = i.band.unwrap_or(8);
            let modes = i.modes.unwrap_or(6);
            if band < 1 || modes == 0 {
                return Err(bad("init", "random fields need band >= 1 and modes >= 1"));
            }
            Init {
                amplitude: Some(i.amplitude.unwrap_or(1.0)),
                band: Some(band),
                modes: Some(modes),
                seed: Some(seed.or(i.seed).or(ens.and_then(|e| e.seed)).unwrap_or(0)),
                ..empty
            }
        }
        "snapshot" => Init {
            path: Some(i.path.clone().ok_or_else(|| missing("init.path"))?),
            ..empty
        },
        other => {
            return Err(bad(
                "init.kind",
                format!("unknown kind `{other}` (rossby, random, snapshot)"),
            ))
        }
    })
}

/// Random trigonometric stream function on the half lattice, scaled to the
/// given peak speed.
pub fn random_stream(n: usize, band: i64, modes: usize, peak_speed: f64, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let band = band.min(SpectralField::dealias_cutoff(n)).max(1);
    let mut psi = SpectralField::zeros(n);
    let mut placed = 0;
    while placed < modes {
        let k = WaveIndex::new(rng.gen_range(0..=band), rng.gen_range(-band..=band));
        if !k.in_half_lattice() {
            continue;
        }
        let c = psi.coeff(k)
            + num_complex::Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        psi.set_coeff(k, c).expect("band fits the grid");
        placed += 1;
    }
    let [u1, u2] = qgs_core::spectral::grad_perp(&psi).to_grid();
    let peak = u1.iter().zip(&u2).map(|(a, b)| a.hypot(*b)).fold(0.0, f64::max);
    if peak > 0.0 {
        &psi * (peak_speed / peak)
    } else {
        psi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_n_is_named() {
        let cfg = Config::parse("[time]\ndt = 0.01\nsteps = 3\n").unwrap();
        let err = cfg.resolve(None, None, false).unwrap_err();
        assert!(err.to_string().contains("grid.n"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(Config::parse("[grid]\nn = 16\nm = 3\n").is_err());
        assert!(Config::parse("[grd]\nn = 16\n").is_err());
    }

    #[test]
    fn resolved_config_reproduces_itself() {
        let text = "[grid]\nn = 16\n[time]\ndt = 0.01\nsteps = 3\n[noise]\nmodel = \"kolmogorov\"\n\
                    [ensemble]\nparticles = 10\n[init]\nkind = \"random\"\n";
        let r = Config::parse(text).unwrap().resolve(Some(5), None, true).unwrap();
        let again = Config::parse(&r.to_toml()).unwrap().resolve(None, None, true).unwrap();
        assert_eq!(r, again);
        assert_eq!(r.ensemble().seed, Some(5));
        // matched viscosity default
        let nu = r.physics.as_ref().unwrap().nu.unwrap();
        assert!((nu - qgs_core::algebra::viscosity_coefficient(4, 3.0)).abs() < 1e-15);
    }

    #[test]
    fn zero_particles_rejected() {
        let text = "[grid]\nn = 16\n[time]\ndt = 0.01\nsteps = 3\n[noise]\nmodel = \"two_constant\"\nnu = 0.1\n\
                    [ensemble]\nparticles = 0\n";
        let err = Config::parse(text).unwrap().resolve(None, None, true).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
