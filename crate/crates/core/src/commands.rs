//! Command implementations behind the CLI. Each command builds all of its
//! artifacts in memory and only then writes them, so a failure leaves the
//! output directory untouched.

use std::fmt;
use std::path::{Path, PathBuf};

use crate::algebra::{spectral_decomposition, AlgebraicObservable, AlgebraicState};
use crate::borel::RealSet;
use crate::config::{ObservableSpec, RunConfig, StateSpec};
use crate::ensemble::{enumerate_shells, EnumerationOptions, PhaseSpace};
use crate::error::{Error, Result};
use crate::lattice::{LatticeGeometry, ModelSpec, Subvolume, SubvolumePoset};
use crate::measurement::{probability_law, records_csv, sample_measurement};
use crate::rational::format_rational;
use crate::report::{render_report, verify_suite};
use crate::texture::QuantityTemplate;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Shells,
    Gamma,
    Law,
    Spectral,
    Sample,
    Verify,
    Stability,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Shells => "shells",
            Command::Gamma => "gamma",
            Command::Law => "law",
            Command::Spectral => "spectral",
            Command::Sample => "sample",
            Command::Verify => "verify",
            Command::Stability => "stability",
        })
    }
}

/// Files written and the number of asserted checks that failed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub failures: usize,
}

pub fn enumerate(config: &RunConfig) -> Result<PhaseSpace> {
    enumerate_shells(
        &config.model,
        &EnumerationOptions { cap: config.run.cap, workers: config.run.workers, ..Default::default() },
    )
}

/// `shell_id,E,n,value`
pub fn vector_csv(phase: &PhaseSpace, values: &[f64]) -> String {
    let mut out = String::from("shell_id,E,n,value\n");
    for (s, v) in phase.shells().iter().zip(values) {
        out.push_str(&format!("{},{},{},{v}\n", s.id(), format_rational(&s.energy()), format_rational(&s.number())));
    }
    out
}

pub fn run(command: Command, config: &RunConfig, out: &Path) -> Result<Outcome> {
    // Names a command depends on are resolved before enumerating.
    let observable = match command {
        Command::Gamma | Command::Law | Command::Spectral | Command::Sample | Command::Stability => {
            let name = config.selected_observable(&command.to_string())?;
            config.observable_spec(name)?;
            Some(name)
        }
        _ => None,
    };
    let state = match command {
        Command::Law | Command::Sample => Some(config.selected_state(&command.to_string())?),
        _ => None,
    };

    let phase = enumerate(config)?;
    let mut artifacts: Vec<(String, String)> = Vec::new();
    let mut failures = 0;
    match command {
        Command::Shells => artifacts.push(("shells.csv".into(), phase.census_csv())),
        Command::Gamma => {
            let name = observable.unwrap_or_default();
            let f = config.algebraic_observable(&phase, name)?;
            artifacts.push((format!("gamma_{name}.csv"), vector_csv(&phase, f.values())));
        }
        Command::Law => {
            let f = config.algebraic_observable(&phase, observable.unwrap_or_default())?;
            let sigma = config.algebraic_state(&phase, state.unwrap_or_default())?;
            let default = [("R".to_string(), RealSet::all())];
            let sets = if config.run.sets.is_empty() { &default[..] } else { &config.run.sets[..] };
            let mut csv = String::from("set,probability\n");
            for (text, set) in sets {
                csv.push_str(&format!("\"{text}\",{}\n", probability_law(&sigma, &f, set)?));
            }
            artifacts.push(("law.csv".into(), csv));
        }
        Command::Spectral => {
            let name = observable.unwrap_or_default();
            let f = config.algebraic_observable(&phase, name)?;
            artifacts.push((format!("spectral_{name}.csv"), spectral_decomposition(&f).to_csv()));
        }
        Command::Sample => {
            let (obs, st) = (observable.unwrap_or_default(), state.unwrap_or_default());
            let f = config.algebraic_observable(&phase, obs)?;
            let sigma = config.algebraic_state(&phase, st)?;
            let record = sample_measurement(&sigma, &f, config.run.seed, config.run.samples, st, obs)?;
            artifacts.push(("sample.csv".into(), record.to_csv()));
            artifacts.push(("sample_law.csv".into(), record.law_csv(&sigma, &f)?));
        }
        Command::Verify => {
            let records = verify_suite(config, &phase)?;
            failures = records.iter().filter(|r| r.is_failure()).count();
            artifacts.push(("report.txt".into(), render_report(&records)));
            artifacts.push(("report.csv".into(), records_csv(&records)));
        }
        Command::Stability => {
            let name = observable.unwrap_or_default();
            artifacts.push(("stability.csv".into(), stability_csv(config, &phase, name)?));
        }
    }

    std::fs::create_dir_all(out).map_err(|e| Error::Invalid(format!("cannot create {}: {e}", out.display())))?;
    let mut files = Vec::new();
    for (file, body) in artifacts {
        let path = out.join(file);
        std::fs::write(&path, body).map_err(|e| Error::Invalid(format!("cannot write {}: {e}", path.display())))?;
        files.push(path);
    }
    Ok(Outcome { files, failures })
}

/// The same run on a lattice two sites longer along every axis. Sites keep
/// their coordinates.
pub fn enlarged(config: &RunConfig, by: usize) -> Result<RunConfig> {
    let old = config.model.geometry();
    let lengths: Vec<usize> = old.lengths().iter().map(|l| l + by).collect();
    let geometry = LatticeGeometry::new(old.dimension(), &lengths, config.run.cap)?;
    let map = |site: usize| geometry.site_at(&old.coordinates(site));
    let model = ModelSpec::new(
        geometry.clone(),
        config.model.spins().to_vec(),
        config.model.coupling(),
        config.model.field(),
        config.model.decoupled().iter().map(|&s| map(s)),
    )?;
    let systems = config
        .systems
        .systems()
        .iter()
        .map(|s| Subvolume::new(s.name(), s.sites().iter().map(|&i| map(i)), model.volume()))
        .collect::<Result<Vec<_>>>()?;
    let observables = config
        .observables
        .iter()
        .map(|(name, spec)| {
            let spec = match spec {
                ObservableSpec::Local { template: QuantityTemplate::SpinAt(i), system } => {
                    ObservableSpec::Local { template: QuantityTemplate::SpinAt(map(*i)), system: system.clone() }
                }
                other => other.clone(),
            };
            (name.clone(), spec)
        })
        .collect();
    Ok(RunConfig {
        model,
        systems: SubvolumePoset::new(systems)?,
        observables,
        states: config.states.clone(),
        run: config.run.clone(),
    })
}

/// `quantity,value_L,value_L2,delta`
fn stability_csv(config: &RunConfig, phase: &PhaseSpace, name: &str) -> Result<String> {
    let bigger = enlarged(config, 2)?;
    let phase2 = enumerate(&bigger)?;
    let mut rows: Vec<(String, f64, f64)> = vec![
        ("shell_count".into(), phase.len() as f64, phase2.len() as f64),
        ("configurations".into(), phase.total_configurations() as f64, phase2.total_configurations() as f64),
    ];
    let f = config.algebraic_observable(phase, name)?;
    let f2 = bigger.algebraic_observable(&phase2, name)?;
    let mean = |f: &AlgebraicObservable, s: &AlgebraicState| s.expectation(f);
    rows.push((
        format!("mean_{name}_uniform"),
        mean(&f, &AlgebraicState::configuration_uniform(phase))?,
        mean(&f2, &AlgebraicState::configuration_uniform(&phase2))?,
    ));
    // Gibbs parameters carry over between sizes; shell labels do not.
    for (state, spec) in &config.states {
        if let StateSpec::Gibbs { .. } = spec {
            rows.push((
                format!("mean_{name}_{state}"),
                mean(&f, &config.algebraic_state(phase, state)?)?,
                mean(&f2, &bigger.algebraic_state(&phase2, state)?)?,
            ));
        }
    }
    let mut out = String::from("quantity,value_L,value_L2,delta\n");
    for (q, a, b) in rows {
        out.push_str(&format!("{q},{a},{b},{}\n", b - a));
    }
    Ok(out)
}
