//! TOML run configuration. Everything is resolved and validated before any
//! command does work.
//!
//! ```toml
//! [model]
//! lengths = [4]            # dimension defaults to the number of lengths
//! kind = "ising"           # or "lattice_gas", or give `spins = ["-1", "1"]`
//! coupling = 1             # "p/q" strings and decimals are read exactly
//! field = "1/2"
//! decoupled = [0]
//!
//! [systems]
//! a = [0]
//! b = [0, 1]
//!
//! [observables.e]
//! template = "energy_density"
//!
//! [observables.s1]
//! template = "spin_at"
//! site = 1
//! system = "a"
//!
//! [states.hot]
//! kind = "gibbs"
//! beta = 0
//! lambda_n = 0
//!
//! [run]
//! seed = 7
//! samples = 1000
//! observable = "e"
//! state = "hot"
//! sets = ["{0}", "(-inf,-0.5]"]
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::algebra::{gibbs_state, AlgebraicObservable, AlgebraicState};
use crate::borel::RealSet;
use crate::ensemble::PhaseSpace;
use crate::error::{Error, Result};
use crate::lattice::{LatticeGeometry, ModelSpec, Subvolume, SubvolumePoset, DEFAULT_ENUMERATION_CAP};
use crate::rational::{format_rational, parse_rational, to_f64, Rational};
use crate::texture::{ExteriorObservable, MorphismStrategy, QuantityTemplate, Reference};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Number {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Number {
    fn exact(&self, field: &str) -> Result<Rational> {
        let text = match self {
            Number::Int(v) => return Ok(Rational::from_integer(*v)),
            Number::Float(v) if !v.is_finite() => {
                return Err(Error::Configuration(format!("{field}: {v} is not finite")))
            }
            // Shortest round-trip decimal, read back exactly.
            Number::Float(v) => format!("{v:e}"),
            Number::Text(t) => t.clone(),
        };
        parse_rational(&text).map_err(|e| Error::Configuration(format!("{field}: {e}")))
    }

    fn real(&self, field: &str) -> Result<f64> {
        match self {
            Number::Float(v) if v.is_finite() => Ok(*v),
            _ => self.exact(field).map(|r| to_f64(&r)),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: RawModel,
    #[serde(default)]
    systems: BTreeMap<String, Vec<usize>>,
    #[serde(default)]
    observables: BTreeMap<String, RawObservable>,
    #[serde(default)]
    states: BTreeMap<String, RawState>,
    #[serde(default)]
    run: RawRun,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    dimension: Option<usize>,
    lengths: Vec<usize>,
    kind: Option<String>,
    spins: Option<Vec<Number>>,
    coupling: Number,
    #[serde(default = "zero")]
    field: Number,
    #[serde(default)]
    decoupled: Vec<usize>,
}

fn zero() -> Number {
    Number::Int(0)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObservable {
    template: String,
    system: Option<String>,
    site: Option<usize>,
    value: Option<Number>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawState {
    Microcanonical {
        energy: Number,
        number: Number,
    },
    Gibbs {
        beta: Number,
        #[serde(default = "zero")]
        lambda_n: Number,
    },
    Explicit {
        weights: Vec<RawWeight>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeight {
    energy: Number,
    number: Number,
    weight: Number,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    seed: Option<u64>,
    samples: Option<usize>,
    cap: Option<u64>,
    workers: Option<usize>,
    observable: Option<String>,
    state: Option<String>,
    #[serde(default)]
    sets: Vec<String>,
    strategy: Option<String>,
}

/// Command-line values that take precedence over the `[run]` block.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub cap: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ObservableSpec {
    /// A local observable on a named system.
    Local {
        template: QuantityTemplate,
        system: String,
    },
    EnergyDensity,
    NumberDensity,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Microcanonical {
        energy: Rational,
        number: Rational,
    },
    Gibbs {
        beta: f64,
        lambda_n: f64,
    },
    /// `(E, n, weight)` per listed shell; unlisted shells get zero.
    Explicit(Vec<(Rational, Rational, f64)>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyChoice {
    Identity,
    ConditionalExpectation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub seed: u64,
    pub samples: usize,
    pub cap: u64,
    pub workers: usize,
    pub observable: Option<String>,
    pub state: Option<String>,
    pub sets: Vec<(String, RealSet)>,
    pub strategy: StrategyChoice,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub systems: SubvolumePoset,
    pub observables: BTreeMap<String, ObservableSpec>,
    pub states: BTreeMap<String, StateSpec>,
    pub run: RunSettings,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Configuration(msg.into())
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, overrides)
    }

    pub fn parse(text: &str, overrides: &Overrides) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| config_err(e.to_string().trim_end().to_string()))?;
        let run_cap = overrides.cap.or(raw.run.cap).unwrap_or(DEFAULT_ENUMERATION_CAP);
        let model = resolve_model(&raw.model, run_cap)?;
        let volume = model.volume();

        let systems = raw
            .systems
            .iter()
            .map(|(name, sites)| {
                if let Some(&bad) = sites.iter().find(|&&s| s >= volume) {
                    return Err(config_err(format!("system `{name}`: site {bad} outside [0, {volume})")));
                }
                Subvolume::new(name.clone(), sites.iter().copied(), volume)
            })
            .collect::<Result<Vec<_>>>()?;
        let systems = SubvolumePoset::new(systems)?;

        let observables = raw
            .observables
            .iter()
            .map(|(name, o)| Ok((name.clone(), resolve_observable(name, o, &systems, volume)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;

        let states = raw
            .states
            .iter()
            .map(|(name, s)| Ok((name.clone(), resolve_state(name, s)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;

        let r = &raw.run;
        for (what, name, known) in [
            ("observable", &r.observable, observables.contains_key(r.observable.as_deref().unwrap_or(""))),
            ("state", &r.state, states.contains_key(r.state.as_deref().unwrap_or(""))),
        ] {
            if let Some(name) = name {
                if !known {
                    return Err(config_err(format!("run: unknown {what} `{name}`")));
                }
            }
        }
        let sets = r
            .sets
            .iter()
            .map(|s| Ok((s.clone(), RealSet::parse(s).map_err(|e| config_err(format!("run.sets: {e}")))?)))
            .collect::<Result<Vec<_>>>()?;
        let strategy = match r.strategy.as_deref() {
            None | Some("identity") => StrategyChoice::Identity,
            Some("conditional_expectation") => StrategyChoice::ConditionalExpectation,
            Some(other) => return Err(config_err(format!("run: unknown strategy `{other}`"))),
        };
        let workers = overrides.workers.or(r.workers).unwrap_or(1);
        if workers == 0 {
            return Err(config_err("run: workers must be at least 1"));
        }
        let samples = r.samples.unwrap_or(1000);
        if samples == 0 {
            return Err(config_err("run: samples must be at least 1"));
        }
        let run = RunSettings {
            seed: overrides.seed.or(r.seed).unwrap_or(0),
            samples,
            cap: run_cap,
            workers,
            observable: r.observable.clone(),
            state: r.state.clone(),
            sets,
            strategy,
        };
        Ok(Self { model, systems, observables, states, run })
    }

    pub fn observable_spec(&self, name: &str) -> Result<&ObservableSpec> {
        self.observables.get(name).ok_or_else(|| config_err(format!("unknown observable `{name}`")))
    }

    pub fn state_spec(&self, name: &str) -> Result<&StateSpec> {
        self.states.get(name).ok_or_else(|| config_err(format!("unknown state `{name}`")))
    }

    /// `[run] observable`, or an error naming the command that needs it.
    pub fn selected_observable(&self, command: &str) -> Result<&str> {
        self.run.observable.as_deref().ok_or_else(|| config_err(format!("`{command}` needs run.observable")))
    }

    pub fn selected_state(&self, command: &str) -> Result<&str> {
        self.run.state.as_deref().ok_or_else(|| config_err(format!("`{command}` needs run.state")))
    }

    pub fn system(&self, name: &str) -> Result<&Subvolume> {
        self.systems.get(name).ok_or_else(|| config_err(format!("unknown system `{name}`")))
    }

    /// The local observable `f^t` behind a named observable.
    pub fn local_observable(&self, name: &str) -> Result<ExteriorObservable> {
        match self.observable_spec(name)? {
            ObservableSpec::Local { template, system } => {
                Ok(template.realize(&self.model, self.system(system)?)?.renamed(name))
            }
            _ => Err(config_err(format!("observable `{name}` is not a local observable"))),
        }
    }

    /// The algebraic observable on `X` behind a named observable.
    pub fn algebraic_observable(&self, phase: &PhaseSpace, name: &str) -> Result<AlgebraicObservable> {
        match self.observable_spec(name)? {
            ObservableSpec::EnergyDensity => Ok(phase.energy_density()),
            ObservableSpec::NumberDensity => Ok(phase.number_density()),
            ObservableSpec::Local { .. } => Ok(phase.gamma(&self.local_observable(name)?)),
        }
    }

    pub fn algebraic_state(&self, phase: &PhaseSpace, name: &str) -> Result<AlgebraicState> {
        let label = |e: &Rational, n: &Rational| format!("({}, {})", format_rational(e), format_rational(n));
        match self.state_spec(name)? {
            StateSpec::Microcanonical { energy, number } => {
                let x = phase
                    .find(*energy, *number)
                    .ok_or_else(|| config_err(format!("state `{name}`: no shell {}", label(energy, number))))?;
                Ok(AlgebraicState::point_mass(phase.len(), x))
            }
            StateSpec::Gibbs { beta, lambda_n } => gibbs_state(phase, *beta, *lambda_n),
            StateSpec::Explicit(entries) => {
                let mut weights = vec![0.0; phase.len()];
                for (e, n, w) in entries {
                    let x = phase
                        .find(*e, *n)
                        .ok_or_else(|| config_err(format!("state `{name}`: no shell {}", label(e, n))))?;
                    weights[x] += w;
                }
                AlgebraicState::new(weights).map_err(|e| config_err(format!("state `{name}`: {e}")))
            }
        }
    }

    pub fn strategy(&self) -> MorphismStrategy {
        match self.run.strategy {
            StrategyChoice::Identity => MorphismStrategy::IdentityEmbedding,
            StrategyChoice::ConditionalExpectation => {
                MorphismStrategy::ConditionalExpectation(Reference::uniform(&self.model))
            }
        }
    }

    /// Local templates named in `[observables]`, in name order, deduplicated.
    pub fn templates(&self) -> Vec<QuantityTemplate> {
        let mut out: Vec<QuantityTemplate> = Vec::new();
        for spec in self.observables.values() {
            if let ObservableSpec::Local { template, .. } = spec {
                if !out.contains(template) {
                    out.push(template.clone());
                }
            }
        }
        out
    }
}

fn resolve_model(raw: &RawModel, cap: u64) -> Result<ModelSpec> {
    let dimension = raw.dimension.unwrap_or(raw.lengths.len());
    let geometry = LatticeGeometry::new(dimension, &raw.lengths, cap)?;
    let coupling = raw.coupling.exact("model.coupling")?;
    let field = raw.field.exact("model.field")?;
    let model = match (&raw.spins, raw.kind.as_deref()) {
        (Some(_), Some(_)) => return Err(config_err("model: give either `kind` or `spins`, not both")),
        (Some(spins), None) => {
            let spins = spins
                .iter()
                .enumerate()
                .map(|(i, s)| s.exact(&format!("model.spins[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            ModelSpec::new(geometry, spins, coupling, field, [])?
        }
        (None, None | Some("ising")) => ModelSpec::ising(geometry, coupling, field)?,
        (None, Some("lattice_gas")) => ModelSpec::lattice_gas(geometry, coupling, field)?,
        (None, Some(other)) => return Err(config_err(format!("model: unknown kind `{other}`"))),
    };
    let volume = model.volume();
    if let Some(&bad) = raw.decoupled.iter().find(|&&s| s >= volume) {
        return Err(config_err(format!("model.decoupled: site {bad} outside [0, {volume})")));
    }
    model.with_decoupled(raw.decoupled.iter().copied())
}

fn resolve_observable(
    name: &str,
    raw: &RawObservable,
    systems: &SubvolumePoset,
    volume: usize,
) -> Result<ObservableSpec> {
    let ctx = |msg: String| config_err(format!("observable `{name}`: {msg}"));
    let template = match raw.template.as_str() {
        "energy_density" | "number_density" => {
            if raw.system.is_some() || raw.site.is_some() || raw.value.is_some() {
                return Err(ctx(format!("`{}` takes no parameters", raw.template)));
            }
            return Ok(if raw.template == "energy_density" {
                ObservableSpec::EnergyDensity
            } else {
                ObservableSpec::NumberDensity
            });
        }
        "constant" => {
            let value = raw.value.as_ref().ok_or_else(|| ctx("`constant` needs `value`".into()))?;
            QuantityTemplate::Constant(value.real(&format!("observables.{name}.value"))?)
        }
        "spin_at" => {
            let site = raw.site.ok_or_else(|| ctx("`spin_at` needs `site`".into()))?;
            if site >= volume {
                return Err(ctx(format!("site {site} outside [0, {volume})")));
            }
            QuantityTemplate::SpinAt(site)
        }
        "mean_exterior_spin" => QuantityTemplate::MeanExteriorSpin,
        "exterior_bond_energy" => QuantityTemplate::ExteriorBondEnergy,
        "mean_exterior_bond_energy" => QuantityTemplate::MeanExteriorBondEnergy,
        other => return Err(ctx(format!("unknown template `{other}`"))),
    };
    let system = raw.system.as_ref().ok_or_else(|| ctx("local templates need `system`".into()))?;
    let sys = systems.get(system).ok_or_else(|| ctx(format!("unknown system `{system}`")))?;
    if !template.in_domain(sys) {
        return Err(ctx(format!("template `{}` is not defined on system `{system}`", template.id())));
    }
    Ok(ObservableSpec::Local { template, system: system.clone() })
}

fn resolve_state(name: &str, raw: &RawState) -> Result<StateSpec> {
    let field = |f: &str| format!("states.{name}.{f}");
    Ok(match raw {
        RawState::Microcanonical { energy, number } => StateSpec::Microcanonical {
            energy: energy.exact(&field("energy"))?,
            number: number.exact(&field("number"))?,
        },
        RawState::Gibbs { beta, lambda_n } => {
            StateSpec::Gibbs { beta: beta.real(&field("beta"))?, lambda_n: lambda_n.real(&field("lambda_n"))? }
        }
        RawState::Explicit { weights } => StateSpec::Explicit(
            weights
                .iter()
                .map(|w| {
                    let weight = w.weight.real(&field("weights"))?;
                    if weight < 0.0 {
                        return Err(config_err(format!("state `{name}`: negative weight {weight}")));
                    }
                    Ok((w.energy.exact(&field("energy"))?, w.number.exact(&field("number"))?, weight))
                })
                .collect::<Result<Vec<_>>>()?,
        ),
    })
}
