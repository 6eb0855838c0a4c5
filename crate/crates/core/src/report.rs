//! The `verify` suite, emitted as one [`CheckRecord`] per check.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{AlgebraicState, Idempotent, STATE_TOLERANCE};
use crate::config::{RunConfig, StrategyChoice};
use crate::ensemble::{check_homogeneity, thread_from_global, GlobalDistribution, PhaseSpace};
use crate::error::Result;
use crate::measurement::{
    law_consistency_residual, mackey_fullness_check, separation_check, state_family_with_point_masses,
    strong_convexity_check, CheckRecord, LevelSetContext,
};
use crate::texture::QuantityTemplate;

/// Random subsets drawn per suite.
const RANDOM_SUBSETS: usize = 32;

/// Templates used when the configuration names none.
pub fn default_templates(volume: usize) -> Vec<QuantityTemplate> {
    let mut out = vec![
        QuantityTemplate::Constant(1.0),
        QuantityTemplate::MeanExteriorSpin,
        QuantityTemplate::ExteriorBondEnergy,
        QuantityTemplate::MeanExteriorBondEnergy,
    ];
    out.extend((0..volume).map(QuantityTemplate::SpinAt));
    out
}

/// A uniformly random subset of `0..len`.
pub fn random_idempotent(rng: &mut impl Rng, len: usize) -> Idempotent {
    Idempotent::from_shells(len, (0..len).filter(|_| rng.random_bool(0.5)))
}

pub fn homogeneity_tolerance(strategy: StrategyChoice) -> f64 {
    match strategy {
        StrategyChoice::Identity => 1e-12,
        StrategyChoice::ConditionalExpectation => 1e-10,
    }
}

/// Runs every suite the configuration supports.
pub fn verify_suite(config: &RunConfig, phase: &PhaseSpace) -> Result<Vec<CheckRecord>> {
    let mut records = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(config.run.seed);
    let len = phase.len();

    let state = match &config.run.state {
        Some(name) => config.algebraic_state(phase, name)?,
        None => AlgebraicState::configuration_uniform(phase),
    };
    let state_name = config.run.state.clone().unwrap_or_else(|| "uniform".into());

    // Homogeneity of the thread induced by the selected state.
    let strategy = config.strategy();
    let thread = thread_from_global(Arc::new(GlobalDistribution::from_state(&state)), &config.systems, strategy);
    let mut templates = config.templates();
    if templates.is_empty() {
        templates = default_templates(config.model.volume());
    }
    let report = check_homogeneity(phase, &thread, &config.systems, &templates)?;
    let tol = homogeneity_tolerance(config.run.strategy);
    // A conditional expectation against the uniform reference only matches
    // states that are themselves uniform on configurations.
    let uniform = AlgebraicState::configuration_uniform(phase);
    let asserted = config.run.strategy == StrategyChoice::Identity
        || state.weights().iter().zip(uniform.weights()).all(|(a, b)| (a - b).abs() <= STATE_TOLERANCE);
    for row in &report.rows {
        let inputs = format!("{}|{}|{}|{}|{}", report.strategy, state_name, row.s, row.t, row.template);
        records.push(CheckRecord::new(
            format!("homogeneity[{}:{}<{}:{}]", report.strategy, row.s, row.t, row.template),
            &inputs,
            row.residual,
            asserted,
            row.residual <= tol,
        ));
    }

    // f(F) = A_F on every local observable, singletons plus random subsets.
    for (name, _) in config.observables.iter().filter(|(_, s)| matches!(s, crate::config::ObservableSpec::Local { .. }))
    {
        let f = config.local_observable(name)?;
        let ctx = LevelSetContext::new(phase, &f);
        let mut subsets: Vec<Idempotent> = (0..len).map(|x| Idempotent::singleton(len, x)).collect();
        subsets.extend((0..RANDOM_SUBSETS).map(|_| random_idempotent(&mut rng, len)));
        let mut residual = 0.0f64;
        for s in &subsets {
            residual = residual.max(ctx.check(phase, &f, s)?.residual);
        }
        let asserted = ctx.shell_measurable();
        records.push(CheckRecord::new(
            format!("level-set-identity[{name}]"),
            &format!("{name}|{}", subsets.iter().map(Idempotent::to_hex).collect::<Vec<_>>().join(",")),
            residual,
            asserted,
            residual <= 1e-12,
        ));
    }

    // Law consistency for the selected observable on each configured set.
    if let Some(obs) = &config.run.observable {
        let f = config.algebraic_observable(phase, obs)?;
        for (text, set) in &config.run.sets {
            let residual = law_consistency_residual(&state, &f, set)?;
            records.push(CheckRecord::new(
                format!("law-consistency[{obs}:{text}]"),
                &format!("{obs}|{state_name}|{text}"),
                residual,
                true,
                residual <= 1e-12,
            ));
        }
    }

    // Properties of the state space itself.
    let mut configured = Vec::new();
    for name in config.states.keys() {
        configured.push(config.algebraic_state(phase, name)?);
    }
    configured.push(AlgebraicState::configuration_uniform(phase));
    let family = state_family_with_point_masses(len, &configured);

    let pairs: Vec<(Idempotent, Idempotent)> =
        (0..RANDOM_SUBSETS).map(|_| (random_idempotent(&mut rng, len), random_idempotent(&mut rng, len))).collect();
    let fullness = mackey_fullness_check(&family, &pairs)?;
    let failures = fullness.iter().filter(|e| !e.pass).count();
    records.push(CheckRecord::new(
        "fullness",
        &pairs.iter().map(|(e, f)| format!("{}<{}", e.to_hex(), f.to_hex())).collect::<Vec<_>>().join(","),
        failures as f64,
        true,
        failures == 0,
    ));

    let raw: Vec<f64> = family.iter().map(|_| rng.random_range(0.0..1.0) + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let convexity = strong_convexity_check(&family, &weights)?;
    records.push(CheckRecord::new(
        "strong-convexity",
        &format!("{weights:?}"),
        convexity.residual.max(convexity.normalization_error),
        true,
        convexity.passes(),
    ));

    let mut observables = vec![phase.energy_density(), phase.number_density()];
    for name in config.observables.keys() {
        observables.push(config.algebraic_observable(phase, name)?);
    }
    let separation = separation_check(&observables, &family)?;
    let failures = separation.iter().filter(|e| !e.pass).count();
    records.push(CheckRecord::new(
        "separation",
        &format!("observables={} states={}", observables.len(), family.len()),
        failures as f64,
        true,
        failures == 0,
    ));

    // Zero variance exactly on point masses.
    let f = observables.first().cloned().unwrap_or_else(|| phase.energy_density());
    let worst = (0..len)
        .map(|x| AlgebraicState::point_mass(len, x).variance(&f).map(f64::abs))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    records.push(CheckRecord::new("point-mass-variance", "energy_density", worst, true, worst <= STATE_TOLERANCE));

    Ok(records)
}

/// The plain-text report: one line per record and a closing summary.
pub fn render_report(records: &[CheckRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&r.line());
        out.push('\n');
    }
    let failures = records.iter().filter(|r| r.is_failure()).count();
    out.push_str(&format!("summary checks={} failures={}\n", records.len(), failures));
    out
}
