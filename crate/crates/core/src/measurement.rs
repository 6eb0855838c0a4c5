//! Single measurements: outcome laws and seeded sampling, plus the checks
//! that relate observables to states.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::algebra::{q_measure_of, AlgebraicObservable, AlgebraicState, Idempotent, STATE_TOLERANCE};
use crate::borel::RealSet;
use crate::ensemble::{LocalState, PhaseSpace};
use crate::error::{Error, Result};
use crate::texture::ExteriorObservable;

/// `σ([f ∈ B])`, summed directly over the shells where `f` lands in `B`.
pub fn probability_law(state: &AlgebraicState, f: &AlgebraicObservable, set: &RealSet) -> Result<f64> {
    if state.len() != f.len() {
        return Err(Error::DimensionMismatch { expected: state.len(), got: f.len() });
    }
    Ok(f.values().iter().zip(state.weights()).filter(|(v, _)| set.contains(**v)).map(|(_, w)| w).sum())
}

/// `μ_t(χ_[f^t ∈ B])`.
pub fn local_probability_law(
    phase: &PhaseSpace,
    state: &LocalState,
    f: &ExteriorObservable,
    set: &RealSet,
) -> Result<f64> {
    let set = set.clone();
    let indicator = f.map(format!("1[{} in B]", f.name()), move |v| f64::from(u8::from(set.contains(v))))?;
    state.expect(phase, &indicator)
}

/// `|probability_law(σ, f, B) - ζ(Q^f(B))|`.
pub fn law_consistency_residual(state: &AlgebraicState, f: &AlgebraicObservable, set: &RealSet) -> Result<f64> {
    let direct = probability_law(state, f, set)?;
    let spectral = state.probability(&q_measure_of(f).eval(set))?;
    Ok((direct - spectral).abs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub seed: u64,
    pub state_id: String,
    pub observable_id: String,
    pub n: usize,
    pub shells: Vec<usize>,
    pub outcomes: Vec<f64>,
    /// `(value, frequency)` in increasing value order.
    pub empirical_law: Vec<(f64, f64)>,
}

impl MeasurementRecord {
    /// `draw,shell,value`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("draw,shell,value\n");
        for (i, (x, v)) in self.shells.iter().zip(&self.outcomes).enumerate() {
            out.push_str(&format!("{i},{x},{v}\n"));
        }
        out
    }

    /// `value,count,frequency,exact`, the exact column from `state`.
    pub fn law_csv(&self, state: &AlgebraicState, f: &AlgebraicObservable) -> Result<String> {
        let mut out = String::from("value,count,frequency,exact\n");
        for v in f.distinct_values() {
            let count = self.outcomes.iter().filter(|&&o| o == v).count();
            let exact = probability_law(state, f, &RealSet::points(&[v])?)?;
            out.push_str(&format!("{v},{count},{},{exact}\n", count as f64 / self.n as f64));
        }
        Ok(out)
    }
}

/// Draws `n` shells i.i.d. from `state` and reads `f` on each.
pub fn sample_measurement(
    state: &AlgebraicState,
    f: &AlgebraicObservable,
    seed: u64,
    n: usize,
    state_id: &str,
    observable_id: &str,
) -> Result<MeasurementRecord> {
    if n == 0 {
        return Err(Error::Invalid("sample count must be at least 1".into()));
    }
    if state.len() != f.len() {
        return Err(Error::DimensionMismatch { expected: state.len(), got: f.len() });
    }
    let dist = WeightedIndex::new(state.weights()).map_err(|e| Error::NotNormalized(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shells: Vec<usize> = (0..n).map(|_| dist.sample(&mut rng)).collect();
    let outcomes: Vec<f64> = shells.iter().map(|&x| f.get(x)).collect();
    let empirical_law = f
        .distinct_values()
        .into_iter()
        .filter_map(|v| {
            let c = outcomes.iter().filter(|&&o| o == v).count();
            (c > 0).then(|| (v, c as f64 / n as f64))
        })
        .collect();
    Ok(MeasurementRecord {
        seed,
        state_id: state_id.to_string(),
        observable_id: observable_id.to_string(),
        n,
        shells,
        outcomes,
        empirical_law,
    })
}

/// Result of comparing `γ χ_[f^t ∈ A_F]` with `χ_[f ∈ A_F]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetOutcome {
    pub values: Vec<f64>,
    pub residual: f64,
    /// Equality is only claimed for observables constant on every shell.
    pub asserted: bool,
}

impl LevelSetOutcome {
    pub fn passes(&self) -> bool {
        !self.asserted || self.residual <= 1e-12
    }
}

/// Shell data for `f^t` computed once, reused across many `F`.
#[derive(Debug, Clone)]
pub struct LevelSetContext {
    gamma: AlgebraicObservable,
    shell_measurable: bool,
}

impl LevelSetContext {
    pub fn new(phase: &PhaseSpace, f: &ExteriorObservable) -> Self {
        Self { gamma: phase.gamma(f), shell_measurable: phase.is_shell_measurable(f) }
    }

    pub fn gamma(&self) -> &AlgebraicObservable {
        &self.gamma
    }

    pub fn shell_measurable(&self) -> bool {
        self.shell_measurable
    }

    pub fn check(&self, phase: &PhaseSpace, f: &ExteriorObservable, shells: &Idempotent) -> Result<LevelSetOutcome> {
        let mut values: Vec<f64> = shells.set().iter().map(|x| self.gamma.get(x)).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        let left = phase.gamma(&f.indicator_of(&values)?);
        let right = self.gamma.level_set(&values).as_observable();
        let residual = left.values().iter().zip(right.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        Ok(LevelSetOutcome { values, residual, asserted: self.shell_measurable })
    }
}

pub fn level_set_check(phase: &PhaseSpace, f: &ExteriorObservable, shells: &Idempotent) -> Result<LevelSetOutcome> {
    LevelSetContext::new(phase, f).check(phase, f, shells)
}

/// All point masses followed by `extra`.
pub fn state_family_with_point_masses(len: usize, extra: &[AlgebraicState]) -> Vec<AlgebraicState> {
    (0..len).map(|x| AlgebraicState::point_mass(len, x)).chain(extra.iter().cloned()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FullnessEntry {
    pub e: Idempotent,
    pub f: Idempotent,
    pub subset: bool,
    /// Index into the family of a state with `ζ(χ_E) > ζ(χ_F)`.
    pub witness: Option<usize>,
    pub pass: bool,
}

/// `E ≤ F` in every state of the family iff `E ⊆ F`.
pub fn mackey_fullness_check(
    family: &[AlgebraicState],
    pairs: &[(Idempotent, Idempotent)],
) -> Result<Vec<FullnessEntry>> {
    pairs
        .iter()
        .map(|(e, f)| {
            let subset = e.le(f);
            let mut witness = None;
            let mut ordered = true;
            for (i, s) in family.iter().enumerate() {
                let (pe, pf) = (s.probability(e)?, s.probability(f)?);
                if pe > pf + STATE_TOLERANCE {
                    ordered = false;
                    witness.get_or_insert(i);
                    if !subset {
                        break;
                    }
                }
            }
            let pass = if subset { ordered } else { witness.is_some() };
            Ok(FullnessEntry { e: e.clone(), f: f.clone(), subset, witness, pass })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityOutcome {
    pub mixture: AlgebraicState,
    /// `max_x |mixture(x) - Σ_n t_n σ_n(x)|` with the sum taken per shell.
    pub residual: f64,
    pub normalization_error: f64,
}

impl ConvexityOutcome {
    pub fn passes(&self) -> bool {
        self.residual <= STATE_TOLERANCE && self.normalization_error <= STATE_TOLERANCE
    }
}

pub fn strong_convexity_check(family: &[AlgebraicState], weights: &[f64]) -> Result<ConvexityOutcome> {
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > STATE_TOLERANCE {
        return Err(Error::NotNormalized(format!("mixture weights sum to {total}")));
    }
    let mixture = AlgebraicState::mixture(family, weights)?;
    let residual = (0..mixture.len())
        .map(|x| {
            let direct: f64 = family.iter().zip(weights).map(|(s, t)| t * s.weights()[x]).sum();
            (mixture.weights()[x] - direct).abs()
        })
        .fold(0.0, f64::max);
    let normalization_error = (mixture.weights().iter().sum::<f64>() - 1.0).abs();
    Ok(ConvexityOutcome { mixture, residual, normalization_error })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparationKind {
    Observables,
    States,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationEntry {
    pub kind: SeparationKind,
    pub i: usize,
    pub j: usize,
    /// `false` when the pair is identical and nothing needs separating.
    pub required: bool,
    /// Shell of the separating point mass or basis idempotent.
    pub witness: Option<usize>,
    pub pass: bool,
}

/// Point masses separate distinct observables; basis idempotents separate
/// distinct states.
pub fn separation_check(
    observables: &[AlgebraicObservable],
    states: &[AlgebraicState],
) -> Result<Vec<SeparationEntry>> {
    if observables.is_empty() || states.is_empty() {
        return Err(Error::Invalid("separation needs nonempty observable and state families".into()));
    }
    let mut entries = Vec::new();
    for i in 0..observables.len() {
        for j in i + 1..observables.len() {
            let (f, g) = (&observables[i], &observables[j]);
            let required = f != g;
            let mut witness = None;
            for x in 0..f.len().min(g.len()) {
                let probe = AlgebraicState::point_mass(f.len(), x);
                if probe.expectation(f)? != probe.expectation(g)? {
                    witness = Some(x);
                    break;
                }
            }
            let pass = required == witness.is_some();
            entries.push(SeparationEntry { kind: SeparationKind::Observables, i, j, required, witness, pass });
        }
    }
    for i in 0..states.len() {
        for j in i + 1..states.len() {
            let (s, t) = (&states[i], &states[j]);
            let required = s != t;
            let mut witness = None;
            for x in 0..s.len() {
                let e = Idempotent::singleton(s.len(), x);
                if s.probability(&e)? != t.probability(&e)? {
                    witness = Some(x);
                    break;
                }
            }
            let pass = required == witness.is_some();
            entries.push(SeparationEntry { kind: SeparationKind::States, i, j, required, witness, pass });
        }
    }
    Ok(entries)
}

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub name: String,
    pub digest: String,
    pub residual: f64,
    pub asserted: bool,
    pub pass: bool,
}

/// First 16 hex digits of the SHA-256 of `inputs`.
pub fn inputs_digest(inputs: &str) -> String {
    Sha256::digest(inputs.as_bytes()).iter().take(8).map(|b| format!("{b:02x}")).collect()
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, inputs: &str, residual: f64, asserted: bool, pass: bool) -> Self {
        Self { name: name.into(), digest: inputs_digest(inputs), residual, asserted, pass }
    }

    pub fn status(&self) -> &'static str {
        match (self.asserted, self.pass) {
            (false, _) => "INFO",
            (true, true) => "PASS",
            (true, false) => "FAIL",
        }
    }

    pub fn line(&self) -> String {
        format!("check={} digest={} residual={:.3e} status={}", self.name, self.digest, self.residual, self.status())
    }

    pub fn is_failure(&self) -> bool {
        self.asserted && !self.pass
    }
}

pub fn records_csv(records: &[CheckRecord]) -> String {
    let mut out = String::from("name,digest,residual,status\n");
    for r in records {
        out.push_str(&format!("{},{},{:.3e},{}\n", r.name, r.digest, r.residual, r.status()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::gibbs_state;
    use crate::ensemble::{enumerate_shells, local_state_from_global, EnumerationOptions, GlobalDistribution};
    use crate::lattice::{LatticeGeometry, ModelSpec, Subvolume, DEFAULT_ENUMERATION_CAP};
    use crate::texture::QuantityTemplate;
    use num_rational::Ratio;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn ring(l: usize) -> (ModelSpec, PhaseSpace) {
        let g = LatticeGeometry::new(1, &[l], DEFAULT_ENUMERATION_CAP).unwrap();
        let m = ModelSpec::ising(g, Ratio::from_integer(1), Ratio::from_integer(0)).unwrap();
        let p = enumerate_shells(&m, &EnumerationOptions::default()).unwrap();
        (m, p)
    }

    fn shell(p: &PhaseSpace, e: i64, n: i64) -> usize {
        p.find(Ratio::from_integer(e), Ratio::from_integer(n)).unwrap()
    }

    #[test]
    fn law_examples() {
        let (_, p) = ring(4);
        let f = p.energy_density();
        let sigma = gibbs_state(&p, 0.0, 0.0).unwrap();
        assert_eq!(probability_law(&sigma, &f, &RealSet::parse("{0}").unwrap()).unwrap(), 0.75);
        assert_eq!(probability_law(&sigma, &f, &RealSet::all()).unwrap(), 1.0);
        let top = AlgebraicState::point_mass(6, shell(&p, -4, 4));
        assert_eq!(probability_law(&top, &f, &RealSet::parse("(-inf,-0.5]").unwrap()).unwrap(), 1.0);
        assert_eq!(law_consistency_residual(&sigma, &f, &RealSet::parse("[-1,0]").unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn local_law_matches_shell_law_for_shell_measurable() {
        let (m, p) = ring(4);
        let t = Subvolume::new("t", [0], 4).unwrap();
        let f_t = QuantityTemplate::Constant(2.0).realize(&m, &t).unwrap();
        let global = Arc::new(GlobalDistribution::uniform(&p));
        let mu = local_state_from_global(global, &t);
        let b = RealSet::parse("{0}").unwrap();
        let local = local_probability_law(&p, &mu, &f_t, &b).unwrap();
        let sigma = AlgebraicState::configuration_uniform(&p);
        assert_eq!(local, probability_law(&sigma, &p.gamma(&f_t), &b).unwrap());
    }

    #[test]
    fn sampling_examples() {
        let (_, p) = ring(4);
        let f = p.energy_density();
        let point = AlgebraicState::point_mass(6, 3);
        let r = sample_measurement(&point, &f, 9, 1000, "pm", "e").unwrap();
        assert!(r.outcomes.iter().all(|&v| v == f.get(3)));
        assert_eq!(r.empirical_law, vec![(f.get(3), 1.0)]);

        let sigma = gibbs_state(&p, 0.0, 0.0).unwrap();
        let a = sample_measurement(&sigma, &f, 42, 1, "g", "e").unwrap();
        let b = sample_measurement(&sigma, &f, 42, 1, "g", "e").unwrap();
        assert_eq!(a, b);
        let n = 100_000;
        let r = sample_measurement(&sigma, &f, 7, n, "g", "e").unwrap();
        let p0 = r.empirical_law.iter().find(|(v, _)| *v == 0.0).unwrap().1;
        assert!((p0 - 0.75).abs() <= 4.0 * (0.75f64 * 0.25 / n as f64).sqrt());
        assert!((r.empirical_law.iter().map(|x| x.1).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(sample_measurement(&sigma, &f, 0, 0, "g", "e").is_err());
    }

    #[test]
    fn level_set_examples() {
        let g = LatticeGeometry::new(1, &[4], DEFAULT_ENUMERATION_CAP).unwrap();
        let m =
            ModelSpec::ising(g, Ratio::from_integer(1), Ratio::from_integer(0)).unwrap().with_decoupled([0]).unwrap();
        let p = enumerate_shells(&m, &EnumerationOptions::default()).unwrap();
        let t = Subvolume::new("t", [0], 4).unwrap();
        let bond = QuantityTemplate::ExteriorBondEnergy.realize(&m, &t).unwrap();
        let ctx = LevelSetContext::new(&p, &bond);
        assert!(ctx.shell_measurable());
        for x in 0..p.len() {
            let out = ctx.check(&p, &bond, &Idempotent::singleton(p.len(), x)).unwrap();
            assert!(out.asserted && out.residual == 0.0);
        }

        let (m4, p4) = ring(4);
        let c = ExteriorObservable::constant(&m4, &t, 3.0).unwrap();
        assert_eq!(level_set_check(&p4, &c, &Idempotent::one(6)).unwrap().residual, 0.0);
        let s1 = ExteriorObservable::spin_at(&m4, &t, 1).unwrap();
        let out = level_set_check(&p4, &s1, &Idempotent::singleton(6, shell(&p4, 0, 2))).unwrap();
        assert!(!out.asserted && out.residual > 0.0 && out.passes());
    }

    #[test]
    fn mackey_examples() {
        let family = state_family_with_point_masses(6, &[AlgebraicState::new(vec![1.0 / 6.0; 6]).unwrap()]);
        let e = Idempotent::from_shells(6, [1, 2]);
        let entries = mackey_fullness_check(
            &family,
            &[(e.clone(), e.clone()), (Idempotent::singleton(6, 4), Idempotent::zero(6))],
        )
        .unwrap();
        assert!(entries[0].subset && entries[0].pass && entries[0].witness.is_none());
        assert_eq!(entries[1].witness, Some(4));

        let one = strong_convexity_check(&family[..1], &[1.0]).unwrap();
        assert_eq!(one.mixture, family[0]);
        let half = strong_convexity_check(&family[..2], &[0.5, 0.5]).unwrap();
        assert_eq!(half.mixture.weights(), &[0.5, 0.5, 0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(strong_convexity_check(&family[..2], &[0.5, 0.6]), Err(Error::NotNormalized(_))));

        let f = AlgebraicObservable::new(vec![0.0, 1.0, 2.0]).unwrap();
        let g = AlgebraicObservable::new(vec![0.0, 1.5, 2.0]).unwrap();
        let states = state_family_with_point_masses(3, &[]);
        let sep = separation_check(&[f.clone(), g, f], &states).unwrap();
        assert_eq!(sep[0].witness, Some(1));
        assert!(!sep[1].required && sep[1].pass);
        assert!(sep.iter().all(|e| e.pass));
    }

    #[test]
    fn record_format() {
        let r = CheckRecord::new("demo", "x", 0.0, true, true);
        assert_eq!(r.digest.len(), 16);
        assert_eq!(r.line(), format!("check=demo digest={} residual=0.000e0 status=PASS", r.digest));
        assert_eq!(CheckRecord::new("d", "x", 1.0, false, false).status(), "INFO");
        assert!(CheckRecord::new("d", "x", 1.0, true, false).is_failure());
        assert_eq!(inputs_digest("x"), CheckRecord::new("other", "x", 0.0, true, true).digest);
    }

    fn arb_case() -> impl Strategy<Value = (Vec<f64>, Vec<i32>, (i32, i32))> {
        (1usize..10).prop_flat_map(|n| {
            (proptest::collection::vec(0.0f64..1.0, n), proptest::collection::vec(-3i32..4, n), (-4i32..4, 0i32..5))
        })
    }

    proptest! {
        #[test]
        fn law_consistency_and_additivity((w, vals, (lo, width)) in arb_case()) {
            let total: f64 = w.iter().sum::<f64>() + 1.0;
            let mut weights: Vec<f64> = w.iter().map(|x| x / total).collect();
            weights[0] += 1.0 / total;
            let Ok(sigma) = AlgebraicState::new(weights) else { return Ok(()) };
            let f = AlgebraicObservable::new(vals.iter().map(|&v| f64::from(v) / 2.0).collect()).unwrap();
            let b = RealSet::parse(&format!("[{},{})", f64::from(lo) / 2.0, f64::from(lo + width) / 2.0)).unwrap();
            prop_assert_eq!(law_consistency_residual(&sigma, &f, &b).unwrap(), 0.0);
            let rest = RealSet::parse(&format!("(-inf,{}) | [{},inf)", f64::from(lo) / 2.0, f64::from(lo + width) / 2.0)).unwrap();
            let sum = probability_law(&sigma, &f, &b).unwrap() + probability_law(&sigma, &f, &rest).unwrap();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
        }
    }
}
