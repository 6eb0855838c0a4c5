//! Functions from the outside and the morphisms between nested systems.
//!
//! An [`ExteriorObservable`] on system `t` only ever sees the symbols on its
//! support `D`, which is disjoint from `Λ_t`. Evaluation gathers `ω|D` and
//! looks the value up in a table (small supports) or calls a rule.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::{scan_range, ModelSpec, Subvolume, SubvolumePoset};

/// Supports up to this many sites are tabulated.
pub const TABLE_SITE_LIMIT: usize = 20;
const TABLE_ENTRY_LIMIT: u64 = 1 << 20;

type Rule = Arc<dyn Fn(&[u8]) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Evaluator {
    Table(Arc<[f64]>),
    Rule(Rule),
}

/// A bounded observable on `Ω` depending only on sites outside `Λ_t`.
#[derive(Clone)]
pub struct ExteriorObservable {
    name: String,
    system: Subvolume,
    support: Vec<usize>,
    alphabet: usize,
    bound: f64,
    eval: Evaluator,
}

impl fmt::Debug for ExteriorObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExteriorObservable")
            .field("name", &self.name)
            .field("system", &self.system.name())
            .field("support", &self.support)
            .field("bound", &self.bound)
            .field("tabulated", &matches!(self.eval, Evaluator::Table(_)))
            .finish()
    }
}

fn table_len(alphabet: usize, sites: usize) -> Option<u64> {
    (sites <= TABLE_SITE_LIMIT)
        .then(|| (alphabet as u64).checked_pow(sites as u32))
        .flatten()
        .filter(|&n| n <= TABLE_ENTRY_LIMIT)
}

impl ExteriorObservable {
    /// Builds an observable on `system` from a rule over `ω|support`.
    ///
    /// The rule receives the support symbols in ascending site order.
    /// Tabulated observables get their exact sup norm; rule-backed ones keep
    /// `bound_hint`.
    pub fn new(
        name: impl Into<String>,
        model: &ModelSpec,
        system: &Subvolume,
        support: impl IntoIterator<Item = usize>,
        bound_hint: f64,
        rule: impl Fn(&[u8]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let mut support: Vec<usize> = support.into_iter().collect();
        support.sort_unstable();
        support.dedup();
        let name = name.into();
        if let Some(&s) = support.iter().find(|&&s| s >= model.volume()) {
            return Err(Error::Invalid(format!("observable `{name}` support site {s} outside lattice")));
        }
        if support.iter().any(|&s| system.contains(s)) {
            return Err(Error::NotEmbeddable { system: system.name().to_string(), support });
        }
        let alphabet = model.alphabet();
        match table_len(alphabet, support.len()) {
            Some(n) => {
                let mut table = Vec::with_capacity(n as usize);
                let mut bad = None;
                scan_range(alphabet, support.len(), 0..n, |_, restricted| {
                    let v = rule(restricted);
                    if !v.is_finite() && bad.is_none() {
                        bad = Some(restricted.to_vec());
                    }
                    table.push(v);
                });
                if let Some(at) = bad {
                    return Err(Error::Invalid(format!("observable `{name}` is not finite at {at:?}")));
                }
                Ok(Self::from_table(name, system.clone(), support, alphabet, table.into()))
            }
            None => Ok(Self {
                name,
                system: system.clone(),
                support,
                alphabet,
                bound: bound_hint.abs(),
                eval: Evaluator::Rule(Arc::new(rule)),
            }),
        }
    }

    fn from_table(name: String, system: Subvolume, support: Vec<usize>, alphabet: usize, table: Arc<[f64]>) -> Self {
        let bound = table.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Self { name, system, support, alphabet, bound, eval: Evaluator::Table(table) }
    }

    pub fn constant(model: &ModelSpec, system: &Subvolume, value: f64) -> Result<Self> {
        Self::new(format!("const({value})"), model, system, [], value, move |_| value)
    }

    pub fn spin_at(model: &ModelSpec, system: &Subvolume, site: usize) -> Result<Self> {
        let spins = spin_values(model);
        let bound = spins.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Self::new(format!("spin_at({site})"), model, system, [site], bound, move |r| spins[usize::from(r[0])])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn system(&self) -> &Subvolume {
        &self.system
    }

    /// The dependency support `D`, sorted.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn sup_bound(&self) -> f64 {
        self.bound
    }

    pub fn is_tabulated(&self) -> bool {
        matches!(self.eval, Evaluator::Table(_))
    }

    /// Value on a full configuration (symbol array of length V).
    pub fn eval(&self, config: &[u8]) -> f64 {
        let mut buf = [0u8; 64];
        let restricted = &mut buf[..self.support.len()];
        for (slot, &site) in restricted.iter_mut().zip(&self.support) {
            *slot = config[site];
        }
        self.eval_restricted(restricted)
    }

    /// Value on `ω|D`, support symbols in ascending site order.
    pub fn eval_restricted(&self, restricted: &[u8]) -> f64 {
        match &self.eval {
            Evaluator::Table(t) => {
                let q = self.alphabet;
                let idx = restricted.iter().fold(0usize, |acc, &s| acc * q + usize::from(s));
                t[idx]
            }
            Evaluator::Rule(rule) => rule(restricted),
        }
    }

    /// All values over `ω|D`, in lexicographic order of the restriction.
    pub fn restricted_values(&self) -> Vec<f64> {
        let n = (self.alphabet as u64).pow(self.support.len() as u32);
        let mut out = Vec::with_capacity(n as usize);
        scan_range(self.alphabet, self.support.len(), 0..n, |_, r| out.push(self.eval_restricted(r)));
        out
    }

    pub fn is_nonnegative(&self) -> bool {
        self.restricted_values().iter().all(|&v| v >= 0.0)
    }

    /// Same system and the same value on every configuration.
    pub fn same_function(&self, other: &Self) -> bool {
        if self.system.sites() != other.system.sites() || self.alphabet != other.alphabet {
            return false;
        }
        let mut union: Vec<usize> = self.support.iter().chain(&other.support).copied().collect();
        union.sort_unstable();
        union.dedup();
        let width = union.iter().max().map_or(1, |m| m + 1);
        let n = (self.alphabet as u64).pow(union.len() as u32);
        let mut full = vec![0u8; width];
        let mut equal = true;
        scan_range(self.alphabet, union.len(), 0..n, |_, r| {
            for (&site, &sym) in union.iter().zip(r) {
                full[site] = sym;
            }
            equal &= self.eval(&full).to_bits() == other.eval(&full).to_bits();
        });
        equal
    }

    /// Pointwise `g(f)`, same support.
    pub fn map(&self, name: impl Into<String>, g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let name = name.into();
        match &self.eval {
            Evaluator::Table(t) => {
                let table: Vec<f64> = t.iter().map(|&v| g(v)).collect();
                if table.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Invalid(format!("observable `{name}` is not finite")));
                }
                Ok(Self::from_table(name, self.system.clone(), self.support.clone(), self.alphabet, table.into()))
            }
            Evaluator::Rule(rule) => {
                let rule = rule.clone();
                Ok(Self {
                    name,
                    system: self.system.clone(),
                    support: self.support.clone(),
                    alphabet: self.alphabet,
                    bound: f64::INFINITY,
                    eval: Evaluator::Rule(Arc::new(move |r| g(rule(r)))),
                })
            }
        }
    }

    /// `χ_[f ∈ values]`, exact membership.
    pub fn indicator_of(&self, values: &[f64]) -> Result<Self> {
        let values: Vec<f64> = values.to_vec();
        self.map(format!("1[{} in A]", self.name), move |v| f64::from(u8::from(values.contains(&v))))
    }

    /// `a f + b g` for two observables on the same system.
    pub fn linear_combination(a: f64, f: &Self, b: f64, g: &Self, model: &ModelSpec) -> Result<Self> {
        if f.system.sites() != g.system.sites() {
            return Err(Error::Invalid(format!(
                "cannot combine observables on `{}` and `{}`",
                f.system.name(),
                g.system.name()
            )));
        }
        let mut support: Vec<usize> = f.support.iter().chain(&g.support).copied().collect();
        support.sort_unstable();
        support.dedup();
        let width = support.iter().max().map_or(1, |m| m + 1);
        let (f2, g2, sup) = (f.clone(), g.clone(), support.clone());
        let bound = a.abs() * f.bound + b.abs() * g.bound;
        Self::new(format!("{a}*{}+{b}*{}", f.name, g.name), model, &f.system, support, bound, move |r| {
            let mut full = vec![0u8; width];
            for (&site, &sym) in sup.iter().zip(r) {
                full[site] = sym;
            }
            a * f2.eval(&full) + b * g2.eval(&full)
        })
    }

    fn rehomed(&self, system: &Subvolume) -> Self {
        Self { system: system.clone(), ..self.clone() }
    }
}

fn spin_values(model: &ModelSpec) -> Vec<f64> {
    (0..model.alphabet()).map(|s| model.spin_f64(s as u8)).collect()
}

/// Reference distribution for conditional expectations.
#[derive(Debug, Clone, PartialEq)]
pub enum Reference {
    /// Independent sites; `marginals[site][symbol]`.
    Product(Arc<Vec<Vec<f64>>>),
    /// Weight per configuration index (lexicographic order).
    Global(Arc<Vec<f64>>),
}

impl Reference {
    pub fn uniform(model: &ModelSpec) -> Self {
        let q = model.alphabet();
        Reference::Product(Arc::new(vec![vec![1.0 / q as f64; q]; model.volume()]))
    }

    pub fn product(model: &ModelSpec, marginals: Vec<Vec<f64>>) -> Result<Self> {
        if marginals.len() != model.volume() || marginals.iter().any(|m| m.len() != model.alphabet()) {
            return Err(Error::Invalid("product reference must give one marginal per site over the alphabet".into()));
        }
        for m in &marginals {
            let total: f64 = m.iter().sum();
            if m.iter().any(|&p| p < 0.0 || !p.is_finite()) || (total - 1.0).abs() > 1e-12 {
                return Err(Error::NotNormalized(format!("site marginal {m:?}")));
            }
        }
        Ok(Reference::Product(Arc::new(marginals)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MorphismStrategy {
    IdentityEmbedding,
    ConditionalExpectation(Reference),
}

impl MorphismStrategy {
    pub fn label(&self) -> &'static str {
        match self {
            MorphismStrategy::IdentityEmbedding => "identity",
            MorphismStrategy::ConditionalExpectation(_) => "conditional-expectation",
        }
    }
}

/// Maps `f^s` on `s` to the observable measuring the same quantity on `t`.
pub fn embed(
    strategy: &MorphismStrategy,
    f: &ExteriorObservable,
    target: &Subvolume,
    model: &ModelSpec,
) -> Result<ExteriorObservable> {
    if !f.system.is_subset_of(target) {
        return Err(Error::NotNested { s: f.system.name().to_string(), t: target.name().to_string() });
    }
    let interior: Vec<usize> = f.support.iter().copied().filter(|&s| target.contains(s)).collect();
    if interior.is_empty() {
        // Already a function from the outside of `target`; any conditional
        // expectation given the exterior returns it unchanged.
        return Ok(f.rehomed(target));
    }
    match strategy {
        MorphismStrategy::IdentityEmbedding => {
            Err(Error::NotEmbeddable { system: target.name().to_string(), support: f.support.clone() })
        }
        MorphismStrategy::ConditionalExpectation(Reference::Product(marginals)) => {
            embed_product(f, target, model, &interior, marginals.clone())
        }
        MorphismStrategy::ConditionalExpectation(Reference::Global(weights)) => embed_global(f, target, model, weights),
    }
}

fn embed_product(
    f: &ExteriorObservable,
    target: &Subvolume,
    model: &ModelSpec,
    interior: &[usize],
    marginals: Arc<Vec<Vec<f64>>>,
) -> Result<ExteriorObservable> {
    let q = model.alphabet();
    let outer: Vec<usize> = f.support.iter().copied().filter(|&s| !target.contains(s)).collect();
    let width = f.support.iter().max().map_or(1, |m| m + 1);
    let completions = (q as u64).pow(interior.len() as u32);
    let (inner, g, interior) = (f.clone(), f.clone(), interior.to_vec());
    let outer_sites = outer.clone();
    ExteriorObservable::new(format!("E[{}|ext {}]", f.name, target.name()), model, target, outer, g.bound, move |r| {
        let mut full = vec![0u8; width];
        for (&site, &sym) in outer_sites.iter().zip(r) {
            full[site] = sym;
        }
        let mut acc = 0.0;
        scan_range(q, interior.len(), 0..completions, |_, fill| {
            let mut weight = 1.0;
            for (&site, &sym) in interior.iter().zip(fill) {
                full[site] = sym;
                weight *= marginals[site][usize::from(sym)];
            }
            acc += weight * inner.eval(&full);
        });
        acc
    })
}

fn embed_global(
    f: &ExteriorObservable,
    target: &Subvolume,
    model: &ModelSpec,
    weights: &[f64],
) -> Result<ExteriorObservable> {
    let q = model.alphabet();
    let volume = model.volume();
    let total = model.configuration_count(u64::MAX)?;
    if weights.len() as u64 != total {
        return Err(Error::DimensionMismatch { expected: total as usize, got: weights.len() });
    }
    let exterior = target.exterior(volume);
    let ext_len = (q as u64).pow(exterior.len() as u32) as usize;
    let mut numer = vec![0.0; ext_len];
    let mut denom = vec![0.0; ext_len];
    let mut plain = vec![0.0; ext_len];
    let mut plain_count = vec![0u64; ext_len];
    scan_range(q, volume, 0..total, |k, config| {
        let e = exterior.iter().fold(0usize, |acc, &s| acc * q + usize::from(config[s]));
        let v = f.eval(config);
        let w = weights[k as usize];
        numer[e] += w * v;
        denom[e] += w;
        plain[e] += v;
        plain_count[e] += 1;
    });
    let table: Vec<f64> = (0..ext_len)
        .map(|e| if denom[e] > 0.0 { numer[e] / denom[e] } else { plain[e] / plain_count[e] as f64 })
        .collect();
    Ok(ExteriorObservable::from_table(
        format!("E[{}|ext {}]", f.name, target.name()),
        target.clone(),
        exterior,
        q,
        table.into(),
    ))
}

/// A region-parametrized rule realizing "the same quantity" on every system.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantityTemplate {
    Constant(f64),
    /// Spin at a fixed site; defined for systems not containing it.
    SpinAt(usize),
    /// Mean spin over `exterior(Λ_t)`.
    MeanExteriorSpin,
    /// Total active-bond energy over bonds with both ends outside `Λ_t`.
    ExteriorBondEnergy,
    /// Mean active-bond energy over those bonds (0 when there are none).
    MeanExteriorBondEnergy,
}

impl QuantityTemplate {
    pub fn id(&self) -> String {
        match self {
            QuantityTemplate::Constant(c) => format!("constant({c})"),
            QuantityTemplate::SpinAt(i) => format!("spin_at({i})"),
            QuantityTemplate::MeanExteriorSpin => "mean_exterior_spin".into(),
            QuantityTemplate::ExteriorBondEnergy => "exterior_bond_energy".into(),
            QuantityTemplate::MeanExteriorBondEnergy => "mean_exterior_bond_energy".into(),
        }
    }

    pub fn in_domain(&self, system: &Subvolume) -> bool {
        match self {
            QuantityTemplate::SpinAt(i) => !system.contains(*i),
            _ => true,
        }
    }

    pub fn realize(&self, model: &ModelSpec, system: &Subvolume) -> Result<ExteriorObservable> {
        if !self.in_domain(system) {
            return Err(Error::OutsideDomain { template: self.id(), system: system.name().to_string() });
        }
        let name = format!("{}@{}", self.id(), system.name());
        let spins = spin_values(model);
        let max_spin = spins.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let obs = match self {
            QuantityTemplate::Constant(c) => ExteriorObservable::constant(model, system, *c)?,
            QuantityTemplate::SpinAt(i) => ExteriorObservable::spin_at(model, system, *i)?,
            QuantityTemplate::MeanExteriorSpin => {
                let exterior = system.exterior(model.volume());
                let n = exterior.len() as f64;
                ExteriorObservable::new(&name, model, system, exterior, max_spin, move |r| {
                    r.iter().map(|&s| spins[usize::from(s)]).sum::<f64>() / n
                })?
            }
            QuantityTemplate::ExteriorBondEnergy | QuantityTemplate::MeanExteriorBondEnergy => {
                let bonds: Vec<(usize, usize)> = model
                    .active_bonds()
                    .iter()
                    .copied()
                    .filter(|&(i, j)| !system.contains(i) && !system.contains(j))
                    .collect();
                let mut support: Vec<usize> = bonds.iter().flat_map(|&(i, j)| [i, j]).collect();
                support.sort_unstable();
                support.dedup();
                let pos = |site: usize| support.binary_search(&site).unwrap_or_default();
                let local: Vec<(usize, usize)> = bonds.iter().map(|&(i, j)| (pos(i), pos(j))).collect();
                let coupling = crate::rational::to_f64(&model.coupling());
                let divisor = if matches!(self, QuantityTemplate::MeanExteriorBondEnergy) {
                    local.len().max(1) as f64
                } else {
                    1.0
                };
                let bound = coupling.abs() * max_spin * max_spin * local.len() as f64 / divisor;
                ExteriorObservable::new(&name, model, system, support, bound, move |r| {
                    let total: f64 = local
                        .iter()
                        .map(|&(a, b)| -coupling * spins[usize::from(r[a])] * spins[usize::from(r[b])])
                        .sum();
                    total / divisor
                })?
            }
        };
        Ok(obs.renamed(name))
    }
}

/// An element `[f]` of the direct limit: a template with its canonical
/// (smallest) representative system.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantityClass {
    template: QuantityTemplate,
    canonical: Subvolume,
}

impl QuantityClass {
    pub fn template(&self) -> &QuantityTemplate {
        &self.template
    }

    pub fn canonical_system(&self) -> &Subvolume {
        &self.canonical
    }

    pub fn realize(&self, model: &ModelSpec, system: &Subvolume) -> Result<ExteriorObservable> {
        self.template.realize(model, system)
    }
}

/// The class of `template` realized on `poset[t]`. The canonical system is
/// the smallest system `s <= t` in the template's domain (ties: earliest).
pub fn classify(template: &QuantityTemplate, poset: &SubvolumePoset, t: usize) -> Result<QuantityClass> {
    let target = &poset.systems()[t];
    if !template.in_domain(target) {
        return Err(Error::OutsideDomain { template: template.id(), system: target.name().to_string() });
    }
    let canonical = poset
        .systems()
        .iter()
        .enumerate()
        .filter(|&(s, sys)| poset.leq(s, t) && template.in_domain(sys))
        .min_by_key(|&(s, sys)| (sys.sites().len(), s))
        .map(|(_, sys)| sys.clone())
        .unwrap_or_else(|| target.clone());
    Ok(QuantityClass { template: template.clone(), canonical })
}

/// Outcome of comparing `embed(f^s, t)` with the template's own realization on `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityEntry {
    pub s: String,
    pub t: String,
    /// `None` when the strategy cannot embed `f^s`.
    pub compatible: Option<bool>,
}

pub fn check_compatibility(
    class: &QuantityClass,
    poset: &SubvolumePoset,
    model: &ModelSpec,
    strategy: &MorphismStrategy,
) -> Result<Vec<CompatibilityEntry>> {
    let mut out = Vec::new();
    for (s, t) in poset.strict_pairs() {
        let (sys_s, sys_t) = (&poset.systems()[s], &poset.systems()[t]);
        if !class.template.in_domain(sys_s) || !class.template.in_domain(sys_t) {
            continue;
        }
        let fs = class.realize(model, sys_s)?;
        let ft = class.realize(model, sys_t)?;
        let compatible = match embed(strategy, &fs, sys_t, model) {
            Ok(e) => Some(e.same_function(&ft)),
            Err(Error::NotEmbeddable { .. }) => None,
            Err(e) => return Err(e),
        };
        out.push(CompatibilityEntry { s: sys_s.name().to_string(), t: sys_t.name().to_string(), compatible });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InclusionEntry {
    pub observable: String,
    pub support: Vec<usize>,
    pub in_s: bool,
    pub in_t: bool,
}

impl InclusionEntry {
    /// Membership in `Ŵ_t` must imply membership in `Ŵ_s`.
    pub fn passes(&self) -> bool {
        !self.in_t || self.in_s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InclusionReport {
    pub s: String,
    pub t: String,
    pub entries: Vec<InclusionEntry>,
}

impl InclusionReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(InclusionEntry::passes)
    }
}

/// Checks `Ŵ_s ⊇ Ŵ_t` on a generated family: every single-site spin, the
/// constant, and each template realized on `t`.
pub fn check_antitone_inclusion(model: &ModelSpec, s: &Subvolume, t: &Subvolume) -> Result<InclusionReport> {
    if !s.is_subset_of(t) {
        return Err(Error::NotNested { s: s.name().to_string(), t: t.name().to_string() });
    }
    let disjoint = |support: &[usize], sys: &Subvolume| support.iter().all(|&x| !sys.contains(x));
    let mut family: Vec<(String, Vec<usize>)> =
        (0..model.volume()).map(|i| (format!("spin_at({i})"), vec![i])).collect();
    family.push(("constant".into(), vec![]));
    for template in [
        QuantityTemplate::MeanExteriorSpin,
        QuantityTemplate::ExteriorBondEnergy,
        QuantityTemplate::MeanExteriorBondEnergy,
    ] {
        let obs = template.realize(model, t)?;
        family.push((obs.name().to_string(), obs.support().to_vec()));
    }
    let entries = family
        .into_iter()
        .map(|(observable, support)| InclusionEntry {
            in_s: disjoint(&support, s),
            in_t: disjoint(&support, t),
            observable,
            support,
        })
        .collect();
    Ok(InclusionReport { s: s.name().to_string(), t: t.name().to_string(), entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Configuration, LatticeGeometry, DEFAULT_ENUMERATION_CAP};
    use num_rational::Ratio;

    fn ring(l: usize) -> ModelSpec {
        let g = LatticeGeometry::new(1, &[l], DEFAULT_ENUMERATION_CAP).unwrap();
        ModelSpec::ising(g, Ratio::from_integer(1), Ratio::from_integer(0)).unwrap()
    }

    fn sys(name: &str, sites: &[usize], v: usize) -> Subvolume {
        Subvolume::new(name, sites.iter().copied(), v).unwrap()
    }

    fn spins(s: &[i8]) -> Vec<u8> {
        s.iter().map(|&x| u8::from(x > 0)).collect()
    }

    #[test]
    fn eval_examples() {
        let m = ring(4);
        let t = sys("t", &[0], 4);
        let s1 = ExteriorObservable::spin_at(&m, &t, 1).unwrap();
        assert_eq!(s1.eval(&spins(&[1, 1, 1, 1])), 1.0);
        let mean = QuantityTemplate::MeanExteriorSpin.realize(&m, &t).unwrap();
        assert_eq!(mean.support(), &[1, 2, 3]);
        let v = mean.eval(&spins(&[1, -1, 1, 1]));
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
        let one = ExteriorObservable::constant(&m, &t, 1.0).unwrap();
        for c in crate::lattice::enumerate_configurations(&m, DEFAULT_ENUMERATION_CAP).unwrap() {
            assert_eq!(one.eval(c.symbols()), 1.0);
        }
    }

    #[test]
    fn support_must_avoid_system() {
        let m = ring(4);
        let t = sys("t", &[0, 1], 4);
        assert!(matches!(ExteriorObservable::spin_at(&m, &t, 1), Err(Error::NotEmbeddable { .. })));
        assert!(ExteriorObservable::spin_at(&m, &t, 9).is_err());
    }

    #[test]
    fn identity_embedding_examples() {
        let m = ring(4);
        let s = sys("s", &[0], 4);
        let t = sys("t", &[0, 1], 4);
        let f2 = ExteriorObservable::spin_at(&m, &s, 2).unwrap();
        let e = embed(&MorphismStrategy::IdentityEmbedding, &f2, &t, &m).unwrap();
        assert_eq!(e.system(), &t);
        assert_eq!(e.support(), &[2]);
        assert!(e.same_function(&ExteriorObservable::spin_at(&m, &t, 2).unwrap()));

        let f1 = ExteriorObservable::spin_at(&m, &s, 1).unwrap();
        assert!(matches!(embed(&MorphismStrategy::IdentityEmbedding, &f1, &t, &m), Err(Error::NotEmbeddable { .. })));
        assert!(matches!(
            embed(&MorphismStrategy::IdentityEmbedding, &f2, &sys("u", &[3], 4), &m),
            Err(Error::NotNested { .. })
        ));
    }

    #[test]
    fn conditional_expectation_of_interior_spin_is_zero() {
        let m = ring(4);
        let s = sys("s", &[0], 4);
        let t = sys("t", &[0, 1], 4);
        let f1 = ExteriorObservable::spin_at(&m, &s, 1).unwrap();
        let strategy = MorphismStrategy::ConditionalExpectation(Reference::uniform(&m));
        let e = embed(&strategy, &f1, &t, &m).unwrap();
        assert!(e.support().is_empty());
        assert!(e.same_function(&ExteriorObservable::constant(&m, &t, 0.0).unwrap()));
    }

    #[test]
    fn global_reference_matches_product_for_uniform() {
        let m = ring(4);
        let s = sys("s", &[0], 4);
        let t = sys("t", &[0, 1], 4);
        let f = QuantityTemplate::MeanExteriorSpin.realize(&m, &s).unwrap();
        let product = embed(&MorphismStrategy::ConditionalExpectation(Reference::uniform(&m)), &f, &t, &m).unwrap();
        let global = embed(
            &MorphismStrategy::ConditionalExpectation(Reference::Global(Arc::new(vec![1.0 / 16.0; 16]))),
            &f,
            &t,
            &m,
        )
        .unwrap();
        for c in crate::lattice::enumerate_configurations(&m, DEFAULT_ENUMERATION_CAP).unwrap() {
            let (a, b) = (product.eval(c.symbols()), global.eval(c.symbols()));
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            // (s2 + s3) / 3
            let want = (m.spin_f64(c.symbols()[2]) + m.spin_f64(c.symbols()[3])) / 3.0;
            assert!((a - want).abs() < 1e-12);
        }
    }

    #[test]
    fn embeddings_are_positive_and_unital() {
        let m = ring(5);
        let s = sys("s", &[0], 5);
        let t = sys("t", &[0, 1, 2], 5);
        let one = ExteriorObservable::constant(&m, &s, 1.0).unwrap();
        let sq = QuantityTemplate::MeanExteriorSpin.realize(&m, &s).unwrap().map("sq", |v| v * v).unwrap();
        let skewed = Reference::product(&m, vec![vec![0.3, 0.7]; 5]).unwrap();
        for strategy in [
            MorphismStrategy::ConditionalExpectation(Reference::uniform(&m)),
            MorphismStrategy::ConditionalExpectation(skewed),
        ] {
            let e1 = embed(&strategy, &one, &t, &m).unwrap();
            assert!(e1.restricted_values().iter().all(|&v| v == 1.0));
            assert!(embed(&strategy, &sq, &t, &m).unwrap().is_nonnegative());
        }
        let e1 = embed(&MorphismStrategy::IdentityEmbedding, &one, &t, &m).unwrap();
        assert_eq!(e1.restricted_values(), vec![1.0]);
    }

    #[test]
    fn support_soundness_by_perturbation() {
        let m = ring(5);
        let t = sys("t", &[0], 5);
        let family = [
            QuantityTemplate::SpinAt(3).realize(&m, &t).unwrap(),
            QuantityTemplate::MeanExteriorSpin.realize(&m, &t).unwrap(),
            QuantityTemplate::ExteriorBondEnergy.realize(&m, &t).unwrap(),
        ];
        for f in &family {
            for c in crate::lattice::enumerate_configurations(&m, DEFAULT_ENUMERATION_CAP).unwrap() {
                let base = f.eval(c.symbols());
                for site in (0..5).filter(|s| !f.support().contains(s)) {
                    let mut flipped = c.symbols().to_vec();
                    flipped[site] ^= 1;
                    let c2 = Configuration::new(flipped, 2).unwrap();
                    assert_eq!(f.eval(c2.symbols()), base);
                }
                assert!(base.abs() <= f.sup_bound());
            }
        }
    }

    #[test]
    fn rule_backed_observables_beyond_table_limit() {
        let m = ring(22);
        let t = sys("t", &[0], 22);
        let mean = QuantityTemplate::MeanExteriorSpin.realize(&m, &t).unwrap();
        assert!(!mean.is_tabulated());
        assert_eq!(mean.eval(&[1u8; 22]), 1.0);
        let small = QuantityTemplate::SpinAt(5).realize(&m, &t).unwrap();
        assert!(small.is_tabulated());
    }

    #[test]
    fn classify_and_realize_round_trip() {
        let m = ring(4);
        let poset = SubvolumePoset::new(vec![sys("a", &[0], 4), sys("b", &[0, 1], 4)]).unwrap();
        let class = classify(&QuantityTemplate::MeanExteriorSpin, &poset, 0).unwrap();
        assert_eq!(class.canonical_system().name(), "a");
        let on_b = class.realize(&m, &poset.systems()[1]).unwrap();
        assert_eq!(on_b.support(), &[2, 3]);
        let direct = QuantityTemplate::MeanExteriorSpin.realize(&m, &poset.systems()[0]).unwrap();
        assert!(class.realize(&m, &poset.systems()[0]).unwrap().same_function(&direct));

        let class_b = classify(&QuantityTemplate::MeanExteriorSpin, &poset, 1).unwrap();
        assert_eq!(class_b.canonical_system().name(), "a");
        assert!(matches!(classify(&QuantityTemplate::SpinAt(1), &poset, 1), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn spin_template_is_identity_compatible() {
        let m = ring(5);
        let poset = SubvolumePoset::new(vec![sys("a", &[0], 5), sys("b", &[0, 1], 5)]).unwrap();
        let class = classify(&QuantityTemplate::SpinAt(3), &poset, 0).unwrap();
        let report = check_compatibility(&class, &poset, &m, &MorphismStrategy::IdentityEmbedding).unwrap();
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].compatible, Some(true));

        let class = classify(&QuantityTemplate::MeanExteriorSpin, &poset, 0).unwrap();
        let report = check_compatibility(&class, &poset, &m, &MorphismStrategy::IdentityEmbedding).unwrap();
        assert_eq!(report[0].compatible, None);
    }

    #[test]
    fn antitone_inclusion_examples() {
        let m = ring(4);
        let s = sys("s", &[0], 4);
        let t = sys("t", &[0, 1], 4);
        let report = check_antitone_inclusion(&m, &s, &t).unwrap();
        assert!(report.all_pass());
        let find = |n: &str| report.entries.iter().find(|e| e.observable == n).unwrap();
        assert!(find("spin_at(2)").in_t && find("spin_at(2)").in_s);
        assert!(find("spin_at(1)").in_s && !find("spin_at(1)").in_t);
        assert!(find("constant").in_s && find("constant").in_t);
        assert!(check_antitone_inclusion(&m, &t, &s).is_err());
    }

    #[test]
    fn linear_combination_and_indicator() {
        let m = ring(4);
        let t = sys("t", &[0], 4);
        let a = ExteriorObservable::spin_at(&m, &t, 1).unwrap();
        let b = ExteriorObservable::spin_at(&m, &t, 3).unwrap();
        let c = ExteriorObservable::linear_combination(2.0, &a, -1.0, &b, &m).unwrap();
        assert_eq!(c.support(), &[1, 3]);
        assert_eq!(c.eval(&spins(&[1, 1, 1, -1])), 3.0);
        let ind = c.indicator_of(&[3.0, 1.0]).unwrap();
        assert_eq!(ind.eval(&spins(&[1, 1, 1, -1])), 1.0);
        assert_eq!(ind.eval(&spins(&[1, -1, 1, 1])), 0.0);
    }
}
