//! The phase space `X` of microcanonical shells and the map `γ_t` into
//! `C(X)`. Local states and threads are built on top of it.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rayon::prelude::*;

use crate::algebra::{AlgebraicObservable, AlgebraicState, STATE_TOLERANCE};
use crate::error::{Error, Result};
use crate::lattice::{
    partition_range, scan_range, Configuration, ModelSpec, Subvolume, SubvolumePoset, DEFAULT_ENUMERATION_CAP,
};
use crate::rational::{format_rational, to_f64, Rational};
use crate::texture::{embed, ExteriorObservable, MorphismStrategy, QuantityTemplate};

/// Number of scan chunks used by `gamma`; fixed so float sums do not depend
/// on the worker count.
const SCAN_CHUNKS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerationOptions {
    pub cap: u64,
    pub workers: usize,
    pub store_members: bool,
    /// Shells larger than this are re-scanned on demand instead of stored.
    pub member_budget: u64,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        Self { cap: DEFAULT_ENUMERATION_CAP, workers: 1, store_members: false, member_budget: 1 << 20 }
    }
}

/// A level set `{ω : H(ω) = E, N(ω) = n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Shell {
    id: usize,
    energy_key: i64,
    number_key: i64,
    energy: Rational,
    number: Rational,
    count: u64,
    members: Option<Arc<[u64]>>,
}

impl Shell {
    pub fn id(&self) -> usize {
        self.id
    }

    pub fn energy(&self) -> Rational {
        self.energy
    }

    pub fn number(&self) -> Rational {
        self.number
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Configuration indices, when stored.
    pub fn stored_members(&self) -> Option<&[u64]> {
        self.members.as_deref()
    }

    pub fn key(&self) -> (i64, i64) {
        (self.energy_key, self.number_key)
    }
}

/// The finite set of shells, in lexicographic `(E, n)` order.
#[derive(Debug, Clone)]
pub struct PhaseSpace {
    model: ModelSpec,
    shells: Vec<Shell>,
    index: HashMap<(i64, i64), usize>,
    total: u64,
    workers: usize,
}

impl PartialEq for PhaseSpace {
    fn eq(&self, other: &Self) -> bool {
        self.model == other.model && self.shells == other.shells && self.total == other.total
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Invalid(format!("cannot start {workers} workers: {e}")))
}

/// Exact census of the level sets of `(H, N)`.
pub fn enumerate_shells(model: &ModelSpec, options: &EnumerationOptions) -> Result<PhaseSpace> {
    let total = model.configuration_count(options.cap)?;
    let (q, v) = (model.alphabet(), model.volume());
    let workers = options.workers.max(1);
    let ranges = partition_range(total, workers * 4);
    let pool = pool(workers)?;

    let partials: Vec<BTreeMap<(i64, i64), u64>> = pool.install(|| {
        ranges
            .par_iter()
            .map(|r| {
                let mut census = BTreeMap::new();
                scan_range(q, v, r.clone(), |_, s| {
                    *census.entry((model.energy_key(s), model.number_key(s))).or_insert(0u64) += 1;
                });
                census
            })
            .collect()
    });
    let mut census: BTreeMap<(i64, i64), u64> = BTreeMap::new();
    for part in partials {
        for (k, c) in part {
            *census.entry(k).or_insert(0) += c;
        }
    }

    let mut shells: Vec<Shell> = census
        .into_iter()
        .enumerate()
        .map(|(id, ((ek, nk), count))| Shell {
            id,
            energy_key: ek,
            number_key: nk,
            energy: model.energy_label(ek),
            number: model.number_label(nk),
            count,
            members: None,
        })
        .collect();
    let index: HashMap<(i64, i64), usize> = shells.iter().map(|s| (s.key(), s.id)).collect();

    if options.store_members {
        let keep: Vec<bool> = shells.iter().map(|s| s.count <= options.member_budget).collect();
        let collected: Vec<Vec<Vec<u64>>> = pool.install(|| {
            ranges
                .par_iter()
                .map(|r| {
                    let mut lists = vec![Vec::new(); shells.len()];
                    scan_range(q, v, r.clone(), |k, s| {
                        let id = index[&(model.energy_key(s), model.number_key(s))];
                        if keep[id] {
                            lists[id].push(k);
                        }
                    });
                    lists
                })
                .collect()
        });
        for shell in shells.iter_mut().filter(|s| keep[s.id]) {
            let members: Vec<u64> = collected.iter().flat_map(|lists| lists[shell.id].iter().copied()).collect();
            shell.members = Some(members.into());
        }
    }

    Ok(PhaseSpace { model: model.clone(), shells, index, total, workers })
}

#[derive(Debug, Clone, Copy)]
struct ShellAccumulator {
    sum: f64,
    compensation: f64,
    min: f64,
    max: f64,
    count: u64,
}

impl ShellAccumulator {
    fn new() -> Self {
        Self { sum: 0.0, compensation: 0.0, min: f64::INFINITY, max: f64::NEG_INFINITY, count: 0 }
    }

    // Neumaier summation.
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.compensation += (self.sum - t) + v;
        } else {
            self.compensation += (v - t) + self.sum;
        }
        self.sum = t;
        self.min = self.min.min(v);
        self.max = self.max.max(v);
        self.count += 1;
    }

    fn merge(&mut self, other: &Self) {
        self.add_partial(other.sum);
        self.compensation += other.compensation;
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
        self.count += other.count - 1;
    }

    fn add_partial(&mut self, v: f64) {
        let (min, max) = (self.min, self.max);
        self.add(v);
        self.min = min;
        self.max = max;
    }

    fn stats(&self) -> ShellStats {
        let mean = if self.count == 0 {
            0.0
        } else if self.min == self.max {
            // Constant on the shell: the mean is that value, exactly.
            self.min
        } else {
            (self.sum + self.compensation) / self.count as f64
        };
        ShellStats { mean, min: self.min, max: self.max }
    }
}

/// Mean and range of a local observable over one shell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl PhaseSpace {
    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn shells(&self) -> &[Shell] {
        &self.shells
    }

    pub fn len(&self) -> usize {
        self.shells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shells.is_empty()
    }

    pub fn total_configurations(&self) -> u64 {
        self.total
    }

    pub fn shell(&self, id: usize) -> &Shell {
        &self.shells[id]
    }

    /// Shell id with the given exact labels.
    pub fn find(&self, energy: Rational, number: Rational) -> Option<usize> {
        let ek = energy * Rational::from_integer(self.model.energy_scale());
        let nk = number * Rational::from_integer(self.model.number_scale());
        if !ek.is_integer() || !nk.is_integer() {
            return None;
        }
        self.index.get(&(ek.to_integer(), nk.to_integer())).copied()
    }

    pub fn shell_of(&self, symbols: &[u8]) -> usize {
        self.index[&(self.model.energy_key(symbols), self.model.number_key(symbols))]
    }

    /// Members of shell `id` in lexicographic order: stored, or by filtered scan.
    pub fn members(&self, id: usize) -> Box<dyn Iterator<Item = Configuration> + '_> {
        let (q, v) = (self.model.alphabet(), self.model.volume());
        match &self.shells[id].members {
            Some(list) => Box::new(list.iter().map(move |&k| Configuration::from_index(k, q, v))),
            None => {
                let key = self.shells[id].key();
                Box::new(
                    (0..self.total).map(move |k| Configuration::from_index(k, q, v)).filter(move |c| {
                        (self.model.energy_key(c.symbols()), self.model.number_key(c.symbols())) == key
                    }),
                )
            }
        }
    }

    /// `(1/|S_x|) Σ_{ω ∈ S_x} f(ω)`.
    pub fn shell_expectation(&self, id: usize, f: &ExteriorObservable) -> f64 {
        let mut acc = ShellAccumulator::new();
        for c in self.members(id) {
            acc.add(f.eval(c.symbols()));
        }
        acc.stats().mean
    }

    /// Per-shell mean and range of `f`, from one scan of `Ω`.
    pub fn shell_profile(&self, f: &ExteriorObservable) -> Vec<ShellStats> {
        let (q, v) = (self.model.alphabet(), self.model.volume());
        let n = self.shells.len();
        let ranges = partition_range(self.total, SCAN_CHUNKS);
        let scan = || -> Vec<Vec<ShellAccumulator>> {
            ranges
                .par_iter()
                .map(|r| {
                    let mut acc = vec![ShellAccumulator::new(); n];
                    scan_range(q, v, r.clone(), |_, s| acc[self.shell_of(s)].add(f.eval(s)));
                    acc
                })
                .collect()
        };
        let partials = match pool(self.workers) {
            Ok(p) => p.install(scan),
            Err(_) => scan(),
        };
        let mut total = vec![ShellAccumulator::new(); n];
        for part in &partials {
            for (t, p) in total.iter_mut().zip(part) {
                if p.count == 0 {
                    continue;
                }
                if t.count == 0 {
                    *t = *p;
                } else {
                    t.merge(p);
                }
            }
        }
        total.iter().map(ShellAccumulator::stats).collect()
    }

    /// `γ_t f^t`: the vector of shell expectations.
    pub fn gamma(&self, f: &ExteriorObservable) -> AlgebraicObservable {
        AlgebraicObservable::new(self.shell_profile(f).into_iter().map(|s| s.mean).collect())
            .expect("bounded observables have finite shell means")
    }

    /// Whether `f^t` is constant on every shell.
    pub fn is_shell_measurable(&self, f: &ExteriorObservable) -> bool {
        self.shell_profile(f).iter().all(|s| s.min == s.max)
    }

    /// `E_x / V` per shell.
    pub fn energy_density(&self) -> AlgebraicObservable {
        let v = self.model.volume() as f64;
        AlgebraicObservable::new(self.shells.iter().map(|s| to_f64(&s.energy) / v).collect())
            .expect("labels are finite")
    }

    /// `n_x / V` per shell.
    pub fn number_density(&self) -> AlgebraicObservable {
        let v = self.model.volume() as f64;
        AlgebraicObservable::new(self.shells.iter().map(|s| to_f64(&s.number) / v).collect())
            .expect("labels are finite")
    }

    /// `shell_id,E,n,count` rows in canonical order, labels as exact rationals.
    pub fn census_csv(&self) -> String {
        let mut out = String::from("shell_id,E,n,count\n");
        for s in &self.shells {
            out.push_str(&format!(
                "{},{},{},{}\n",
                s.id,
                format_rational(&s.energy),
                format_rational(&s.number),
                s.count
            ));
        }
        out
    }
}

/// A probability distribution over configurations.
#[derive(Debug, Clone, PartialEq)]
pub enum GlobalDistribution {
    /// Weight per shell, uniform within each shell.
    ShellMixture(Vec<f64>),
    /// Weight per configuration index.
    Explicit(Vec<f64>),
}

fn check_probability(weights: &[f64]) -> Result<()> {
    if let Some(i) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::NotNormalized(format!("weight {} at position {i}", weights[i])));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > STATE_TOLERANCE {
        return Err(Error::NotNormalized(format!("weights sum to {total}")));
    }
    Ok(())
}

impl GlobalDistribution {
    pub fn shell_mixture(phase: &PhaseSpace, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != phase.len() {
            return Err(Error::DimensionMismatch { expected: phase.len(), got: weights.len() });
        }
        check_probability(&weights)?;
        Ok(Self::ShellMixture(weights))
    }

    pub fn explicit(phase: &PhaseSpace, weights: Vec<f64>) -> Result<Self> {
        if weights.len() as u64 != phase.total_configurations() {
            return Err(Error::DimensionMismatch {
                expected: phase.total_configurations() as usize,
                got: weights.len(),
            });
        }
        check_probability(&weights)?;
        Ok(Self::Explicit(weights))
    }

    pub fn from_state(state: &AlgebraicState) -> Self {
        Self::ShellMixture(state.weights().to_vec())
    }

    /// Uniform over all configurations.
    pub fn uniform(phase: &PhaseSpace) -> Self {
        Self::from_state(&AlgebraicState::configuration_uniform(phase))
    }

    /// Uniform over one shell.
    pub fn microcanonical(phase: &PhaseSpace, shell: usize) -> Self {
        Self::from_state(&AlgebraicState::point_mass(phase.len(), shell))
    }

    /// `E[f]` under this distribution.
    pub fn expect(&self, phase: &PhaseSpace, f: &ExteriorObservable) -> f64 {
        match self {
            Self::ShellMixture(w) => {
                let support: Vec<usize> = (0..w.len()).filter(|&x| w[x] > 0.0).collect();
                if support.len() == 1 {
                    return phase.shell_expectation(support[0], f);
                }
                let g = phase.gamma(f);
                w.iter().zip(g.values()).map(|(a, b)| a * b).sum()
            }
            Self::Explicit(w) => {
                let model = phase.model();
                let mut total = 0.0;
                scan_range(model.alphabet(), model.volume(), 0..phase.total_configurations(), |k, s| {
                    let p = w[k as usize];
                    if p != 0.0 {
                        total += p * f.eval(s);
                    }
                });
                total
            }
        }
    }
}

/// `μ_t`: the restriction of a global distribution to `Ŵ_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalState {
    system: Subvolume,
    global: Arc<GlobalDistribution>,
}

impl LocalState {
    pub fn system(&self) -> &Subvolume {
        &self.system
    }

    /// `μ_t(f^t)`; `f` must be an observable on this state's system.
    pub fn expect(&self, phase: &PhaseSpace, f: &ExteriorObservable) -> Result<f64> {
        if f.system().sites() != self.system.sites() {
            return Err(Error::Invalid(format!(
                "observable `{}` lives on `{}`, state on `{}`",
                f.name(),
                f.system().name(),
                self.system.name()
            )));
        }
        Ok(self.global.expect(phase, f))
    }
}

pub fn local_state_from_global(global: Arc<GlobalDistribution>, system: &Subvolume) -> LocalState {
    LocalState { system: system.clone(), global }
}

/// A net of local states over a poset, with the morphism strategy used to
/// compare them.
#[derive(Debug, Clone)]
pub struct Thread {
    states: Vec<LocalState>,
    strategy: MorphismStrategy,
}

impl Thread {
    pub fn states(&self) -> &[LocalState] {
        &self.states
    }

    pub fn strategy(&self) -> &MorphismStrategy {
        &self.strategy
    }
}

pub fn thread_from_global(
    global: Arc<GlobalDistribution>,
    poset: &SubvolumePoset,
    strategy: MorphismStrategy,
) -> Thread {
    Thread { states: poset.systems().iter().map(|s| local_state_from_global(global.clone(), s)).collect(), strategy }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneityRow {
    pub s: String,
    pub t: String,
    pub template: String,
    /// `μ_s(f^s)`
    pub lhs: f64,
    /// `μ_t(η̂ f^s)`
    pub rhs: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneityReport {
    pub strategy: &'static str,
    pub rows: Vec<HomogeneityRow>,
    /// `(s, t, template)` triples the strategy cannot map.
    pub skipped: Vec<(String, String, String)>,
}

impl HomogeneityReport {
    pub fn max_residual(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.residual))
    }
}

/// `|μ_s(f^s) - μ_t(η̂^t_s f^s)|` for every strict pair `s < t` and every
/// template defined on `s`. Pairs the strategy cannot embed are listed as
/// skipped.
pub fn check_homogeneity(
    phase: &PhaseSpace,
    thread: &Thread,
    poset: &SubvolumePoset,
    templates: &[QuantityTemplate],
) -> Result<HomogeneityReport> {
    if thread.states.len() != poset.len() {
        return Err(Error::DimensionMismatch { expected: poset.len(), got: thread.states.len() });
    }
    let model = phase.model();
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (s, t) in poset.strict_pairs() {
        let (sys_s, sys_t) = (&poset.systems()[s], &poset.systems()[t]);
        for template in templates.iter().filter(|tp| tp.in_domain(sys_s)) {
            let fs = template.realize(model, sys_s)?;
            let lifted = match embed(&thread.strategy, &fs, sys_t, model) {
                Err(Error::NotEmbeddable { .. }) => {
                    skipped.push((sys_s.name().to_string(), sys_t.name().to_string(), template.id()));
                    continue;
                }
                other => other?,
            };
            let lhs = thread.states[s].expect(phase, &fs)?;
            let rhs = thread.states[t].expect(phase, &lifted)?;
            rows.push(HomogeneityRow {
                s: sys_s.name().to_string(),
                t: sys_t.name().to_string(),
                template: template.id(),
                lhs,
                rhs,
                residual: (lhs - rhs).abs(),
            });
        }
    }
    Ok(HomogeneityReport { strategy: thread.strategy.label(), rows, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeGeometry;
    use num_rational::Ratio;

    fn int(v: i64) -> Rational {
        Ratio::from_integer(v)
    }

    fn ring4() -> ModelSpec {
        let g = LatticeGeometry::new(1, &[4], DEFAULT_ENUMERATION_CAP).unwrap();
        ModelSpec::ising(g, int(1), int(0)).unwrap()
    }

    fn sys(name: &str, sites: &[usize]) -> Subvolume {
        Subvolume::new(name, sites.iter().copied(), 4).unwrap()
    }

    fn census(p: &PhaseSpace) -> Vec<(i64, i64, u64)> {
        p.shells().iter().map(|s| (s.energy().to_integer(), s.number().to_integer(), s.count())).collect()
    }

    #[test]
    fn ring_census_against_brute_force() {
        let m = ring4();
        let p = enumerate_shells(&m, &EnumerationOptions::default()).unwrap();
        // Independent scan: count bonds by hand.
        let mut brute: BTreeMap<(i64, i64), u64> = BTreeMap::new();
        for k in 0..16u32 {
            let s: Vec<i64> = (0..4).map(|i| if k >> (3 - i) & 1 == 1 { 1 } else { -1 }).collect();
            let e = -(0..4).map(|i| s[i] * s[(i + 1) % 4]).sum::<i64>();
            *brute.entry((e, s.iter().sum())).or_default() += 1;
        }
        let want: Vec<_> = brute.into_iter().map(|((e, n), c)| (e, n, c)).collect();
        assert_eq!(census(&p), want);
        assert_eq!(census(&p), vec![(-4, -4, 1), (-4, 4, 1), (0, -2, 4), (0, 0, 4), (0, 2, 4), (4, 0, 2)]);
        assert_eq!(p.total_configurations(), 16);
    }

    #[test]
    fn census_csv_format() {
        let p = enumerate_shells(&ring4(), &EnumerationOptions::default()).unwrap();
        assert_eq!(p.census_csv(), "shell_id,E,n,count\n0,-4,-4,1\n1,-4,4,1\n2,0,-2,4\n3,0,0,4\n4,0,2,4\n5,4,0,2\n");
    }

    #[test]
    fn flip_symmetry_and_partition() {
        let g = LatticeGeometry::new(2, &[2, 2], DEFAULT_ENUMERATION_CAP).unwrap();
        let torus = ModelSpec::ising(g, int(1), int(0)).unwrap();
        let p = enumerate_shells(&torus, &EnumerationOptions::default()).unwrap();
        assert_eq!(p.shells().iter().map(Shell::count).sum::<u64>(), 16);
        for s in p.shells() {
            let mirror = p.find(s.energy(), -s.number()).unwrap();
            assert_eq!(p.shell(mirror).count(), s.count());
        }
    }

    #[test]
    fn stored_and_scanned_members_agree() {
        let m = ring4();
        let stored = enumerate_shells(&m, &EnumerationOptions { store_members: true, ..Default::default() }).unwrap();
        let plain = enumerate_shells(&m, &EnumerationOptions::default()).unwrap();
        for id in 0..6 {
            let a: Vec<_> = stored.members(id).collect();
            let b: Vec<_> = plain.members(id).collect();
            assert_eq!(a, b);
            assert_eq!(a.len() as u64, plain.shell(id).count());
            for c in a {
                assert_eq!(plain.shell_of(c.symbols()), id);
            }
        }
        let budget =
            enumerate_shells(&m, &EnumerationOptions { store_members: true, member_budget: 2, ..Default::default() })
                .unwrap();
        assert!(budget.shell(3).stored_members().is_none());
        assert!(budget.shell(5).stored_members().is_some());
    }

    #[test]
    fn worker_count_does_not_change_result() {
        let g = LatticeGeometry::new(1, &[10], DEFAULT_ENUMERATION_CAP).unwrap();
        let m = ModelSpec::ising(g, int(1), Ratio::new(1, 3)).unwrap();
        let one = enumerate_shells(&m, &EnumerationOptions::default()).unwrap();
        for workers in [2, 3, 4] {
            let k = enumerate_shells(&m, &EnumerationOptions { workers, ..Default::default() }).unwrap();
            assert_eq!(k, one);
            assert_eq!(k.census_csv(), one.census_csv());
        }
    }

    #[test]
    fn shell_expectation_examples() {
        let m = ring4();
        let p = enumerate_shells(&m, &EnumerationOptions::default()).unwrap();
        let f = ExteriorObservable::spin_at(&m, &sys("t", &[0]), 1).unwrap();
        let id = |e, n| p.find(int(e), int(n)).unwrap();
        assert_eq!(p.shell_expectation(id(-4, 4), &f), 1.0);
        assert_eq!(p.shell_expectation(id(0, 2), &f), 0.5);
        assert_eq!(p.shell_expectation(id(4, 0), &f), 0.0);
    }

    #[test]
    fn gamma_examples() {
        let m = ring4();
        let p = enumerate_shells(&m, &EnumerationOptions::default()).unwrap();
        let t = sys("t", &[0]);
        let f = ExteriorObservable::spin_at(&m, &t, 1).unwrap();
        let g = p.gamma(&f);
        // Keyed by label: (-4,4)→1, (-4,-4)→-1, (0,2)→1/2, (0,-2)→-1/2, (0,0)→0, (4,0)→0.
        for ((e, n), want) in
            [((-4, 4), 1.0), ((-4, -4), -1.0), ((0, 2), 0.5), ((0, -2), -0.5), ((0, 0), 0.0), ((4, 0), 0.0)]
        {
            assert_eq!(g.get(p.find(int(e), int(n)).unwrap()), want);
        }
        let c = ExteriorObservable::constant(&m, &t, 2.5).unwrap();
        assert_eq!(p.gamma(&c), AlgebraicObservable::constant(6, 2.5).unwrap());
        let h = ExteriorObservable::spin_at(&m, &t, 3).unwrap();
        let combo = ExteriorObservable::linear_combination(2.0, &f, -3.0, &h, &m).unwrap();
        let lhs = p.gamma(&combo);
        let rhs = g.scale(2.0).unwrap().add(&p.gamma(&h).scale(-3.0).unwrap()).unwrap();
        for x in 0..6 {
            assert!((lhs.get(x) - rhs.get(x)).abs() < 1e-12);
        }
        for x in 0..6 {
            assert_eq!(g.get(x), p.shell_expectation(x, &f));
        }
    }

    #[test]
    fn local_state_examples() {
        let m = ring4();
        let p = enumerate_shells(&m, &EnumerationOptions::default()).unwrap();
        let t = sys("t", &[0]);
        let f = ExteriorObservable::spin_at(&m, &t, 1).unwrap();
        let top = p.find(int(-4), int(4)).unwrap();
        let mc = local_state_from_global(Arc::new(GlobalDistribution::microcanonical(&p, top)), &t);
        assert_eq!(mc.expect(&p, &f).unwrap(), 1.0);
        let uniform = local_state_from_global(Arc::new(GlobalDistribution::uniform(&p)), &t);
        for site in 1..4 {
            let s = ExteriorObservable::spin_at(&m, &t, site).unwrap();
            assert_eq!(uniform.expect(&p, &s).unwrap(), 0.0);
        }
        let explicit = GlobalDistribution::explicit(&p, vec![1.0 / 16.0; 16]).unwrap();
        let ex = local_state_from_global(Arc::new(explicit), &t);
        assert_eq!(ex.expect(&p, &f).unwrap(), 0.0);
        let one = ExteriorObservable::constant(&m, &t, 1.0).unwrap();
        for st in [&mc, &uniform, &ex] {
            assert_eq!(st.expect(&p, &one).unwrap(), 1.0);
        }
        assert!(matches!(GlobalDistribution::explicit(&p, vec![0.1; 16]), Err(Error::NotNormalized(_))));
        assert!(GlobalDistribution::shell_mixture(&p, vec![0.5; 6]).is_err());
        let other = ExteriorObservable::spin_at(&m, &sys("u", &[3]), 1).unwrap();
        assert!(mc.expect(&p, &other).is_err());
    }

    #[test]
    fn homogeneity_examples() {
        let m = ring4();
        let p = enumerate_shells(&m, &EnumerationOptions::default()).unwrap();
        let poset = SubvolumePoset::new(vec![sys("a", &[0]), sys("b", &[0, 1])]).unwrap();
        let zero_shell = p.find(int(0), int(0)).unwrap();
        let global = Arc::new(GlobalDistribution::microcanonical(&p, zero_shell));
        let thread = thread_from_global(global, &poset, MorphismStrategy::IdentityEmbedding);
        let report =
            check_homogeneity(&p, &thread, &poset, &[QuantityTemplate::SpinAt(2), QuantityTemplate::SpinAt(3)])
                .unwrap();
        assert_eq!(report.rows.len(), 2);
        assert_eq!(report.max_residual(), 0.0);

        let skip = check_homogeneity(&p, &thread, &poset, &[QuantityTemplate::SpinAt(1)]).unwrap();
        assert!(skip.rows.is_empty());
        assert_eq!(skip.skipped, vec![("a".to_string(), "b".to_string(), "spin_at(1)".to_string())]);

        let uniform = Arc::new(GlobalDistribution::uniform(&p));
        let ce = thread_from_global(
            uniform,
            &poset,
            MorphismStrategy::ConditionalExpectation(crate::texture::Reference::uniform(&m)),
        );
        let report = check_homogeneity(
            &p,
            &ce,
            &poset,
            &[QuantityTemplate::SpinAt(1), QuantityTemplate::MeanExteriorSpin, QuantityTemplate::ExteriorBondEnergy],
        )
        .unwrap();
        assert!(report.max_residual() <= 1e-12);
    }
}
