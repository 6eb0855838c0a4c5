//! Functions on the finite phase space `X` and the structures built on them.
//!
//! Everything here is indexed by canonical shell id. An
//! [`AlgebraicObservable`] is a real vector over shells and an
//! [`Idempotent`] is a subset of shells. A [`PValuedMeasure`] assigns
//! idempotents to the cells of a finite partition of the real line.

use std::fmt;

use crate::bitset::BitSet;
use crate::borel::{Interval, RealSet};
use crate::ensemble::PhaseSpace;
use crate::error::{Error, Result};
use crate::rational::to_f64;

/// Normalization tolerance for states.
pub const STATE_TOLERANCE: f64 = 1e-12;

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// An element of `C(X)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraicObservable {
    values: Vec<f64>,
}

impl AlgebraicObservable {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(x) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("observable value at shell {x} is not finite")));
        }
        // -0.0 and 0.0 are the same value of f.
        Ok(Self { values: values.into_iter().map(|v| v + 0.0).collect() })
    }

    pub fn constant(len: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; len])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, shell: usize) -> f64 {
        self.values[shell]
    }

    /// Sorted distinct values of `f` on `X`.
    pub fn distinct_values(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    pub fn map(&self, g: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.values.iter().map(|&v| g(v)).collect())
    }

    fn zip(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        check_len(self.len(), other.len())?;
        Self::new(self.values.iter().zip(&other.values).map(|(&a, &b)| op(a, b)).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        self.map(|v| c * v)
    }

    /// Shells where `f` takes a value in `values`.
    pub fn level_set(&self, values: &[f64]) -> Idempotent {
        Idempotent::from_shells(self.len(), (0..self.len()).filter(|&x| values.contains(&self.values[x])))
    }

    pub fn preimage(&self, set: &RealSet) -> Idempotent {
        Idempotent::from_shells(self.len(), (0..self.len()).filter(|&x| set.contains(self.values[x])))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// A characteristic function `χ_F`, `F ⊆ X`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Idempotent {
    set: BitSet,
}

impl fmt::Debug for Idempotent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "χ{:?}", self.set)
    }
}

impl Idempotent {
    pub fn zero(len: usize) -> Self {
        Self { set: BitSet::empty(len) }
    }

    pub fn one(len: usize) -> Self {
        Self { set: BitSet::full(len) }
    }

    pub fn from_shells(len: usize, shells: impl IntoIterator<Item = usize>) -> Self {
        Self { set: BitSet::from_indices(len, shells) }
    }

    pub fn from_set(set: BitSet) -> Self {
        Self { set }
    }

    pub fn singleton(len: usize, shell: usize) -> Self {
        Self { set: BitSet::singleton(len, shell) }
    }

    pub fn set(&self) -> &BitSet {
        &self.set
    }

    pub fn universe(&self) -> usize {
        self.set.universe()
    }

    pub fn contains(&self, shell: usize) -> bool {
        self.set.contains(shell)
    }

    pub fn shells(&self) -> Vec<usize> {
        self.set.iter().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.set.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.set.is_full()
    }

    /// `self ≤ other` in the Boolean order.
    pub fn le(&self, other: &Self) -> bool {
        self.set.is_subset(&other.set)
    }

    pub fn join(&self, other: &Self) -> Result<Self> {
        check_len(self.universe(), other.universe())?;
        Ok(Self { set: self.set.union(&other.set) })
    }

    pub fn meet(&self, other: &Self) -> Result<Self> {
        check_len(self.universe(), other.universe())?;
        Ok(Self { set: self.set.intersection(&other.set) })
    }

    pub fn complement(&self) -> Self {
        Self { set: self.set.complement() }
    }

    /// `χ_E - χ_F` when `F ≤ E`, i.e. `E \ F`.
    pub fn minus(&self, other: &Self) -> Result<Self> {
        check_len(self.universe(), other.universe())?;
        Ok(Self { set: self.set.difference(&other.set) })
    }

    /// Join of a family; the zero idempotent for an empty family.
    pub fn big_join<'a>(len: usize, family: impl IntoIterator<Item = &'a Idempotent>) -> Result<Self> {
        family.into_iter().try_fold(Self::zero(len), |acc, e| acc.join(e))
    }

    /// Meet of a family; the unit for an empty family.
    pub fn big_meet<'a>(len: usize, family: impl IntoIterator<Item = &'a Idempotent>) -> Result<Self> {
        family.into_iter().try_fold(Self::one(len), |acc, e| acc.meet(e))
    }

    pub fn as_observable(&self) -> AlgebraicObservable {
        AlgebraicObservable { values: (0..self.universe()).map(|x| if self.contains(x) { 1.0 } else { 0.0 }).collect() }
    }

    pub fn to_hex(&self) -> String {
        self.set.to_hex()
    }
}

/// `true` iff `f` takes values in {0,1} and `f·f = f`.
pub fn is_idempotent(f: &AlgebraicObservable) -> bool {
    f.values().iter().all(|&v| v == 0.0 || v == 1.0) && f.mul(f).is_ok_and(|sq| sq == *f)
}

/// A probability vector over shells: the measure representing a state.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraicState {
    weights: Vec<f64>,
}

impl AlgebraicState {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::NotNormalized("no shells".into()));
        }
        if let Some(x) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::NotNormalized(format!("weight {} at shell {x}", weights[x])));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > STATE_TOLERANCE {
            return Err(Error::NotNormalized(format!("weights sum to {total}")));
        }
        Ok(Self { weights })
    }

    pub fn point_mass(len: usize, shell: usize) -> Self {
        let mut weights = vec![0.0; len];
        weights[shell] = 1.0;
        Self { weights }
    }

    /// Weights proportional to the shell sizes: the uniform measure on configurations.
    pub fn configuration_uniform(phase: &PhaseSpace) -> Self {
        let total = phase.total_configurations() as f64;
        Self { weights: phase.shells().iter().map(|s| s.count() as f64 / total).collect() }
    }

    /// `Σ t_n σ_n` for nonnegative weights summing to one.
    pub fn mixture(states: &[AlgebraicState], coefficients: &[f64]) -> Result<Self> {
        check_len(states.len(), coefficients.len())?;
        let first = states.first().ok_or_else(|| Error::Invalid("empty state family".into()))?;
        if coefficients.iter().any(|&t| !t.is_finite() || t < 0.0) {
            return Err(Error::NotNormalized(format!("negative mixture weight in {coefficients:?}")));
        }
        let total: f64 = coefficients.iter().sum();
        if (total - 1.0).abs() > STATE_TOLERANCE {
            return Err(Error::NotNormalized(format!("mixture weights sum to {total}")));
        }
        let mut weights = vec![0.0; first.len()];
        for (s, &t) in states.iter().zip(coefficients) {
            check_len(first.len(), s.len())?;
            for (w, &p) in weights.iter_mut().zip(&s.weights) {
                *w += t * p;
            }
        }
        Self::new(weights)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `ζ(f) = Σ_x f(x) σ(x)`.
    pub fn expectation(&self, f: &AlgebraicObservable) -> Result<f64> {
        check_len(self.len(), f.len())?;
        Ok(self.weights.iter().zip(f.values()).map(|(w, v)| w * v).sum())
    }

    /// `ζ(χ_F) = σ(F)`.
    pub fn probability(&self, e: &Idempotent) -> Result<f64> {
        check_len(self.len(), e.universe())?;
        Ok(e.set().iter().map(|x| self.weights[x]).sum())
    }

    /// `ζ(f²) - ζ(f)²`.
    pub fn variance(&self, f: &AlgebraicObservable) -> Result<f64> {
        let mean = self.expectation(f)?;
        Ok(self.expectation(&f.mul(f)?)? - mean * mean)
    }

    /// `ζ(χ_x χ_y) = ζ(χ_x) ζ(χ_y)` for every pair of basis idempotents.
    pub fn is_multiplicative(&self) -> bool {
        let n = self.len();
        (0..n).all(|x| {
            (0..n).all(|y| {
                let joint = if x == y { self.weights[x] } else { 0.0 };
                (joint - self.weights[x] * self.weights[y]).abs() <= STATE_TOLERANCE
            })
        })
    }

    pub fn point_mass_shell(&self) -> Option<usize> {
        self.weights.iter().position(|&w| (w - 1.0).abs() <= STATE_TOLERANCE)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&x| self.weights[x] > 0.0).collect()
    }

    /// The unique barycentric decomposition over point masses: `(weight, shell)`.
    pub fn extreme_decomposition(&self) -> Vec<(f64, usize)> {
        self.support().into_iter().map(|x| (self.weights[x], x)).collect()
    }

    /// An idempotent with positive variance, when the support has two or more shells.
    pub fn variance_witness(&self) -> Option<Idempotent> {
        let support = self.support();
        (support.len() >= 2).then(|| Idempotent::singleton(self.len(), support[0]))
    }
}

/// `σ(x) ∝ |S_x| exp(-β E_x + λ n_x)`.
///
/// The exponent is shifted by its maximum before exponentiating, so large
/// `β` or `λ` underflow harmlessly instead of overflowing.
pub fn gibbs_state(phase: &PhaseSpace, beta: f64, lambda_n: f64) -> Result<AlgebraicState> {
    if !beta.is_finite() || !lambda_n.is_finite() {
        return Err(Error::Invalid(format!("gibbs parameters must be finite, got beta={beta}, lambda_N={lambda_n}")));
    }
    let exponents: Vec<f64> = phase
        .shells()
        .iter()
        .map(|s| {
            let e = if beta == 0.0 { 0.0 } else { -beta * to_f64(&s.energy()) };
            let n = if lambda_n == 0.0 { 0.0 } else { lambda_n * to_f64(&s.number()) };
            e + n
        })
        .collect();
    let top = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> =
        phase.shells().iter().zip(&exponents).map(|(s, &a)| s.count() as f64 * (a - top).exp()).collect();
    let total: f64 = raw.iter().sum();
    AlgebraicState::new(raw.into_iter().map(|w| w / total).collect())
}

/// Cells of the partition of ℝ induced by sorted breakpoints `v_1 < … < v_k`.
/// Even cell `2i` is the open gap `(v_i, v_{i+1})` and odd cell `2i+1` is the
/// point `{v_{i+1}}`. The last cell `2k` is `(v_k, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValuePartition {
    breakpoints: Vec<f64>,
}

impl ValuePartition {
    pub fn new(breakpoints: Vec<f64>) -> Result<Self> {
        if breakpoints.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("breakpoints must be finite".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("breakpoints must be strictly increasing".into()));
        }
        Ok(Self { breakpoints: breakpoints.into_iter().map(|v| v + 0.0).collect() })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn cell_count(&self) -> usize {
        2 * self.breakpoints.len() + 1
    }

    pub fn cell_interval(&self, cell: usize) -> Interval {
        let k = self.breakpoints.len();
        let lo = if cell == 0 { f64::NEG_INFINITY } else { self.breakpoints[(cell - 1) / 2] };
        let hi = if cell == 2 * k { f64::INFINITY } else { self.breakpoints[cell / 2] };
        let point = cell % 2 == 1;
        Interval::new(lo, hi, point, point).expect("partition cells are well formed")
    }

    /// The cell containing `v`.
    pub fn cell_of(&self, v: f64) -> usize {
        match self.breakpoints.binary_search_by(|b| b.total_cmp(&(v + 0.0))) {
            Ok(i) => 2 * i + 1,
            Err(i) => 2 * i,
        }
    }

    /// Cells lying inside `set`: points by membership, gaps by inclusion.
    pub fn cells_of(&self, set: &RealSet) -> BitSet {
        BitSet::from_indices(self.cell_count(), (0..self.cell_count()).filter(|&c| set.covers(&self.cell_interval(c))))
    }
}

/// A P-valued measure on a finite cell algebra of ℝ.
#[derive(Debug, Clone, PartialEq)]
pub struct PValuedMeasure {
    partition: ValuePartition,
    cells: Vec<Idempotent>,
    universe: usize,
}

impl PValuedMeasure {
    pub fn new(partition: ValuePartition, cells: Vec<Idempotent>, universe: usize) -> Result<Self> {
        check_len(partition.cell_count(), cells.len())?;
        for c in &cells {
            check_len(universe, c.universe())?;
        }
        Ok(Self { partition, cells, universe })
    }

    /// `Q^f(B) = χ_[f ∈ B]`, on the partition by the distinct values of `f`.
    pub fn of_observable(f: &AlgebraicObservable) -> Self {
        let partition = ValuePartition { breakpoints: f.distinct_values() };
        let mut cells = vec![Idempotent::zero(f.len()); partition.cell_count()];
        for (x, &v) in f.values().iter().enumerate() {
            cells[partition.cell_of(v)].set.insert(x);
        }
        Self { partition, cells, universe: f.len() }
    }

    pub fn partition(&self) -> &ValuePartition {
        &self.partition
    }

    pub fn cells(&self) -> &[Idempotent] {
        &self.cells
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    /// `Q(∪ cells) = ∨ Q(cell)`.
    pub fn eval_cells(&self, cells: &BitSet) -> Result<Idempotent> {
        check_len(self.partition.cell_count(), cells.universe())?;
        Idempotent::big_join(self.universe, cells.iter().map(|c| &self.cells[c]))
    }

    pub fn eval(&self, set: &RealSet) -> Idempotent {
        self.eval_cells(&self.partition.cells_of(set)).expect("cells_of matches the partition")
    }

    /// `Q(∅) = 0`, `Q(ℝ) = 1`, and distinct cells carry disjoint idempotents.
    pub fn satisfies_axioms(&self) -> bool {
        let n = self.partition.cell_count();
        let empty = self.eval_cells(&BitSet::empty(n)).is_ok_and(|e| e.is_zero());
        let full = self.eval_cells(&BitSet::full(n)).is_ok_and(|e| e.is_one());
        let disjoint = (0..n).all(|a| (a + 1..n).all(|b| self.cells[a].set.is_disjoint(&self.cells[b].set)));
        empty && full && disjoint
    }

    /// Nonzero point cells as `(value, idempotent)`.
    pub fn atoms(&self) -> Vec<(f64, &Idempotent)> {
        self.partition
            .breakpoints
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, &self.cells[2 * i + 1]))
            .filter(|(_, e)| !e.is_zero())
            .collect()
    }

    /// Equal as maps on Borel sets: same nonzero atoms and no mass on gaps.
    /// Representations may differ by unused breakpoints.
    pub fn same_measure(&self, other: &Self) -> bool {
        let gaps_empty = |q: &Self| q.cells.iter().step_by(2).all(Idempotent::is_zero);
        gaps_empty(self) && gaps_empty(other) && self.atoms() == other.atoms()
    }
}

pub fn q_measure_of(f: &AlgebraicObservable) -> PValuedMeasure {
    PValuedMeasure::of_observable(f)
}

/// The `f` with `Q = Q^f`: each shell takes the value of the point cell
/// whose idempotent contains it.
pub fn observable_from_measure(q: &PValuedMeasure) -> Result<AlgebraicObservable> {
    let mut values: Vec<Option<f64>> = vec![None; q.universe];
    for (cell, e) in q.cells.iter().enumerate() {
        if e.is_zero() {
            continue;
        }
        if cell % 2 == 0 {
            return Err(Error::NotObservableMeasure(format!(
                "open cell {} carries shells {:?}",
                q.partition.cell_interval(cell),
                e.shells()
            )));
        }
        let v = q.partition.breakpoints[cell / 2];
        for x in e.set.iter() {
            if let Some(prev) = values[x] {
                return Err(Error::NotObservableMeasure(format!("shell {x} lies in cells {{{prev}}} and {{{v}}}")));
            }
            values[x] = Some(v);
        }
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(x, v)| v.ok_or_else(|| Error::NotObservableMeasure(format!("shell {x} lies in no cell"))))
        .collect::<Result<Vec<_>>>()?;
    AlgebraicObservable::new(values)
}

/// `λ_1 < … < λ_k` with the chain `Q^f(λ_i) = χ_[f ≤ λ_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralChain {
    steps: Vec<(f64, Idempotent)>,
    universe: usize,
}

impl SpectralChain {
    pub fn steps(&self) -> &[(f64, Idempotent)] {
        &self.steps
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.0).collect()
    }

    /// The chain is increasing and ends at the unit.
    pub fn is_monotone(&self) -> bool {
        self.steps.windows(2).all(|w| w[0].1.le(&w[1].1))
            && self.steps.last().map_or(self.universe == 0, |s| s.1.is_one())
    }

    /// `Σ_i λ_i (Q(λ_i) - Q(λ_{i-1}))`.
    pub fn reconstruct(&self) -> Result<AlgebraicObservable> {
        let mut values = vec![0.0; self.universe];
        let mut previous = Idempotent::zero(self.universe);
        for (lambda, cumulative) in &self.steps {
            let increment = cumulative.minus(&previous)?.as_observable();
            for (v, inc) in values.iter_mut().zip(increment.values()) {
                *v += lambda * inc;
            }
            previous = cumulative.clone();
        }
        AlgebraicObservable::new(values)
    }

    /// `lambda,bitset_hex` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,bitset_hex\n");
        for (lambda, e) in &self.steps {
            out.push_str(&format!("{lambda},{}\n", e.to_hex()));
        }
        out
    }
}

pub fn spectral_decomposition(f: &AlgebraicObservable) -> SpectralChain {
    let steps = f
        .distinct_values()
        .into_iter()
        .map(|lambda| {
            let below = Idempotent::from_shells(f.len(), (0..f.len()).filter(|&x| f.get(x) <= lambda));
            (lambda, below)
        })
        .collect();
    SpectralChain { steps, universe: f.len() }
}
