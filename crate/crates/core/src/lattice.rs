//! Finite periodic lattices and the nearest-neighbour model on their configurations.
//!
//! The ambient region is a d-dimensional torus. Site indices run over
//! `0..V` with axis 0 varying fastest. Configurations are enumerated in
//! lexicographic order of their symbol arrays, so index `k` is the base-`q`
//! expansion of `k` with site 0 as the most significant digit.

use std::collections::BTreeSet;
use std::ops::Range;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::rational::{common_denominator, scaled_integer, to_f64, Rational};

/// Default bound on `q^V` for exact enumeration.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 26;

pub const MAX_ALPHABET: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeGeometry {
    lengths: Vec<usize>,
    volume: usize,
    neighbors: Vec<Vec<usize>>,
    bonds: Vec<(usize, usize)>,
}

impl LatticeGeometry {
    /// Builds a periodic geometry, rejecting volumes whose smallest
    /// configuration space (`2^V`) already exceeds `cap`.
    pub fn new(dimension: usize, lengths: &[usize], cap: u64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Geometry("dimension must be at least 1".into()));
        }
        if lengths.len() != dimension {
            return Err(Error::Geometry(format!("dimension {dimension} but {} lengths given", lengths.len())));
        }
        if let Some(bad) = lengths.iter().find(|&&l| l < 2) {
            return Err(Error::Geometry(format!("every length must be >= 2, got {bad}")));
        }
        let volume =
            lengths.iter().try_fold(1usize, |acc, &l| acc.checked_mul(l)).ok_or(Error::Overflow("lattice volume"))?;
        let binary_configs = if volume >= 128 { u128::MAX } else { 1u128 << volume };
        if binary_configs > u128::from(cap) {
            return Err(Error::CapExceeded { configs: binary_configs, cap });
        }

        let mut strides = Vec::with_capacity(dimension);
        let mut stride = 1;
        for &l in lengths {
            strides.push(stride);
            stride *= l;
        }
        let mut neighbors = Vec::with_capacity(volume);
        let mut bonds = Vec::with_capacity(volume * dimension);
        for site in 0..volume {
            let mut around = Vec::with_capacity(2 * dimension);
            for (&l, &st) in lengths.iter().zip(&strides) {
                let c = (site / st) % l;
                let base = site - c * st;
                let down = base + ((c + l - 1) % l) * st;
                let up = base + ((c + 1) % l) * st;
                around.push(down);
                around.push(up);
                bonds.push((site, up));
            }
            neighbors.push(around);
        }
        Ok(Self { lengths: lengths.to_vec(), volume, neighbors, bonds })
    }

    pub fn dimension(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    pub fn volume(&self) -> usize {
        self.volume
    }

    /// The `2d` neighbours of `site`, with multiplicity for length-2 axes.
    pub fn neighbors(&self, site: usize) -> &[usize] {
        &self.neighbors[site]
    }

    /// One bond per (site, axis): `(i, i + e_axis)`.
    pub fn bonds(&self) -> &[(usize, usize)] {
        &self.bonds
    }

    pub fn coordinates(&self, mut site: usize) -> Vec<usize> {
        self.lengths
            .iter()
            .map(|&l| {
                let c = site % l;
                site /= l;
                c
            })
            .collect()
    }

    pub fn site_at(&self, coords: &[usize]) -> usize {
        let mut site = 0;
        for (&c, &l) in coords.iter().zip(&self.lengths).rev() {
            site = site * l + (c % l);
        }
        site
    }

    /// Site reached from `site` by a cyclic shift of one step along `axis`.
    pub fn translate(&self, site: usize, axis: usize) -> usize {
        let mut c = self.coordinates(site);
        c[axis] = (c[axis] + 1) % self.lengths[axis];
        self.site_at(&c)
    }
}

/// One symbol per site, each in `[0, q)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    symbols: Box<[u8]>,
}

impl Configuration {
    pub fn new(symbols: Vec<u8>, alphabet: usize) -> Result<Self> {
        if let Some(&s) = symbols.iter().find(|&&s| usize::from(s) >= alphabet) {
            return Err(Error::Configuration(format!("symbol {s} outside alphabet of size {alphabet}")));
        }
        Ok(Self { symbols: symbols.into_boxed_slice() })
    }

    /// Decodes the lexicographic index `index` into `volume` base-`alphabet` digits.
    pub fn from_index(mut index: u64, alphabet: usize, volume: usize) -> Self {
        let q = alphabet as u64;
        let mut symbols = vec![0u8; volume];
        for slot in symbols.iter_mut().rev() {
            *slot = (index % q) as u8;
            index /= q;
        }
        Self { symbols: symbols.into_boxed_slice() }
    }

    pub fn index(&self, alphabet: usize) -> u64 {
        self.symbols.iter().fold(0u64, |acc, &s| acc * alphabet as u64 + u64::from(s))
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Nearest-neighbour model on a periodic lattice:
/// `H = -J * sum_{active bonds} s_i s_j - h * sum_i s_i`, `N = sum_i s_i`.
///
/// Energies and numbers are kept as exact integers over fixed model-wide
/// denominators (`energy_scale`, `number_scale`).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    geometry: LatticeGeometry,
    spins: Vec<Rational>,
    coupling: Rational,
    field: Rational,
    decoupled: BTreeSet<usize>,
    active_bonds: Vec<(usize, usize)>,
    spin_units: Vec<i64>,
    number_scale: i64,
    energy_scale: i64,
    bond_coefficient: i64,
    field_coefficient: i64,
}

impl ModelSpec {
    pub fn new(
        geometry: LatticeGeometry,
        spins: Vec<Rational>,
        coupling: Rational,
        field: Rational,
        decoupled: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let alphabet = spins.len();
        if !(2..=MAX_ALPHABET).contains(&alphabet) {
            return Err(Error::Model(format!("alphabet size must be in 2..={MAX_ALPHABET}, got {alphabet}")));
        }
        let decoupled: BTreeSet<usize> = decoupled.into_iter().collect();
        if let Some(&s) = decoupled.iter().find(|&&s| s >= geometry.volume()) {
            return Err(Error::Model(format!("decoupled site {s} outside lattice of volume {}", geometry.volume())));
        }
        let active_bonds: Vec<(usize, usize)> = geometry
            .bonds()
            .iter()
            .copied()
            .filter(|(i, j)| !decoupled.contains(i) && !decoupled.contains(j))
            .collect();

        let overflow = || Error::Model("coefficients too large for exact integer energies".into());
        let number_scale = common_denominator(spins.iter()).ok_or_else(overflow)?;
        let spin_units: Vec<i64> =
            spins.iter().map(|s| scaled_integer(s, number_scale).ok_or_else(overflow)).collect::<Result<_>>()?;
        let ds2 = number_scale.checked_mul(number_scale).ok_or_else(overflow)?;
        let energy_scale = common_denominator(
            [
                Ratio::new(1, coupling.denom().checked_mul(ds2).ok_or_else(overflow)?),
                Ratio::new(1, field.denom().checked_mul(number_scale).ok_or_else(overflow)?),
            ]
            .iter(),
        )
        .ok_or_else(overflow)?;
        let bond_coefficient =
            scaled_integer(&(coupling / Ratio::from_integer(ds2)), energy_scale).ok_or_else(overflow)?;
        let field_coefficient =
            scaled_integer(&(field / Ratio::from_integer(number_scale)), energy_scale).ok_or_else(overflow)?;

        // Worst-case magnitudes must fit in i64.
        let max_unit = spin_units.iter().map(|u| i128::from(*u).abs()).max().unwrap_or(0);
        let pair_max = max_unit * max_unit * active_bonds.len() as i128;
        let sum_max = max_unit * geometry.volume() as i128;
        let energy_max = i128::from(bond_coefficient).abs() * pair_max + i128::from(field_coefficient).abs() * sum_max;
        if energy_max > i128::from(i64::MAX) {
            return Err(overflow());
        }

        Ok(Self {
            geometry,
            spins,
            coupling,
            field,
            decoupled,
            active_bonds,
            spin_units,
            number_scale,
            energy_scale,
            bond_coefficient,
            field_coefficient,
        })
    }

    /// Ising spins: symbol 0 is -1, symbol 1 is +1.
    pub fn ising(geometry: LatticeGeometry, coupling: Rational, field: Rational) -> Result<Self> {
        Self::new(geometry, vec![Ratio::from_integer(-1), Ratio::from_integer(1)], coupling, field, [])
    }

    /// Occupation numbers: symbol 0 is empty, symbol 1 is occupied.
    pub fn lattice_gas(geometry: LatticeGeometry, coupling: Rational, field: Rational) -> Result<Self> {
        Self::new(geometry, vec![Ratio::from_integer(0), Ratio::from_integer(1)], coupling, field, [])
    }

    pub fn with_decoupled(self, sites: impl IntoIterator<Item = usize>) -> Result<Self> {
        let sites: BTreeSet<usize> = self.decoupled.iter().copied().chain(sites).collect();
        Self::new(self.geometry, self.spins, self.coupling, self.field, sites)
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geometry
    }

    pub fn volume(&self) -> usize {
        self.geometry.volume()
    }

    pub fn alphabet(&self) -> usize {
        self.spins.len()
    }

    pub fn spins(&self) -> &[Rational] {
        &self.spins
    }

    pub fn coupling(&self) -> Rational {
        self.coupling
    }

    pub fn field(&self) -> Rational {
        self.field
    }

    pub fn decoupled(&self) -> &BTreeSet<usize> {
        &self.decoupled
    }

    pub fn active_bonds(&self) -> &[(usize, usize)] {
        &self.active_bonds
    }

    pub fn spin_f64(&self, symbol: u8) -> f64 {
        to_f64(&self.spins[usize::from(symbol)])
    }

    /// Denominator of every energy label.
    pub fn energy_scale(&self) -> i64 {
        self.energy_scale
    }

    /// Denominator of every conserved-number label.
    pub fn number_scale(&self) -> i64 {
        self.number_scale
    }

    /// `H * energy_scale`, exact.
    pub fn energy_key(&self, symbols: &[u8]) -> i64 {
        let pairs: i64 = self
            .active_bonds
            .iter()
            .map(|&(i, j)| self.spin_units[usize::from(symbols[i])] * self.spin_units[usize::from(symbols[j])])
            .sum();
        -self.bond_coefficient * pairs - self.field_coefficient * self.number_key(symbols)
    }

    /// `N * number_scale`, exact.
    pub fn number_key(&self, symbols: &[u8]) -> i64 {
        symbols.iter().map(|&s| self.spin_units[usize::from(s)]).sum()
    }

    pub fn energy(&self, config: &Configuration) -> Rational {
        Ratio::new(self.energy_key(config.symbols()), self.energy_scale)
    }

    pub fn conserved_number(&self, config: &Configuration) -> Rational {
        Ratio::new(self.number_key(config.symbols()), self.number_scale)
    }

    pub fn energy_label(&self, key: i64) -> Rational {
        Ratio::new(key, self.energy_scale)
    }

    pub fn number_label(&self, key: i64) -> Rational {
        Ratio::new(key, self.number_scale)
    }

    /// Energy of a single bond, `-J s_i s_j`, as a float.
    pub fn bond_energy_f64(&self, a: u8, b: u8) -> f64 {
        -to_f64(&self.coupling) * self.spin_f64(a) * self.spin_f64(b)
    }

    /// `q^V`, or an error naming it if it exceeds `cap`.
    pub fn configuration_count(&self, cap: u64) -> Result<u64> {
        let q = self.alphabet() as u128;
        let mut total: u128 = 1;
        for _ in 0..self.volume() {
            total = total.saturating_mul(q);
        }
        if total > u128::from(cap) {
            return Err(Error::CapExceeded { configs: total, cap });
        }
        Ok(total as u64)
    }
}

/// Every configuration of `model` in lexicographic order.
pub fn enumerate_configurations(model: &ModelSpec, cap: u64) -> Result<Configurations> {
    let total = model.configuration_count(cap)?;
    Ok(Configurations { next: 0, total, alphabet: model.alphabet(), volume: model.volume() })
}

#[derive(Debug, Clone)]
pub struct Configurations {
    next: u64,
    total: u64,
    alphabet: usize,
    volume: usize,
}

impl Iterator for Configurations {
    type Item = Configuration;

    fn next(&mut self) -> Option<Configuration> {
        (self.next < self.total).then(|| {
            self.next += 1;
            Configuration::from_index(self.next - 1, self.alphabet, self.volume)
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.total - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Configurations {}

/// Visits configuration indices `range` in order, handing out the symbol
/// array without allocating per configuration.
pub fn scan_range(alphabet: usize, volume: usize, range: Range<u64>, mut visit: impl FnMut(u64, &[u8])) {
    if range.is_empty() {
        return;
    }
    let q = alphabet as u8;
    let mut symbols = Configuration::from_index(range.start, alphabet, volume).symbols.into_vec();
    for index in range {
        visit(index, &symbols);
        for slot in symbols.iter_mut().rev() {
            *slot += 1;
            if *slot < q {
                break;
            }
            *slot = 0;
        }
    }
}

/// Splits `0..total` into at most `parts` contiguous, ordered ranges.
pub fn partition_range(total: u64, parts: usize) -> Vec<Range<u64>> {
    let parts = (parts.max(1) as u64).min(total.max(1));
    let base = total / parts;
    let extra = total % parts;
    let mut start = 0;
    (0..parts)
        .map(|p| {
            let len = base + u64::from(p < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

/// A finite system of measurement: a nonempty proper set of sites.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subvolume {
    name: String,
    sites: Vec<usize>,
}

impl Subvolume {
    pub fn new(name: impl Into<String>, sites: impl IntoIterator<Item = usize>, volume: usize) -> Result<Self> {
        let name = name.into();
        let sites: BTreeSet<usize> = sites.into_iter().collect();
        let reason = if sites.is_empty() {
            Some("site set is empty".to_string())
        } else if let Some(s) = sites.iter().find(|&&s| s >= volume) {
            Some(format!("site {s} outside [0, {volume})"))
        } else if sites.len() == volume {
            Some("site set covers the whole lattice; exterior would be empty".to_string())
        } else {
            None
        };
        match reason {
            Some(reason) => Err(Error::Subvolume { name, reason }),
            None => Ok(Self { name, sites: sites.into_iter().collect() }),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Sorted site list.
    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn contains(&self, site: usize) -> bool {
        self.sites.binary_search(&site).is_ok()
    }

    pub fn exterior(&self, volume: usize) -> Vec<usize> {
        (0..volume).filter(|&s| !self.contains(s)).collect()
    }

    pub fn is_subset_of(&self, other: &Subvolume) -> bool {
        self.sites.iter().all(|&s| other.contains(s))
    }
}

/// Finite family of systems ordered by inclusion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubvolumePoset {
    systems: Vec<Subvolume>,
}

impl SubvolumePoset {
    pub fn new(systems: Vec<Subvolume>) -> Result<Self> {
        for (i, a) in systems.iter().enumerate() {
            for b in &systems[..i] {
                if a.name == b.name {
                    return Err(Error::Subvolume { name: a.name.clone(), reason: "duplicate name".into() });
                }
                if a.sites == b.sites {
                    return Err(Error::Subvolume {
                        name: a.name.clone(),
                        reason: format!("same site set as `{}`", b.name),
                    });
                }
            }
        }
        Ok(Self { systems })
    }

    pub fn systems(&self) -> &[Subvolume] {
        &self.systems
    }

    pub fn len(&self) -> usize {
        self.systems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.systems.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Subvolume> {
        self.systems.iter().find(|s| s.name == name)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.systems.iter().position(|s| s.name == name)
    }

    /// `s <= t` iff `Λ_s ⊆ Λ_t`.
    pub fn leq(&self, s: usize, t: usize) -> bool {
        self.systems[s].is_subset_of(&self.systems[t])
    }

    /// All ordered pairs `(s, t)` with `s < t` strictly.
    pub fn strict_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.systems.len();
        (0..n).flat_map(|s| (0..n).map(move |t| (s, t))).filter(|&(s, t)| s != t && self.leq(s, t)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(v: i64) -> Rational {
        Ratio::from_integer(v)
    }

    fn ring4() -> ModelSpec {
        let g = LatticeGeometry::new(1, &[4], DEFAULT_ENUMERATION_CAP).unwrap();
        ModelSpec::ising(g, int(1), int(0)).unwrap()
    }

    fn cfg(spins: &[i8]) -> Configuration {
        Configuration::new(spins.iter().map(|&s| u8::from(s > 0)).collect(), 2).unwrap()
    }

    #[test]
    fn ring_neighbors() {
        let g = LatticeGeometry::new(1, &[4], DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(g.volume(), 4);
        for i in 0..4 {
            let mut n = g.neighbors(i).to_vec();
            n.sort();
            let mut want = vec![(i + 3) % 4, (i + 1) % 4];
            want.sort();
            assert_eq!(n, want);
        }
    }

    #[test]
    fn small_torus_counts_neighbors_with_multiplicity() {
        let g = LatticeGeometry::new(2, &[2, 2], DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(g.volume(), 4);
        for i in 0..4 {
            assert_eq!(g.neighbors(i).len(), 4);
            assert!(!g.neighbors(i).contains(&i));
        }
        assert_eq!(g.bonds().len(), 8);
    }

    #[test]
    fn neighbor_relation_is_symmetric() {
        let g = LatticeGeometry::new(3, &[3, 2, 4], DEFAULT_ENUMERATION_CAP).unwrap();
        for i in 0..g.volume() {
            assert_eq!(g.neighbors(i).len(), 6);
            for &j in g.neighbors(i) {
                assert_ne!(i, j);
                assert!(g.neighbors(j).contains(&i));
            }
            assert_eq!(g.site_at(&g.coordinates(i)), i);
        }
    }

    #[test]
    fn geometry_cap_arithmetic() {
        assert!(LatticeGeometry::new(1, &[24], DEFAULT_ENUMERATION_CAP).is_ok());
        assert!(LatticeGeometry::new(1, &[26], DEFAULT_ENUMERATION_CAP).is_ok());
        assert!(matches!(LatticeGeometry::new(1, &[27], DEFAULT_ENUMERATION_CAP), Err(Error::CapExceeded { .. })));
        assert!(LatticeGeometry::new(1, &[1], DEFAULT_ENUMERATION_CAP).is_err());
        assert!(LatticeGeometry::new(1, &[0], DEFAULT_ENUMERATION_CAP).is_err());
        assert!(LatticeGeometry::new(2, &[4], DEFAULT_ENUMERATION_CAP).is_err());
        assert!(LatticeGeometry::new(0, &[], DEFAULT_ENUMERATION_CAP).is_err());
    }

    #[test]
    fn ring_energies_and_numbers() {
        let m = ring4();
        assert_eq!(m.energy(&cfg(&[1, 1, 1, 1])), int(-4));
        assert_eq!(m.energy(&cfg(&[1, -1, 1, -1])), int(4));
        assert_eq!(m.energy(&cfg(&[-1, 1, 1, 1])), int(0));
        assert_eq!(m.conserved_number(&cfg(&[1, 1, 1, 1])), int(4));
        assert_eq!(m.conserved_number(&cfg(&[1, -1, 1, -1])), int(0));
        assert_eq!(m.conserved_number(&cfg(&[-1, 1, 1, 1])), int(2));
    }

    #[test]
    fn rational_couplings_stay_exact() {
        let g = LatticeGeometry::new(1, &[3], DEFAULT_ENUMERATION_CAP).unwrap();
        let m = ModelSpec::new(g, vec![Ratio::new(-1, 2), Ratio::new(1, 2)], Ratio::new(1, 3), Ratio::new(1, 5), [])
            .unwrap();
        let up = Configuration::new(vec![1, 1, 1], 2).unwrap();
        // -1/3 * 3 * 1/4 - 1/5 * 3/2
        assert_eq!(m.energy(&up), Ratio::new(-1, 4) - Ratio::new(3, 10));
        assert_eq!(m.conserved_number(&up), Ratio::new(3, 2));
    }

    #[test]
    fn enumeration_counts_and_order() {
        let m = ring4();
        let all: Vec<_> = enumerate_configurations(&m, DEFAULT_ENUMERATION_CAP).unwrap().collect();
        assert_eq!(all.len(), 16);
        assert!(all.windows(2).all(|w| w[0].symbols() < w[1].symbols()));
        for (k, c) in all.iter().enumerate() {
            assert_eq!(c.index(2), k as u64);
        }

        let g = LatticeGeometry::new(2, &[2, 2], DEFAULT_ENUMERATION_CAP).unwrap();
        let torus = ModelSpec::ising(g, int(1), int(0)).unwrap();
        assert_eq!(enumerate_configurations(&torus, DEFAULT_ENUMERATION_CAP).unwrap().count(), 16);

        let g = LatticeGeometry::new(1, &[4], DEFAULT_ENUMERATION_CAP).unwrap();
        let potts = ModelSpec::new(g, vec![int(-1), int(0), int(1)], int(1), int(0), []).unwrap();
        assert_eq!(enumerate_configurations(&potts, DEFAULT_ENUMERATION_CAP).unwrap().count(), 81);
    }

    #[test]
    fn cap_error_names_both_numbers() {
        let m = ring4();
        let err = enumerate_configurations(&m, 15).unwrap_err();
        assert_eq!(err, Error::CapExceeded { configs: 16, cap: 15 });
        let text = err.to_string();
        assert!(text.contains("16") && text.contains("15"));
    }

    #[test]
    fn scan_matches_iterator() {
        let m = ring4();
        let mut seen = Vec::new();
        for r in partition_range(16, 3) {
            scan_range(2, 4, r, |k, s| seen.push((k, s.to_vec())));
        }
        let direct: Vec<_> = enumerate_configurations(&m, DEFAULT_ENUMERATION_CAP)
            .unwrap()
            .enumerate()
            .map(|(k, c)| (k as u64, c.symbols().to_vec()))
            .collect();
        assert_eq!(seen, direct);
    }

    #[test]
    fn configuration_rejects_bad_symbols() {
        assert!(Configuration::new(vec![0, 2], 2).is_err());
    }

    #[test]
    fn subvolume_validation() {
        assert!(Subvolume::new("a", [], 4).is_err());
        assert!(Subvolume::new("a", [0, 1, 2, 3], 4).is_err());
        assert!(Subvolume::new("a", [4], 4).is_err());
        let s = Subvolume::new("a", [2, 0, 2], 4).unwrap();
        assert_eq!(s.sites(), &[0, 2]);
        assert_eq!(s.exterior(4), vec![1, 3]);
    }

    #[test]
    fn poset_order_is_inclusion() {
        let systems = vec![
            Subvolume::new("a", [0], 6).unwrap(),
            Subvolume::new("b", [0, 1], 6).unwrap(),
            Subvolume::new("c", [0, 1, 2], 6).unwrap(),
            Subvolume::new("d", [3], 6).unwrap(),
        ];
        let p = SubvolumePoset::new(systems.clone()).unwrap();
        for i in 0..4 {
            assert!(p.leq(i, i));
            for j in 0..4 {
                assert_eq!(p.leq(i, j), systems[i].is_subset_of(&systems[j]));
                if i != j && p.leq(i, j) {
                    assert!(!p.leq(j, i));
                }
                for k in 0..4 {
                    if p.leq(i, j) && p.leq(j, k) {
                        assert!(p.leq(i, k));
                    }
                }
            }
        }
        assert_eq!(p.strict_pairs(), vec![(0, 1), (0, 2), (1, 2)]);
        assert!(SubvolumePoset::new(vec![systems[0].clone(), Subvolume::new("z", [0], 6).unwrap()]).is_err());
    }
}
