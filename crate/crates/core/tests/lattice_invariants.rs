use lattice_shells::ensemble::{enumerate_shells, EnumerationOptions};
use lattice_shells::lattice::{enumerate_configurations, LatticeGeometry, ModelSpec, DEFAULT_ENUMERATION_CAP};
use lattice_shells::rational::Rational;
use proptest::prelude::*;

fn model(lengths: &[usize], j: (i64, i64), h: (i64, i64)) -> ModelSpec {
    let g = LatticeGeometry::new(lengths.len(), lengths, DEFAULT_ENUMERATION_CAP).unwrap();
    ModelSpec::ising(g, Rational::new(j.0, j.1), Rational::new(h.0, h.1)).unwrap()
}

fn arb_lengths() -> impl Strategy<Value = Vec<usize>> {
    prop_oneof![(2usize..9).prop_map(|l| vec![l]), (2usize..4, 2usize..4).prop_map(|(a, b)| vec![a, b]),]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn global_flip_preserves_energy_at_zero_field(lengths in arb_lengths(), j in -3i64..4) {
        let m = model(&lengths, (j, 1), (0, 1));
        for c in enumerate_configurations(&m, DEFAULT_ENUMERATION_CAP).unwrap() {
            let flipped: Vec<u8> = c.symbols().iter().map(|s| 1 - s).collect();
            prop_assert_eq!(m.energy_key(c.symbols()), m.energy_key(&flipped));
            prop_assert_eq!(m.number_key(c.symbols()), -m.number_key(&flipped));
        }
    }

    #[test]
    fn translations_preserve_labels(lengths in arb_lengths(), j in -3i64..4, h in -2i64..3) {
        let m = model(&lengths, (j, 2), (h, 3));
        let g = m.geometry().clone();
        for c in enumerate_configurations(&m, DEFAULT_ENUMERATION_CAP).unwrap() {
            for axis in 0..g.dimension() {
                let mut shifted = vec![0u8; g.volume()];
                for site in 0..g.volume() {
                    shifted[g.translate(site, axis)] = c.symbols()[site];
                }
                prop_assert_eq!(m.energy_key(c.symbols()), m.energy_key(&shifted));
                prop_assert_eq!(m.number_key(c.symbols()), m.number_key(&shifted));
            }
        }
    }

    #[test]
    fn energies_respect_bond_bounds(lengths in arb_lengths(), j in 1i64..4, h in -2i64..3) {
        let m = model(&lengths, (j, 1), (h, 1));
        let v = m.volume() as i64;
        let bonds = m.active_bonds().len() as i64;
        let bound = Rational::from_integer(j * bonds + h.abs() * v);
        let p = enumerate_shells(&m, &EnumerationOptions::default()).unwrap();
        for s in p.shells() {
            prop_assert!(s.energy() <= bound && s.energy() >= -bound);
            prop_assert!(s.number().to_integer().abs() <= v);
        }
        let ground = p.shells().iter().map(|s| s.energy()).min().unwrap();
        // Ferromagnetic, field-free part: all spins aligned reach -J per bond.
        prop_assert!(ground <= Rational::from_integer(-j * bonds + h.abs() * v));
    }

    #[test]
    fn census_is_symmetric_under_flip(lengths in arb_lengths()) {
        let m = model(&lengths, (1, 1), (0, 1));
        let p = enumerate_shells(&m, &EnumerationOptions::default()).unwrap();
        for s in p.shells() {
            let mirror = p.find(s.energy(), -s.number()).unwrap();
            prop_assert_eq!(p.shell(mirror).count(), s.count());
        }
    }
}
