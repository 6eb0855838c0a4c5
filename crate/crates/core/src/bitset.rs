use std::fmt;

/// Fixed-universe bitset over `0..len`.
///
/// Bits past `len` in the last word are always zero, so derived equality
/// is set equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitSet {
    len: usize,
    words: Vec<u64>,
}

impl BitSet {
    pub fn empty(len: usize) -> Self {
        Self { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn full(len: usize) -> Self {
        let mut s = Self { len, words: vec![u64::MAX; len.div_ceil(64)] };
        s.clear_tail();
        s
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(len);
        for i in indices {
            s.insert(i);
        }
        s
    }

    pub fn singleton(len: usize, index: usize) -> Self {
        Self::from_indices(len, [index])
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn universe(&self) -> usize {
        self.len
    }

    /// Panics if `index` is outside the universe.
    pub fn insert(&mut self, index: usize) {
        assert!(index < self.len, "index {index} outside universe of {}", self.len);
        self.words[index / 64] |= 1 << (index % 64);
    }

    pub fn remove(&mut self, index: usize) {
        if index < self.len {
            self.words[index / 64] &= !(1 << (index % 64));
        }
    }

    pub fn contains(&self, index: usize) -> bool {
        index < self.len && self.words[index / 64] & (1 << (index % 64)) != 0
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        *self == Self::full(self.len)
    }

    fn zip_with(&self, other: &Self, op: impl Fn(u64, u64) -> u64) -> Self {
        assert_eq!(self.len, other.len, "bitset universes differ");
        Self { len: self.len, words: self.words.iter().zip(&other.words).map(|(&a, &b)| op(a, b)).collect() }
    }

    pub fn union(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn complement(&self) -> Self {
        let mut s = Self { len: self.len, words: self.words.iter().map(|w| !w).collect() };
        s.clear_tail();
        s
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.len == other.len && self.words.iter().zip(&other.words).all(|(&a, &b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.len == other.len && self.words.iter().zip(&other.words).all(|(&a, &b)| a & b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                (bits != 0).then(|| {
                    let b = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    w * 64 + b
                })
            })
        })
    }

    /// Big-endian hex of the bit vector: the last hex digit holds members 0..4.
    pub fn to_hex(&self) -> String {
        let digits = self.len.div_ceil(4).max(1);
        (0..digits)
            .rev()
            .map(|d| {
                let nibble = (0..4).filter(|&b| self.contains(d * 4 + b)).fold(0u32, |acc, b| acc | 1 << b);
                char::from_digit(nibble, 16).unwrap_or('0')
            })
            .collect()
    }
}

impl fmt::Debug for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_pair(max: usize) -> impl Strategy<Value = (BitSet, BitSet)> {
        (1..max).prop_flat_map(|len| {
            (proptest::collection::vec(any::<bool>(), len), proptest::collection::vec(any::<bool>(), len)).prop_map(
                move |(a, b)| {
                    let from = |v: Vec<bool>| {
                        BitSet::from_indices(len, v.into_iter().enumerate().filter(|p| p.1).map(|p| p.0))
                    };
                    (from(a), from(b))
                },
            )
        })
    }

    #[test]
    fn tail_bits_stay_clear() {
        let s = BitSet::full(70);
        assert_eq!(s.count(), 70);
        assert_eq!(s.complement(), BitSet::empty(70));
        assert!(BitSet::empty(70).complement().is_full());
    }

    #[test]
    fn hex_layout() {
        let s = BitSet::from_indices(6, [0, 1, 5]);
        assert_eq!(s.to_hex(), "23");
        assert_eq!(BitSet::empty(0).to_hex(), "0");
        assert_eq!(BitSet::full(8).to_hex(), "ff");
    }

    proptest! {
        #[test]
        fn de_morgan((a, b) in arb_pair(200)) {
            prop_assert_eq!(a.union(&b).complement(), a.complement().intersection(&b.complement()));
            prop_assert_eq!(a.intersection(&b).complement(), a.complement().union(&b.complement()));
        }

        #[test]
        fn counts_and_iteration_agree((a, b) in arb_pair(200)) {
            prop_assert_eq!(a.iter().count(), a.count());
            prop_assert_eq!(a.union(&b).count() + a.intersection(&b).count(), a.count() + b.count());
            prop_assert!(a.difference(&b).is_disjoint(&b));
            prop_assert!(a.intersection(&b).is_subset(&a));
            let rebuilt = BitSet::from_indices(a.universe(), a.iter());
            prop_assert_eq!(rebuilt, a);
        }
    }
}
