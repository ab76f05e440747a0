use super::HilbertError;

/// Parity of the number of up spins in a basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

/// Population count of `k` modulo 2.
#[inline]
pub fn parity(k: usize) -> Parity {
    if k.count_ones().is_multiple_of(2) {
        Parity::Even
    } else {
        Parity::Odd
    }
}

/// Product basis state `|k_N ... k_1 k_0>` encoded as the integer
/// `k = sum_n 2^n k_n`. Bit 0 is the central spin; bit `n` is bath spin `n`.
/// A set bit means spin up (`sz = +1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisIndex(usize);

impl BasisIndex {
    /// Index in a space of `n_spins` spins.
    pub fn new(k: usize, n_spins: usize) -> Result<Self, HilbertError> {
        if n_spins >= usize::BITS as usize || k >> n_spins != 0 {
            return Err(HilbertError::IndexOutOfRange {
                index: k,
                dim: 1usize.checked_shl(n_spins as u32).unwrap_or(0),
            });
        }
        Ok(Self(k))
    }

    /// Composes an index from spin occupations, `bits[n]` for spin `n`.
    pub fn from_bits(bits: &[bool]) -> Self {
        Self(bits.iter().enumerate().fold(0, |k, (n, &b)| k | (usize::from(b) << n)))
    }

    /// Decomposes into `n_spins` occupations.
    pub fn to_bits(self, n_spins: usize) -> Vec<bool> {
        (0..n_spins).map(|n| self.is_up(n)).collect()
    }

    #[inline]
    pub fn value(self) -> usize {
        self.0
    }

    #[inline]
    pub fn is_up(self, site: usize) -> bool {
        (self.0 >> site) & 1 == 1
    }

    #[inline]
    pub fn flip(self, site: usize) -> Self {
        Self(self.0 ^ (1 << site))
    }

    #[inline]
    pub fn parity(self) -> Parity {
        parity(self.0)
    }
}

impl From<BasisIndex> for usize {
    fn from(k: BasisIndex) -> usize {
        k.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parity_examples() {
        assert_eq!(parity(0), Parity::Even);
        assert_eq!(parity(3), Parity::Even);
        assert_eq!(parity(7), Parity::Odd);
    }

    #[test]
    fn index_range_is_checked() {
        assert!(BasisIndex::new(7, 3).is_ok());
        assert!(matches!(
            BasisIndex::new(8, 3),
            Err(HilbertError::IndexOutOfRange { index: 8, dim: 8 })
        ));
    }

    proptest! {
        #[test]
        fn bits_round_trip(bits in proptest::collection::vec(any::<bool>(), 1..20)) {
            let k = BasisIndex::from_bits(&bits);
            prop_assert_eq!(k.to_bits(bits.len()), bits.clone());
            prop_assert!(BasisIndex::new(k.value(), bits.len()).is_ok());
        }

        #[test]
        fn two_flips_preserve_parity(k in 0usize..(1 << 16), i in 0usize..16, j in 0usize..16) {
            prop_assume!(i != j);
            let flipped = BasisIndex(k).flip(i).flip(j);
            prop_assert_eq!(flipped.parity(), parity(k));
            prop_assert_ne!(BasisIndex(k).flip(i).parity(), parity(k));
        }
    }
}
