//! Packed sign vectors.
//!
//! Bit `i` lives in word `i / 64` at position `i % 64` (least significant
//! first). A set bit encodes `+1`, a clear bit `-1`. Bits past the logical
//! length are always set, so two vectors of equal length compare equal
//! exactly when their words do.

use crate::error::{Error, Result};

/// Bits per storage word.
pub const WORD_BITS: usize = u64::BITS as usize;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
}

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

/// Mask of the valid bits in the final word.
#[inline]
fn tail_mask(len: usize) -> u64 {
    match len % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

impl BitVector {
    /// Builds a vector from `sign >= 0` tests on each entry; `sign(0) = +1`.
    pub fn from_signs_of(values: &[f64]) -> Self {
        Self::from_bits(values.len(), |i| values[i] >= 0.0)
    }

    /// Packs a `±1` vector.
    pub fn pack(signs: &[i8]) -> Result<Self> {
        if let Some(i) = signs.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::invalid(format!(
                "entry {i} is {}, expected -1 or +1",
                signs[i]
            )));
        }
        Ok(Self::from_bits(signs.len(), |i| signs[i] == 1))
    }

    pub(crate) fn from_bits(len: usize, bit: impl Fn(usize) -> bool) -> Self {
        let mut words = vec![u64::MAX; words_for(len)];
        for i in 0..len {
            if !bit(i) {
                words[i / WORD_BITS] &= !(1u64 << (i % WORD_BITS));
            }
        }
        Self { words, len }
    }

    /// Wraps raw words, canonicalizing padding bits to 1.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Result<Self> {
        if words.len() != words_for(len) {
            return Err(Error::shape(
                "BitVector::from_words",
                format!("{} words", words_for(len)),
                words.len(),
            ));
        }
        if let Some(last) = words.last_mut() {
            *last |= !tail_mask(len);
        }
        Ok(Self { words, len })
    }

    pub fn unpack(&self) -> Vec<i8> {
        (0..self.len)
            .map(|i| if self.bit(i) { 1 } else { -1 })
            .collect()
    }

    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    /// The `±1` value at position `i`.
    #[inline]
    pub fn sign(&self, i: usize) -> f64 {
        if self.bit(i) {
            1.0
        } else {
            -1.0
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Bitwise negation (every sign flipped); padding stays canonical.
    pub fn negate(&self) -> Self {
        let words = self.words.iter().map(|w| !w).collect();
        Self::from_words(words, self.len).expect("word count preserved")
    }

    /// Number of `+1` entries.
    pub fn count_positive(&self) -> usize {
        let total: u32 = self.words.iter().map(|w| w.count_ones()).sum();
        total as usize - (self.words.len() * WORD_BITS - self.len)
    }
}

/// `Σ aᵢ·bᵢ` under `±1` semantics, i.e. `2·popcount(XNOR(a, b)) − t`.
pub fn xnor_popcount_dot(a: &BitVector, b: &BitVector) -> Result<i64> {
    if a.len != b.len {
        return Err(Error::shape("xnor_popcount_dot", a.len, b.len));
    }
    Ok(xnor_popcount_words(&a.words, &b.words, a.len))
}

/// Kernel on raw words of equal logical length `len`.
#[inline]
pub(crate) fn xnor_popcount_words(a: &[u64], b: &[u64], len: usize) -> i64 {
    let Some((last, body)) = a.split_last() else {
        return 0;
    };
    let (b_last, b_body) = b.split_last().expect("equal word counts");
    let mut agree: u32 = body
        .iter()
        .zip(b_body)
        .map(|(x, y)| (!(x ^ y)).count_ones())
        .sum();
    agree += (!(last ^ b_last) & tail_mask(len)).count_ones();
    2 * agree as i64 - len as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pack_two_entries() {
        let v = BitVector::pack(&[1, -1]).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v.words(), &[!0u64 << 2 | 0b01]);
        assert_eq!(v.unpack(), vec![1, -1]);
    }

    #[test]
    fn length_65_uses_two_words() {
        let signs: Vec<i8> = (0..65).map(|i| if i % 3 == 0 { -1 } else { 1 }).collect();
        let v = BitVector::pack(&signs).unwrap();
        assert_eq!(v.words().len(), 2);
        assert_eq!(xnor_popcount_dot(&v, &v).unwrap(), 65);
        assert_eq!(xnor_popcount_dot(&v, &v.negate()).unwrap(), -65);
    }

    #[test]
    fn all_negative_full_word_is_zero() {
        let v = BitVector::pack(&[-1; 64]).unwrap();
        assert_eq!(v.words(), &[0u64]);
    }

    #[test]
    fn rejects_non_sign_entries() {
        assert!(BitVector::pack(&[1, 0, -1]).is_err());
        assert!(BitVector::pack(&[2]).is_err());
    }

    #[test]
    fn dot_examples() {
        let a = BitVector::pack(&[1, -1, 1, 1]).unwrap();
        let b = BitVector::pack(&[1, 1, -1, 1]).unwrap();
        assert_eq!(xnor_popcount_dot(&a, &b).unwrap(), 0);
        assert_eq!(xnor_popcount_dot(&a, &a).unwrap(), 4);
        assert_eq!(xnor_popcount_dot(&a, &a.negate()).unwrap(), -4);
        let c = BitVector::pack(&[1, 1, 1]).unwrap();
        assert!(xnor_popcount_dot(&a, &c).is_err());
    }

    #[test]
    fn from_words_canonicalizes_padding() {
        let v = BitVector::from_words(vec![0], 3).unwrap();
        assert_eq!(v.words(), &[!0u64 << 3]);
        assert_eq!(v, BitVector::pack(&[-1, -1, -1]).unwrap());
    }

    fn signs(max: usize) -> impl Strategy<Value = Vec<i8>> {
        prop::collection::vec(
            prop::bool::ANY.prop_map(|b| if b { 1i8 } else { -1 }),
            1..max,
        )
    }

    proptest! {
        #[test]
        fn roundtrip(v in signs(200)) {
            let packed = BitVector::pack(&v).unwrap();
            prop_assert_eq!(packed.unpack(), v);
        }

        #[test]
        fn dot_matches_float_and_parity((a, b) in (1usize..200).prop_flat_map(|n| (
            prop::collection::vec(prop::bool::ANY, n),
            prop::collection::vec(prop::bool::ANY, n),
        ))) {
            let to_signs = |v: &[bool]| v.iter().map(|&x| if x { 1i8 } else { -1 }).collect::<Vec<_>>();
            let (sa, sb) = (to_signs(&a), to_signs(&b));
            let want: i64 = sa.iter().zip(&sb).map(|(x, y)| (*x as i64) * (*y as i64)).sum();
            let got = xnor_popcount_dot(&BitVector::pack(&sa).unwrap(), &BitVector::pack(&sb).unwrap()).unwrap();
            prop_assert_eq!(got, want);
            prop_assert_eq!((got - a.len() as i64).rem_euclid(2), 0);
        }

        #[test]
        fn padding_garbage_is_masked(v in signs(130), junk in any::<u64>()) {
            // Whatever ends up in the padding region, the count is unchanged.
            let clean = BitVector::pack(&v).unwrap();
            let mut words = clean.words().to_vec();
            let n = v.len();
            if n % WORD_BITS != 0 {
                *words.last_mut().unwrap() ^= junk & !tail_mask(n);
            }
            let want = xnor_popcount_dot(&clean, &clean.negate()).unwrap();
            let got = xnor_popcount_words(&words, clean.negate().words(), n);
            prop_assert_eq!(got, want);
        }
    }
}
