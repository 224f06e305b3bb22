//! Exact linear algebra over F2^n: bit vectors, subspaces in reduced
//! row-echelon form, affine cosets and dense subsets of the cube.
//!
//! Coordinate convention: bit `i` of a word is coordinate `i + 1`, so the
//! hex text form `0x5` on n=4 is the vector (1,0,1,0). All structures are
//! immutable after construction.

use std::fmt;

use thiserror::Error;

/// Ambient dimensions are capped so that one dense bitset over F2^n stays
/// small (2^20 bits = 128 KiB at the default cap).
pub const DEFAULT_N_CAP: usize = 20;
/// Hard cap on the dense representation.
pub const MAX_N: usize = 24;
/// Cosets are only enumerated below this cardinality.
pub const ENUM_CAP: usize = 1 << MAX_N;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum F2Error {
    #[error("ambient dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("ambient dimension {n} exceeds cap {cap}")]
    AmbientTooLarge { n: usize, cap: usize },
    #[error("enumeration of 2^{dim} elements exceeds cap {cap}")]
    EnumerationTooLarge { dim: usize, cap: usize },
    #[error("invalid bit word literal {literal:?}")]
    BadLiteral { literal: String },
}

/// An element of F2^n, n <= [`MAX_N`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitWord {
    n: u32,
    bits: u32,
}

impl BitWord {
    pub fn new(n: usize, bits: u32) -> Self {
        assert!(n <= MAX_N, "ambient dimension {n} exceeds {MAX_N}");
        let mask = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        BitWord { n: n as u32, bits: bits & mask }
    }

    pub fn zero(n: usize) -> Self {
        Self::new(n, 0)
    }

    pub fn ones(n: usize) -> Self {
        Self::new(n, u32::MAX)
    }

    /// Standard basis vector for coordinate `i` (0-based bit index).
    pub fn unit(n: usize, i: usize) -> Self {
        assert!(i < n);
        Self::new(n, 1 << i)
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn bit(&self, i: usize) -> bool {
        debug_assert!(i < self.n());
        (self.bits >> i) & 1 == 1
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    /// Addition in F2^n (bitwise XOR). Panics on mismatched ambient n.
    pub fn xor(&self, other: &BitWord) -> BitWord {
        assert_eq!(self.n, other.n, "ambient dimension mismatch");
        BitWord { n: self.n, bits: self.bits ^ other.bits }
    }

    /// Inner product gamma . x over F2.
    pub fn dot(&self, other: &BitWord) -> bool {
        assert_eq!(self.n, other.n);
        (self.bits & other.bits).count_ones() & 1 == 1
    }

    pub fn hamming_weight(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Lowercase hex with "0x" prefix; the form used in all JSON files.
    pub fn to_hex(&self) -> String {
        format!("0x{:x}", self.bits)
    }

    pub fn from_hex(n: usize, s: &str) -> Result<Self, F2Error> {
        let body = s
            .strip_prefix("0x")
            .ok_or_else(|| F2Error::BadLiteral { literal: s.to_string() })?;
        let bits = u32::from_str_radix(body, 16)
            .map_err(|_| F2Error::BadLiteral { literal: s.to_string() })?;
        if n < 32 && bits >> n != 0 {
            return Err(F2Error::BadLiteral { literal: s.to_string() });
        }
        Ok(Self::new(n, bits))
    }
}

impl fmt::Debug for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.to_hex(), self.n)
    }
}

/// Hamming weight of `x`; the number of set bits.
pub fn hamming_weight(x: &BitWord) -> u32 {
    x.hamming_weight()
}

/// A linear subspace of F2^n held as a basis in reduced row-echelon form:
/// pivot columns strictly increasing, each pivot column zero in every other
/// row. The RREF basis is a canonical form, so subspace equality is row-list
/// equality.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Subspace {
    n: usize,
    basis: Vec<BitWord>,
}

impl Subspace {
    /// Reduces `vectors` to an RREF basis of their span.
    pub fn rref_basis(n: usize, vectors: &[BitWord]) -> Result<Subspace, F2Error> {
        if n > MAX_N {
            return Err(F2Error::AmbientTooLarge { n, cap: MAX_N });
        }
        let mut rows: Vec<u32> = Vec::new();
        for v in vectors {
            if v.n() != n {
                return Err(F2Error::DimensionMismatch { expected: n, got: v.n() });
            }
            let mut w = v.bits();
            for &r in &rows {
                if w & (r & r.wrapping_neg()) != 0 {
                    w ^= r;
                }
            }
            if w != 0 {
                // Back-eliminate the new pivot from existing rows.
                let pivot = w & w.wrapping_neg();
                for r in rows.iter_mut() {
                    if *r & pivot != 0 {
                        *r ^= w;
                    }
                }
                rows.push(w);
            }
        }
        rows.sort_by_key(|r| r.trailing_zeros());
        Ok(Subspace {
            n,
            basis: rows.into_iter().map(|r| BitWord::new(n, r)).collect(),
        })
    }

    pub fn full(n: usize) -> Subspace {
        Subspace {
            n,
            basis: (0..n).map(|i| BitWord::unit(n, i)).collect(),
        }
    }

    pub fn trivial(n: usize) -> Subspace {
        Subspace { n, basis: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn codim(&self) -> usize {
        self.n - self.basis.len()
    }

    pub fn basis(&self) -> &[BitWord] {
        &self.basis
    }

    pub fn pivot(&self, row: usize) -> usize {
        self.basis[row].bits().trailing_zeros() as usize
    }

    /// Reduces `x` against the basis; the result is zero iff `x` is a member.
    pub fn reduce(&self, x: &BitWord) -> BitWord {
        assert_eq!(x.n(), self.n);
        let mut w = x.bits();
        for row in &self.basis {
            let r = row.bits();
            if w & (r & r.wrapping_neg()) != 0 {
                w ^= r;
            }
        }
        BitWord::new(self.n, w)
    }

    pub fn contains(&self, x: &BitWord) -> bool {
        self.reduce(x).is_zero()
    }

    /// Coefficients of a member `v` over the RREF basis: bit `j` of the
    /// result is the bit of `v` at the j-th pivot column.
    pub fn coords(&self, v: &BitWord) -> u32 {
        debug_assert!(self.contains(v));
        let mut c = 0u32;
        for (j, row) in self.basis.iter().enumerate() {
            if v.bit(row.bits().trailing_zeros() as usize) {
                c |= 1 << j;
            }
        }
        c
    }

    /// Inverse of [`coords`](Self::coords): the member with the given basis
    /// coefficients.
    pub fn member_from_coords(&self, coords: u32) -> BitWord {
        let mut w = 0u32;
        for (j, row) in self.basis.iter().enumerate() {
            if (coords >> j) & 1 == 1 {
                w ^= row.bits();
            }
        }
        BitWord::new(self.n, w)
    }
}

/// An affine coset a + V. The stored shift is the basis-reduced canonical
/// representative, so coset equality is field-wise equality.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct AffineCoset {
    shift: BitWord,
    space: Subspace,
}

impl AffineCoset {
    pub fn new(shift: BitWord, space: Subspace) -> Result<AffineCoset, F2Error> {
        if shift.n() != space.n() {
            return Err(F2Error::DimensionMismatch { expected: space.n(), got: shift.n() });
        }
        let shift = space.reduce(&shift);
        Ok(AffineCoset { shift, space })
    }

    pub fn full(n: usize) -> AffineCoset {
        AffineCoset { shift: BitWord::zero(n), space: Subspace::full(n) }
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Canonical (basis-reduced) representative.
    pub fn shift(&self) -> &BitWord {
        &self.shift
    }

    pub fn space(&self) -> &Subspace {
        &self.space
    }

    pub fn contains(&self, x: &BitWord) -> bool {
        x.n() == self.n() && self.space.reduce(&x.xor(&self.shift)).is_zero()
    }

    /// All 2^dim members in Gray-code order over the basis coefficients:
    /// consecutive members differ by a single basis vector, and the walk is a
    /// deterministic function of the canonical basis.
    pub fn members(&self) -> Result<Vec<BitWord>, F2Error> {
        self.members_capped(ENUM_CAP)
    }

    pub fn members_capped(&self, cap: usize) -> Result<Vec<BitWord>, F2Error> {
        let d = self.dim();
        if d >= usize::BITS as usize || (1usize << d) > cap {
            return Err(F2Error::EnumerationTooLarge { dim: d, cap });
        }
        let mut out = Vec::with_capacity(1 << d);
        let mut cur = self.shift;
        out.push(cur);
        for k in 1..(1usize << d) {
            let j = k.trailing_zeros() as usize;
            cur = cur.xor(&self.space.basis[j]);
            out.push(cur);
        }
        Ok(out)
    }
}

/// A dense subset of F2^n, one bit per point.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Bitset {
    n: usize,
    words: Vec<u64>,
}

impl Bitset {
    pub fn empty(n: usize) -> Bitset {
        assert!(n <= MAX_N);
        let len = (1usize << n).div_ceil(64);
        Bitset { n, words: vec![0; len] }
    }

    pub fn full(n: usize) -> Bitset {
        let mut s = Self::empty(n);
        if 1usize << n >= 64 {
            s.words.fill(u64::MAX);
        } else {
            s.words[0] = (1u64 << (1usize << n)) - 1;
        }
        s
    }

    pub fn from_members<'a>(n: usize, members: impl IntoIterator<Item = &'a BitWord>) -> Bitset {
        let mut s = Self::empty(n);
        for m in members {
            s.insert(m);
        }
        s
    }

    /// The half-space {x : gamma . x = 0}.
    pub fn halfspace(gamma: &BitWord) -> Bitset {
        let n = gamma.n();
        let mut s = Self::empty(n);
        for x in 0u32..(1u32 << n) {
            if (x & gamma.bits()).count_ones() & 1 == 0 {
                s.words[(x as usize) >> 6] |= 1 << (x & 63);
            }
        }
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, x: &BitWord) {
        assert_eq!(x.n(), self.n);
        self.words[(x.bits() as usize) >> 6] |= 1 << (x.bits() & 63);
    }

    pub fn remove(&mut self, x: &BitWord) {
        assert_eq!(x.n(), self.n);
        self.words[(x.bits() as usize) >> 6] &= !(1 << (x.bits() & 63));
    }

    pub fn contains(&self, x: &BitWord) -> bool {
        x.n() == self.n && self.contains_bits(x.bits())
    }

    #[inline]
    pub fn contains_bits(&self, bits: u32) -> bool {
        (self.words[(bits as usize) >> 6] >> (bits & 63)) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = BitWord> + '_ {
        let n = self.n;
        (0u32..(1u32 << n)).filter(|&x| self.contains_bits(x)).map(move |x| BitWord::new(n, x))
    }

    /// Members of `coset` that lie in the set, in the coset's member order.
    pub fn members_in_coset(&self, coset: &AffineCoset) -> Result<Vec<BitWord>, F2Error> {
        Ok(coset.members()?.into_iter().filter(|x| self.contains(x)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Independent rank oracle: plain Gaussian elimination without any of the
    /// RREF bookkeeping used by the implementation.
    fn rank_oracle(vectors: &[u32]) -> usize {
        let mut rows: Vec<u32> = vectors.to_vec();
        let mut rank = 0;
        for col in 0..32 {
            if let Some(pos) = (rank..rows.len()).find(|&i| rows[i] >> col & 1 == 1) {
                rows.swap(rank, pos);
                let pivot_row = rows[rank];
                for (i, r) in rows.iter_mut().enumerate() {
                    if i != rank && *r >> col & 1 == 1 {
                        *r ^= pivot_row;
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    #[test]
    fn rref_empty_span() {
        let s = Subspace::rref_basis(4, &[]).unwrap();
        assert_eq!(s.dim(), 0);
    }

    #[test]
    fn rref_duplicate_row() {
        let v = BitWord::new(2, 0b11);
        let s = Subspace::rref_basis(2, &[v, v]).unwrap();
        assert_eq!(s.dim(), 1);
        assert_eq!(s.basis(), &[v]);
    }

    #[test]
    fn rref_mixed_dimensions_rejected() {
        let err = Subspace::rref_basis(4, &[BitWord::new(3, 1)]).unwrap_err();
        assert_eq!(err, F2Error::DimensionMismatch { expected: 4, got: 3 });
    }

    #[test]
    fn rref_rank_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let raw: Vec<u32> = (0..5).map(|_| rng.gen::<u32>() & 0xff).collect();
            let words: Vec<BitWord> = raw.iter().map(|&b| BitWord::new(8, b)).collect();
            let s = Subspace::rref_basis(8, &words).unwrap();
            assert_eq!(s.dim(), rank_oracle(&raw));
        }
    }

    #[test]
    fn rref_is_canonical() {
        // Re-running rref_basis on the members of a subspace reproduces it.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let words: Vec<BitWord> =
                (0..4).map(|_| BitWord::new(6, rng.gen::<u32>() & 0x3f)).collect();
            let s = Subspace::rref_basis(6, &words).unwrap();
            let members = AffineCoset::new(BitWord::zero(6), s.clone()).unwrap().members().unwrap();
            let s2 = Subspace::rref_basis(6, &members).unwrap();
            assert_eq!(s, s2);
        }
    }

    #[test]
    fn coset_members_full_plane() {
        let c = AffineCoset::full(2);
        assert_eq!(c.members().unwrap().len(), 4);
    }

    #[test]
    fn coset_members_line() {
        let v = Subspace::rref_basis(2, &[BitWord::new(2, 0b11)]).unwrap();
        let c = AffineCoset::new(BitWord::new(2, 0b01), v).unwrap();
        let mut got = c.members().unwrap();
        got.sort();
        assert_eq!(got, vec![BitWord::new(2, 0b01), BitWord::new(2, 0b10)]);
    }

    #[test]
    fn coset_members_match_exhaustive_filter() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let words: Vec<BitWord> =
                (0..3).map(|_| BitWord::new(6, rng.gen::<u32>() & 0x3f)).collect();
            let space = Subspace::rref_basis(6, &words).unwrap();
            let shift = BitWord::new(6, rng.gen::<u32>() & 0x3f);
            let c = AffineCoset::new(shift, space).unwrap();
            let mut members = c.members().unwrap();
            let by_filter: Vec<BitWord> =
                (0..64).map(|b| BitWord::new(6, b)).filter(|x| c.contains(x)).collect();
            assert_eq!(members.len(), 1 << c.dim());
            members.sort();
            assert_eq!(members, by_filter);
        }
    }

    #[test]
    fn coset_contains_examples() {
        let c = AffineCoset::full(5);
        assert!(c.contains(&BitWord::new(5, 19)));

        let v = Subspace::rref_basis(2, &[BitWord::new(2, 0b11)]).unwrap();
        let c = AffineCoset::new(BitWord::new(2, 0b01), v).unwrap();
        assert!(c.contains(&BitWord::new(2, 0b10)));
        assert!(!c.contains(&BitWord::new(2, 0b11)));
    }

    #[test]
    fn coset_equality_mod_space() {
        let v = Subspace::rref_basis(4, &[BitWord::new(4, 0b0011), BitWord::new(4, 0b0110)])
            .unwrap();
        let a = BitWord::new(4, 0b1000);
        let b = a.xor(&BitWord::new(4, 0b0101)); // differs by an element of V
        let ca = AffineCoset::new(a, v.clone()).unwrap();
        let cb = AffineCoset::new(b, v).unwrap();
        assert_eq!(ca, cb);
        let ma: std::collections::BTreeSet<_> = ca.members().unwrap().into_iter().collect();
        let mb: std::collections::BTreeSet<_> = cb.members().unwrap().into_iter().collect();
        assert_eq!(ma, mb);
    }

    #[test]
    fn hamming_weight_examples() {
        assert_eq!(hamming_weight(&BitWord::zero(7)), 0);
        assert_eq!(hamming_weight(&BitWord::ones(7)), 7);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..100 {
            let x = BitWord::new(16, rng.gen::<u32>());
            let naive = (0..16).filter(|&i| x.bit(i)).count() as u32;
            assert_eq!(hamming_weight(&x), naive);
        }
    }

    #[test]
    fn hex_round_trip() {
        let x = BitWord::new(12, 0xabc);
        assert_eq!(x.to_hex(), "0xabc");
        assert_eq!(BitWord::from_hex(12, "0xabc").unwrap(), x);
        assert!(BitWord::from_hex(12, "abc").is_err());
    }

    #[test]
    fn bitset_halfspace_counts() {
        let gamma = BitWord::new(4, 0b0101);
        let s = Bitset::halfspace(&gamma);
        assert_eq!(s.len(), 8);
        for x in s.iter() {
            assert!(!x.dot(&gamma));
        }
    }
}
