//! Exact Fourier analysis of real-valued functions on affine cosets of F2^n.
//!
//! Characters are indexed relative to the coset's RREF basis: `gamma` is a
//! bit vector of length dim(V) and `chi_gamma(v) = (-1)^{gamma . coords(v)}`.
//! The transform with respect to a shift `a` of the coset U = a + V is
//! `f_hat(chi) = E_{x ~ U}[f(x) chi(x + a)]`; magnitudes of coefficients are
//! independent of the chosen shift. All arithmetic is exact.

use num::Zero;
use thiserror::Error;

use crate::f2::{AffineCoset, BitWord, Bitset, F2Error};
use crate::rat::{dyadic, Rational};

#[derive(Debug, Error)]
pub enum FourierError {
    #[error("shift {shift} is not a member of the coset")]
    ShiftNotInCoset { shift: String },
    #[error("table has {got} entries, coset has {expected}")]
    TableSize { expected: usize, got: usize },
    #[error("coset of dimension 0 has no non-trivial character")]
    NoNonzeroCharacter,
    #[error(transparent)]
    F2(#[from] F2Error),
}

/// Index of a character relative to a subspace basis; bit `j` multiplies the
/// j-th basis coefficient. `gamma = 0` is the trivial character.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct CharacterIndex(pub u32);

impl CharacterIndex {
    pub const TRIVIAL: CharacterIndex = CharacterIndex(0);

    pub fn is_trivial(&self) -> bool {
        self.0 == 0
    }

    /// Key ordering characters lexicographically by coordinate sequence
    /// (coordinate 1 compared first).
    pub fn lex_key(&self, dim: usize) -> u32 {
        debug_assert!(dim <= 32);
        if dim == 0 {
            0
        } else {
            self.0.reverse_bits() >> (32 - dim)
        }
    }
}

/// A table of exact rationals over the members of a coset, in the coset's
/// deterministic member order.
#[derive(Clone, Debug)]
pub struct DyadicTable {
    pub coset: AffineCoset,
    pub values: Vec<Rational>,
}

impl DyadicTable {
    pub fn new(coset: AffineCoset, values: Vec<Rational>) -> Result<DyadicTable, FourierError> {
        let expected = 1usize << coset.dim();
        if values.len() != expected {
            return Err(FourierError::TableSize { expected, got: values.len() });
        }
        Ok(DyadicTable { coset, values })
    }

    pub fn constant(coset: AffineCoset, value: Rational) -> DyadicTable {
        let len = 1usize << coset.dim();
        DyadicTable { coset, values: vec![value; len] }
    }

    pub fn indicator(set: &Bitset, coset: AffineCoset) -> Result<DyadicTable, FourierError> {
        let values = coset
            .members()?
            .iter()
            .map(|x| if set.contains(x) { Rational::from_integer(1.into()) } else { Rational::zero() })
            .collect();
        Ok(DyadicTable { coset, values })
    }
}

/// Fourier coefficients indexed by `gamma` as an integer in `0..2^dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub dim: usize,
    pub coeffs: Vec<Rational>,
}

impl Spectrum {
    pub fn coeff(&self, gamma: CharacterIndex) -> &Rational {
        &self.coeffs[gamma.0 as usize]
    }
}

fn fwht_rational(t: &mut [Rational]) {
    let len = t.len();
    let mut h = 1;
    while h < len {
        for block in (0..len).step_by(h * 2) {
            for i in block..block + h {
                let a = t[i].clone();
                let b = t[i + h].clone();
                t[i] = &a + &b;
                t[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

fn fwht_i64(t: &mut [i64]) {
    let len = t.len();
    let mut h = 1;
    while h < len {
        for block in (0..len).step_by(h * 2) {
            for i in block..block + h {
                let a = t[i];
                let b = t[i + h];
                t[i] = a + b;
                t[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Rearranges a member-order table into coords-order with respect to `a`.
fn coords_order(f: &DyadicTable, a: &BitWord) -> Result<Vec<Rational>, FourierError> {
    let coset = &f.coset;
    if !coset.contains(a) {
        return Err(FourierError::ShiftNotInCoset { shift: a.to_hex() });
    }
    let members = coset.members()?;
    let mut t = vec![Rational::zero(); members.len()];
    for (k, x) in members.iter().enumerate() {
        let j = coset.space().coords(&x.xor(a)) as usize;
        t[j] = f.values[k].clone();
    }
    Ok(t)
}

/// The Walsh-Hadamard transform of `f` in the character basis with respect to
/// shift `a`: exact rationals, invertible via [`inverse_wht`].
pub fn wht(f: &DyadicTable, a: &BitWord) -> Result<Spectrum, FourierError> {
    let d = f.coset.dim();
    let mut t = coords_order(f, a)?;
    fwht_rational(&mut t);
    let scale = Rational::new(1.into(), num::BigInt::from(1u64) << d);
    for v in t.iter_mut() {
        *v = &*v * &scale;
    }
    Ok(Spectrum { dim: d, coeffs: t })
}

/// Reconstructs the member-order table from a spectrum; exact inverse of
/// [`wht`] with the same shift.
pub fn inverse_wht(
    spec: &Spectrum,
    coset: &AffineCoset,
    a: &BitWord,
) -> Result<DyadicTable, FourierError> {
    if !coset.contains(a) {
        return Err(FourierError::ShiftNotInCoset { shift: a.to_hex() });
    }
    let mut t = spec.coeffs.clone();
    fwht_rational(&mut t);
    let members = coset.members()?;
    let values = members
        .iter()
        .map(|x| t[coset.space().coords(&x.xor(a)) as usize].clone())
        .collect();
    DyadicTable::new(coset.clone(), values)
}

/// Scaled integer spectrum of an indicator: entry `gamma` is
/// `2^dim * S_hat(chi_gamma)` with respect to shift `a`.
pub fn indicator_spectrum_scaled(
    set: &Bitset,
    coset: &AffineCoset,
    a: &BitWord,
) -> Result<Vec<i64>, FourierError> {
    if !coset.contains(a) {
        return Err(FourierError::ShiftNotInCoset { shift: a.to_hex() });
    }
    let members = coset.members()?;
    let mut t = vec![0i64; members.len()];
    for x in members.iter() {
        if set.contains(x) {
            t[coset.space().coords(&x.xor(a)) as usize] = 1;
        }
    }
    fwht_i64(&mut t);
    Ok(t)
}

/// `|S_hat|_c(chi_gamma)|`, which is the same for every choice of shift.
pub fn restricted_coeff_abs(
    set: &Bitset,
    coset: &AffineCoset,
    gamma: CharacterIndex,
) -> Result<Rational, FourierError> {
    let scaled = indicator_spectrum_scaled(set, coset, coset.shift())?;
    Ok(dyadic(scaled[gamma.0 as usize].abs(), coset.dim()))
}

/// The non-trivial character with the largest restricted coefficient
/// magnitude, ties broken by lexicographically smallest `gamma`.
pub fn max_nonzero_coeff(
    set: &Bitset,
    coset: &AffineCoset,
) -> Result<(CharacterIndex, Rational), FourierError> {
    let d = coset.dim();
    if d == 0 {
        return Err(FourierError::NoNonzeroCharacter);
    }
    let scaled = indicator_spectrum_scaled(set, coset, coset.shift())?;
    let mut best = CharacterIndex(1);
    let mut best_abs = scaled[1].abs();
    for g in 2..scaled.len() as u32 {
        let a = scaled[g as usize].abs();
        let cand = CharacterIndex(g);
        if a > best_abs || (a == best_abs && cand.lex_key(d) < best.lex_key(d)) {
            best = cand;
            best_abs = a;
        }
    }
    Ok((best, dyadic(best_abs, d)))
}

/// `E[f^2] - sum_chi f_hat(chi)^2`; exactly zero by Parseval.
pub fn parseval_residual(f: &DyadicTable, a: &BitWord) -> Result<Rational, FourierError> {
    let d = f.coset.dim();
    let spec = wht(f, a)?;
    let energy: Rational = f.values.iter().map(|v| v * v).sum::<Rational>()
        / Rational::from_integer((1u64 << d).into());
    let spectral: Rational = spec.coeffs.iter().map(|c| c * c).sum();
    Ok(energy - spectral)
}

/// `<f, g> - sum_chi f_hat(chi) g_hat(chi)`; exactly zero by Plancherel.
pub fn plancherel_residual(
    f: &DyadicTable,
    g: &DyadicTable,
    a: &BitWord,
) -> Result<Rational, FourierError> {
    let d = f.coset.dim();
    let fs = wht(f, a)?;
    let gs = wht(g, a)?;
    let inner: Rational = f
        .values
        .iter()
        .zip(&g.values)
        .map(|(x, y)| x * y)
        .sum::<Rational>()
        / Rational::from_integer((1u64 << d).into());
    let spectral: Rational = fs.coeffs.iter().zip(&gs.coeffs).map(|(x, y)| x * y).sum();
    Ok(inner - spectral)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::f2::Subspace;
    use crate::rat::{rat, rat_int};
    use num::{One, Signed};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_coset(rng: &mut ChaCha8Rng, n: usize, rows: usize) -> AffineCoset {
        let words: Vec<BitWord> =
            (0..rows).map(|_| BitWord::new(n, rng.gen::<u32>() & ((1 << n) - 1))).collect();
        let space = Subspace::rref_basis(n, &words).unwrap();
        let shift = BitWord::new(n, rng.gen::<u32>() & ((1 << n) - 1));
        AffineCoset::new(shift, space).unwrap()
    }

    /// Direct-summation oracle: evaluates the defining expectation term by
    /// term, no butterfly.
    fn wht_oracle(f: &DyadicTable, a: &BitWord) -> Vec<Rational> {
        let coset = &f.coset;
        let d = coset.dim();
        let members = coset.members().unwrap();
        (0..1u32 << d)
            .map(|gamma| {
                let mut acc = Rational::zero();
                for (k, x) in members.iter().enumerate() {
                    let c = coset.space().coords(&x.xor(a));
                    let sign = if (c & gamma).count_ones() & 1 == 1 { -1 } else { 1 };
                    acc += &f.values[k] * rat_int(sign);
                }
                acc / rat_int(1 << d)
            })
            .collect()
    }

    #[test]
    fn wht_constant_function() {
        let c = AffineCoset::full(4);
        let f = DyadicTable::constant(c.clone(), Rational::one());
        let spec = wht(&f, c.shift()).unwrap();
        assert_eq!(spec.coeffs[0], Rational::one());
        assert!(spec.coeffs[1..].iter().all(|x| x.is_zero()));
    }

    #[test]
    fn wht_delta_function() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let c = random_coset(&mut rng, 8, 5);
        let d = c.dim();
        let a = *c.shift();
        let mut values = vec![Rational::zero(); 1 << d];
        let members = c.members().unwrap();
        let pos = members.iter().position(|x| *x == a).unwrap();
        values[pos] = Rational::one();
        let f = DyadicTable::new(c, values).unwrap();
        let spec = wht(&f, &a).unwrap();
        for coeff in &spec.coeffs {
            assert_eq!(coeff.abs(), rat(1, 1 << d));
        }
    }

    #[test]
    fn wht_matches_direct_summation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let c = random_coset(&mut rng, 8, 6);
            let mut set = Bitset::empty(8);
            for x in c.members().unwrap() {
                if rng.gen_bool(0.5) {
                    set.insert(&x);
                }
            }
            let f = DyadicTable::indicator(&set, c.clone()).unwrap();
            let members = c.members().unwrap();
            let a = members[rng.gen_range(0..members.len())];
            let spec = wht(&f, &a).unwrap();
            assert_eq!(spec.coeffs, wht_oracle(&f, &a));
        }
    }

    #[test]
    fn wht_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..20 {
            let c = random_coset(&mut rng, 6, 4);
            let values: Vec<Rational> =
                (0..1usize << c.dim()).map(|_| rat(rng.gen_range(-8..8), 8)).collect();
            let f = DyadicTable::new(c.clone(), values).unwrap();
            let members = c.members().unwrap();
            let a = members[rng.gen_range(0..members.len())];
            let spec = wht(&f, &a).unwrap();
            let back = inverse_wht(&spec, &c, &a).unwrap();
            assert_eq!(back.values, f.values);
        }
    }

    #[test]
    fn wht_rejects_foreign_shift() {
        let v = Subspace::rref_basis(2, &[BitWord::new(2, 0b11)]).unwrap();
        let c = AffineCoset::new(BitWord::new(2, 0b01), v).unwrap();
        let f = DyadicTable::constant(c, Rational::one());
        assert!(matches!(
            wht(&f, &BitWord::new(2, 0b11)),
            Err(FourierError::ShiftNotInCoset { .. })
        ));
    }

    #[test]
    fn restricted_coeff_superset_is_zero() {
        let c = AffineCoset::full(4);
        let set = Bitset::full(4);
        for g in 1..16 {
            assert!(restricted_coeff_abs(&set, &c, CharacterIndex(g)).unwrap().is_zero());
        }
    }

    #[test]
    fn restricted_coeff_two_point_coset() {
        // n=2, c = (1,0) + span{(1,1)}, S = {(1,0)}: the one non-trivial
        // coefficient has magnitude 1/2.
        let v = Subspace::rref_basis(2, &[BitWord::new(2, 0b11)]).unwrap();
        let c = AffineCoset::new(BitWord::new(2, 0b01), v).unwrap();
        let mut set = Bitset::empty(2);
        set.insert(&BitWord::new(2, 0b01));
        assert_eq!(restricted_coeff_abs(&set, &c, CharacterIndex(1)).unwrap(), rat(1, 2));
    }

    #[test]
    fn restricted_coeff_shift_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..30 {
            let c = random_coset(&mut rng, 8, 5);
            if c.dim() == 0 {
                continue;
            }
            let mut set = Bitset::empty(8);
            for x in c.members().unwrap() {
                if rng.gen_bool(0.4) {
                    set.insert(&x);
                }
            }
            let members = c.members().unwrap();
            let a = members[rng.gen_range(0..members.len())];
            let b = members[rng.gen_range(0..members.len())];
            let sa = indicator_spectrum_scaled(&set, &c, &a).unwrap();
            let sb = indicator_spectrum_scaled(&set, &c, &b).unwrap();
            for g in 0..sa.len() {
                assert_eq!(sa[g].abs(), sb[g].abs());
            }
        }
    }

    #[test]
    fn max_coeff_of_everything_is_lex_smallest() {
        // All non-trivial coefficients vanish, so the tie-break picks the
        // lexicographically smallest coordinate sequence: (0,0,0,0,1).
        let c = AffineCoset::full(5);
        let (gamma, mag) = max_nonzero_coeff(&Bitset::full(5), &c).unwrap();
        assert_eq!(gamma, CharacterIndex(0b10000));
        assert!(mag.is_zero());
    }

    #[test]
    fn max_coeff_of_halfspace() {
        // S = {x : gamma0 . x = 0} on the full space: the maximizer is gamma0
        // with coefficient exactly 1/2.
        let gamma0 = BitWord::new(6, 0b101100);
        let set = Bitset::halfspace(&gamma0);
        let c = AffineCoset::full(6);
        let (gamma, mag) = max_nonzero_coeff(&set, &c).unwrap();
        // On the full space the basis is the standard basis, so the character
        // index encodes gamma0 directly.
        assert_eq!(gamma.0, gamma0.bits());
        assert_eq!(mag, rat(1, 2));
    }

    #[test]
    fn max_coeff_matches_full_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..30 {
            let c = random_coset(&mut rng, 7, 5);
            if c.dim() == 0 {
                continue;
            }
            let mut set = Bitset::empty(7);
            for x in c.members().unwrap() {
                if rng.gen_bool(0.5) {
                    set.insert(&x);
                }
            }
            let d = c.dim();
            let (gamma, mag) = max_nonzero_coeff(&set, &c).unwrap();
            // Independent scan over all characters via the rational transform.
            let f = DyadicTable::indicator(&set, c.clone()).unwrap();
            let spec = wht(&f, c.shift()).unwrap();
            let mut best: Option<(CharacterIndex, Rational)> = None;
            for g in 1..1u32 << d {
                let a = spec.coeffs[g as usize].abs();
                let replace = match &best {
                    None => true,
                    Some((bg, ba)) => {
                        a > *ba || (a == *ba && CharacterIndex(g).lex_key(d) < bg.lex_key(d))
                    }
                };
                if replace {
                    best = Some((CharacterIndex(g), a));
                }
            }
            let (og, oa) = best.unwrap();
            assert_eq!((gamma, mag.clone()), (og, oa));
            assert!(mag <= rat(1, 2));
        }
    }

    #[test]
    fn max_coeff_rejects_zero_dim() {
        let c = AffineCoset::new(BitWord::zero(3), Subspace::trivial(3)).unwrap();
        assert!(matches!(
            max_nonzero_coeff(&Bitset::full(3), &c),
            Err(FourierError::NoNonzeroCharacter)
        ));
    }

    #[test]
    fn parseval_residual_is_zero() {
        let c = AffineCoset::full(3);
        let f = DyadicTable::constant(c.clone(), Rational::one());
        assert!(parseval_residual(&f, c.shift()).unwrap().is_zero());

        // Indicator of half the coset.
        let gamma = BitWord::new(3, 0b011);
        let half = Bitset::halfspace(&gamma);
        let f = DyadicTable::indicator(&half, c.clone()).unwrap();
        assert!(parseval_residual(&f, c.shift()).unwrap().is_zero());

        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for _ in 0..100 {
            let c = random_coset(&mut rng, 6, 5);
            let values: Vec<Rational> =
                (0..1usize << c.dim()).map(|_| rat(rng.gen_range(-16..16), 16)).collect();
            let f = DyadicTable::new(c.clone(), values).unwrap();
            let members = c.members().unwrap();
            let a = members[rng.gen_range(0..members.len())];
            assert!(parseval_residual(&f, &a).unwrap().is_zero());
        }
    }

    #[test]
    fn plancherel_residual_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        for _ in 0..50 {
            let c = random_coset(&mut rng, 6, 4);
            let mk = |rng: &mut ChaCha8Rng| {
                let values: Vec<Rational> =
                    (0..1usize << c.dim()).map(|_| rat(rng.gen_range(-8..8), 4)).collect();
                DyadicTable::new(c.clone(), values).unwrap()
            };
            let f = mk(&mut rng);
            let g = mk(&mut rng);
            let members = c.members().unwrap();
            let a = members[rng.gen_range(0..members.len())];
            assert!(plancherel_residual(&f, &g, &a).unwrap().is_zero());
        }
    }

    #[test]
    fn trivial_coefficient_is_measure() {
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        for _ in 0..20 {
            let c = random_coset(&mut rng, 7, 6);
            let mut set = Bitset::empty(7);
            let mut count = 0u64;
            for x in c.members().unwrap() {
                if rng.gen_bool(0.5) {
                    set.insert(&x);
                    count += 1;
                }
            }
            let scaled = indicator_spectrum_scaled(&set, &c, c.shift()).unwrap();
            assert_eq!(scaled[0] as u64, count);
        }
    }
}
