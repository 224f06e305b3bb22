//! Affine partitions of (F2^n)^3 and the iterative Fourier refinement that
//! drives the decomposition guarantee.
//!
//! Each part has the form (a1 + V) x (a2 + V) x (a3 + V) with a single
//! subspace V shared by the three factors. Refinement repeatedly splits every
//! part along the character with the largest restricted coefficient of the
//! event indicators; a potential function bounded by 3 rises by at least
//! delta^3 per refining step, so the loop stops after at most 3/delta^3
//! steps and leaves codimension at most ceil(3/delta^3).

use num::bigint::BigInt;
use num::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::f2::{BitWord, Bitset, F2Error, Subspace};
use crate::fourier::{max_nonzero_coeff, CharacterIndex, FourierError};
use crate::games::ProductEvent;
use crate::rat::{dyadic, Rational};
use crate::AffineCoset;

/// Cap on the number of parts a partition may hold in memory.
pub const PART_CAP: usize = 1 << 20;

#[derive(Debug, Error)]
pub enum DecompError {
    #[error("cannot split along the trivial character")]
    TrivialCharacter,
    #[error("cannot split a part of dimension zero")]
    ZeroDimension,
    #[error("partition of {count} parts exceeds cap {cap}")]
    TooManyParts { count: usize, cap: usize },
    #[error("event has probability zero")]
    EmptyEvent,
    #[error(transparent)]
    F2(#[from] F2Error),
    #[error(transparent)]
    Fourier(#[from] FourierError),
}

/// One part (a1 + V) x (a2 + V) x (a3 + V). Shifts are stored basis-reduced,
/// so when the part meets supp(P) = {(x, y, x+y)} the shifts XOR to zero.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Part {
    shifts: [BitWord; 3],
    space: Subspace,
}

impl Part {
    pub fn new(shifts: [BitWord; 3], space: Subspace) -> Part {
        let shifts = shifts.map(|a| space.reduce(&a));
        Part { shifts, space }
    }

    pub fn full(n: usize) -> Part {
        Part { shifts: [BitWord::zero(n); 3], space: Subspace::full(n) }
    }

    pub fn shifts(&self) -> &[BitWord; 3] {
        &self.shifts
    }

    pub fn space(&self) -> &Subspace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn codim(&self) -> usize {
        self.space.codim()
    }

    pub fn coset(&self, player: usize) -> AffineCoset {
        AffineCoset::new(self.shifts[player], self.space.clone()).expect("shift dims match")
    }

    pub fn contains(&self, q: &[BitWord; 3]) -> bool {
        (0..3).all(|p| self.space.reduce(&q[p].xor(&self.shifts[p])).is_zero())
    }

    /// Whether the part meets the query support {(x, y, x+y)}.
    pub fn intersects_support(&self) -> bool {
        self.shifts[0].xor(&self.shifts[1]).xor(&self.shifts[2]).is_zero()
    }

    /// P(pi) under the n-fold query distribution: |V|^2/4^n on parts meeting
    /// the support, 0 elsewhere.
    pub fn prob(&self) -> Rational {
        if self.intersects_support() {
            dyadic(1, 2 * self.codim())
        } else {
            Rational::zero()
        }
    }

    /// mu_{pi_i}(E_i): the density of `set` inside factor `player`.
    pub fn measure(&self, player: usize, set: &Bitset) -> Result<Rational, DecompError> {
        let members = self.coset(player).members()?;
        let count = members.iter().filter(|x| set.contains(x)).count();
        Ok(Rational::new(BigInt::from(count), BigInt::one() << self.dim()))
    }

    /// Number of support queries in the part that land in E, i.e.
    /// |{(x, y): x in pi_1 cap E_1, y in pi_2 cap E_2, x+y in E_3}|.
    /// Zero for parts off the support.
    pub fn support_count(&self, e: &ProductEvent) -> Result<u128, DecompError> {
        if !self.intersects_support() {
            return Ok(0);
        }
        let xs: Vec<BitWord> = e.set(0).members_in_coset(&self.coset(0))?;
        let ys: Vec<BitWord> = e.set(1).members_in_coset(&self.coset(1))?;
        let mut count = 0u128;
        for x in &xs {
            for y in &ys {
                if e.set(2).contains(&x.xor(y)) {
                    count += 1;
                }
            }
        }
        Ok(count)
    }

    /// (P|pi)(E), the conditional event probability inside the part.
    pub fn conditional_event_prob(&self, e: &ProductEvent) -> Result<Rational, DecompError> {
        if !self.intersects_support() {
            return Ok(Rational::zero());
        }
        let count = self.support_count(e)?;
        Ok(Rational::new(BigInt::from(count), BigInt::one() << (2 * self.dim())))
    }

    /// The largest restricted nonzero coefficient over the three factors,
    /// with its maximizer (smallest player, then lexicographic gamma).
    /// `None` for dimension-zero parts, whose indicators are constant.
    pub fn max_coefficient(
        &self,
        e: &ProductEvent,
    ) -> Result<Option<(usize, CharacterIndex, Rational)>, DecompError> {
        if self.dim() == 0 {
            return Ok(None);
        }
        let mut best: Option<(usize, CharacterIndex, Rational)> = None;
        for player in 0..3 {
            let (gamma, mag) = max_nonzero_coeff(e.set(player), &self.coset(player))?;
            // max_nonzero_coeff already breaks ties toward lexicographically
            // smaller gamma, so across players strict improvement suffices.
            if best.as_ref().map_or(true, |(_, _, bm)| mag > *bm) {
                best = Some((player, gamma, mag));
            }
        }
        Ok(best)
    }

    /// Splits the part into 8 parts along character `gamma` of V, applied to
    /// each of the three factors: the subspace drops to the kernel of the
    /// character and the shifts range over both kernel cosets.
    pub fn split(&self, gamma: CharacterIndex) -> Result<Vec<Part>, DecompError> {
        let d = self.dim();
        if d == 0 {
            return Err(DecompError::ZeroDimension);
        }
        if gamma.is_trivial() || gamma.0 >> d != 0 {
            return Err(DecompError::TrivialCharacter);
        }
        let j0 = gamma.0.trailing_zeros() as usize;
        let w = self.space.basis()[j0];
        // Kernel basis: rows orthogonal to gamma, plus each remaining row
        // folded with the pivot row.
        let kernel_rows: Vec<BitWord> = self
            .space
            .basis()
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != j0)
            .map(|(j, b)| if gamma.0 >> j & 1 == 1 { b.xor(&w) } else { *b })
            .collect();
        let kernel = Subspace::rref_basis(self.space.n(), &kernel_rows)?;
        debug_assert_eq!(kernel.dim(), d - 1);
        let mut out = Vec::with_capacity(8);
        for mask in 0u32..8 {
            let shifts = [0, 1, 2].map(|p| {
                if mask >> p & 1 == 1 {
                    self.shifts[p].xor(&w)
                } else {
                    self.shifts[p]
                }
            });
            out.push(Part::new(shifts, kernel.clone()));
        }
        Ok(out)
    }
}

/// An affine partition of (F2^n)^3: pairwise-disjoint parts covering the
/// cube, every codimension at most `codim_bound`.
#[derive(Clone, Debug)]
pub struct AffinePartition {
    n: usize,
    parts: Vec<Part>,
    codim_bound: usize,
}

impl AffinePartition {
    pub fn trivial(n: usize) -> AffinePartition {
        AffinePartition { n, parts: vec![Part::full(n)], codim_bound: 0 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    pub fn codim_bound(&self) -> usize {
        self.codim_bound
    }

    /// Index of the part containing a query triple.
    pub fn find(&self, q: &[BitWord; 3]) -> Option<usize> {
        self.parts.iter().position(|p| p.contains(q))
    }

    /// Exact part weights P(pi); they sum to 1.
    pub fn weights(&self) -> Vec<Rational> {
        self.parts.iter().map(|p| p.prob()).collect()
    }

    /// The potential Phi = sum_i E_{pi ~ Pi(P)}[mu_{pi_i}(E_i)^2], a value
    /// in [0, 3] that rises by at least delta^3 on every refining step.
    pub fn potential(&self, e: &ProductEvent) -> Result<Rational, DecompError> {
        let mut phi = Rational::zero();
        for part in &self.parts {
            let w = part.prob();
            if w.is_zero() {
                continue;
            }
            for player in 0..3 {
                let mu = part.measure(player, e.set(player))?;
                phi += &w * &mu * &mu;
            }
        }
        Ok(phi)
    }

    /// Probability over pi ~ Pi(P) that some restricted nonzero coefficient
    /// of an event indicator exceeds delta.
    pub fn failure_probability(
        &self,
        e: &ProductEvent,
        delta: &Rational,
    ) -> Result<Rational, DecompError> {
        let flags = self.scan(e)?;
        let mut total = Rational::zero();
        for (part, max) in self.parts.iter().zip(&flags) {
            let w = part.prob();
            if w.is_zero() {
                continue;
            }
            if let Some((_, _, mag)) = max {
                if mag > delta {
                    total += w;
                }
            }
        }
        Ok(total)
    }

    /// Per-part maximizing (player, gamma, magnitude), concurrently.
    fn scan(
        &self,
        e: &ProductEvent,
    ) -> Result<Vec<Option<(usize, CharacterIndex, Rational)>>, DecompError> {
        self.parts.par_iter().map(|p| p.max_coefficient(e)).collect()
    }

    /// One refinement round: if the coefficient bound fails with probability
    /// more than delta over Pi(P), split every part along its own maximizer
    /// and report `true`; otherwise return the partition unchanged.
    pub fn refine_step(
        &self,
        e: &ProductEvent,
        delta: &Rational,
    ) -> Result<(AffinePartition, bool), DecompError> {
        self.refine_step_with(e, delta, false)
    }

    /// As [`refine_step`](Self::refine_step); with `split_failing_only` the
    /// round splits only the parts whose coefficient exceeds delta, an
    /// optimization that still meets every output guarantee.
    pub fn refine_step_with(
        &self,
        e: &ProductEvent,
        delta: &Rational,
        split_failing_only: bool,
    ) -> Result<(AffinePartition, bool), DecompError> {
        let flags = self.scan(e)?;
        let mut failure = Rational::zero();
        for (part, max) in self.parts.iter().zip(&flags) {
            if let Some((_, _, mag)) = max {
                if mag > delta && !part.prob().is_zero() {
                    failure += part.prob();
                }
            }
        }
        if failure <= *delta {
            return Ok((self.clone(), false));
        }
        if self.parts.len().saturating_mul(8) > PART_CAP {
            return Err(DecompError::TooManyParts { count: self.parts.len() * 8, cap: PART_CAP });
        }
        let mut parts = Vec::new();
        for (part, max) in self.parts.iter().zip(&flags) {
            let split_this = match max {
                // Dimension-zero parts have no nonzero character to split on.
                None => false,
                Some((_, _, mag)) => !split_failing_only || mag > delta,
            };
            if split_this {
                let (_, gamma, _) = max.as_ref().unwrap();
                parts.extend(part.split(*gamma)?);
            } else {
                parts.push(part.clone());
            }
        }
        let codim_bound = parts.iter().map(|p| p.codim()).max().unwrap_or(0);
        Ok((AffinePartition { n: self.n, parts, codim_bound }, true))
    }

    /// Samples a part index with probability (P|pi)(E) P(pi) / P(E), i.e.
    /// the part of a query drawn from P|E. Weights are exact integer counts.
    pub fn sample_part<R: Rng>(&self, e: &ProductEvent, rng: &mut R) -> Result<usize, DecompError> {
        let counts: Vec<u128> =
            self.parts.par_iter().map(|p| p.support_count(e)).collect::<Result<_, _>>()?;
        let total: u128 = counts.iter().sum();
        if total == 0 {
            return Err(DecompError::EmptyEvent);
        }
        let mut r = rng.gen_range(0..total);
        for (i, &c) in counts.iter().enumerate() {
            if r < c {
                return Ok(i);
            }
            r -= c;
        }
        unreachable!("threshold within total")
    }
}

/// Iterates [`refine_step`](AffinePartition::refine_step) to a fixpoint.
/// The result has codimension at most ceil(3/delta^3), and the coefficient
/// bound delta holds except with probability delta over Pi(P).
pub fn decompose(e: &ProductEvent, delta: &Rational) -> Result<(AffinePartition, usize), DecompError> {
    let mut partition = AffinePartition::trivial(e.n());
    let mut steps = 0;
    loop {
        let (next, refined) = partition.refine_step(e, delta)?;
        if !refined {
            let bound = codim_limit(delta);
            debug_assert!(next.parts.iter().all(|p| p.codim() <= bound));
            return Ok((AffinePartition { codim_bound: bound, ..next }, steps));
        }
        partition = next;
        steps += 1;
    }
}

/// ceil(3 / delta^3), the codimension and step bound of the refinement.
pub fn codim_limit(delta: &Rational) -> usize {
    use num::ToPrimitive;
    let cube = delta * delta * delta;
    (Rational::from_integer(3.into()) / cube).ceil().to_integer().to_usize().expect("small bound")
}

/// True iff the part is good for (E, alpha, delta): the conditional event
/// probability is at least alpha/10 and every restricted nonzero coefficient
/// of the three indicators is at most delta.
pub fn is_good(
    part: &Part,
    e: &ProductEvent,
    alpha: &Rational,
    delta: &Rational,
) -> Result<bool, DecompError> {
    let cond = part.conditional_event_prob(e)?;
    if cond < alpha / Rational::from_integer(10.into()) {
        return Ok(false);
    }
    match part.max_coefficient(e)? {
        None => Ok(true),
        Some((_, _, mag)) => Ok(mag <= *delta),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_int};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_event(rng: &mut ChaCha8Rng, n: usize, density: f64) -> ProductEvent {
        let sets = [0; 3].map(|_| {
            let mut s = Bitset::empty(n);
            for x in 0..1u32 << n {
                if rng.gen_bool(density) {
                    s.insert(&BitWord::new(n, x));
                }
            }
            s
        });
        ProductEvent::new(n, sets)
    }

    fn halfspace_event(n: usize, gamma: &BitWord) -> ProductEvent {
        ProductEvent::new(n, [Bitset::halfspace(gamma), Bitset::full(n), Bitset::full(n)])
    }

    #[test]
    fn trivial_partition_weights() {
        let p = AffinePartition::trivial(4);
        assert_eq!(p.parts().len(), 1);
        assert_eq!(p.weights(), vec![rat_int(1)]);
    }

    #[test]
    fn split_full_space() {
        let part = Part::full(4);
        let parts = part.split(CharacterIndex(0b0101)).unwrap();
        assert_eq!(parts.len(), 8);
        let mut supp_weight = Rational::zero();
        let mut supp_parts = 0;
        for p in &parts {
            assert_eq!(p.dim(), 3);
            if !p.prob().is_zero() {
                supp_parts += 1;
                supp_weight += p.prob();
                // Only even shift masks meet the support.
                assert!(p.intersects_support());
            }
        }
        assert_eq!(supp_parts, 4);
        assert_eq!(supp_weight, rat_int(1));
        // Each supported part carries |V'|^2/4^n = 2^6/2^8.
        assert_eq!(parts[0].prob(), rat(1, 4));
    }

    #[test]
    fn split_rejects_trivial_character() {
        let part = Part::full(3);
        assert!(matches!(part.split(CharacterIndex(0)), Err(DecompError::TrivialCharacter)));
        let point = Part::new([BitWord::zero(3); 3], Subspace::trivial(3));
        assert!(matches!(point.split(CharacterIndex(1)), Err(DecompError::ZeroDimension)));
    }

    #[test]
    fn double_split_covers_cube() {
        // Split twice with independent characters: 64 parts of codim 2,
        // every point of the cube in exactly one part.
        for n in 2..=3 {
            let first = Part::full(n).split(CharacterIndex(0b01)).unwrap();
            let parts: Vec<Part> =
                first.iter().flat_map(|p| p.split(CharacterIndex(0b01)).unwrap()).collect();
            assert_eq!(parts.len(), 64);
            assert!(parts.iter().all(|p| p.codim() == 2));
            for x in 0..1u32 << n {
                for y in 0..1u32 << n {
                    for z in 0..1u32 << n {
                        let q = [BitWord::new(n, x), BitWord::new(n, y), BitWord::new(n, z)];
                        let hits = parts.iter().filter(|p| p.contains(&q)).count();
                        assert_eq!(hits, 1);
                    }
                }
            }
        }
    }

    #[test]
    fn refined_partition_covers_cube_sampled() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let e = random_event(&mut rng, 6, 0.5);
        let (partition, _) = decompose(&e, &rat(3, 10)).unwrap();
        for _ in 0..2000 {
            let q = [0; 3].map(|_| BitWord::new(6, rng.gen_range(0..64)));
            let hits = partition.parts().iter().filter(|p| p.contains(&q)).count();
            assert_eq!(hits, 1, "point {:?} not covered exactly once", q);
        }
    }

    #[test]
    fn potential_of_trivial_partition() {
        let n = 4;
        let full = ProductEvent::full(n);
        let p = AffinePartition::trivial(n);
        assert_eq!(p.potential(&full).unwrap(), rat_int(3));

        let gamma = BitWord::new(n, 0b0011);
        let e = halfspace_event(n, &gamma);
        // mu(E1)^2 + 1 + 1 = 1/4 + 2.
        assert_eq!(p.potential(&e).unwrap(), rat(9, 4));
    }

    #[test]
    fn halfspace_refinement_raises_potential_by_coefficient_square() {
        let n = 5;
        let gamma = BitWord::new(n, 0b10110);
        let e = halfspace_event(n, &gamma);
        let p0 = AffinePartition::trivial(n);
        let (p1, refined) = p0.refine_step(&e, &rat(1, 10)).unwrap();
        assert!(refined);
        assert_eq!(p1.parts().len(), 8);
        // Phi: 9/4 -> 5/2, an increase of exactly the squared coefficient.
        assert_eq!(p0.potential(&e).unwrap(), rat(9, 4));
        assert_eq!(p1.potential(&e).unwrap(), rat(5, 2));
        // After the split every restricted indicator is constant per part.
        for part in p1.parts() {
            if let Some((_, _, mag)) = part.max_coefficient(&e).unwrap() {
                assert!(mag.is_zero());
            }
        }
        let (_, refined_again) = p1.refine_step(&e, &rat(1, 10)).unwrap();
        assert!(!refined_again);
    }

    #[test]
    fn refine_never_fires_above_half() {
        // Restricted coefficients of indicators never exceed 1/2.
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..10 {
            let e = random_event(&mut rng, 5, 0.4);
            let p = AffinePartition::trivial(5);
            let (_, refined) = p.refine_step(&e, &rat(11, 20)).unwrap();
            assert!(!refined);
        }
    }

    #[test]
    fn refining_step_gains_at_least_delta_cubed() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let delta = rat(3, 10);
        let gain = &delta * &delta * &delta;
        let mut refining_steps = 0;
        for _ in 0..30 {
            // Noisy halfspaces keep a coefficient near 1/2, forcing at least
            // one refinement round.
            let n = 5;
            let sets = [0; 3].map(|_| {
                let gamma = BitWord::new(n, rng.gen_range(1..1 << n));
                let mut s = Bitset::halfspace(&gamma);
                for _ in 0..3 {
                    let x = BitWord::new(n, rng.gen_range(0..1 << n));
                    if s.contains(&x) {
                        s.remove(&x);
                    } else {
                        s.insert(&x);
                    }
                }
                s
            });
            let e = ProductEvent::new(n, sets);
            let mut p = AffinePartition::trivial(5);
            loop {
                let before = p.potential(&e).unwrap();
                let (next, refined) = p.refine_step(&e, &delta).unwrap();
                if !refined {
                    break;
                }
                let after = next.potential(&e).unwrap();
                assert!(&after - &before >= gain, "gain {} below delta^3", after - before);
                refining_steps += 1;
                p = next;
            }
        }
        assert!(refining_steps > 0, "no refining step exercised");
    }

    #[test]
    fn decompose_full_event_is_trivial() {
        let (p, steps) = decompose(&ProductEvent::full(5), &rat(1, 10)).unwrap();
        assert_eq!(steps, 0);
        assert_eq!(p.parts().len(), 1);
    }

    #[test]
    fn decompose_halfspace_takes_one_step() {
        let gamma = BitWord::new(4, 0b1001);
        let e = halfspace_event(4, &gamma);
        let (p, steps) = decompose(&e, &rat(1, 10)).unwrap();
        assert_eq!(steps, 1);
        assert_eq!(p.parts().len(), 8);
    }

    #[test]
    fn decompose_output_verified_by_rescan() {
        // Independent verifier pass: rescan every part's full rational
        // spectrum and recompute the failure probability from scratch.
        use crate::fourier::{wht, DyadicTable};
        use num::Signed;
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..5 {
            let e = random_event(&mut rng, 8, 0.2);
            let delta = rat(3, 10);
            let (p, _) = decompose(&e, &delta).unwrap();
            assert!(p.parts().iter().all(|part| part.codim() <= codim_limit(&delta)));
            let mut failure = Rational::zero();
            for part in p.parts() {
                let w = part.prob();
                if w.is_zero() {
                    continue;
                }
                let mut bad = false;
                for player in 0..3 {
                    let coset = part.coset(player);
                    let f = DyadicTable::indicator(e.set(player), coset.clone()).unwrap();
                    let spec = wht(&f, coset.shift()).unwrap();
                    if spec.coeffs[1..].iter().any(|c| c.abs() > delta) {
                        bad = true;
                    }
                }
                if bad {
                    failure += w;
                }
            }
            assert!(failure <= delta);
            assert_eq!(failure, p.failure_probability(&e, &delta).unwrap());
        }
    }

    #[test]
    fn split_failing_only_mode_meets_guarantees() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let delta = rat(3, 10);
        for _ in 0..5 {
            let e = random_event(&mut rng, 6, 0.15);
            let mut p = AffinePartition::trivial(6);
            loop {
                let (next, refined) = p.refine_step_with(&e, &delta, true).unwrap();
                p = next;
                if !refined {
                    break;
                }
            }
            assert!(p.failure_probability(&e, &delta).unwrap() <= delta);
            assert!(p.parts().iter().all(|part| part.codim() <= codim_limit(&delta)));
        }
    }

    #[test]
    fn sample_single_part_is_certain() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let p = AffinePartition::trivial(3);
        let e = ProductEvent::full(3);
        for _ in 0..10 {
            assert_eq!(p.sample_part(&e, &mut rng).unwrap(), 0);
        }
    }

    #[test]
    fn sample_part_matches_exact_weights() {
        let n = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        let e = random_event(&mut rng, n, 0.5);
        let parts = Part::full(n).split(CharacterIndex(0b011)).unwrap();
        let codim_bound = 1;
        let partition = AffinePartition { n, parts, codim_bound };

        // Independent weight oracle: classify every support query in E.
        let mut counts = vec![0u64; partition.parts().len()];
        for x in 0..1u32 << n {
            for y in 0..1u32 << n {
                let q = [BitWord::new(n, x), BitWord::new(n, y), BitWord::new(n, x ^ y)];
                if e.contains(&q) {
                    counts[partition.find(&q).unwrap()] += 1;
                }
            }
        }
        let total: u64 = counts.iter().sum();
        assert!(total > 0);

        let draws = 20_000u64;
        let mut freq = vec![0u64; counts.len()];
        for _ in 0..draws {
            freq[partition.sample_part(&e, &mut rng).unwrap()] += 1;
        }
        for (i, (&c, &f)) in counts.iter().zip(&freq).enumerate() {
            if c == 0 {
                assert_eq!(f, 0, "zero-weight part {i} drawn");
                continue;
            }
            let p = c as f64 / total as f64;
            let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
            let diff = (f as f64 - draws as f64 * p).abs();
            assert!(diff <= 3.0 * sigma + 1.0, "part {i}: off by {diff} > 3 sigma {sigma}");
        }
    }

    #[test]
    fn sample_part_empty_event_fails() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let p = AffinePartition::trivial(3);
        let empty = ProductEvent::new(3, [Bitset::empty(3), Bitset::full(3), Bitset::full(3)]);
        assert!(matches!(p.sample_part(&empty, &mut rng), Err(DecompError::EmptyEvent)));
    }

    #[test]
    fn is_good_examples() {
        let part = Part::full(3);
        let full = ProductEvent::full(3);
        assert!(is_good(&part, &full, &rat_int(10), &rat(1, 10)).unwrap());

        let empty3 = ProductEvent::new(3, [Bitset::full(3), Bitset::full(3), Bitset::empty(3)]);
        assert!(!is_good(&part, &empty3, &rat(1, 2), &rat(1, 10)).unwrap());
    }

    #[test]
    fn is_good_agrees_with_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(48);
        for _ in 0..20 {
            let e = random_event(&mut rng, 4, 0.5);
            let parts = Part::full(4).split(CharacterIndex(0b0110)).unwrap();
            let alpha = rat(rng.gen_range(1..5), 8);
            let delta = rat(rng.gen_range(1..5), 10);
            for part in &parts {
                let expect = {
                    let cond = part.conditional_event_prob(&e).unwrap();
                    let coeff_ok = match part.max_coefficient(&e).unwrap() {
                        None => true,
                        Some((_, _, m)) => m <= delta,
                    };
                    cond >= &alpha / rat_int(10) && coeff_ok
                };
                assert_eq!(is_good(part, &e, &alpha, &delta).unwrap(), expect);
            }
        }
    }

    #[test]
    fn codim_limit_values() {
        assert_eq!(codim_limit(&rat(1, 2)), 24);
        assert_eq!(codim_limit(&rat(3, 10)), 112);
    }
}
