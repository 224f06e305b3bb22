//! The bow-tie analysis of a good part: the edge graph on pi_1 x pi_2, the
//! per-z matchings, the vector v averaging the 1_z indicators, exact bow-tie
//! enumeration and seeded sampling, and the exact inequality checks (the
//! two-term Fourier lemma, the l1/l2 norm bounds, the uniformity criterion)
//! together with the embedding of bow-tie strategies into the one-fold game.

use std::collections::BTreeMap;
use std::collections::HashMap;

use num::bigint::BigInt;
use num::{One, Signed, Zero};
use rand::Rng;
use thiserror::Error;

use crate::decomposition::{DecompError, Part};
use crate::f2::{BitWord, F2Error};
use crate::fourier::{max_nonzero_coeff, FourierError};
use crate::games::{Game, GameError, ProductEvent, Strategy};
use crate::rat::{rat_u128, Rational};
use crate::AffineCoset;

/// Default cap on exact bow-tie enumeration; larger instances must use the
/// seeded sampler.
pub const DEFAULT_BOWTIE_CAP: u128 = 10_000_000;

#[derive(Debug, Error)]
pub enum BowTieError {
    #[error("part shifts must XOR to zero (part off the query support)")]
    NonCanonicalPart,
    #[error("z = {z} is not in E3 intersected with pi_3")]
    ZOutsideDomain { z: String },
    #[error("E3 intersected with pi_3 is empty")]
    EmptyE3,
    #[error("graph has no bow ties")]
    NoBowTies,
    #[error("{count} bow ties exceed enumeration cap {cap}; use the sampler")]
    TooManyBowTies { count: u128, cap: u128 },
    #[error("coordinate {i} is not a differing coordinate of the bow tie")]
    NotDiffering { i: usize },
    #[error(transparent)]
    F2(#[from] F2Error),
    #[error(transparent)]
    Fourier(#[from] FourierError),
    #[error(transparent)]
    Decomp(#[from] DecompError),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// The bipartite edge graph of a part: an edge (x, y) for every query
/// (x, y, x+y) in supp(P) cap E cap pi. The uniform distribution on edges
/// is exactly P|E,pi.
pub struct EdgeGraph {
    part: Part,
    event: ProductEvent,
    /// E_i cap pi_i member lists, in coset member order.
    members: [Vec<BitWord>; 3],
    edges: Vec<(BitWord, BitWord)>,
    edge_index: HashMap<(BitWord, BitWord), usize>,
}

/// Builds the edge graph of `part` under `event`. The part must lie on the
/// query support, i.e. its canonical shifts XOR to zero.
pub fn build_graph(event: &ProductEvent, part: &Part) -> Result<EdgeGraph, BowTieError> {
    if !part.intersects_support() {
        return Err(BowTieError::NonCanonicalPart);
    }
    let members = [0, 1, 2]
        .map(|p| event.set(p).members_in_coset(&part.coset(p)));
    let [m0, m1, m2] = members;
    let members = [m0?, m1?, m2?];
    let mut edges = Vec::new();
    for &x in &members[0] {
        for &y in &members[1] {
            if event.set(2).contains(&x.xor(&y)) {
                edges.push((x, y));
            }
        }
    }
    edges.sort();
    let edge_index = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    Ok(EdgeGraph { part: part.clone(), event: event.clone(), members, edges, edge_index })
}

impl EdgeGraph {
    pub fn part(&self) -> &Part {
        &self.part
    }

    pub fn event(&self) -> &ProductEvent {
        &self.event
    }

    pub fn n(&self) -> usize {
        self.event.n()
    }

    pub fn edges(&self) -> &[(BitWord, BitWord)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_edge(&self, x: &BitWord, y: &BitWord) -> bool {
        self.edge_index.contains_key(&(*x, *y))
    }

    /// E_i cap pi_i, in coset member order.
    pub fn event_members(&self, player: usize) -> &[BitWord] {
        &self.members[player]
    }

    /// mu_{pi_i}(E_i) exactly.
    pub fn mu(&self, player: usize) -> Rational {
        rat_u128(self.members[player].len() as u128, 1u128 << self.part.dim())
    }

    fn in_e(&self, player: usize, w: &BitWord) -> bool {
        self.event.set(player).contains(w)
    }

    /// The matching M_z: edges (x, x+z) with both endpoints in the event.
    pub fn matching(&self, z: &BitWord) -> Result<Vec<(BitWord, BitWord)>, BowTieError> {
        self.require_z(z)?;
        Ok(self
            .members[0]
            .iter()
            .filter(|x| self.in_e(1, &x.xor(z)))
            .map(|&x| (x, x.xor(z)))
            .collect())
    }

    /// wt_pi(z) = E_{x ~ pi_1}[E_1(x) E_2(x+z)], defined for any z in pi_3;
    /// equals mu(L_z) = mu(R_z) and |M_z|/|V|.
    pub fn weight(&self, z: &BitWord) -> Rational {
        let count = self.members[0].iter().filter(|x| self.in_e(1, &x.xor(z))).count();
        rat_u128(count as u128, 1u128 << self.part.dim())
    }

    fn require_z(&self, z: &BitWord) -> Result<(), BowTieError> {
        if self.in_e(2, z) && self.part.coset(2).contains(z) {
            Ok(())
        } else {
            Err(BowTieError::ZOutsideDomain { z: z.to_hex() })
        }
    }

    /// The indicator 1_z over edges: 1 on ((L_z x R_z) \ M_z) cap E(G),
    /// i.e. edges whose endpoints are both matched in M_z but not to each
    /// other.
    pub fn ones_vector(&self, z: &BitWord) -> Result<Vec<bool>, BowTieError> {
        self.require_z(z)?;
        Ok(self
            .edges
            .iter()
            .map(|(x, y)| {
                self.in_e(1, &x.xor(z)) && self.in_e(0, &y.xor(z)) && x.xor(y) != *z
            })
            .collect())
    }

    /// Number of bow ties containing the edge (x, y): the number of second
    /// difference points z' in E_3 cap pi_3 with y+z' in E_1 and x+z' in
    /// E_2, minus one for z' = x+y itself. Zero off the edge set.
    pub fn count_containing(&self, x: &BitWord, y: &BitWord) -> u64 {
        if !self.is_edge(x, y) {
            return 0;
        }
        let hits = self
            .members[2]
            .iter()
            .filter(|z| self.in_e(0, &y.xor(z)) && self.in_e(1, &x.xor(z)))
            .count() as u64;
        hits - 1
    }

    /// v = E_{z ~ E_3 cap pi_3}[1_z], as exact per-edge rationals.
    pub fn bowtie_vector(&self) -> Result<BowTieVector, BowTieError> {
        let m3 = self.members[2].len() as u64;
        if m3 == 0 {
            return Err(BowTieError::EmptyE3);
        }
        let counts = self.edges.iter().map(|(x, y)| self.count_containing(x, y)).collect();
        Ok(BowTieVector { counts, m3 })
    }
}

/// The vector v over edges, stored as integer bow-tie counts over the
/// denominator |E_3 cap pi_3|: v(e) = counts[e]/m3.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BowTieVector {
    /// Per edge, the number of bow ties containing it.
    pub counts: Vec<u64>,
    /// |E_3 cap pi_3|.
    pub m3: u64,
}

impl BowTieVector {
    pub fn value(&self, edge: usize) -> Rational {
        rat_u128(self.counts[edge] as u128, self.m3 as u128)
    }

    pub fn values(&self) -> Vec<Rational> {
        (0..self.counts.len()).map(|e| self.value(e)).collect()
    }

    pub fn l1(&self) -> Rational {
        let total: u128 = self.counts.iter().map(|&c| c as u128).sum();
        rat_u128(total, self.m3 as u128)
    }

    pub fn l2_squared(&self) -> Rational {
        let total: u128 = self.counts.iter().map(|&c| (c as u128) * (c as u128)).sum();
        rat_u128(total, (self.m3 as u128) * (self.m3 as u128))
    }
}

/// A bow tie {x0, x1} x {y0, y1} in canonical form: x0 < x1 and y0 < y1.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct BowTie {
    pub x: [BitWord; 2],
    pub y: [BitWord; 2],
}

impl BowTie {
    pub fn new(x: [BitWord; 2], y: [BitWord; 2]) -> BowTie {
        let x = if x[0] <= x[1] { x } else { [x[1], x[0]] };
        let y = if y[0] <= y[1] { y } else { [y[1], y[0]] };
        BowTie { x, y }
    }

    /// The common difference d = x0+x1 = y0+y1 = z0+z1.
    pub fn diff(&self) -> BitWord {
        self.x[0].xor(&self.x[1])
    }

    pub fn z(&self) -> [BitWord; 2] {
        [self.x[0].xor(&self.y[0]), self.x[0].xor(&self.y[1])]
    }

    pub fn differs_at(&self, i: usize) -> bool {
        self.diff().bit(i)
    }

    /// Differing coordinates, ascending.
    pub fn differing_coords(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|&i| self.differs_at(i)).collect()
    }

    /// The four edges, in (i, j) order.
    pub fn edges(&self) -> [(BitWord, BitWord); 4] {
        [
            (self.x[0], self.y[0]),
            (self.x[0], self.y[1]),
            (self.x[1], self.y[0]),
            (self.x[1], self.y[1]),
        ]
    }

    pub fn contains_edge(&self, x: &BitWord, y: &BitWord) -> bool {
        self.x.contains(x) && self.y.contains(y)
    }

    /// The game conditioned on the uniform distribution over the bow tie's
    /// four corners as n-fold queries.
    pub fn game(&self, n: usize) -> Result<Game, BowTieError> {
        let support: Vec<[BitWord; 3]> =
            self.edges().iter().map(|(x, y)| [*x, *y, x.xor(y)]).collect();
        let quarter = Rational::new(BigInt::one(), BigInt::from(4));
        Ok(Game::ghz_with_distribution(n, support, vec![quarter; 4])?)
    }
}

/// One difference class of the sampler: all bow ties with d = x0+x1 fixed.
/// Ordered corner representatives (x, y) with x in A_d, y in B_d, x+y in
/// C_d are exactly the 4|B_d| corners of the class's bow ties.
struct DiffClass {
    d: BitWord,
    xs: Vec<BitWord>,
    /// prefix[i] = number of ordered corners with x among xs[..=i].
    prefix: Vec<u128>,
    ys: Vec<BitWord>,
    count: u128,
}

/// Exact per-difference-class counts supporting uniform bow-tie sampling
/// and the exact differing-coordinate statistic.
pub struct BowTieSampler {
    n: usize,
    e3: crate::f2::Bitset,
    classes: Vec<DiffClass>,
    /// Sum of ordered corner counts = 4 |B|.
    total_ordered: u128,
}

impl BowTieSampler {
    pub fn new(graph: &EdgeGraph) -> Result<BowTieSampler, BowTieError> {
        let part = graph.part();
        let v = AffineCoset::new(BitWord::zero(graph.n()), part.space().clone())?;
        let mut classes = Vec::new();
        let mut total_ordered = 0u128;
        for d in v.members()? {
            if d.is_zero() {
                continue;
            }
            let xs: Vec<BitWord> = graph
                .event_members(0)
                .iter()
                .filter(|x| graph.in_e(0, &x.xor(&d)))
                .copied()
                .collect();
            let ys: Vec<BitWord> = graph
                .event_members(1)
                .iter()
                .filter(|y| graph.in_e(1, &y.xor(&d)))
                .copied()
                .collect();
            if xs.is_empty() || ys.is_empty() {
                continue;
            }
            let in_c = |z: BitWord| graph.in_e(2, &z) && graph.in_e(2, &z.xor(&d));
            let mut prefix = Vec::with_capacity(xs.len());
            let mut acc = 0u128;
            for x in &xs {
                acc += ys.iter().filter(|y| in_c(x.xor(y))).count() as u128;
                prefix.push(acc);
            }
            if acc == 0 {
                continue;
            }
            total_ordered += acc;
            classes.push(DiffClass { d, xs, prefix, ys, count: acc });
        }
        if total_ordered == 0 {
            return Err(BowTieError::NoBowTies);
        }
        Ok(BowTieSampler {
            n: graph.n(),
            e3: graph.event().set(2).clone(),
            classes,
            total_ordered,
        })
    }

    /// z is a valid second corner difference for the class: both z and z+d
    /// lie in E_3. (z is in pi_3 automatically, being a sum of a pi_1 and a
    /// pi_2 member.)
    fn in_c(&self, class: &DiffClass, z: BitWord) -> bool {
        self.e3.contains(&z) && self.e3.contains(&z.xor(&class.d))
    }

    /// |B|, the exact number of bow ties.
    pub fn count(&self) -> u128 {
        self.total_ordered / 4
    }

    /// Number of bow ties with difference `d`.
    pub fn count_for_diff(&self, d: &BitWord) -> u128 {
        self.classes.iter().find(|c| c.d == *d).map_or(0, |c| c.count / 4)
    }

    /// A uniform bow tie: a uniform ordered corner, collapsed to its
    /// canonical bow tie (each bow tie has exactly four ordered corners).
    pub fn sample<R: Rng>(&self, rng: &mut R) -> BowTie {
        let mut r = rng.gen_range(0..self.total_ordered);
        let class = self
            .classes
            .iter()
            .find(|c| {
                if r < c.count {
                    true
                } else {
                    r -= c.count;
                    false
                }
            })
            .expect("threshold within total");
        let xi = class.prefix.partition_point(|&p| p <= r);
        let x = class.xs[xi];
        let mut k = r - if xi == 0 { 0 } else { class.prefix[xi - 1] };
        let d = class.d;
        for y in &class.ys {
            if self.in_c(class, x.xor(y)) {
                if k == 0 {
                    return BowTie::new([x, x.xor(&d)], [*y, y.xor(&d)]);
                }
                k -= 1;
            }
        }
        unreachable!("corner index within class count")
    }

    /// Exact Pr_{i ~ [n], b ~ B}[b differs at i] = E_b[hwt(d_b)]/n.
    pub fn differing_fraction(&self) -> Rational {
        let weighted: u128 = self
            .classes
            .iter()
            .map(|c| c.count / 4 * c.d.hamming_weight() as u128)
            .sum();
        rat_u128(weighted, self.count() * self.n as u128)
    }

    /// Seeded Monte Carlo estimate of the differing fraction with its
    /// standard error.
    pub fn differing_fraction_sampled<R: Rng>(&self, rng: &mut R, draws: usize) -> (f64, f64) {
        assert!(draws > 0);
        let n = self.n as f64;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..draws {
            let f = self.sample(rng).diff().hamming_weight() as f64 / n;
            sum += f;
            sumsq += f * f;
        }
        let mean = sum / draws as f64;
        let var = (sumsq / draws as f64 - mean * mean).max(0.0);
        (mean, (var / draws as f64).sqrt())
    }

    /// All bow ties exactly once, in canonical sorted order. Errors when the
    /// pre-counted |B| exceeds `cap`.
    pub fn enumerate(&self, cap: u128) -> Result<Vec<BowTie>, BowTieError> {
        let count = self.count();
        if count > cap {
            return Err(BowTieError::TooManyBowTies { count, cap });
        }
        let mut out = Vec::with_capacity(count as usize);
        for class in &self.classes {
            let d = class.d;
            for x in &class.xs {
                if *x > x.xor(&d) {
                    continue;
                }
                for y in &class.ys {
                    if *y > y.xor(&d) {
                        continue;
                    }
                    if self.in_c(class, x.xor(y)) {
                        out.push(BowTie::new([*x, x.xor(&d)], [*y, y.xor(&d)]));
                    }
                }
            }
        }
        debug_assert_eq!(out.len() as u128, count);
        out.sort();
        Ok(out)
    }
}

/// Enumerates all bow ties of the graph under the default cap.
pub fn enumerate_bowties(graph: &EdgeGraph) -> Result<Vec<BowTie>, BowTieError> {
    enumerate_bowties_capped(graph, DEFAULT_BOWTIE_CAP)
}

pub fn enumerate_bowties_capped(
    graph: &EdgeGraph,
    cap: u128,
) -> Result<Vec<BowTie>, BowTieError> {
    BowTieSampler::new(graph)?.enumerate(cap)
}

/// Exact report of the two-term Fourier lemma on one instance.
#[derive(Clone, Debug)]
pub struct Lemma41Report {
    pub mu: [Rational; 3],
    pub delta1: Rational,
    pub delta2: Rational,
    pub lhs1: Rational,
    pub lhs2: Rational,
    pub pass1: bool,
    pub pass2: bool,
}

/// Checks both displayed bounds of the two-term Fourier lemma for sets
/// A, B, C inside the factors of `part` (shifts XORing to zero): the
/// bilinear average is within delta1 of the product of measures, and the
/// squared-inner average is within delta2^2 + delta1, where delta1 and
/// delta2 are the largest nonzero restricted coefficients of C and B.
/// Left-hand sides are computed by direct integer counting, independent of
/// the Fourier machinery.
pub fn check_lemma41(
    a: &crate::f2::Bitset,
    b: &crate::f2::Bitset,
    c: &crate::f2::Bitset,
    part: &Part,
) -> Result<Lemma41Report, BowTieError> {
    if !part.intersects_support() {
        return Err(BowTieError::NonCanonicalPart);
    }
    let d = part.dim();
    let size = 1u128 << d;
    let cosets = [part.coset(0), part.coset(1), part.coset(2)];
    let xs = a.members_in_coset(&cosets[0])?;
    let zs: Vec<BitWord> = cosets[2].members()?.into_iter().filter(|z| c.contains(z)).collect();
    let mu = [
        rat_u128(xs.len() as u128, size),
        rat_u128(b.members_in_coset(&cosets[1])?.len() as u128, size),
        rat_u128(zs.len() as u128, size),
    ];

    let coeff = |set: &crate::f2::Bitset, coset: &AffineCoset| -> Result<Rational, BowTieError> {
        if d == 0 {
            Ok(Rational::zero())
        } else {
            Ok(max_nonzero_coeff(set, coset)?.1)
        }
    };
    let delta1 = coeff(c, &cosets[2])?;
    let delta2 = coeff(b, &cosets[1])?;

    // LHS1 = E_{x,z}[A(x) B(x+z) C(z)]; LHS2 = E_z[(E_x[A(x)B(x+z)])^2 C(z)].
    let mut cnt1 = 0u128;
    let mut cnt2 = 0u128;
    for z in &zs {
        let m: u128 = xs.iter().filter(|x| b.contains(&x.xor(z))).count() as u128;
        cnt1 += m;
        cnt2 += m * m;
    }
    let lhs1 = rat_u128(cnt1, size * size);
    let lhs2 = rat_u128(cnt2, size * size * size);

    let prod1 = &mu[0] * &mu[1] * &mu[2];
    let prod2 = &mu[0] * &mu[0] * &mu[1] * &mu[1] * &mu[2];
    let pass1 = (&lhs1 - &prod1).abs() <= delta1;
    let pass2 = (&lhs2 - &prod2).abs() <= &delta2 * &delta2 + &delta1;
    Ok(Lemma41Report { mu, delta1, delta2, lhs1, lhs2, pass1, pass2 })
}

/// Exact report of the l1/l2 norm bounds and the weight-second-moment bound.
#[derive(Clone, Debug)]
pub struct NormReport {
    pub mu: [Rational; 3],
    /// Instance delta: largest nonzero restricted coefficient across the
    /// three event indicators.
    pub delta: Rational,
    pub l1: Rational,
    pub l2_squared: Rational,
    pub l1_lower_bound: Rational,
    pub l1_pass: bool,
    /// The l2 bound l2sq <= |V|^2 (mu1^3 mu2^3 mu3 + 10 sqrt(delta)),
    /// verified in squared form.
    pub l2_pass: bool,
    /// |E_{z ~ E3 cap pi3}[wt(z)^2] - mu1^2 mu2^2| <= 2 delta / mu3.
    pub weight_pass: bool,
}

/// Checks the l1 lower bound, the l2 upper bound and the weight
/// second-moment bound on the graph, using the instance's actual largest
/// restricted coefficient as delta. Comparisons against sqrt(delta) stay in
/// rationals by squaring.
pub fn check_norm_bounds(graph: &EdgeGraph) -> Result<NormReport, BowTieError> {
    let part = graph.part();
    let d = part.dim();
    let mu = [graph.mu(0), graph.mu(1), graph.mu(2)];
    let mut delta = Rational::zero();
    if d > 0 {
        for player in 0..3 {
            let (_, mag) = max_nonzero_coeff(graph.event().set(player), &part.coset(player))?;
            if mag > delta {
                delta = mag;
            }
        }
    }
    let v = graph.bowtie_vector()?;
    let l1 = v.l1();
    let l2sq = v.l2_squared();
    let vol = Rational::new(BigInt::one() << d, BigInt::one());
    let vol2 = &vol * &vol;

    // l1 >= |V|^2 (mu1^2 mu2^2 mu3 - 3 delta) - |V| (mu1 mu2 + 2 delta/mu3).
    let three_delta = Rational::from_integer(3.into()) * &delta;
    let lower = &vol2 * (&mu[0] * &mu[0] * &mu[1] * &mu[1] * &mu[2] - three_delta)
        - &vol
            * (&mu[0] * &mu[1]
                + Rational::from_integer(2.into()) * &delta / &mu[2]);
    let l1_pass = l1 >= lower;

    // l2sq <= |V|^2 (mu1^3 mu2^3 mu3 + 10 sqrt(delta)), i.e. with
    // L = l2sq/|V|^2 - mu1^3 mu2^3 mu3: L <= 0 or L^2 <= 100 delta.
    let head = &mu[0] * &mu[0] * &mu[0] * &mu[1] * &mu[1] * &mu[1] * &mu[2];
    let excess = &l2sq / &vol2 - head;
    let l2_pass =
        !excess.is_positive() || &excess * &excess <= Rational::from_integer(100.into()) * &delta;

    // E_{z ~ E3 cap pi3}[wt(z)^2] within 2 delta / mu3 of mu1^2 mu2^2.
    let m3 = graph.event_members(2).len() as u128;
    let mut wt_sq = Rational::zero();
    for z in graph.event_members(2) {
        let w = graph.weight(z);
        wt_sq += &w * &w;
    }
    wt_sq /= rat_u128(m3, 1);
    let weight_pass = (&wt_sq - &mu[0] * &mu[0] * &mu[1] * &mu[1]).abs()
        <= Rational::from_integer(2.into()) * &delta / &mu[2];

    Ok(NormReport {
        mu,
        delta,
        l1,
        l2_squared: l2sq,
        l1_lower_bound: lower,
        l1_pass,
        l2_pass,
        weight_pass,
    })
}

/// Exact uniformity report for a nonnegative vector with positive l1 mass.
#[derive(Clone, Debug)]
pub struct UniformityReport {
    pub m: usize,
    /// s = m ||v~||_2^2 = (1 + beta)^2 exactly; beta = sqrt(s) - 1.
    pub s: Rational,
    /// ||v~ - u~||_1 exactly (twice the total variation distance).
    pub tv_l1: Rational,
    /// Whether beta <= 1, i.e. s <= 4, the criterion's hypothesis.
    pub applicable: bool,
    /// ||v~ - u~||_1 <= sqrt(3 beta), verified as (tv^2/3 + 1)^2 <= s.
    pub pass: bool,
}

/// The uniformity criterion: normalizes `v`, computes s = (1+beta)^2 and
/// the exact l1 distance to uniform, and checks the sqrt(3 beta) bound in
/// squared-rational form. Also verifies the exact identity
/// ||v~ - u~||_2^2 = (2 beta + beta^2)/m = (s-1)/m and Cauchy-Schwarz.
pub fn uniformity_check(v: &[Rational]) -> Result<UniformityReport, BowTieError> {
    let m = v.len();
    let l1: Rational = v.iter().sum();
    if m == 0 || !l1.is_positive() {
        return Err(BowTieError::NoBowTies);
    }
    let m_rat = Rational::from_integer(BigInt::from(m));
    let uniform = m_rat.recip();
    let mut l2sq = Rational::zero();
    let mut tv_l1 = Rational::zero();
    let mut dist2 = Rational::zero();
    for entry in v {
        let t = entry / &l1;
        l2sq += &t * &t;
        let diff = &t - &uniform;
        tv_l1 += diff.abs();
        dist2 += &diff * &diff;
    }
    let s = &m_rat * &l2sq;
    // ||v~ - u~||_2^2 = (s - 1)/m, exactly; and tv^2 <= m ||v~ - u~||_2^2.
    let excess = (&s - Rational::one()) / &m_rat;
    debug_assert_eq!(dist2, excess);
    debug_assert!(&tv_l1 * &tv_l1 <= &m_rat * &excess);
    let applicable = s <= Rational::from_integer(4.into());
    let third = &tv_l1 * &tv_l1 / Rational::from_integer(3.into()) + Rational::one();
    let pass = applicable && &third * &third <= s;
    Ok(UniformityReport { m, s, tv_l1, applicable, pass })
}

/// The uniformity report of the graph's bow-tie distribution v~.
pub fn tv_to_uniform(graph: &EdgeGraph) -> Result<UniformityReport, BowTieError> {
    uniformity_check(&graph.bowtie_vector()?.values())
}

/// Embeds a strategy for the bow-tie-supported game into the one-fold game
/// along differing coordinate `i`. After swap normalization (corner labels
/// chosen so x0(i) = y0(i) = 0), the induced answer of player j on question
/// a is bit i of the bow-tie answer on the corresponding corner; the
/// one-fold success of the result equals the coordinate-i success of `fbar`
/// on the bow tie exactly.
pub fn embed_strategies(
    b: &BowTie,
    i: usize,
    fbar: &Strategy,
) -> Result<Strategy, BowTieError> {
    if !b.differs_at(i) {
        return Err(BowTieError::NotDiffering { i });
    }
    // Swap normalization: relabel within each pair so index = bit i. An even
    // number of swaps in total, counting the induced z-relabeling.
    let x = if b.x[0].bit(i) { [b.x[1], b.x[0]] } else { b.x };
    let y = if b.y[0].bit(i) { [b.y[1], b.y[0]] } else { b.y };
    let z = [x[0].xor(&y[0]), x[0].xor(&y[1])];
    debug_assert!(!z[0].bit(i) && z[1].bit(i));
    let phi = [x, y, z];
    let mut answers: [BTreeMap<BitWord, BitWord>; 3] = Default::default();
    for player in 0..3 {
        for a in 0..2usize {
            let q = phi[player][a];
            let answer = fbar.answer(player, &q).ok_or(GameError::PartialStrategy {
                player: player + 1,
                question: q.to_hex(),
            })?;
            answers[player]
                .insert(BitWord::new(1, a as u32), BitWord::new(1, answer.bit(i) as u32));
        }
    }
    Ok(Strategy::new(answers))
}
