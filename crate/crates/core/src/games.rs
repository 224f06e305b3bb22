//! Finite three-player games with exact rational values.
//!
//! Games are built from a support list of question triples with exact
//! probabilities and a coordinate-wise predicate. Values are computed by
//! support-restricted exhaustive search over deterministic strategies: only
//! question values that actually occur in the (possibly conditioned) support
//! are enumerated, which keeps per-coordinate values of 4-point distributions
//! O(4^3) regardless of the ambient dimension. Deterministic strategies
//! suffice for the maximum, and the search reports the lexicographically
//! first maximizing strategy in enumeration order.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::bigint::BigInt;
use num::integer::lcm;
use num::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::f2::{BitWord, Bitset, F2Error, ENUM_CAP, MAX_N};
use crate::rat::Rational;

pub const PLAYERS: usize = 3;

/// Default cap on the number of strategy triples a value search may cover.
/// The two-fold GHZ game needs 4^12 = 2^24 triples and must stay in range.
pub const DEFAULT_SEARCH_CAP: u128 = 1 << 25;

#[derive(Debug, Error)]
pub enum GameError {
    #[error("support probabilities must be positive and sum to 1")]
    BadDistribution,
    #[error("duplicate support point at index {index}")]
    DuplicateSupport { index: usize },
    #[error("support size {size} exceeds cap {cap}")]
    SupportTooLarge { size: u128, cap: usize },
    #[error("conditioning event has probability zero")]
    EmptyEvent,
    #[error("strategy of player {player} is undefined on question {question}")]
    PartialStrategy { player: usize, question: String },
    #[error("search space of {count} strategy triples exceeds cap {cap}")]
    SearchTooLarge { count: String, cap: u128 },
    #[error("per-coordinate value requires a coordinate-wise predicate")]
    NotCoordinatewise,
    #[error("coordinate {j} out of range for n = {n}")]
    CoordinateOutOfRange { j: usize, n: usize },
    #[error(transparent)]
    F2(#[from] F2Error),
}

/// Per-coordinate win rule: question bits and answer values of the three
/// players at one coordinate.
pub type CoordRule = dyn Fn([bool; PLAYERS], [u8; PLAYERS]) -> bool + Send + Sync;

/// The predicate of a game, applied either to every coordinate (a parallel
/// repetition) or to a single coordinate (the per-coordinate value).
#[derive(Clone)]
pub enum Predicate {
    AllCoords(Arc<CoordRule>),
    SingleCoord(Arc<CoordRule>, usize),
}

/// The GHZ win rule: the answers must XOR to the OR of the question bits.
pub fn ghz_rule() -> Arc<CoordRule> {
    Arc::new(|q, a| {
        let or = q[0] | q[1] | q[2];
        ((a[0] ^ a[1] ^ a[2]) & 1 == 1) == or
    })
}

/// A three-player game: questions are words in F2^n per player, answers carry
/// `answer_bits` bits per coordinate, and the query distribution is an
/// explicit support list with exact probabilities.
#[derive(Clone)]
pub struct Game {
    n: usize,
    answer_bits: usize,
    support: Vec<[BitWord; PLAYERS]>,
    probs: Vec<Rational>,
    predicate: Predicate,
}

/// A deterministic product strategy: per player, a question-to-answer table
/// defined on that player's marginal support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strategy {
    answers: [BTreeMap<BitWord, BitWord>; PLAYERS],
}

impl Strategy {
    pub fn new(answers: [BTreeMap<BitWord, BitWord>; PLAYERS]) -> Strategy {
        Strategy { answers }
    }

    /// Tabulates three answer functions on the marginal supports of `g`.
    pub fn from_fns(
        g: &Game,
        fns: [&dyn Fn(&BitWord) -> BitWord; PLAYERS],
    ) -> Strategy {
        let mut answers: [BTreeMap<BitWord, BitWord>; PLAYERS] = Default::default();
        for p in 0..PLAYERS {
            for q in g.marginal_support(p) {
                answers[p].insert(q, fns[p](&q));
            }
        }
        Strategy { answers }
    }

    pub fn answer(&self, player: usize, question: &BitWord) -> Option<&BitWord> {
        self.answers[player].get(question)
    }

    pub fn tables(&self) -> &[BTreeMap<BitWord, BitWord>; PLAYERS] {
        &self.answers
    }
}

/// A product event E1 x E2 x E3 over question triples in (F2^n)^3.
#[derive(Clone, Debug)]
pub struct ProductEvent {
    n: usize,
    sets: [Bitset; PLAYERS],
}

impl ProductEvent {
    pub fn new(n: usize, sets: [Bitset; PLAYERS]) -> ProductEvent {
        assert!(sets.iter().all(|s| s.n() == n));
        ProductEvent { n, sets }
    }

    pub fn full(n: usize) -> ProductEvent {
        ProductEvent { n, sets: [Bitset::full(n), Bitset::full(n), Bitset::full(n)] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sets(&self) -> &[Bitset; PLAYERS] {
        &self.sets
    }

    pub fn set(&self, player: usize) -> &Bitset {
        &self.sets[player]
    }

    pub fn contains(&self, q: &[BitWord; PLAYERS]) -> bool {
        (0..PLAYERS).all(|p| self.sets[p].contains(&q[p]))
    }

    /// P(E) under the n-fold GHZ query distribution: the fraction of pairs
    /// (x, y) in E1 x E2 with x + y in E3, out of 4^n.
    pub fn prob_ghz(&self) -> Rational {
        let mut count: u128 = 0;
        for x in self.sets[0].iter() {
            for y in self.sets[1].iter() {
                if self.sets[2].contains(&x.xor(&y)) {
                    count += 1;
                }
            }
        }
        Rational::new(BigInt::from(count), BigInt::one() << (2 * self.n))
    }
}

enum SearchMode {
    Full,
    Coord(usize),
}

struct Candidate {
    weight: u128,
    i1: usize,
    i2: usize,
    digits3: Vec<u8>,
}

impl Game {
    pub fn new(
        n: usize,
        answer_bits: usize,
        support: Vec<[BitWord; PLAYERS]>,
        probs: Vec<Rational>,
        predicate: Predicate,
    ) -> Result<Game, GameError> {
        assert!(n * answer_bits <= MAX_N, "answer words exceed the word cap");
        assert_eq!(support.len(), probs.len());
        let mut seen = std::collections::HashSet::new();
        for (index, q) in support.iter().enumerate() {
            for w in q {
                if w.n() != n {
                    return Err(GameError::F2(F2Error::DimensionMismatch {
                        expected: n,
                        got: w.n(),
                    }));
                }
            }
            if !seen.insert(*q) {
                return Err(GameError::DuplicateSupport { index });
            }
        }
        let total: Rational = probs.iter().sum();
        if !total.is_one() || probs.iter().any(|p| !p.is_positive()) {
            return Err(GameError::BadDistribution);
        }
        Ok(Game { n, answer_bits, support, probs, predicate })
    }

    /// The GHZ game: uniform queries on {(0,0,0),(0,1,1),(1,0,1),(1,1,0)},
    /// win iff the answers XOR to the OR of the questions. Its value is 3/4.
    pub fn ghz() -> Game {
        Game::ghz_repeated(1).expect("1-fold support within cap")
    }

    /// The n-fold GHZ game built directly: support {(x, y, x+y)}, each point
    /// with probability 4^{-n}.
    pub fn ghz_repeated(n: usize) -> Result<Game, GameError> {
        let size = 1u128 << (2 * n);
        if size > ENUM_CAP as u128 {
            return Err(GameError::SupportTooLarge { size, cap: ENUM_CAP });
        }
        let mut support = Vec::with_capacity(size as usize);
        for x in 0..1u32 << n {
            for y in 0..1u32 << n {
                support.push([BitWord::new(n, x), BitWord::new(n, y), BitWord::new(n, x ^ y)]);
            }
        }
        let p = Rational::new(BigInt::one(), BigInt::one() << (2 * n));
        let probs = vec![p; support.len()];
        Game::new(n, 1, support, probs, Predicate::AllCoords(ghz_rule()))
    }

    /// A game with the GHZ predicate over F2^n and an arbitrary query
    /// distribution, e.g. the uniform distribution over a bow tie.
    pub fn ghz_with_distribution(
        n: usize,
        support: Vec<[BitWord; PLAYERS]>,
        probs: Vec<Rational>,
    ) -> Result<Game, GameError> {
        Game::new(n, 1, support, probs, Predicate::AllCoords(ghz_rule()))
    }

    /// The n-fold parallel repetition of a coordinate-wise game: queries are
    /// drawn independently per coordinate and the predicate must win every
    /// coordinate.
    pub fn repeat(&self, n: usize) -> Result<Game, GameError> {
        let rule = match &self.predicate {
            Predicate::AllCoords(rule) => rule.clone(),
            Predicate::SingleCoord(..) => return Err(GameError::NotCoordinatewise),
        };
        assert!(n >= 1);
        let base = self.support.len() as u128;
        let size = base.checked_pow(n as u32).filter(|&s| s <= ENUM_CAP as u128);
        let Some(size) = size else {
            return Err(GameError::SupportTooLarge {
                size: base.saturating_pow(n as u32),
                cap: ENUM_CAP,
            });
        };
        let n_out = self.n * n;
        let mut support = Vec::with_capacity(size as usize);
        let mut probs = Vec::with_capacity(size as usize);
        let mut choice = vec![0usize; n];
        loop {
            let mut q = [0u32; PLAYERS];
            let mut p = Rational::one();
            for (j, &s) in choice.iter().enumerate() {
                for player in 0..PLAYERS {
                    q[player] |= self.support[s][player].bits() << (j * self.n);
                }
                p *= &self.probs[s];
            }
            support.push([
                BitWord::new(n_out, q[0]),
                BitWord::new(n_out, q[1]),
                BitWord::new(n_out, q[2]),
            ]);
            probs.push(p);
            // Odometer over per-coordinate support choices.
            let mut j = 0;
            loop {
                if j == n {
                    return Game::new(n_out, self.answer_bits, support, probs,
                        Predicate::AllCoords(rule));
                }
                choice[j] += 1;
                if choice[j] < self.support.len() {
                    break;
                }
                choice[j] = 0;
                j += 1;
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn answer_bits(&self) -> usize {
        self.answer_bits
    }

    pub fn support(&self) -> &[[BitWord; PLAYERS]] {
        &self.support
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    /// Distinct questions of one player, sorted.
    pub fn marginal_support(&self, player: usize) -> Vec<BitWord> {
        let mut qs: Vec<BitWord> = self.support.iter().map(|q| q[player]).collect();
        qs.sort();
        qs.dedup();
        qs
    }

    fn coord_win(&self, rule: &CoordRule, q: &[BitWord; PLAYERS], a: &[BitWord; PLAYERS],
        j: usize) -> bool {
        let qb = [q[0].bit(j), q[1].bit(j), q[2].bit(j)];
        let mask = (1u32 << self.answer_bits) - 1;
        let field = |w: &BitWord| ((w.bits() >> (j * self.answer_bits)) & mask) as u8;
        rule(qb, [field(&a[0]), field(&a[1]), field(&a[2])])
    }

    /// Whether answers `a` win at support point `s`.
    pub fn wins(&self, s: usize, a: &[BitWord; PLAYERS]) -> bool {
        let q = &self.support[s];
        match &self.predicate {
            Predicate::AllCoords(rule) => {
                (0..self.n).all(|j| self.coord_win(rule.as_ref(), q, a, j))
            }
            Predicate::SingleCoord(rule, j) => self.coord_win(rule.as_ref(), q, a, *j),
        }
    }

    /// Exact success probability of a strategy: the total query weight of
    /// support points it wins.
    pub fn strategy_value(&self, f: &Strategy) -> Result<Rational, GameError> {
        let mut total = Rational::zero();
        for (s, q) in self.support.iter().enumerate() {
            let mut a = [BitWord::zero(self.n * self.answer_bits); PLAYERS];
            for p in 0..PLAYERS {
                a[p] = *f.answer(p, &q[p]).ok_or_else(|| GameError::PartialStrategy {
                    player: p + 1,
                    question: q[p].to_hex(),
                })?;
            }
            if self.wins(s, &a) {
                total += &self.probs[s];
            }
        }
        Ok(total)
    }

    /// The exact value and a lexicographically-first optimal strategy.
    pub fn value(&self) -> Result<(Rational, Strategy), GameError> {
        self.search(SearchMode::Full, DEFAULT_SEARCH_CAP)
    }

    pub fn value_with_cap(&self, cap: u128) -> Result<(Rational, Strategy), GameError> {
        self.search(SearchMode::Full, cap)
    }

    /// The value of the game in coordinate `j`: the predicate is relaxed to
    /// winning coordinate `j` only, and answers range over that coordinate's
    /// alphabet.
    pub fn coordinate_value(&self, j: usize) -> Result<(Rational, Strategy), GameError> {
        self.coordinate_value_with_cap(j, DEFAULT_SEARCH_CAP)
    }

    pub fn coordinate_value_with_cap(
        &self,
        j: usize,
        cap: u128,
    ) -> Result<(Rational, Strategy), GameError> {
        if !matches!(self.predicate, Predicate::AllCoords(_)) {
            return Err(GameError::NotCoordinatewise);
        }
        if j >= self.n {
            return Err(GameError::CoordinateOutOfRange { j, n: self.n });
        }
        self.search(SearchMode::Coord(j), cap)
    }

    /// The same game scored only on coordinate `j`: the predicate becomes
    /// the per-coordinate rule at `j`. Useful for evaluating a strategy's
    /// per-coordinate success via [`strategy_value`](Self::strategy_value).
    pub fn with_coordinate_predicate(&self, j: usize) -> Result<Game, GameError> {
        let rule = match &self.predicate {
            Predicate::AllCoords(rule) => rule.clone(),
            Predicate::SingleCoord(..) => return Err(GameError::NotCoordinatewise),
        };
        if j >= self.n {
            return Err(GameError::CoordinateOutOfRange { j, n: self.n });
        }
        Ok(Game { predicate: Predicate::SingleCoord(rule, j), ..self.clone() })
    }

    /// The game conditioned on a product event over questions: same
    /// predicate, retained support renormalized exactly.
    pub fn condition_event(&self, e: &ProductEvent) -> Result<Game, GameError> {
        self.condition_points(|q| e.contains(q))
    }

    /// The game conditioned on an arbitrary set of support points.
    pub fn condition_points(
        &self,
        keep: impl Fn(&[BitWord; PLAYERS]) -> bool,
    ) -> Result<Game, GameError> {
        let mut support = Vec::new();
        let mut probs = Vec::new();
        for (s, q) in self.support.iter().enumerate() {
            if keep(q) {
                support.push(*q);
                probs.push(self.probs[s].clone());
            }
        }
        let total: Rational = probs.iter().sum();
        if total.is_zero() {
            return Err(GameError::EmptyEvent);
        }
        for p in probs.iter_mut() {
            *p = &*p / &total;
        }
        Ok(Game {
            n: self.n,
            answer_bits: self.answer_bits,
            support,
            probs,
            predicate: self.predicate.clone(),
        })
    }

    /// Support-restricted exhaustive search. Players 1 and 2 are enumerated
    /// in lexicographic order; player 3 is resolved by exact best response
    /// per marginal question (smallest answer on ties), which attains the
    /// same maximum and the same lexicographically-first witness as full
    /// enumeration while cutting a factor |A|^{m3} from the work.
    fn search(&self, mode: SearchMode, cap: u128) -> Result<(Rational, Strategy), GameError> {
        let acard: usize = match mode {
            SearchMode::Full => 1 << (self.n * self.answer_bits),
            SearchMode::Coord(_) => 1 << self.answer_bits,
        };
        let marginals: Vec<Vec<BitWord>> = (0..PLAYERS).map(|p| self.marginal_support(p)).collect();
        let m: Vec<usize> = marginals.iter().map(|q| q.len()).collect();

        let total = BigInt::from(acard).pow((m[0] + m[1] + m[2]) as u32);
        if total > BigInt::from(cap) {
            return Err(GameError::SearchTooLarge { count: total.to_string(), cap });
        }

        // Integer weights: probabilities scaled by their common denominator.
        let scale = self
            .probs
            .iter()
            .fold(BigInt::one(), |acc, p| lcm(acc, p.denom().clone()));
        let weights: Vec<u128> = self
            .probs
            .iter()
            .map(|p| {
                (p * Rational::from(scale.clone()))
                    .to_integer()
                    .to_u128()
                    .expect("scaled weight fits in u128")
            })
            .collect();

        // Per-point marginal question indices and win tables over answer
        // digit combos (a1 * acard + a2) * acard + a3.
        let digit_word = |d: usize| -> BitWord {
            match mode {
                SearchMode::Full => BitWord::new(self.n * self.answer_bits, d as u32),
                SearchMode::Coord(j) => {
                    BitWord::new(self.n * self.answer_bits, (d as u32) << (j * self.answer_bits))
                }
            }
        };
        let win_at = |s: usize, a: &[BitWord; PLAYERS]| -> bool {
            match (&self.predicate, &mode) {
                (Predicate::AllCoords(rule), SearchMode::Coord(j)) => {
                    self.coord_win(rule.as_ref(), &self.support[s], a, *j)
                }
                _ => self.wins(s, a),
            }
        };
        let qidx: Vec<[usize; PLAYERS]> = self
            .support
            .iter()
            .map(|q| {
                [0, 1, 2].map(|p| marginals[p].binary_search(&q[p]).expect("marginal member"))
            })
            .collect();
        let win: Vec<Vec<bool>> = (0..self.support.len())
            .map(|s| {
                let mut table = vec![false; acard * acard * acard];
                for a1 in 0..acard {
                    for a2 in 0..acard {
                        for a3 in 0..acard {
                            let a = [digit_word(a1), digit_word(a2), digit_word(a3)];
                            table[(a1 * acard + a2) * acard + a3] = win_at(s, &a);
                        }
                    }
                }
                table
            })
            .collect();

        let c1 = acard.pow(m[0] as u32);
        let c2 = acard.pow(m[1] as u32);
        let best = (0..c1)
            .into_par_iter()
            .map(|i1| {
                let d1 = digits_of(i1, m[0], acard);
                let mut best: Option<Candidate> = None;
                let mut d2 = vec![0u8; m[1]];
                let mut acc = vec![0u128; m[2] * acard];
                for i2 in 0..c2 {
                    acc.fill(0);
                    for (s, idx) in qidx.iter().enumerate() {
                        let a1 = d1[idx[0]] as usize;
                        let a2 = d2[idx[1]] as usize;
                        let row = &win[s][(a1 * acard + a2) * acard..][..acard];
                        let base = idx[2] * acard;
                        let w = weights[s];
                        for (a3, &ok) in row.iter().enumerate() {
                            if ok {
                                acc[base + a3] += w;
                            }
                        }
                    }
                    // Best response of player 3: per marginal question the
                    // smallest answer of maximum conditional weight.
                    let mut weight = 0u128;
                    let mut d3 = vec![0u8; m[2]];
                    for t in 0..m[2] {
                        let row = &acc[t * acard..][..acard];
                        let (mut ba, mut bw) = (0usize, row[0]);
                        for (a, &w) in row.iter().enumerate().skip(1) {
                            if w > bw {
                                ba = a;
                                bw = w;
                            }
                        }
                        d3[t] = ba as u8;
                        weight += bw;
                    }
                    if best.as_ref().map_or(true, |b| weight > b.weight) {
                        best = Some(Candidate { weight, i1, i2, digits3: d3 });
                    }
                    increment(&mut d2, acard);
                }
                best.expect("at least one inner strategy")
            })
            .reduce_with(|a, b| {
                if b.weight > a.weight || (b.weight == a.weight && (b.i1, b.i2) < (a.i1, a.i2)) {
                    b
                } else {
                    a
                }
            })
            .expect("at least one outer strategy");

        let value = Rational::new(BigInt::from(best.weight), scale);
        let digits = [
            digits_of(best.i1, m[0], acard),
            digits_of(best.i2, m[1], acard),
            best.digits3.clone(),
        ];
        let mut answers: [BTreeMap<BitWord, BitWord>; PLAYERS] = Default::default();
        for p in 0..PLAYERS {
            for (t, q) in marginals[p].iter().enumerate() {
                answers[p].insert(*q, digit_word(digits[p][t] as usize));
            }
        }
        Ok((value, Strategy { answers }))
    }
}

/// Mixed-radix digits of `i` in base `a`, question 0 most significant, so
/// ascending `i` is lexicographic order over answer tables.
fn digits_of(mut i: usize, m: usize, a: usize) -> Vec<u8> {
    let mut d = vec![0u8; m];
    for t in (0..m).rev() {
        d[t] = (i % a) as u8;
        i /= a;
    }
    d
}

fn increment(d: &mut [u8], a: usize) {
    for t in (0..d.len()).rev() {
        if (d[t] as usize) + 1 < a {
            d[t] += 1;
            return;
        }
        d[t] = 0;
    }
}
