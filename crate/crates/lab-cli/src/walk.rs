//! The conditioning-walk analyzer: greedily pick unused coordinates with
//! the smallest conditional expected per-coordinate value, condition on the
//! strategy winning them, and record the exact product bound
//! val(G, f) <= prod_i Pr[W_{i+1} | W_{<=i}].

use std::collections::BTreeMap;

use ghz_core::games::{Game, Strategy, PLAYERS};
use ghz_core::rat::Rational;
use ghz_core::BitWord;
use num::{One, Zero};
use serde_json::Value;

use crate::config::LabError;
use crate::report::{rat_f64, rat_value};

/// Walk schedule parameters. The defaults walk all n coordinates; the
/// asymptotic schedule (stop at the largest m with 32^{-m} >= rho * 2/c)
/// is available when `rho` is set.
#[derive(Clone, Debug)]
pub struct WalkParams {
    pub c: Rational,
    pub rho: Option<Rational>,
}

impl Default for WalkParams {
    fn default() -> WalkParams {
        WalkParams { c: Rational::one(), rho: None }
    }
}

impl WalkParams {
    /// Number of steps to walk on an n-coordinate game.
    pub fn max_steps(&self, n: usize) -> usize {
        match &self.rho {
            None => n,
            Some(rho) => {
                // Largest m with 32^{-m} >= rho * 2/c, capped at n.
                let bound = rho * Rational::from_integer(2.into()) / &self.c;
                let mut pow = Rational::one();
                let base = Rational::from_integer(32.into());
                let mut m = 0;
                while m < n {
                    pow /= &base;
                    if pow < bound {
                        break;
                    }
                    m += 1;
                }
                m
            }
        }
    }
}

/// One step of the walk.
#[derive(Clone, Debug)]
pub struct WalkStep {
    /// The chosen coordinate j_i.
    pub coordinate: usize,
    /// For every coordinate unused before this step, the conditional
    /// expected per-coordinate value E_{z ~ Z|W}[val^(j)(G | Z = z)].
    pub value_table: Vec<(usize, Rational)>,
    /// Number of distinct conditioned assignments z with positive mass.
    pub assignment_classes: usize,
    /// Pr[W_{i+1} | W_{<=i}] exactly.
    pub win_prob: Rational,
}

/// The full transcript: steps, the exact product bound, and the strategy
/// value it dominates.
#[derive(Clone, Debug)]
pub struct ConditioningTranscript {
    pub strategy_id: String,
    pub steps: Vec<WalkStep>,
    pub product: Rational,
    pub strategy_value: Rational,
}

impl ConditioningTranscript {
    /// The recorded inequality val(G, f) <= product; equality when the walk
    /// visits every coordinate without dying.
    pub fn bound_holds(&self) -> bool {
        self.strategy_value <= self.product
    }

    pub fn to_json(&self) -> Value {
        let steps: Vec<Value> = self
            .steps
            .iter()
            .map(|s| {
                let table: Vec<Value> = s
                    .value_table
                    .iter()
                    .map(|(j, v)| {
                        serde_json::json!({ "coordinate": j, "expected_value": rat_value(v) })
                    })
                    .collect();
                serde_json::json!({
                    "coordinate": s.coordinate,
                    "assignment_classes": s.assignment_classes,
                    "win_prob": rat_value(&s.win_prob),
                    "value_table": table,
                })
            })
            .collect();
        serde_json::json!({
            "strategy": self.strategy_id,
            "steps": steps,
            "product_bound": rat_value(&self.product),
            "product_bound_float": rat_f64(&self.product),
            "strategy_value": rat_value(&self.strategy_value),
            "bound_holds": self.bound_holds(),
        })
    }
}

/// Restriction of a query triple to a coordinate mask, one word per player.
fn restrict(q: &[BitWord; PLAYERS], mask: u32) -> [u32; PLAYERS] {
    [0, 1, 2].map(|p| q[p].bits() & mask)
}

fn answers_for(f: &Strategy, q: &[BitWord; PLAYERS]) -> Result<[BitWord; PLAYERS], LabError> {
    let mut out = [q[0]; PLAYERS];
    for p in 0..PLAYERS {
        out[p] = *f.answer(p, &q[p]).ok_or(ghz_core::games::GameError::PartialStrategy {
            player: p + 1,
            question: q[p].to_hex(),
        })?;
    }
    Ok(out)
}

/// Memo of conditional per-coordinate values val^(j)(G | Z = z), keyed by
/// (conditioning mask, restricted assignment, coordinate). These depend
/// only on the game, so one cache serves every strategy walked on it.
pub type WalkCache = BTreeMap<(u32, [u32; PLAYERS], usize), Rational>;

/// Runs the walk on `game` (coordinates indexed by bit position, as in the
/// repeated GHZ construction) for strategy `f`. At each step the unused
/// coordinate minimizing the conditional expected per-coordinate value is
/// chosen, ties by smallest index; the walk stops early with product 0 when
/// the strategy cannot win the chosen coordinate.
pub fn conditioning_walk(
    game: &Game,
    f: &Strategy,
    strategy_id: &str,
    params: &WalkParams,
) -> Result<ConditioningTranscript, LabError> {
    conditioning_walk_cached(game, f, strategy_id, params, &mut WalkCache::new())
}

/// As [`conditioning_walk`], reusing `cache` across strategies of the same
/// game.
pub fn conditioning_walk_cached(
    game: &Game,
    f: &Strategy,
    strategy_id: &str,
    params: &WalkParams,
    cache: &mut WalkCache,
) -> Result<ConditioningTranscript, LabError> {
    let n = game.n();
    let strategy_value = game.strategy_value(f)?;
    let max_steps = params.max_steps(n);

    let mut current = game.clone();
    let mut chosen: Vec<usize> = Vec::new();
    let mut product = Rational::one();
    let mut steps = Vec::new();

    for _ in 0..max_steps {
        let mask: u32 = chosen.iter().map(|j| 1u32 << j).sum();
        // Posterior over conditioned assignments z_{<=i} given W_{<=i}.
        let mut classes: BTreeMap<[u32; PLAYERS], Rational> = BTreeMap::new();
        for (s, q) in current.support().iter().enumerate() {
            *classes.entry(restrict(q, mask)).or_insert_with(Rational::zero) +=
                current.probs()[s].clone();
        }

        let mut value_table = Vec::new();
        let mut best: Option<(usize, Rational)> = None;
        for j in 0..n {
            if chosen.contains(&j) {
                continue;
            }
            let mut expected = Rational::zero();
            for (key, weight) in &classes {
                let cache_key = (mask, *key, j);
                let val = match cache.get(&cache_key) {
                    Some(v) => v.clone(),
                    None => {
                        // The game knows nothing of the strategy: condition
                        // the original game on the assignment alone.
                        let conditioned =
                            game.condition_points(|q| restrict(q, mask) == *key)?;
                        let (v, _) = conditioned.coordinate_value(j)?;
                        cache.insert(cache_key, v.clone());
                        v
                    }
                };
                expected += weight * val;
            }
            if best.as_ref().map_or(true, |(_, b)| expected < *b) {
                best = Some((j, expected.clone()));
            }
            value_table.push((j, expected));
        }
        let (j, _) = best.expect("unused coordinate available");

        // Pr[W_{i+1} | W_{<=i}] over the current conditioned distribution.
        let coord = current.with_coordinate_predicate(j)?;
        let mut win_prob = Rational::zero();
        let mut winners = Vec::new();
        for (s, q) in coord.support().iter().enumerate() {
            if coord.wins(s, &answers_for(f, q)?) {
                win_prob += coord.probs()[s].clone();
                winners.push(*q);
            }
        }

        steps.push(WalkStep {
            coordinate: j,
            value_table,
            assignment_classes: classes.len(),
            win_prob: win_prob.clone(),
        });
        chosen.push(j);
        product *= &win_prob;

        if win_prob.is_zero() {
            break;
        }
        current = current.condition_points(|q| winners.contains(q))?;
    }

    Ok(ConditioningTranscript {
        strategy_id: strategy_id.to_string(),
        steps,
        product,
        strategy_value,
    })
}

/// A seeded random strategy over the game's marginal supports, one answer
/// bit per coordinate.
pub fn random_strategy<R: rand::Rng>(game: &Game, rng: &mut R) -> Strategy {
    let n = game.n();
    let mut answers: [BTreeMap<BitWord, BitWord>; PLAYERS] = Default::default();
    for p in 0..PLAYERS {
        for q in game.marginal_support(p) {
            let bits = rng.gen_range(0..1u32 << n);
            answers[p].insert(q, BitWord::new(n, bits));
        }
    }
    Strategy::new(answers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ghz_core::rat::{rat, rat_int};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_copy_walk_is_one_step() {
        let game = Game::ghz();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let f = random_strategy(&game, &mut rng);
            let t = conditioning_walk(&game, &f, "rand", &WalkParams::default()).unwrap();
            assert_eq!(t.steps.len(), 1);
            assert_eq!(t.steps[0].coordinate, 0);
            assert_eq!(t.product, t.strategy_value);
        }
    }

    #[test]
    fn optimal_ghz2_strategy_bound_is_exact() {
        let game = Game::ghz_repeated(2).unwrap();
        let (value, f) = game.value().unwrap();
        let t = conditioning_walk(&game, &f, "optimal", &WalkParams::default()).unwrap();
        assert_eq!(value, rat(5, 8));
        assert!(t.bound_holds());
        // A full walk multiplies out to the exact strategy value.
        assert_eq!(t.product, value);
        assert_eq!(t.steps.len(), 2);
        let used: Vec<usize> = t.steps.iter().map(|s| s.coordinate).collect();
        assert_eq!({ let mut u = used.clone(); u.sort(); u }, vec![0, 1]);
    }

    #[test]
    fn random_strategies_bounded_no_reuse() {
        let game = Game::ghz_repeated(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..25 {
            let f = random_strategy(&game, &mut rng);
            let t = conditioning_walk(&game, &f, "rand", &WalkParams::default()).unwrap();
            assert!(t.bound_holds());
            let mut used: Vec<usize> = t.steps.iter().map(|s| s.coordinate).collect();
            let len = used.len();
            used.sort();
            used.dedup();
            assert_eq!(used.len(), len);
            // Step-0 tables cover all n coordinates with the unconditioned
            // per-coordinate value 3/4.
            for (_, v) in &t.steps[0].value_table {
                assert_eq!(*v, rat(3, 4));
            }
        }
    }

    #[test]
    fn constant_ones_walk_is_exact() {
        // Answering 1 everywhere wins exactly the three OR-1 questions.
        let game = Game::ghz();
        let ones = |_: &BitWord| BitWord::new(1, 1);
        let f = Strategy::from_fns(&game, [&ones, &ones, &ones]);
        let t = conditioning_walk(&game, &f, "ones", &WalkParams::default()).unwrap();
        assert_eq!(t.strategy_value, rat(3, 4));
        assert_eq!(t.product, rat(3, 4));
        assert!(t.bound_holds());
        assert_eq!(t.steps.len(), 1);
    }

    #[test]
    fn losing_coordinate_kills_the_product() {
        // On a single point the only coordinate either wins or loses
        // outright; a losing strategy stops the walk with product 0.
        let game = Game::ghz()
            .condition_points(|q| q.iter().all(|w| w.is_zero()))
            .unwrap();
        let ones = |_: &BitWord| BitWord::new(1, 1);
        let f = Strategy::from_fns(&game, [&ones, &ones, &ones]);
        let t = conditioning_walk(&game, &f, "ones", &WalkParams::default()).unwrap();
        assert_eq!(t.strategy_value, rat_int(0));
        assert_eq!(t.product, rat_int(0));
        assert!(t.bound_holds());
        assert_eq!(t.steps.len(), 1);
    }

    #[test]
    fn schedule_shrinks_with_rho() {
        let mut p = WalkParams::default();
        assert_eq!(p.max_steps(5), 5);
        p.rho = Some(rat(1, 2048));
        // 32^-1 = 1/32 >= 2/2048 = 1/1024; 32^-2 = 1/1024 >= 1/1024;
        // 32^-3 < 1/1024.
        assert_eq!(p.max_steps(5), 2);
        p.c = rat_int(2);
        // Bound halves: 32^-2 = 1/1024 >= 1/2048 still, 32^-3 too small.
        assert_eq!(p.max_steps(5), 2);
        assert_eq!(p.max_steps(1), 1);
    }

    #[test]
    fn transcript_json_shape() {
        let game = Game::ghz();
        let zero = |_: &BitWord| BitWord::zero(1);
        let f = Strategy::from_fns(&game, [&zero, &zero, &zero]);
        let t = conditioning_walk(&game, &f, "zeros", &WalkParams::default()).unwrap();
        let j = t.to_json();
        assert_eq!(j["strategy"], "zeros");
        assert_eq!(j["bound_holds"], true);
        assert_eq!(j["strategy_value"], "1/4");
    }
}
