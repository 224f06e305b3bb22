//! The `verify` subcommand: seeded sweeps of every exact claim checker,
//! with an optional injected fault as a negative control.

use ghz_core::bowtie::{build_graph, check_lemma41, check_norm_bounds, uniformity_check, BowTieError, BowTieSampler};
use ghz_core::decomposition::{codim_limit, decompose, Part};
use ghz_core::f2::Subspace;
use ghz_core::fourier::{parseval_residual, plancherel_residual, DyadicTable};
use ghz_core::games::{Game, ProductEvent};
use ghz_core::rat::{rat, rat_u128, Rational};
use ghz_core::{AffineCoset, BitWord, Bitset};
use num::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crate::config::LabError;
use crate::walk::{conditioning_walk_cached, random_strategy, WalkCache, WalkParams};

/// One named check with its outcome.
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

/// The verify report: all checks pass iff the exit status should be zero.
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> Value {
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| serde_json::json!({ "name": c.name, "pass": c.pass, "detail": c.detail }))
            .collect();
        serde_json::json!({ "pass": self.all_pass(), "checks": checks })
    }
}

fn random_set(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Bitset {
    let mut s = Bitset::empty(n);
    for bits in 0..1u32 << n {
        if rng.gen_bool(density) {
            s.insert(&BitWord::new(n, bits));
        }
    }
    s
}

fn random_event(rng: &mut ChaCha8Rng, n: usize, density: f64) -> ProductEvent {
    let sets = [0; 3].map(|_| random_set(rng, n, density));
    ProductEvent::new(n, sets)
}

fn random_function(rng: &mut ChaCha8Rng, n: usize) -> DyadicTable {
    let mut rows = Vec::new();
    for _ in 0..n {
        if rng.gen_bool(0.7) {
            rows.push(BitWord::new(n, rng.gen_range(0..1u32 << n)));
        }
    }
    let space = Subspace::rref_basis(n, &rows).unwrap();
    let shift = BitWord::new(n, rng.gen_range(0..1u32 << n));
    let coset = AffineCoset::new(shift, space).unwrap();
    let values = (0..1usize << coset.dim())
        .map(|_| rat(rng.gen_range(-8..=8), 1 << rng.gen_range(0..4)))
        .collect();
    DyadicTable::new(coset, values).unwrap()
}

fn parseval_sweep(rng: &mut ChaCha8Rng, functions: usize) -> Result<CheckResult, LabError> {
    let mut pass = true;
    for _ in 0..functions {
        let n = rng.gen_range(1..=6);
        let f = random_function(rng, n);
        let a = *f.coset.shift();
        pass &= parseval_residual(&f, &a)?.is_zero();
        let g = DyadicTable::new(
            f.coset.clone(),
            (0..f.values.len()).map(|_| rat(rng.gen_range(-4..=4), 2)).collect(),
        )?;
        pass &= plancherel_residual(&f, &g, &a)?.is_zero();
    }
    Ok(CheckResult {
        name: "parseval_plancherel",
        pass,
        detail: format!("{functions} random functions, residuals exactly zero"),
    })
}

fn lemma41_sweep(rng: &mut ChaCha8Rng, per_n: usize) -> Result<CheckResult, LabError> {
    let mut pass = true;
    let mut tested = 0;
    for n in 4..=6 {
        for _ in 0..per_n {
            let part = Part::full(n);
            let density = rng.gen_range(0.3..0.9);
            let (a, b, c) = (
                random_set(rng, n, density),
                random_set(rng, n, density),
                random_set(rng, n, density),
            );
            let r = check_lemma41(&a, &b, &c, &part)?;
            pass &= r.pass1 && r.pass2;
            tested += 1;
        }
    }
    Ok(CheckResult {
        name: "lemma41",
        pass,
        detail: format!("{tested} random set triples, both bounds exact"),
    })
}

fn claim52_sweep(rng: &mut ChaCha8Rng, ties: usize) -> Result<CheckResult, LabError> {
    let mut pass = true;
    let mut tested = 0;
    while tested < ties {
        let n = rng.gen_range(2..=6);
        let event = random_event(rng, n, 0.6);
        let graph = build_graph(&event, &Part::full(n))?;
        let sampler = match BowTieSampler::new(&graph) {
            Ok(s) => s,
            Err(BowTieError::NoBowTies | BowTieError::EmptyE3) => continue,
            Err(err) => return Err(err.into()),
        };
        let b = sampler.sample(rng);
        let game = b.game(n)?;
        for i in 0..n {
            let (val, _) = game.coordinate_value(i)?;
            let expected = if b.differs_at(i) { rat(3, 4) } else { Rational::one() };
            pass &= val == expected;
        }
        tested += 1;
    }
    Ok(CheckResult {
        name: "claim52",
        pass,
        detail: format!("{ties} sampled bow ties, coordinate values exact"),
    })
}

fn claim53_sweep(
    rng: &mut ChaCha8Rng,
    instances: usize,
    inject_fault: bool,
) -> Result<CheckResult, LabError> {
    let mut pass = true;
    let mut tested = 0;
    while tested < instances {
        let n = rng.gen_range(2..=5);
        let event = random_event(rng, n, 0.6);
        let graph = build_graph(&event, &Part::full(n))?;
        if graph.event_members(2).is_empty() {
            continue;
        }
        let v = graph.bowtie_vector()?;
        let ties = match BowTieSampler::new(&graph) {
            Ok(s) => s.enumerate(u128::MAX)?,
            Err(BowTieError::NoBowTies) => Vec::new(),
            Err(err) => return Err(err.into()),
        };
        let mut incidence = vec![0u64; graph.edge_count()];
        for b in &ties {
            for (x, y) in b.edges() {
                incidence[graph.edges().binary_search(&(x, y)).unwrap()] += 1;
            }
        }
        let mut counts = v.counts.clone();
        if inject_fault && !counts.is_empty() {
            counts[0] += 1;
        }
        pass &= incidence == counts;
        tested += 1;
    }
    Ok(CheckResult {
        name: "claim53",
        pass,
        detail: format!(
            "{instances} instances, |E3 cap pi3| v = sum of bow ties{}",
            if inject_fault { " (fault injected)" } else { "" }
        ),
    })
}

fn norms_sweep(rng: &mut ChaCha8Rng, instances: usize) -> Result<CheckResult, LabError> {
    let mut pass = true;
    let mut tested = 0;
    while tested < instances {
        let n = rng.gen_range(2..=6);
        let event = random_event(rng, n, 0.85);
        let graph = build_graph(&event, &Part::full(n))?;
        if graph.event_members(2).is_empty() {
            continue;
        }
        let r = check_norm_bounds(&graph)?;
        pass &= r.l1_pass && r.l2_pass && r.weight_pass;
        tested += 1;
    }
    Ok(CheckResult {
        name: "claims54_55",
        pass,
        detail: format!("{instances} dense instances, l1/l2 bounds exact"),
    })
}

fn fact56_sweep(rng: &mut ChaCha8Rng, vectors: usize) -> Result<CheckResult, LabError> {
    let mut pass = true;
    let mut applicable = 0;
    for _ in 0..vectors {
        let m = rng.gen_range(2..=16);
        let v: Vec<Rational> =
            (0..m).map(|_| rat_u128(rng.gen_range(0..8), 1)).collect();
        if v.iter().all(Rational::is_zero) {
            continue;
        }
        let r = uniformity_check(&v)?;
        if r.applicable {
            applicable += 1;
            pass &= r.pass;
        }
    }
    // The hand-checked case (1/2, 1/2, 0, 0).
    let hand = uniformity_check(&[rat(1, 2), rat(1, 2), Rational::zero(), Rational::zero()])?;
    pass &= hand.applicable && hand.pass && hand.s == rat(2, 1) && hand.tv_l1 == Rational::one();
    Ok(CheckResult {
        name: "fact56",
        pass,
        detail: format!("{applicable} applicable vectors of {vectors} plus the hand case"),
    })
}

fn decomposition_sweep(rng: &mut ChaCha8Rng, events: usize) -> Result<CheckResult, LabError> {
    let delta = rat(3, 10);
    let mut pass = true;
    for _ in 0..events {
        let n = rng.gen_range(2..=6);
        let density = rng.gen_range(0.2..0.9);
        let event = random_event(rng, n, density);
        let (partition, steps) = decompose(&event, &delta)?;
        pass &= steps <= codim_limit(&delta);
        pass &= partition.failure_probability(&event, &delta)? <= delta;
        let weights: Rational = partition.weights().iter().sum();
        pass &= weights == Rational::one();
    }
    Ok(CheckResult {
        name: "decomposition",
        pass,
        detail: format!("{events} events, refinement and failure guarantees"),
    })
}

fn walk_sweep(rng: &mut ChaCha8Rng, strategies: usize) -> Result<CheckResult, LabError> {
    let game = Game::ghz_repeated(2)?;
    let params = WalkParams::default();
    let mut cache = WalkCache::new();
    let mut pass = true;
    for k in 0..strategies {
        let f = random_strategy(&game, rng);
        let t = conditioning_walk_cached(&game, &f, &format!("rand-{k}"), &params, &mut cache)?;
        pass &= t.bound_holds();
        let mut used: Vec<usize> = t.steps.iter().map(|s| s.coordinate).collect();
        let len = used.len();
        used.sort_unstable();
        used.dedup();
        pass &= used.len() == len;
    }
    Ok(CheckResult {
        name: "conditioning_walk",
        pass,
        detail: format!("{strategies} random strategies, product bound exact"),
    })
}

/// Runs every claim sweep with the given seed. `inject_fault` perturbs one
/// bow-tie count so the identity check must fail (negative control).
pub fn verify_all(seed: u64, inject_fault: bool) -> Result<VerifyReport, LabError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let checks = vec![
        parseval_sweep(&mut rng, 50)?,
        lemma41_sweep(&mut rng, 20)?,
        claim52_sweep(&mut rng, 50)?,
        claim53_sweep(&mut rng, 30, inject_fault)?,
        norms_sweep(&mut rng, 30)?,
        fact56_sweep(&mut rng, 500)?,
        decomposition_sweep(&mut rng, 10)?,
        walk_sweep(&mut rng, 50)?,
    ];
    Ok(VerifyReport { checks })
}
