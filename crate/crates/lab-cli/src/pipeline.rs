//! The experiment pipeline: generate the event, decompose, sample good
//! parts, and analyze each part's bow-tie distribution, aggregating the
//! per-coordinate value bound 3/4 * hard + 1 * (1 - hard).

use ghz_core::bowtie::{
    build_graph, check_norm_bounds, tv_to_uniform, BowTieError, BowTieSampler, EdgeGraph,
};
use ghz_core::decomposition::{decompose, is_good, Part};
use ghz_core::games::ProductEvent;
use ghz_core::rat::{rat, Rational};
use num::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crate::config::{ExperimentConfig, LabError};
use crate::event::gen_event;
use crate::report::{rat_f64, rat_value};

/// Analysis of one part's bow-tie distribution.
pub struct PartAnalysis {
    pub part: Part,
    /// Sampling weight: fraction of part draws that landed here.
    pub weight: Rational,
    pub edges: usize,
    pub bowtie_count: Option<u128>,
    pub l1: Rational,
    pub l2_squared: Rational,
    /// s = m ||v~||_2^2 = (1 + beta)^2; beta = sqrt(s) - 1.
    pub s: Rational,
    pub tv_l1: Rational,
    pub hard_fraction: Rational,
    /// 3/4 * hard_fraction + 1 * (1 - hard_fraction).
    pub aggregate: Rational,
    pub c52_pass: bool,
    pub c53_pass: bool,
    pub c54_pass: bool,
    pub c55_pass: bool,
    pub f56_pass: bool,
}

/// The full pipeline report.
pub struct PipelineReport {
    pub alpha: Rational,
    pub below_floor: bool,
    pub refinement_steps: usize,
    pub part_count: usize,
    pub good_probability: Rational,
    pub parts: Vec<PartAnalysis>,
    /// Weighted average of per-part aggregates over the analyzed parts.
    pub aggregate: Option<Rational>,
}

fn analyze_part(
    event: &ProductEvent,
    part: &Part,
    weight: Rational,
    config: &ExperimentConfig,
    rng: &mut ChaCha8Rng,
) -> Result<PartAnalysis, LabError> {
    let graph = build_graph(event, part)?;
    let norms = check_norm_bounds(&graph)?;
    let uniformity = tv_to_uniform(&graph)?;
    let v = graph.bowtie_vector()?;

    let sampler = BowTieSampler::new(&graph)?;
    let count = sampler.count();
    let hard = sampler.differing_fraction();
    let aggregate = rat(3, 4) * &hard + (Rational::one() - &hard);

    // Claim checks on this instance: the identity when enumerable, the
    // norm bounds, uniformity, and per-coordinate values of sampled ties.
    let (bowtie_count, c53_pass) = match sampler.enumerate(config.cap_bowties) {
        Ok(ties) => {
            let mut incidence = vec![0u64; graph.edge_count()];
            for b in &ties {
                for (x, y) in b.edges() {
                    let idx = graph
                        .edges()
                        .binary_search(&(x, y))
                        .expect("bow-tie edge present");
                    incidence[idx] += 1;
                }
            }
            (Some(count), incidence == v.counts)
        }
        Err(BowTieError::TooManyBowTies { .. }) => (None, true),
        Err(err) => return Err(err.into()),
    };

    let mut c52_pass = true;
    for _ in 0..config.sample_bowties {
        let b = sampler.sample(rng);
        let game = b.game(event.n())?;
        for i in 0..event.n() {
            let (val, _) = game.coordinate_value(i)?;
            let expected = if b.differs_at(i) { rat(3, 4) } else { Rational::one() };
            c52_pass &= val == expected;
        }
    }

    Ok(PartAnalysis {
        part: part.clone(),
        weight,
        edges: graph.edge_count(),
        bowtie_count,
        l1: v.l1(),
        l2_squared: v.l2_squared(),
        s: uniformity.s,
        tv_l1: uniformity.tv_l1,
        hard_fraction: hard,
        aggregate,
        c52_pass,
        c53_pass,
        c54_pass: norms.l1_pass,
        c55_pass: norms.l2_pass && norms.weight_pass,
        f56_pass: !uniformity.applicable || uniformity.pass,
    })
}

/// Runs the pipeline on `config`. Fails with [`LabError::ZeroAlpha`] when
/// the event misses the query support entirely.
pub fn run_pipeline(config: &ExperimentConfig) -> Result<PipelineReport, LabError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let generated = gen_event(config, &mut rng)?;
    if generated.alpha.is_zero() {
        return Err(LabError::ZeroAlpha);
    }
    let event = generated.event;
    let below_floor = generated.alpha < config.alpha_floor;

    let (partition, steps) = decompose(&event, &config.delta)?;
    let mut good_probability = Rational::zero();
    for part in partition.parts() {
        if is_good(part, &event, &generated.alpha, &config.delta)? {
            good_probability += part.prob();
        }
    }

    // Sample parts from the event-conditioned weights; analyze each good,
    // bow-tie-bearing draw, weighted by its draw frequency.
    let mut draw_counts: Vec<usize> = vec![0; partition.parts().len()];
    for _ in 0..config.sample_parts {
        draw_counts[partition.sample_part(&event, &mut rng)?] += 1;
    }
    let mut parts = Vec::new();
    let mut analyzed_weight = Rational::zero();
    for (idx, &draws) in draw_counts.iter().enumerate() {
        if draws == 0 {
            continue;
        }
        let part = &partition.parts()[idx];
        if !is_good(part, &event, &generated.alpha, &config.delta)? {
            continue;
        }
        let weight = rat(draws as i64, config.sample_parts as i64);
        match analyze_part(&event, part, weight.clone(), config, &mut rng) {
            Ok(analysis) => {
                analyzed_weight += &weight;
                parts.push(analysis);
            }
            // Degenerate parts (no edges, empty factors, no bow ties)
            // carry no bow-tie statistics; skip them.
            Err(LabError::BowTie(BowTieError::EmptyE3 | BowTieError::NoBowTies)) => {}
            Err(err) => return Err(err),
        }
    }

    let aggregate = if analyzed_weight.is_zero() {
        None
    } else {
        let total: Rational =
            parts.iter().map(|p| &p.weight * &p.aggregate).sum();
        Some(total / analyzed_weight)
    };

    Ok(PipelineReport {
        alpha: generated.alpha,
        below_floor,
        refinement_steps: steps,
        part_count: partition.parts().len(),
        good_probability,
        parts,
        aggregate,
    })
}

impl PartAnalysis {
    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "codim": self.part.codim(),
            "shifts": self.part.shifts().iter().map(|s| s.to_hex()).collect::<Vec<_>>(),
            "weight": rat_value(&self.weight),
            "edges": self.edges,
            "bowtie_count": self.bowtie_count.map(|c| c.to_string()),
            "l1": rat_value(&self.l1),
            "l2sq": rat_value(&self.l2_squared),
            "beta": rat_f64(&self.s).sqrt() - 1.0,
            "tv": rat_value(&self.tv_l1),
            "hard_fraction": rat_value(&self.hard_fraction),
            "aggregate": rat_value(&self.aggregate),
            "claims": {
                "c52": self.c52_pass,
                "c53": self.c53_pass,
                "c54": self.c54_pass,
                "c55": self.c55_pass,
                "f56": self.f56_pass,
            },
        })
    }

    pub fn csv_row(&self) -> Vec<String> {
        vec![
            self.part.codim().to_string(),
            self.edges.to_string(),
            self.bowtie_count.map_or_else(|| "capped".into(), |c| c.to_string()),
            ghz_core::rat::rat_to_string(&self.l1),
            ghz_core::rat::rat_to_string(&self.l2_squared),
            ghz_core::rat::rat_to_string(&self.tv_l1),
            ghz_core::rat::rat_to_string(&self.hard_fraction),
            ghz_core::rat::rat_to_string(&self.aggregate),
            [self.c52_pass, self.c53_pass, self.c54_pass, self.c55_pass, self.f56_pass]
                .iter()
                .all(|&p| p)
                .to_string(),
        ]
    }
}

pub const CSV_HEADER: [&str; 9] =
    ["codim", "edges", "bowties", "l1", "l2sq", "tv", "hard_fraction", "aggregate", "claims_pass"];

impl PipelineReport {
    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "alpha": rat_value(&self.alpha),
            "below_floor": self.below_floor,
            "refinement_steps": self.refinement_steps,
            "part_count": self.part_count,
            "good_probability": rat_value(&self.good_probability),
            "aggregate": self.aggregate.as_ref().map(rat_value),
            "parts": self.parts.iter().map(PartAnalysis::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Convenience for tests and the `bowtie` subcommand: analyze the full
/// part of an explicit event.
pub fn analyze_full_part(
    event: &ProductEvent,
    config: &ExperimentConfig,
) -> Result<PartAnalysis, LabError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    analyze_part(event, &Part::full(event.n()), Rational::one(), config, &mut rng)
}

/// The full-part edge graph of an event, for subcommands needing direct
/// access.
pub fn full_graph(event: &ProductEvent) -> Result<EdgeGraph, LabError> {
    Ok(build_graph(event, &Part::full(event.n()))?)
}
