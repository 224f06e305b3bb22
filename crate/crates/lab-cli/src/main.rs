//! ghzlab: exact desk-scale experiments on repeated GHZ games.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ghz_core::games::{Game, DEFAULT_SEARCH_CAP};
use ghz_core::rat::{rat_from_decimal, Rational};
use ghz_core::BitWord;
use ghz_lab::config::{EventSource, ExperimentConfig, LabError};
use ghz_lab::event::{event_to_json, gen_event};
use ghz_lab::pipeline::{analyze_full_part, run_pipeline, CSV_HEADER};
use ghz_lab::report::{csv_document, emit, rat_f64, rat_value, render_json};
use ghz_lab::verify::verify_all;
use ghz_lab::walk::{conditioning_walk_cached, random_strategy, WalkCache, WalkParams};
use num::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "ghzlab", about = "Exact analysis of repeated GHZ games", version)]
struct Cli {
    /// Worker threads (0 = all cores); GHZLAB_THREADS overrides.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct EventArgs {
    /// Number of repetitions n.
    #[arg(long)]
    n: usize,
    /// Keep each point of each factor independently with this probability.
    #[arg(long)]
    density: Option<f64>,
    /// Load the event from a JSON file.
    #[arg(long)]
    event_file: Option<PathBuf>,
    /// Affine factors {x : gamma . x = 0}; one hex gamma for all three.
    #[arg(long)]
    affine: Option<String>,
    /// RNG seed; determines all randomized behavior.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl EventArgs {
    fn into_config(self) -> Result<ExperimentConfig, LabError> {
        let mut config = ExperimentConfig::new(self.n);
        config.seed = self.seed;
        config.source = match (self.density, self.event_file, self.affine) {
            (Some(p), None, None) => EventSource::Density(p),
            (None, Some(path), None) => EventSource::File(path),
            (None, None, Some(hex)) => {
                let gamma = BitWord::from_hex(self.n, &hex)?;
                EventSource::Affine([gamma, gamma, gamma])
            }
            (None, None, None) => EventSource::Density(1.0),
            _ => {
                return Err(LabError::BadConfig(
                    "choose at most one of --density, --event-file, --affine".into(),
                ))
            }
        };
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Exact value of GHZ^n with a lexicographically first witness.
    Value {
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_SEARCH_CAP)]
        cap: u128,
    },
    /// Exact per-coordinate value of GHZ^n.
    CoordValue {
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        coord: usize,
        #[arg(long, default_value_t = DEFAULT_SEARCH_CAP)]
        cap: u128,
    },
    /// Generate an event and report its exact probability.
    GenEvent {
        #[command(flatten)]
        event: EventArgs,
    },
    /// Decompose an event into an affine partition.
    Decompose {
        #[command(flatten)]
        event: EventArgs,
        /// Coefficient bound delta, as a decimal or "num/den".
        #[arg(long, default_value = "0.3")]
        delta: String,
    },
    /// Bow-tie analysis of an event on the full part.
    Bowtie {
        #[command(flatten)]
        event: EventArgs,
        #[arg(long, default_value_t = ghz_core::bowtie::DEFAULT_BOWTIE_CAP)]
        cap_bowties: u128,
        /// Bow ties to sample for the coordinate-value check.
        #[arg(long, default_value_t = 32)]
        samples: usize,
    },
    /// Full pipeline: decompose, sample good parts, analyze bow ties.
    Pipeline {
        #[command(flatten)]
        event: EventArgs,
        #[arg(long, default_value = "0.3")]
        delta: String,
        /// Flag runs whose exact alpha falls below this floor.
        #[arg(long, default_value = "0")]
        alpha_floor: String,
        #[arg(long, default_value_t = ghz_core::bowtie::DEFAULT_BOWTIE_CAP)]
        cap_bowties: u128,
        /// Emit a CSV of per-part rows instead of JSON.
        #[arg(long)]
        csv: bool,
    },
    /// Conditioning walks over random strategies of GHZ^n.
    Walk {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        strategies: usize,
        /// Schedule constant c (documentation of the asymptotic schedule).
        #[arg(long, default_value = "1")]
        c: String,
        /// When set, stop at the largest m with 32^-m >= rho * 2/c.
        #[arg(long)]
        rho: Option<String>,
    },
    /// Run every claim sweep; nonzero exit on any failure.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Negative control: perturb one bow-tie count.
        #[arg(long)]
        inject_fault: bool,
    },
}

fn parse_rational(text: &str) -> Result<Rational, LabError> {
    ghz_core::rat::rat_from_str(text)
        .or_else(|| rat_from_decimal(text))
        .ok_or_else(|| LabError::BadConfig(format!("cannot parse rational '{text}'")))
}

fn strategy_json(n: usize, f: &ghz_core::games::Strategy) -> serde_json::Value {
    let players: Vec<serde_json::Value> = f
        .tables()
        .iter()
        .map(|t| {
            let map: serde_json::Map<String, serde_json::Value> = t
                .iter()
                .map(|(q, a)| (q.to_hex(), serde_json::Value::String(a.to_hex())))
                .collect();
            serde_json::Value::Object(map)
        })
        .collect();
    serde_json::json!({
        "n": n,
        "players": 3,
        "strategy": { "p1": players[0], "p2": players[1], "p3": players[2] },
    })
}

fn run(cli: Cli) -> Result<bool, LabError> {
    let threads = std::env::var("GHZLAB_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(cli.threads);
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| LabError::BadConfig(e.to_string()))?;
    }
    let out = cli.out.as_deref();

    match cli.command {
        Command::Value { n, cap } => {
            let game = Game::ghz_repeated(n)?;
            let (value, witness) = game.value_with_cap(cap)?;
            let report = serde_json::json!({
                "n": n,
                "value": rat_value(&value),
                "value_float": rat_f64(&value),
                "witness": strategy_json(n, &witness),
            });
            emit(out, &render_json(&report))?;
            Ok(true)
        }
        Command::CoordValue { n, coord, cap } => {
            let game = Game::ghz_repeated(n)?;
            let (value, witness) = game.coordinate_value_with_cap(coord, cap)?;
            let report = serde_json::json!({
                "n": n,
                "coordinate": coord,
                "value": rat_value(&value),
                "value_float": rat_f64(&value),
                "witness": strategy_json(n, &witness),
            });
            emit(out, &render_json(&report))?;
            Ok(true)
        }
        Command::GenEvent { event } => {
            let config = event.into_config()?;
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let g = gen_event(&config, &mut rng)?;
            let mut report = event_to_json(&g.event);
            report["alpha"] = rat_value(&g.alpha);
            report["alpha_zero"] = serde_json::Value::Bool(g.alpha.is_zero());
            emit(out, &render_json(&report))?;
            Ok(true)
        }
        Command::Decompose { event, delta } => {
            let mut config = event.into_config()?;
            config.delta = parse_rational(&delta)?;
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let g = gen_event(&config, &mut rng)?;
            let (partition, steps) =
                ghz_core::decomposition::decompose(&g.event, &config.delta)?;
            let parts: Vec<serde_json::Value> = partition
                .parts()
                .iter()
                .map(|p| {
                    serde_json::json!({
                        "codim": p.codim(),
                        "shifts": p.shifts().iter().map(|s| s.to_hex()).collect::<Vec<_>>(),
                        "prob": rat_value(&p.prob()),
                    })
                })
                .collect();
            let report = serde_json::json!({
                "alpha": rat_value(&g.alpha),
                "delta": rat_value(&config.delta),
                "refinement_steps": steps,
                "codim_bound": partition.codim_bound(),
                "failure_probability":
                    rat_value(&partition.failure_probability(&g.event, &config.delta)?),
                "parts": parts,
            });
            emit(out, &render_json(&report))?;
            Ok(true)
        }
        Command::Bowtie { event, cap_bowties, samples } => {
            let mut config = event.into_config()?;
            config.cap_bowties = cap_bowties;
            config.sample_bowties = samples;
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let g = gen_event(&config, &mut rng)?;
            let analysis = analyze_full_part(&g.event, &config)?;
            emit(out, &render_json(&analysis.to_json()))?;
            Ok(true)
        }
        Command::Pipeline { event, delta, alpha_floor, cap_bowties, csv } => {
            let mut config = event.into_config()?;
            config.delta = parse_rational(&delta)?;
            config.alpha_floor = parse_rational(&alpha_floor)?;
            config.cap_bowties = cap_bowties;
            let report = run_pipeline(&config)?;
            if csv {
                let rows: Vec<Vec<String>> =
                    report.parts.iter().map(|p| p.csv_row()).collect();
                emit(out, &csv_document(&CSV_HEADER, &rows))?;
            } else {
                emit(out, &render_json(&report.to_json()))?;
            }
            Ok(true)
        }
        Command::Walk { n, seed, strategies, c, rho } => {
            let params = WalkParams {
                c: parse_rational(&c)?,
                rho: rho.as_deref().map(parse_rational).transpose()?,
            };
            let game = Game::ghz_repeated(n)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut transcripts = Vec::new();
            let mut cache = WalkCache::new();
            let mut all_bounded = true;
            for k in 0..strategies {
                let f = random_strategy(&game, &mut rng);
                let t = conditioning_walk_cached(
                    &game,
                    &f,
                    &format!("seed{seed}-{k}"),
                    &params,
                    &mut cache,
                )?;
                all_bounded &= t.bound_holds();
                transcripts.push(t.to_json());
            }
            let report = serde_json::json!({
                "n": n,
                "strategies": strategies,
                "all_bounds_hold": all_bounded,
                "transcripts": transcripts,
            });
            emit(out, &render_json(&report))?;
            Ok(all_bounded)
        }
        Command::Verify { seed, inject_fault } => {
            let report = verify_all(seed, inject_fault)?;
            emit(out, &render_json(&report.to_json()))?;
            for check in &report.checks {
                eprintln!(
                    "{}: {} ({})",
                    check.name,
                    if check.pass { "pass" } else { "FAIL" },
                    check.detail
                );
            }
            Ok(report.all_pass())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

#[test]
fn rational_flag_parsing() {
    use ghz_core::rat::rat_to_string;
    assert_eq!(rat_to_string(&parse_rational("0.3").unwrap()), "3/10");
    assert_eq!(rat_to_string(&parse_rational("3/10").unwrap()), "3/10");
    assert!(parse_rational("nonsense").is_err());
}
