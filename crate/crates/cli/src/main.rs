use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pdres::arena::{expand_truncated, ExpandError, FrontierMode};
use pdres::engine::{
    brute_force_resilience, check_alpha, extract_optimal_strategy, format_magnitude, resilience_fixpoint,
    EngineError, KSearch, OracleValue,
};
use pdres::format::{parse_game_bytes, parse_strategy, serialize_game, serialize_strategy};
use pdres::generators::{gen_binary_pds, gen_fig1, gen_fig3, gen_primorial_ocs, gen_random, RandomParams};
use pdres::normalize::{f_sink_normalize, is_f_sink_normal};
use pdres::play::{simulate, Policy};
use pdres::reach::{optimal_reach_value, ReachError};
use pdres::rigging::{rig_pds, Move, TruncatedStrategy};
use pdres::strategy_graph::{
    parse_strategy_graph, serialize_strategy_graph, strategy_graph_exists, verify_strategy_graph,
    StrategyGraphError,
};
use pdres::{AnalysisOptions, Outcome, PositionalStrategy, PushdownGameSpec, ResilienceReport, Resilience};

#[derive(Parser)]
#[command(name = "pdres", version, about = "Resilience of safety games on pushdown systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Resilience of the initial configuration, with the height and value bounds.
    Resilience {
        file: PathBuf,
        /// Largest truncation height to analyze.
        #[arg(long)]
        height_cap: Option<usize>,
        /// Largest disturbance counter to try.
        #[arg(long, default_value_t = 1 << 16)]
        k_cap: u64,
        /// Try counters one by one instead of doubling and bisecting.
        #[arg(long)]
        ascending: bool,
    },
    /// Does Player 0 have an ALPHA-resilient strategy?
    Check {
        file: PathBuf,
        /// `omega+1`, `omega` or a natural number.
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        height_cap: Option<usize>,
    },
    /// Optimally resilient strategy on the truncation of height N.
    Strategy {
        file: PathBuf,
        #[arg(long)]
        height: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Player-1 strategy graph for the K-counter game, or verify one.
    StrategyGraph {
        file: PathBuf,
        #[arg(long)]
        k: u64,
        /// Check the graph in this file instead of computing one.
        #[arg(long)]
        verify: Option<PathBuf>,
        #[arg(long, default_value_t = 16)]
        height_cap: usize,
        /// Write the computed graph here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimal number of steps to force a visit to the unsafe states.
    ReachOptimal {
        file: PathBuf,
        #[arg(long)]
        height_cap: Option<usize>,
    },
    /// Write a fixture or random game.
    Generate {
        #[command(subcommand)]
        kind: Generated,
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Play a strategy listing against random opponents and disturbances.
    Simulate {
        game: PathBuf,
        strategy: PathBuf,
        #[arg(long)]
        disturbances: usize,
        #[arg(long, default_value_t = 100)]
        runs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Moves per run.
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
    /// Brute-force resilience of every configuration of a truncation.
    Oracle {
        file: PathBuf,
        #[arg(long)]
        truncate: usize,
        #[arg(long)]
        budget: u64,
    },
}

#[derive(Subcommand)]
enum Generated {
    Fig1,
    Fig3,
    PrimorialOcs { k: usize },
    BinaryPds { k: usize },
    Random { seed: u64, states: usize },
}

/// Bad input: unreadable file, syntax error, unsupported game.
#[derive(Debug)]
struct InputError(String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

/// A cap was hit before an answer was found.
#[derive(Debug)]
struct CapsExhausted(String);

impl fmt::Display for CapsExhausted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CapsExhausted {}

fn input(msg: impl Into<String>) -> anyhow::Error {
    InputError(msg.into()).into()
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn read_game(path: &Path) -> Result<PushdownGameSpec> {
    let bytes = fs::read(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    parse_game_bytes(&bytes).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn engine(e: EngineError) -> anyhow::Error {
    match e {
        EngineError::Expand(ExpandError::Budget(n)) => {
            CapsExhausted(format!("expansion exceeded the vertex budget of {n}")).into()
        }
        other => other.into(),
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn options(height_cap: Option<usize>) -> AnalysisOptions {
    AnalysisOptions {
        height_cap,
        ..AnalysisOptions::default()
    }
}

fn report(r: &ResilienceReport) -> Result<()> {
    match r.outcome {
        Outcome::Value(v) => println!("{v}"),
        Outcome::Unknown { k_cap } => println!("unknown (no counter up to {k_cap} decided)"),
    }
    println!("height: {}", r.height);
    if let Some(s) = r.stabilized {
        println!("stabilized: {}", if s { "yes" } else { "no" });
    }
    println!("{}", r.bounds);
    match r.outcome {
        Outcome::Value(_) => Ok(()),
        Outcome::Unknown { k_cap } => Err(CapsExhausted(format!("k-cap {k_cap} exhausted")).into()),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Resilience {
            file,
            height_cap,
            k_cap,
            ascending,
        } => {
            let spec = read_game(&file)?;
            let opts = AnalysisOptions {
                k_cap,
                search: if ascending { KSearch::Ascending } else { KSearch::Galloping },
                ..options(height_cap)
            };
            let r = pdres::resilience_initial(&spec, &opts).map_err(engine)?;
            report(&r)
        }
        Command::Check { file, alpha, height_cap } => {
            let spec = read_game(&file)?;
            let alpha: Resilience = match alpha.as_str() {
                "omega" => Resilience::Omega { uniform_witness: None },
                s => s.parse().map_err(|_| input(format!("bad --alpha `{s}`: expected omega+1, omega or a number")))?,
            };
            let c = check_alpha(&spec, alpha, &options(height_cap)).map_err(engine)?;
            println!("{}!{}", if c.holds { "yes" } else { "no" }, c.certificate);
            Ok(())
        }
        Command::Strategy { file, height, out } => {
            let spec = read_game(&file)?;
            let arena = expand_truncated(&spec, height, FrontierMode::Optimistic);
            let table = resilience_fixpoint(&arena);
            let strategy = extract_optimal_strategy(&arena, &table);
            let init = arena.initial().expect("expansions have an initial vertex");
            println!("value on the truncation: {}", table.value(init));
            let s = TruncatedStrategy {
                height,
                arena,
                strategy,
            };
            fs::write(&out, serialize_strategy(&spec, &s)).with_context(|| format!("writing {}", out.display()))
        }
        Command::StrategyGraph {
            file,
            k,
            verify,
            height_cap,
            out,
        } => {
            let spec = read_game(&file)?;
            if k == 0 {
                return Err(input("--k must be positive"));
            }
            if let Some(path) = verify {
                let normalized = if is_f_sink_normal(&spec) { spec } else { f_sink_normalize(&spec) };
                let rig = rig_pds(&normalized);
                let text = read_text(&path)?;
                let graph =
                    parse_strategy_graph(&text, &rig.spec).map_err(|e| input(format!("{}: {e}", path.display())))?;
                let violations = verify_strategy_graph(&graph, &normalized, k);
                if violations.is_empty() {
                    println!("valid");
                    return Ok(());
                }
                for v in &violations {
                    println!("property {}: {v}", v.property.number());
                }
                return Err(anyhow!("{} violation(s)", violations.len()));
            }
            let ans = strategy_graph_exists(&spec, k, height_cap, None).map_err(|e| match e {
                StrategyGraphError::Expand(ExpandError::Budget(n)) => {
                    CapsExhausted(format!("expansion exceeded the vertex budget of {n}")).into()
                }
                other => anyhow::Error::from(other),
            })?;
            println!("{}!{}", if ans.exists { "yes" } else { "no" }, ans.certificate);
            println!("height: {}", ans.height);
            println!("level bound: {}", format_magnitude(&ans.bound));
            if let Some(g) = &ans.graph {
                let text = serialize_strategy_graph(g, &rig_pds(&ans.normalized).spec);
                write_or_print(out.as_deref(), &text)?;
            }
            Ok(())
        }
        Command::ReachOptimal { file, height_cap } => {
            let spec = read_game(&file)?;
            let r = optimal_reach_value(&spec, &options(height_cap)).map_err(|e| match e {
                ReachError::HasDisturbances(_) => input(format!("{}: {e}", file.display())),
                ReachError::Engine(e) => engine(e),
            })?;
            report(&r)
        }
        Command::Generate { kind, out } => {
            let spec = match kind {
                Generated::Fig1 => gen_fig1(),
                Generated::Fig3 => gen_fig3(),
                Generated::PrimorialOcs { k } => gen_primorial_ocs(k),
                Generated::BinaryPds { k } => gen_binary_pds(k),
                Generated::Random { seed, states } => {
                    if states == 0 {
                        return Err(input("a random game needs at least one state"));
                    }
                    gen_random(
                        seed,
                        &RandomParams {
                            states,
                            ..RandomParams::default()
                        },
                    )
                }
            };
            write_or_print(out.as_deref(), &serialize_game(&spec))
        }
        Command::Simulate {
            game,
            strategy,
            disturbances,
            runs,
            seed,
            steps,
        } => {
            let spec = read_game(&game)?;
            let text = read_text(&strategy)?;
            let listing = parse_strategy(&text, &spec).map_err(|e| input(format!("{}: {e}", strategy.display())))?;
            let arena = expand_truncated(&spec, listing.height, FrontierMode::Optimistic);
            let mut sigma = PositionalStrategy::new(pdres::Player::Zero, arena.vertex_count());
            for (c, m) in &listing.moves {
                let from = arena
                    .vertex_of(c)
                    .ok_or_else(|| input(format!("{}: {c:?} is not in the truncation", strategy.display())))?;
                let to = match m {
                    Move::To(t) => arena.vertex_of(t),
                    Move::Frontier => arena.frontier(),
                };
                match to {
                    Some(t) if arena.successors(from).contains(&t) => sigma.set(from, t),
                    _ => return Err(input(format!("{}: illegal move from {}", strategy.display(), arena.describe(from)))),
                }
            }
            let sigma = sigma.completed(&arena);
            if disturbances > steps {
                return Err(input("--disturbances exceeds --steps"));
            }
            let init = arena.initial().expect("expansions have an initial vertex");
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (mut wins, mut losses) = (0u64, 0u64);
            for run in 0..runs {
                let schedule: BTreeSet<usize> = sample(&mut rng, steps, disturbances).into_iter().collect();
                let sim = simulate(&arena, init, Policy::Positional(&sigma), Policy::Random, &schedule, steps, seed ^ run)?;
                if sim.play.visits(arena.unsafe_set()) {
                    losses += 1;
                } else {
                    wins += 1;
                }
            }
            println!("wins {wins} losses {losses}");
            Ok(())
        }
        Command::Oracle { file, truncate, budget } => {
            let spec = read_game(&file)?;
            let arena = expand_truncated(&spec, truncate, FrontierMode::Optimistic);
            let values = brute_force_resilience(&arena, budget);
            for v in arena.vertices() {
                let shown = match values[v.index()] {
                    OracleValue::Finite(r) => r.to_string(),
                    OracleValue::AboveCap => format!(">{budget}"),
                };
                println!("{} {shown}", arena.describe(v));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<InputError>() {
                ExitCode::from(2)
            } else if e.is::<CapsExhausted>() {
                ExitCode::from(3)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
