use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use num_bigint::BigUint;

use treemine::adversary::AdversarySpec;
use treemine::analysis::{ck, minimax_value, move_bound, sync_bound, CostCoefficients};
use treemine::bench::{bench, verify_trace, BenchConfig, TreeSpec};
use treemine::explore::{
    is_locally_greedy, run_acte, run_cte_sync, verify_targets_inequality, HiddenWorld,
    SchedulerSpec,
};
use treemine::game::{cost_at_depth, run_game, StopRule};
use treemine::player::PlayerSpec;

#[derive(Parser)]
#[command(name = "treemine", version, about = "Tree-mining games and collective tree exploration")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Play one game and report its cost against `c_k·D`.
    Play {
        #[arg(long)]
        k: u32,
        /// k2, k3, recursive or recursive@horizon=Δ; defaults by k.
        #[arg(long)]
        player: Option<PlayerSpec>,
        /// lower-bound, random@seed=..,... or replay@file=PATH.
        #[arg(long, default_value = "lower-bound")]
        adversary: String,
        #[arg(long, default_value_t = 8)]
        depth: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Explore a tree asynchronously with TEAM.
    Explore {
        #[arg(long)]
        tree: TreeSpec,
        #[arg(long)]
        k: u32,
        #[arg(long, default_value = "rr")]
        scheduler: SchedulerSpec,
        #[arg(long)]
        player: Option<PlayerSpec>,
        /// Seed of the order in which children are revealed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synchronous exploration followed by the return to the root.
    Sync {
        #[arg(long)]
        tree: TreeSpec,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        player: Option<PlayerSpec>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Minimax value of the truncated game.
    Solve {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        depth: u32,
        /// Leaves at this depth cannot grow.
        #[arg(long)]
        cap: u32,
        #[arg(long, default_value_t = 30)]
        rounds: u32,
        #[arg(long, default_value_t = 2_000_000)]
        budget: usize,
    },
    /// Table of c_k, a_k, b_k and c_k / k^{log₂ k}.
    Ck {
        #[arg(long, default_value_t = 32)]
        max: u32,
    },
    /// Run the exploration benchmark and write a CSV report.
    Bench {
        /// Tree specs; the standard corpus of size --size when omitted.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        corpus: Vec<String>,
        #[arg(long, default_value_t = 1000)]
        size: u32,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,8")]
        ks: Vec<u32>,
        #[arg(long, value_delimiter = ';', default_value = "rr;single;deepest;random@seed=1")]
        schedulers: Vec<SchedulerSpec>,
        #[arg(long)]
        player: Option<PlayerSpec>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Replay a game or exploration trace and re-check its invariants.
    VerifyTrace { file: PathBuf },
}

/// Exit 1: an invariant or bound does not hold.
#[derive(Debug)]
struct Violation(String);

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Violation {}

fn violation(msg: impl Into<String>) -> anyhow::Error {
    Violation(msg.into()).into()
}

fn default_seed(given: Option<u64>) -> u64 {
    given
        .or_else(|| std::env::var("TREEMINE_SEED").ok()?.parse().ok())
        .unwrap_or(0)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load(spec: &TreeSpec) -> anyhow::Result<treemine::RootedTree> {
    Ok(spec.generate()?)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.cmd {
        Cmd::Play { k, player, adversary, depth, out } => {
            let spec = player.unwrap_or_else(|| PlayerSpec::for_k(k));
            let mut adv_spec: AdversarySpec = adversary.parse()?;
            if let (AdversarySpec::Random(p), Ok(seed)) = (&mut adv_spec, std::env::var("TREEMINE_SEED")) {
                if !adversary.contains("seed=") {
                    p.seed = seed.parse().context("TREEMINE_SEED")?;
                }
            }
            let mut adv = adv_spec.build(k, depth)?;
            let mut p = spec.build(k);
            let run = run_game(p.as_mut(), adv.as_mut(), spec.initial_state(k), &StopRule::depth(k, depth))?;
            let cost = cost_at_depth(&run.trace, depth);
            let bound = ck(k.max(2))? * depth.max(1);
            println!("player={spec} adversary={adv_spec} k={k} depth={depth}");
            println!("rounds={} final_cost={} cost_at_depth={cost} bound={bound}", run.trace.rounds.len(), run.state.cost());
            if let Some(out) = out {
                write_json(&out, &run.trace)?;
            }
            if cost > 0 && BigUint::from(cost as u64) > bound {
                return Err(violation(format!("cost {cost} exceeds c_k·D = {bound}")));
            }
        }
        Cmd::Explore { tree, k, scheduler, player, seed, out } => {
            let t = load(&tree)?;
            let (n, d) = (t.len() as u64, t.max_depth());
            let spec = player.unwrap_or_else(|| PlayerSpec::for_k(k));
            let mut world = HiddenWorld::new(t, default_seed(seed));
            let run = run_acte(spec, &mut world, scheduler, k, true)?;
            let trace = run.trace.as_ref().expect("recorded");
            let report = verify_targets_inequality(trace).map_err(|e| violation(e.to_string()))?;
            let bound = move_bound(n, k, d);
            println!("tree={tree} n={n} depth={d} k={k} scheduler={scheduler} player={spec}");
            println!(
                "moves={} bound={bound} explored={} target_movement={} game_cost={} min_slack={}",
                run.moves, run.explored, run.target_movement, run.game_cost, report.min_slack
            );
            if let Some(out) = out {
                write_json(&out, trace)?;
            }
            if !is_locally_greedy(trace) {
                return Err(violation("trace is not locally greedy"));
            }
            if BigUint::from(run.moves) > bound {
                return Err(violation(format!("{} moves exceed 2n + c_k·D = {bound}", run.moves)));
            }
        }
        Cmd::Sync { tree, k, player, seed } => {
            let t = load(&tree)?;
            let (n, d) = (t.len() as u64, t.max_depth());
            let spec = player.unwrap_or_else(|| PlayerSpec::for_k(k));
            let mut world = HiddenWorld::new(t, default_seed(seed));
            let run = run_cte_sync(spec, &mut world, k, false)?;
            let bound = sync_bound(n, k, d);
            println!("tree={tree} n={n} depth={d} k={k} player={spec}");
            println!(
                "rounds={} exploration={} return={} bound={bound}",
                run.rounds, run.exploration_rounds, run.return_rounds
            );
            if BigUint::from(run.rounds) > bound {
                return Err(violation(format!("{} rounds exceed {bound}", run.rounds)));
            }
        }
        Cmd::Solve { k, depth, cap, rounds, budget } => {
            let v = minimax_value(k, depth, cap, rounds, budget)?;
            println!("k={k} depth={depth} cap={cap} rounds={rounds} value={} positions={}", v.value, v.positions);
            for (i, (adv, resp)) in v.principal_variation.iter().enumerate() {
                println!("{i:>3} {}  ->  {}", serde_json::to_string(adv)?, serde_json::to_string(resp)?);
            }
        }
        Cmd::Ck { max } => {
            if max < 2 {
                return Err(anyhow!("--max must be at least 2"));
            }
            let t = CostCoefficients::up_to(max);
            let mut w = csv::Writer::from_writer(std::io::stdout());
            w.write_record(["k", "c_k", "a_k", "b_k", "ratio"])?;
            for k in 2..=max {
                w.write_record([
                    k.to_string(),
                    t.c(k).to_string(),
                    t.a(k).to_string(),
                    t.b(k).to_string(),
                    format!("{:.6}", t.ratio(k)),
                ])?;
            }
            w.flush()?;
        }
        Cmd::Bench { corpus, size, ks, schedulers, player, seed, out, json } => {
            let seed = default_seed(seed);
            let corpus = if corpus.is_empty() {
                TreeSpec::corpus(size, seed)
            } else {
                corpus.iter().map(|s| s.parse()).collect::<Result<_, _>>()?
            };
            let cfg = BenchConfig {
                corpus,
                ks,
                schedulers,
                player,
                seed,
                failure_dir: Some(out.as_ref().and_then(|p| p.parent()).unwrap_or(Path::new(".")).to_path_buf()),
            };
            let report = bench(&cfg).map_err(|e| match e {
                treemine::bench::BenchError::Bound { .. } => violation(e.to_string()),
                e => e.into(),
            })?;
            match out {
                Some(path) => {
                    let f = std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                    report.write_csv(f)?;
                }
                None => report.write_csv(std::io::stdout())?,
            }
            if let Some(path) = json {
                std::fs::write(&path, report.to_json())?;
            }
            eprintln!(
                "{} runs, worst M/bound {:.4}, worst rounds/bound {:.4}",
                report.rows.len(),
                report.worst_move_ratio,
                report.worst_sync_ratio
            );
        }
        Cmd::VerifyTrace { file } => match verify_trace(&file) {
            Ok(summary) => println!("ok {}", serde_json::to_string(&summary)?),
            Err(e) if e.is_violation() => return Err(violation(e.to_string())),
            Err(e) => return Err(e.into()),
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<Violation>() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
