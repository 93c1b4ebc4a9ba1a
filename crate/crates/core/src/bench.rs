//! Tree corpora and the exploration benchmark.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::analysis::{move_bound, sync_bound};
use crate::explore::{
    is_locally_greedy, run_acte, run_cte_sync, verify_targets_inequality, ExplorationTrace,
    ExploreError, HiddenWorld, SchedulerSpec, TargetsReport, TargetsViolation,
};
use crate::game::{GameTrace, TraceError};
use crate::player::PlayerSpec;
use crate::tree::{RootedTree, TreeJson};

/// A named tree generator.
///
/// Written `path:N`, `star:N`, `binary:D`, `caterpillar:N,STRIDE`,
/// `spider:LEGS,LEN`, `random:N,SEED,MAXDEG` or `file:PATH`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeSpec {
    Path { n: u32 },
    Star { n: u32 },
    Binary { depth: u32 },
    /// A spine with a pendant leaf after every `stride` spine nodes.
    Caterpillar { n: u32, stride: u32 },
    Spider { legs: u32, len: u32 },
    /// Random recursive tree with out-degree at most `max_deg`.
    Random { n: u32, seed: u64, max_deg: u32 },
    File(PathBuf),
}

#[derive(Debug, Error)]
pub enum TreeSpecError {
    #[error("bad tree spec {0:?}")]
    Parse(String),
    #[error("invalid parameters for {0}")]
    Params(String),
    #[error("cannot load {path}: {msg}")]
    File { path: PathBuf, msg: String },
}

impl TreeSpec {
    pub fn generate(&self) -> Result<RootedTree, TreeSpecError> {
        let bad = || TreeSpecError::Params(self.to_string());
        let parents: Vec<u32> = match *self {
            TreeSpec::Path { n } => {
                if n == 0 {
                    return Err(bad());
                }
                (0..n).map(|i| i.saturating_sub(1)).collect()
            }
            TreeSpec::Star { n } => {
                if n == 0 {
                    return Err(bad());
                }
                vec![0; n as usize]
            }
            TreeSpec::Binary { depth } => {
                if depth > 24 {
                    return Err(bad());
                }
                let n = (1u32 << (depth + 1)) - 1;
                (0..n).map(|i| i.saturating_sub(1) / 2).collect()
            }
            TreeSpec::Caterpillar { n, stride } => {
                if n == 0 || stride == 0 {
                    return Err(bad());
                }
                let mut p = vec![0u32];
                let mut spine = 0u32;
                for i in 1..n {
                    p.push(spine);
                    if i % (stride + 1) != 0 {
                        spine = i;
                    }
                }
                p
            }
            TreeSpec::Spider { legs, len } => {
                if legs == 0 || len == 0 {
                    return Err(bad());
                }
                let mut p = vec![0u32];
                for _ in 0..legs {
                    for j in 0..len {
                        let prev = p.len() as u32 - 1;
                        p.push(if j == 0 { 0 } else { prev });
                    }
                }
                p
            }
            TreeSpec::Random { n, seed, max_deg } => {
                if n == 0 || max_deg == 0 {
                    return Err(bad());
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut deg = vec![0u32; n as usize];
                let mut open = vec![0u32];
                let mut p = vec![0u32];
                for i in 1..n {
                    let j = rng.gen_range(0..open.len());
                    let v = open[j];
                    p.push(v);
                    deg[v as usize] += 1;
                    if deg[v as usize] == max_deg {
                        open.swap_remove(j);
                    }
                    open.push(i);
                }
                p
            }
            TreeSpec::File(ref path) => return load_tree(path),
        };
        RootedTree::from_parents(&parents).map_err(|_| bad())
    }

    /// The standard corpus at size about `n`.
    pub fn corpus(n: u32, seed: u64) -> Vec<TreeSpec> {
        let side = ((n as f64).sqrt() as u32).max(1);
        let depth = (31 - n.max(1).leading_zeros()).saturating_sub(1);
        vec![
            TreeSpec::Path { n },
            TreeSpec::Star { n },
            TreeSpec::Binary { depth },
            TreeSpec::Caterpillar { n, stride: 3 },
            TreeSpec::Spider { legs: side, len: side },
            TreeSpec::Random { n, seed, max_deg: 3 },
        ]
    }
}

pub fn load_tree(path: &Path) -> Result<RootedTree, TreeSpecError> {
    let err = |msg: String| TreeSpecError::File { path: path.to_path_buf(), msg };
    let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
    let j: TreeJson = serde_json::from_str(&text).map_err(|e| err(e.to_string()))?;
    RootedTree::try_from(j).map_err(|e| err(e.to_string()))
}

impl fmt::Display for TreeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeSpec::Path { n } => write!(f, "path:{n}"),
            TreeSpec::Star { n } => write!(f, "star:{n}"),
            TreeSpec::Binary { depth } => write!(f, "binary:{depth}"),
            TreeSpec::Caterpillar { n, stride } => write!(f, "caterpillar:{n},{stride}"),
            TreeSpec::Spider { legs, len } => write!(f, "spider:{legs},{len}"),
            TreeSpec::Random { n, seed, max_deg } => write!(f, "random:{n},{seed},{max_deg}"),
            TreeSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl FromStr for TreeSpec {
    type Err = TreeSpecError;

    fn from_str(s: &str) -> Result<Self, TreeSpecError> {
        let bad = || TreeSpecError::Parse(s.to_string());
        let (kind, args) = s.split_once(':').ok_or_else(bad)?;
        if kind == "file" {
            return Ok(TreeSpec::File(PathBuf::from(args)));
        }
        let nums: Vec<u64> = args
            .split(',')
            .map(|a| a.trim().parse::<u64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        let small = |i: usize| -> Result<u32, TreeSpecError> {
            nums.get(i).and_then(|&x| u32::try_from(x).ok()).ok_or_else(bad)
        };
        let spec = match (kind, nums.len()) {
            ("path", 1) => TreeSpec::Path { n: small(0)? },
            ("star", 1) => TreeSpec::Star { n: small(0)? },
            ("binary", 1) => TreeSpec::Binary { depth: small(0)? },
            ("caterpillar", 2) => TreeSpec::Caterpillar { n: small(0)?, stride: small(1)? },
            ("spider", 2) => TreeSpec::Spider { legs: small(0)?, len: small(1)? },
            ("random", 2) => TreeSpec::Random { n: small(0)?, seed: nums[1], max_deg: 3 },
            ("random", 3) => TreeSpec::Random { n: small(0)?, seed: nums[1], max_deg: small(2)? },
            _ => return Err(bad()),
        };
        Ok(spec)
    }
}

/// What to run.
#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub corpus: Vec<TreeSpec>,
    pub ks: Vec<u32>,
    pub schedulers: Vec<SchedulerSpec>,
    /// `None` picks the default strategy for each `k`.
    pub player: Option<PlayerSpec>,
    /// Seeds the order in which hidden children are revealed.
    pub seed: u64,
    /// Where to write the trace of a failing run.
    pub failure_dir: Option<PathBuf>,
}

/// One (tree, k, scheduler) combination. Bounds are exact decimal integers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub tree: String,
    pub n: u64,
    pub depth: u32,
    pub k: u32,
    pub player: String,
    pub scheduler: String,
    pub moves: u64,
    pub move_bound: String,
    pub move_ratio: f64,
    pub overhead: i64,
    pub target_movement: u64,
    pub game_cost: i64,
    pub sync_rounds: u64,
    pub sync_bound: String,
    pub sync_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub worst_move_ratio: f64,
    pub worst_sync_ratio: f64,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Tree(#[from] TreeSpecError),
    #[error("{tree}, k={k}, {scheduler}: {source}")]
    Explore { tree: String, k: u32, scheduler: String, source: ExploreError },
    #[error("{tree}, k={k}, {scheduler}: {what} {value} exceeds bound {bound}{}", trace.as_ref().map(|p| format!(" (trace in {})", p.display())).unwrap_or_default())]
    Bound {
        tree: String,
        k: u32,
        scheduler: String,
        what: &'static str,
        value: u64,
        bound: String,
        trace: Option<PathBuf>,
    },
    #[error("cannot write the report: {0}")]
    Io(String),
}

fn ratio(value: u64, bound: &BigUint) -> f64 {
    value as f64 / bound.to_f64().unwrap_or(f64::INFINITY)
}

/// Runs every combination in parallel and checks both bounds on each.
pub fn bench(cfg: &BenchConfig) -> Result<BenchReport, BenchError> {
    let trees: Vec<(String, RootedTree)> = cfg
        .corpus
        .iter()
        .map(|s| Ok((s.to_string(), s.generate()?)))
        .collect::<Result<_, TreeSpecError>>()?;
    let mut jobs = Vec::new();
    for ti in 0..trees.len() {
        for &k in &cfg.ks {
            for &s in &cfg.schedulers {
                jobs.push((ti, k, s));
            }
        }
    }
    let rows: Vec<BenchRow> = jobs
        .par_iter()
        .map(|&(ti, k, sched)| run_one(cfg, &trees[ti].0, &trees[ti].1, k, sched))
        .collect::<Result<_, _>>()?;
    let worst = |f: fn(&BenchRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    Ok(BenchReport {
        worst_move_ratio: worst(|r| r.move_ratio),
        worst_sync_ratio: worst(|r| r.sync_ratio),
        rows,
    })
}

fn run_one(
    cfg: &BenchConfig,
    name: &str,
    tree: &RootedTree,
    k: u32,
    sched: SchedulerSpec,
) -> Result<BenchRow, BenchError> {
    let player = cfg.player.unwrap_or_else(|| PlayerSpec::for_k(k));
    let explore_err = |source| BenchError::Explore {
        tree: name.to_string(),
        k,
        scheduler: sched.to_string(),
        source,
    };
    let mut world = HiddenWorld::new(tree.clone(), cfg.seed);
    let acte = run_acte(player, &mut world, sched, k, false).map_err(explore_err)?;
    let mut world = HiddenWorld::new(tree.clone(), cfg.seed);
    let sync = run_cte_sync(player, &mut world, k, false).map_err(explore_err)?;

    let (n, depth) = (tree.len() as u64, tree.max_depth());
    let mb = move_bound(n, k, depth);
    let sb = sync_bound(n, k, depth);
    let fail = |what: &'static str, value: u64, bound: &BigUint, sync: bool| {
        let trace = cfg.failure_dir.as_ref().and_then(|dir| {
            let mut world = HiddenWorld::new(tree.clone(), cfg.seed);
            let run = if sync {
                run_cte_sync(player, &mut world, k, true).ok()?.acte
            } else {
                run_acte(player, &mut world, sched, k, true).ok()?
            };
            let path = dir.join(format!("fail-{}-k{k}-{sched}.json", name.replace([':', ',', '/'], "_")));
            std::fs::create_dir_all(dir).ok()?;
            std::fs::write(&path, serde_json::to_string(&run.trace?).ok()?).ok()?;
            Some(path)
        });
        BenchError::Bound {
            tree: name.to_string(),
            k,
            scheduler: sched.to_string(),
            what,
            value,
            bound: bound.to_string(),
            trace,
        }
    };
    if BigUint::from(acte.moves) > mb {
        return Err(fail("moves", acte.moves, &mb, false));
    }
    if BigUint::from(sync.rounds) > sb {
        return Err(fail("rounds", sync.rounds, &sb, true));
    }
    Ok(BenchRow {
        tree: name.to_string(),
        n,
        depth,
        k,
        player: player.to_string(),
        scheduler: sched.to_string(),
        moves: acte.moves,
        move_ratio: ratio(acte.moves, &mb),
        move_bound: mb.to_string(),
        overhead: acte.overhead(),
        target_movement: acte.target_movement,
        game_cost: acte.game_cost,
        sync_rounds: sync.rounds,
        sync_ratio: ratio(sync.rounds, &sb),
        sync_bound: sb.to_string(),
    })
}

impl BenchReport {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<(), BenchError> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            out.serialize(r).map_err(|e| BenchError::Io(e.to_string()))?;
        }
        out.flush().map_err(|e| BenchError::Io(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// What a trace file turned out to be, with the figures it was checked on.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceSummary {
    Game { k: u32, rounds: usize, final_cost: i64, max_cost: i64 },
    Exploration { k: u32, n: u64, report: TargetsReport, game_rounds: Option<usize> },
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("cannot read {0}")]
    Io(String),
    #[error("not a game or exploration trace: {0}")]
    Parse(String),
    #[error(transparent)]
    Game(#[from] TraceError),
    #[error(transparent)]
    Targets(#[from] TargetsViolation),
    #[error("a robot passed by an unexplored edge")]
    NotGreedy,
    #[error("target movement {s} exceeds the embedded game's raw cost {raw}")]
    Linkage { s: u64, raw: u64 },
}

impl VerifyError {
    /// Whether the file was readable and the trace itself is at fault.
    pub fn is_violation(&self) -> bool {
        !matches!(self, VerifyError::Io(_) | VerifyError::Parse(_))
    }
}

/// Replays a game or exploration trace and re-checks its invariants.
pub fn verify_trace(path: &Path) -> Result<TraceSummary, VerifyError> {
    let text = std::fs::read_to_string(path).map_err(|e| VerifyError::Io(format!("{}: {e}", path.display())))?;
    verify_trace_str(&text)
}

pub fn verify_trace_str(text: &str) -> Result<TraceSummary, VerifyError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| VerifyError::Parse(e.to_string()))?;
    if value.get("steps").is_some() {
        let trace: ExplorationTrace =
            serde_json::from_value(value).map_err(|e| VerifyError::Parse(e.to_string()))?;
        let report = verify_targets_inequality(&trace)?;
        if !is_locally_greedy(&trace) {
            return Err(VerifyError::NotGreedy);
        }
        let mut game_rounds = None;
        if let Some(game) = &trace.game {
            let end = game.replay()?;
            if trace.target_movement > end.raw_cost() {
                return Err(VerifyError::Linkage { s: trace.target_movement, raw: end.raw_cost() });
            }
            game_rounds = Some(game.rounds.len());
        }
        return Ok(TraceSummary::Exploration { k: trace.k, n: trace.n, report, game_rounds });
    }
    let trace: GameTrace = serde_json::from_value(value).map_err(|e| VerifyError::Parse(e.to_string()))?;
    trace.replay()?;
    Ok(TraceSummary::Game {
        k: trace.k,
        rounds: trace.rounds.len(),
        final_cost: trace.final_cost(),
        max_cost: trace.max_cost(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_have_declared_shape() {
        let t = TreeSpec::Path { n: 5 }.generate().unwrap();
        assert_eq!((t.len(), t.max_depth()), (5, 4));
        let t = TreeSpec::Binary { depth: 3 }.generate().unwrap();
        assert_eq!((t.len(), t.max_depth()), (15, 3));
        let t = TreeSpec::Spider { legs: 4, len: 6 }.generate().unwrap();
        assert_eq!((t.len(), t.max_depth()), (25, 6));
        let t = TreeSpec::Star { n: 9 }.generate().unwrap();
        assert_eq!((t.len(), t.max_depth()), (9, 1));
        let t = TreeSpec::Caterpillar { n: 9, stride: 2 }.generate().unwrap();
        // spine 0,1,2 | leaf 3 | spine 4,5 | leaf 6 | spine 7,8
        assert_eq!((t.len(), t.max_depth()), (9, 6));
    }

    #[test]
    fn random_trees_are_reproducible() {
        let s = TreeSpec::Random { n: 100, seed: 7, max_deg: 3 };
        let (a, b) = (s.generate().unwrap(), s.generate().unwrap());
        assert_eq!(a, b);
        assert_eq!(a.len(), 100);
        assert!(a.nodes().all(|v| a.children(v).len() <= 3));
    }

    #[test]
    fn selectors() {
        for s in ["path:5", "star:9", "binary:3", "caterpillar:10,3", "spider:3,4", "random:50,7,3", "file:x.json"] {
            assert_eq!(s.parse::<TreeSpec>().unwrap().to_string(), s);
        }
        assert!("path:".parse::<TreeSpec>().is_err());
        assert!("torus:3".parse::<TreeSpec>().is_err());
    }
}
