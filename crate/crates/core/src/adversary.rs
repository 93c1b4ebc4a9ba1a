//! Adversary strategies: the lower-bound adversary, seeded random stress
//! adversaries, scripted replays, and an exhaustive worst-case search.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::game::{AdversaryMove, GameState, GameTrace};
use crate::player::PlayerStrategy;
use crate::tree::NodeId;

/// Chooses the next leaf to kill. Illegal moves are caught by the engine.
pub trait AdversaryStrategy: Send {
    fn name(&self) -> String;

    fn next(&mut self, state: &GameState) -> AdversaryMove;

    fn clone_box(&self) -> Box<dyn AdversaryStrategy>;
}

impl Clone for Box<dyn AdversaryStrategy> {
    fn clone(&self) -> Self {
        self.clone_box()
    }
}

impl<A: AdversaryStrategy + ?Sized> AdversaryStrategy for Box<A> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn next(&mut self, state: &GameState) -> AdversaryMove {
        (**self).next(state)
    }
    fn clone_box(&self) -> Box<dyn AdversaryStrategy> {
        (**self).clone_box()
    }
}

/// Phases of "split into `k - 1`, then kill the fullest leaf until one is
/// left", one level deeper each time, until depth `D` is reached.
#[derive(Clone, Debug)]
pub struct LowerBound {
    k: u32,
    depth: u32,
}

impl LowerBound {
    pub fn new(k: u32, depth: u32) -> Self {
        assert!(k >= 2, "the lower-bound adversary needs k >= 2");
        LowerBound { k, depth }
    }
}

impl AdversaryStrategy for LowerBound {
    fn name(&self) -> String {
        format!("lower-bound(k={},D={})", self.k, self.depth)
    }

    fn next(&mut self, state: &GameState) -> AdversaryMove {
        let tree = state.tree();
        if state.num_active() == 1 {
            let leaf = state.active_leaves().next().expect("one leaf");
            let x = state.load(leaf);
            if tree.depth(leaf) >= self.depth || x < 2 {
                return AdversaryMove::Finish;
            }
            return AdversaryMove::kill(leaf, (self.k - 1).min(x - 1));
        }
        let (leaf, _) = state
            .config()
            .iter()
            .max_by_key(|&(v, x)| (x, std::cmp::Reverse(v)))
            .expect("nonempty board");
        AdversaryMove::kill(leaf, 0)
    }

    fn clone_box(&self) -> Box<dyn AdversaryStrategy> {
        Box::new(self.clone())
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct RandomParams {
    pub seed: u64,
    /// Probability of picking among the deepest killable leaves.
    pub p_kill_deep: f64,
    pub max_children: u32,
    /// Leaves at this depth are only killed with no children.
    pub depth_cap: u32,
    /// Probability of `AddMiner` while the extended game allows it.
    pub p_add: f64,
    /// Never kill the last active leaf without children above the depth cap.
    pub persist: bool,
}

impl RandomParams {
    pub fn new(seed: u64) -> Self {
        RandomParams { seed, p_kill_deep: 0.5, max_children: 3, depth_cap: 16, p_add: 0.05, persist: false }
    }
}

#[derive(Clone, Debug)]
pub struct RandomAdversary {
    params: RandomParams,
    rng: ChaCha8Rng,
}

impl RandomAdversary {
    pub fn new(params: RandomParams) -> Self {
        assert!(params.max_children >= 1);
        RandomAdversary { params, rng: ChaCha8Rng::seed_from_u64(params.seed) }
    }
}

impl AdversaryStrategy for RandomAdversary {
    fn name(&self) -> String {
        let p = &self.params;
        format!(
            "random(seed={},deep={},c={},cap={})",
            p.seed, p.p_kill_deep, p.max_children, p.depth_cap
        )
    }

    fn next(&mut self, state: &GameState) -> AdversaryMove {
        if state.can_add_miner() && self.rng.gen_bool(self.params.p_add) {
            return AdversaryMove::AddMiner;
        }
        let tree = state.tree();
        let killable: Vec<NodeId> = state
            .legal_adversary_moves()
            .into_iter()
            .filter_map(|m| match m {
                AdversaryMove::Kill { leaf, children: 0 } => Some(leaf),
                _ => None,
            })
            .collect();
        if killable.is_empty() {
            return AdversaryMove::Finish;
        }
        let pool: Vec<NodeId> = if self.rng.gen_bool(self.params.p_kill_deep) {
            let deepest = killable.iter().map(|&v| tree.depth(v)).max().unwrap();
            killable.iter().copied().filter(|&v| tree.depth(v) == deepest).collect()
        } else {
            killable
        };
        let leaf = pool[self.rng.gen_range(0..pool.len())];
        let top = if tree.depth(leaf) >= self.params.depth_cap {
            0
        } else {
            (state.load(leaf) - 1).min(self.params.max_children)
        };
        let low = u32::from(self.params.persist && top > 0 && state.num_active() == 1);
        AdversaryMove::kill(leaf, self.rng.gen_range(low..=top))
    }

    fn clone_box(&self) -> Box<dyn AdversaryStrategy> {
        Box::new(self.clone())
    }
}

/// Plays a fixed script, then `Finish`.
#[derive(Clone, Debug, Default)]
pub struct Replay {
    script: Vec<AdversaryMove>,
    pos: usize,
}

impl Replay {
    pub fn new(script: Vec<AdversaryMove>) -> Self {
        Replay { script, pos: 0 }
    }

    pub fn from_trace(trace: &GameTrace) -> Self {
        Replay::new(trace.adversary_script())
    }
}

impl AdversaryStrategy for Replay {
    fn name(&self) -> String {
        format!("replay({} moves)", self.script.len())
    }

    fn next(&mut self, _state: &GameState) -> AdversaryMove {
        let m = self.script.get(self.pos).copied().unwrap_or(AdversaryMove::Finish);
        self.pos += 1;
        m
    }

    fn clone_box(&self) -> Box<dyn AdversaryStrategy> {
        Box::new(self.clone())
    }
}

/// One-step lookahead: plays the move that makes the player move most right
/// now, preferring moves that create more leaves while above the depth cap.
pub struct Greedy {
    player: Box<dyn PlayerStrategy>,
    depth_cap: u32,
}

impl Greedy {
    /// `player` must be a fresh copy of the strategy being attacked; it is kept
    /// in sync by replaying every move the greedy adversary makes.
    pub fn new(player: Box<dyn PlayerStrategy>, depth_cap: u32) -> Self {
        Greedy { player, depth_cap }
    }
}

impl AdversaryStrategy for Greedy {
    fn name(&self) -> String {
        format!("greedy(cap={})", self.depth_cap)
    }

    fn next(&mut self, state: &GameState) -> AdversaryMove {
        let tree = state.tree();
        let mut best: Option<(i64, AdversaryMove, Box<dyn PlayerStrategy>)> = None;
        for m in state.legal_adversary_moves() {
            if let AdversaryMove::Kill { leaf, children } = m {
                if children > 0 && tree.depth(leaf) >= self.depth_cap {
                    continue;
                }
            }
            let mut p = self.player.clone_box();
            let mut s = state.clone();
            let Ok(r) = p.respond(&s, &m) else { continue };
            if s.apply_round(&m, &r).is_err() {
                continue;
            }
            let children = match m {
                AdversaryMove::Kill { children, .. } => children as i64,
                _ => 0,
            };
            let gain = (s.raw_cost() - state.raw_cost()) as i64 * 64 + children;
            if best.as_ref().is_none_or(|b| gain > b.0) {
                best = Some((gain, m, p));
            }
        }
        match best {
            Some((_, m, p)) => {
                self.player = p;
                m
            }
            None => AdversaryMove::Finish,
        }
    }

    fn clone_box(&self) -> Box<dyn AdversaryStrategy> {
        Box::new(Greedy { player: self.player.clone_box(), depth_cap: self.depth_cap })
    }
}

/// Textual adversary selector: `lower-bound`, `random@seed=S,deep=P,c=C,cap=H`,
/// `replay@file=PATH`. Random keys also include `add=P` and `persist=1`.
#[derive(Clone, Debug, PartialEq)]
pub enum AdversarySpec {
    LowerBound,
    Random(RandomParams),
    Replay(PathBuf),
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("{0}")]
    Parse(String),
    #[error("cannot load script {path}: {msg}")]
    Script { path: PathBuf, msg: String },
}

impl AdversarySpec {
    /// `k` and `depth` parametrise the lower-bound adversary.
    pub fn build(&self, k: u32, depth: u32) -> Result<Box<dyn AdversaryStrategy>, SpecError> {
        Ok(match self {
            AdversarySpec::LowerBound => Box::new(LowerBound::new(k.max(2), depth)),
            AdversarySpec::Random(p) => Box::new(RandomAdversary::new(*p)),
            AdversarySpec::Replay(path) => {
                let err = |msg: String| SpecError::Script { path: path.clone(), msg };
                let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
                let script = match serde_json::from_str::<GameTrace>(&text) {
                    Ok(t) => t.adversary_script(),
                    Err(_) => serde_json::from_str::<Vec<AdversaryMove>>(&text)
                        .map_err(|e| err(e.to_string()))?,
                };
                Box::new(Replay::new(script))
            }
        })
    }
}

impl fmt::Display for AdversarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdversarySpec::LowerBound => f.write_str("lower-bound"),
            AdversarySpec::Random(p) => {
                write!(
                    f,
                    "random@seed={},deep={},c={},cap={}",
                    p.seed, p.p_kill_deep, p.max_children, p.depth_cap
                )?;
                if p.persist {
                    f.write_str(",persist=1")?;
                }
                Ok(())
            }
            AdversarySpec::Replay(path) => write!(f, "replay@file={}", path.display()),
        }
    }
}

impl FromStr for AdversarySpec {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, SpecError> {
        let bad = |what: &str| SpecError::Parse(format!("{what} in adversary {s:?}"));
        if s == "lower-bound" {
            return Ok(AdversarySpec::LowerBound);
        }
        if let Some(path) = s.strip_prefix("replay@file=") {
            return Ok(AdversarySpec::Replay(PathBuf::from(path)));
        }
        let args = match s.strip_prefix("random") {
            Some("") => "",
            Some(rest) => rest.strip_prefix('@').ok_or_else(|| bad("unknown adversary"))?,
            None => return Err(bad("unknown adversary")),
        };
        let mut p = RandomParams::new(0);
        for kv in args.split(',').filter(|kv| !kv.is_empty()) {
            let (key, value) = kv.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            match key {
                "seed" => p.seed = value.parse().map_err(|_| bad("bad seed"))?,
                "deep" => p.p_kill_deep = value.parse().map_err(|_| bad("bad probability"))?,
                "c" => p.max_children = value.parse().map_err(|_| bad("bad child count"))?,
                "cap" => p.depth_cap = value.parse().map_err(|_| bad("bad depth cap"))?,
                "add" => p.p_add = value.parse().map_err(|_| bad("bad probability"))?,
                "persist" => p.persist = value == "1" || value == "true",
                _ => return Err(bad(&format!("unknown key {key:?}"))),
            }
        }
        if !(0.0..=1.0).contains(&p.p_kill_deep) || !(0.0..=1.0).contains(&p.p_add) {
            return Err(bad("probability out of range"));
        }
        if p.max_children == 0 {
            return Err(bad("c must be at least 1"));
        }
        Ok(AdversarySpec::Random(p))
    }
}

/// Outcome of [`exhaustive_worst`].
#[derive(Clone, Debug)]
pub struct WorstCase {
    /// Largest cost reached while some miner is at depth `<= D`.
    pub cost: i64,
    pub script: Vec<AdversaryMove>,
    /// Game positions visited.
    pub nodes: u64,
    /// Whether the node budget cut the search short.
    pub truncated: bool,
}

/// Searches every adversary move sequence against `player` on a board where no
/// leaf is created below `depth_cap` and at most `round_cap` rounds are played.
///
/// The player is cloned at each branch, so stateful strategies are handled.
pub fn exhaustive_worst(
    player: &dyn PlayerStrategy,
    state: &GameState,
    depth: u32,
    depth_cap: u32,
    round_cap: u64,
    node_budget: u64,
) -> WorstCase {
    struct Search {
        depth: u32,
        depth_cap: u32,
        round_cap: u64,
        budget: u64,
        nodes: u64,
        best: i64,
        best_script: Vec<AdversaryMove>,
        script: Vec<AdversaryMove>,
    }
    impl Search {
        fn go(&mut self, player: &dyn PlayerStrategy, state: &GameState, running: i64) {
            self.nodes += 1;
            if running > self.best {
                self.best = running;
                self.best_script = self.script.clone();
            }
            if state.is_finished() || state.round() >= self.round_cap || self.nodes >= self.budget {
                return;
            }
            if state.min_depth().is_some_and(|m| m > self.depth) {
                return;
            }
            let tree = state.tree();
            for m in state.legal_adversary_moves() {
                if let AdversaryMove::Kill { leaf, children } = m {
                    if children > 0 && tree.depth(leaf) >= self.depth_cap {
                        continue;
                    }
                }
                let mut p = player.clone_box();
                let mut s = state.clone();
                // A player that cannot answer a move is a bug elsewhere; it is
                // surfaced by the engine tests, the search just skips it.
                let Ok(r) = p.respond(&s, &m) else { continue };
                if s.apply_round(&m, &r).is_err() {
                    continue;
                }
                let next = if s.min_depth().is_some_and(|d| d <= self.depth) {
                    running.max(s.cost())
                } else {
                    running
                };
                self.script.push(m);
                self.go(p.as_ref(), &s, next);
                self.script.pop();
            }
        }
    }
    let mut search = Search {
        depth,
        depth_cap,
        round_cap,
        budget: node_budget,
        nodes: 0,
        best: state.cost().max(0),
        best_script: Vec::new(),
        script: Vec::new(),
    };
    search.go(player, state, state.cost().max(0));
    WorstCase {
        cost: search.best,
        script: search.best_script,
        truncated: search.nodes >= node_budget,
        nodes: search.nodes,
    }
}
