//! The tree-mining game: board state, legal moves and cost accounting.
//!
//! A round consists of one adversary move followed by the player's response.
//! The response first places the miners of the killed leaf (`placement`) and
//! then performs optional non-lazy moves between active leaves, in order.

mod run;
mod trace;

pub use run::{run_game, GameRun, RunError, StopRule};
pub use trace::{cost_at_depth, GameTrace, TraceError, TraceRound};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tree::{transport_distance, Configuration, NodeId, RootedTree, StructurePair};

/// Rule set of a game.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Fixed number of miners, lazy responses only.
    Plain,
    /// The adversary may add miners and the player may move miners between leaves.
    Extended,
    /// Extended rules with a depth horizon: leaves at that depth carry one miner and
    /// the game ends once every active leaf has reached it.
    Horizon(u32),
}

impl Mode {
    pub fn tag(self) -> &'static str {
        match self {
            Mode::Plain => "plain",
            Mode::Extended => "extended",
            Mode::Horizon(_) => "horizon",
        }
    }

    pub fn horizon(self) -> Option<u32> {
        match self {
            Mode::Horizon(h) => Some(h),
            _ => None,
        }
    }

    pub fn from_tag(tag: &str, horizon: Option<u32>) -> Option<Mode> {
        match (tag, horizon) {
            ("plain", None) => Some(Mode::Plain),
            ("extended", None) => Some(Mode::Extended),
            ("horizon", Some(h)) => Some(Mode::Horizon(h)),
            _ => None,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AdversaryMove {
    Kill { leaf: NodeId, children: u32 },
    AddMiner,
    Finish,
}

impl AdversaryMove {
    pub fn kill(leaf: NodeId, children: u32) -> Self {
        AdversaryMove::Kill { leaf, children }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NonLazyMove {
    pub from: NodeId,
    pub to: NodeId,
    pub count: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerResponse {
    pub placement: Configuration,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nonlazy: Vec<NonLazyMove>,
}

impl PlayerResponse {
    pub fn place(placement: Configuration) -> Self {
        PlayerResponse { placement, nonlazy: Vec::new() }
    }

    pub fn empty() -> Self {
        Self::default()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("the game is already finished")]
    Finished,
    #[error("illegal adversary move {0:?}: {1}")]
    IllegalMove(AdversaryMove, String),
    #[error("invalid player response: {0}")]
    InvalidResponse(String),
}

/// Cost increments produced by one round.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct RoundDelta {
    pub cost: i64,
    pub raw: u64,
    pub created: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameState {
    tree: RootedTree,
    config: Configuration,
    mode: Mode,
    round: u64,
    cost: i64,
    raw_cost: u64,
    edges_created: u64,
    k_cur: u32,
    k_max: u32,
    finished: bool,
}

impl GameState {
    /// `initial` miners at the root of a fresh board.
    pub fn new(mode: Mode, initial: u32, k_max: u32) -> Self {
        assert!(initial >= 1 && initial <= k_max, "need 1 <= initial <= k_max");
        GameState {
            tree: RootedTree::new(),
            config: Configuration::single(NodeId::ROOT, initial),
            mode,
            round: 0,
            cost: 0,
            raw_cost: 0,
            edges_created: 0,
            k_cur: initial,
            k_max,
            finished: matches!(mode, Mode::Horizon(0)),
        }
    }

    pub fn plain(k: u32) -> Self {
        Self::new(Mode::Plain, k, k)
    }

    pub fn extended(initial: u32, k_max: u32) -> Self {
        Self::new(Mode::Extended, initial, k_max)
    }

    pub fn horizon(initial: u32, k_max: u32, delta: u32) -> Self {
        Self::new(Mode::Horizon(delta), initial, k_max)
    }

    pub fn tree(&self) -> &RootedTree {
        &self.tree
    }
    pub fn config(&self) -> &Configuration {
        &self.config
    }
    pub fn mode(&self) -> Mode {
        self.mode
    }
    pub fn round(&self) -> u64 {
        self.round
    }
    pub fn cost(&self) -> i64 {
        self.cost
    }
    pub fn raw_cost(&self) -> u64 {
        self.raw_cost
    }
    pub fn edges_created(&self) -> u64 {
        self.edges_created
    }
    pub fn k_cur(&self) -> u32 {
        self.k_cur
    }
    pub fn k_max(&self) -> u32 {
        self.k_max
    }
    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn load(&self, v: NodeId) -> u32 {
        self.config.get(v)
    }

    pub fn is_active(&self, v: NodeId) -> bool {
        self.config.contains(v)
    }

    pub fn active_leaves(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.config.support()
    }

    pub fn num_active(&self) -> usize {
        self.config.len()
    }

    /// Depth of the shallowest active leaf, `None` once the board is empty.
    pub fn min_depth(&self) -> Option<u32> {
        self.config.support().map(|v| self.tree.depth(v)).min()
    }

    pub fn structure(&self) -> Option<StructurePair> {
        crate::tree::structure_of(&self.tree, self.config.support()).ok()
    }

    /// Ids that a kill with `c` children would assign to the new leaves.
    pub fn fresh_children(&self, c: u32) -> Vec<NodeId> {
        let base = self.tree.len() as u32;
        (base..base + c).map(NodeId).collect()
    }

    fn at_horizon(&self, v: NodeId) -> bool {
        matches!(self.mode, Mode::Horizon(h) if self.tree.depth(v) >= h)
    }

    /// Kill moves the adversary may choose from at this point, in leaf order.
    ///
    /// Horizon leaves are not offered. [`apply_round`](Self::apply_round) still
    /// accepts a childless kill on them, which is how nested games learn that an
    /// enclosing game removed one of their horizon leaves.
    pub fn legal_adversary_moves(&self) -> Vec<AdversaryMove> {
        if self.finished {
            return Vec::new();
        }
        let mut out = Vec::new();
        for (v, x) in self.config.iter() {
            if self.at_horizon(v) {
                continue;
            }
            for c in 0..x {
                out.push(AdversaryMove::kill(v, c));
            }
        }
        if self.can_add_miner() {
            out.push(AdversaryMove::AddMiner);
        }
        out
    }

    pub fn can_add_miner(&self) -> bool {
        !self.finished && self.mode != Mode::Plain && self.k_cur < self.k_max
    }

    /// Checks that `adv` may be played now. `Finish` is always accepted on an
    /// unfinished board; drivers expand it into childless kills.
    pub fn check_move(&self, adv: &AdversaryMove) -> Result<(), GameError> {
        if self.finished {
            return Err(GameError::Finished);
        }
        let bad = |why: &str| Err(GameError::IllegalMove(*adv, why.to_string()));
        match *adv {
            AdversaryMove::Kill { leaf, children } => {
                let x = self.config.get(leaf);
                if x == 0 {
                    return bad("leaf is not active");
                }
                if children > x - 1 {
                    return bad("more children than miners minus one");
                }
                if self.at_horizon(leaf) && children > 0 {
                    return bad("horizon leaves cannot grow");
                }
                Ok(())
            }
            AdversaryMove::AddMiner => {
                if self.mode == Mode::Plain {
                    bad("miners can only be added in the extended game")
                } else if self.k_cur >= self.k_max {
                    bad("miner capacity reached")
                } else {
                    Ok(())
                }
            }
            AdversaryMove::Finish => Ok(()),
        }
    }

    /// Plays one round. On error the state is left untouched.
    pub fn apply_round(
        &mut self,
        adv: &AdversaryMove,
        resp: &PlayerResponse,
    ) -> Result<RoundDelta, GameError> {
        self.check_move(adv)?;
        fn invalid<T>(msg: String) -> Result<T, GameError> {
            Err(GameError::InvalidResponse(msg))
        }
        match *adv {
            AdversaryMove::Finish => Err(GameError::IllegalMove(
                *adv,
                "finish must be expanded into childless kills".into(),
            )),
            AdversaryMove::AddMiner => {
                let entries: Vec<_> = resp.placement.iter().collect();
                if entries.len() != 1 || entries[0].1 != 1 {
                    return invalid("a new miner must be placed on exactly one leaf".into());
                }
                let v = entries[0].0;
                if !self.config.contains(v) {
                    return invalid(format!("new miner placed on inactive node {v}"));
                }
                let mut next = self.config.clone();
                next.add(v, 1);
                let moved = self.simulate_nonlazy(&mut next, &resp.nonlazy)?;
                self.check_horizon(&next)?;
                self.config = next;
                self.k_cur += 1;
                self.commit(moved as i64, moved, 0);
                Ok(RoundDelta { cost: moved as i64, raw: moved, created: 0 })
            }
            AdversaryMove::Kill { leaf, children } => {
                let x = self.config.get(leaf);
                let base = self.tree.len();
                for _ in 0..children {
                    self.tree.add_child(leaf).expect("leaf is valid");
                }
                let fresh = |v: NodeId| v.index() >= base;
                let result = (|| {
                    let mut next = self.config.clone();
                    next.take(leaf);
                    if next.is_empty() && children == 0 {
                        if !resp.placement.is_empty() || !resp.nonlazy.is_empty() {
                            return invalid("the last leaf died; nothing to place".into());
                        }
                        return Ok((next, 0u64));
                    }
                    if resp.placement.total() != x as u64 {
                        return invalid(format!(
                            "placement moves {} miners, the killed leaf held {x}",
                            resp.placement.total()
                        ));
                    }
                    for (v, _) in resp.placement.iter() {
                        if !(fresh(v) && self.tree.contains(v)) && !next.contains(v) {
                            return invalid(format!("placement on node {v} which is not active"));
                        }
                    }
                    for i in 0..children {
                        let v = NodeId(base as u32 + i);
                        if resp.placement.get(v) == 0 {
                            return invalid(format!("new child {v} received no miner"));
                        }
                    }
                    let mut before = self.config.clone();
                    for (v, n) in resp.placement.iter() {
                        next.add(v, n);
                    }
                    let moved = transport_distance(&self.tree, &before, &next)
                        .map_err(|e| GameError::InvalidResponse(e.to_string()))?;
                    before = next;
                    let extra = self.simulate_nonlazy(&mut before, &resp.nonlazy)?;
                    self.check_horizon(&before)?;
                    Ok((before, moved + extra))
                })();
                match result {
                    Ok((next, raw)) => {
                        self.config = next;
                        self.edges_created += children as u64;
                        let cost = raw as i64 - 2 * children as i64;
                        self.commit(cost, raw, children);
                        Ok(RoundDelta { cost, raw, created: children })
                    }
                    Err(e) => {
                        self.tree.truncate(base);
                        Err(e)
                    }
                }
            }
        }
    }

    /// Extra non-lazy moves attached to the round just played. Strategies that
    /// keep a mirror of the board use this to append moves decided after the
    /// placement; the cost is the same as if they were part of the response.
    pub fn apply_nonlazy(&mut self, moves: &[NonLazyMove]) -> Result<u64, GameError> {
        if moves.is_empty() {
            return Ok(0);
        }
        let mut next = self.config.clone();
        let moved = self.simulate_nonlazy(&mut next, moves)?;
        self.check_horizon(&next)?;
        self.config = next;
        self.cost += moved as i64;
        self.raw_cost += moved;
        self.refresh_finished();
        Ok(moved)
    }

    fn simulate_nonlazy(
        &self,
        config: &mut Configuration,
        moves: &[NonLazyMove],
    ) -> Result<u64, GameError> {
        if self.mode == Mode::Plain && !moves.is_empty() {
            return Err(GameError::InvalidResponse(
                "non-lazy moves are not allowed in the plain game".into(),
            ));
        }
        let mut total = 0u64;
        for m in moves {
            if m.count == 0 || m.from == m.to {
                return Err(GameError::InvalidResponse(format!("degenerate non-lazy move {m:?}")));
            }
            if !config.contains(m.to) {
                return Err(GameError::InvalidResponse(format!(
                    "non-lazy move to inactive node {}",
                    m.to
                )));
            }
            if config.get(m.from) <= m.count {
                return Err(GameError::InvalidResponse(format!(
                    "non-lazy move {m:?} would empty its source leaf"
                )));
            }
            config.remove(m.from, m.count);
            config.add(m.to, m.count);
            total += m.count as u64 * self.tree.dist(m.from, m.to);
        }
        Ok(total)
    }

    fn check_horizon(&self, config: &Configuration) -> Result<(), GameError> {
        let Mode::Horizon(h) = self.mode else { return Ok(()) };
        let depth = |v: NodeId| self.tree.depth(v);
        let open = config.support().any(|v| depth(v) < h);
        if !open {
            return Ok(());
        }
        if let Some((v, n)) = config.iter().find(|&(v, n)| depth(v) >= h && n > 1) {
            return Err(GameError::InvalidResponse(format!(
                "{n} miners on horizon leaf {v} while the game goes on"
            )));
        }
        Ok(())
    }

    fn commit(&mut self, cost: i64, raw: u64, _created: u32) {
        self.round += 1;
        self.cost += cost;
        self.raw_cost += raw;
        self.refresh_finished();
    }

    fn refresh_finished(&mut self) {
        self.finished = match self.mode {
            Mode::Horizon(h) => self.config.support().all(|v| self.tree.depth(v) >= h),
            _ => self.config.is_empty(),
        };
    }

    /// Next childless kill used to realise `Finish`, or `None` once over.
    pub fn finish_step(&self) -> Option<AdversaryMove> {
        if self.finished {
            return None;
        }
        self.config
            .support()
            .find(|&v| !self.at_horizon(v))
            .map(|v| AdversaryMove::kill(v, 0))
    }
}
