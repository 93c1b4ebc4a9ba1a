//! Asynchronous collective tree exploration driven by a tree-mining strategy.
//!
//! [`Team`] is the exploration algorithm: robots always take an unexplored edge
//! when one is offered (rule R1), otherwise move one step towards their target
//! (R2). A robot that stands on its target with nothing left to explore asks the
//! embedded tree-mining player for new targets.
//!
//! The algorithm never sees the tree: it asks an [`Environment`] whether the
//! scheduled robot's node still has an unexplored edge. [`HiddenWorld`] is the
//! usual environment, holding a fixed tree and revealing it edge by edge.

mod reduction;
mod run;
mod sched;
mod trace;
mod world;

pub use reduction::ExplorationPlayer;
pub use run::{default_step_budget, run_acte, run_competitive, run_cte_sync, run_team, ActeRun, SyncRun};
pub use sched::{Scheduler, SchedulerSpec};
pub use trace::{
    is_locally_greedy, verify_targets_inequality, ExplorationTrace, TargetsReport,
    TargetsViolation,
};
pub use world::{AnchorViolation, HiddenWorld, InfoMode};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{AdversaryMove, GameError, GameState, GameTrace};
use crate::player::{PlayerSpec, PlayerStrategy, StrategyError};
use crate::tree::{NodeId, RootedTree};

/// Answers the only question an exploring robot may ask.
pub trait Environment {
    /// A robot stands on view node `v`. Returns `true` if an unexplored edge is
    /// offered there; the robot then traverses it and the new endpoint becomes
    /// view node `child`.
    fn query(&mut self, v: NodeId, child: NodeId) -> bool;
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rule {
    R1,
    R2,
    /// No move: the robot is on a target the game no longer knows about.
    Idle,
}

/// A change of target, in view nodes.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Retarget {
    pub robot: u32,
    pub from: NodeId,
    pub to: NodeId,
}

/// One scheduled step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub robot: u32,
    pub rule: Rule,
    pub from: NodeId,
    pub to: NodeId,
    /// Whether an unexplored edge was offered at `from`.
    pub offered: bool,
    /// Node learned to be mined during this step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mined: Option<NodeId>,
    /// Game rounds played before the move (condition C).
    #[serde(default, skip_serializing_if = "is_zero")]
    pub rounds: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub retargets: Vec<Retarget>,
}

fn is_zero(x: &u32) -> bool {
    *x == 0
}

#[derive(Debug, Error)]
pub enum ExploreError {
    #[error("step {step}: tree-mining player failed: {source}")]
    Player { step: u64, source: StrategyError },
    #[error("step {step}: tree-mining response rejected: {source}")]
    Game { step: u64, source: GameError },
    #[error("step {step}: robot {robot} keeps landing on exhausted targets")]
    Retarget { step: u64, robot: u32 },
    #[error("no termination within {0} steps")]
    Budget(u64),
    #[error("robot {0} does not exist")]
    NoRobot(u32),
    #[error("anchor invariant broken: {0}")]
    Anchor(#[from] AnchorViolation),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Robot {
    pub pos: NodeId,
    /// Target as a view node.
    pub target: NodeId,
    /// Target as a node of the game board; `None` once the game is over.
    pub board: Option<NodeId>,
}

/// The TEAM exploration algorithm.
#[derive(Clone)]
pub struct Team {
    view: RootedTree,
    mined: Vec<bool>,
    robots: Vec<Robot>,
    game: GameState,
    player: Box<dyn PlayerStrategy>,
    board_to_view: Vec<NodeId>,
    steps: u64,
    moves: u64,
    explored: u64,
    s_targets: u64,
    s_refined: i64,
    record: Option<Vec<Step>>,
    game_trace: Option<GameTrace>,
}

/// Most game rounds one step may trigger before giving up.
const ROUND_CAP_PER_STEP: u32 = 1 << 16;

impl Team {
    /// `k` robots at the root, all targeting it, driven by `player` playing on
    /// `game` (whose root holds all `k` miners).
    pub fn new(k: u32, player: Box<dyn PlayerStrategy>, game: GameState) -> Self {
        assert_eq!(game.k_cur(), k, "game must start with one miner per robot");
        let root = Robot { pos: NodeId::ROOT, target: NodeId::ROOT, board: Some(NodeId::ROOT) };
        Team {
            view: RootedTree::new(),
            mined: vec![false],
            robots: vec![root; k as usize],
            game,
            player,
            board_to_view: vec![NodeId::ROOT],
            steps: 0,
            moves: 0,
            explored: 0,
            s_targets: 0,
            s_refined: 0,
            record: None,
            game_trace: None,
        }
    }

    /// TEAM with the default game and strategy for `spec`.
    pub fn with_spec(k: u32, spec: PlayerSpec) -> Self {
        Team::new(k, spec.build(k), spec.initial_state(k))
    }

    /// Keep every step for later verification.
    pub fn recording(mut self) -> Self {
        self.record = Some(Vec::new());
        self.game_trace = Some(GameTrace::new(&self.game));
        self
    }

    pub fn k(&self) -> u32 {
        self.robots.len() as u32
    }
    pub fn view(&self) -> &RootedTree {
        &self.view
    }
    pub fn robots(&self) -> &[Robot] {
        &self.robots
    }
    pub fn is_mined(&self, v: NodeId) -> bool {
        self.mined[v.index()]
    }
    pub fn game(&self) -> &GameState {
        &self.game
    }
    pub fn player(&self) -> &dyn PlayerStrategy {
        self.player.as_ref()
    }
    /// Scheduled steps, idle ones included.
    pub fn steps(&self) -> u64 {
        self.steps
    }
    /// Edge traversals `M`.
    pub fn moves(&self) -> u64 {
        self.moves
    }
    /// Edges explored so far `E`.
    pub fn explored(&self) -> u64 {
        self.explored
    }
    /// Total target movement `Σ d(v_t, v_{t+1})`.
    pub fn target_movement(&self) -> u64 {
        self.s_targets
    }
    /// Position-relative target movement `Σ d(p, v_{t+1}) - d(p, v_t)`.
    pub fn refined_movement(&self) -> i64 {
        self.s_refined
    }
    pub fn recorded(&self) -> Option<&[Step]> {
        self.record.as_deref()
    }
    /// Rounds of the embedded game, when recording.
    pub fn game_trace(&self) -> Option<&GameTrace> {
        self.game_trace.as_ref()
    }
    pub(crate) fn take_record(&mut self) -> (Option<Vec<Step>>, Option<GameTrace>) {
        (self.record.take(), self.game_trace.take())
    }

    /// Shallowest unmined node on each robot's root path.
    pub fn anchors(&self) -> Vec<Option<NodeId>> {
        self.robots
            .iter()
            .map(|r| {
                let mut anchor = None;
                for a in self.view.ancestors(r.pos) {
                    if !self.mined[a.index()] {
                        anchor = Some(a);
                    }
                }
                anchor
            })
            .collect()
    }

    /// Plays one move of robot `r`.
    pub fn step(&mut self, r: u32, env: &mut dyn Environment) -> Result<Step, ExploreError> {
        let ri = r as usize;
        if ri >= self.robots.len() {
            return Err(ExploreError::NoRobot(r));
        }
        self.steps += 1;
        let from = self.robots[ri].pos;
        let mut step = Step {
            robot: r,
            rule: Rule::R1,
            from,
            to: from,
            offered: false,
            mined: None,
            rounds: 0,
            retargets: Vec::new(),
        };
        if !self.mined[from.index()] {
            let child = NodeId(self.view.len() as u32);
            if env.query(from, child) {
                let got = self.view.add_child(from).expect("robot stands on a view node");
                debug_assert_eq!(got, child);
                self.mined.push(false);
                self.robots[ri].pos = child;
                self.moves += 1;
                self.explored += 1;
                step.offered = true;
                step.to = child;
                return Ok(self.finish(step));
            }
            self.mined[from.index()] = true;
            step.mined = Some(from);
        }
        while self.robots[ri].pos == self.robots[ri].target {
            let Some(u) = self.robots[ri].board.filter(|&u| self.game.is_active(u)) else {
                step.rule = Rule::Idle;
                return Ok(self.finish(step));
            };
            if step.rounds >= ROUND_CAP_PER_STEP {
                return Err(ExploreError::Retarget { step: self.steps, robot: r });
            }
            step.rounds += 1;
            self.condition_c(u, &mut step.retargets)?;
        }
        let target = self.robots[ri].target;
        let next = self.view.step_towards(from, target);
        self.robots[ri].pos = next;
        self.moves += 1;
        step.rule = Rule::R2;
        step.to = next;
        Ok(self.finish(step))
    }

    fn finish(&mut self, step: Step) -> Step {
        if let Some(rec) = &mut self.record {
            rec.push(step.clone());
        }
        step
    }

    fn view_of(&self, b: NodeId) -> NodeId {
        self.board_to_view[b.index()]
    }

    fn retarget(&mut self, robot: usize, board: Option<NodeId>, log: &mut Vec<Retarget>) {
        let r = &mut self.robots[robot];
        let to = board.map(|b| self.board_to_view[b.index()]).unwrap_or(r.target);
        let from = r.target;
        self.s_targets += self.view.dist(from, to);
        self.s_refined += self.view.dist(r.pos, to) as i64 - self.view.dist(r.pos, from) as i64;
        r.target = to;
        r.board = board;
        if from != to {
            log.push(Retarget { robot: robot as u32, from, to });
        }
    }

    /// The robot targeting board leaf `u` stands on it with nothing to explore:
    /// play `(u, c)` in the game and follow the player's answer.
    fn condition_c(&mut self, u: NodeId, log: &mut Vec<Retarget>) -> Result<(), ExploreError> {
        let uv = self.view_of(u);
        let du = self.view.depth(uv);
        let (mut below, mut rest): (Vec<usize>, Vec<usize>) = (0..self.robots.len())
            .filter(|&i| self.robots[i].board == Some(u))
            .partition(|&i| {
                let p = self.robots[i].pos;
                p != uv && self.view.is_ancestor(uv, p)
            });
        below.sort_unstable();
        let c = below.len() as u32;
        let adv = AdversaryMove::kill(u, c);
        let step = self.steps;
        let resp = self
            .player
            .respond(&self.game, &adv)
            .map_err(|source| ExploreError::Player { step, source })?;
        let fresh = self.game.fresh_children(c);
        self.game
            .apply_round(&adv, &resp)
            .map_err(|source| ExploreError::Game { step, source })?;
        if let Some(t) = &mut self.game_trace {
            t.push(adv, resp.clone(), &self.game);
        }

        for (&i, &b) in below.iter().zip(&fresh) {
            let branch = self.view.ancestor_at_depth(self.robots[i].pos, du + 1);
            debug_assert_eq!(b.index(), self.board_to_view.len());
            self.board_to_view.push(branch);
            self.retarget(i, Some(b), log);
        }
        // Remaining slots of the placement, filled by the robots that were not
        // exploring below `u`, nearest first.
        let mut slots: Vec<(NodeId, u32)> = resp
            .placement
            .iter()
            .map(|(b, n)| (b, n - u32::from(fresh.contains(&b))))
            .filter(|&(_, n)| n > 0)
            .collect();
        while !rest.is_empty() && !slots.is_empty() {
            let mut best = (u64::MAX, 0, 0);
            for (ri, &i) in rest.iter().enumerate() {
                for (si, &(b, _)) in slots.iter().enumerate() {
                    let d = self.view.dist(self.robots[i].pos, self.view_of(b));
                    if d < best.0 {
                        best = (d, ri, si);
                    }
                }
            }
            let (_, ri, si) = best;
            let i = rest.swap_remove(ri);
            rest.sort_unstable();
            let b = slots[si].0;
            slots[si].1 -= 1;
            if slots[si].1 == 0 {
                slots.remove(si);
            }
            self.retarget(i, Some(b), log);
        }
        // The game is over: nobody is told where to go next.
        for i in rest {
            self.retarget(i, None, log);
        }
        for m in &resp.nonlazy {
            let to = self.view_of(m.to);
            for _ in 0..m.count {
                let i = (0..self.robots.len())
                    .filter(|&i| self.robots[i].board == Some(m.from))
                    .min_by_key(|&i| (self.view.dist(self.robots[i].pos, to), i))
                    .expect("non-lazy source keeps its miners");
                self.retarget(i, Some(m.to), log);
            }
        }
        Ok(())
    }
}
