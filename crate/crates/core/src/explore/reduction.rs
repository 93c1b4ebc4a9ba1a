use super::{Environment, Rule, Team};
use crate::game::{AdversaryMove, GameState, PlayerResponse};
use crate::player::{PlayerSpec, PlayerStrategy, StrategyError};
use crate::tree::{Configuration, NodeId};

/// A tree-mining player obtained by letting an exploration team explore the
/// game board itself.
///
/// The board is the tree being explored and every robot stands on an active
/// leaf. When the adversary kills `ℓ` with `c` children, the robots on `ℓ` are
/// scheduled in turn; the first `c` queries at `ℓ` reveal the new children and
/// later ones find nothing. Each robot keeps moving until it stands on an
/// active leaf of the new board, and the resulting positions are the answer.
///
/// Only the plain game is supported.
#[derive(Clone)]
pub struct ExplorationPlayer {
    team: Team,
    board: BoardEnv,
    max_moves_per_round: u64,
    round_moves: Vec<u64>,
}

/// Children the adversary granted to each killed node; `None` while active.
#[derive(Clone, Debug, Default)]
struct BoardEnv {
    grants: Vec<Option<u32>>,
    fresh: Vec<NodeId>,
}

impl Environment for BoardEnv {
    fn query(&mut self, v: NodeId, child: NodeId) -> bool {
        let left = self.grants[v.index()].as_mut().expect("robots only query killed nodes");
        if *left == 0 {
            return false;
        }
        *left -= 1;
        debug_assert_eq!(Some(&child), self.fresh.first());
        self.fresh.remove(0);
        self.grants.push(None);
        true
    }
}

impl ExplorationPlayer {
    pub fn new(team: Team) -> Self {
        ExplorationPlayer {
            team,
            board: BoardEnv { grants: vec![None], fresh: Vec::new() },
            max_moves_per_round: 1 << 20,
            round_moves: Vec::new(),
        }
    }

    /// TEAM with `k` robots following `spec`.
    pub fn team(k: u32, spec: PlayerSpec) -> Self {
        Self::new(Team::with_spec(k, spec))
    }

    pub fn with_move_cap(mut self, cap: u64) -> Self {
        self.max_moves_per_round = cap;
        self
    }

    /// Robot moves spent on each game round so far.
    pub fn round_moves(&self) -> &[u64] {
        &self.round_moves
    }

    pub fn exploring_team(&self) -> &Team {
        &self.team
    }
}

impl PlayerStrategy for ExplorationPlayer {
    fn name(&self) -> String {
        format!("explore({})", self.team.player().name())
    }

    fn respond(
        &mut self,
        state: &GameState,
        adv: &AdversaryMove,
    ) -> Result<PlayerResponse, StrategyError> {
        let AdversaryMove::Kill { leaf, children } = *adv else {
            return Err(StrategyError::Unsupported(format!(
                "{adv:?}: only kills exist in the plain game"
            )));
        };
        let robots = self.team.robots();
        let mut here: Vec<u32> =
            (0..robots.len() as u32).filter(|&r| robots[r as usize].pos == leaf).collect();
        if here.len() as u32 != state.load(leaf) || self.board.grants.len() != state.tree().len() {
            return Err(StrategyError::Inconsistent(format!(
                "{} robots on {leaf}, board has {}",
                here.len(),
                state.load(leaf)
            )));
        }
        if state.num_active() == 1 && children == 0 {
            // Last leaf gone: the board is fully explored.
            self.round_moves.push(0);
            return Ok(PlayerResponse::empty());
        }
        let movers = here.clone();
        self.board.grants[leaf.index()] = Some(children);
        self.board.fresh = state.fresh_children(children);
        let fresh = self.board.fresh.clone();
        let settled = |v: NodeId| v != leaf && (fresh.contains(&v) || state.is_active(v));

        let before = self.team.moves();
        let mut turn = 0;
        while !here.is_empty() {
            if self.team.moves() - before > self.max_moves_per_round {
                return Err(StrategyError::EmulationCap(self.max_moves_per_round));
            }
            turn %= here.len();
            let r = here[turn];
            let step = self
                .team
                .step(r, &mut self.board)
                .map_err(|e| StrategyError::Inconsistent(e.to_string()))?;
            if step.rule == Rule::Idle {
                return Err(StrategyError::Inconsistent(format!(
                    "robot {r} stopped at {} before reaching an active leaf",
                    step.to
                )));
            }
            if settled(step.to) {
                here.remove(turn);
            } else {
                turn += 1;
            }
        }
        self.round_moves.push(self.team.moves() - before);
        let mut placement = Configuration::new();
        for &r in &movers {
            placement.add(self.team.robots()[r as usize].pos, 1);
        }
        Ok(PlayerResponse::place(placement))
    }

    fn clone_box(&self) -> Box<dyn PlayerStrategy> {
        Box::new(self.clone())
    }
}
