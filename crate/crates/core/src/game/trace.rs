use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{AdversaryMove, GameError, GameState, Mode, PlayerResponse};

/// One played round together with the observable outcome after it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRound {
    pub adv: AdversaryMove,
    pub resp: PlayerResponse,
    pub cost: i64,
    pub min_depth: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameTrace {
    pub k: u32,
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u32>,
    /// Miners on the root before the first round; defaults to `k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<u32>,
    pub rounds: Vec<TraceRound>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TraceError {
    #[error("unknown game mode {0:?}")]
    BadMode(String),
    #[error("round {round}: {source}")]
    Game { round: usize, source: GameError },
    #[error("round {round}: discount identity violated (recorded cost {recorded}, replay gives {replayed})")]
    Cost { round: usize, recorded: i64, replayed: i64 },
    #[error("round {round}: raw cost recorded as {recorded}, replay gives {replayed}")]
    Raw { round: usize, recorded: u64, replayed: u64 },
    #[error("round {round}: minimum depth recorded as {recorded:?}, replay gives {replayed:?}")]
    Depth { round: usize, recorded: Option<u32>, replayed: Option<u32> },
}

impl GameTrace {
    pub fn new(initial: &GameState) -> Self {
        let mode = initial.mode();
        GameTrace {
            k: initial.k_max(),
            mode: mode.tag().to_string(),
            horizon: mode.horizon(),
            initial: (initial.k_cur() != initial.k_max()).then_some(initial.k_cur()),
            rounds: Vec::new(),
        }
    }

    pub fn initial_state(&self) -> Result<GameState, TraceError> {
        let mode = Mode::from_tag(&self.mode, self.horizon)
            .ok_or_else(|| TraceError::BadMode(self.mode.clone()))?;
        let initial = self.initial.unwrap_or(self.k);
        if initial == 0 || initial > self.k {
            return Err(TraceError::BadMode(format!("{} with {initial} initial miners", self.mode)));
        }
        Ok(GameState::new(mode, initial, self.k))
    }

    pub fn push(&mut self, adv: AdversaryMove, resp: PlayerResponse, state: &GameState) {
        self.rounds.push(TraceRound {
            adv,
            resp,
            cost: state.cost(),
            min_depth: state.min_depth(),
            raw: Some(state.raw_cost()),
        });
    }

    /// Replays every round from scratch and checks the recorded observations.
    pub fn replay(&self) -> Result<GameState, TraceError> {
        let mut state = self.initial_state()?;
        for (round, r) in self.rounds.iter().enumerate() {
            state
                .apply_round(&r.adv, &r.resp)
                .map_err(|source| TraceError::Game { round, source })?;
            let identity = state.raw_cost() as i64 - 2 * state.edges_created() as i64;
            if r.cost != state.cost() || identity != state.cost() {
                return Err(TraceError::Cost { round, recorded: r.cost, replayed: state.cost() });
            }
            if let Some(raw) = r.raw {
                if raw != state.raw_cost() {
                    return Err(TraceError::Raw { round, recorded: raw, replayed: state.raw_cost() });
                }
            }
            if r.min_depth != state.min_depth() {
                return Err(TraceError::Depth {
                    round,
                    recorded: r.min_depth,
                    replayed: state.min_depth(),
                });
            }
        }
        Ok(state)
    }

    pub fn final_cost(&self) -> i64 {
        self.rounds.last().map_or(0, |r| r.cost)
    }

    /// Maximum cost over all rounds, including the initial zero.
    pub fn max_cost(&self) -> i64 {
        self.rounds.iter().map(|r| r.cost).max().unwrap_or(0).max(0)
    }

    pub fn adversary_script(&self) -> Vec<AdversaryMove> {
        self.rounds.iter().map(|r| r.adv).collect()
    }
}

/// Largest cost reached while some miner was still at depth `<= depth`.
pub fn cost_at_depth(trace: &GameTrace, depth: u32) -> i64 {
    trace
        .rounds
        .iter()
        .filter(|r| r.min_depth.is_some_and(|m| m <= depth))
        .map(|r| r.cost)
        .fold(0, i64::max)
}
