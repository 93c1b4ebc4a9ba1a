use thiserror::Error;

use super::{AdversaryMove, GameError, GameState, GameTrace};
use crate::adversary::AdversaryStrategy;
use crate::player::{PlayerStrategy, StrategyError};

/// When to stop an otherwise unbounded game.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct StopRule {
    pub max_rounds: u64,
    /// Stop once every active leaf lies strictly below this depth.
    pub target_depth: Option<u32>,
}

impl StopRule {
    pub fn rounds(max_rounds: u64) -> Self {
        StopRule { max_rounds, target_depth: None }
    }

    /// Depth target with the default round cap `10·k·depth + 1000`.
    pub fn depth(k: u32, depth: u32) -> Self {
        StopRule {
            max_rounds: 10 * k as u64 * depth as u64 + 1000,
            target_depth: Some(depth),
        }
    }

    fn reached(&self, state: &GameState) -> bool {
        if state.is_finished() || state.round() >= self.max_rounds {
            return true;
        }
        match (self.target_depth, state.min_depth()) {
            (Some(t), Some(m)) => m > t,
            _ => false,
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("round {round}: adversary: {source}")]
    Adversary { round: u64, source: GameError },
    #[error("round {round}: player: {source}")]
    Player { round: u64, source: StrategyError },
    #[error("round {round}: response rejected: {source}")]
    Response { round: u64, source: GameError },
}

#[derive(Clone, Debug)]
pub struct GameRun {
    pub trace: GameTrace,
    pub state: GameState,
}

/// Alternates adversary and player moves on `state` until `stop` fires.
///
/// `Finish` is played out as successive childless kills of the first killable
/// leaf, each answered by the player.
pub fn run_game(
    player: &mut dyn PlayerStrategy,
    adversary: &mut dyn AdversaryStrategy,
    mut state: GameState,
    stop: &StopRule,
) -> Result<GameRun, RunError> {
    let mut trace = GameTrace::new(&state);
    let mut finishing = false;
    while !stop.reached(&state) {
        let round = state.round();
        let adv = if finishing {
            state.finish_step()
        } else {
            match adversary.next(&state) {
                AdversaryMove::Finish => {
                    finishing = true;
                    state.finish_step()
                }
                m => Some(m),
            }
        };
        let Some(adv) = adv else { break };
        state.check_move(&adv).map_err(|source| RunError::Adversary { round, source })?;
        let resp = player
            .respond(&state, &adv)
            .map_err(|source| RunError::Player { round, source })?;
        state
            .apply_round(&adv, &resp)
            .map_err(|source| RunError::Response { round, source })?;
        trace.push(adv, resp, &state);
    }
    Ok(GameRun { trace, state })
}
