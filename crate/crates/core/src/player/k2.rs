use super::{PlayerStrategy, StrategyError};
use crate::game::{AdversaryMove, GameState, PlayerResponse};
use crate::tree::Configuration;

/// The only strategy available with two miners: follow the single new child.
#[derive(Copy, Clone, Debug, Default)]
pub struct TwoMiners;

impl PlayerStrategy for TwoMiners {
    fn name(&self) -> String {
        "k2".into()
    }

    fn respond(
        &mut self,
        state: &GameState,
        adv: &AdversaryMove,
    ) -> Result<PlayerResponse, StrategyError> {
        if state.k_max() != 2 {
            return Err(StrategyError::Unsupported(format!(
                "the two-miner strategy cannot play with up to {} miners",
                state.k_max()
            )));
        }
        let leaf = match state.active_leaves().collect::<Vec<_>>()[..] {
            [leaf] => leaf,
            _ => return Err(StrategyError::Inconsistent("board is not a line".into())),
        };
        Ok(match *adv {
            AdversaryMove::AddMiner => PlayerResponse::place(Configuration::single(leaf, 1)),
            AdversaryMove::Kill { children: 0, .. } => PlayerResponse::empty(),
            AdversaryMove::Kill { children, .. } => {
                let child = state.fresh_children(children)[0];
                PlayerResponse::place(Configuration::single(child, state.load(leaf)))
            }
            AdversaryMove::Finish => PlayerResponse::empty(),
        })
    }

    fn clone_box(&self) -> Box<dyn PlayerStrategy> {
        Box::new(*self)
    }
}
