use super::{even_split, PlayerStrategy, StrategyError};
use crate::game::{AdversaryMove, GameState, PlayerResponse};
use crate::tree::{Configuration, NodeId, RootedTree};

/// Doubling strategy for three miners.
///
/// The active subtree is described by `(d, δ1, δ2)`: the lone miner sits at
/// depth `d + δ1`, the pair at depth `d + δ2`. The pair keeps descending while
/// `δ2 < 2δ1 - 1` and sends one miner over to the lone leaf when `δ2 = 2δ1 - 1`.
#[derive(Copy, Clone, Debug, Default)]
pub struct ThreeMiners;

/// Shape of the active subtree with a lone leaf and a pair.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Triple {
    pub d: u32,
    pub delta1: u32,
    pub delta2: u32,
}

impl Triple {
    pub fn of(tree: &RootedTree, lone: NodeId, pair: NodeId) -> Self {
        let l = tree.lca_unchecked(lone, pair);
        let d = tree.depth(l);
        Triple { d, delta1: tree.depth(lone) - d, delta2: tree.depth(pair) - d }
    }
}

impl ThreeMiners {
    fn two_leaves(
        state: &GameState,
        leaf: NodeId,
        children: u32,
    ) -> Result<PlayerResponse, StrategyError> {
        let tree = state.tree();
        let other = state.active_leaves().find(|&v| v != leaf).expect("two leaves");
        if state.load(leaf) == 1 {
            // The lone miner can only join the pair.
            return Ok(PlayerResponse::place(Configuration::single(other, 1)));
        }
        let fresh = state.fresh_children(children);
        let t = Triple::of(tree, other, leaf);
        if t.delta2 + 1 > 2 * t.delta1 {
            return Err(StrategyError::Inconsistent(format!(
                "pair too deep: {t:?} breaks δ2 <= 2δ1 - 1"
            )));
        }
        Ok(PlayerResponse::place(match children {
            0 => Configuration::single(other, 2),
            1 if t.delta2 + 1 < 2 * t.delta1 => Configuration::single(fresh[0], 2),
            1 => Configuration::from_iter([(fresh[0], 1), (other, 1)]),
            _ => unreachable!("a pair has at most one new child"),
        }))
    }
}

impl PlayerStrategy for ThreeMiners {
    fn name(&self) -> String {
        "k3".into()
    }

    fn respond(
        &mut self,
        state: &GameState,
        adv: &AdversaryMove,
    ) -> Result<PlayerResponse, StrategyError> {
        if state.k_max() != 3 {
            return Err(StrategyError::Unsupported(format!(
                "the three-miner strategy cannot play with up to {} miners",
                state.k_max()
            )));
        }
        let (leaf, children) = match *adv {
            AdversaryMove::Kill { leaf, children } => (leaf, children),
            AdversaryMove::AddMiner => {
                let v = state
                    .config()
                    .iter()
                    .min_by_key(|&(v, x)| (x, v))
                    .map(|(v, _)| v)
                    .expect("nonempty board");
                return Ok(PlayerResponse::place(Configuration::single(v, 1)));
            }
            AdversaryMove::Finish => return Ok(PlayerResponse::empty()),
        };
        match state.num_active() {
            1 if children == 0 => Ok(PlayerResponse::empty()),
            1 => Ok(PlayerResponse::place(even_split(
                state.load(leaf),
                &state.fresh_children(children),
            ))),
            2 => Self::two_leaves(state, leaf, children),
            n => Err(StrategyError::Inconsistent(format!("{n} active leaves"))),
        }
    }

    fn clone_box(&self) -> Box<dyn PlayerStrategy> {
        Box::new(*self)
    }
}
