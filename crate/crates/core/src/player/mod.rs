//! Player strategies for the tree-mining game.

mod horizon;
mod k2;
mod k3;
mod recursive;

pub use horizon::BoundedHorizon;
pub use k2::TwoMiners;
pub use k3::ThreeMiners;
pub use recursive::{EpochEnd, EpochKind, EpochRecord, Recursive};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::game::{AdversaryMove, GameError, GameState, PlayerResponse};
use crate::tree::{Configuration, NodeId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrategyError {
    #[error("{0}")]
    Unsupported(String),
    #[error("internal state out of sync with the board: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("instance rooted at {root}: {source}")]
    Nested { root: NodeId, source: Box<StrategyError> },
    #[error("horizon emulation did not settle within {0} rounds")]
    EmulationCap(u64),
}

/// Decides how the miners of a killed leaf are relocated.
///
/// `respond` is called with the board *before* `adv` is applied. Strategies may
/// keep private state across calls and assume they see every round of the game.
pub trait PlayerStrategy: Send {
    fn name(&self) -> String;

    fn respond(
        &mut self,
        state: &GameState,
        adv: &AdversaryMove,
    ) -> Result<PlayerResponse, StrategyError>;

    fn clone_box(&self) -> Box<dyn PlayerStrategy>;
}

impl Clone for Box<dyn PlayerStrategy> {
    fn clone(&self) -> Self {
        self.clone_box()
    }
}

impl<S: PlayerStrategy + ?Sized> PlayerStrategy for Box<S> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn respond(
        &mut self,
        state: &GameState,
        adv: &AdversaryMove,
    ) -> Result<PlayerResponse, StrategyError> {
        (**self).respond(state, adv)
    }
    fn clone_box(&self) -> Box<dyn PlayerStrategy> {
        (**self).clone_box()
    }
}

/// `x` miners spread over `children` as evenly as possible, extras first.
pub(crate) fn even_split(x: u32, children: &[NodeId]) -> Configuration {
    let c = children.len() as u32;
    let (q, r) = (x / c, x % c);
    children
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, q + u32::from((i as u32) < r)))
        .collect()
}

/// Textual strategy selector: `k2`, `k3`, `recursive`, `recursive@horizon=Δ`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum PlayerSpec {
    K2,
    K3,
    Recursive { horizon: Option<u32> },
}

impl PlayerSpec {
    /// Default strategy for `k` miners.
    pub fn for_k(k: u32) -> Self {
        match k {
            2 => PlayerSpec::K2,
            3 => PlayerSpec::K3,
            _ => PlayerSpec::Recursive { horizon: None },
        }
    }

    pub fn build(self, k: u32) -> Box<dyn PlayerStrategy> {
        match self {
            PlayerSpec::K2 => Box::new(TwoMiners),
            PlayerSpec::K3 => Box::new(ThreeMiners),
            PlayerSpec::Recursive { horizon: None } => Box::new(Recursive::new(k)),
            PlayerSpec::Recursive { horizon: Some(h) } => {
                Box::new(BoundedHorizon::new(Recursive::new(k), h))
            }
        }
    }

    /// Whether the strategy needs the extended rules (non-lazy moves).
    pub fn extended(self) -> bool {
        matches!(self, PlayerSpec::Recursive { .. })
    }

    pub fn initial_state(self, k: u32) -> GameState {
        match self {
            PlayerSpec::Recursive { horizon: Some(h) } => GameState::horizon(k, k, h),
            s if s.extended() => GameState::extended(k, k),
            _ => GameState::plain(k),
        }
    }
}

impl fmt::Display for PlayerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlayerSpec::K2 => f.write_str("k2"),
            PlayerSpec::K3 => f.write_str("k3"),
            PlayerSpec::Recursive { horizon: None } => f.write_str("recursive"),
            PlayerSpec::Recursive { horizon: Some(h) } => write!(f, "recursive@horizon={h}"),
        }
    }
}

impl FromStr for PlayerSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "k2" => Ok(PlayerSpec::K2),
            "k3" => Ok(PlayerSpec::K3),
            "recursive" => Ok(PlayerSpec::Recursive { horizon: None }),
            _ => {
                let h = s
                    .strip_prefix("recursive@horizon=")
                    .ok_or_else(|| format!("unknown player {s:?}"))?;
                let h = h.parse().map_err(|_| format!("bad horizon in {s:?}"))?;
                Ok(PlayerSpec::Recursive { horizon: Some(h) })
            }
        }
    }
}
