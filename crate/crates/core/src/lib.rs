//! Simulation and verification toolkit for the tree-mining game and collective
//! tree exploration.
//!
//! * [`tree`]: rooted-tree arena, miner configurations, transport distance.
//! * [`game`]: the game engine, extended and bounded-horizon variants, traces.
//! * [`player`] and [`adversary`]: strategies for both sides.
//! * [`explore`]: hidden trees, the TEAM exploration algorithm, schedulers,
//!   traces and the game built from an exploring team.
//! * [`analysis`]: the `c_k` coefficients, bounds and a minimax solver.
//! * [`bench`]: tree generators and the corpus benchmark.

pub mod adversary;
pub mod analysis;
pub mod bench;
pub mod explore;
pub mod game;
pub mod player;
pub mod tree;

pub use adversary::{AdversarySpec, AdversaryStrategy};
pub use game::{run_game, AdversaryMove, GameState, GameTrace, Mode, PlayerResponse, StopRule};
pub use player::{PlayerSpec, PlayerStrategy};
pub use tree::{Configuration, NodeId, RootedTree, StructurePair};
