//! An exploration team used as a tree-mining strategy: the board is the
//! explored part of a tree that the adversary grows round by round.

use treemine::adversary::{RandomAdversary, RandomParams};
use treemine::explore::ExplorationPlayer;
use treemine::game::{run_game, GameState, StopRule};
use treemine::PlayerSpec;

fn main() -> anyhow::Result<()> {
    for k in 2..=4u32 {
        let mut params = RandomParams::new(k as u64);
        params.depth_cap = 10;
        params.max_children = k - 1;
        params.persist = true;
        let mut player = ExplorationPlayer::team(k, PlayerSpec::for_k(k));
        let run = run_game(&mut player, &mut RandomAdversary::new(params), GameState::plain(k), &StopRule::rounds(200))?;
        let moves: u64 = player.round_moves().iter().sum();
        println!(
            "k={k}: {} rounds, game cost {} (raw {}), robot moves {moves}",
            run.trace.rounds.len(),
            run.state.cost(),
            run.state.raw_cost()
        );
    }
    Ok(())
}
