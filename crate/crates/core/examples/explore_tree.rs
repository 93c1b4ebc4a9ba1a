//! Asynchronous exploration of one random tree under each scheduler.

use treemine::analysis::move_bound;
use treemine::bench::TreeSpec;
use treemine::explore::{run_acte, HiddenWorld, SchedulerSpec};
use treemine::PlayerSpec;

fn main() -> anyhow::Result<()> {
    let tree = "random:5000,1,3".parse::<TreeSpec>()?.generate()?;
    let (n, d) = (tree.len() as u64, tree.max_depth());
    let k = 6;
    println!("n={n} D={d} k={k} bound={}", move_bound(n, k, d));
    for sched in SchedulerSpec::ALL_FIXED.into_iter().chain([SchedulerSpec::Random { seed: 9 }]) {
        let mut world = HiddenWorld::new(tree.clone(), 0);
        let run = run_acte(PlayerSpec::for_k(k), &mut world, sched, k, false)?;
        println!(
            "{:>16}: moves={} overhead={} target_movement={} game_cost={}",
            sched.to_string(),
            run.moves,
            run.overhead(),
            run.target_movement,
            run.game_cost
        );
    }
    Ok(())
}
