//! Synchronous rounds against `⌈(2n + c_k·D)/k⌉ + D`, and the competitive
//! wrapper that only sends a fraction of a large team.

use treemine::analysis::{competitive_team_size, sync_bound};
use treemine::bench::TreeSpec;
use treemine::explore::{run_competitive, run_cte_sync, HiddenWorld};
use treemine::PlayerSpec;

fn main() -> anyhow::Result<()> {
    for spec in TreeSpec::corpus(20_000, 1) {
        let tree = spec.generate()?;
        let (n, d) = (tree.len() as u64, tree.max_depth());
        for k in [2u32, 4, 8] {
            let mut world = HiddenWorld::new(tree.clone(), 0);
            let run = run_cte_sync(PlayerSpec::for_k(k), &mut world, k, false)?;
            println!("{spec:>22} k={k:<2} rounds={:<7} bound={}", run.rounds, sync_bound(n, k, d));
        }
        let k = 4096;
        let mut world = HiddenWorld::new(tree, 0);
        let run = run_competitive(&mut world, k)?;
        println!("{spec:>22} k={k} uses {} robots: rounds={}", competitive_team_size(k), run.rounds);
    }
    Ok(())
}
