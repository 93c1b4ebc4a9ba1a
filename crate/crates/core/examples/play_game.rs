//! A few games of each default strategy against the lower-bound adversary and
//! a random one, with the cost measured against `c_k·D`.

use treemine::adversary::{LowerBound, RandomAdversary, RandomParams};
use treemine::analysis::ck;
use treemine::game::{cost_at_depth, run_game, StopRule};
use treemine::{AdversaryStrategy, PlayerSpec};

fn main() -> anyhow::Result<()> {
    let depth = 12;
    println!("{:>3} {:>28} {:>8} {:>10}", "k", "adversary", "cost", "c_k·D");
    for k in [2u32, 3, 4, 6, 8] {
        let mut params = RandomParams::new(42);
        params.depth_cap = depth;
        params.max_children = k;
        let advs: Vec<Box<dyn AdversaryStrategy>> =
            vec![Box::new(LowerBound::new(k, depth)), Box::new(RandomAdversary::new(params))];
        for mut adv in advs {
            let spec = PlayerSpec::for_k(k);
            let mut player = spec.build(k);
            let run = run_game(player.as_mut(), adv.as_mut(), spec.initial_state(k), &StopRule::depth(k, depth))?;
            let cost = cost_at_depth(&run.trace, depth);
            println!("{k:>3} {:>28} {cost:>8} {:>10}", adv.name(), ck(k)? * depth);
        }
    }
    Ok(())
}
