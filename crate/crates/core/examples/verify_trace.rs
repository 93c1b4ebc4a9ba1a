//! Records an exploration trace, checks it, then shows that a tampered copy
//! is rejected.

use treemine::bench::{verify_trace_str, TreeSpec};
use treemine::explore::{run_acte, HiddenWorld, SchedulerSpec};
use treemine::PlayerSpec;

fn main() -> anyhow::Result<()> {
    let tree = "spider:12,30".parse::<TreeSpec>()?.generate()?;
    let mut world = HiddenWorld::new(tree, 5);
    let run = run_acte(PlayerSpec::for_k(4), &mut world, SchedulerSpec::Deepest, 4, true)?;
    let trace = run.trace.expect("recorded");
    let text = serde_json::to_string(&trace)?;
    println!("fresh: {}", serde_json::to_string(&verify_trace_str(&text)?)?);

    let mut bad = trace.clone();
    bad.target_movement += 3;
    match verify_trace_str(&serde_json::to_string(&bad)?) {
        Ok(_) => println!("tampered: accepted"),
        Err(e) => println!("tampered: rejected ({e})"),
    }
    Ok(())
}
