//! Exact values of small truncated games, with the principal variation of one.

use treemine::analysis::{lower_bound_value, minimax_value};

fn main() -> anyhow::Result<()> {
    for (k, d, cap) in [(2, 3, 4), (3, 1, 2), (3, 2, 4), (3, 3, 4), (4, 1, 2), (4, 2, 3)] {
        let v = minimax_value(k, d, cap, 30, 5_000_000)?;
        println!(
            "k={k} D={d} cap={cap}: value={} (lower bound {}) over {} positions",
            v.value,
            lower_bound_value(k, d).exact,
            v.positions
        );
    }
    let v = minimax_value(3, 2, 4, 30, 5_000_000)?;
    for (adv, resp) in &v.principal_variation {
        println!("  {}  ->  {}", serde_json::to_string(adv)?, serde_json::to_string(resp)?);
    }
    Ok(())
}
