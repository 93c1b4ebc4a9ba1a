//! The benchmark over the standard corpus, written as CSV to stdout.

use treemine::bench::{bench, BenchConfig, TreeSpec};
use treemine::explore::SchedulerSpec;

fn main() -> anyhow::Result<()> {
    let n = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(2000);
    let cfg = BenchConfig {
        corpus: TreeSpec::corpus(n, 7),
        ks: vec![2, 3, 4, 8, 16],
        schedulers: SchedulerSpec::ALL_FIXED.into_iter().chain([SchedulerSpec::Random { seed: 1 }]).collect(),
        player: None,
        seed: 0,
        failure_dir: None,
    };
    let report = bench(&cfg)?;
    report.write_csv(std::io::stdout())?;
    eprintln!("worst M/bound {:.4}, worst rounds/bound {:.4}", report.worst_move_ratio, report.worst_sync_ratio);
    Ok(())
}
