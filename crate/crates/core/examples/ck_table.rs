//! The cost coefficients and their growth relative to `k^{log₂ k}`.

use treemine::analysis::{check_asymptotic, CostCoefficients};

fn main() -> anyhow::Result<()> {
    let t = CostCoefficients::up_to(4096);
    for k in [2u32, 3, 4, 5, 8, 9, 16, 32, 41, 64, 256, 1024, 4096] {
        let c = t.c(k).to_string();
        let shown = if c.len() > 24 { format!("{}…({} digits)", &c[..12], c.len()) } else { c };
        println!("k={k:<5} c_k={shown:<28} ratio={:.4}", t.ratio(k));
    }
    let r = check_asymptotic(4096, 1.0 / std::f64::consts::LN_2, 1.0, 2.0)?;
    println!("max ratio {:.4} at k={}, non-increasing from k={}", r.constant, r.argmax, r.monotone_from);
    Ok(())
}
