//! Numbers around the game: the `c_k` recurrence, the lower-bound phase cost,
//! the team size of the competitive wrapper and a small-game minimax oracle.

mod minimax;

pub use minimax::{minimax_value, MinimaxError, MinimaxValue};

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

/// `c_k = a_k + b_k` with `a_k = c_{k-1} + k·c_{⌈k/2⌉} + 10k²` and
/// `b_k = k·c_{⌈k/2⌉} + 10k²`, starting from `c_2 = 2`.
#[derive(Clone, Debug)]
pub struct CostCoefficients {
    c: Vec<BigUint>,
    a: Vec<BigUint>,
    b: Vec<BigUint>,
}

impl CostCoefficients {
    /// Table for `2 <= k <= k_max`.
    pub fn up_to(k_max: u32) -> Self {
        let n = k_max.max(2) as usize + 1;
        let mut t = CostCoefficients {
            c: vec![BigUint::zero(); n],
            a: vec![BigUint::zero(); n],
            b: vec![BigUint::zero(); n],
        };
        t.c[2] = BigUint::from(2u32);
        // c_2 has no split: it is all a_2.
        t.a[2] = t.c[2].clone();
        for k in 3..n {
            let kk = k as u64;
            let b = &t.c[k.div_ceil(2)] * kk + BigUint::from(10 * kk * kk);
            t.a[k] = &t.c[k - 1] + &b;
            t.c[k] = &t.a[k] + &b;
            t.b[k] = b;
        }
        t
    }

    pub fn k_max(&self) -> u32 {
        self.c.len() as u32 - 1
    }
    pub fn c(&self, k: u32) -> &BigUint {
        &self.c[k as usize]
    }
    pub fn a(&self, k: u32) -> &BigUint {
        &self.a[k as usize]
    }
    pub fn b(&self, k: u32) -> &BigUint {
        &self.b[k as usize]
    }

    /// `c_k / k^{log₂ k}`.
    pub fn ratio(&self, k: u32) -> f64 {
        let lk = (k as f64).ln();
        (ln_big(self.c(k)) - lk * lk / std::f64::consts::LN_2).exp()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("c_k is only defined for k >= 2, got {0}")]
pub struct BadK(pub u32);

/// Overhead coefficient `c_k` of the recursive strategy.
pub fn ck(k: u32) -> Result<BigUint, BadK> {
    if k < 2 {
        return Err(BadK(k));
    }
    Ok(CostCoefficients::up_to(k).c[k as usize].clone())
}

/// `c_k` as an `i64`, when it fits.
pub fn ck_i64(k: u32) -> Option<i64> {
    ck(k).ok()?.to_i64()
}

pub(crate) fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
}

/// Move bound `2n + c_k·D` of an exploration with `k` robots.
pub fn move_bound(n: u64, k: u32, depth: u32) -> BigUint {
    BigUint::from(2 * n) + ck(k.max(2)).expect("k >= 2") * depth
}

/// Synchronous round bound `⌈(2n + c_k·D)/k⌉ + D`.
pub fn sync_bound(n: u64, k: u32, depth: u32) -> BigUint {
    let m = move_bound(n, k, depth);
    let k = BigUint::from(k);
    (m + &k - 1u32) / k + depth
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticReport {
    pub k_max: u32,
    /// `C = max_k c_k / k^{log₂ k}` and where it is attained.
    pub constant: f64,
    pub argmax: u32,
    /// Smallest `k₀` such that the ratio is non-increasing on `[k₀, k_max]`.
    pub monotone_from: u32,
    /// Smallest `k₀` from which `u_{k-1} + c₁k^β u_{⌈k/2⌉} + c₂k^γ <= u_k`
    /// holds up to `k_max`, with `u_k = exp(α (ln k)²)`; `None` if it fails at
    /// `k_max`.
    pub lemma_from: Option<u32>,
}

#[derive(Debug, Error, PartialEq)]
pub enum AsymptoticError {
    #[error("α = {alpha} is below (β+1)/(2 ln 2) = {needed}")]
    Hypothesis { alpha: f64, needed: f64 },
    #[error("k_max must be at least 3")]
    TooSmall,
}

/// Measures the growth of `c_k` against `k^{log₂ k}`.
///
/// The lemma part uses `c₁ = 2` and `c₂ = 20`, the coefficients of the
/// recurrence, and works in log space.
pub fn check_asymptotic(k_max: u32, alpha: f64, beta: f64, gamma: f64) -> Result<AsymptoticReport, AsymptoticError> {
    let needed = (beta + 1.0) / (2.0 * std::f64::consts::LN_2);
    if alpha < needed - 1e-12 {
        return Err(AsymptoticError::Hypothesis { alpha, needed });
    }
    if k_max < 3 {
        return Err(AsymptoticError::TooSmall);
    }
    let t = CostCoefficients::up_to(k_max);
    let ratios: Vec<f64> = (2..=k_max).map(|k| t.ratio(k)).collect();
    let (mut argmax, mut constant) = (2, ratios[0]);
    for (i, &r) in ratios.iter().enumerate() {
        if r > constant {
            (argmax, constant) = (i as u32 + 2, r);
        }
    }
    let mut monotone_from = k_max;
    while monotone_from > 2 && ratios[monotone_from as usize - 3] >= ratios[monotone_from as usize - 2] {
        monotone_from -= 1;
    }

    let log_u = |k: u32| alpha * (k as f64).ln().powi(2);
    let holds = |k: u32| {
        let kf = k as f64;
        let lhs = [
            log_u(k - 1),
            2f64.ln() + beta * kf.ln() + log_u(k.div_ceil(2)),
            20f64.ln() + gamma * kf.ln(),
        ];
        let m = lhs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        m + lhs.iter().map(|x| (x - m).exp()).sum::<f64>().ln() <= log_u(k)
    };
    let mut lemma_from = None;
    let mut k = k_max;
    while k >= 3 && holds(k) {
        lemma_from = Some(k);
        k -= 1;
    }
    Ok(AsymptoticReport { k_max, constant, argmax, monotone_from, lemma_from })
}

/// Size `k'` of the sub-team whose overhead `k'^{log₂ k'}` fits in a budget of
/// `k`: `max(2, ⌊exp(√(ln 2 · ln k))⌋)`.
pub fn competitive_team_size(k: u32) -> u32 {
    if k <= 2 {
        return 2;
    }
    let x = ((2f64.ln() * (k as f64).ln()).sqrt()).exp();
    let mut kp = (x + 1e-9).floor() as u32;
    while kp > 2 && !overhead_fits(kp, k) {
        kp -= 1;
    }
    kp.max(2)
}

/// `k'^{log₂ k'} <= k`, exact when `k'` is a power of two.
pub fn overhead_fits(kp: u32, k: u32) -> bool {
    if kp.is_power_of_two() {
        let m = kp.trailing_zeros();
        return (kp as u128).checked_pow(m).is_some_and(|v| v <= k as u128);
    }
    let l = (kp as f64).ln();
    l * l / std::f64::consts::LN_2 <= (k as f64).ln()
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct LowerBoundValue {
    /// `k(ln k - 4)·D`.
    pub analytic: f64,
    /// `D·(Σ_{h=2}^{k-1} 2⌈k/h⌉ - 2(k-1))`.
    pub exact: i64,
}

/// Cost the lower-bound adversary forces on any player within depth `D`.
pub fn lower_bound_value(k: u32, depth: u32) -> LowerBoundValue {
    let kf = k as f64;
    let per_phase: i64 = (2..k).map(|h| 2 * k.div_ceil(h) as i64).sum::<i64>() - 2 * (k as i64 - 1);
    LowerBoundValue {
        analytic: kf * (kf.ln() - 4.0) * depth as f64,
        exact: per_phase.max(0) * depth as i64,
    }
}
