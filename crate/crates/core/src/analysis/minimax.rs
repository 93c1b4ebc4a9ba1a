use std::collections::HashMap;
use std::fmt::Write;

use serde::Serialize;
use thiserror::Error;

use crate::game::{AdversaryMove, GameState, PlayerResponse};
use crate::tree::{Configuration, NodeId, RootedTree};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MinimaxError {
    #[error("more than {0} distinct positions; raise the budget or lower the caps")]
    Budget(usize),
    #[error("k must be between 2 and 4, got {0}")]
    BadK(u32),
}

/// Value of the truncated game and one line of play that attains it.
#[derive(Clone, Debug, Serialize)]
pub struct MinimaxValue {
    pub k: u32,
    pub depth: u32,
    pub depth_cap: u32,
    pub round_cap: u32,
    pub value: i64,
    /// Distinct positions evaluated.
    pub positions: usize,
    pub principal_variation: Vec<(AdversaryMove, PlayerResponse)>,
}

struct Solver {
    depth: u32,
    depth_cap: u32,
    budget: usize,
    memo: HashMap<(String, u32), i64>,
}

/// Largest cost the adversary can force while some miner is at depth `<= D`,
/// in the plain game where leaves at `depth_cap` cannot grow and at most
/// `round_cap` rounds are played.
///
/// Truncation only removes adversary options, so this is a lower bound on the
/// value of the untruncated game.
pub fn minimax_value(
    k: u32,
    depth: u32,
    depth_cap: u32,
    round_cap: u32,
    budget: usize,
) -> Result<MinimaxValue, MinimaxError> {
    if !(2..=4).contains(&k) {
        return Err(MinimaxError::BadK(k));
    }
    let mut s = Solver { depth, depth_cap, budget, memo: HashMap::new() };
    let root = GameState::plain(k);
    let value = s.value(&root, round_cap)?;
    let mut pv = Vec::new();
    let (mut state, mut left) = (root, round_cap);
    while let Some((adv, resp, next)) = s.best_line(&state, left)? {
        pv.push((adv, resp));
        state = next;
        left -= 1;
    }
    Ok(MinimaxValue {
        k,
        depth,
        depth_cap,
        round_cap,
        value,
        positions: s.memo.len(),
        principal_variation: pv,
    })
}

impl Solver {
    fn counted(&self, s: &GameState) -> bool {
        s.min_depth().is_some_and(|m| m <= self.depth)
    }

    fn adversary_moves(&self, s: &GameState) -> Vec<AdversaryMove> {
        s.legal_adversary_moves()
            .into_iter()
            .filter(|m| match *m {
                AdversaryMove::Kill { leaf, children } => {
                    children == 0 || s.tree().depth(leaf) < self.depth_cap
                }
                _ => false,
            })
            .collect()
    }

    /// Every answer to `adv` followed by the resulting board.
    fn outcomes(&self, s: &GameState, adv: &AdversaryMove) -> Vec<(PlayerResponse, GameState, i64)> {
        let AdversaryMove::Kill { leaf, children } = *adv else { return Vec::new() };
        let x = s.load(leaf);
        let fresh = s.fresh_children(children);
        let mut targets = fresh.clone();
        targets.extend(s.active_leaves().filter(|&v| v != leaf));
        let mut out = Vec::new();
        if targets.is_empty() {
            let mut next = s.clone();
            let d = next.apply_round(adv, &PlayerResponse::empty()).expect("last leaf dies");
            out.push((PlayerResponse::empty(), next, d.cost));
            return out;
        }
        let mut counts = vec![0u32; targets.len()];
        distribute(x, 0, &mut counts, fresh.len(), &mut |counts| {
            let mut conf = Configuration::new();
            for (&v, &n) in targets.iter().zip(counts) {
                conf.add(v, n);
            }
            let resp = PlayerResponse::place(conf);
            let mut next = s.clone();
            if let Ok(d) = next.apply_round(adv, &resp) {
                out.push((resp, next, d.cost));
            }
        });
        out
    }

    fn value(&mut self, s: &GameState, left: u32) -> Result<i64, MinimaxError> {
        if left == 0 || !self.counted(s) {
            return Ok(0);
        }
        let key = (canonical_key(s), left);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        if self.memo.len() >= self.budget {
            return Err(MinimaxError::Budget(self.budget));
        }
        let mut best = 0i64;
        for adv in self.adversary_moves(s) {
            let mut worst = i64::MAX;
            for (_, next, delta) in self.outcomes(s, &adv) {
                let v = if self.counted(&next) { delta + self.value(&next, left - 1)? } else { 0 };
                worst = worst.min(v);
                if worst <= best {
                    break;
                }
            }
            best = best.max(worst);
        }
        self.memo.insert(key, best);
        Ok(best)
    }

    fn best_line(
        &mut self,
        s: &GameState,
        left: u32,
    ) -> Result<Option<(AdversaryMove, PlayerResponse, GameState)>, MinimaxError> {
        let target = self.value(s, left)?;
        if target <= 0 {
            return Ok(None);
        }
        for adv in self.adversary_moves(s) {
            let mut worst: Option<(i64, PlayerResponse, GameState)> = None;
            for (resp, next, delta) in self.outcomes(s, &adv) {
                let v = if self.counted(&next) { delta + self.value(&next, left - 1)? } else { 0 };
                if worst.as_ref().is_none_or(|w| v < w.0) {
                    worst = Some((v, resp, next));
                }
            }
            if let Some((v, resp, next)) = worst {
                if v == target {
                    return Ok(Some((adv, resp, next)));
                }
            }
        }
        Ok(None)
    }
}

/// All splits of `x` over `counts`, the first `min_one` entries getting at
/// least one each.
fn distribute(x: u32, i: usize, counts: &mut [u32], min_one: usize, f: &mut impl FnMut(&[u32])) {
    if i + 1 == counts.len() {
        if i < min_one && x == 0 {
            return;
        }
        counts[i] = x;
        f(counts);
        return;
    }
    let lo = u32::from(i < min_one);
    let reserve = min_one.saturating_sub(i + 1) as u32;
    for n in lo..=x.saturating_sub(reserve) {
        counts[i] = n;
        distribute(x - n, i + 1, counts, min_one, f);
    }
}

/// Board up to relabelling: the subtree spanned by the active leaves with
/// unary chains contracted to edge lengths, siblings sorted, plus the depth of
/// its top. Dead branches never matter again.
pub(crate) fn canonical_key(s: &GameState) -> String {
    let tree = s.tree();
    let mut live = vec![false; tree.len()];
    for v in s.active_leaves() {
        for a in tree.ancestors(v) {
            if live[a.index()] {
                break;
            }
            live[a.index()] = true;
        }
    }
    let live_children = |v: NodeId| -> Vec<NodeId> {
        tree.children(v).iter().copied().filter(|c| live[c.index()]).collect()
    };
    let mut top = NodeId::ROOT;
    loop {
        let ch = live_children(top);
        if ch.len() != 1 || s.is_active(top) {
            break;
        }
        top = ch[0];
    }
    fn enc(tree: &RootedTree, s: &GameState, v: NodeId, live: &[bool]) -> String {
        if s.is_active(v) {
            return format!("L{}", s.load(v));
        }
        let mut parts: Vec<String> = tree
            .children(v)
            .iter()
            .filter(|c| live[c.index()])
            .map(|&c| {
                let (mut w, mut len) = (c, 1);
                loop {
                    let next: Vec<NodeId> =
                        tree.children(w).iter().copied().filter(|x| live[x.index()]).collect();
                    if next.len() != 1 || s.is_active(w) {
                        break;
                    }
                    w = next[0];
                    len += 1;
                }
                format!("{len}{}", enc(tree, s, w, live))
            })
            .collect();
        parts.sort_unstable();
        let mut out = String::from("(");
        for p in parts {
            let _ = write!(out, "{p},");
        }
        out.push(')');
        out
    }
    if s.num_active() == 0 {
        return String::from("-");
    }
    format!("{}:{}", tree.depth(top), enc(tree, s, top, &live))
}
