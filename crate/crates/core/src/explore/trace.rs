use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Rule, Step};
use crate::game::GameTrace;
use crate::tree::{NodeId, RootedTree};

pub const TRACE_VERSION: u32 = 1;

/// A complete exploration run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplorationTrace {
    pub version: u32,
    pub k: u32,
    /// Size and depth of the explored tree.
    pub n: u64,
    pub depth: u32,
    pub player: String,
    pub scheduler: String,
    /// Parent array of the team's map at the end of the run; view ids in the
    /// steps refer to it.
    pub view: Vec<u32>,
    pub steps: Vec<Step>,
    pub moves: u64,
    pub explored: u64,
    pub target_movement: u64,
    pub refined_movement: i64,
    /// The tree-mining game played by the targets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub game: Option<GameTrace>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TargetsReport {
    pub moves: u64,
    pub explored: u64,
    pub target_movement: u64,
    pub refined_movement: i64,
    /// Smallest slack of `2E - (M - S)` over all prefixes.
    pub min_slack: i64,
    pub min_refined_slack: i64,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TargetsViolation {
    #[error("step {step}: explored {explored} edges after {moves} moves with target movement {s}")]
    Prefix { step: usize, explored: u64, moves: u64, s: i64 },
    #[error("robot {robot}: {r1} R1 moves but telescoping gives {expected}")]
    Telescoping { robot: u32, r1: i64, expected: i64 },
    #[error("step {step}: {what}")]
    Malformed { step: usize, what: String },
    #[error("recorded totals disagree with the steps: {0}")]
    Totals(String),
}

/// Replays the steps, checking at every prefix that
/// `2E >= M - S` for both the plain and the position-relative target movement,
/// and that each robot's R1 count matches the telescoping identity.
pub fn verify_targets_inequality(trace: &ExplorationTrace) -> Result<TargetsReport, TargetsViolation> {
    let view = RootedTree::from_parents(&trace.view)
        .map_err(|e| TargetsViolation::Malformed { step: 0, what: e.to_string() })?;
    let k = trace.k as usize;
    let mut pos = vec![NodeId::ROOT; k];
    let mut target = vec![NodeId::ROOT; k];
    let mut m_r = vec![0i64; k];
    let mut r1_r = vec![0i64; k];
    let mut inc_r = vec![0i64; k];
    let (mut moves, mut explored, mut s, mut s_ref) = (0u64, 0u64, 0u64, 0i64);
    let mut next_fresh = 1u32;
    let mut report = TargetsReport {
        moves: 0,
        explored: 0,
        target_movement: 0,
        refined_movement: 0,
        min_slack: 0,
        min_refined_slack: 0,
    };
    for (i, st) in trace.steps.iter().enumerate() {
        let bad = |what: String| TargetsViolation::Malformed { step: i, what };
        let r = st.robot as usize;
        if r >= k {
            return Err(bad(format!("robot {r} out of range")));
        }
        if pos[r] != st.from {
            return Err(bad(format!("robot {r} is at {} not {}", pos[r], st.from)));
        }
        for rt in &st.retargets {
            let j = rt.robot as usize;
            if j >= k || target[j] != rt.from || !view.contains(rt.to) {
                return Err(bad(format!("retarget {rt:?} does not match the replay")));
            }
            s += view.dist(rt.from, rt.to);
            let d = view.dist(pos[j], rt.to) as i64 - view.dist(pos[j], rt.from) as i64;
            s_ref += d;
            inc_r[j] += d;
            target[j] = rt.to;
        }
        match st.rule {
            Rule::Idle => continue,
            Rule::R1 => {
                if st.to != NodeId(next_fresh) || view.parent(st.to) != st.from {
                    return Err(bad("R1 move does not open a new edge".into()));
                }
                next_fresh += 1;
                explored += 1;
                r1_r[r] += 1;
            }
            Rule::R2 => {
                if view.step_towards(st.from, target[r]) != st.to || st.from == st.to {
                    return Err(bad("R2 move does not approach the target".into()));
                }
            }
        }
        pos[r] = st.to;
        moves += 1;
        m_r[r] += 1;
        let slack = 2 * explored as i64 - (moves as i64 - s as i64);
        let refined_slack = 2 * explored as i64 - (moves as i64 - s_ref);
        if slack < 0 || refined_slack < 0 {
            return Err(TargetsViolation::Prefix {
                step: i,
                explored,
                moves,
                s: if slack < 0 { s as i64 } else { s_ref },
            });
        }
        report.min_slack = if moves == 1 { slack } else { report.min_slack.min(slack) };
        report.min_refined_slack =
            if moves == 1 { refined_slack } else { report.min_refined_slack.min(refined_slack) };
    }
    for r in 0..k {
        let d_m = view.dist(pos[r], target[r]) as i64;
        let twice = m_r[r] + d_m - inc_r[r];
        if twice != 2 * r1_r[r] {
            return Err(TargetsViolation::Telescoping {
                robot: r as u32,
                r1: r1_r[r],
                expected: twice / 2,
            });
        }
    }
    if (moves, explored, s, s_ref)
        != (trace.moves, trace.explored, trace.target_movement, trace.refined_movement)
    {
        return Err(TargetsViolation::Totals(format!(
            "replayed (M, E, S, S') = ({moves}, {explored}, {s}, {s_ref})"
        )));
    }
    report.moves = moves;
    report.explored = explored;
    report.target_movement = s;
    report.refined_movement = s_ref;
    Ok(report)
}

/// Every robot that was offered an unexplored edge took it.
pub fn is_locally_greedy(trace: &ExplorationTrace) -> bool {
    trace.steps.iter().all(|s| !s.offered || s.rule == Rule::R1)
}
