use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Environment, Rule, Step, Team};
use crate::tree::{NodeId, RootedTree};

/// What the team learns on arriving at a node.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum InfoMode {
    /// Only whether an unexplored edge remains, one query at a time.
    #[default]
    Acte,
    /// The number of unexplored edges is visible as well.
    Cte,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("after step {step}: unexplored edges under {top} but no robot below it")]
pub struct AnchorViolation {
    pub step: u64,
    /// Shallowest unmined ancestor of the stranded edges, as a hidden node.
    pub top: NodeId,
}

#[derive(Clone, Debug)]
struct Fenwick(Vec<i64>);

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick(vec![0; n + 1])
    }
    fn add(&mut self, i: usize, d: i64) {
        let mut i = i + 1;
        while i < self.0.len() {
            self.0[i] += d;
            i += i & i.wrapping_neg();
        }
    }
    fn prefix(&self, i: usize) -> i64 {
        let (mut i, mut s) = (i, 0);
        while i > 0 {
            s += self.0[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
    fn range(&self, lo: usize, hi: usize) -> i64 {
        self.prefix(hi) - self.prefix(lo)
    }
}

/// A fixed tree revealed to the team one edge at a time.
///
/// Children of each node are offered in a seeded random order. Besides acting
/// as the environment, the world watches every step and checks that each
/// unexplored edge stays below some robot's anchor.
#[derive(Clone, Debug)]
pub struct HiddenWorld {
    tree: RootedTree,
    mode: InfoMode,
    order: Vec<Vec<NodeId>>,
    revealed: Vec<u32>,
    discovered: Vec<bool>,
    mined: Vec<bool>,
    mined_count: usize,
    hidden_of: Vec<NodeId>,
    // anchor bookkeeping, indexed by Euler-tour position
    tin: Vec<u32>,
    tout: Vec<u32>,
    robots_at: Fenwick,
    frontier: Fenwick,
    top: Vec<bool>,
    positions: Vec<NodeId>,
    steps: u64,
}

impl HiddenWorld {
    pub fn new(tree: RootedTree, seed: u64) -> Self {
        Self::with_mode(tree, seed, InfoMode::Acte)
    }

    pub fn with_mode(tree: RootedTree, seed: u64, mode: InfoMode) -> Self {
        let n = tree.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let order = tree
            .nodes()
            .map(|v| {
                let mut c = tree.children(v).to_vec();
                c.shuffle(&mut rng);
                c
            })
            .collect();
        let (mut tin, mut tout) = (vec![0u32; n], vec![0u32; n]);
        let mut clock = 0u32;
        let mut stack = vec![(NodeId::ROOT, false)];
        while let Some((v, done)) = stack.pop() {
            if done {
                tout[v.index()] = clock;
                continue;
            }
            tin[v.index()] = clock;
            clock += 1;
            stack.push((v, true));
            for &c in tree.children(v).iter().rev() {
                stack.push((c, false));
            }
        }
        let mut w = HiddenWorld {
            tree,
            mode,
            order,
            revealed: vec![0; n],
            discovered: vec![false; n],
            mined: vec![false; n],
            mined_count: 0,
            hidden_of: vec![NodeId::ROOT],
            tin,
            tout,
            robots_at: Fenwick::new(n),
            frontier: Fenwick::new(n),
            top: vec![false; n],
            positions: Vec::new(),
            steps: 0,
        };
        w.discover(NodeId::ROOT);
        w.top[0] = true;
        w
    }

    pub fn tree(&self) -> &RootedTree {
        &self.tree
    }
    pub fn n(&self) -> usize {
        self.tree.len()
    }
    pub fn depth(&self) -> u32 {
        self.tree.max_depth()
    }
    pub fn mode(&self) -> InfoMode {
        self.mode
    }

    /// Every node has been discovered and mined.
    pub fn complete(&self) -> bool {
        self.mined_count == self.tree.len()
    }

    pub fn mined_count(&self) -> usize {
        self.mined_count
    }

    /// Hidden node behind a view node.
    pub fn hidden(&self, v: NodeId) -> NodeId {
        self.hidden_of[v.index()]
    }

    /// Unexplored edges at a view node, visible only in [`InfoMode::Cte`].
    pub fn dangling(&self, v: NodeId) -> Option<u32> {
        let h = self.hidden(v);
        (self.mode == InfoMode::Cte)
            .then(|| self.tree.children(h).len() as u32 - self.revealed[h.index()])
    }

    fn discover(&mut self, h: NodeId) {
        self.discovered[h.index()] = true;
        if !self.tree.children(h).is_empty() {
            self.frontier.add(self.tin[h.index()] as usize, 1);
        }
    }

    fn subtree(&self, h: NodeId) -> (usize, usize) {
        (self.tin[h.index()] as usize, self.tout[h.index()] as usize)
    }

    fn stranded(&self, h: NodeId) -> bool {
        let (lo, hi) = self.subtree(h);
        self.frontier.range(lo, hi) > 0 && self.robots_at.range(lo, hi) == 0
    }

    /// Updates the bookkeeping after `step` and checks the anchor invariant.
    /// Must see every step of the run, starting with a team of `k` robots.
    pub fn observe(&mut self, k: u32, step: &Step) -> Result<(), AnchorViolation> {
        self.steps += 1;
        if self.positions.is_empty() {
            self.positions = vec![NodeId::ROOT; k as usize];
            self.robots_at.add(0, k as i64);
        }
        let violation = |top| AnchorViolation { step: self.steps, top };
        if let Some(m) = step.mined {
            let h = self.hidden(m);
            if self.top[h.index()] {
                self.top[h.index()] = false;
                // Unmined nodes right under the freshly mined region become tops.
                let mut stack = vec![h];
                while let Some(v) = stack.pop() {
                    for i in 0..self.revealed[v.index()] as usize {
                        let c = self.order[v.index()][i];
                        if self.mined[c.index()] {
                            stack.push(c);
                        } else {
                            self.top[c.index()] = true;
                            if self.stranded(c) {
                                return Err(violation(c));
                            }
                        }
                    }
                }
            }
        }
        if step.rule != Rule::Idle {
            let (a, b) = (self.hidden(step.from), self.hidden(step.to));
            self.robots_at.add(self.tin[a.index()] as usize, -1);
            self.robots_at.add(self.tin[b.index()] as usize, 1);
            self.positions[step.robot as usize] = b;
            if self.tree.parent(a) == b && self.top[a.index()] && self.stranded(a) {
                return Err(violation(a));
            }
        }
        Ok(())
    }

    /// Direct check of the anchor invariant from the team's anchors; quadratic,
    /// meant for small trees.
    pub fn check_anchors(&self, team: &Team) -> Result<(), AnchorViolation> {
        let anchors: Vec<NodeId> = team.anchors().into_iter().flatten().collect();
        let view = team.view();
        for w in view.nodes() {
            let h = self.hidden(w);
            if (self.revealed[h.index()] as usize) < self.tree.children(h).len() {
                let covered = view.ancestors(w).any(|a| anchors.contains(&a));
                if !covered {
                    let top = view.ancestors(w).filter(|&a| !team.is_mined(a)).last().unwrap_or(w);
                    return Err(AnchorViolation { step: self.steps, top: self.hidden(top) });
                }
            }
        }
        Ok(())
    }
}

impl Environment for HiddenWorld {
    fn query(&mut self, v: NodeId, child: NodeId) -> bool {
        let h = self.hidden(v);
        let i = self.revealed[h.index()] as usize;
        match self.order[h.index()].get(i) {
            Some(&c) => {
                self.revealed[h.index()] += 1;
                if i + 1 == self.order[h.index()].len() {
                    self.frontier.add(self.tin[h.index()] as usize, -1);
                }
                debug_assert_eq!(child.index(), self.hidden_of.len());
                self.hidden_of.push(c);
                self.discover(c);
                true
            }
            None => {
                if !self.mined[h.index()] {
                    self.mined[h.index()] = true;
                    self.mined_count += 1;
                }
                false
            }
        }
    }
}
