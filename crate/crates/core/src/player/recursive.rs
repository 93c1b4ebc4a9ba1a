//! The recursive strategy `s^(k)`.
//!
//! Play is split into epochs. An epoch that starts with all miners on one leaf
//! lasts a single kill, after which the miners are split evenly among the new
//! children. Any other epoch starts from a `(D, d)` structure with `Δ = D - d`:
//! over-deep leaves are trimmed to one miner, the remaining leaves are balanced,
//! and each of them hosts an instance of `s^(k-1)` with horizon `D + Δ - D_ℓ`.
//! The epoch ends when every instance has reached its horizon (split) or when
//! a single instance owns every miner (join).

use std::collections::HashMap;

use serde::Serialize;

use super::{even_split, BoundedHorizon, PlayerStrategy, StrategyError};
use crate::game::{AdversaryMove, GameState, Mode, NonLazyMove, PlayerResponse};
use crate::tree::{Configuration, NodeId, StructurePair};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EpochKind {
    SingleLeaf,
    Grouped,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EpochEnd {
    /// The single-leaf epoch's kill created new leaves.
    Descend,
    Split,
    Join,
    /// The board emptied.
    GameOver,
}

/// Bookkeeping of one epoch, kept for checking the cost ledger.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EpochRecord {
    pub kind: EpochKind,
    pub start: StructurePair,
    pub start_round: u64,
    pub end: Option<StructurePair>,
    pub end_round: Option<u64>,
    pub reason: Option<EpochEnd>,
    /// `Δ` of the previous epoch, which pays for trimming over-deep leaves.
    pub prev_delta: u32,
    pub trim_cost: u64,
    pub balance_cost: u64,
    pub between_cost: u64,
    /// Miner count when the epoch started and the largest count seen during it.
    pub miners: u32,
}

impl EpochRecord {
    pub fn delta(&self) -> u32 {
        self.start.shallowest - self.start.lca_depth
    }

    /// Whether the end structure satisfies the split or join condition.
    pub fn progress_ok(&self) -> bool {
        let Some(end) = self.end else { return true };
        let (d_big, d, delta) = (self.start.shallowest, self.start.lca_depth, self.delta());
        match self.kind {
            EpochKind::SingleLeaf => end.shallowest == d_big + 1,
            EpochKind::Grouped => d_big + delta <= end.shallowest || d + delta <= end.lca_depth,
        }
    }

    /// Ledger violations against the bounds `4kΔ`, `4k²Δ`, `2kΔ_prev` and `10k²Δ`.
    pub fn ledger_violations(&self, k: u32) -> Vec<String> {
        let (k, delta, prev) = (k as u64, self.delta() as u64, self.prev_delta as u64);
        let mut out = Vec::new();
        if self.balance_cost > 4 * k * delta {
            out.push(format!("balancing cost {} > 4kΔ = {}", self.balance_cost, 4 * k * delta));
        }
        if self.between_cost > 4 * k * k * delta {
            out.push(format!(
                "between-instance cost {} > 4k²Δ = {}",
                self.between_cost,
                4 * k * k * delta
            ));
        }
        if self.trim_cost > 2 * k * prev {
            out.push(format!("trimming cost {} > 2kΔ' = {}", self.trim_cost, 2 * k * prev));
        }
        let total = self.balance_cost + self.between_cost + self.trim_cost;
        if total > 10 * k * k * delta.max(prev) {
            out.push(format!("non-lazy total {total} > 10k²Δ"));
        }
        out
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum Owner {
    Instance(usize),
    Deep,
}

#[derive(Clone, Debug)]
struct Instance {
    root: NodeId,
    state: GameState,
    strategy: BoundedHorizon<Recursive>,
    local_to_outer: Vec<NodeId>,
    outer_to_local: HashMap<NodeId, NodeId>,
    finished: bool,
}

impl Instance {
    fn load(&self) -> u32 {
        self.state.config().total() as u32
    }

    fn outer(&self, v: NodeId) -> NodeId {
        self.local_to_outer[v.index()]
    }

    fn translate(&self, resp: &PlayerResponse) -> (Configuration, Vec<NonLazyMove>) {
        let placement = resp.placement.iter().map(|(v, n)| (self.outer(v), n)).collect();
        let nonlazy = resp
            .nonlazy
            .iter()
            .map(|m| NonLazyMove { from: self.outer(m.from), to: self.outer(m.to), count: m.count })
            .collect();
        (placement, nonlazy)
    }

    fn nested(&self, e: StrategyError) -> StrategyError {
        StrategyError::Nested { root: self.root, source: Box::new(e) }
    }

    /// Plays `adv` in the instance and returns its response in outer ids.
    fn play(
        &mut self,
        adv: AdversaryMove,
        outer_kids: &[NodeId],
    ) -> Result<(Configuration, Vec<NonLazyMove>), StrategyError> {
        if let AdversaryMove::Kill { children, .. } = adv {
            for (l, &o) in self.state.fresh_children(children).into_iter().zip(outer_kids) {
                debug_assert_eq!(l.index(), self.local_to_outer.len());
                self.local_to_outer.push(o);
                self.outer_to_local.insert(o, l);
            }
        }
        let resp = self.strategy.respond(&self.state, &adv).map_err(|e| self.nested(e))?;
        self.state.apply_round(&adv, &resp).map_err(|e| self.nested(e.into()))?;
        Ok(self.translate(&resp))
    }
}

#[derive(Clone, Debug)]
struct Grouped {
    instances: Vec<Instance>,
    owner: HashMap<NodeId, Owner>,
}

#[derive(Clone, Debug)]
enum Epoch {
    Idle,
    Single,
    Grouped(Box<Grouped>),
}

/// `s^(k)`: plays with up to `k` miners in the extended game.
#[derive(Clone, Debug)]
pub struct Recursive {
    k: u32,
    mirror: Option<GameState>,
    epoch: Epoch,
    log: Vec<EpochRecord>,
}

struct Outcome {
    placement: Configuration,
    nonlazy: Vec<NonLazyMove>,
}

impl Recursive {
    pub fn new(k: u32) -> Self {
        assert!(k >= 1, "need at least one miner");
        Recursive { k, mirror: None, epoch: Epoch::Idle, log: Vec::new() }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Every epoch started so far; the last one may still be running.
    pub fn epochs(&self) -> &[EpochRecord] {
        &self.log
    }

    fn current(&mut self) -> &mut EpochRecord {
        self.log.last_mut().expect("an epoch is running")
    }

    fn init(&mut self, state: &GameState) -> Result<(), StrategyError> {
        if state.num_active() != 1 {
            return Err(StrategyError::Unsupported(
                "the recursive strategy starts from a single leaf".into(),
            ));
        }
        if state.mode() == Mode::Plain {
            return Err(StrategyError::Unsupported(
                "the recursive strategy plays the extended game".into(),
            ));
        }
        self.mirror = Some(state.clone());
        self.start_epoch(0)?;
        Ok(())
    }

    /// Opens the next epoch on the mirror and returns the non-lazy moves it
    /// performs right away.
    fn start_epoch(&mut self, prev_delta: u32) -> Result<Vec<NonLazyMove>, StrategyError> {
        let mirror = self.mirror.as_mut().expect("initialised");
        let Some(start) = mirror.structure().filter(|_| !mirror.is_finished()) else {
            self.epoch = Epoch::Idle;
            return Ok(Vec::new());
        };
        let mut record = EpochRecord {
            kind: EpochKind::SingleLeaf,
            start,
            start_round: mirror.round(),
            end: None,
            end_round: None,
            reason: None,
            prev_delta,
            trim_cost: 0,
            balance_cost: 0,
            between_cost: 0,
            miners: mirror.k_cur(),
        };
        if start.shallowest == start.lca_depth {
            self.epoch = Epoch::Single;
            self.log.push(record);
            return Ok(Vec::new());
        }
        record.kind = EpochKind::Grouped;
        let (d_big, delta) = (start.shallowest, start.shallowest - start.lca_depth);
        let limit = d_big + delta;
        let tree = mirror.tree();
        let leaves: Vec<(NodeId, u32)> = mirror.config().iter().collect();

        // Trim leaves at depth >= D + Δ to one miner, sending the excess to the
        // shallowest leaf.
        let shallow = leaves
            .iter()
            .map(|&(v, _)| v)
            .min_by_key(|&v| (tree.depth(v), v))
            .expect("nonempty");
        let mut trim = Vec::new();
        for &(v, x) in &leaves {
            if tree.depth(v) >= limit && x > 1 {
                trim.push(NonLazyMove { from: v, to: shallow, count: x - 1 });
            }
        }
        record.trim_cost = mirror.apply_nonlazy(&trim)?;

        // Balance the pool so that loads differ by at most one. Extra miners
        // stay on the leaves that already hold the most.
        let tree = mirror.tree();
        let mut pool: Vec<(NodeId, u32)> = mirror
            .config()
            .iter()
            .filter(|&(v, _)| tree.depth(v) < limit)
            .collect();
        let total: u32 = pool.iter().map(|&(_, x)| x).sum();
        let m = pool.len() as u32;
        let (q, r) = (total / m, total % m);
        pool.sort_by_key(|&(v, x)| (std::cmp::Reverse(x), v));
        let mut surplus: Vec<(NodeId, u32)> = Vec::new();
        let mut deficit: Vec<(NodeId, u32)> = Vec::new();
        for (i, &(v, x)) in pool.iter().enumerate() {
            let target = q + u32::from((i as u32) < r);
            if x > target {
                surplus.push((v, x - target));
            } else if x < target {
                deficit.push((v, target - x));
            }
        }
        surplus.sort_by_key(|&(v, s)| (std::cmp::Reverse(s), v));
        deficit.sort_by_key(|&(v, _)| v);
        let mut balance = Vec::new();
        let mut di = 0;
        for (from, mut s) in surplus {
            while s > 0 {
                let (to, need) = &mut deficit[di];
                let n = s.min(*need);
                balance.push(NonLazyMove { from, to: *to, count: n });
                s -= n;
                *need -= n;
                if *need == 0 {
                    di += 1;
                }
            }
        }
        record.balance_cost = mirror.apply_nonlazy(&balance)?;

        let tree = mirror.tree();
        let mut owner = HashMap::new();
        let mut instances = Vec::new();
        for (v, x) in mirror.config().iter() {
            let depth = tree.depth(v);
            if depth >= limit {
                owner.insert(v, Owner::Deep);
                continue;
            }
            owner.insert(v, Owner::Instance(instances.len()));
            let horizon = limit - depth;
            let sub_k = (self.k - 1).max(x);
            let state = GameState::horizon(x, sub_k, horizon);
            instances.push(Instance {
                root: v,
                state,
                strategy: BoundedHorizon::new(Recursive::new(self.k - 1), horizon),
                local_to_outer: vec![v],
                outer_to_local: HashMap::from([(v, NodeId::ROOT)]),
                finished: false,
            });
        }
        self.epoch = Epoch::Grouped(Box::new(Grouped { instances, owner }));
        self.log.push(record);
        trim.extend(balance);
        Ok(trim)
    }

    fn respond_single(&mut self, state: &GameState, adv: &AdversaryMove) -> Outcome {
        let leaf = state.active_leaves().next().expect("single leaf");
        let placement = match *adv {
            AdversaryMove::AddMiner => Configuration::single(leaf, 1),
            AdversaryMove::Kill { children: 0, .. } | AdversaryMove::Finish => Configuration::new(),
            AdversaryMove::Kill { children, .. } => {
                even_split(state.load(leaf), &state.fresh_children(children))
            }
        };
        Outcome { placement, nonlazy: Vec::new() }
    }

    fn respond_grouped(
        &mut self,
        state: &GameState,
        adv: &AdversaryMove,
    ) -> Result<Outcome, StrategyError> {
        let Epoch::Grouped(g) = &mut self.epoch else { unreachable!() };
        let record = self.log.last_mut().expect("epoch record");
        let mut out = Outcome { placement: Configuration::new(), nonlazy: Vec::new() };
        match *adv {
            AdversaryMove::Finish => {}
            AdversaryMove::AddMiner => {
                let j = g.smallest_unfinished(None).ok_or_else(|| {
                    StrategyError::Inconsistent("grouped epoch without open instance".into())
                })?;
                let (p, n) = g.instances[j].play(AdversaryMove::AddMiner, &[])?;
                out.placement = p;
                out.nonlazy = n;
            }
            AdversaryMove::Kill { leaf, children } => {
                let who = *g.owner.get(&leaf).ok_or_else(|| {
                    StrategyError::Inconsistent(format!("leaf {leaf} has no owner"))
                })?;
                g.owner.remove(&leaf);
                let x = state.load(leaf);
                let kids = state.fresh_children(children);
                match who {
                    Owner::Instance(i) if !g.instances[i].finished => {
                        let local = g.instances[i].outer_to_local[&leaf];
                        let (p, n) =
                            g.instances[i].play(AdversaryMove::kill(local, children), &kids)?;
                        for &c in &kids {
                            g.owner.insert(c, Owner::Instance(i));
                        }
                        let inst = &mut g.instances[i];
                        if inst.state.config().is_empty() {
                            inst.finished = true;
                            g.eject(state, leaf, x, &mut out, record)?;
                        } else {
                            out.placement = p;
                            out.nonlazy = n;
                            if inst.state.is_finished() {
                                inst.finished = true;
                                g.redistribute(state, leaf, i, &mut out, record)?;
                            }
                        }
                    }
                    _ => {
                        if children > 0 {
                            return Err(StrategyError::Inconsistent(format!(
                                "kill with children on settled leaf {leaf}"
                            )));
                        }
                        g.eject(state, leaf, x, &mut out, record)?;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Checks whether the current epoch is over after the mirror absorbed a round.
    fn epoch_over(&self, adv: &AdversaryMove) -> Option<EpochEnd> {
        let mirror = self.mirror.as_ref()?;
        if mirror.is_finished() {
            return Some(EpochEnd::GameOver);
        }
        match &self.epoch {
            Epoch::Idle => None,
            Epoch::Single => match adv {
                AdversaryMove::Kill { children, .. } if *children > 0 => Some(EpochEnd::Descend),
                _ => None,
            },
            Epoch::Grouped(g) => {
                if g.instances.iter().all(|i| i.finished) {
                    return Some(EpochEnd::Split);
                }
                let mut owners = mirror.active_leaves().map(|v| g.owner.get(&v));
                let first = owners.next().flatten();
                let single = matches!(first, Some(Owner::Instance(_)))
                    && owners.all(|o| o == first);
                single.then_some(EpochEnd::Join)
            }
        }
    }
}

impl Grouped {
    fn smallest_unfinished(&self, except: Option<usize>) -> Option<usize> {
        self.instances
            .iter()
            .enumerate()
            .filter(|&(i, inst)| !inst.finished && Some(i) != except)
            .min_by_key(|(_, inst)| (inst.load(), inst.root))
            .map(|(i, _)| i)
    }

    fn leaves_of(&self, state: &GameState, i: usize) -> impl Iterator<Item = NodeId> + '_ {
        let owner = &self.owner;
        state
            .active_leaves()
            .filter(move |v| owner.get(v) == Some(&Owner::Instance(i)))
            .collect::<Vec<_>>()
            .into_iter()
    }

    /// Rehouses the `x` miners of a dead leaf that no open instance answers for.
    fn eject(
        &mut self,
        state: &GameState,
        leaf: NodeId,
        x: u32,
        out: &mut Outcome,
        record: &mut EpochRecord,
    ) -> Result<(), StrategyError> {
        let tree = state.tree();
        let total = state.k_cur();
        for placed in 0..x {
            let remaining = x - placed;
            let Some(j) = self.smallest_unfinished(None) else {
                // Every instance is done: the epoch splits, drop the miners on the
                // closest leaf still standing.
                let target = state
                    .active_leaves()
                    .filter(|&v| v != leaf)
                    .min_by_key(|&v| (tree.dist(leaf, v), v));
                if let Some(t) = target {
                    out.placement.add(t, remaining);
                    record.between_cost += remaining as u64 * tree.dist(leaf, t);
                }
                return Ok(());
            };
            let load_j = self.instances[j].load();
            if load_j + remaining == total {
                // Everything else is gone: the remaining miners join instance j
                // directly, which ends the epoch.
                let mut best: Option<(u32, NodeId)> = None;
                for v in self.leaves_of(state, j) {
                    let l = state.load(v) + out.placement.get(v);
                    if best.is_none_or(|b| (l, v) < b) {
                        best = Some((l, v));
                    }
                }
                let (_, t) = best.expect("open instance has leaves");
                out.placement.add(t, remaining);
                record.between_cost += remaining as u64 * tree.dist(leaf, t);
                return Ok(());
            }
            let (p, n) = self.instances[j].play(AdversaryMove::AddMiner, &[])?;
            let (t, _) = p.iter().next().expect("one miner placed");
            out.placement.add(t, 1);
            record.between_cost += tree.dist(leaf, t);
            out.nonlazy.extend(n);
        }
        Ok(())
    }

    /// Moves the excess miners of the finished instance `i` to open instances.
    fn redistribute(
        &mut self,
        state: &GameState,
        killed: NodeId,
        i: usize,
        out: &mut Outcome,
        record: &mut EpochRecord,
    ) -> Result<(), StrategyError> {
        let excess: Vec<(NodeId, u32)> = self.instances[i]
            .state
            .config()
            .iter()
            .filter(|&(_, x)| x > 1)
            .map(|(v, x)| (self.instances[i].outer(v), x - 1))
            .collect();
        for (from, extra) in excess {
            for _ in 0..extra {
                let Some(j) = self.smallest_unfinished(None) else { return Ok(()) };
                let (p, n) = self.instances[j].play(AdversaryMove::AddMiner, &[])?;
                let (to, _) = p.iter().next().expect("one miner placed");
                let d = dist_after(state, killed, from, to);
                record.between_cost += d;
                out.nonlazy.push(NonLazyMove { from, to, count: 1 });
                out.nonlazy.extend(n);
            }
        }
        Ok(())
    }
}

/// Distance between two nodes, either of which may be a child of `killed`
/// created this round.
fn dist_after(state: &GameState, killed: NodeId, a: NodeId, b: NodeId) -> u64 {
    let tree = state.tree();
    if a == b {
        return 0;
    }
    let lift = |v: NodeId| if tree.contains(v) { (v, 0) } else { (killed, 1) };
    let ((a, ea), (b, eb)) = (lift(a), lift(b));
    tree.dist(a, b) + ea + eb
}

impl PlayerStrategy for Recursive {
    fn name(&self) -> String {
        format!("recursive(k={})", self.k)
    }

    fn respond(
        &mut self,
        state: &GameState,
        adv: &AdversaryMove,
    ) -> Result<PlayerResponse, StrategyError> {
        if state.k_cur() > self.k || (*adv == AdversaryMove::AddMiner && state.k_cur() >= self.k) {
            return Err(StrategyError::Unsupported(format!(
                "s^({}) cannot handle more than {} miners",
                self.k, self.k
            )));
        }
        if self.mirror.is_none() {
            self.init(state)?;
        }
        {
            let mirror = self.mirror.as_ref().unwrap();
            if mirror.round() != state.round() || mirror.config() != state.config() {
                return Err(StrategyError::Inconsistent(format!(
                    "mirror at round {} does not match board at round {}",
                    mirror.round(),
                    state.round()
                )));
            }
        }
        let out = match self.epoch {
            Epoch::Idle => Outcome { placement: Configuration::new(), nonlazy: Vec::new() },
            Epoch::Single => self.respond_single(state, adv),
            Epoch::Grouped(_) => self.respond_grouped(state, adv)?,
        };
        let mut resp = PlayerResponse { placement: out.placement, nonlazy: out.nonlazy };
        let mirror = self.mirror.as_mut().unwrap();
        mirror.apply_round(adv, &resp)?;
        if let Some(end) = self.epoch_over(adv) {
            let mirror = self.mirror.as_ref().unwrap();
            let (round, structure) = (mirror.round(), mirror.structure());
            let prev_delta = {
                let rec = self.current();
                rec.end = structure;
                rec.end_round = Some(round);
                rec.reason = Some(end);
                rec.delta()
            };
            let extra = self.start_epoch(prev_delta)?;
            resp.nonlazy.extend(extra);
        } else if let Some(rec) = self.log.last_mut() {
            rec.miners = rec.miners.max(state.k_cur());
        }
        Ok(resp)
    }

    fn clone_box(&self) -> Box<dyn PlayerStrategy> {
        Box::new(self.clone())
    }
}
