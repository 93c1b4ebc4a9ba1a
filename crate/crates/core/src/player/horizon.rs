use super::{PlayerStrategy, StrategyError};
use crate::game::{AdversaryMove, GameState, Mode, NonLazyMove, PlayerResponse};
use crate::tree::{Configuration, NodeId};

const NO_NODE: u32 = u32::MAX;

/// Runs an unbounded strategy on a private shadow board and projects its moves
/// onto a board with horizon `Δ`.
///
/// The shadow board coincides with the real one down to depth `Δ`. Whenever the
/// wrapped strategy stacks several miners at or below the horizon, the wrapper
/// keeps feeding it single-child kills of such leaves until every deep leaf holds
/// one miner, or until no leaf above the horizon remains.
#[derive(Clone, Debug)]
pub struct BoundedHorizon<S> {
    inner: S,
    delta: u32,
    shadow: Option<GameState>,
    real_to_shadow: Vec<NodeId>,
    shadow_to_real: Vec<u32>,
    emulated: u64,
    emulation_cap: u64,
}

impl<S: PlayerStrategy + Clone + 'static> BoundedHorizon<S> {
    pub fn new(inner: S, delta: u32) -> Self {
        BoundedHorizon {
            inner,
            delta,
            shadow: None,
            real_to_shadow: Vec::new(),
            shadow_to_real: Vec::new(),
            emulated: 0,
            emulation_cap: 1 << 22,
        }
    }

    pub fn with_emulation_cap(mut self, cap: u64) -> Self {
        self.emulation_cap = cap;
        self
    }

    pub fn delta(&self) -> u32 {
        self.delta
    }

    pub fn inner(&self) -> &S {
        &self.inner
    }

    /// The unbounded board the wrapped strategy actually plays on.
    pub fn shadow(&self) -> Option<&GameState> {
        self.shadow.as_ref()
    }

    /// Number of adversary moves invented so far to push stacks below the horizon.
    pub fn emulated_rounds(&self) -> u64 {
        self.emulated
    }

    fn init(&mut self, state: &GameState) -> Result<(), StrategyError> {
        if state.round() != 0 || state.num_active() != 1 {
            return Err(StrategyError::Unsupported(
                "a horizon wrapper must see the game from its first round".into(),
            ));
        }
        if state.mode() != Mode::Horizon(self.delta) {
            return Err(StrategyError::Unsupported(format!(
                "wrapper for horizon {} used in a {:?} game",
                self.delta,
                state.mode()
            )));
        }
        self.shadow = Some(GameState::extended(state.k_cur(), state.k_max()));
        self.real_to_shadow = vec![NodeId::ROOT];
        self.shadow_to_real = vec![0];
        Ok(())
    }

    /// Image of a shadow node on the real board.
    fn project(&self, v: NodeId) -> NodeId {
        let shadow = self.shadow.as_ref().expect("initialised");
        let tree = shadow.tree();
        let v = if tree.depth(v) > self.delta { tree.ancestor_at_depth(v, self.delta) } else { v };
        let r = self.shadow_to_real[v.index()];
        debug_assert_ne!(r, NO_NODE);
        NodeId(r)
    }

    fn link(&mut self, real: NodeId, shadow: NodeId) {
        if self.real_to_shadow.len() <= real.index() {
            self.real_to_shadow.resize(real.index() + 1, NodeId(NO_NODE));
        }
        self.real_to_shadow[real.index()] = shadow;
        if self.shadow_to_real.len() <= shadow.index() {
            self.shadow_to_real.resize(shadow.index() + 1, NO_NODE);
        }
        self.shadow_to_real[shadow.index()] = real.0;
    }

    fn push_projected(&self, out: &mut Vec<NonLazyMove>, moves: &[NonLazyMove]) {
        for m in moves {
            let (from, to) = (self.project(m.from), self.project(m.to));
            if from != to {
                out.push(NonLazyMove { from, to, count: m.count });
            }
        }
    }

    fn deep_stack(&self) -> Option<NodeId> {
        let shadow = self.shadow.as_ref()?;
        let tree = shadow.tree();
        let open = shadow.active_leaves().any(|v| tree.depth(v) < self.delta);
        if !open {
            return None;
        }
        shadow
            .config()
            .iter()
            .find(|&(v, x)| x > 1 && tree.depth(v) >= self.delta)
            .map(|(v, _)| v)
    }
}

impl<S: PlayerStrategy + Clone + 'static> PlayerStrategy for BoundedHorizon<S> {
    fn name(&self) -> String {
        format!("{}@horizon={}", self.inner.name(), self.delta)
    }

    fn respond(
        &mut self,
        state: &GameState,
        adv: &AdversaryMove,
    ) -> Result<PlayerResponse, StrategyError> {
        if self.shadow.is_none() {
            self.init(state)?;
        }
        let shadow_raw = self.shadow.as_ref().unwrap().raw_cost();
        if state.raw_cost() > shadow_raw {
            return Err(StrategyError::Inconsistent(format!(
                "projected cost {} exceeds shadow cost {shadow_raw}",
                state.raw_cost()
            )));
        }
        let sadv = match *adv {
            AdversaryMove::Finish => return Ok(PlayerResponse::empty()),
            AdversaryMove::AddMiner => AdversaryMove::AddMiner,
            AdversaryMove::Kill { leaf, children } => {
                let depth = state.tree().depth(leaf);
                let s = if depth < self.delta {
                    self.real_to_shadow[leaf.index()]
                } else {
                    let shadow = self.shadow.as_ref().unwrap();
                    shadow
                        .active_leaves()
                        .find(|&v| self.project(v) == leaf)
                        .ok_or_else(|| {
                            StrategyError::Inconsistent(format!("no shadow leaf under {leaf}"))
                        })?
                };
                AdversaryMove::kill(s, children)
            }
        };
        if let AdversaryMove::Kill { children, .. } = sadv {
            let real_kids = state.fresh_children(children);
            let shadow_kids = self.shadow.as_ref().unwrap().fresh_children(children);
            for (r, s) in real_kids.into_iter().zip(shadow_kids) {
                self.link(r, s);
            }
        }
        let shadow = self.shadow.as_mut().unwrap();
        let sresp = self.inner.respond(shadow, &sadv)?;
        shadow.apply_round(&sadv, &sresp)?;

        let placement: Configuration =
            sresp.placement.iter().map(|(v, n)| (self.project(v), n)).collect();
        let mut nonlazy = Vec::new();
        self.push_projected(&mut nonlazy, &sresp.nonlazy);

        let mut steps = 0u64;
        while let Some(e) = self.deep_stack() {
            steps += 1;
            if steps > self.emulation_cap {
                return Err(StrategyError::EmulationCap(self.emulation_cap));
            }
            let eadv = AdversaryMove::kill(e, 1);
            let shadow = self.shadow.as_mut().unwrap();
            let eresp = self.inner.respond(shadow, &eadv)?;
            shadow.apply_round(&eadv, &eresp)?;
            let from = self.project(e);
            for (v, n) in eresp.placement.iter() {
                let to = self.project(v);
                if to != from {
                    nonlazy.push(NonLazyMove { from, to, count: n });
                }
            }
            self.push_projected(&mut nonlazy, &eresp.nonlazy);
        }
        self.emulated += steps;
        Ok(PlayerResponse { placement, nonlazy })
    }

    fn clone_box(&self) -> Box<dyn PlayerStrategy> {
        Box::new(self.clone())
    }
}
