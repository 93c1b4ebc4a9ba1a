//! Rooted trees, miner configurations and the transport distance between them.
//!
//! Trees are append-only arenas: node ids are dense, the root is `NodeId(0)` and
//! every child id is larger than its parent id. Each node also stores a skew-binary
//! jump pointer so that level-ancestor and LCA queries run in `O(log n)` while the
//! tree keeps growing.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("node {0} is not in the tree")]
    InvalidNode(NodeId),
    #[error("configurations carry different totals ({0} vs {1})")]
    UnequalTotals(u64, u64),
    #[error("structure of an empty set of active leaves")]
    EmptyActiveSet,
    #[error("malformed parent array: {0}")]
    MalformedParents(String),
}

/// Dense index of a node inside a [`RootedTree`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub const ROOT: NodeId = NodeId(0);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedTree {
    parent: Vec<NodeId>,
    children: Vec<Vec<NodeId>>,
    depth: Vec<u32>,
    jump: Vec<NodeId>,
}

impl Default for RootedTree {
    fn default() -> Self {
        Self::new()
    }
}

impl RootedTree {
    /// A tree reduced to its root.
    pub fn new() -> Self {
        RootedTree {
            parent: vec![NodeId::ROOT],
            children: vec![Vec::new()],
            depth: vec![0],
            jump: vec![NodeId::ROOT],
        }
    }

    /// Builds a tree from a parent array where `parents[0] == 0` and
    /// `parents[i] < i` for every other node.
    pub fn from_parents(parents: &[u32]) -> Result<Self, TreeError> {
        if parents.is_empty() {
            return Err(TreeError::MalformedParents("empty parent array".into()));
        }
        if parents[0] != 0 {
            return Err(TreeError::MalformedParents("root must be its own parent".into()));
        }
        let mut tree = RootedTree::new();
        for (i, &p) in parents.iter().enumerate().skip(1) {
            if p as usize >= i {
                return Err(TreeError::MalformedParents(format!(
                    "parent of node {i} is {p}, expected an id below {i}"
                )));
            }
            tree.add_child(NodeId(p))?;
        }
        Ok(tree)
    }

    pub fn to_parents(&self) -> Vec<u32> {
        self.parent.iter().map(|p| p.0).collect()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    /// Never true: a tree always holds its root.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    #[inline]
    pub fn contains(&self, v: NodeId) -> bool {
        v.index() < self.parent.len()
    }

    fn check(&self, v: NodeId) -> Result<(), TreeError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(TreeError::InvalidNode(v))
        }
    }

    /// Parent of `v`; the root is its own parent.
    #[inline]
    pub fn parent(&self, v: NodeId) -> NodeId {
        self.parent[v.index()]
    }

    #[inline]
    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v.index()]
    }

    #[inline]
    pub fn depth(&self, v: NodeId) -> u32 {
        self.depth[v.index()]
    }

    pub fn max_depth(&self) -> u32 {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.len() as u32).map(NodeId)
    }

    pub fn is_leaf(&self, v: NodeId) -> bool {
        self.children[v.index()].is_empty()
    }

    /// Appends a fresh child below `parent` and returns its id.
    pub fn add_child(&mut self, parent: NodeId) -> Result<NodeId, TreeError> {
        self.check(parent)?;
        let id = NodeId(self.parent.len() as u32);
        let pj = self.jump[parent.index()];
        let pjj = self.jump[pj.index()];
        let dp = self.depth[parent.index()];
        let jump = if parent != NodeId::ROOT
            && dp - self.depth[pj.index()] == self.depth[pj.index()] - self.depth[pjj.index()]
        {
            pjj
        } else {
            parent
        };
        self.parent.push(parent);
        self.children.push(Vec::new());
        self.depth.push(dp + 1);
        self.jump.push(jump);
        self.children[parent.index()].push(id);
        Ok(id)
    }

    /// Drops every node with id `>= len`. Only used to roll back a failed round.
    pub(crate) fn truncate(&mut self, len: usize) {
        while self.parent.len() > len.max(1) {
            let v = self.parent.len() - 1;
            let p = self.parent[v];
            self.children[p.index()].pop();
            self.parent.pop();
            self.children.pop();
            self.depth.pop();
            self.jump.pop();
        }
    }

    /// Ancestor of `v` at depth `target` (which must not exceed `depth(v)`).
    pub fn ancestor_at_depth(&self, mut v: NodeId, target: u32) -> NodeId {
        debug_assert!(target <= self.depth(v));
        while self.depth(v) > target {
            let j = self.jump[v.index()];
            v = if self.depth(j) >= target { j } else { self.parent(v) };
        }
        v
    }

    /// True when `a` lies on the path from the root to `b` (inclusive).
    pub fn is_ancestor(&self, a: NodeId, b: NodeId) -> bool {
        let da = self.depth(a);
        da <= self.depth(b) && self.ancestor_at_depth(b, da) == a
    }

    pub fn lca(&self, a: NodeId, b: NodeId) -> Result<NodeId, TreeError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.lca_unchecked(a, b))
    }

    pub(crate) fn lca_unchecked(&self, a: NodeId, b: NodeId) -> NodeId {
        let (da, db) = (self.depth(a), self.depth(b));
        let (mut a, mut b) = if da > db {
            (self.ancestor_at_depth(a, db), b)
        } else {
            (a, self.ancestor_at_depth(b, da))
        };
        // Same depth implies identical jump depths on both sides.
        while a != b {
            let (ja, jb) = (self.jump[a.index()], self.jump[b.index()]);
            if ja != jb {
                a = ja;
                b = jb;
            } else {
                a = self.parent(a);
                b = self.parent(b);
            }
        }
        a
    }

    pub fn path_distance(&self, a: NodeId, b: NodeId) -> Result<u64, TreeError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.dist(a, b))
    }

    #[inline]
    pub(crate) fn dist(&self, a: NodeId, b: NodeId) -> u64 {
        let l = self.lca_unchecked(a, b);
        (self.depth(a) + self.depth(b) - 2 * self.depth(l)) as u64
    }

    /// Next node on the path from `from` to `to`; `from` itself when they coincide.
    pub fn step_towards(&self, from: NodeId, to: NodeId) -> NodeId {
        if from == to {
            return from;
        }
        let (df, dt) = (self.depth(from), self.depth(to));
        if dt > df {
            let a = self.ancestor_at_depth(to, df + 1);
            if self.parent(a) == from {
                return a;
            }
        }
        self.parent(from)
    }

    /// Iterates the ancestors of `v`, starting with `v` itself and ending at the root.
    pub fn ancestors(&self, v: NodeId) -> Ancestors<'_> {
        Ancestors { tree: self, next: Some(v) }
    }
}

pub struct Ancestors<'a> {
    tree: &'a RootedTree,
    next: Option<NodeId>,
}

impl Iterator for Ancestors<'_> {
    type Item = NodeId;

    fn next(&mut self) -> Option<NodeId> {
        let v = self.next?;
        self.next = if v == NodeId::ROOT { None } else { Some(self.tree.parent(v)) };
        Some(v)
    }
}

/// Parent-array wire format: `{"parents":[0,0,1,...]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct TreeJson {
    pub parents: Vec<u32>,
}

impl From<&RootedTree> for TreeJson {
    fn from(t: &RootedTree) -> Self {
        TreeJson { parents: t.to_parents() }
    }
}

impl TryFrom<TreeJson> for RootedTree {
    type Error = TreeError;

    fn try_from(j: TreeJson) -> Result<Self, TreeError> {
        RootedTree::from_parents(&j.parents)
    }
}

impl Serialize for RootedTree {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        TreeJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for RootedTree {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = TreeJson::deserialize(d)?;
        RootedTree::try_from(j).map_err(serde::de::Error::custom)
    }
}

/// Number of miners on each active leaf. Zero entries are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration {
    load: BTreeMap<NodeId, u32>,
}

impl Configuration {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(v: NodeId, count: u32) -> Self {
        let mut c = Self::new();
        c.add(v, count);
        c
    }

    #[inline]
    pub fn get(&self, v: NodeId) -> u32 {
        self.load.get(&v).copied().unwrap_or(0)
    }

    pub fn add(&mut self, v: NodeId, count: u32) {
        if count > 0 {
            *self.load.entry(v).or_insert(0) += count;
        }
    }

    /// Removes up to `count` miners from `v` and returns how many were removed.
    pub fn remove(&mut self, v: NodeId, count: u32) -> u32 {
        let Some(cur) = self.load.get_mut(&v) else { return 0 };
        let taken = count.min(*cur);
        *cur -= taken;
        if *cur == 0 {
            self.load.remove(&v);
        }
        taken
    }

    /// Removes `v` entirely, returning its former load.
    pub fn take(&mut self, v: NodeId) -> u32 {
        self.load.remove(&v).unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.load.values().map(|&c| c as u64).sum()
    }

    pub fn len(&self) -> usize {
        self.load.len()
    }

    pub fn is_empty(&self) -> bool {
        self.load.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.load.contains_key(&v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, u32)> + '_ {
        self.load.iter().map(|(&v, &c)| (v, c))
    }

    pub fn support(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.load.keys().copied()
    }
}

impl FromIterator<(NodeId, u32)> for Configuration {
    fn from_iter<I: IntoIterator<Item = (NodeId, u32)>>(iter: I) -> Self {
        let mut c = Configuration::new();
        for (v, n) in iter {
            c.add(v, n);
        }
        c
    }
}

/// `(D, d)`: depth of the shallowest active leaf and depth of the LCA of all of them.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructurePair {
    pub shallowest: u32,
    pub lca_depth: u32,
}

/// Minimum number of edge traversals needed to turn `x` into `y`.
///
/// On a tree the optimal transport pays, for every edge, the absolute net
/// imbalance of mass that must cross it. The imbalances are accumulated bottom-up
/// over the supports only, lifting the deepest pending entry straight to the
/// depth of the next one.
pub fn transport_distance(
    tree: &RootedTree,
    x: &Configuration,
    y: &Configuration,
) -> Result<u64, TreeError> {
    let (tx, ty) = (x.total(), y.total());
    if tx != ty {
        return Err(TreeError::UnequalTotals(tx, ty));
    }
    let mut pending: BTreeMap<(u32, NodeId), i64> = BTreeMap::new();
    for (v, n) in x.iter() {
        tree.check(v)?;
        *pending.entry((tree.depth(v), v)).or_insert(0) += n as i64;
    }
    for (v, n) in y.iter() {
        tree.check(v)?;
        *pending.entry((tree.depth(v), v)).or_insert(0) -= n as i64;
    }
    pending.retain(|_, w| *w != 0);

    let mut cost = 0u64;
    while let Some(((dv, v), w)) = pending.pop_last() {
        let Some(&(du, _)) = pending.keys().next_back() else {
            debug_assert_eq!(w, 0, "equal totals leave no residual imbalance");
            break;
        };
        let t = du.min(dv - 1);
        let a = tree.ancestor_at_depth(v, t);
        cost += w.unsigned_abs() * (dv - t) as u64;
        let e = pending.entry((t, a)).or_insert(0);
        *e += w;
        if *e == 0 {
            pending.remove(&(t, a));
        }
    }
    Ok(cost)
}

/// `(D, d)` of a nonempty set of active leaves.
pub fn structure_of<I>(tree: &RootedTree, active: I) -> Result<StructurePair, TreeError>
where
    I: IntoIterator<Item = NodeId>,
{
    let mut it = active.into_iter();
    let first = it.next().ok_or(TreeError::EmptyActiveSet)?;
    tree.check(first)?;
    let mut shallowest = tree.depth(first);
    let mut lca = first;
    for v in it {
        tree.check(v)?;
        shallowest = shallowest.min(tree.depth(v));
        lca = tree.lca_unchecked(lca, v);
    }
    Ok(StructurePair { shallowest, lca_depth: tree.depth(lca) })
}
