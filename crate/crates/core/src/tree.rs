//! The incremental decision tree.
//!
//! Nodes live in an append-only arena; a node is never removed or moved once
//! created. Every leaf carries a node index `alpha` (0 or 1). A sample landing
//! in a leaf with `alpha = 0` only marks it; a sample landing in a leaf with
//! `alpha = 1` splits the leaf at the midpoint of dimension `depth mod p`, the
//! buffered samples of the leaf are replayed into the two children, and the
//! child holding the new sample becomes the active leaf.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::NodeLabel;
use crate::region::{goes_upper, split_region, Region, SplitRule};
use crate::rls::RlsState;

pub type NodeId = usize;

pub const ROOT: NodeId = 0;

/// Limit on the depth of the tree.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum DepthCap {
    #[default]
    Unlimited,
    /// At step `t` no leaf deeper than `ceil(log2(t + 1))` is created. A capped
    /// leaf keeps learning and keeps buffering its samples until the cap grows.
    CeilLog2,
    /// No node deeper than the given depth.
    Fixed(usize),
}

impl DepthCap {
    /// Largest depth a node may have at step `t` (1-based), if any.
    pub fn max_depth(self, t: u64) -> Option<usize> {
        match self {
            DepthCap::Unlimited => None,
            // ceil(log2(t + 1)) is the bit length of t.
            DepthCap::CeilLog2 => Some((u64::BITS - t.leading_zeros()) as usize),
            DepthCap::Fixed(d) => Some(d),
        }
    }
}

impl std::str::FromStr for DepthCap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unlimited" | "none" => Ok(DepthCap::Unlimited),
            "ceil_log2" | "log2" => Ok(DepthCap::CeilLog2),
            other => other
                .strip_prefix("fixed:")
                .and_then(|d| d.parse().ok())
                .map(DepthCap::Fixed)
                .ok_or_else(|| Error::Config(format!("unknown depth cap policy {other:?}"))),
        }
    }
}

impl TryFrom<String> for DepthCap {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<DepthCap> for String {
    fn from(cap: DepthCap) -> String {
        cap.to_string()
    }
}

impl std::fmt::Display for DepthCap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DepthCap::Unlimited => f.write_str("unlimited"),
            DepthCap::CeilLog2 => f.write_str("ceil_log2"),
            DepthCap::Fixed(d) => write!(f, "fixed:{d}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    /// Dimension of the regressor vectors.
    pub p: usize,
    /// Bound `A` on the magnitude of regressors and desired values.
    pub bound: f64,
    /// Loss scale of the exponential weights. Must satisfy `a >= 4A²`.
    pub a: f64,
    /// Ridge regularizer of every node model.
    pub delta: f64,
    pub depth_cap: DepthCap,
    pub split_rule: SplitRule,
}

impl TreeConfig {
    /// Defaults: `a = 4A²`, `δ = 1`, no depth cap, midpoint splits.
    pub fn new(p: usize, bound: f64) -> Self {
        Self {
            p,
            bound,
            a: 4.0 * bound * bound,
            delta: 1.0,
            depth_cap: DepthCap::Unlimited,
            split_rule: SplitRule::Midpoint,
        }
    }

    pub fn with_a(mut self, a: f64) -> Self {
        self.a = a;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_depth_cap(mut self, cap: DepthCap) -> Self {
        self.depth_cap = cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::Config("dimension p must be positive".into()));
        }
        if !(self.bound.is_finite() && self.bound > 0.0) {
            return Err(Error::Config(format!("bound A must be positive, got {}", self.bound)));
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::Config(format!("delta must be positive, got {}", self.delta)));
        }
        let min_a = 4.0 * self.bound * self.bound;
        if !self.a.is_finite() || self.a < min_a {
            return Err(Error::Config(format!(
                "a = {} violates a >= 4A² = {min_a}",
                self.a
            )));
        }
        Ok(())
    }
}

/// A sample held by a leaf until it splits. `d` is filled in once revealed.
#[derive(Clone, Debug, PartialEq)]
pub struct BufferedSample {
    pub t: u64,
    pub x: Vec<f64>,
    pub d: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TreeNode {
    pub label: NodeLabel,
    pub region: Region,
    pub alpha: u8,
    pub buffer: Vec<BufferedSample>,
    /// Natural log of the node's exponentiated cumulative loss `L`.
    pub log_l: f64,
    /// Natural log of the context-tree weight `P`.
    pub log_p: f64,
    pub rls: RlsState,
    pub parent: Option<NodeId>,
    pub children: Option<[NodeId; 2]>,
}

impl TreeNode {
    fn fresh(label: NodeLabel, region: Region, parent: Option<NodeId>, p: usize, delta: f64) -> Self {
        Self {
            label,
            region,
            alpha: 0,
            buffer: Vec::new(),
            log_l: 0.0,
            log_p: 0.0,
            rls: RlsState::new(p, delta),
            parent,
            children: None,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }

    pub fn depth(&self) -> usize {
        self.label.len()
    }
}

/// `ln(e^x + e^y)` without overflow.
pub(crate) fn log_add_exp(x: f64, y: f64) -> f64 {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Weight of an internal node: `ln((P0 P1 + L) / 2)`.
pub(crate) fn inner_log_p(log_p0: f64, log_p1: f64, log_l: f64) -> f64 {
    log_add_exp(log_p0 + log_p1, log_l) - std::f64::consts::LN_2
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tree {
    config: TreeConfig,
    nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn new(config: TreeConfig) -> Result<Self> {
        config.validate()?;
        let root = TreeNode::fresh(
            NodeLabel::root(),
            Region::root(config.p, config.bound),
            None,
            config.p,
            config.delta,
        );
        Ok(Self {
            config,
            nodes: vec![root],
        })
    }

    /// A complete tree of the given depth, built with the same split rule as
    /// incremental growth. Fails if it would exceed `node_budget` nodes.
    pub fn complete(config: TreeConfig, depth: usize, node_budget: usize) -> Result<Self> {
        let requested = 1usize
            .checked_shl(depth as u32 + 1)
            .map(|n| n - 1)
            .filter(|&n| n <= node_budget)
            .ok_or(Error::NodeBudget {
                requested: if depth < 63 { (1usize << (depth + 1)) - 1 } else { usize::MAX },
                budget: node_budget,
            })?;
        let mut tree = Self::new(config)?;
        tree.nodes.reserve(requested - 1);
        let mut frontier = vec![ROOT];
        for _ in 0..depth {
            let mut next = Vec::with_capacity(frontier.len() * 2);
            for id in frontier {
                next.extend(tree.split(id));
            }
            frontier = next;
        }
        Ok(tree)
    }

    /// Reassembles a tree from nodes listed in creation order (checkpoints).
    pub(crate) fn from_nodes(config: TreeConfig, nodes: Vec<TreeNode>) -> Self {
        Self { config, nodes }
    }

    pub fn config(&self) -> &TreeConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[ROOT]
    }

    pub fn leaves(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).filter(|&id| self.nodes[id].is_leaf())
    }

    pub fn depth(&self) -> usize {
        self.nodes.iter().map(TreeNode::depth).max().unwrap_or(0)
    }

    /// Number of nodes with `alpha = 1`.
    pub fn light_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.alpha == 1).count()
    }

    pub fn find(&self, label: &NodeLabel) -> Option<NodeId> {
        let mut id = ROOT;
        for &bit in label.bits() {
            id = self.nodes[id].children?[bit as usize];
        }
        Some(id)
    }

    /// Sibling of a non-root node.
    pub fn sibling(&self, id: NodeId) -> Option<NodeId> {
        let parent = self.nodes[id].parent?;
        let [c0, c1] = self.nodes[parent].children?;
        Some(if c0 == id { c1 } else { c0 })
    }

    /// Clamps every coordinate into `[-A, A]`.
    pub fn clip(&self, x: &[f64]) -> Vec<f64> {
        let a = self.config.bound;
        x.iter().map(|v| v.clamp(-a, a)).collect()
    }

    /// Root-to-leaf path of nodes whose regions contain `x`. `x` must already
    /// lie in `[-A, A]^p` (see [`Tree::clip`]).
    pub fn locate_path(&self, x: &[f64]) -> Vec<NodeId> {
        let mut path = vec![ROOT];
        let mut id = ROOT;
        while let Some(children) = self.nodes[id].children {
            let node = &self.nodes[id];
            id = children[goes_upper(&node.region, node.depth(), x) as usize];
            path.push(id);
        }
        path
    }

    pub fn locate_leaf(&self, x: &[f64]) -> NodeId {
        *self.locate_path(x).last().expect("path is never empty")
    }

    /// Prediction of a node's own linear model, clamped to `[-A, A]`.
    pub fn node_prediction(&self, id: NodeId, x: &[f64]) -> f64 {
        let a = self.config.bound;
        self.nodes[id].rls.predict(x).clamp(-a, a)
    }

    fn may_split(&self, depth: usize, t: u64) -> bool {
        self.config
            .depth_cap
            .max_depth(t)
            .is_none_or(|max| depth < max)
    }

    /// Structural update for the sample `x` arriving at step `t` in `leaf`.
    /// Returns the leaf that will serve the sample.
    pub fn grow(&mut self, leaf: NodeId, x: &[f64], t: u64) -> NodeId {
        debug_assert!(self.nodes[leaf].is_leaf());
        let pending = BufferedSample {
            t,
            x: x.to_vec(),
            d: None,
        };
        let (alpha, depth) = (self.nodes[leaf].alpha, self.nodes[leaf].depth());
        if alpha == 0 || !self.may_split(depth, t) {
            let node = &mut self.nodes[leaf];
            node.alpha = 1;
            node.buffer.push(pending);
            return leaf;
        }

        let upper = goes_upper(&self.nodes[leaf].region, depth, x);
        let children = self.split(leaf);
        let active = children[upper as usize];
        let node = &mut self.nodes[active];
        node.alpha = 1;
        node.buffer.push(pending);
        self.refresh_weights_from(leaf);
        active
    }

    /// Creates both children of a leaf, replays its buffer into them and
    /// clears it. Ancestor weights are left for the caller to refresh.
    fn split(&mut self, id: NodeId) -> [NodeId; 2] {
        let (lo, hi) = split_region(&self.nodes[id].region, self.nodes[id].depth());
        let label = self.nodes[id].label.clone();
        let (p, delta) = (self.config.p, self.config.delta);

        let c0 = self.nodes.len();
        self.nodes
            .push(TreeNode::fresh(label.child(false), lo, Some(id), p, delta));
        self.nodes
            .push(TreeNode::fresh(label.child(true), hi, Some(id), p, delta));
        let children = [c0, c0 + 1];
        self.nodes[id].children = Some(children);

        let buffer = std::mem::take(&mut self.nodes[id].buffer);
        for child in children {
            self.replay_train(child, &buffer);
        }
        children
    }

    /// Trains a freshly created node on the buffered samples of its parent
    /// that fall in its region, in arrival order.
    pub fn replay_train(&mut self, child: NodeId, buffer: &[BufferedSample]) {
        let two_a = 2.0 * self.config.a;
        for sample in buffer {
            if !self.nodes[child].region.contains(&sample.x) {
                continue;
            }
            let Some(d) = sample.d else {
                debug_assert!(false, "replayed sample without desired value");
                continue;
            };
            let e = d - self.node_prediction(child, &sample.x);
            let node = &mut self.nodes[child];
            node.log_l -= e * e / two_a;
            node.rls.update(&sample.x, d);
        }
        let node = &mut self.nodes[child];
        if node.is_leaf() {
            node.log_p = node.log_l;
        }
    }

    /// Recomputes `log_p` of `id` and all of its ancestors from their children.
    pub fn refresh_weights_from(&mut self, id: NodeId) {
        let mut cur = Some(id);
        while let Some(i) = cur {
            self.refresh_weight(i);
            cur = self.nodes[i].parent;
        }
    }

    pub(crate) fn refresh_weight(&mut self, id: NodeId) {
        let log_p = match self.nodes[id].children {
            None => self.nodes[id].log_l,
            Some([c0, c1]) => inner_log_p(
                self.nodes[c0].log_p,
                self.nodes[c1].log_p,
                self.nodes[id].log_l,
            ),
        };
        self.nodes[id].log_p = log_p;
    }

    /// Overwrites a node's cumulative log-loss and refreshes the weights above it.
    pub fn assign_log_loss(&mut self, id: NodeId, log_l: f64) {
        self.nodes[id].log_l = log_l;
        self.refresh_weights_from(id);
    }

    /// Every `log_p` recomputed from scratch, bottom-up from the `log_l` values.
    pub fn recompute_log_p(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.nodes.len()];
        // Children always have larger ids than their parent.
        for id in (0..self.nodes.len()).rev() {
            let n = &self.nodes[id];
            out[id] = match n.children {
                None => n.log_l,
                Some([c0, c1]) => inner_log_p(out[c0], out[c1], n.log_l),
            };
        }
        out
    }

    /// Largest gap between stored and recomputed `log_p`.
    pub fn log_p_discrepancy(&self) -> f64 {
        self.recompute_log_p()
            .iter()
            .zip(&self.nodes)
            .map(|(r, n)| (r - n.log_p).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> &mut TreeNode {
        &mut self.nodes[id]
    }

    /// Fills in the desired value of the sample buffered at step `t` in `leaf`.
    pub(crate) fn attach_desired(&mut self, leaf: NodeId, t: u64, d: f64) {
        if let Some(s) = self.nodes[leaf].buffer.last_mut() {
            if s.t == t {
                s.d = Some(d);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree_1d() -> Tree {
        Tree::new(TreeConfig::new(1, 1.0)).unwrap()
    }

    fn feed(tree: &mut Tree, t: u64, x: f64, d: f64) -> NodeId {
        let leaf = tree.locate_leaf(&[x]);
        let active = tree.grow(leaf, &[x], t);
        tree.attach_desired(active, t, d);
        active
    }

    fn labels(tree: &Tree, path: &[NodeId]) -> Vec<String> {
        path.iter().map(|&i| tree.node(i).label.to_string()).collect()
    }

    #[test]
    fn config_rejects_small_a() {
        let cfg = TreeConfig::new(1, 1.0).with_a(3.9);
        assert!(matches!(Tree::new(cfg), Err(Error::Config(_))));
        assert!(Tree::new(TreeConfig::new(1, 1.0).with_a(4.0)).is_ok());
    }

    #[test]
    fn ceil_log2_cap() {
        let cap = DepthCap::CeilLog2;
        let expect = [(1, 1), (2, 2), (3, 2), (4, 3), (7, 3), (8, 4), (1023, 10), (1024, 11)];
        for (t, m) in expect {
            assert_eq!(cap.max_depth(t), Some(m), "t = {t}");
        }
        assert_eq!(DepthCap::Unlimited.max_depth(5), None);
        assert_eq!(DepthCap::Fixed(2).max_depth(1 << 40), Some(2));
    }

    #[test]
    fn cap_text_round_trips() {
        for cap in [DepthCap::Unlimited, DepthCap::CeilLog2, DepthCap::Fixed(7)] {
            assert_eq!(cap.to_string().parse::<DepthCap>().unwrap(), cap);
        }
        assert!("fixed:x".parse::<DepthCap>().is_err());
    }

    #[test]
    fn single_node_path() {
        let tree = tree_1d();
        assert_eq!(tree.locate_path(&[0.3]), vec![ROOT]);
    }

    #[test]
    fn evolution_of_a_small_tree() {
        let mut tree = tree_1d();
        feed(&mut tree, 1, -0.3, 0.1);
        assert_eq!(tree.len(), 1);
        assert_eq!(tree.root().alpha, 1);

        feed(&mut tree, 2, -0.6, 0.2);
        let p = tree.locate_path(&[-0.3]);
        assert_eq!(labels(&tree, &p), ["λ", "0"]);
        let n0 = tree.find(&"0".parse().unwrap()).unwrap();
        let n1 = tree.find(&"1".parse().unwrap()).unwrap();
        assert_eq!((tree.node(n0).alpha, tree.node(n1).alpha), (1, 0));

        feed(&mut tree, 3, -0.2, 0.3);
        let p = tree.locate_path(&[-0.2]);
        assert_eq!(labels(&tree, &p), ["λ", "0", "01"]);
        let r = &tree.node(*p.last().unwrap()).region;
        assert_eq!((r.lower[0], r.upper[0]), (-0.5, 0.0));
    }

    #[test]
    fn replay_of_empty_buffer_is_noop() {
        let mut tree = tree_1d();
        feed(&mut tree, 1, 0.5, 0.5);
        let before = tree.node(ROOT).clone();
        tree.replay_train(ROOT, &[]);
        assert_eq!(tree.node(ROOT).rls, before.rls);
        assert_eq!(tree.node(ROOT).log_l, 0.0);
    }

    #[test]
    fn replay_one_sample() {
        let mut tree = tree_1d();
        feed(&mut tree, 1, 0.5, 0.8);
        // Second sample on the lower side splits the root; the buffered
        // sample at 0.5 is replayed into node 1 only.
        feed(&mut tree, 2, -0.5, 0.1);
        let n0 = tree.find(&"0".parse().unwrap()).unwrap();
        let n1 = tree.find(&"1".parse().unwrap()).unwrap();
        let a = tree.config().a;
        assert!((tree.node(n1).log_l - (-0.8f64 * 0.8 / (2.0 * a))).abs() < 1e-15);
        assert_eq!(tree.node(n1).log_p, tree.node(n1).log_l);
        assert_eq!(tree.node(n0).log_l, 0.0);
        assert_eq!(tree.node(n0).rls.updates(), 0);
        assert!(tree.root().buffer.is_empty());
    }

    #[test]
    fn constant_stream_builds_a_chain() {
        let mut tree = tree_1d();
        for t in 1..=10 {
            feed(&mut tree, t, 1.0, 0.0);
        }
        assert_eq!(tree.depth(), 9);
        assert_eq!(tree.light_count(), 10);
        assert_eq!(tree.locate_path(&[1.0]).len(), 10);
    }

    #[test]
    fn capped_leaf_buffers_instead_of_splitting() {
        let cfg = TreeConfig::new(1, 1.0).with_depth_cap(DepthCap::CeilLog2);
        let mut tree = Tree::new(cfg).unwrap();
        for t in 1..=7 {
            feed(&mut tree, t, 1.0, 0.0);
            assert!(tree.depth() <= DepthCap::CeilLog2.max_depth(t).unwrap());
        }
        // Steps 5..=7 hit the depth-3 cap; the leaf holds them plus its own sample.
        let leaf = tree.locate_leaf(&[1.0]);
        assert_eq!(tree.depth(), 3);
        assert_eq!(tree.node(leaf).buffer.len(), 4);
        // The cap rises to 4 at t = 8 and the whole buffer is replayed.
        let active = feed(&mut tree, 8, 1.0, 0.0);
        assert_eq!(tree.node(active).depth(), 4);
        assert_eq!(tree.node(active).rls.updates(), 4);
        assert_eq!(tree.node(active).buffer.len(), 1);
    }

    #[test]
    fn complete_tree_shape() {
        let tree = Tree::complete(TreeConfig::new(1, 1.0), 2, 1 << 20).unwrap();
        assert_eq!(tree.len(), 7);
        assert_eq!(tree.leaves().count(), 4);
        assert!(matches!(
            Tree::complete(TreeConfig::new(1, 1.0), 30, 1000),
            Err(Error::NodeBudget { .. })
        ));
    }

    #[test]
    fn log_add_exp_handles_extremes() {
        assert_eq!(log_add_exp(f64::NEG_INFINITY, -3.0), -3.0);
        assert!((log_add_exp(0.0, 0.0) - 2f64.ln()).abs() < 1e-15);
        assert!((log_add_exp(-1000.0, -1000.0) - (-1000.0 + 2f64.ln())).abs() < 1e-12);
    }
}
