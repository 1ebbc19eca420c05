//! Context-tree mixture over the active path.
//!
//! For the leaf `k` holding `x[t]`, the root weight at `t - 1` decomposes over
//! the prefixes `k_0 = λ, …, k_l = k`:
//!
//! ```text
//! P_λ = Σ_i π_i · L_i,   π_0 = 1/2 (or 1 when the root is the leaf),
//! π_i = π_{i-1} · P_sibling(k_i) · (1/2 if i < l else 1)
//! ```
//!
//! so `μ_i = π_i L_i / P_λ` is a probability vector and the prediction is
//! `Σ μ_i d̂_i`. All weights are stored as natural logs.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::label::NodeLabel;
use crate::regressor::OnlineRegressor;
use crate::tree::{DepthCap, NodeId, Tree, TreeConfig};

/// Mixture weights along one root-to-leaf path.
#[derive(Clone, Debug, PartialEq)]
pub struct PathWeights {
    pub path: Vec<NodeId>,
    pub log_pi: Vec<f64>,
    pub mu: Vec<f64>,
    pub preds: Vec<f64>,
}

impl PathWeights {
    pub fn mu_sum(&self) -> f64 {
        self.mu.iter().sum()
    }
}

/// Computes `π`, `μ` and the node predictions for `path` at input `x`.
pub fn prefix_weights(tree: &Tree, path: &[NodeId], x: &[f64]) -> PathWeights {
    let l = path.len() - 1;
    let mut log_pi = Vec::with_capacity(path.len());
    log_pi.push(if l == 0 { 0.0 } else { -LN_2 });
    for i in 1..=l {
        let sibling = tree
            .sibling(path[i])
            .expect("non-root path node has a sibling");
        let half = if i < l { LN_2 } else { 0.0 };
        log_pi.push(log_pi[i - 1] + tree.node(sibling).log_p - half);
    }

    let log_root = tree.root().log_p;
    let mu = path
        .iter()
        .zip(&log_pi)
        .map(|(&id, lp)| (lp + tree.node(id).log_l - log_root).exp())
        .collect();
    let preds = path.iter().map(|&id| tree.node_prediction(id, x)).collect();

    PathWeights {
        path: path.to_vec(),
        log_pi,
        mu,
        preds,
    }
}

/// `Σ μ_i d̂_i`.
pub fn mix(weights: &PathWeights) -> f64 {
    weights
        .mu
        .iter()
        .zip(&weights.preds)
        .map(|(m, d)| m * d)
        .sum()
}

/// Post-revelation sweep: charges every path node its own loss, refreshes the
/// weights leaf to root, then trains each node model on `(x, d)`.
pub fn update_path(tree: &mut Tree, path: &[NodeId], preds: &[f64], x: &[f64], d: f64) {
    let two_a = 2.0 * tree.config().a;
    for (&id, &pred) in path.iter().zip(preds) {
        let e = d - pred;
        tree.node_mut(id).log_l -= e * e / two_a;
    }
    for &id in path.iter().rev() {
        tree.refresh_weight(id);
    }
    for &id in path {
        tree.node_mut(id).rls.update(x, d);
    }
}

/// Record of one prediction step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepTrace {
    pub t: u64,
    /// Active leaf; the path is its list of prefixes.
    pub leaf: NodeLabel,
    pub mu: Vec<f64>,
    pub node_predictions: Vec<f64>,
    pub prediction: f64,
    pub desired: f64,
    pub squared_error: f64,
    /// `ln P_λ` after the structural update and before the loss update.
    pub log_p_root_before: f64,
    pub log_p_root_after: f64,
}

impl StepTrace {
    pub fn depth(&self) -> usize {
        self.leaf.len()
    }

    pub fn path_labels(&self) -> Vec<NodeLabel> {
        self.leaf.prefixes()
    }

    /// `-(d - d̂)² / 2a - ln(P_λ(t) / P_λ(t-1))`, non-negative when the
    /// mixture prediction is at least as good as the root weight update.
    pub fn jensen_slack(&self, a: f64) -> f64 {
        -self.squared_error / (2.0 * a) - (self.log_p_root_after - self.log_p_root_before)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Growth {
    Incremental,
    Frozen,
}

#[derive(Clone, Debug)]
struct Pending {
    t: u64,
    x: Vec<f64>,
    weights: PathWeights,
    prediction: f64,
    log_p_root_before: f64,
}

/// Streaming regressor driven by a context tree. With incremental growth
/// this is the incremental decision tree; with a prebuilt complete tree and
/// growth frozen it is the fixed-depth context tree baseline.
#[derive(Clone, Debug)]
pub struct TreeRegressor {
    tree: Tree,
    growth: Growth,
    t: u64,
    pending: Option<Pending>,
    touched: usize,
    name: String,
}

impl TreeRegressor {
    /// Incremental decision tree starting from a single root node.
    pub fn incremental(config: TreeConfig) -> Result<Self> {
        Ok(Self {
            tree: Tree::new(config)?,
            growth: Growth::Incremental,
            t: 0,
            pending: None,
            touched: 0,
            name: "idt".into(),
        })
    }

    /// Runs the mixture on a fixed tree; no node is ever added.
    pub fn frozen(tree: Tree, name: impl Into<String>) -> Self {
        Self {
            tree,
            growth: Growth::Frozen,
            t: 0,
            pending: None,
            touched: 0,
            name: name.into(),
        }
    }

    /// Resumes from a tree that has processed `t` samples.
    pub fn resume(tree: Tree, t: u64) -> Self {
        Self {
            tree,
            growth: Growth::Incremental,
            t,
            pending: None,
            touched: 0,
            name: "idt".into(),
        }
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn into_tree(self) -> Tree {
        self.tree
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn is_growing(&self) -> bool {
        self.growth == Growth::Incremental
    }

    /// Length of the active path of the latest step.
    pub fn touched_nodes(&self) -> usize {
        self.touched
    }

    pub fn depth_cap(&self) -> DepthCap {
        self.tree.config().depth_cap
    }

    /// First half of a step: locates `x`, grows the tree and returns the
    /// mixture prediction. Must be followed by [`TreeRegressor::reveal`].
    pub fn predict(&mut self, x: &[f64]) -> Result<f64> {
        if self.pending.is_some() {
            return Err(Error::MalformedInput(
                "predict called twice without revealing the desired value".into(),
            ));
        }
        if x.len() != self.tree.config().p {
            return Err(Error::MalformedInput(format!(
                "expected {} regressor components, got {}",
                self.tree.config().p,
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::MalformedInput("non-finite regressor component".into()));
        }

        let t = self.t + 1;
        let x = self.tree.clip(x);
        let mut path = self.tree.locate_path(&x);
        if self.growth == Growth::Incremental {
            let leaf = *path.last().expect("non-empty path");
            let active = self.tree.grow(leaf, &x, t);
            if active != leaf {
                path.push(active);
            }
        }

        self.touched = path.len();
        let weights = prefix_weights(&self.tree, &path, &x);
        let prediction = mix(&weights);
        self.pending = Some(Pending {
            t,
            x,
            weights,
            prediction,
            log_p_root_before: self.tree.root().log_p,
        });
        Ok(prediction)
    }

    /// Second half of a step: charges the losses and updates every node on
    /// the active path with the revealed `d`.
    pub fn reveal(&mut self, d: f64) -> Result<StepTrace> {
        if !d.is_finite() {
            return Err(Error::MalformedInput("non-finite desired value".into()));
        }
        let pending = self
            .pending
            .take()
            .ok_or_else(|| Error::MalformedInput("reveal called before predict".into()))?;
        let Pending {
            t,
            x,
            weights,
            prediction,
            log_p_root_before,
        } = pending;

        update_path(&mut self.tree, &weights.path, &weights.preds, &x, d);
        let leaf = *weights.path.last().expect("non-empty path");
        if self.growth == Growth::Incremental {
            self.tree.attach_desired(leaf, t, d);
        }
        self.t = t;

        let e = d - prediction;
        Ok(StepTrace {
            t,
            leaf: self.tree.node(leaf).label.clone(),
            mu: weights.mu,
            node_predictions: weights.preds,
            prediction,
            desired: d,
            squared_error: e * e,
            log_p_root_before,
            log_p_root_after: self.tree.root().log_p,
        })
    }

    /// Runs a whole step.
    pub fn step(&mut self, x: &[f64], d: f64) -> Result<StepTrace> {
        if !d.is_finite() {
            return Err(Error::MalformedInput("non-finite desired value".into()));
        }
        self.predict(x)?;
        self.reveal(d)
    }
}

impl OnlineRegressor for TreeRegressor {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn step(&mut self, x: &[f64], d: f64) -> Result<f64> {
        TreeRegressor::step(self, x, d).map(|tr| tr.prediction)
    }

    fn touched_nodes(&self) -> Option<usize> {
        (self.t > 0).then_some(self.touched)
    }
}
