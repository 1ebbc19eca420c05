//! Pruning enumeration and regret audits.
//!
//! Expanding the inner-node weight `P = ½ P0 P1 + ½ L` recursively writes the
//! root weight as a sum over the prunings of the tree (complete subtrees that
//! keep the root):
//!
//! ```text
//! P_λ = Σ_m 2^{-B_m} Π_{leaves k of m} L_k
//! ```
//!
//! where every node of `m` that is internal in the tree contributes one factor
//! of ½ (either "split" or "stop here") and every tree leaf contributes none.
//! [`enumerate_prunings`] lists the terms explicitly; it is exponential in the
//! size of the tree and only meant for small trees.

use crate::error::{Error, Result};
use crate::label::NodeLabel;
use crate::rls::RidgeStats;
use crate::tree::{NodeId, Tree, ROOT};
use std::f64::consts::LN_2;

/// Largest number of prunings [`enumerate_prunings`] will materialize.
pub const ENUMERATION_LIMIT: u64 = 1 << 16;

#[derive(Clone, Debug, PartialEq)]
pub struct Pruning {
    pub leaves: Vec<NodeLabel>,
    /// `ln 2^{-B_m}`.
    pub log_prior: f64,
    /// `Σ ln L_k` over the leaves of the pruning.
    pub log_model_loss: f64,
}

impl Pruning {
    /// `B_m`, the number of bits of the prior.
    pub fn bits(&self) -> f64 {
        -self.log_prior / LN_2
    }
}

pub fn enumerate_prunings(tree: &Tree) -> Result<Vec<Pruning>> {
    let count = count_prunings(tree, ROOT);
    if count > ENUMERATION_LIMIT {
        return Err(Error::EnumerationLimit {
            prunings: count,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(expand(tree, ROOT)
        .into_iter()
        .map(|(ids, log_prior, log_model_loss)| Pruning {
            leaves: ids.iter().map(|&i| tree.node(i).label.clone()).collect(),
            log_prior,
            log_model_loss,
        })
        .collect())
}

/// Number of prunings of the subtree at `id`, saturating.
pub fn count_prunings(tree: &Tree, id: NodeId) -> u64 {
    match tree.node(id).children {
        None => 1,
        Some([c0, c1]) => count_prunings(tree, c0)
            .saturating_mul(count_prunings(tree, c1))
            .saturating_add(1),
    }
}

fn expand(tree: &Tree, id: NodeId) -> Vec<(Vec<NodeId>, f64, f64)> {
    let node = tree.node(id);
    match node.children {
        None => vec![(vec![id], 0.0, node.log_l)],
        Some([c0, c1]) => {
            let lower = expand(tree, c0);
            let upper = expand(tree, c1);
            let mut out = Vec::with_capacity(1 + lower.len() * upper.len());
            out.push((vec![id], -LN_2, node.log_l));
            for (l_ids, l_prior, l_loss) in &lower {
                for (u_ids, u_prior, u_loss) in &upper {
                    let mut ids = l_ids.clone();
                    ids.extend_from_slice(u_ids);
                    out.push((ids, -LN_2 + l_prior + u_prior, l_loss + u_loss));
                }
            }
            out
        }
    }
}

/// `ln Σ_m exp(log_prior + log_model_loss)`.
pub fn log_sum_prunings(prunings: &[Pruning]) -> f64 {
    let terms: Vec<f64> = prunings
        .iter()
        .map(|m| m.log_prior + m.log_model_loss)
        .collect();
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Right-hand side of the constructional bound for one pruning.
#[derive(Clone, Debug, PartialEq)]
pub struct PruningBound {
    pub leaves: usize,
    pub bits: f64,
    /// `-2a Σ ln L_k`, the accumulated squared loss of the pruning.
    pub loss: f64,
    /// `loss + 2a ln2 log2(n) + 4A² K log2(n)`.
    pub rhs_log2: f64,
    /// Same with natural logarithms.
    pub rhs_ln: f64,
}

/// Exact check of `-2a ln P_λ(n) <= loss_m + 2a ln2 log n + 4A² K_m log n`
/// against every pruning of the current tree.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactAudit {
    pub n: u64,
    pub a: f64,
    pub bound: f64,
    pub prunings: usize,
    pub log_p_root: f64,
    /// `-2a ln P_λ(n)`.
    pub lhs: f64,
    /// Pruning minimizing the base-2 right-hand side.
    pub best_log2: PruningBound,
    /// Pruning minimizing the natural-log right-hand side.
    pub best_ln: PruningBound,
    /// Smallest accumulated loss over all prunings.
    pub min_loss: f64,
    pub holds_log2: bool,
    pub holds_ln: bool,
    /// Cumulative squared error of the mixture prediction, if supplied.
    pub algorithm_loss: Option<f64>,
}

impl ExactAudit {
    /// Pass/fail of the audit. The penalty counts bits of the prior, so the
    /// logarithms are taken base 2; the natural-log variant is reported only.
    pub fn passed(&self) -> bool {
        self.holds_log2
    }
}

pub fn exact_audit(tree: &Tree, n: u64, algorithm_loss: Option<f64>) -> Result<ExactAudit> {
    let prunings = enumerate_prunings(tree)?;
    let cfg = tree.config();
    let (a, bound) = (cfg.a, cfg.bound);
    let n_f = n.max(1) as f64;
    let (log2n, lnn) = (n_f.log2(), n_f.ln());

    let bounds: Vec<PruningBound> = prunings
        .iter()
        .map(|m| {
            let k = m.leaves.len() as f64;
            let loss = -2.0 * a * m.log_model_loss;
            PruningBound {
                leaves: m.leaves.len(),
                bits: m.bits(),
                loss,
                rhs_log2: loss + 2.0 * a * LN_2 * log2n + 4.0 * bound * bound * k * log2n,
                rhs_ln: loss + 2.0 * a * LN_2 * lnn + 4.0 * bound * bound * k * lnn,
            }
        })
        .collect();

    let pick = |key: fn(&PruningBound) -> f64| {
        bounds
            .iter()
            .min_by(|x, y| key(x).total_cmp(&key(y)))
            .cloned()
            .expect("a tree has at least one pruning")
    };
    let best_log2 = pick(|b| b.rhs_log2);
    let best_ln = pick(|b| b.rhs_ln);
    let min_loss = bounds.iter().map(|b| b.loss).fold(f64::INFINITY, f64::min);

    let log_p_root = tree.root().log_p;
    let lhs = -2.0 * a * log_p_root;
    // Relative slack for rounding in the recursion.
    let tol = 1e-9 * lhs.abs().max(1.0);
    Ok(ExactAudit {
        n,
        a,
        bound,
        prunings: prunings.len(),
        log_p_root,
        lhs,
        holds_log2: lhs <= best_log2.rhs_log2 + tol,
        holds_ln: lhs <= best_ln.rhs_ln + tol,
        best_log2,
        best_ln,
        min_loss,
        algorithm_loss,
    })
}

/// Smallest batch ridge loss of any pruning with at most `max_leaves` leaves,
/// each leaf fitting its own linear model on the samples of its region.
pub fn best_pruning_loss(tree: &Tree, samples: &[(Vec<f64>, f64)], max_leaves: usize) -> f64 {
    assert!(max_leaves >= 1);
    let cfg = tree.config();
    let mut stats: Vec<RidgeStats> = (0..tree.len()).map(|_| RidgeStats::new(cfg.p)).collect();
    for (x, d) in samples {
        let x = tree.clip(x);
        for id in tree.locate_path(&x) {
            stats[id].add(&x, *d);
        }
    }

    // best[id][k - 1]: lowest loss of a pruning of the subtree at id with at most k leaves.
    let mut best: Vec<Vec<f64>> = vec![Vec::new(); tree.len()];
    for id in (0..tree.len()).rev() {
        let own = stats[id].min_loss(cfg.delta);
        let mut row = vec![own; max_leaves];
        if let Some([c0, c1]) = tree.node(id).children {
            for k in 2..=max_leaves {
                for k0 in 1..k {
                    let v = best[c0][k0 - 1] + best[c1][k - k0 - 1];
                    if v < row[k - 1] {
                        row[k - 1] = v;
                    }
                }
            }
            best[c0] = Vec::new();
            best[c1] = Vec::new();
        }
        best[id] = row;
    }
    best[ROOT][max_leaves - 1]
}

/// Regret against the best small pruning at one checkpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthCheckpoint {
    pub n: u64,
    pub max_leaves: usize,
    pub algorithm_loss: f64,
    pub comparator_loss: f64,
    pub regret: f64,
    /// `regret / (p log2²(n))`.
    pub normalized: f64,
}

/// Compares the algorithm's cumulative loss on `samples` with the best
/// pruning of `tree` having at most `floor(log2 n)` leaves.
pub fn growth_checkpoint(tree: &Tree, samples: &[(Vec<f64>, f64)], algorithm_loss: f64) -> GrowthCheckpoint {
    let n = samples.len() as u64;
    let log2n = (n.max(2) as f64).log2();
    let max_leaves = (log2n.floor() as usize).max(1);
    let comparator_loss = best_pruning_loss(tree, samples, max_leaves);
    let regret = algorithm_loss - comparator_loss;
    GrowthCheckpoint {
        n,
        max_leaves,
        algorithm_loss,
        comparator_loss,
        regret,
        normalized: regret / (tree.config().p as f64 * log2n * log2n),
    }
}
