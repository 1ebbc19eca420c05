//! Reference regressors: the fixed-depth context tree and RLS on fixed
//! feature expansions (linear, second-order Volterra, Fourier).

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mixture::TreeRegressor;
use crate::regressor::OnlineRegressor;
use crate::rls::RlsState;
use crate::tree::{Tree, TreeConfig};

/// Default cap on the number of nodes a fixed tree may allocate.
pub const DEFAULT_NODE_BUDGET: usize = 1 << 22;

/// Complete depth-`depth` tree with growth disabled, running the same mixture
/// code as the incremental tree.
pub fn fixed_tree_regressor(depth: usize, config: TreeConfig) -> Result<TreeRegressor> {
    fixed_tree_regressor_with_budget(depth, config, DEFAULT_NODE_BUDGET)
}

pub fn fixed_tree_regressor_with_budget(
    depth: usize,
    config: TreeConfig,
    node_budget: usize,
) -> Result<TreeRegressor> {
    let tree = Tree::complete(config, depth, node_budget)?;
    Ok(TreeRegressor::frozen(tree, format!("ctw{depth}")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeatureKind {
    /// `[1, x]`.
    Identity,
    /// `[1, x, x_i x_j (i <= j)]`.
    Volterra2,
    /// `[1, sin(kπx_i), cos(kπx_i)]` for `k = 1..=order`.
    Fourier { order: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FeatureMap {
    pub kind: FeatureKind,
    pub p: usize,
}

impl FeatureMap {
    pub fn new(kind: FeatureKind, p: usize) -> Self {
        Self { kind, p }
    }

    pub fn output_dim(&self) -> usize {
        let p = self.p;
        match self.kind {
            FeatureKind::Identity => p + 1,
            FeatureKind::Volterra2 => 1 + p + p * (p + 1) / 2,
            FeatureKind::Fourier { order } => 1 + 2 * order * p,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.output_dim());
        out.push(1.0);
        match self.kind {
            FeatureKind::Identity => out.extend_from_slice(x),
            FeatureKind::Volterra2 => {
                out.extend_from_slice(x);
                for i in 0..x.len() {
                    for j in i..x.len() {
                        out.push(x[i] * x[j]);
                    }
                }
            }
            FeatureKind::Fourier { order } => {
                for &v in x {
                    for k in 1..=order {
                        let (s, c) = (k as f64 * PI * v).sin_cos();
                        out.push(s);
                        out.push(c);
                    }
                }
            }
        }
        out
    }

    fn short_name(&self) -> String {
        match self.kind {
            FeatureKind::Identity => "lr".into(),
            FeatureKind::Volterra2 => "vsr".into(),
            FeatureKind::Fourier { order } => format!("fnr{order}"),
        }
    }
}

/// RLS on a fixed feature expansion of the regressor.
#[derive(Clone, Debug)]
pub struct FeatureRegressor {
    map: FeatureMap,
    rls: RlsState,
}

impl FeatureRegressor {
    pub fn new(map: FeatureMap, delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::Config(format!("delta must be positive, got {delta}")));
        }
        Ok(Self {
            rls: RlsState::new(map.output_dim(), delta),
            map,
        })
    }

    pub fn map(&self) -> &FeatureMap {
        &self.map
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.rls.predict(&self.map.apply(x))
    }
}

impl OnlineRegressor for FeatureRegressor {
    fn name(&self) -> String {
        self.map.short_name()
    }

    fn step(&mut self, x: &[f64], d: f64) -> Result<f64> {
        if x.len() != self.map.p || x.iter().any(|v| !v.is_finite()) || !d.is_finite() {
            return Err(Error::MalformedInput(format!(
                "expected {} finite regressor components and a finite target",
                self.map.p
            )));
        }
        let phi = self.map.apply(x);
        let pred = self.rls.predict(&phi);
        self.rls.update(&phi, d);
        Ok(pred)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn final_window_mse(reg: &mut impl OnlineRegressor, n: usize, p: usize, f: impl Fn(&[f64]) -> f64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let window = n / 10;
        let mut acc = 0.0;
        for t in 0..n {
            let x: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
            let d = f(&x);
            let pred = reg.step(&x, d).unwrap();
            if t >= n - window {
                acc += (d - pred).powi(2);
            }
        }
        acc / window as f64
    }

    #[test]
    fn output_dims() {
        assert_eq!(FeatureMap::new(FeatureKind::Identity, 3).output_dim(), 4);
        assert_eq!(FeatureMap::new(FeatureKind::Volterra2, 2).output_dim(), 6);
        assert_eq!(FeatureMap::new(FeatureKind::Fourier { order: 1 }, 1).output_dim(), 3);
        for kind in [FeatureKind::Identity, FeatureKind::Volterra2, FeatureKind::Fourier { order: 2 }] {
            let m = FeatureMap::new(kind, 3);
            assert_eq!(m.apply(&[0.1, 0.2, 0.3]).len(), m.output_dim());
        }
    }

    #[test]
    fn features_at_origin() {
        for kind in [FeatureKind::Identity, FeatureKind::Volterra2] {
            let phi = FeatureMap::new(kind, 2).apply(&[0.0, 0.0]);
            assert_eq!(phi.iter().filter(|&&v| v != 0.0).count(), 1);
            assert_eq!(phi[0], 1.0);
        }
        let phi = FeatureMap::new(FeatureKind::Fourier { order: 2 }, 2).apply(&[0.0, 0.0]);
        for pair in phi[1..].chunks(2) {
            assert_eq!(pair, [0.0, 1.0]);
        }
    }

    #[test]
    fn linear_target_is_learned() {
        let mut lr = FeatureRegressor::new(FeatureMap::new(FeatureKind::Identity, 1), 1.0).unwrap();
        let mse = final_window_mse(&mut lr, 1000, 1, |x| 2.0 * x[0]);
        assert!(mse < 1e-4, "mse {mse}");
    }

    #[test]
    fn quadratic_target_is_learned() {
        let mut vsr = FeatureRegressor::new(FeatureMap::new(FeatureKind::Volterra2, 2), 1.0).unwrap();
        let mse = final_window_mse(&mut vsr, 10_000, 2, |x| x[0] * x[1]);
        assert!(mse < 1e-4, "mse {mse}");
    }

    #[test]
    fn depth_zero_tree_is_a_single_model() {
        let cfg = TreeConfig::new(1, 1.0);
        let mut ctw = fixed_tree_regressor(0, cfg).unwrap();
        let mut single = RlsState::new(1, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let x = rng.random_range(-1.0..1.0);
            let d = rng.random_range(-1.0..1.0);
            let tr = ctw.step(&[x], d).unwrap();
            assert_eq!(tr.mu, vec![1.0]);
            assert_eq!(tr.prediction, single.predict(&[x]).clamp(-1.0, 1.0));
            single.update(&[x], d);
        }
    }

    #[test]
    fn depth_two_tree_shape() {
        let ctw = fixed_tree_regressor(2, TreeConfig::new(1, 1.0)).unwrap();
        assert_eq!(ctw.tree().len(), 7);
        let ms = crate::audit::enumerate_prunings(ctw.tree()).unwrap();
        assert_eq!(ms.len(), 5);
    }

    #[test]
    fn stream_in_one_leaf_keeps_simplex() {
        let mut ctw = fixed_tree_regressor(3, TreeConfig::new(1, 1.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..300 {
            let x = rng.random_range(0.76..0.99);
            let tr = ctw.step(&[x], rng.random_range(-1.0..1.0)).unwrap();
            assert_eq!(tr.leaf.to_string(), "111");
            assert!((tr.mu.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn node_budget_is_enforced() {
        let r = fixed_tree_regressor_with_budget(12, TreeConfig::new(1, 1.0), 1000);
        assert!(matches!(r, Err(Error::NodeBudget { .. })));
    }
}
