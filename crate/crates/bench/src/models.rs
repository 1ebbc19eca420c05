use idt::baselines::{fixed_tree_regressor, FeatureKind, FeatureMap, FeatureRegressor};
use idt::{OnlineRegressor, StepTrace, TreeConfig, TreeRegressor};

use crate::config::{RegressorKind, RegressorSpec};
use crate::error::Result;

/// A configured regressor. Tree regressors expose their step traces.
pub enum Model {
    Tree(TreeRegressor),
    Feature(FeatureRegressor),
}

/// Tree configuration for `spec` on a stream of dimension `p` bounded by `bound`.
pub fn tree_config(spec: &RegressorSpec, p: usize, bound: f64) -> TreeConfig {
    let cfg = TreeConfig::new(p, bound)
        .with_delta(spec.delta)
        .with_depth_cap(spec.depth_cap);
    match spec.a {
        Some(a) => cfg.with_a(a),
        None => cfg,
    }
}

impl Model {
    pub fn build(spec: &RegressorSpec, p: usize, bound: f64) -> Result<Self> {
        let feature = |kind| -> Result<Model> {
            Ok(Model::Feature(FeatureRegressor::new(FeatureMap::new(kind, p), spec.delta)?))
        };
        match spec.kind {
            RegressorKind::Idt => Ok(Model::Tree(TreeRegressor::incremental(tree_config(spec, p, bound))?)),
            RegressorKind::Ctw(depth) => {
                let cfg = tree_config(spec, p, bound);
                cfg.validate()?;
                Ok(Model::Tree(fixed_tree_regressor(depth, cfg)?))
            }
            RegressorKind::Lr => feature(FeatureKind::Identity),
            RegressorKind::Vsr => feature(FeatureKind::Volterra2),
            RegressorKind::Fnr(order) => feature(FeatureKind::Fourier { order }),
        }
    }

    /// One online step; the trace is returned for tree regressors.
    pub fn step(&mut self, x: &[f64], d: f64) -> Result<(f64, Option<StepTrace>)> {
        match self {
            Model::Tree(r) => {
                let tr = r.step(x, d)?;
                Ok((tr.prediction, Some(tr)))
            }
            Model::Feature(r) => Ok((r.step(x, d)?, None)),
        }
    }

    pub fn touched_nodes(&self) -> Option<usize> {
        match self {
            Model::Tree(r) => OnlineRegressor::touched_nodes(r),
            Model::Feature(_) => None,
        }
    }

    pub fn tree(&self) -> Option<&TreeRegressor> {
        match self {
            Model::Tree(r) => Some(r),
            Model::Feature(_) => None,
        }
    }
}
