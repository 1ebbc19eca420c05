//! Seeded data sources, time-series embedding and CSV ingestion.
//!
//! All randomness goes through a `ChaCha8Rng` seeded from a `u64`, and
//! Gaussian draws use the ziggurat sampler of `rand_distr::StandardNormal`, so
//! a seed fully determines a stream.

mod csv_io;
mod maps;
mod ode;
mod streams;

pub use csv_io::{format_decimal, load_csv, write_series_csv, write_stream_csv, TargetColumn};
pub use maps::{gen_duffing, gen_tinkerbell, DuffingParams, TinkerbellParams};
pub use ode::{chua_nonlinearity, gen_chua, gen_mackey_glass, rk4_step, ChuaParams, MackeyGlassParams};
pub use streams::{
    gen_constant, gen_forced_split, gen_sine, gen_synthetic, gen_uniform, synthetic_target,
    SYNTHETIC_NOISE_VARIANCE,
};

use crate::error::{Error, Result};

/// Magnitude beyond which an iterated map or ODE is declared divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e3;

/// Name, parameters and seed of a generated series.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SeriesMeta {
    pub generator: String,
    pub params: Vec<(String, f64)>,
    pub seed: Option<u64>,
}

/// A sampled (possibly multi-component) time series.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    /// One entry per time step, each holding every state component.
    pub values: Vec<Vec<f64>>,
    pub components: Vec<String>,
    /// Sampling interval for integrated systems.
    pub dt: Option<f64>,
    pub meta: SeriesMeta,
}

impl Series {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// One scalar component over time.
    pub fn component(&self, index: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[index]).collect()
    }
}

/// Ordered `(x, d)` pairs with `|x_i|, |d| <= bound`.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionStream {
    pub pairs: Vec<(Vec<f64>, f64)>,
    pub p: usize,
    pub bound: f64,
}

impl RegressionStream {
    /// Builds a stream whose bound is the largest magnitude it contains.
    pub fn with_tight_bound(pairs: Vec<(Vec<f64>, f64)>, p: usize) -> Self {
        let bound = pairs
            .iter()
            .flat_map(|(x, d)| x.iter().chain(std::iter::once(d)))
            .fold(0.0f64, |m, v| m.max(v.abs()));
        Self {
            pairs,
            p,
            bound: if bound > 0.0 { bound } else { 1.0 },
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn truncate(&mut self, n: usize) {
        self.pairs.truncate(n);
    }

    pub fn within_bound(&self) -> bool {
        self.pairs
            .iter()
            .all(|(x, d)| d.abs() <= self.bound && x.iter().all(|v| v.abs() <= self.bound))
    }
}

/// Affine map of `[min, max]` onto `[-1, 1]`; `None` for a constant column.
pub fn minmax(values: &[f64]) -> Option<(f64, f64)> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    (hi > lo).then_some((lo, hi))
}

/// Min-max normalizes to `[-1, 1]` and clips round-off; constant input maps to 0.
pub fn normalize(values: &[f64]) -> Vec<f64> {
    match minmax(values) {
        Some((lo, hi)) => values
            .iter()
            .map(|&v| (2.0 * (v - lo) / (hi - lo) - 1.0).clamp(-1.0, 1.0))
            .collect(),
        None => vec![0.0; values.len()],
    }
}

/// Delay embedding of one component: `x[t] = (s[t-1], …, s[t-p])`, `d[t] = s[t]`,
/// after min-max normalizing the component to `[-1, 1]`.
pub fn embed_series(series: &Series, p: usize, component: usize) -> Result<RegressionStream> {
    if p == 0 {
        return Err(Error::Config("embedding order must be positive".into()));
    }
    if component >= series.components.len() {
        return Err(Error::Config(format!(
            "component {component} out of range ({} components)",
            series.components.len()
        )));
    }
    if series.len() < p + 1 {
        return Err(Error::Data(format!(
            "series of length {} is too short for embedding order {p}",
            series.len()
        )));
    }
    let s = normalize(&series.component(component));
    Ok(RegressionStream {
        pairs: embed_raw(&s, p),
        p,
        bound: 1.0,
    })
}

pub(crate) fn embed_raw(s: &[f64], p: usize) -> Vec<(Vec<f64>, f64)> {
    (p..s.len())
        .map(|t| ((1..=p).map(|k| s[t - k]).collect(), s[t]))
        .collect()
}

pub(crate) fn check_finite(name: &str, step: usize, values: &[f64]) -> Result<()> {
    if values.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT) {
        return Err(Error::Divergence(format!(
            "{name} left |x| <= {DIVERGENCE_LIMIT} at step {step}: {values:?}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_series(v: &[f64]) -> Series {
        Series {
            values: v.iter().map(|&x| vec![x]).collect(),
            components: vec!["x".into()],
            dt: None,
            meta: SeriesMeta::default(),
        }
    }

    #[test]
    fn embedding_by_construction() {
        let pairs = embed_raw(&[1.0, 2.0, 3.0, 4.0], 2);
        assert_eq!(pairs, vec![(vec![2.0, 1.0], 3.0), (vec![3.0, 2.0], 4.0)]);
    }

    #[test]
    fn constant_series_embeds_constant() {
        let pairs = embed_raw(&[0.7; 6], 3);
        assert!(pairs.iter().all(|(x, d)| *d == 0.7 && x.iter().all(|&v| v == 0.7)));
        let stream = embed_series(&scalar_series(&[0.7; 6]), 3, 0).unwrap();
        assert!(stream.pairs.iter().all(|(x, d)| *d == 0.0 && x.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn normalization_endpoints() {
        let n = normalize(&[3.0, -2.0, 8.0, 0.5]);
        assert_eq!(n[1], -1.0);
        assert_eq!(n[2], 1.0);
        assert!(n.iter().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn embedding_errors() {
        let s = scalar_series(&[1.0, 2.0]);
        assert!(matches!(embed_series(&s, 2, 0), Err(Error::Data(_))));
        assert!(matches!(embed_series(&s, 0, 0), Err(Error::Config(_))));
        assert!(matches!(embed_series(&s, 1, 3), Err(Error::Config(_))));
    }
}
