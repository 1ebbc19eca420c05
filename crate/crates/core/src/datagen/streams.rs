use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::RegressionStream;
use crate::error::{Error, Result};

pub const SYNTHETIC_NOISE_VARIANCE: f64 = 0.1;

/// Noise-free part of the piecewise linear synthetic model: `x1 + x2` on the
/// disk `|x|² <= 0.1` and the annulus `0.5 <= |x|² <= 1`, `-x1 - x2` elsewhere.
pub fn synthetic_target(x: &[f64]) -> f64 {
    let r2 = x[0] * x[0] + x[1] * x[1];
    if r2 <= 0.1 || (0.5..=1.0).contains(&r2) {
        x[0] + x[1]
    } else {
        -x[0] - x[1]
    }
}

fn require_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Config("stream length must be positive".into()));
    }
    Ok(())
}

/// Standard Gaussian regressors in two dimensions with the synthetic target
/// plus Gaussian noise of variance 0.1. Values are not rescaled; the bound is
/// the largest magnitude in the stream.
pub fn gen_synthetic(n: usize, seed: u64) -> Result<RegressionStream> {
    require_n(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sd = SYNTHETIC_NOISE_VARIANCE.sqrt();
    let pairs = (0..n)
        .map(|_| {
            let x: Vec<f64> = (0..2).map(|_| rng.sample(StandardNormal)).collect();
            let noise: f64 = rng.sample(StandardNormal);
            let d = synthetic_target(&x) + sd * noise;
            (x, d)
        })
        .collect();
    Ok(RegressionStream::with_tight_bound(pairs, 2))
}

/// `x ~ U[-1, 1]`, `d = sin(πx) + noise` with the given noise variance.
pub fn gen_sine(n: usize, noise_variance: f64, seed: u64) -> Result<RegressionStream> {
    require_n(n)?;
    if noise_variance.is_nan() || noise_variance < 0.0 {
        return Err(Error::Config("noise variance must be nonnegative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sd = noise_variance.sqrt();
    let pairs = (0..n)
        .map(|_| {
            let x: f64 = rng.random_range(-1.0..=1.0);
            let noise: f64 = rng.sample(StandardNormal);
            (vec![x], (PI * x).sin() + sd * noise)
        })
        .collect();
    Ok(RegressionStream::with_tight_bound(pairs, 1))
}

/// Regressors and targets i.i.d. uniform on `[-1, 1]`.
pub fn gen_uniform(n: usize, p: usize, seed: u64) -> Result<RegressionStream> {
    require_n(n)?;
    if p == 0 {
        return Err(Error::Config("dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = (0..n)
        .map(|_| {
            let x = (0..p).map(|_| rng.random_range(-1.0..=1.0)).collect();
            (x, rng.random_range(-1.0..=1.0))
        })
        .collect();
    Ok(RegressionStream { pairs, p, bound: 1.0 })
}

/// Every sample at the same point, so the incremental tree splits on every
/// step after the first.
pub fn gen_constant(n: usize, p: usize, x: f64, d: f64) -> Result<RegressionStream> {
    require_n(n)?;
    if !(x.abs() <= 1.0 && d.abs() <= 1.0) {
        return Err(Error::Config("constant stream values must lie in [-1, 1]".into()));
    }
    Ok(RegressionStream {
        pairs: vec![(vec![x; p], d); n],
        p,
        bound: 1.0,
    })
}

/// A fixed regressor with uniform random targets: each step lands on the
/// light leaf grown by the previous one and forces a split.
pub fn gen_forced_split(n: usize, p: usize, seed: u64) -> Result<RegressionStream> {
    require_n(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let pairs = (0..n).map(|_| (x.clone(), rng.random_range(-1.0..=1.0))).collect();
    Ok(RegressionStream { pairs, p, bound: 1.0 })
}
