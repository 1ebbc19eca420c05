//! Per-node regularized least squares.
//!
//! Each node of the tree carries an [`RlsState`]: the regularized
//! second-moment matrix `R = δI + Σ x xᵀ`, its inverse maintained by rank-one
//! updates, and the weight vector `w = R⁻¹ Σ d x`. The update is exact
//! recursive least squares, so after any prefix of a stream the weights equal
//! the ridge solution computed in batch by [`rls_batch_oracle`].

use nalgebra::{DMatrix, DVector};

/// Number of rank-one updates between direct re-inversions of `R`.
pub const REFRESH_INTERVAL: u64 = 1024;

/// Frobenius drift of `R⁻¹ R` from the identity that triggers a refresh.
pub const DRIFT_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct RlsState {
    rreg: DMatrix<f64>,
    rinv: DMatrix<f64>,
    w: DVector<f64>,
    updates: u64,
}

impl RlsState {
    pub fn new(dim: usize, delta: f64) -> Self {
        assert!(delta > 0.0, "regularizer must be positive");
        Self {
            rreg: DMatrix::identity(dim, dim) * delta,
            rinv: DMatrix::identity(dim, dim) / delta,
            w: DVector::zeros(dim),
            updates: 0,
        }
    }

    /// Rebuilds a state from stored parts (checkpoint loading).
    pub fn from_parts(rreg: DMatrix<f64>, rinv: DMatrix<f64>, w: DVector<f64>, updates: u64) -> Self {
        Self {
            rreg,
            rinv,
            w,
            updates,
        }
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.w
    }

    pub fn regularized_moment(&self) -> &DMatrix<f64> {
        &self.rreg
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.rinv
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// `w · x` with the current weights.
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.w.iter().zip(x).map(|(w, x)| w * x).sum()
    }

    /// Adds `(x, d)`: `R += x xᵀ`, then `w += R⁻¹ x (d - w·x)` with the
    /// pre-update `w` in the residual.
    pub fn update(&mut self, x: &[f64], d: f64) {
        debug_assert_eq!(x.len(), self.dim());
        if x.iter().all(|&v| v == 0.0) {
            return;
        }
        let xv = DVector::from_column_slice(x);
        let residual = d - self.w.dot(&xv);

        // Sherman-Morrison: (R + x xᵀ)⁻¹ x = R⁻¹ x / (1 + xᵀ R⁻¹ x)
        let rx = &self.rinv * &xv;
        let denom = 1.0 + xv.dot(&rx);
        self.rinv.ger(-1.0 / denom, &rx, &rx, 1.0);
        self.rreg.ger(1.0, &xv, &xv, 1.0);
        self.w.axpy(residual / denom, &rx, 1.0);

        self.updates += 1;
        if self.updates.is_multiple_of(REFRESH_INTERVAL) {
            self.refresh();
        }
    }

    /// `‖R⁻¹ R - I‖_F`.
    pub fn inverse_drift(&self) -> f64 {
        let n = self.dim();
        (&self.rinv * &self.rreg - DMatrix::<f64>::identity(n, n)).norm()
    }

    /// Recomputes `R⁻¹` directly from `R`.
    pub fn refresh(&mut self) {
        if let Some(chol) = self.rreg.clone().cholesky() {
            self.rinv = chol.inverse();
        }
    }

    /// Refreshes the inverse if it drifted beyond `tol`; returns whether it did.
    pub fn refresh_if_drifted(&mut self, tol: f64) -> bool {
        if self.inverse_drift() > tol {
            self.refresh();
            true
        } else {
            false
        }
    }

    #[cfg(test)]
    pub(crate) fn corrupt_inverse(&mut self, eps: f64) {
        self.rinv[(0, 0)] += eps;
    }
}

/// Ridge regression solved directly: `v* = (Σ x xᵀ + δI)⁻¹ Σ d x` and
/// `loss* = Σ (d - v*·x)² + δ‖v*‖²`.
pub fn rls_batch_oracle(samples: &[(Vec<f64>, f64)], delta: f64) -> (DVector<f64>, f64) {
    assert!(!samples.is_empty(), "batch oracle needs at least one sample");
    let p = samples[0].0.len();
    let mut r = DMatrix::<f64>::identity(p, p) * delta;
    let mut b = DVector::<f64>::zeros(p);
    for (x, d) in samples {
        let xv = DVector::from_column_slice(x);
        r.ger(1.0, &xv, &xv, 1.0);
        b.axpy(*d, &xv, 1.0);
    }
    let v = r
        .lu()
        .solve(&b)
        .expect("regularized moment matrix is positive definite");
    let loss = samples
        .iter()
        .map(|(x, d)| {
            let e = d - v.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
            e * e
        })
        .sum::<f64>()
        + delta * v.norm_squared();
    (v, loss)
}

/// Sufficient statistics for the ridge loss of one region.
#[derive(Clone, Debug)]
pub struct RidgeStats {
    xx: DMatrix<f64>,
    dx: DVector<f64>,
    dd: f64,
    count: usize,
}

impl RidgeStats {
    pub fn new(p: usize) -> Self {
        Self {
            xx: DMatrix::zeros(p, p),
            dx: DVector::zeros(p),
            dd: 0.0,
            count: 0,
        }
    }

    pub fn add(&mut self, x: &[f64], d: f64) {
        let xv = DVector::from_column_slice(x);
        self.xx.ger(1.0, &xv, &xv, 1.0);
        self.dx.axpy(d, &xv, 1.0);
        self.dd += d * d;
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Minimum of `Σ (d - v·x)² + δ‖v‖²`, equal to `Σ d² - bᵀ (R + δI)⁻¹ b`.
    pub fn min_loss(&self, delta: f64) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        let p = self.dx.len();
        let r = &self.xx + DMatrix::<f64>::identity(p, p) * delta;
        let v = r
            .cholesky()
            .expect("regularized moment matrix is positive definite")
            .solve(&self.dx);
        (self.dd - self.dx.dot(&v)).max(0.0)
    }
}
