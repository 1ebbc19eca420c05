use crate::error::Result;

/// Sequential regressor: predicts `d[t]` from `x[t]`, then learns from the
/// revealed `d[t]`.
pub trait OnlineRegressor {
    fn name(&self) -> String;

    /// Predicts for `x`, then updates with `d`. Returns the prediction made
    /// before `d` was used.
    fn step(&mut self, x: &[f64], d: f64) -> Result<f64>;

    /// Number of tree nodes visited by the latest step, for tree models.
    fn touched_nodes(&self) -> Option<usize> {
        None
    }
}

impl<R: OnlineRegressor + ?Sized> OnlineRegressor for Box<R> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn step(&mut self, x: &[f64], d: f64) -> Result<f64> {
        (**self).step(x, d)
    }

    fn touched_nodes(&self) -> Option<usize> {
        (**self).touched_nodes()
    }
}
