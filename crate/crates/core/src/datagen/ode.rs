use super::{check_finite, Series, SeriesMeta};
use crate::error::{Error, Result};

/// One classical Runge-Kutta step of an autonomous system `y' = f(y)`.
pub fn rk4_step(f: impl Fn(&[f64]) -> Vec<f64>, y: &[f64], h: f64) -> Vec<f64> {
    let shift = |base: &[f64], k: &[f64], s: f64| -> Vec<f64> {
        base.iter().zip(k).map(|(b, k)| b + s * k).collect()
    };
    let k1 = f(y);
    let k2 = f(&shift(y, &k1, h / 2.0));
    let k3 = f(&shift(y, &k2, h / 2.0));
    let k4 = f(&shift(y, &k3, h));
    (0..y.len())
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MackeyGlassParams {
    pub beta: f64,
    pub gamma: f64,
    pub tau: f64,
    /// Exponent of the delayed term.
    pub order: f64,
    pub h: f64,
    /// Value of `x(t)` for `t <= 0`.
    pub x0: f64,
}

impl Default for MackeyGlassParams {
    fn default() -> Self {
        Self {
            beta: 2.0,
            gamma: 1.0,
            tau: 2.0,
            order: 10.0,
            h: 0.1,
            x0: 0.5,
        }
    }
}

impl MackeyGlassParams {
    pub fn derivative(&self, x: f64, delayed: f64) -> f64 {
        self.beta * delayed / (1.0 + delayed.powf(self.order)) - self.gamma * x
    }

    fn delay_steps(&self) -> Result<usize> {
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::Config(format!("step size must be positive, got {}", self.h)));
        }
        let ratio = self.tau / self.h;
        let m = ratio.round();
        if !(m >= 1.0 && (ratio - m).abs() <= 1e-9 * ratio.max(1.0)) {
            return Err(Error::Config(format!(
                "delay {} is not a positive integer multiple of the step {}",
                self.tau, self.h
            )));
        }
        Ok(m as usize)
    }
}

/// Mackey-Glass delay equation integrated by RK4, one sample per step
/// starting at `x(0) = x0`.
///
/// Stage values of the delayed term fall on the grid (full steps) or halfway
/// between two grid points (half steps). The latter use the cubic Hermite
/// interpolant of the stored states and derivatives, which keeps the scheme
/// fourth order; a linear interpolant would cap it at second order.
pub fn gen_mackey_glass(n: usize, params: MackeyGlassParams) -> Result<Series> {
    let m = params.delay_steps()?;
    if n == 0 {
        return Err(Error::Config("mackey-glass series needs n >= 1".into()));
    }
    let h = params.h;
    let mut xs = Vec::with_capacity(n);
    let mut fs: Vec<f64> = Vec::with_capacity(n);
    xs.push(params.x0);
    let delayed_at = |xs: &[f64], k: isize| if k < 0 { params.x0 } else { xs[k as usize] };
    for k in 0..n - 1 {
        let x = xs[k];
        let back = k as isize - m as isize;
        let d0 = delayed_at(&xs, back);
        let d1 = delayed_at(&xs, back + 1);
        let k1 = params.derivative(x, d0);
        fs.push(k1);
        let dmid = if back < 0 {
            params.x0
        } else {
            let b = back as usize;
            0.5 * (xs[b] + xs[b + 1]) + h / 8.0 * (fs[b] - fs[b + 1])
        };
        let k2 = params.derivative(x + 0.5 * h * k1, dmid);
        let k3 = params.derivative(x + 0.5 * h * k2, dmid);
        let k4 = params.derivative(x + h * k3, d1);
        let next = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        check_finite("mackey-glass", k + 1, &[next])?;
        xs.push(next);
    }
    Ok(Series {
        values: xs.into_iter().map(|v| vec![v]).collect(),
        components: vec!["x".into()],
        dt: Some(h),
        meta: SeriesMeta {
            generator: "mackey_glass".into(),
            params: vec![
                ("beta".into(), params.beta),
                ("gamma".into(), params.gamma),
                ("tau".into(), params.tau),
                ("order".into(), params.order),
                ("h".into(), h),
                ("x0".into(), params.x0),
            ],
            seed: None,
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChuaParams {
    pub alpha: f64,
    pub beta: f64,
    pub m0: f64,
    pub m1: f64,
    pub h: f64,
    pub init: [f64; 3],
}

impl Default for ChuaParams {
    fn default() -> Self {
        Self {
            alpha: 15.6,
            beta: 28.0,
            m0: -1.143,
            m1: -0.714,
            h: 0.1,
            init: [0.7, 0.0, 0.0],
        }
    }
}

/// Piecewise-linear diode characteristic of Chua's circuit.
pub fn chua_nonlinearity(x: f64, m0: f64, m1: f64) -> f64 {
    m1 * x + 0.5 * (m0 - m1) * ((x + 1.0).abs() - (x - 1.0).abs())
}

/// Chua's circuit integrated by RK4, `n` samples of `(x, y, z)`.
pub fn gen_chua(n: usize, params: ChuaParams) -> Result<Series> {
    if !(params.h.is_finite() && params.h > 0.0) {
        return Err(Error::Config(format!("step size must be positive, got {}", params.h)));
    }
    if n == 0 {
        return Err(Error::Config("chua series needs n >= 1".into()));
    }
    let ChuaParams { alpha, beta, m0, m1, h, init } = params;
    let field = |s: &[f64]| {
        vec![
            alpha * (s[1] - s[0] - chua_nonlinearity(s[0], m0, m1)),
            s[0] - s[1] + s[2],
            -beta * s[1],
        ]
    };
    let mut values = Vec::with_capacity(n);
    values.push(init.to_vec());
    for t in 1..n {
        let next = rk4_step(field, &values[t - 1], h);
        check_finite("chua", t, &next)?;
        values.push(next);
    }
    Ok(Series {
        values,
        components: vec!["x".into(), "y".into(), "z".into()],
        dt: Some(h),
        meta: SeriesMeta {
            generator: "chua".into(),
            params: vec![
                ("alpha".into(), alpha),
                ("beta".into(), beta),
                ("m0".into(), m0),
                ("m1".into(), m1),
                ("h".into(), h),
                ("x0".into(), init[0]),
                ("y0".into(), init[1]),
                ("z0".into(), init[2]),
            ],
            seed: None,
        },
    })
}
