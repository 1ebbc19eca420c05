use super::{check_finite, Series, SeriesMeta};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DuffingParams {
    pub a: f64,
    pub b: f64,
    /// `(x[0], x[1])`.
    pub init: [f64; 2],
}

impl Default for DuffingParams {
    fn default() -> Self {
        Self {
            a: 2.75,
            b: 0.2,
            init: [0.1, 0.1],
        }
    }
}

/// `x[t+1] = a x[t] - x[t]³ - b x[t-1]`, `n` samples starting at `x[0]`.
pub fn gen_duffing(n: usize, params: DuffingParams) -> Result<Series> {
    if n < 2 {
        return Err(Error::Config("duffing series needs n >= 2".into()));
    }
    let DuffingParams { a, b, init } = params;
    let mut x = Vec::with_capacity(n);
    x.extend_from_slice(&init);
    for t in 1..n - 1 {
        let next = a * x[t] - x[t] * x[t] * x[t] - b * x[t - 1];
        check_finite("duffing", t + 1, &[next])?;
        x.push(next);
    }
    Ok(Series {
        values: x.into_iter().map(|v| vec![v]).collect(),
        components: vec!["x".into()],
        dt: None,
        meta: SeriesMeta {
            generator: "duffing".into(),
            params: vec![
                ("a".into(), a),
                ("b".into(), b),
                ("x0".into(), init[0]),
                ("x1".into(), init[1]),
            ],
            seed: None,
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TinkerbellParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// `(x[0], y[0])`.
    pub init: [f64; 2],
}

impl Default for TinkerbellParams {
    fn default() -> Self {
        Self {
            a: 0.9,
            b: -0.6013,
            c: 2.0,
            d: 0.5,
            init: [-0.72, -0.64],
        }
    }
}

impl TinkerbellParams {
    pub fn step(&self, x: f64, y: f64) -> (f64, f64) {
        (
            x * x - y * y + self.a * x + self.b * y,
            2.0 * x * y + self.c * x + self.d * y,
        )
    }
}

/// Tinkerbell map, `n` samples of `(x, y)` starting at the initial point.
pub fn gen_tinkerbell(n: usize, params: TinkerbellParams) -> Result<Series> {
    if n == 0 {
        return Err(Error::Config("tinkerbell series needs n >= 1".into()));
    }
    let mut values = Vec::with_capacity(n);
    let [mut x, mut y] = params.init;
    values.push(vec![x, y]);
    for t in 1..n {
        (x, y) = params.step(x, y);
        check_finite("tinkerbell", t, &[x, y])?;
        values.push(vec![x, y]);
    }
    Ok(Series {
        values,
        components: vec!["x".into(), "y".into()],
        dt: None,
        meta: SeriesMeta {
            generator: "tinkerbell".into(),
            params: vec![
                ("a".into(), params.a),
                ("b".into(), params.b),
                ("c".into(), params.c),
                ("d".into(), params.d),
                ("x0".into(), params.init[0]),
                ("y0".into(), params.init[1]),
            ],
            seed: None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duffing_fixed_point() {
        let s = gen_duffing(50, DuffingParams { init: [0.0, 0.0], ..Default::default() }).unwrap();
        assert!(s.values.iter().all(|v| v[0] == 0.0));
    }

    #[test]
    fn duffing_one_step() {
        let s = gen_duffing(3, DuffingParams::default()).unwrap();
        // 2.75 * 0.1 - 0.001 - 0.02
        assert!((s.values[2][0] - 0.254).abs() < 1e-15);
    }

    #[test]
    fn duffing_orbit_is_bounded_and_aperiodic() {
        let s = gen_duffing(10_000, DuffingParams::default()).unwrap();
        let xs = s.component(0);
        assert!(xs.iter().all(|v| v.abs() < 10.0));
        let tail = &xs[5000..];
        for period in 1..=64 {
            let repeats = (0..1000).all(|i| (tail[i] - tail[i + period]).abs() < 1e-9);
            assert!(!repeats, "orbit looks periodic with period {period}");
        }
    }

    #[test]
    fn tinkerbell_fixed_point_and_step() {
        let p = TinkerbellParams::default();
        assert_eq!(p.step(0.0, 0.0), (0.0, 0.0));
        let (x, y) = p.step(0.1, 0.1);
        assert!((x - 0.02987).abs() < 1e-15);
        assert!((y - 0.27).abs() < 1e-15);
        assert_eq!((p.a, p.b, p.c, p.d), (0.9, -0.6013, 2.0, 0.5));
    }

    #[test]
    fn tinkerbell_default_orbit_is_bounded() {
        let s = gen_tinkerbell(20_000, TinkerbellParams::default()).unwrap();
        assert!(s.values.iter().all(|v| v[0].abs() < 3.0 && v[1].abs() < 3.0));
    }
}
