use idt::datagen::{self, RegressionStream, Series, TargetColumn};

use crate::config::{SourceConfig, DEFAULT_N};
use crate::error::{BenchError, Result};

/// A materialized data source: the regression stream and, for generated
/// time series, the raw series it was embedded from.
#[derive(Clone, Debug)]
pub struct SourceData {
    pub stream: RegressionStream,
    pub series: Option<Series>,
}

/// Builds `n` pairs (default [`DEFAULT_N`]; every row for CSV input).
pub fn build_source(source: &SourceConfig, n: Option<usize>, seed: u64) -> Result<SourceData> {
    let len = n.unwrap_or(DEFAULT_N);
    let embedded = |series: Series, p: usize, component: usize| -> Result<SourceData> {
        let stream = datagen::embed_series(&series, p, component)?;
        Ok(SourceData {
            stream,
            series: Some(series),
        })
    };
    let plain = |stream: RegressionStream| Ok(SourceData { stream, series: None });
    match source {
        SourceConfig::Synthetic => plain(datagen::gen_synthetic(len, seed)?),
        SourceConfig::Sine { noise_variance } => plain(datagen::gen_sine(len, *noise_variance, seed)?),
        SourceConfig::Uniform { p } => plain(datagen::gen_uniform(len, *p, seed)?),
        SourceConfig::Constant { p, x, d } => plain(datagen::gen_constant(len, *p, *x, *d)?),
        SourceConfig::ForcedSplit { p } => plain(datagen::gen_forced_split(len, *p, seed)?),
        SourceConfig::Duffing { a, b, init, embedding } => {
            let params = datagen::DuffingParams { a: *a, b: *b, init: *init };
            embedded(datagen::gen_duffing(len + embedding, params)?, *embedding, 0)
        }
        SourceConfig::Tinkerbell {
            params,
            init,
            embedding,
            component,
        } => {
            let [a, b, c, d] = *params;
            let params = datagen::TinkerbellParams { a, b, c, d, init: *init };
            embedded(datagen::gen_tinkerbell(len + embedding, params)?, *embedding, *component)
        }
        SourceConfig::MackeyGlass {
            beta,
            gamma,
            tau,
            order,
            h,
            x0,
            embedding,
        } => {
            let params = datagen::MackeyGlassParams {
                beta: *beta,
                gamma: *gamma,
                tau: *tau,
                order: *order,
                h: *h,
                x0: *x0,
            };
            embedded(datagen::gen_mackey_glass(len + embedding, params)?, *embedding, 0)
        }
        SourceConfig::Chua {
            alpha,
            beta,
            m0,
            m1,
            h,
            init,
            embedding,
            component,
        } => {
            let params = datagen::ChuaParams {
                alpha: *alpha,
                beta: *beta,
                m0: *m0,
                m1: *m1,
                h: *h,
                init: *init,
            };
            embedded(datagen::gen_chua(len + embedding, params)?, *embedding, *component)
        }
        SourceConfig::Csv { path, target } => {
            let target = target.clone().map_or(TargetColumn::Last, TargetColumn::Name);
            let mut stream = datagen::load_csv(path, &target).map_err(|e| match e {
                idt::Error::Config(m) => BenchError::Config(m),
                other => BenchError::Data(other.to_string()),
            })?;
            if let Some(n) = n {
                if n > stream.len() {
                    return Err(BenchError::Data(format!(
                        "{} has {} rows, {n} requested",
                        path.display(),
                        stream.len()
                    )));
                }
                stream.truncate(n);
            }
            plain(stream)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_sources_have_requested_length() {
        for kind in ["synthetic", "sine", "uniform", "constant", "forced_split", "duffing", "tinkerbell", "mackey_glass", "chua"] {
            let src = SourceConfig::with_defaults(kind).unwrap();
            let data = build_source(&src, Some(300), 1).unwrap();
            assert_eq!(data.stream.len(), 300, "{kind}");
            assert!(data.stream.within_bound(), "{kind}");
        }
    }

    #[test]
    fn missing_csv_is_a_data_error() {
        let src = SourceConfig::Csv {
            path: "/nonexistent.csv".into(),
            target: None,
        };
        assert!(matches!(build_source(&src, None, 0), Err(BenchError::Data(_))));
    }
}
