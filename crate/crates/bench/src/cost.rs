use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use idt::DepthCap;
use serde::Serialize;

use crate::config::{ExperimentConfig, RegressorKind, RegressorSpec};
use crate::error::Result;
use crate::models::Model;
use crate::source::build_source;

/// Mean cost over the steps `t` in `[2^k, 2^(k+1))`.
#[derive(Clone, Debug, Serialize)]
pub struct CostWindow {
    pub k: u32,
    pub mean_touched: f64,
    pub mean_nanos: f64,
}

/// Least-squares line `y = intercept + slope * k`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AffineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn affine_fit(xs: &[f64], ys: &[f64]) -> AffineFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    AffineFit {
        slope,
        intercept,
        r_squared,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CostProfile {
    pub name: String,
    #[serde(skip)]
    pub touched: Vec<u32>,
    #[serde(skip)]
    pub nanos: Vec<u64>,
    pub windows: Vec<CostWindow>,
    /// Fit of mean touched nodes against `k`.
    pub fit: Option<AffineFit>,
    /// Whether `touched(t) == t` at every step.
    pub linear_worst_case: bool,
}

/// Complete dyadic windows of `values` (indexed by `t - 1`).
pub fn dyadic_means(values: &[f64]) -> Vec<(u32, f64)> {
    (0..usize::BITS)
        .map(|k| (k, 1usize << k, (1usize << (k + 1)) - 1))
        .take_while(|&(_, _, hi)| hi <= values.len())
        .map(|(k, lo, hi)| (k, values[lo - 1..hi].iter().sum::<f64>() / (hi - lo + 1) as f64))
        .collect()
}

fn profile_specs(config: &ExperimentConfig) -> Vec<RegressorSpec> {
    let trees: Vec<RegressorSpec> = config.regressors.iter().filter(|r| r.is_tree()).cloned().collect();
    if trees.is_empty() {
        let mut spec = RegressorSpec::new(RegressorKind::Idt);
        spec.depth_cap = DepthCap::CeilLog2;
        vec![spec]
    } else {
        trees
    }
}

/// Per-step touched-node counts and wall time of every tree regressor.
pub fn cost_profile(config: &ExperimentConfig) -> Result<Vec<CostProfile>> {
    config.validate()?;
    let stream = build_source(&config.source, config.n, config.seed)?.stream;
    profile_specs(config)
        .iter()
        .map(|spec| {
            let mut model = Model::build(spec, stream.p, stream.bound)?;
            let mut touched = Vec::with_capacity(stream.len());
            let mut nanos = Vec::with_capacity(stream.len());
            for (x, d) in &stream.pairs {
                let start = Instant::now();
                model.step(x, *d)?;
                nanos.push(start.elapsed().as_nanos() as u64);
                touched.push(model.touched_nodes().unwrap_or(0) as u32);
            }
            let tf: Vec<f64> = touched.iter().map(|&v| v as f64).collect();
            let nf: Vec<f64> = nanos.iter().map(|&v| v as f64).collect();
            let windows: Vec<CostWindow> = dyadic_means(&tf)
                .into_iter()
                .zip(dyadic_means(&nf))
                .map(|((k, mean_touched), (_, mean_nanos))| CostWindow {
                    k,
                    mean_touched,
                    mean_nanos,
                })
                .collect();
            let fit = (windows.len() >= 2).then(|| {
                let ks: Vec<f64> = windows.iter().map(|w| w.k as f64).collect();
                let ys: Vec<f64> = windows.iter().map(|w| w.mean_touched).collect();
                affine_fit(&ks, &ys)
            });
            Ok(CostProfile {
                name: spec.name(),
                linear_worst_case: touched.iter().enumerate().all(|(i, &c)| c as usize == i + 1),
                touched,
                nanos,
                windows,
                fit,
            })
        })
        .collect()
}

pub fn write_cost_outputs(config: &ExperimentConfig, profiles: &[CostProfile], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut f = BufWriter::new(File::create(dir.join("cost.csv"))?);
    let header: Vec<String> = profiles
        .iter()
        .flat_map(|p| [format!("{}_touched", p.name), format!("{}_ns", p.name)])
        .collect();
    writeln!(f, "t,{}", header.join(","))?;
    let n = profiles.first().map_or(0, |p| p.touched.len());
    for t in 0..n {
        write!(f, "{}", t + 1)?;
        for p in profiles {
            write!(f, ",{},{}", p.touched[t], p.nanos[t])?;
        }
        writeln!(f)?;
    }
    f.flush()?;
    fs::write(
        dir.join("cost_summary.json"),
        serde_json::to_string_pretty(profiles).expect("summary serializes") + "\n",
    )?;
    fs::write(dir.join("config.toml"), config.to_toml())?;
    Ok(())
}
