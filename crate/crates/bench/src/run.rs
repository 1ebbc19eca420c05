use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use idt::datagen::{format_decimal, RegressionStream};
use idt::trace::write_trace_csv;
use idt::StepTrace;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, RegressorSpec};
use crate::error::{BenchError, Result};
use crate::models::{tree_config, Model};
use crate::source::build_source;

/// Result of running one regressor over one stream.
#[derive(Clone, Debug)]
pub struct RegressorRun {
    pub name: String,
    /// Cumulative squared error after each step.
    pub cumulative: Vec<f64>,
    pub touched: Option<Vec<u32>>,
    pub wall_seconds: f64,
    /// Hex SHA-256 of every `(x, d)` consumed, in order.
    pub input_hash: String,
    pub traces: Option<Vec<StepTrace>>,
}

/// Runs `spec` over the whole stream.
pub fn run_regressor(spec: &RegressorSpec, stream: &RegressionStream, keep_traces: bool) -> Result<RegressorRun> {
    let mut model = Model::build(spec, stream.p, stream.bound)?;
    let mut hasher = Sha256::new();
    let mut cumulative = Vec::with_capacity(stream.len());
    let mut touched = spec.is_tree().then(|| Vec::with_capacity(stream.len()));
    let mut traces = (keep_traces && spec.is_tree()).then(Vec::new);
    let mut acc = 0.0;
    let start = Instant::now();
    for (x, d) in &stream.pairs {
        for v in x {
            hasher.update(v.to_le_bytes());
        }
        hasher.update(d.to_le_bytes());
        let (pred, trace) = model.step(x, *d)?;
        acc += (d - pred) * (d - pred);
        cumulative.push(acc);
        if let (Some(t), Some(n)) = (touched.as_mut(), model.touched_nodes()) {
            t.push(n as u32);
        }
        if let (Some(ts), Some(tr)) = (traces.as_mut(), trace) {
            ts.push(tr);
        }
    }
    Ok(RegressorRun {
        name: spec.name(),
        cumulative,
        touched,
        wall_seconds: start.elapsed().as_secs_f64(),
        input_hash: hasher.finalize().iter().map(|b| format!("{b:02x}")).collect(),
        traces,
    })
}

/// Runs every regressor on one stream in parallel and checks that they all
/// consumed the same input.
pub fn run_all(specs: &[RegressorSpec], stream: &RegressionStream, keep_traces: bool) -> Result<Vec<RegressorRun>> {
    let runs = specs
        .par_iter()
        .map(|s| run_regressor(s, stream, keep_traces))
        .collect::<Result<Vec<_>>>()?;
    if let Some(first) = runs.first() {
        if let Some(bad) = runs.iter().find(|r| r.input_hash != first.input_hash) {
            return Err(BenchError::Data(format!(
                "regressors {} and {} saw different inputs",
                first.name, bad.name
            )));
        }
    }
    Ok(runs)
}

#[derive(Clone, Debug, Serialize)]
pub struct RegressorSummary {
    pub name: String,
    /// Tree loss scale used in the first trial.
    pub a: Option<f64>,
    pub final_normalized: f64,
    /// `(t, normalized error)` at powers of two and at `n`.
    pub checkpoints: Vec<(usize, f64)>,
    pub mean_touched: Option<f64>,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub source: String,
    pub n: usize,
    pub seeds: Vec<u64>,
    /// Bound `A` of each trial's stream.
    pub bounds: Vec<f64>,
    pub input_hashes: Vec<String>,
    pub regressors: Vec<RegressorSummary>,
    /// `normalized[r][t - 1]`: normalized error of regressor `r` at step `t`,
    /// averaged over trials.
    #[serde(skip)]
    pub normalized: Vec<Vec<f64>>,
    #[serde(skip)]
    pub touched: Vec<Option<Vec<u32>>>,
    #[serde(skip)]
    pub traces: Vec<(String, Vec<StepTrace>)>,
}

impl RunReport {
    pub fn names(&self) -> Vec<&str> {
        self.regressors.iter().map(|r| r.name.as_str()).collect()
    }

    pub fn final_normalized(&self, name: &str) -> Option<f64> {
        self.regressors.iter().find(|r| r.name == name).map(|r| r.final_normalized)
    }
}

/// Powers of two up to `n`, then `n`.
pub fn dyadic_checkpoints(n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..usize::BITS).map(|k| 1usize << k).take_while(|&t| t <= n).collect();
    if out.last() != Some(&n) && n > 0 {
        out.push(n);
    }
    out
}

/// Runs the experiment in memory: every trial, every regressor.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let seeds = config.seeds();
    let mut sums: Vec<Vec<f64>> = Vec::new();
    let mut wall = vec![0.0; config.regressors.len()];
    let mut bounds = Vec::new();
    let mut hashes = Vec::new();
    let mut touched = Vec::new();
    let mut traces = Vec::new();
    let mut n = 0;
    for (trial, &seed) in seeds.iter().enumerate() {
        let data = build_source(&config.source, config.n, seed)?;
        let stream = data.stream;
        if trial == 0 {
            n = stream.len();
            sums = vec![vec![0.0; n]; config.regressors.len()];
        } else if stream.len() != n {
            return Err(BenchError::Data("trials produced streams of different lengths".into()));
        }
        let runs = run_all(&config.regressors, &stream, config.trace && trial == 0)?;
        for (r, run) in runs.into_iter().enumerate() {
            for (t, c) in run.cumulative.iter().enumerate() {
                sums[r][t] += c / (t + 1) as f64;
            }
            wall[r] += run.wall_seconds;
            if trial == 0 {
                if let Some(ts) = run.traces {
                    traces.push((run.name.clone(), ts));
                }
                touched.push(run.touched);
            }
            if r == 0 {
                hashes.push(run.input_hash);
            }
        }
        bounds.push(stream.bound);
    }
    let k = seeds.len() as f64;
    let normalized: Vec<Vec<f64>> = sums.into_iter().map(|s| s.into_iter().map(|v| v / k).collect()).collect();

    let checkpoints = dyadic_checkpoints(n);
    let regressors = config
        .regressors
        .iter()
        .enumerate()
        .map(|(r, spec)| RegressorSummary {
            name: spec.name(),
            a: spec.is_tree().then(|| tree_config(spec, 1, bounds[0]).a),
            final_normalized: normalized[r][n - 1],
            checkpoints: checkpoints.iter().map(|&t| (t, normalized[r][t - 1])).collect(),
            mean_touched: touched[r]
                .as_ref()
                .map(|v| v.iter().map(|&c| c as f64).sum::<f64>() / v.len() as f64),
            wall_seconds: wall[r],
        })
        .collect();
    Ok(RunReport {
        source: config.source.name().into(),
        n,
        seeds,
        bounds,
        input_hashes: hashes,
        regressors,
        normalized,
        touched,
        traces,
    })
}

/// `t` followed by each regressor's normalized error, one row per step.
pub fn write_errors_csv(report: &RunReport, mut out: impl Write) -> Result<()> {
    writeln!(out, "t,{}", report.names().join(","))?;
    for t in 0..report.n {
        write!(out, "{}", t + 1)?;
        for series in &report.normalized {
            write!(out, ",{}", format_decimal(series[t]))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

fn write_touched_csv(report: &RunReport, mut out: impl Write) -> Result<()> {
    let cols: Vec<(&str, &Vec<u32>)> = report
        .names()
        .into_iter()
        .zip(&report.touched)
        .filter_map(|(n, t)| t.as_ref().map(|t| (n, t)))
        .collect();
    let header: Vec<&str> = cols.iter().map(|(n, _)| *n).collect();
    writeln!(out, "t,{}", header.join(","))?;
    for t in 0..report.n {
        let row: Vec<String> = cols.iter().map(|(_, v)| v[t].to_string()).collect();
        writeln!(out, "{},{}", t + 1, row.join(","))?;
    }
    Ok(())
}

pub const PLOT_SCRIPT: &str = r#"#!/usr/bin/env python3
"""Plots normalized accumulated squared error curves from errors.csv."""
import csv
import sys
from pathlib import Path

import matplotlib.pyplot as plt

here = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent
with open(here / "errors.csv") as f:
    rows = list(csv.reader(f))
names, data = rows[0][1:], rows[1:]
t = [int(r[0]) for r in data]
for i, name in enumerate(names):
    plt.plot(t, [float(r[i + 1]) for r in data], label=name.upper())
plt.xlabel("data length")
plt.ylabel("normalized accumulated squared error")
plt.legend()
plt.grid(True, alpha=0.3)
plt.savefig(here / "errors.png", dpi=150, bbox_inches="tight")
"#;

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Comment lines recording the values the run derived from the data.
fn resolved_header(report: &RunReport) -> String {
    let mut out = String::new();
    for (seed, bound) in report.seeds.iter().zip(&report.bounds) {
        out += &format!("# seed {seed}: bound A = {}\n", format_decimal(*bound));
    }
    for r in &report.regressors {
        if let Some(a) = r.a {
            out += &format!("# {}: a = {}\n", r.name, format_decimal(a));
        }
    }
    out
}

/// Writes errors.csv, touched.csv, report.json, config.toml, plot.py and,
/// when traces were kept, one trace CSV per tree regressor.
pub fn write_run_outputs(config: &ExperimentConfig, report: &RunReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut f = create(dir, "errors.csv")?;
    write_errors_csv(report, &mut f)?;
    f.flush()?;
    if report.touched.iter().any(Option::is_some) {
        let mut f = create(dir, "touched.csv")?;
        write_touched_csv(report, &mut f)?;
        f.flush()?;
    }
    fs::write(
        dir.join("report.json"),
        serde_json::to_string_pretty(report).expect("report serializes") + "\n",
    )?;
    fs::write(dir.join("config.toml"), resolved_header(report) + &config.to_toml())?;
    fs::write(dir.join("plot.py"), PLOT_SCRIPT)?;
    for (name, traces) in &report.traces {
        let mut f = create(dir, &format!("trace_{name}.csv"))?;
        write_trace_csv(traces, &mut f)?;
        f.flush()?;
    }
    Ok(())
}
