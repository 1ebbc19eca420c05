use std::fs;
use std::path::Path;

use idt::audit::{exact_audit, growth_checkpoint};
use idt::TreeRegressor;
use serde::Serialize;

use crate::config::{AuditMode, ExperimentConfig, RegressorKind, RegressorSpec};
use crate::error::{BenchError, Result};
use crate::models::tree_config;
use crate::run::dyadic_checkpoints;
use crate::source::build_source;

#[derive(Clone, Debug, Serialize)]
pub struct ExactRow {
    pub n: u64,
    pub prunings: usize,
    /// `-2a ln P_λ(n)`.
    pub lhs: f64,
    pub rhs_log2: f64,
    pub rhs_ln: f64,
    pub best_leaves_log2: usize,
    pub min_pruning_loss: f64,
    pub algorithm_loss: f64,
    pub holds_log2: bool,
    pub holds_ln: bool,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthRow {
    pub n: u64,
    pub max_leaves: usize,
    pub algorithm_loss: f64,
    pub comparator_loss: f64,
    pub regret: f64,
    /// `regret / (p log2² n)`.
    pub normalized: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub mode: AuditMode,
    pub source: String,
    pub seed: u64,
    pub p: usize,
    pub bound: f64,
    pub a: f64,
    pub threshold: Option<f64>,
    pub exact: Vec<ExactRow>,
    pub growth: Vec<GrowthRow>,
    pub passed: bool,
}

impl AuditReport {
    /// One human-readable line per checkpoint.
    pub fn lines(&self) -> Vec<String> {
        let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
        let mut out: Vec<String> = self
            .exact
            .iter()
            .map(|r| {
                format!(
                    "{} exact n={} prunings={} lhs={:.6} rhs_log2={:.6} rhs_ln={:.6} (ln variant {})",
                    verdict(r.passed),
                    r.n,
                    r.prunings,
                    r.lhs,
                    r.rhs_log2,
                    r.rhs_ln,
                    if r.holds_ln { "holds" } else { "fails" }
                )
            })
            .collect();
        out.extend(self.growth.iter().map(|r| {
            format!(
                "{} growth n={} leaves<={} regret={:.6} normalized={:.6} threshold={:.6}",
                verdict(r.passed),
                r.n,
                r.max_leaves,
                r.regret,
                r.normalized,
                self.threshold.unwrap_or(f64::NAN)
            )
        }));
        out
    }
}

/// The incremental tree the audit runs: the first `idt` entry of the config,
/// or a default one.
fn audit_spec(config: &ExperimentConfig) -> RegressorSpec {
    config
        .regressors
        .iter()
        .find(|r| r.kind == RegressorKind::Idt)
        .cloned()
        .unwrap_or_else(|| RegressorSpec::new(RegressorKind::Idt))
}

/// Powers of ten up to `n`, then `n`.
pub fn decimal_checkpoints(n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = std::iter::successors(Some(10usize), |&t| t.checked_mul(10))
        .take_while(|&t| t <= n)
        .collect();
    if out.last() != Some(&n) {
        out.push(n);
    }
    out
}

pub fn run_audit(config: &ExperimentConfig) -> Result<AuditReport> {
    config.validate()?;
    let stream = build_source(&config.source, config.n, config.seed)?.stream;
    let spec = audit_spec(config);
    let cfg = tree_config(&spec, stream.p, stream.bound);
    let a = cfg.a;
    let mut reg = TreeRegressor::incremental(cfg)?;

    let mode = config.audit.mode;
    let (checkpoints, threshold) = match mode {
        AuditMode::Exact => (dyadic_checkpoints(stream.len()), None),
        AuditMode::Growth => (decimal_checkpoints(stream.len()), Some(config.audit.threshold.unwrap_or(a))),
    };
    let mut exact = Vec::new();
    let mut growth = Vec::new();
    let mut next = checkpoints.iter().peekable();
    let mut loss = 0.0;
    for (i, (x, d)) in stream.pairs.iter().enumerate() {
        loss += reg.step(x, *d)?.squared_error;
        let t = i + 1;
        if next.peek() != Some(&&t) {
            continue;
        }
        next.next();
        match mode {
            AuditMode::Exact => {
                let e = exact_audit(reg.tree(), t as u64, Some(loss))?;
                exact.push(ExactRow {
                    n: e.n,
                    prunings: e.prunings,
                    lhs: e.lhs,
                    rhs_log2: e.best_log2.rhs_log2,
                    rhs_ln: e.best_ln.rhs_ln,
                    best_leaves_log2: e.best_log2.leaves,
                    min_pruning_loss: e.min_loss,
                    algorithm_loss: loss,
                    holds_log2: e.holds_log2,
                    holds_ln: e.holds_ln,
                    passed: e.passed(),
                });
            }
            AuditMode::Growth => {
                let g = growth_checkpoint(reg.tree(), &stream.pairs[..t], loss);
                growth.push(GrowthRow {
                    n: g.n,
                    max_leaves: g.max_leaves,
                    algorithm_loss: g.algorithm_loss,
                    comparator_loss: g.comparator_loss,
                    regret: g.regret,
                    normalized: g.normalized,
                    passed: g.normalized <= threshold.expect("growth mode has a threshold"),
                });
            }
        }
    }
    let passed = exact.iter().all(|r| r.passed) && growth.iter().all(|r| r.passed);
    Ok(AuditReport {
        mode,
        source: config.source.name().into(),
        seed: config.seed,
        p: stream.p,
        bound: stream.bound,
        a,
        threshold,
        exact,
        growth,
        passed,
    })
}

pub fn write_audit_outputs(config: &ExperimentConfig, report: &AuditReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(
        dir.join("audit.json"),
        serde_json::to_string_pretty(report).expect("report serializes") + "\n",
    )?;
    fs::write(dir.join("config.toml"), config.to_toml())?;
    Ok(())
}

/// Error to return when the audit did not pass.
pub fn audit_verdict(report: &AuditReport) -> Result<()> {
    if report.passed {
        return Ok(());
    }
    let failed = report.exact.iter().filter(|r| !r.passed).count() + report.growth.iter().filter(|r| !r.passed).count();
    Err(BenchError::AuditFailed(format!("{failed} checkpoint(s) violated the bound")))
}
