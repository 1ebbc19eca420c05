use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use idt::datagen::{write_series_csv, write_stream_csv};
use idt::DepthCap;
use idt_bench::audit::{audit_verdict, run_audit, write_audit_outputs};
use idt_bench::config::{parse_regressor_list, AuditMode, ExperimentConfig, SourceConfig};
use idt_bench::cost::{cost_profile, write_cost_outputs};
use idt_bench::source::build_source;
use idt_bench::{run_experiment, write_run_outputs, BenchError, Result};

#[derive(Parser)]
#[command(name = "idt-bench", version, about = "Online regression experiments with incremental decision trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every regressor on one stream and write error curves.
    Run(Common),
    /// Check the regret bound of the incremental tree.
    Audit {
        #[command(flatten)]
        common: Common,
        /// `exact` (pruning enumeration, small n) or `growth`.
        #[arg(long)]
        mode: Option<AuditMode>,
        /// Growth-mode limit on regret / (p log2² n).
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Record touched nodes and wall time per step.
    Cost(Common),
    /// Write the configured source to CSV.
    Gen(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Data source with default parameters (overrides the config's source).
    #[arg(long)]
    source: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of steps.
    #[arg(long)]
    n: Option<usize>,
    /// Average over this many consecutive seeds.
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated regressors, e.g. `idt,ctw2,lr,vsr,fnr2`.
    #[arg(long)]
    regressors: Option<String>,
    /// Ridge regularizer for every regressor.
    #[arg(long)]
    delta: Option<f64>,
    /// Loss scale for every tree regressor.
    #[arg(long)]
    a: Option<f64>,
    /// `unlimited`, `ceil_log2` or `fixed:N`, for every tree regressor.
    #[arg(long)]
    depth_cap: Option<DepthCap>,
    /// Write per-step traces of the tree regressors.
    #[arg(long)]
    trace: bool,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?;
                ExperimentConfig::from_toml(&text)?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(s) = &self.source {
            config.source = SourceConfig::with_defaults(s)?;
        }
        if let Some(list) = &self.regressors {
            config.regressors = parse_regressor_list(list)?;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(out) = &self.out {
            config.out = out.clone();
        }
        if self.n.is_some() {
            config.n = self.n;
        }
        if let Some(trials) = self.trials {
            config.trials = trials;
        }
        config.trace |= self.trace;
        for r in &mut config.regressors {
            if let Some(delta) = self.delta {
                r.delta = delta;
            }
            if r.is_tree() {
                if self.a.is_some() {
                    r.a = self.a;
                }
                if let Some(cap) = self.depth_cap {
                    r.depth_cap = cap;
                }
            }
        }
        config.validate()?;
        Ok(config)
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(common) => {
            let config = common.resolve()?;
            let report = run_experiment(&config)?;
            write_run_outputs(&config, &report, &config.out)?;
            for r in &report.regressors {
                println!("{:<8} final normalized error {:.6}", r.name, r.final_normalized);
            }
            println!("wrote {}", config.out.join("errors.csv").display());
        }
        Command::Audit { common, mode, threshold } => {
            let mut config = common.resolve()?;
            if let Some(mode) = mode {
                config.audit.mode = mode;
            }
            if threshold.is_some() {
                config.audit.threshold = threshold;
            }
            let report = run_audit(&config)?;
            write_audit_outputs(&config, &report, &config.out)?;
            for line in report.lines() {
                println!("{line}");
            }
            audit_verdict(&report)?;
        }
        Command::Cost(common) => {
            let config = common.resolve()?;
            let profiles = cost_profile(&config)?;
            write_cost_outputs(&config, &profiles, &config.out)?;
            for p in &profiles {
                for w in &p.windows {
                    println!("{:<8} k={:<2} mean touched {:.3}  mean ns {:.0}", p.name, w.k, w.mean_touched, w.mean_nanos);
                }
                if let Some(fit) = p.fit {
                    println!(
                        "{:<8} touched ~ {:.4} + {:.4} k  (R² {:.4})",
                        p.name, fit.intercept, fit.slope, fit.r_squared
                    );
                }
            }
        }
        Command::Gen(common) => {
            let config = common.resolve()?;
            let data = build_source(&config.source, config.n, config.seed)?;
            fs::create_dir_all(&config.out)?;
            let mut f = BufWriter::new(File::create(config.out.join("stream.csv"))?);
            write_stream_csv(&data.stream, &mut f)?;
            f.flush()?;
            if let Some(series) = &data.series {
                let mut f = BufWriter::new(File::create(config.out.join("series.csv"))?);
                write_series_csv(series, &mut f)?;
                f.flush()?;
            }
            fs::write(config.out.join("config.toml"), config.to_toml())?;
            println!("wrote {} pairs to {}", data.stream.len(), config.out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("idt-bench: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
