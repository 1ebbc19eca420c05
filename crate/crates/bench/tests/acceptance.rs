//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero if any fails.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use idt::audit::{enumerate_prunings, exact_audit, log_sum_prunings};
use idt::baselines::fixed_tree_regressor;
use idt::datagen::{self, RegressionStream};
use idt::rls::{rls_batch_oracle, RlsState};
use idt::{DepthCap, Tree, TreeConfig, TreeRegressor};
use idt_bench::audit::run_audit;
use idt_bench::config::{parse_regressor_list, AuditConfig, AuditMode};
use idt_bench::cost::cost_profile;
use idt_bench::source::build_source;
use idt_bench::{run_experiment, ExperimentConfig, SourceConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn incremental(stream: &RegressionStream) -> TreeRegressor {
    TreeRegressor::incremental(TreeConfig::new(stream.p, stream.bound)).unwrap()
}

fn mixture_simplex() -> Outcome {
    let start = Instant::now();
    let stream = datagen::gen_synthetic(100_000, 1).unwrap();
    let mut reg = incremental(&stream);
    let mut worst: f64 = 0.0;
    for (x, d) in &stream.pairs {
        let tr = reg.step(x, *d).unwrap();
        worst = worst.max((tr.mu.iter().sum::<f64>() - 1.0).abs());
    }
    let elapsed = start.elapsed();
    check(
        worst <= 1e-9 && elapsed <= Duration::from_secs(60),
        format!("max |Σμ - 1| = {worst:.2e} over 1e5 steps in {elapsed:.2?}"),
    )
}

fn min_jensen_slack(stream: &RegressionStream) -> f64 {
    let mut reg = incremental(stream);
    let a = reg.tree().config().a;
    stream
        .pairs
        .iter()
        .map(|(x, d)| reg.step(x, *d).unwrap().jensen_slack(a))
        .fold(f64::INFINITY, f64::min)
}

fn jensen_step() -> Outcome {
    let n = 10_000;
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("chua.csv");
    let chua = datagen::gen_chua(n + 1, datagen::ChuaParams::default()).unwrap();
    datagen::write_series_csv(&chua, fs::File::create(&csv_path).unwrap()).unwrap();
    let csv_source = SourceConfig::Csv {
        path: csv_path,
        target: None,
    };
    let duffing = SourceConfig::with_defaults("duffing").unwrap();
    let streams = [
        ("synthetic", datagen::gen_synthetic(n, 3).unwrap()),
        ("duffing", build_source(&duffing, Some(n), 0).unwrap().stream),
        ("csv", build_source(&csv_source, Some(n), 0).unwrap().stream),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, stream) in &streams {
        ok &= stream.len() == n;
        let slack = min_jensen_slack(stream);
        ok &= slack >= -1e-12;
        parts.push(format!("{name} {slack:.3e}"));
    }
    check(ok, format!("minimum log-domain slack: {}", parts.join(", ")))
}

fn pruning_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut trees = 0;
    let mut largest = 0;
    while trees < 200 {
        let p = rng.random_range(1..=3);
        let n = rng.random_range(1..=10);
        let mut reg = TreeRegressor::incremental(TreeConfig::new(p, 1.0)).unwrap();
        for _ in 0..n {
            let x: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..=1.0)).collect();
            reg.step(&x, rng.random_range(-1.0..=1.0)).unwrap();
        }
        let mut tree = reg.into_tree();
        if tree.len() > 15 {
            continue;
        }
        for id in 0..tree.len() {
            tree.assign_log_loss(id, -rng.random_range(0.0..30.0));
        }
        let sum = log_sum_prunings(&enumerate_prunings(&tree).unwrap());
        worst = worst.max((sum - tree.root().log_p).abs());
        largest = largest.max(tree.len());
        trees += 1;
    }
    check(
        worst <= 1e-9,
        format!("{trees} trees up to {largest} nodes, max |Σ_m - ln P_λ| = {worst:.2e}"),
    )
}

fn exact_bound_audit() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for n in [4usize, 8, 16] {
        let config = ExperimentConfig {
            n: Some(n),
            seed: n as u64,
            source: SourceConfig::ForcedSplit { p: 1 },
            regressors: parse_regressor_list("idt").unwrap(),
            audit: AuditConfig {
                mode: AuditMode::Exact,
                threshold: None,
            },
            ..Default::default()
        };
        let report = run_audit(&config).unwrap();
        let last = report.exact.last().unwrap();
        ok &= report.passed && last.n == n as u64;
        parts.push(format!(
            "n={n} {} prunings, lhs {:.3} <= rhs {:.3}",
            last.prunings, last.lhs, last.rhs_log2
        ));
        // Independent recomputation from the core audit on a fresh run.
        let stream = build_source(&config.source, config.n, config.seed).unwrap().stream;
        let mut reg = incremental(&stream);
        for (x, d) in &stream.pairs {
            reg.step(x, *d).unwrap();
        }
        let audit = exact_audit(reg.tree(), n as u64, None).unwrap();
        ok &= audit.passed() && audit.lhs.to_bits() == last.lhs.to_bits();
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(10);
    check(ok, format!("{} in {elapsed:.2?}", parts.join("; ")))
}

fn rls_batch() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let p = rng.random_range(1..=4);
        let delta = rng.random_range(0.1..10.0);
        let data: Vec<(Vec<f64>, f64)> = (0..100)
            .map(|_| ((0..p).map(|_| rng.random_range(-1.0..=1.0)).collect(), rng.random_range(-1.0..=1.0)))
            .collect();
        let mut rls = RlsState::new(p, delta);
        for k in 0..data.len() {
            rls.update(&data[k].0, data[k].1);
            let (w, _) = rls_batch_oracle(&data[..=k], delta);
            worst = worst.max((rls.weights() - w).amax());
        }
    }
    check(worst <= 1e-8, format!("500 trials x 100 prefixes, max weight error {worst:.2e}"))
}

fn shared_engine() -> Outcome {
    let mut steps = 0;
    let mut ok = true;
    let streams = [
        datagen::gen_synthetic(5000, 9).unwrap(),
        datagen::gen_uniform(5000, 3, 9).unwrap(),
    ];
    for stream in &streams {
        let cfg = TreeConfig::new(stream.p, stream.bound);
        let realized = Tree::complete(cfg.clone().with_depth_cap(DepthCap::Fixed(2)), 2, 64).unwrap();
        let mut idt = TreeRegressor::resume(realized, 0);
        let mut ctw = fixed_tree_regressor(2, cfg).unwrap();
        ok &= idt.is_growing();
        for (x, d) in &stream.pairs {
            ok &= idt.step(x, *d).unwrap() == ctw.step(x, *d).unwrap();
            steps += 1;
        }
        // Growth bookkeeping differs; the predictive state must not.
        let (a, b) = (idt.tree().nodes(), ctw.tree().nodes());
        ok &= a.len() == b.len();
        ok &= a.iter().zip(b).all(|(u, v)| {
            u.label == v.label && u.region == v.region && u.log_l == v.log_l && u.log_p == v.log_p && u.rls == v.rls
        });
    }
    check(ok, format!("{steps} steps compared, traces and node states identical: {ok}"))
}

fn synthetic_experiment() -> Outcome {
    let start = Instant::now();
    let config = ExperimentConfig {
        n: Some(20_000),
        trials: 10,
        source: SourceConfig::Synthetic,
        regressors: parse_regressor_list("idt,ctw2").unwrap(),
        ..Default::default()
    };
    let report = run_experiment(&config).unwrap();
    let idt = report.final_normalized("idt").unwrap();
    let ctw = report.final_normalized("ctw2").unwrap();
    let idt_2k = report.normalized[0][1999];
    let elapsed = start.elapsed();
    check(
        idt < ctw && idt < idt_2k && elapsed <= Duration::from_secs(300),
        format!("10 seeds: idt {idt:.4} vs ctw2 {ctw:.4}; idt at 2e3 {idt_2k:.4}; {elapsed:.2?}"),
    )
}

fn smooth_target() -> Outcome {
    let stream = datagen::gen_sine(100_000, 0.01, 1).unwrap();
    let mut reg = incremental(&stream);
    let total: f64 = stream.pairs.iter().map(|(x, d)| reg.step(x, *d).unwrap().squared_error).sum();
    let err = total / stream.len() as f64;
    check(err <= 0.02, format!("final normalized error {err:.5} (limit 0.02)"))
}

fn cost_scaling() -> Outcome {
    let mut capped = ExperimentConfig {
        n: Some((1 << 18) - 1),
        source: SourceConfig::Uniform { p: 2 },
        regressors: parse_regressor_list("idt").unwrap(),
        ..Default::default()
    };
    capped.regressors[0].depth_cap = DepthCap::CeilLog2;
    let profile = &cost_profile(&capped).unwrap()[0];
    let fit = profile.fit.unwrap();
    let kmax = profile.windows.last().unwrap().k;

    let worst = ExperimentConfig {
        n: Some(2048),
        source: SourceConfig::Constant { p: 1, x: 1.0, d: 0.0 },
        regressors: parse_regressor_list("idt").unwrap(),
        ..Default::default()
    };
    let linear = cost_profile(&worst).unwrap()[0].linear_worst_case;
    check(
        fit.r_squared >= 0.9 && kmax == 17 && linear,
        format!(
            "capped k<=17: touched ≈ {:.3} + {:.3}k, R² {:.4}; constant stream touched == t: {linear}",
            fit.intercept, fit.slope, fit.r_squared
        ),
    )
}

fn mackey_glass_order() -> f64 {
    let finals: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&h| {
            let n = (20.0f64 / h).round() as usize + 1;
            let params = datagen::MackeyGlassParams { h, ..Default::default() };
            datagen::gen_mackey_glass(n, params).unwrap().values[n - 1][0]
        })
        .collect();
    ((finals[0] - finals[1]) / (finals[1] - finals[2])).abs().log2()
}

fn generator_goldens() -> Outcome {
    let duffing = datagen::gen_duffing(3, datagen::DuffingParams::default()).unwrap().values[2][0];
    let (tx, ty) = datagen::TinkerbellParams::default().step(0.1, 0.1);
    let order = mackey_glass_order();
    let f = |x| datagen::chua_nonlinearity(x, -1.143, -0.714);
    let chua_err = [(0.7, -0.8001), (-0.7, 0.8001), (2.0, -1.857), (-2.0, 1.857), (1.0, -1.143)]
        .iter()
        .map(|&(x, want)| (f(x) - want).abs())
        .fold(0.0, f64::max);
    let ok = (duffing - 0.254).abs() <= 1e-15
        && (tx - 0.02987).abs() <= 1e-15
        && (ty - 0.27).abs() <= 1e-15
        && (3.7..4.3).contains(&order)
        && chua_err <= 1e-12;
    check(
        ok,
        format!(
            "duffing {duffing}, tinkerbell ({tx}, {ty}), mackey-glass order {order:.3}, chua max err {chua_err:.1e}"
        ),
    )
}

fn bench_run(dir: &Path, extra: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_idt-bench"))
        .args(["run", "--out", dir.to_str().unwrap()])
        .args(extra)
        .output()
        .unwrap();
    assert!(out.status.success(), "idt-bench run failed: {}", String::from_utf8_lossy(&out.stderr));
    fs::read(dir.join("errors.csv")).unwrap()
}

fn reproducibility() -> Outcome {
    let root = tempfile::tempdir().unwrap();
    let mut parts = Vec::new();
    let mut ok = true;
    let cases: [&[&str]; 3] = [
        &["--n", "3000", "--seed", "42"],
        &["--source", "tinkerbell", "--n", "2000", "--trials", "3"],
        &["--source", "mackey_glass", "--n", "1500", "--regressors", "idt,ctw4,fnr3"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let a = bench_run(&root.path().join(format!("{i}a")), args);
        let b = bench_run(&root.path().join(format!("{i}b")), args);
        let echo = root.path().join(format!("{i}a/config.toml"));
        let c = bench_run(&root.path().join(format!("{i}c")), &["--config", echo.to_str().unwrap()]);
        ok &= a == b && a == c;
        parts.push(format!("{} bytes", a.len()));
    }
    check(ok, format!("three configs, repeated and replayed from config echo: {}", parts.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("mixture weights sum to one", mixture_simplex),
        ("per-step Jensen inequality", jensen_step),
        ("pruning enumeration equals root weight", pruning_oracle),
        ("exact regret bound audit", exact_bound_audit),
        ("sequential RLS equals batch solution", rls_batch),
        ("depth-2 tree equals fixed-depth baseline", shared_engine),
        ("synthetic experiment ordering", synthetic_experiment),
        ("smooth target convergence", smooth_target),
        ("per-step cost scaling", cost_scaling),
        ("generator goldens", generator_goldens),
        ("byte-identical reruns", reproducibility),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
