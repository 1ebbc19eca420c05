//! Experiment configuration, read from TOML.
//!
//! ```toml
//! n = 20000          # steps; defaults to 20000, or every row of a CSV source
//! seed = 7
//! trials = 10        # seeds seed, seed+1, ... averaged
//! out = "out"
//! trace = false      # per-step trace.csv for tree regressors
//!
//! [source]
//! kind = "synthetic" # synthetic | sine | uniform | constant | forced_split |
//!                    # duffing | tinkerbell | mackey_glass | chua | csv
//!
//! [[regressors]]
//! kind = "idt"       # idt | ctw<d> | lr | vsr | fnr<r>
//! delta = 1.0
//! depth_cap = "unlimited"
//!
//! [audit]
//! mode = "growth"    # growth | exact
//! ```
//!
//! Generator parameters go in `[source]` next to `kind`; anything left out
//! takes the default shown by the config echo written with every run.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use idt::DepthCap;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

pub const DEFAULT_N: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub trace: bool,
    #[serde(default)]
    pub source: SourceConfig,
    #[serde(default = "default_regressors")]
    pub regressors: Vec<RegressorSpec>,
    #[serde(default)]
    pub audit: AuditConfig,
}

fn one() -> usize {
    1
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

pub fn default_regressors() -> Vec<RegressorSpec> {
    ["idt", "ctw2", "lr", "vsr", "fnr2"]
        .iter()
        .map(|k| RegressorSpec::new(k.parse().expect("built-in regressor name")))
        .collect()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: None,
            seed: 0,
            trials: 1,
            out: default_out(),
            trace: false,
            source: SourceConfig::default(),
            regressors: default_regressors(),
            audit: AuditConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == Some(0) {
            return Err(BenchError::Config("n must be positive".into()));
        }
        if self.trials == 0 {
            return Err(BenchError::Config("trials must be positive".into()));
        }
        if self.regressors.is_empty() {
            return Err(BenchError::Config("no regressors configured".into()));
        }
        let mut names: Vec<String> = self.regressors.iter().map(RegressorSpec::name).collect();
        names.sort();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(BenchError::Config(format!(
                "regressor name {:?} is used twice; set `name` to tell them apart",
                w[0]
            )));
        }
        for r in &self.regressors {
            if !(r.delta.is_finite() && r.delta > 0.0) {
                return Err(BenchError::Config(format!("{}: delta must be positive", r.name())));
            }
        }
        self.source.validate()
    }

    /// Seeds of the individual trials.
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.trials as u64).map(|i| self.seed.wrapping_add(i)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegressorKind {
    Idt,
    Ctw(usize),
    Lr,
    Vsr,
    Fnr(usize),
}

impl fmt::Display for RegressorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegressorKind::Idt => write!(f, "idt"),
            RegressorKind::Ctw(d) => write!(f, "ctw{d}"),
            RegressorKind::Lr => write!(f, "lr"),
            RegressorKind::Vsr => write!(f, "vsr"),
            RegressorKind::Fnr(r) => write!(f, "fnr{r}"),
        }
    }
}

impl FromStr for RegressorKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let numbered = |prefix: &str, default: usize| -> Option<Result<usize>> {
            let rest = s.strip_prefix(prefix)?;
            let rest = rest.trim_start_matches([':', '-']);
            Some(if rest.is_empty() {
                Ok(default)
            } else {
                rest.parse()
                    .map_err(|_| BenchError::Config(format!("bad order in regressor {s:?}")))
            })
        };
        match s.as_str() {
            "idt" => Ok(RegressorKind::Idt),
            "lr" => Ok(RegressorKind::Lr),
            "vsr" => Ok(RegressorKind::Vsr),
            _ => {
                if let Some(d) = numbered("ctw", 2) {
                    return d.map(RegressorKind::Ctw);
                }
                if let Some(r) = numbered("fnr", 2) {
                    let r = r?;
                    if r == 0 {
                        return Err(BenchError::Config("fourier order must be positive".into()));
                    }
                    return Ok(RegressorKind::Fnr(r));
                }
                Err(BenchError::Config(format!("unknown regressor {s:?}")))
            }
        }
    }
}

impl Serialize for RegressorKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RegressorKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressorSpec {
    pub kind: RegressorKind,
    /// Column name in outputs; defaults to the kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default = "unit")]
    pub delta: f64,
    /// Loss scale of tree regressors; `4A²` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default)]
    pub depth_cap: DepthCap,
}

fn unit() -> f64 {
    1.0
}

impl RegressorSpec {
    pub fn new(kind: RegressorKind) -> Self {
        Self {
            kind,
            name: None,
            delta: 1.0,
            a: None,
            depth_cap: DepthCap::Unlimited,
        }
    }

    pub fn name(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.kind.to_string())
    }

    pub fn is_tree(&self) -> bool {
        matches!(self.kind, RegressorKind::Idt | RegressorKind::Ctw(_))
    }
}

/// Parses a comma-separated list such as `idt,ctw2,lr`.
pub fn parse_regressor_list(list: &str) -> Result<Vec<RegressorSpec>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse().map(RegressorSpec::new))
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceConfig {
    #[default]
    Synthetic,
    Sine {
        #[serde(default = "sine_noise")]
        noise_variance: f64,
    },
    Uniform {
        #[serde(default = "two")]
        p: usize,
    },
    Constant {
        #[serde(default = "unit_usize")]
        p: usize,
        #[serde(default = "unit")]
        x: f64,
        #[serde(default)]
        d: f64,
    },
    ForcedSplit {
        #[serde(default = "unit_usize")]
        p: usize,
    },
    Duffing {
        #[serde(default = "duffing_a")]
        a: f64,
        #[serde(default = "duffing_b")]
        b: f64,
        #[serde(default = "duffing_init")]
        init: [f64; 2],
        #[serde(default = "two")]
        embedding: usize,
    },
    Tinkerbell {
        #[serde(default = "tinkerbell_abcd")]
        params: [f64; 4],
        #[serde(default = "tinkerbell_init")]
        init: [f64; 2],
        #[serde(default = "two")]
        embedding: usize,
        #[serde(default)]
        component: usize,
    },
    MackeyGlass {
        #[serde(default = "mg_beta")]
        beta: f64,
        #[serde(default = "unit")]
        gamma: f64,
        #[serde(default = "mg_tau")]
        tau: f64,
        #[serde(default = "mg_order")]
        order: f64,
        #[serde(default = "step")]
        h: f64,
        #[serde(default = "mg_x0")]
        x0: f64,
        #[serde(default = "two")]
        embedding: usize,
    },
    Chua {
        #[serde(default = "chua_alpha")]
        alpha: f64,
        #[serde(default = "chua_beta")]
        beta: f64,
        #[serde(default = "chua_m0")]
        m0: f64,
        #[serde(default = "chua_m1")]
        m1: f64,
        #[serde(default = "step")]
        h: f64,
        #[serde(default = "chua_init")]
        init: [f64; 3],
        #[serde(default = "two")]
        embedding: usize,
        #[serde(default)]
        component: usize,
    },
    Csv {
        path: PathBuf,
        /// Target column name; the last column when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target: Option<String>,
    },
}

fn sine_noise() -> f64 {
    0.01
}
fn two() -> usize {
    2
}
fn unit_usize() -> usize {
    1
}
fn step() -> f64 {
    0.1
}
fn duffing_a() -> f64 {
    idt::datagen::DuffingParams::default().a
}
fn duffing_b() -> f64 {
    idt::datagen::DuffingParams::default().b
}
fn duffing_init() -> [f64; 2] {
    idt::datagen::DuffingParams::default().init
}
fn tinkerbell_abcd() -> [f64; 4] {
    let p = idt::datagen::TinkerbellParams::default();
    [p.a, p.b, p.c, p.d]
}
fn tinkerbell_init() -> [f64; 2] {
    idt::datagen::TinkerbellParams::default().init
}
fn mg_beta() -> f64 {
    2.0
}
fn mg_tau() -> f64 {
    2.0
}
fn mg_order() -> f64 {
    10.0
}
fn mg_x0() -> f64 {
    0.5
}
fn chua_alpha() -> f64 {
    15.6
}
fn chua_beta() -> f64 {
    28.0
}
fn chua_m0() -> f64 {
    -1.143
}
fn chua_m1() -> f64 {
    -0.714
}
fn chua_init() -> [f64; 3] {
    [0.7, 0.0, 0.0]
}

impl SourceConfig {
    /// A source of the given kind with every parameter at its default.
    pub fn with_defaults(kind: &str) -> Result<Self> {
        if kind == "csv" {
            return Err(BenchError::Config("a csv source needs a config file with `path`".into()));
        }
        toml::from_str::<SourceWrapper>(&format!("[source]\nkind = {kind:?}\n"))
            .map(|w| w.source)
            .map_err(|e| BenchError::Config(format!("unknown source {kind:?}: {e}")))
    }

    pub fn name(&self) -> &'static str {
        match self {
            SourceConfig::Synthetic => "synthetic",
            SourceConfig::Sine { .. } => "sine",
            SourceConfig::Uniform { .. } => "uniform",
            SourceConfig::Constant { .. } => "constant",
            SourceConfig::ForcedSplit { .. } => "forced_split",
            SourceConfig::Duffing { .. } => "duffing",
            SourceConfig::Tinkerbell { .. } => "tinkerbell",
            SourceConfig::MackeyGlass { .. } => "mackey_glass",
            SourceConfig::Chua { .. } => "chua",
            SourceConfig::Csv { .. } => "csv",
        }
    }

    /// True when the seed changes the stream.
    pub fn is_random(&self) -> bool {
        matches!(
            self,
            SourceConfig::Synthetic
                | SourceConfig::Sine { .. }
                | SourceConfig::Uniform { .. }
                | SourceConfig::ForcedSplit { .. }
        )
    }

    fn validate(&self) -> Result<()> {
        let embedding = match self {
            SourceConfig::Duffing { embedding, .. }
            | SourceConfig::Tinkerbell { embedding, .. }
            | SourceConfig::MackeyGlass { embedding, .. }
            | SourceConfig::Chua { embedding, .. } => Some(*embedding),
            SourceConfig::Uniform { p } | SourceConfig::Constant { p, .. } | SourceConfig::ForcedSplit { p } => {
                Some(*p)
            }
            _ => None,
        };
        if embedding == Some(0) {
            return Err(BenchError::Config("dimension / embedding order must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Deserialize)]
struct SourceWrapper {
    source: SourceConfig,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditMode {
    /// Pruning enumeration against the closed-form bound; small `n` only.
    Exact,
    /// Regret against the best small pruning at a set of checkpoints.
    #[default]
    Growth,
}

impl FromStr for AuditMode {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(AuditMode::Exact),
            "growth" => Ok(AuditMode::Growth),
            _ => Err(BenchError::Config(format!("unknown audit mode {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    #[serde(default)]
    pub mode: AuditMode,
    /// Largest accepted `regret / (p log² n)` in growth mode; `a` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_takes_defaults() {
        let c = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!(c.regressors.len(), 5);
        c.validate().unwrap();
    }

    #[test]
    fn regressor_names_parse() {
        assert_eq!("ctw".parse::<RegressorKind>().unwrap(), RegressorKind::Ctw(2));
        assert_eq!("ctw:5".parse::<RegressorKind>().unwrap(), RegressorKind::Ctw(5));
        assert_eq!("FNR3".parse::<RegressorKind>().unwrap(), RegressorKind::Fnr(3));
        assert!("mars".parse::<RegressorKind>().is_err());
        assert!("fnr0".parse::<RegressorKind>().is_err());
        for k in ["idt", "ctw4", "lr", "vsr", "fnr1"] {
            assert_eq!(k.parse::<RegressorKind>().unwrap().to_string(), k);
        }
    }

    #[test]
    fn echo_round_trips() {
        let text = r#"
            n = 500
            seed = 3
            [source]
            kind = "chua"
            h = 0.05
            [[regressors]]
            kind = "idt"
            depth_cap = "ceil_log2"
            [[regressors]]
            kind = "ctw3"
            delta = 0.5
        "#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        assert!(matches!(c.source, SourceConfig::Chua { h, alpha, .. } if h == 0.05 && alpha == 15.6));
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn invalid_configs() {
        assert!(ExperimentConfig::from_toml("bogus = 1").is_err());
        assert!(ExperimentConfig::from_toml("[source]\nkind = \"nope\"").is_err());
        let dup = "[[regressors]]\nkind = \"lr\"\n[[regressors]]\nkind = \"lr\"\n";
        assert!(ExperimentConfig::from_toml(dup).unwrap().validate().is_err());
        assert!(ExperimentConfig::from_toml("trials = 0").unwrap().validate().is_err());
        assert!(SourceConfig::with_defaults("csv").is_err());
        assert_eq!(SourceConfig::with_defaults("duffing").unwrap().name(), "duffing");
    }
}
