use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::apgt::ProbeConfig;
use crate::error::{Error, Result};
use crate::model::AlgoParams;
use crate::scenarios::{ScenarioConfig, DEFAULT_EPS_MULTIPLIER};
use crate::thresholding::{Lambda, ShrinkageRule};

/// Recognized configuration keys, in echo order. CLI flags use the same names.
pub const KEYS: &[&str] = &[
    "dim",
    "sparsity-true",
    "sparsity-est",
    "window",
    "rule",
    "lambda",
    "alpha",
    "p-extra",
    "delta",
    "eps-mult",
    "mu-scale",
    "eps-prime",
    "noise-var",
    "iters",
    "realizations",
    "seed",
    "change-at",
    "change-count",
    "probes",
    "thresholds",
    "out",
    "threads",
];

pub const DEFAULT_THRESHOLDS: [f64; 3] = [1e-1, 1e-2, 1e-3];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub algo: AlgoParams,
    pub eps_multiplier: f64,
    /// Number of independent realizations `τ`.
    pub realizations: usize,
    pub probes: ProbeConfig,
    /// MSE levels reported in the crossing summary.
    pub thresholds: Vec<f64>,
    /// CSV destination; `None` leaves writing to the caller.
    pub output_path: Option<PathBuf>,
    /// Worker threads; `None` uses all available cores.
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    /// The large-scale compressed-sensing setup: `L = 1024`, `K* = K = 100`,
    /// `q = 390`, `σ² = 0.1`, adaptive bridge shrinkage with `P = 10`.
    fn default() -> Self {
        ExperimentConfig {
            scenario: ScenarioConfig::new(1024, 100, 0.1, 1500, 0),
            algo: AlgoParams::new(100, 390, ShrinkageRule::bridge_adaptive(10)),
            eps_multiplier: DEFAULT_EPS_MULTIPLIER,
            realizations: 100,
            probes: ProbeConfig::default(),
            thresholds: DEFAULT_THRESHOLDS.to_vec(),
            output_path: None,
            threads: None,
        }
    }
}

/// Raw `key=value` settings before interpretation. Later insertions override earlier ones.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigPairs(BTreeMap<String, String>);

impl ConfigPairs {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses one `key=value` per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = ConfigPairs::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.split_once('#') {
                Some((before, _)) => before,
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "line {}: expected key=value, got `{line}`",
                    lineno + 1
                ))
            })?;
            pairs.set(key.trim(), value.trim())?;
        }
        Ok(pairs)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(Error::Config(format!("unknown configuration key `{key}`")));
        }
        self.0.insert(key.to_string(), value.into());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    /// Applies every pair of `other` on top of `self`.
    pub fn overlay(&mut self, other: &ConfigPairs) {
        for (k, v) in &other.0 {
            self.0.insert(k.clone(), v.clone());
        }
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("invalid value for `{key}`: `{v}`"))),
        }
    }
}

impl ExperimentConfig {
    /// Starts from [`ExperimentConfig::default`] and applies `pairs`.
    ///
    /// `sparsity-est` defaults to `sparsity-true`. The rule is assembled from
    /// `rule`, `lambda`, `alpha` and `p-extra`; `lambda=adaptive` selects the
    /// data-driven threshold.
    pub fn from_pairs(pairs: &ConfigPairs) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let s = &mut cfg.scenario;
        if let Some(v) = pairs.parsed("dim")? {
            s.dim = v;
        }
        if let Some(v) = pairs.parsed("sparsity-true")? {
            s.sparsity = v;
        }
        if let Some(v) = pairs.parsed("noise-var")? {
            s.noise_var = v;
        }
        if let Some(v) = pairs.parsed("iters")? {
            s.len = v;
        }
        if let Some(v) = pairs.parsed("seed")? {
            s.seed = v;
        }
        if let Some(v) = pairs.get("change-at") {
            s.change_at = match v {
                "none" => None,
                _ => pairs.parsed("change-at")?,
            };
        }
        if let Some(v) = pairs.parsed("change-count")? {
            s.change_count = v;
        }

        let a = &mut cfg.algo;
        a.sparsity = pairs
            .parsed("sparsity-est")?
            .unwrap_or(cfg.scenario.sparsity);
        if let Some(v) = pairs.parsed("window")? {
            a.window = v;
        }
        if let Some(v) = pairs.parsed("delta")? {
            a.delta = v;
        }
        if let Some(v) = pairs.parsed("mu-scale")? {
            a.mu_scale = v;
        }
        if let Some(v) = pairs.parsed("eps-prime")? {
            a.eps_prime = v;
        }
        a.rule = rule_from_pairs(pairs)?;

        if let Some(v) = pairs.parsed("eps-mult")? {
            cfg.eps_multiplier = v;
        }
        if let Some(v) = pairs.parsed("realizations")? {
            cfg.realizations = v;
        }
        if let Some(v) = pairs.parsed("probes")? {
            cfg.probes = v;
        }
        if let Some(v) = pairs.get("thresholds") {
            cfg.thresholds = v
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse()
                        .map_err(|_| Error::Config(format!("invalid threshold `{t}`")))
                })
                .collect::<Result<_>>()?;
        }
        cfg.output_path = pairs.get("out").map(PathBuf::from);
        cfg.threads = pairs.parsed("threads")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.algo.validate(self.scenario.dim)?;
        if self.realizations < 1 {
            return Err(Error::Config("realizations must be >= 1".into()));
        }
        if !(self.eps_multiplier >= 0.0) || !self.eps_multiplier.is_finite() {
            return Err(Error::Config(format!(
                "eps-mult must be finite and >= 0, got {}",
                self.eps_multiplier
            )));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be >= 1".into()));
        }
        if self.thresholds.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::Config("thresholds must be positive".into()));
        }
        Ok(())
    }

    /// Canonical settings, in [`KEYS`] order. Feeding them back through
    /// [`ExperimentConfig::from_pairs`] reproduces the configuration.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let s = &self.scenario;
        let a = &self.algo;
        let mut out = vec![
            ("dim", s.dim.to_string()),
            ("sparsity-true", s.sparsity.to_string()),
            ("sparsity-est", a.sparsity.to_string()),
            ("window", a.window.to_string()),
            ("rule", a.rule.name().to_string()),
            (
                "lambda",
                match a.rule.lambda() {
                    Lambda::Adaptive => "adaptive".to_string(),
                    Lambda::Fixed(l) => l.to_string(),
                },
            ),
        ];
        match a.rule {
            ShrinkageRule::Scad { alpha, .. } => out.push(("alpha", alpha.to_string())),
            ShrinkageRule::BridgeHalf { extra, .. } => out.push(("p-extra", extra.to_string())),
            _ => {}
        }
        out.extend([
            ("delta", a.delta.to_string()),
            ("eps-mult", self.eps_multiplier.to_string()),
            ("mu-scale", a.mu_scale.to_string()),
            ("eps-prime", a.eps_prime.to_string()),
            ("noise-var", s.noise_var.to_string()),
            ("iters", s.len.to_string()),
            ("realizations", self.realizations.to_string()),
            ("seed", s.seed.to_string()),
            (
                "change-at",
                s.change_at.map_or("none".to_string(), |n| n.to_string()),
            ),
            ("change-count", s.change_count.to_string()),
            ("probes", self.probes.to_string()),
            (
                "thresholds",
                self.thresholds
                    .iter()
                    .map(f64::to_string)
                    .collect::<Vec<_>>()
                    .join(","),
            ),
        ]);
        out
    }
}

fn rule_from_pairs(pairs: &ConfigPairs) -> Result<ShrinkageRule> {
    let mut text = pairs.get("rule").unwrap_or("bridge").to_string();
    match pairs.get("lambda") {
        None | Some("adaptive") => {}
        Some(l) => text.push_str(&format!(" lambda={l}")),
    }
    if let Some(alpha) = pairs.get("alpha") {
        text.push_str(&format!(" alpha={alpha}"));
    }
    if let Some(p) = pairs.get("p-extra") {
        text.push_str(&format!(" p={p}"));
    }
    text.parse()
}
