// SPDX-License-Identifier: Apache-2.0

//! Run configuration for the command-line front end.
//!
//! Layers are merged with later layers winning: defaults, the `BENCH_DIR`
//! environment variable, a `key = value` config file, then flags.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::atpg::AtpgBudget;
use crate::netlist::Netlist;
use crate::registers::{IpBilboConfig, Polynomial, DEFAULT_UNLOAD_INTERVAL};
use crate::report::ReportFormat;
use crate::scheduler::{
    derive_thresholds, CampaignConfig, DetectionMode, SchedulerError, ThresholdOverrides,
    VectorSource,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{origin}:{line}: expected `key = value`")]
    Syntax { origin: String, line: usize },
    #[error("{origin}:{line}: unknown key `{key}`")]
    UnknownKey {
        origin: String,
        line: usize,
        key: String,
    },
    #[error("invalid value for `{key}`: {message}")]
    Value { key: String, message: String },
    #[error("cannot read config `{path}`: {message}")]
    Io { path: String, message: String },
}

/// One configuration layer; unset fields fall through to earlier layers.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    pub bench: Option<String>,
    pub bench_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub th1: Option<f64>,
    pub th2_ratio: Option<f64>,
    pub th2: Option<usize>,
    pub polynomials: Option<Vec<Polynomial>>,
    pub detection_mode: Option<DetectionMode>,
    pub unload_interval: Option<usize>,
    pub cycle_budget: Option<u64>,
    pub vector_file: Option<PathBuf>,
    pub backtrack_limit: Option<u64>,
    pub target: Option<f64>,
    pub format: Option<ReportFormat>,
    pub output: Option<PathBuf>,
    pub events: Option<PathBuf>,
}

pub const DEFAULT_SEED: u64 = 1;

fn value_err(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Value {
        key: key.to_string(),
        message: message.into(),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| value_err(key, e.to_string()))
}

pub fn parse_detection_mode(v: &str) -> Result<DetectionMode, String> {
    match v.to_ascii_lowercase().as_str() {
        "direct" => Ok(DetectionMode::Direct),
        "signature" => Ok(DetectionMode::Signature),
        _ => Err(format!(
            "unknown detection mode `{v}` (direct or signature)"
        )),
    }
}

impl RunConfig {
    /// The environment layer.
    pub fn from_env() -> RunConfig {
        RunConfig {
            bench_dir: std::env::var_os(crate::bench::BENCH_DIR_VAR).map(PathBuf::from),
            ..Default::default()
        }
    }

    /// Parses `key = value` lines; `#` starts a comment. `poly` may repeat.
    pub fn parse(text: &str, origin: &str) -> Result<RunConfig, ConfigError> {
        let mut cfg = RunConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let t = raw.split('#').next().unwrap_or("").trim();
            if t.is_empty() {
                continue;
            }
            let (k, v) = t.split_once('=').ok_or_else(|| ConfigError::Syntax {
                origin: origin.to_string(),
                line,
            })?;
            let (k, v) = (k.trim(), v.trim());
            cfg.set(k, v).map_err(|e| match e {
                ConfigError::UnknownKey { key, .. } => ConfigError::UnknownKey {
                    origin: origin.to_string(),
                    line,
                    key,
                },
                e => e,
            })?;
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<RunConfig, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        RunConfig::parse(&text, &path.display().to_string())
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        match key {
            "bench" => self.bench = Some(v.to_string()),
            "bench_dir" => self.bench_dir = Some(PathBuf::from(v)),
            "seed" => self.seed = Some(parse_num(key, v)?),
            "th1" => self.th1 = Some(parse_num(key, v)?),
            "th2_ratio" => self.th2_ratio = Some(parse_num(key, v)?),
            "th2" => self.th2 = Some(parse_num(key, v)?),
            "poly" => {
                let p = Polynomial::parse(v).map_err(|e| value_err(key, e.to_string()))?;
                self.polynomials.get_or_insert_with(Vec::new).push(p);
            }
            "detection_mode" => {
                self.detection_mode = Some(parse_detection_mode(v).map_err(|m| value_err(key, m))?)
            }
            "unload_interval" => self.unload_interval = Some(parse_num(key, v)?),
            "cycle_budget" => self.cycle_budget = Some(parse_num(key, v)?),
            "vector_file" => self.vector_file = Some(PathBuf::from(v)),
            "backtrack_limit" => self.backtrack_limit = Some(parse_num(key, v)?),
            "target" => self.target = Some(parse_num(key, v)?),
            "format" => self.format = Some(v.parse().map_err(|m: String| value_err(key, m))?),
            "output" => self.output = Some(PathBuf::from(v)),
            "events" => self.events = Some(PathBuf::from(v)),
            _ => {
                return Err(ConfigError::UnknownKey {
                    origin: String::new(),
                    line: 0,
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// `self` with every unset field taken from `lower`.
    pub fn over(self, lower: RunConfig) -> RunConfig {
        RunConfig {
            bench: self.bench.or(lower.bench),
            bench_dir: self.bench_dir.or(lower.bench_dir),
            seed: self.seed.or(lower.seed),
            th1: self.th1.or(lower.th1),
            th2_ratio: self.th2_ratio.or(lower.th2_ratio),
            th2: self.th2.or(lower.th2),
            polynomials: self.polynomials.or(lower.polynomials),
            detection_mode: self.detection_mode.or(lower.detection_mode),
            unload_interval: self.unload_interval.or(lower.unload_interval),
            cycle_budget: self.cycle_budget.or(lower.cycle_budget),
            vector_file: self.vector_file.or(lower.vector_file),
            backtrack_limit: self.backtrack_limit.or(lower.backtrack_limit),
            target: self.target.or(lower.target),
            format: self.format.or(lower.format),
            output: self.output.or(lower.output),
            events: self.events.or(lower.events),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn format(&self) -> ReportFormat {
        self.format.unwrap_or(ReportFormat::Csv)
    }

    pub fn budget(&self) -> AtpgBudget {
        AtpgBudget {
            backtrack_limit: self
                .backtrack_limit
                .unwrap_or(AtpgBudget::default().backtrack_limit),
            ..AtpgBudget::default()
        }
    }

    pub fn threshold_overrides(&self) -> ThresholdOverrides {
        ThresholdOverrides {
            th1: self.th1,
            th2_ratio: self.th2_ratio,
            th2: self.th2,
        }
    }

    /// Checks values that do not depend on the circuit.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.th2 == Some(0) {
            return Err(value_err("th2", "must be at least 1"));
        }
        if let Some(r) = self.th2_ratio {
            if !(r > 0.0 && r <= 1.0) {
                return Err(value_err("th2_ratio", "must lie in (0, 1]"));
            }
        }
        if let Some(t) = self.th1 {
            if !(0.0..=1.0).contains(&t) {
                return Err(value_err("th1", "must lie in [0, 1]"));
            }
        }
        if let Some(t) = self.target {
            if !(t > 0.0 && t <= 1.0) {
                return Err(value_err("target", "must lie in (0, 1]"));
            }
        }
        if self.unload_interval == Some(0) {
            return Err(value_err("unload_interval", "must be at least 1"));
        }
        Ok(())
    }

    /// Campaign settings for `net`. `source` overrides the PODEM default.
    pub fn campaign_config(
        &self,
        net: &Netlist,
        source: Option<VectorSource>,
    ) -> Result<CampaignConfig, SchedulerError> {
        let thresholds = derive_thresholds(&net.profile(), &self.threshold_overrides())?;
        let interval = self.unload_interval.unwrap_or(DEFAULT_UNLOAD_INTERVAL);
        let generator = match &self.polynomials {
            Some(p) => IpBilboConfig::new(p.clone(), interval)?,
            None => IpBilboConfig::new(
                IpBilboConfig::default_for(net.scan_length())?
                    .schedule()
                    .to_vec(),
                interval,
            )?,
        };
        if generator.width() != net.scan_length() {
            return Err(crate::registers::RegisterError::DegreeMismatch {
                expected: net.scan_length(),
                got: generator.width(),
            }
            .into());
        }
        Ok(CampaignConfig {
            thresholds,
            generator,
            seed_state: None,
            source: source.unwrap_or_else(|| VectorSource::Podem(self.budget())),
            cycle_budget: self.cycle_budget,
            rng_seed: self.seed(),
            target: self.target.unwrap_or(1.0),
            detection_mode: self.detection_mode.unwrap_or_default(),
            cycle_guard: true,
        })
    }

    /// Every effective setting for `net`, defaults included, as report
    /// header pairs.
    pub fn effective(&self, net: &Netlist, cfg: &CampaignConfig) -> Vec<(String, String)> {
        let s = |v: &dyn std::fmt::Display| v.to_string();
        let opt_path = |p: &Option<PathBuf>| {
            p.as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_else(|| "none".into())
        };
        let mut out = vec![
            ("bench".to_string(), self.bench.clone().unwrap_or_default()),
            ("circuit".to_string(), net.name().to_string()),
            ("scan_length".to_string(), s(&net.scan_length())),
            ("seed".to_string(), s(&cfg.rng_seed)),
            ("th1".to_string(), s(&cfg.thresholds.th1)),
            ("th2_ratio".to_string(), s(&cfg.thresholds.th2_ratio)),
            ("th2".to_string(), s(&cfg.thresholds.th2)),
            ("th3".to_string(), s(&cfg.thresholds.th3)),
        ];
        for p in cfg.generator.schedule() {
            out.push(("poly".to_string(), p.exponent_list()));
        }
        out.extend([
            (
                "detection_mode".to_string(),
                match cfg.detection_mode {
                    DetectionMode::Direct => "direct".to_string(),
                    DetectionMode::Signature => "signature".to_string(),
                },
            ),
            (
                "unload_interval".to_string(),
                s(&cfg.generator.unload_interval()),
            ),
            (
                "cycle_budget".to_string(),
                cfg.cycle_budget
                    .map(|b| b.to_string())
                    .unwrap_or_else(|| "none".into()),
            ),
            ("vector_file".to_string(), opt_path(&self.vector_file)),
            (
                "backtrack_limit".to_string(),
                s(&self.budget().backtrack_limit),
            ),
            ("target".to_string(), s(&cfg.target)),
        ]);
        out
    }
}
