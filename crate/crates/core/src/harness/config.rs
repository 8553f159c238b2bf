//! Flat `key = value` experiment configuration.
//!
//! Blank lines and `#` comments are ignored. CLI flags are applied on top of
//! the file through the same [`ExperimentConfig::set`] entry point.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::policies::PolicyKind;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum WorkloadFamily {
    Zipf,
    Correlated,
    Adversarial,
}

impl FromStr for WorkloadFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zipf" | "iid" => Ok(WorkloadFamily::Zipf),
            "correlated" | "grouped" => Ok(WorkloadFamily::Correlated),
            "adversarial" => Ok(WorkloadFamily::Adversarial),
            other => Err(Error::Config(format!(
                "unknown workload '{other}' (expected zipf, correlated or adversarial)"
            ))),
        }
    }
}

impl fmt::Display for WorkloadFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WorkloadFamily::Zipf => "zipf",
            WorkloadFamily::Correlated => "correlated",
            WorkloadFamily::Adversarial => "adversarial",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WorkloadSpec {
    pub family: WorkloadFamily,
    pub n: usize,
    pub beta: f64,
    /// Group size of the correlated model.
    pub group_size: usize,
    /// Stop probability of the correlated model.
    pub gamma: f64,
    /// Number of cycles of the adversarial stream.
    pub cycles: usize,
}

impl Default for WorkloadSpec {
    fn default() -> Self {
        WorkloadSpec {
            family: WorkloadFamily::Zipf,
            n: 10_000,
            beta: 0.8,
            group_size: 10,
            gamma: 0.5,
            cycles: 17,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub policy: PolicyKind,
    pub workload: WorkloadSpec,
    pub m: usize,
    pub k: usize,
    pub slots: u64,
    pub seeds: Vec<u64>,
    /// `None` means "preset default" (k slots for presets, 0 for single runs).
    pub warmup: Option<usize>,
    pub out: Option<PathBuf>,
    pub preset: Option<String>,
    explicit: BTreeSet<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            policy: PolicyKind::Cmp,
            workload: WorkloadSpec::default(),
            m: 10,
            k: 100,
            slots: 10_000,
            seeds: vec![1],
            warmup: None,
            out: None,
            preset: None,
            explicit: BTreeSet::new(),
        }
    }
}

pub const KEYS: [&str; 15] = [
    "policy", "workload", "n", "beta", "b", "gamma", "cycles", "m", "k", "slots", "seeds", "seed",
    "warmup", "out", "preset",
];

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{value}'")))
}

/// Seed lists: `7`, `1,2,5` or `1..=20`.
pub fn parse_seeds(value: &str) -> Result<Vec<u64>> {
    if let Some((lo, hi)) = value.split_once("..=") {
        let lo: u64 = parse_num("seeds", lo.trim())?;
        let hi: u64 = parse_num("seeds", hi.trim())?;
        if lo > hi {
            return Err(Error::Config(format!("seeds: empty range {value}")));
        }
        return Ok((lo..=hi).collect());
    }
    let seeds = value
        .split(',')
        .map(|s| parse_num("seeds", s.trim()))
        .collect::<Result<Vec<u64>>>()?;
    Ok(seeds)
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (number, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at_line = |msg: String| Error::Config(format!("line {}: {msg}", number + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| at_line(format!("expected 'key = value', got '{line}'")))?;
            cfg.set(key.trim(), value.trim()).map_err(|e| match e {
                Error::Config(msg) => at_line(msg),
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one key; the value is parsed but cross-field checks wait for
    /// [`ExperimentConfig::validate`].
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "policy" => self.policy = value.parse()?,
            "workload" => self.workload.family = value.parse()?,
            "n" => self.workload.n = parse_num(key, value)?,
            "beta" => self.workload.beta = parse_num(key, value)?,
            "b" => self.workload.group_size = parse_num(key, value)?,
            "gamma" => self.workload.gamma = parse_num(key, value)?,
            "cycles" => self.workload.cycles = parse_num(key, value)?,
            "m" => self.m = parse_num(key, value)?,
            "k" => self.k = parse_num(key, value)?,
            "slots" => self.slots = parse_num(key, value)?,
            "seeds" => self.seeds = parse_seeds(value)?,
            "seed" => self.seeds = vec![parse_num(key, value)?],
            "warmup" => self.warmup = Some(parse_num(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "preset" => self.preset = Some(value.to_string()),
            other => {
                return Err(Error::Config(format!(
                    "unknown key '{other}' (known: {})",
                    KEYS.join(", ")
                )))
            }
        }
        let canonical = if key == "seed" { "seeds" } else { key };
        self.explicit.insert(canonical.to_string());
        Ok(())
    }

    /// Whether `key` was given in the file or on the command line.
    pub fn is_explicit(&self, key: &str) -> bool {
        self.explicit.contains(key)
    }

    pub fn validate(&self) -> Result<()> {
        let w = &self.workload;
        if self.m == 0 || self.k == 0 || w.n == 0 || self.slots == 0 {
            return Err(Error::Config("n, m, k and slots must be positive".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds must not be empty".into()));
        }
        if !(w.beta.is_finite() && w.beta >= 0.0) {
            return Err(Error::Config(format!(
                "beta must be finite and >= 0, got {}",
                w.beta
            )));
        }
        if w.group_size == 0 || !(w.gamma > 0.0 && w.gamma <= 1.0) {
            return Err(Error::Config("need b >= 1 and gamma in (0, 1]".into()));
        }
        if let Some(warmup) = self.warmup {
            if warmup as u64 >= self.slots {
                return Err(Error::Config(format!(
                    "warmup {warmup} must be below slots {}",
                    self.slots
                )));
            }
        }
        Ok(())
    }

    /// Warm-up for single runs: the configured value or 0.
    pub fn warmup_or_zero(&self) -> usize {
        self.warmup.unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_file_with_comments() {
        let cfg = ExperimentConfig::parse(
            "# grid point\npolicy = lru\nworkload = zipf\nn = 500\nbeta=1.2\nm = 4\nk = 8 # per cache\nseeds = 1..=3\n",
        )
        .unwrap();
        assert_eq!(cfg.policy, PolicyKind::Lru);
        assert_eq!(cfg.workload.n, 500);
        assert_eq!(cfg.workload.beta, 1.2);
        assert_eq!((cfg.m, cfg.k), (4, 8));
        assert_eq!(cfg.seeds, vec![1, 2, 3]);
        assert!(cfg.is_explicit("n"));
        assert!(!cfg.is_explicit("slots"));
    }

    #[test]
    fn errors_name_the_line() {
        let err = ExperimentConfig::parse("n = 10\n\nm = ten\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = ExperimentConfig::parse("colour = red\n").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
        let err = ExperimentConfig::parse("just words\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn validation() {
        assert!(ExperimentConfig::parse("k = 0").is_err());
        assert!(ExperimentConfig::parse("gamma = 0").is_err());
        assert!(ExperimentConfig::parse("slots = 10\nwarmup = 10").is_err());
        assert!(ExperimentConfig::parse("beta = -1").is_err());
    }

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("4").unwrap(), vec![4]);
        assert_eq!(parse_seeds("3, 1").unwrap(), vec![3, 1]);
        assert_eq!(parse_seeds("2..=4").unwrap(), vec![2, 3, 4]);
        assert!(parse_seeds("5..=1").is_err());
        assert!(parse_seeds("x").is_err());
    }
}
