//! Flat `key = value` run configuration.
//!
//! Files hold one assignment per line; `#` starts a comment. Values given
//! on the command line replace file values. Missing keys take defaults,
//! except that a point run needs `pe`, `ps` and at least one of
//! `fidelity_threshold` / `cutoff` (the other is derived).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::chain::PathSpec;
use crate::engine::{SimParams, DEFAULT_DELTA_T_US, DEFAULT_MAX_STEPS};
use crate::error::{Error, Result};
use crate::fidelity::{Fidelity, DEFAULT_MEMORY_TAU_STEPS, DEFAULT_TAU_STEPS};
use crate::sweep::{ModelSettings, DEFAULT_PRIORS_B, DEFAULT_SEED, DEFAULT_TRIALS};

pub const KEYS: [&str; 17] = [
    "pe",
    "ps",
    "tau_steps",
    "memory_tau_steps",
    "fidelity_threshold",
    "cutoff",
    "trials",
    "seed",
    "max_steps",
    "delta_t_us",
    "hops_a",
    "hops_b",
    "prior_links_a",
    "prior_links_b",
    "discard_on_swap_failure",
    "apply_creation_noise",
    "output_dir",
];

pub const DEFAULT_OUTPUT_DIR: &str = "entroute-out";

/// Unresolved assignments, in file order of precedence.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected key = value",
                    i + 1
                )));
            };
            raw.set(key.trim(), value.trim())?;
        }
        Ok(raw)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(Error::Config(format!("unknown key '{key}'")));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn set_assignment(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{assignment}' is not key=value")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn merge(&mut self, other: &RawConfig) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }

    pub fn remove(&mut self, key: &str) {
        self.values.remove(key);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::Config(format!("bad value for '{key}': '{v}'")))
            })
            .transpose()
    }

    fn parsed_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    fn required<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.parsed(key)?
            .ok_or_else(|| Error::Config(format!("missing required key '{key}'")))
    }
}

/// A fully resolved configuration with every default materialized.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub pe: f64,
    pub ps: f64,
    pub tau_steps: f64,
    pub memory_tau_steps: f64,
    pub fidelity_threshold: f64,
    pub cutoff: u32,
    pub trials: u64,
    pub seed: u64,
    pub max_steps: u32,
    pub delta_t_us: f64,
    pub hops_a: usize,
    pub hops_b: usize,
    pub prior_links_a: String,
    pub prior_links_b: String,
    pub discard_on_swap_failure: bool,
    pub apply_creation_noise: bool,
    pub output_dir: PathBuf,
}

impl RunConfig {
    /// Resolves a configuration. `pe` and `ps` are required.
    pub fn resolve(raw: &RawConfig) -> Result<Self> {
        let settings = ModelSettings {
            tau_steps: raw.parsed_or("tau_steps", DEFAULT_TAU_STEPS)?,
            memory_tau_steps: raw.parsed_or("memory_tau_steps", DEFAULT_MEMORY_TAU_STEPS)?,
            max_steps: raw.parsed_or("max_steps", DEFAULT_MAX_STEPS)?,
            ..ModelSettings::default()
        };
        let (fidelity_threshold, cutoff) = match (
            raw.parsed::<f64>("fidelity_threshold")?,
            raw.parsed::<u32>("cutoff")?,
        ) {
            (Some(f), Some(c)) => (f, c),
            (None, Some(c)) => (settings.threshold_for_cutoff(c)?.value(), c),
            (Some(f), None) => (f, settings.cutoff_for_threshold(Fidelity::new(f)?)?),
            (None, None) => {
                return Err(Error::Config(
                    "one of 'fidelity_threshold' or 'cutoff' is required".into(),
                ))
            }
        };
        let cfg = RunConfig {
            pe: raw.required("pe")?,
            ps: raw.required("ps")?,
            tau_steps: settings.tau_steps,
            memory_tau_steps: settings.memory_tau_steps,
            fidelity_threshold,
            cutoff,
            trials: raw.parsed_or("trials", DEFAULT_TRIALS)?,
            seed: raw.parsed_or("seed", DEFAULT_SEED)?,
            max_steps: settings.max_steps,
            delta_t_us: raw.parsed_or("delta_t_us", DEFAULT_DELTA_T_US)?,
            hops_a: raw.parsed_or("hops_a", 2)?,
            hops_b: raw.parsed_or("hops_b", 4)?,
            prior_links_a: raw.get("prior_links_a").unwrap_or("").to_string(),
            prior_links_b: raw
                .get("prior_links_b")
                .unwrap_or(DEFAULT_PRIORS_B)
                .to_string(),
            discard_on_swap_failure: raw.parsed_or("discard_on_swap_failure", true)?,
            apply_creation_noise: raw.parsed_or("apply_creation_noise", true)?,
            output_dir: PathBuf::from(raw.get("output_dir").unwrap_or(DEFAULT_OUTPUT_DIR)),
        };
        cfg.sim_params()?;
        cfg.path_a()?;
        cfg.path_b()?;
        Ok(cfg)
    }

    pub fn settings(&self) -> ModelSettings {
        ModelSettings {
            tau_steps: self.tau_steps,
            memory_tau_steps: self.memory_tau_steps,
            max_steps: self.max_steps,
            delta_t_us: self.delta_t_us,
            discard_on_swap_failure: self.discard_on_swap_failure,
            apply_creation_noise: self.apply_creation_noise,
        }
    }

    pub fn sim_params(&self) -> Result<SimParams> {
        self.settings().params_with(
            self.pe,
            self.ps,
            Fidelity::new(self.fidelity_threshold)?,
            self.cutoff,
        )
    }

    pub fn path_a(&self) -> Result<PathSpec> {
        PathSpec::parse(self.hops_a, &self.prior_links_a)
    }

    pub fn path_b(&self) -> Result<PathSpec> {
        PathSpec::parse(self.hops_b, &self.prior_links_b)
    }

    /// `(key, value)` pairs in [`KEYS`] order. Floats use the shortest
    /// representation that parses back to the same value.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("pe", self.pe.to_string()),
            ("ps", self.ps.to_string()),
            ("tau_steps", self.tau_steps.to_string()),
            ("memory_tau_steps", self.memory_tau_steps.to_string()),
            ("fidelity_threshold", self.fidelity_threshold.to_string()),
            ("cutoff", self.cutoff.to_string()),
            ("trials", self.trials.to_string()),
            ("seed", self.seed.to_string()),
            ("max_steps", self.max_steps.to_string()),
            ("delta_t_us", self.delta_t_us.to_string()),
            ("hops_a", self.hops_a.to_string()),
            ("hops_b", self.hops_b.to_string()),
            ("prior_links_a", self.prior_links_a.clone()),
            ("prior_links_b", self.prior_links_b.clone()),
            (
                "discard_on_swap_failure",
                self.discard_on_swap_failure.to_string(),
            ),
            (
                "apply_creation_noise",
                self.apply_creation_noise.to_string(),
            ),
            ("output_dir", self.output_dir.display().to_string()),
        ]
    }

    /// The configuration as a config file.
    pub fn to_config_text(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// Reads back the `config.<key>=` lines of a summary file.
    pub fn from_summary(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        for line in text.lines() {
            if let Some(rest) = line.strip_prefix("config.") {
                raw.set_assignment(rest)?;
            }
        }
        Self::resolve(&raw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(text: &str) -> RawConfig {
        RawConfig::parse(text).unwrap()
    }

    #[test]
    fn parses_comments_and_overrides() {
        let mut r = raw("# header\npe = 0.2  # trailing\n\nps=0.9\ncutoff = 10\n");
        assert_eq!(r.get("pe"), Some("0.2"));
        r.set_assignment("pe=0.3").unwrap();
        let cfg = RunConfig::resolve(&r).unwrap();
        assert_eq!(cfg.pe, 0.3);
        assert_eq!(cfg.trials, 10_000);
        assert_eq!(cfg.prior_links_b, "1-2,3-5");
    }

    #[test]
    fn missing_pe_names_the_key() {
        let err = RunConfig::resolve(&raw("ps = 0.9\ncutoff = 5")).unwrap_err();
        assert!(err.to_string().contains("'pe'"), "{err}");
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lines() {
        assert!(RawConfig::parse("nonsense = 1").is_err());
        assert!(RawConfig::parse("pe 0.3").is_err());
        assert!(RunConfig::resolve(&raw("pe = x\nps = 1\ncutoff = 5")).is_err());
    }

    #[test]
    fn derives_threshold_from_cutoff() {
        let cfg = RunConfig::resolve(&raw("pe=0.5\nps=0.5\ncutoff=10")).unwrap();
        assert!((cfg.fidelity_threshold - 0.921876).abs() < 1e-6);
    }

    #[test]
    fn derives_cutoff_from_threshold() {
        let cfg = RunConfig::resolve(&raw("pe=0.5\nps=0.5\nfidelity_threshold=0.95")).unwrap();
        assert_eq!(cfg.cutoff, 5);
        let err = RunConfig::resolve(&raw("pe=0.5\nps=0.5\nfidelity_threshold=0.999")).unwrap_err();
        assert!(matches!(err, Error::InfeasibleThreshold { .. }));
        assert!(RunConfig::resolve(&raw("pe=0.5\nps=0.5")).is_err());
    }

    #[test]
    fn summary_round_trip() {
        let cfg =
            RunConfig::resolve(&raw("pe=0.15\nps=0.9\ncutoff=20\nseed=7\nprior_links_a=")).unwrap();
        let summary: String = cfg
            .entries()
            .into_iter()
            .map(|(k, v)| format!("config.{k}={v}\n"))
            .collect();
        assert_eq!(RunConfig::from_summary(&summary).unwrap(), cfg);
        assert_eq!(
            RunConfig::resolve(&raw(&cfg.to_config_text())).unwrap(),
            cfg
        );
    }
}
