//! Run configuration: seed, output directory, tolerance and resolution
//! overrides. Loadable from a flat key=value text file and overridable from
//! the command line.

use anyhow::{bail, Context, Result};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub tolerances: BTreeMap<String, f64>,
    pub resolutions: BTreeMap<String, usize>,
    pub parallel_cases: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            out_dir: PathBuf::from("reports"),
            tolerances: BTreeMap::new(),
            resolutions: BTreeMap::new(),
            parallel_cases: false,
        }
    }
}

impl RunConfig {
    pub fn tol(&self, key: &str, default: f64) -> f64 {
        self.tolerances.get(key).copied().unwrap_or(default)
    }

    pub fn res(&self, key: &str, default: usize) -> usize {
        self.resolutions.get(key).copied().unwrap_or(default)
    }

    /// Flat key=value file: `seed`, `out_dir`, `parallel`,
    /// `tolerance.<name>`, `resolution.<name>`. `#` starts a comment.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg = RunConfig::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!(
                    "config line {}: expected key=value, got '{line}'",
                    lineno + 1
                );
            };
            let (key, value) = (key.trim(), value.trim());
            self.apply_pair(key, value)
                .with_context(|| format!("config line {}", lineno + 1))?;
        }
        Ok(())
    }

    pub fn apply_pair(&mut self, key: &str, value: &str) -> Result<()> {
        if key == "seed" {
            self.seed = value.parse().context("bad seed")?;
        } else if key == "out_dir" {
            self.out_dir = PathBuf::from(value);
        } else if key == "parallel" {
            self.parallel_cases = value.parse().context("bad parallel flag")?;
        } else if let Some(name) = key.strip_prefix("tolerance.") {
            self.tolerances
                .insert(name.to_string(), value.parse().context("bad tolerance")?);
        } else if let Some(name) = key.strip_prefix("resolution.") {
            self.resolutions
                .insert(name.to_string(), value.parse().context("bad resolution")?);
        } else {
            bail!("unknown config key '{key}'");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_file_format() {
        let mut cfg = RunConfig::default();
        cfg.apply_text("# comment\nseed = 7\ntolerance.comass = 1e-5\nresolution.viro = 64\n")
            .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.tol("comass", 0.0), 1e-5);
        assert_eq!(cfg.res("viro", 0), 64);
    }

    #[test]
    fn rejects_malformed_lines() {
        let mut cfg = RunConfig::default();
        let err = cfg.apply_text("seed 7\n").unwrap_err();
        assert!(err.to_string().contains("line 1"));
        let err = cfg.apply_text("mystery = 3\n").unwrap_err();
        assert!(format!("{err:#}").contains("unknown config key"));
    }
}
