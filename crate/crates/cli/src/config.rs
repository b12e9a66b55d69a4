//! Run configuration: defaults, then a `key = value` file, then the
//! `HEIGHTLAB_CACHE` environment variable, then command-line flags.

use std::path::PathBuf;

use heightlab_core::per1::{Lambda, Lift};
use heightlab_core::potentials::EscapeMode;

use crate::CliError;

pub const MAX_N: usize = 10;
pub const MAX_PRECISION_DIGITS: u32 = 17;
pub const CACHE_ENV: &str = "HEIGHTLAB_CACHE";

/// Every recognised key, in file spelling.
pub const KEYS: [&str; 10] =
    ["lambda", "lift", "escape", "P", "n_max", "grid", "tol", "seed", "precision_digits", "cache_dir"];

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub lambda: Lambda,
    pub lift: Lift,
    pub escape: EscapeMode,
    /// Largest finite place in truncated sums.
    pub p_bound: u64,
    pub n_max: usize,
    /// Archimedean sampling grid for radii.
    pub grid: usize,
    /// Series tolerance.
    pub tol: f64,
    /// Root-finder seed.
    pub seed: u64,
    /// Root residual target is `10^-precision_digits`.
    pub precision_digits: u32,
    /// `None` disables the polynomial cache.
    pub cache_dir: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            lambda: Lambda::from_i64(2).expect("2 is a valid multiplier"),
            lift: Lift::Standard,
            escape: EscapeMode::LogPlain,
            p_bound: 100,
            n_max: 8,
            grid: 64,
            tol: 1e-12,
            seed: 0x5eed,
            precision_digits: 12,
            cache_dir: std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cache").join("heightlab")),
        }
    }
}

fn usage(key: &str, value: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("invalid value {value:?} for {key}: {why}"))
}

impl Config {
    /// Sets one key; both `n_max` and `n-max` spellings are accepted.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let value = value.trim();
        let norm = key.trim().replace('-', "_");
        match norm.as_str() {
            "lambda" => self.lambda = value.parse().map_err(|e| usage(key, value, e))?,
            "lift" => self.lift = value.parse().map_err(|e| usage(key, value, e))?,
            "escape" => self.escape = value.parse().map_err(|e| usage(key, value, e))?,
            "P" | "p" => self.p_bound = value.parse().map_err(|e| usage(key, value, e))?,
            "n_max" => self.n_max = value.parse().map_err(|e| usage(key, value, e))?,
            "grid" => self.grid = value.parse().map_err(|e| usage(key, value, e))?,
            "tol" => self.tol = value.parse().map_err(|e| usage(key, value, e))?,
            "seed" => self.seed = value.parse().map_err(|e| usage(key, value, e))?,
            "precision_digits" => self.precision_digits = value.parse().map_err(|e| usage(key, value, e))?,
            "cache_dir" => {
                self.cache_dir = match value {
                    "" | "none" => None,
                    v => Some(PathBuf::from(v)),
                }
            }
            _ => return Err(CliError::Usage(format!("unknown configuration key {key:?}"))),
        }
        Ok(())
    }

    /// Applies a `key = value` file; `#` starts a comment.
    pub fn apply_file(&mut self, text: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", i + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.p_bound < 2 {
            return Err(CliError::Usage("P must be at least 2".into()));
        }
        if !(1..=MAX_N).contains(&self.n_max) {
            return Err(CliError::Usage(format!("n_max must lie in 1..={MAX_N}")));
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(CliError::Usage("tol must be positive".into()));
        }
        if self.grid == 0 {
            return Err(CliError::Usage("grid must be positive".into()));
        }
        if !(1..=MAX_PRECISION_DIGITS).contains(&self.precision_digits) {
            return Err(CliError::Usage(format!("precision_digits must lie in 1..={MAX_PRECISION_DIGITS}")));
        }
        Ok(())
    }

    /// Defaults, then `file`, then `env_cache`, then `flags`; validated.
    pub fn resolve(
        file: Option<&str>,
        env_cache: Option<&str>,
        flags: &[(&str, String)],
    ) -> Result<Config, CliError> {
        let mut cfg = Config::default();
        if let Some(text) = file {
            cfg.apply_file(text)?;
        }
        if let Some(dir) = env_cache {
            cfg.set("cache_dir", dir)?;
        }
        for (k, v) in flags {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn root_eps(&self) -> f64 {
        10f64.powi(-(self.precision_digits as i32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_and_flags() {
        let cfg = Config::resolve(Some("lambda = 2\n# comment\n"), None, &[]).unwrap();
        assert_eq!(cfg.lambda, Lambda::from_i64(2).unwrap());
        assert_eq!((cfg.p_bound, cfg.n_max), (100, 8));
        let cfg = Config::resolve(Some("lambda = 3/2\nP = 50  # inline\n"), None, &[("P", "30".into())]).unwrap();
        assert_eq!(cfg.p_bound, 30);
        assert_eq!(cfg.lambda.to_string(), "3/2");
    }

    #[test]
    fn rejects_bad_values() {
        assert!(Config::resolve(Some("lambda = 1"), None, &[]).is_err());
        assert!(Config::resolve(Some("lambda = -1"), None, &[]).is_err());
        assert!(Config::resolve(Some("lambda = 0"), None, &[]).is_err());
        assert!(Config::resolve(None, None, &[("n-max", "12".into())]).is_err());
        assert!(Config::resolve(None, None, &[("P", "1".into())]).is_err());
        assert!(Config::resolve(None, None, &[("tol", "0".into())]).is_err());
        assert!(Config::resolve(Some("colour = blue"), None, &[]).is_err());
        assert!(Config::resolve(Some("just words"), None, &[]).is_err());
        assert!(Config::resolve(None, None, &[("precision-digits", "18".into())]).is_err());
    }

    #[test]
    fn cache_precedence() {
        let cfg = Config::resolve(Some("cache_dir = /a"), Some("/b"), &[]).unwrap();
        assert_eq!(cfg.cache_dir, Some(PathBuf::from("/b")));
        let cfg = Config::resolve(Some("cache_dir = /a"), Some("/b"), &[("cache-dir", "/c".into())]).unwrap();
        assert_eq!(cfg.cache_dir, Some(PathBuf::from("/c")));
    }
}
