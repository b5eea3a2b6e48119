//! Flat `key = value` configuration with `#` comments.
//!
//! Every key is optional. Unknown keys are rejected so that typos do not
//! silently fall back to defaults.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use lagrange_core::monodromy::IntegratorOptions;
use lagrange_core::symplectic::CLASS_TOL;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value for {key}: {value:?}")]
    BadValue { line: usize, key: String, value: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanConfig {
    pub beta_min: f64,
    pub beta_max: f64,
    pub beta_steps: usize,
    pub e_min: f64,
    pub e_max: f64,
    pub e_steps: usize,
    pub class_tol: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub n_modes: usize,
    /// Also compute `i_{-1}` per cell (operator route).
    pub index_layer: bool,
    pub curves_e_min: f64,
    pub curves_e_max: f64,
    pub curves_e_steps: usize,
    /// Angles for the omega fan; empty disables it.
    pub fan_thetas: Vec<f64>,
    pub out_dir: PathBuf,
    pub cache_dir: PathBuf,
    /// Zero means one thread per core.
    pub threads: usize,
    pub seed: u64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            beta_min: 0.0,
            beta_max: 9.0,
            beta_steps: 10,
            e_min: 0.0,
            e_max: 0.9,
            e_steps: 10,
            class_tol: CLASS_TOL,
            rel_tol: 1e-11,
            abs_tol: 1e-12,
            n_modes: 64,
            index_layer: false,
            curves_e_min: -0.96,
            curves_e_max: 0.96,
            curves_e_steps: 81,
            fan_thetas: Vec::new(),
            out_dir: PathBuf::from("out"),
            cache_dir: PathBuf::from(".lagrange-cache"),
            threads: 0,
            seed: 20,
        }
    }
}

const E_LIMIT: f64 = 0.99;

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = v.parse().map_err(|_| bad(line, key, v))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(bad(line, key, v))
    }
}

fn parse_usize(line: usize, key: &str, v: &str) -> Result<usize, ConfigError> {
    v.parse().map_err(|_| bad(line, key, v))
}

fn bad(line: usize, key: &str, value: &str) -> ConfigError {
    ConfigError::BadValue {
        line,
        key: key.into(),
        value: value.into(),
    }
}

impl ScanConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.into(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut c = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = body.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                text: raw.into(),
            })?;
            c.set(line, k.trim(), v.trim())?;
        }
        c.validate()?;
        Ok(c)
    }

    fn set(&mut self, line: usize, key: &str, v: &str) -> Result<(), ConfigError> {
        match key {
            "beta_min" => self.beta_min = parse_f64(line, key, v)?,
            "beta_max" => self.beta_max = parse_f64(line, key, v)?,
            "beta_steps" => self.beta_steps = parse_usize(line, key, v)?,
            "e_min" => self.e_min = parse_f64(line, key, v)?,
            "e_max" => self.e_max = parse_f64(line, key, v)?,
            "e_steps" => self.e_steps = parse_usize(line, key, v)?,
            "class_tol" => self.class_tol = parse_f64(line, key, v)?,
            "rel_tol" => self.rel_tol = parse_f64(line, key, v)?,
            "abs_tol" => self.abs_tol = parse_f64(line, key, v)?,
            "n_modes" => self.n_modes = parse_usize(line, key, v)?,
            "index_layer" => {
                self.index_layer = match v {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    _ => return Err(bad(line, key, v)),
                }
            }
            "curves_e_min" => self.curves_e_min = parse_f64(line, key, v)?,
            "curves_e_max" => self.curves_e_max = parse_f64(line, key, v)?,
            "curves_e_steps" => self.curves_e_steps = parse_usize(line, key, v)?,
            "fan_thetas" => {
                self.fan_thetas = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| parse_f64(line, key, s))
                    .collect::<Result<_, _>>()?
            }
            "out_dir" => self.out_dir = PathBuf::from(v),
            "cache_dir" => self.cache_dir = PathBuf::from(v),
            "threads" => self.threads = parse_usize(line, key, v)?,
            "seed" => self.seed = v.parse().map_err(|_| bad(line, key, v))?,
            _ => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.into(),
                })
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let inv = |m: String| Err(ConfigError::Invalid(m));
        if !(0.0 <= self.beta_min && self.beta_min < self.beta_max && self.beta_max <= 9.0) {
            return inv(format!("beta range [{}, {}] not inside [0, 9]", self.beta_min, self.beta_max));
        }
        for (a, b, what) in [
            (self.e_min, self.e_max, "e"),
            (self.curves_e_min, self.curves_e_max, "curves_e"),
        ] {
            if !(-E_LIMIT < a && a < b && b < E_LIMIT) {
                return inv(format!("{what} range [{a}, {b}] not inside (-0.99, 0.99)"));
            }
        }
        if self.beta_steps < 2 || self.e_steps < 2 || self.curves_e_steps < 2 {
            return inv("step counts must be at least 2".into());
        }
        if !(self.class_tol > 0.0 && self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return inv("tolerances must be positive".into());
        }
        if self.n_modes < lagrange_core::spectral::MIN_N {
            return inv(format!("n_modes must be at least {}", lagrange_core::spectral::MIN_N));
        }
        Ok(())
    }

    pub fn integrator(&self) -> IntegratorOptions {
        IntegratorOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            ..Default::default()
        }
    }

    pub fn beta_grid(&self) -> Vec<f64> {
        lagrange_core::curves::linspace(self.beta_min, self.beta_max, self.beta_steps)
    }

    pub fn e_grid(&self) -> Vec<f64> {
        lagrange_core::curves::linspace(self.e_min, self.e_max, self.e_steps)
    }

    pub fn curves_e_grid(&self) -> Vec<f64> {
        lagrange_core::curves::linspace(self.curves_e_min, self.curves_e_max, self.curves_e_steps)
    }

    /// The keys that determine scan results, one `key=value` per line in a
    /// fixed order, floats in round-trip form.
    pub fn canonical_scan_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "version=1");
        let _ = writeln!(s, "beta_min={:e}", self.beta_min);
        let _ = writeln!(s, "beta_max={:e}", self.beta_max);
        let _ = writeln!(s, "beta_steps={}", self.beta_steps);
        let _ = writeln!(s, "e_min={:e}", self.e_min);
        let _ = writeln!(s, "e_max={:e}", self.e_max);
        let _ = writeln!(s, "e_steps={}", self.e_steps);
        let _ = writeln!(s, "class_tol={:e}", self.class_tol);
        let _ = writeln!(s, "rel_tol={:e}", self.rel_tol);
        let _ = writeln!(s, "abs_tol={:e}", self.abs_tol);
        let _ = writeln!(s, "index_layer={}", self.index_layer);
        if self.index_layer {
            let _ = writeln!(s, "n_modes={}", self.n_modes);
        }
        s
    }

    /// Lower-case hex SHA-256 of [`ScanConfig::canonical_scan_text`].
    pub fn scan_hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_scan_text().as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(ScanConfig::parse("# nothing\n\n").unwrap(), ScanConfig::default());
    }

    #[test]
    fn keys_and_comments() {
        let c = ScanConfig::parse("beta_steps = 5 # five\n e_max=0.5\nfan_thetas = 0.1, 2.5\nindex_layer=yes")
            .unwrap();
        assert_eq!(c.beta_steps, 5);
        assert_eq!(c.e_max, 0.5);
        assert_eq!(c.fan_thetas, vec![0.1, 2.5]);
        assert!(c.index_layer);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(ScanConfig::parse("beta_stpes=3"), Err(ConfigError::UnknownKey { line: 1, .. })));
        assert!(matches!(ScanConfig::parse("\nbeta_min"), Err(ConfigError::Syntax { line: 2, .. })));
        assert!(matches!(ScanConfig::parse("e_max=abc"), Err(ConfigError::BadValue { .. })));
        assert!(matches!(ScanConfig::parse("e_max=0.995"), Err(ConfigError::Invalid(_))));
        assert!(matches!(ScanConfig::parse("beta_steps=1"), Err(ConfigError::Invalid(_))));
        assert!(matches!(ScanConfig::parse("beta_max=9.5"), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn hash_ignores_output_settings() {
        let a = ScanConfig::default();
        let b = ScanConfig {
            out_dir: "elsewhere".into(),
            threads: 7,
            n_modes: 32,
            ..a.clone()
        };
        assert_eq!(a.scan_hash(), b.scan_hash());
        let c = ScanConfig { beta_steps: 11, ..a.clone() };
        assert_ne!(a.scan_hash(), c.scan_hash());
        assert_eq!(a.scan_hash().len(), 64);
    }
}
