//! Flat TOML run configuration. Every key mirrors a command-line flag
//! (dashes become underscores); flags given on the command line win.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub input: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub candidates: Option<String>,
    pub min_tail: Option<usize>,
    pub bootstrap: Option<usize>,
    pub families: Option<String>,
    pub kmin: Option<usize>,
    pub kmax: Option<usize>,
    pub alpha: Option<f64>,
    pub rt: Option<f64>,
    pub bt: Option<String>,
    pub years: Option<f64>,
    pub iterations: Option<usize>,
    pub models: Option<String>,
    pub lambda_body: Option<f64>,
    pub lambda_tail: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Body-tail threshold: a number or `auto` (minimum-AD scan).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Auto,
    Value(f64),
}

impl std::str::FromStr for Threshold {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.trim().eq_ignore_ascii_case("auto") {
            return Ok(Threshold::Auto);
        }
        match s.trim().parse::<f64>() {
            Ok(v) if v.is_finite() && v >= 0.0 => Ok(Threshold::Value(v)),
            _ => Err(format!("expected a non-negative number or 'auto', got '{s}'")),
        }
    }
}

pub fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(String::from).collect()
}
