//! Run configuration: defaults, JSON file representation and flag overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cpdirac_core::stationary::Route;
use cpdirac_core::verification::Fault;
use serde::{Deserialize, Serialize};

/// Everything a subcommand needs. Unset options fall back to the
/// subcommand's own defaults (auto window, family defaults, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    pub family: Option<String>,
    pub a: Option<f64>,
    pub mu: Option<f64>,
    pub n: Option<u32>,
    /// Expression in `x` for the custom family.
    pub w_expr: Option<String>,
    pub mass: f64,
    pub energies: Vec<f64>,
    pub grid_l: Option<f64>,
    pub grid_n: usize,
    pub bc: [f64; 2],
    pub window: Option<f64>,
    pub samples: Option<usize>,
    pub tol: f64,
    pub routes: Vec<Route>,
    pub envelope: bool,
    pub sweep: Vec<usize>,
    pub max_cond: f64,
    pub reality_tol: Option<f64>,
    pub matrix_out: Option<PathBuf>,
    pub panel: Option<String>,
    pub families: Option<Vec<String>>,
    pub fault: Option<Fault>,
    pub spectral: bool,
    pub out: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: String::new(),
            family: None,
            a: None,
            mu: None,
            n: None,
            w_expr: None,
            mass: 1.0,
            energies: Vec::new(),
            grid_l: None,
            grid_n: 400,
            bc: [1.0, 0.0],
            window: None,
            samples: None,
            tol: 1e-9,
            routes: Vec::new(),
            envelope: false,
            sweep: Vec::new(),
            max_cond: 12.0,
            reality_tol: None,
            matrix_out: None,
            panel: None,
            families: None,
            fault: None,
            spectral: true,
            out: None,
            json: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    /// Output samples for the stationary solver: 2N + 1 unless set.
    pub fn sample_count(&self) -> usize {
        self.samples.unwrap_or(2 * self.grid_n + 1)
    }
}

/// Parses `"a,b"` into a boundary condition pair.
pub fn parse_bc(text: &str) -> Result<[f64; 2]> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        bail!("--bc expects two comma-separated numbers, got `{text}`");
    }
    let plus: f64 = parts[0].parse().with_context(|| format!("bad chi_plus(0) `{}`", parts[0]))?;
    let minus: f64 = parts[1].parse().with_context(|| format!("bad chi_minus(0) `{}`", parts[1]))?;
    Ok([plus, minus])
}

/// Parses a comma-separated list; the empty string is the empty list.
pub fn parse_list<T: std::str::FromStr>(text: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| anyhow::anyhow!("bad list item `{s}`: {e}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn populated_config_round_trips_exactly() {
        let cfg = RunConfig {
            command: "solve".into(),
            family: Some("exp".into()),
            a: Some(-1.0),
            mu: Some(0.1 + 0.2),
            energies: vec![2.0, -1.5, 1.0 / 3.0],
            routes: vec![Route::FirstOrder, Route::PhiForm],
            fault: Some(Fault::CpWiring),
            bc: [0.25, -1e-300],
            window: Some(std::f64::consts::PI),
            out: Some("x/y.csv".into()),
            ..RunConfig::default()
        };
        let back = RunConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.mu.unwrap().to_bits(), (0.1f64 + 0.2).to_bits());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_json(r#"{"famly": "exp"}"#).is_err());
    }

    #[test]
    fn bc_parsing() {
        assert_eq!(parse_bc("1,0").unwrap(), [1.0, 0.0]);
        assert_eq!(parse_bc(" 0.5 , -2 ").unwrap(), [0.5, -2.0]);
        assert!(parse_bc("1").is_err());
        assert!(parse_bc("a,b").is_err());
    }

    #[test]
    fn list_parsing() {
        assert_eq!(parse_list::<usize>("200,400").unwrap(), vec![200, 400]);
        assert!(parse_list::<usize>("").unwrap().is_empty());
    }

    #[test]
    fn sample_count_follows_grid() {
        let cfg = RunConfig { grid_n: 10, ..RunConfig::default() };
        assert_eq!(cfg.sample_count(), 21);
    }
}
