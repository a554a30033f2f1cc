//! Flat experiment configuration: built-in defaults, then a JSON file, then
//! command-line flags, validated as a whole.

use std::path::{Path, PathBuf};

use qnls_core::WeightFamily;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// Largest ambient truncation the runner accepts.
pub const MAX_AMBIENT: usize = 128;
/// Largest `|t|` the runner accepts.
pub const MAX_TIME: f64 = 4.0;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid config key `{key}`: {reason}")]
    Invalid { key: String, reason: String },

    #[error("cannot read config file {path}: {reason}")]
    Unreadable { path: PathBuf, reason: String },
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.into(), reason: reason.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Japanese,
    Equivalent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Initial {
    Gaussian,
    PlaneWave,
}

/// The resolved parameters of one run; key names are those of the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Sobolev index of the measure and of the energy weight.
    pub s: f64,
    /// Frequency truncation of the flow and energies.
    #[serde(rename = "N")]
    pub n_cut: usize,
    /// Ambient truncation of sampled states.
    #[serde(rename = "M")]
    pub m_ambient: usize,
    /// Transport or simulation time.
    pub t: f64,
    /// Integrator step.
    pub h: f64,
    /// Cutoff level of `C_N <= R`; `null` disables the restriction.
    #[serde(rename = "R")]
    pub cutoff_r: Option<f64>,
    /// `L^p` exponents for `lp-density`.
    pub p: Vec<f64>,
    pub n_samples: usize,
    pub seed: u64,
    pub output_path: PathBuf,
    pub weight_family: Family,
    /// Truncations compared against `M` by `convergence` and `lp-density`;
    /// `null` means the powers of two from 4 (or 1 when `M <= 4`) below `M`.
    pub n_list: Option<Vec<usize>>,
    /// Sobolev index of monitored norms.
    pub sigma: f64,
    /// Largest moment order for `moments`.
    pub m_max: u32,
    /// Snapshot count for `simulate`.
    pub snapshots: usize,
    /// Simpson nodes of the normal-form density.
    pub quad_points: usize,
    /// Initial data for `simulate`.
    pub initial: Initial,
    /// Scale applied to the initial data of `simulate`.
    pub amplitude: f64,
    /// Frequency of plane-wave initial data.
    pub mode: i64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            s: 2.0,
            n_cut: 4,
            m_ambient: 16,
            t: 0.3,
            h: 1e-3,
            cutoff_r: Some(10.0),
            p: vec![1.0, 2.0],
            n_samples: 1000,
            seed: 2024,
            output_path: PathBuf::from("qnls-out"),
            weight_family: Family::Japanese,
            n_list: None,
            sigma: 0.5,
            m_max: 16,
            snapshots: 11,
            quad_points: 501,
            initial: Initial::Gaussian,
            amplitude: 1.0,
            mode: 1,
        }
    }
}

impl Config {
    /// Defaults, overlaid by `file` (a flat JSON object) and then by `flags`.
    pub fn resolve(file: Option<&Path>, flags: Map<String, Value>) -> Result<Self, ConfigError> {
        let mut merged = Map::new();
        if let Some(path) = file {
            let unreadable = |reason: String| ConfigError::Unreadable { path: path.to_path_buf(), reason };
            let text = std::fs::read_to_string(path).map_err(|e| unreadable(e.to_string()))?;
            match serde_json::from_str(&text).map_err(|e| unreadable(e.to_string()))? {
                Value::Object(map) => merged = map,
                _ => return Err(unreadable("expected a flat JSON object".into())),
            }
        }
        merged.extend(flags);
        // Deserialize each key on its own first so a failure names its key.
        for (key, value) in &merged {
            let single = Value::Object(Map::from_iter([(key.clone(), value.clone())]));
            if let Err(e) = serde_json::from_value::<Config>(single) {
                let msg = e.to_string();
                let reason = if msg.starts_with("unknown field") { "unknown key".to_string() } else { msg };
                return Err(invalid(key, reason));
            }
        }
        let cfg: Config = serde_json::from_value(Value::Object(merged)).map_err(|e| invalid("?", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.s > 1.5 && self.s <= 4.0) {
            return Err(invalid("s", format!("{} is outside (1.5, 4]", self.s)));
        }
        if self.n_cut == 0 {
            return Err(invalid("N", "must be at least 1"));
        }
        if self.m_ambient > MAX_AMBIENT {
            return Err(invalid("M", format!("{} exceeds {MAX_AMBIENT}", self.m_ambient)));
        }
        if self.n_cut > self.m_ambient {
            return Err(invalid("N", format!("{} exceeds M = {}", self.n_cut, self.m_ambient)));
        }
        if !(self.t.abs() <= MAX_TIME) {
            return Err(invalid("t", format!("|{}| exceeds {MAX_TIME}", self.t)));
        }
        if !(self.h > 0.0 && self.h <= 0.1) {
            return Err(invalid("h", format!("{} is outside (0, 0.1]", self.h)));
        }
        if let Some(r) = self.cutoff_r {
            if !(r > 0.0 && r.is_finite()) {
                return Err(invalid("R", format!("{r} must be positive")));
            }
        }
        if self.p.is_empty() || self.p.iter().any(|&p| !(p >= 1.0 && p.is_finite())) {
            return Err(invalid("p", "needs one or more exponents >= 1"));
        }
        if self.n_samples == 0 {
            return Err(invalid("n_samples", "must be at least 1"));
        }
        let n_list = self.n_list();
        if n_list.is_empty() || n_list.iter().any(|&n| n == 0 || n > self.m_ambient) {
            return Err(invalid("n_list", format!("entries must lie in 1..={}", self.m_ambient)));
        }
        if !(self.sigma >= 0.0 && self.sigma < self.s - 0.5) {
            return Err(invalid("sigma", format!("{} must lie in [0, s - 1/2)", self.sigma)));
        }
        if self.m_max < 2 {
            return Err(invalid("m_max", "must be at least 2"));
        }
        if self.snapshots < 2 {
            return Err(invalid("snapshots", "must be at least 2"));
        }
        if self.quad_points < 3 || self.quad_points % 2 == 0 {
            return Err(invalid("quad_points", "must be odd and at least 3"));
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(invalid("amplitude", "must be finite and non-negative"));
        }
        if self.initial == Initial::PlaneWave && self.mode.unsigned_abs() as usize > self.n_cut {
            return Err(invalid("mode", format!("|{}| exceeds N = {}", self.mode, self.n_cut)));
        }
        Ok(())
    }

    pub fn n_list(&self) -> Vec<usize> {
        if let Some(list) = &self.n_list {
            return list.clone();
        }
        let start = if self.m_ambient > 4 { 4 } else { 1 };
        (0..).map(|e| start << e).take_while(|&n| n < self.m_ambient).collect()
    }

    pub fn family(&self) -> WeightFamily {
        match self.weight_family {
            Family::Japanese => WeightFamily::japanese(self.s),
            Family::Equivalent => WeightFamily::equivalent(self.s),
        }
    }
}
