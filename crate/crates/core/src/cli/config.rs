//! Flat `key=value` configuration with command-line overrides.

use std::collections::BTreeMap;
use std::path::Path;

use crate::dephasing::{BathSpectrum, Channel};
use crate::error::{Error, Result};

/// Every recognised key with its default value ("" means unset).
const KEYS: &[(&str, &str)] = &[
    ("alpha", "0.25"),
    ("n_index", "1"),
    ("omega_c", "1"),
    ("temperature", ""),
    ("omega_c_over_T", ""),
    ("delta_t", ""),
    ("t_total", ""),
    ("n_cycles", "1"),
    ("tau_p", "0"),
    ("t_max", "10"),
    ("t_points", "20"),
    ("n_list", "1,2,5,10,20,30"),
    ("sweep_points", "100"),
    ("perturb_h1", "0"),
    ("e0", "0"),
    ("e1", "0.7"),
    ("e2", "2.3"),
    ("mode_omega", "1"),
    ("mode_g", "0.2"),
    ("mode_cutoff", "40"),
    ("mode_channel", "both"),
    ("oracle_delta_t", "0.5"),
    ("oracle_temperature", ""),
    ("oracle_n_list", "1,3,10"),
    ("trace_out", ""),
];

const DEFAULT_OMEGA_C_OVER_T: f64 = 100.0;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            cfg.set_pair(line)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(cfg)
    }

    /// Applies one `key=value` override; later values win.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got {pair:?}")))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(Error::Config(format!("unknown config key {key:?}")));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn is_set(&self, key: &str) -> bool {
        self.values.get(key).is_some_and(|v| !v.is_empty())
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values
            .get(key)
            .map(String::as_str)
            .or_else(|| KEYS.iter().find(|(k, _)| *k == key).map(|(_, d)| *d))
            .unwrap_or("")
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let raw = self.raw(key);
        raw.parse::<f64>()
            .map_err(|_| Error::Config(format!("{key} must be a number, got {raw:?}")))
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        let raw = self.raw(key);
        raw.parse::<usize>()
            .map_err(|_| Error::Config(format!("{key} must be a non-negative integer, got {raw:?}")))
    }

    pub fn usize_list(&self, key: &str) -> Result<Vec<usize>> {
        self.raw(key)
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| Error::Config(format!("{key} must be a list of integers, got {s:?}")))
            })
            .collect()
    }

    pub fn channels(&self) -> Result<Vec<Channel>> {
        match self.raw("mode_channel") {
            "both" => Ok(Channel::BOTH.to_vec()),
            "k1" => Ok(vec![Channel::K1]),
            "k2" => Ok(vec![Channel::K2]),
            other => Err(Error::Config(format!("mode_channel must be k1, k2 or both, got {other:?}"))),
        }
    }

    /// Bath temperature from `temperature` or `omega_c_over_T` (never both).
    pub fn temperature(&self) -> Result<f64> {
        let omega_c = self.f64("omega_c")?;
        match (self.is_set("temperature"), self.is_set("omega_c_over_T")) {
            (true, true) => Err(Error::Config("give either temperature or omega_c_over_T, not both".into())),
            (true, false) => self.f64("temperature"),
            (false, true) => {
                let ratio = self.f64("omega_c_over_T")?;
                if ratio.is_infinite() {
                    Ok(0.0)
                } else {
                    Ok(omega_c / ratio)
                }
            }
            (false, false) => Ok(omega_c / DEFAULT_OMEGA_C_OVER_T),
        }
    }

    pub fn spectrum(&self) -> Result<BathSpectrum> {
        let spectrum = BathSpectrum::new(
            self.f64("alpha")?,
            self.f64("n_index")?,
            self.f64("omega_c")?,
            self.temperature()?,
        );
        spectrum.map_err(|e| Error::Config(e.to_string()))
    }

    /// Sub-interval Δt from `delta_t` or `t_total` (never both).
    pub fn delta_t(&self) -> Result<f64> {
        let n = self.usize("n_cycles")?;
        match (self.is_set("delta_t"), self.is_set("t_total")) {
            (true, true) => Err(Error::Config("give either delta_t or t_total, not both".into())),
            (false, true) => {
                if n == 0 {
                    return Err(Error::Config("t_total needs n_cycles ≥ 1".into()));
                }
                Ok(self.f64("t_total")? / (3.0 * n as f64))
            }
            (true, false) => self.f64("delta_t"),
            (false, false) => Ok(1.0),
        }
    }

    /// `# key=value` lines for every key, resolved defaults included.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        for (key, _) in KEYS {
            out.push_str(&format!("# {key}={}\n", self.raw(key)));
        }
        out
    }
}
