use std::collections::BTreeMap;

use crate::CliError;

pub const ENV_SCALE: &str = "HOLOFORM_DEFAULT_TOL";

/// Default tolerances by name.
pub const DEFAULTS: &[(&str, f64)] = &[
    ("oracle", 1e-9),
    ("closed", 1e-4),
    ("closed_abelian", 1e-12),
    ("nondegenerate", 1e-6),
    ("invariance", 1e-10),
    ("isotropy", 1e-8),
    ("groupoid", 1e-10),
    ("catalog", 1e-10),
    ("float_cross", 1e-12),
    ("poisson_float", 1e-9),
    ("qt", 1e-12),
];

#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances(BTreeMap<String, f64>);

impl Tolerances {
    /// Defaults times `scale`, then config overrides, then flag overrides.
    pub fn resolve(scale: Option<f64>, config: &BTreeMap<String, f64>, flags: &[(String, f64)]) -> Result<Self, CliError> {
        let s = scale.unwrap_or(1.0);
        if !(s.is_finite() && s > 0.0) {
            return Err(CliError::Config(format!("{ENV_SCALE} must be a positive number, got {s}")));
        }
        let mut m: BTreeMap<String, f64> = DEFAULTS.iter().map(|(k, v)| (k.to_string(), v * s)).collect();
        for (k, v) in config.iter().map(|(k, v)| (k, *v)).chain(flags.iter().map(|(k, v)| (k, *v))) {
            if !m.contains_key(k) {
                let known: Vec<&str> = DEFAULTS.iter().map(|(k, _)| *k).collect();
                return Err(CliError::Config(format!("unknown tolerance `{k}` (known: {})", known.join(", "))));
            }
            if !(v.is_finite() && v >= 0.0) {
                return Err(CliError::Config(format!("tolerance `{k}` must be a non-negative number")));
            }
            m.insert(k.clone(), v);
        }
        Ok(Tolerances(m))
    }

    pub fn get(&self, name: &str) -> f64 {
        self.0[name]
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::resolve(None, &BTreeMap::new(), &[]).expect("defaults are valid")
    }
}

/// `NAME=VALUE`.
pub fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("`{s}` is not NAME=VALUE"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("bad tolerance value in `{s}`"))?;
    Ok((k.trim().to_string(), v))
}
