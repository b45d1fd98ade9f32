//! Run settings merged from defaults, a `key = value` file, `STEER_*`
//! environment variables and command-line flags, in that order of priority.

use std::collections::BTreeMap;
use std::path::Path;

use steering_core::delta::{OptimizerConfig, OracleConfig};

pub const ENV_PREFIX: &str = "STEER_";

const KEYS: &[&str] = &[
    "n",
    "restarts",
    "tol",
    "max_evals",
    "hidden_states",
    "polish_rounds",
    "seed",
    "grid_resolution",
    "oracle_samples",
    "oracle_descents",
    "bucket_tol",
    "memory_mb",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub optimizer: OptimizerConfig,
    pub oracle: OracleConfig,
    pub bucket_tol: f64,
    pub memory_mb: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            optimizer: OptimizerConfig::default(),
            oracle: OracleConfig::default(),
            bucket_tol: 1e-2,
            memory_mb: 1024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Parses `key = value` lines. Blank lines, `#` comments and `[section]`
/// headers are ignored; keys are case-insensitive and `-` equals `_`.
pub fn parse_file(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() || (line.starts_with('[') && line.ends_with(']')) {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError(format!("line {}: expected key = value", i + 1)));
        };
        let key = normalize(k);
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError(format!("line {}: unknown key `{}`", i + 1, k.trim())));
        }
        out.insert(key, v.trim().trim_matches('"').to_string());
    }
    Ok(out)
}

fn normalize(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

/// `STEER_<KEY>` overrides from the given variables.
pub fn env_overrides<I>(vars: I) -> BTreeMap<String, String>
where
    I: IntoIterator<Item = (String, String)>,
{
    vars.into_iter()
        .filter_map(|(k, v)| {
            let key = normalize(k.strip_prefix(ENV_PREFIX)?);
            KEYS.contains(&key.as_str()).then_some((key, v))
        })
        .collect()
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .trim()
        .parse()
        .map_err(|_| ConfigError(format!("invalid value `{value}` for `{key}`")))
}

impl Settings {
    pub fn apply(&mut self, values: &BTreeMap<String, String>) -> Result<(), ConfigError> {
        for (k, v) in values {
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let o = &mut self.optimizer;
        match key {
            "n" => o.n_exponent = parse(key, value)?,
            "restarts" => o.restarts = parse(key, value)?,
            "tol" => o.tol = parse(key, value)?,
            "max_evals" => o.max_evals = parse(key, value)?,
            "hidden_states" => o.hidden_states = parse(key, value)?,
            "polish_rounds" => o.polish_rounds = parse(key, value)?,
            "seed" => {
                o.seed = parse(key, value)?;
                self.oracle.seed = o.seed;
            }
            "grid_resolution" => self.oracle.resolution = parse(key, value)?,
            "oracle_samples" => self.oracle.samples = parse(key, value)?,
            "oracle_descents" => self.oracle.descents = parse(key, value)?,
            "bucket_tol" => self.bucket_tol = parse(key, value)?,
            "memory_mb" => self.memory_mb = parse(key, value)?,
            other => return Err(ConfigError(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Defaults, then the optional file, then the environment.
    pub fn load(
        file: Option<&Path>,
        env: BTreeMap<String, String>,
    ) -> Result<Self, ConfigError> {
        let mut s = Self::default();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
            s.apply(&parse_file(&text)?)?;
        }
        s.apply(&env)?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let o = &self.optimizer;
        if o.n_exponent < 2 || o.n_exponent % 2 != 0 {
            return Err(ConfigError(format!("n = {} must be even and >= 2", o.n_exponent)));
        }
        if o.restarts == 0 || o.hidden_states == 0 || o.max_evals == 0 {
            return Err(ConfigError(
                "restarts, hidden_states and max_evals must be positive".into(),
            ));
        }
        if !(o.tol > 0.0) || !(self.bucket_tol > 0.0) {
            return Err(ConfigError("tolerances must be positive".into()));
        }
        if self.oracle.resolution < 2 || self.oracle.samples == 0 {
            return Err(ConfigError(
                "grid_resolution must be >= 2 and oracle_samples positive".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_syntax() {
        let m = parse_file("# comment\n[optimizer]\nn = 50\nrestarts=12 # inline\n\nGRID-RESOLUTION = 12\n")
            .unwrap();
        assert_eq!(m["n"], "50");
        assert_eq!(m["restarts"], "12");
        assert_eq!(m["grid_resolution"], "12");
        assert!(parse_file("bogus = 1").is_err());
        assert!(parse_file("n 50").is_err());
    }

    #[test]
    fn precedence() {
        let mut s = Settings::default();
        s.apply(&parse_file("n = 50\nseed = 3").unwrap()).unwrap();
        let env = env_overrides([
            ("STEER_N".to_string(), "60".to_string()),
            ("HOME".to_string(), "/root".to_string()),
            ("STEER_UNKNOWN".to_string(), "1".to_string()),
        ]);
        s.apply(&env).unwrap();
        assert_eq!(s.optimizer.n_exponent, 60);
        assert_eq!(s.optimizer.seed, 3);
        assert_eq!(s.oracle.seed, 3);
    }

    #[test]
    fn validation() {
        let mut s = Settings::default();
        assert!(s.validate().is_ok());
        s.set("n", "45").unwrap();
        assert!(s.validate().is_err());
        assert!(s.set("restarts", "many").is_err());
    }
}
