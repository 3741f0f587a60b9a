//! Flat `key = value` run configuration. Command-line flags take precedence
//! over the file; every value is parsed and range-checked before a command
//! does any numerical work.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

/// Every key a config file may set. Anything else is rejected so that typos
/// do not silently fall back to defaults.
pub const KNOWN_KEYS: &[&str] = &[
    "beta",
    "branch",
    "lambda",
    "k",
    "lambda_max",
    "s_max",
    "half_length",
    "n",
    "gap_tol",
    "stag_tol",
    "n_max",
    "tail_tol",
    "initial_step",
    "max_step",
    "max_points",
    "max_retruncations",
    "residual_tol",
    "max_iters",
    "mode",
    "scan_n",
    "samples",
    "family",
    "betas",
    "cases",
    "out",
    "format",
    "exec",
    "verify",
];

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", i + 1)))?;
        let key = key.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(CliError::Config(format!("line {}: unknown key `{key}`", i + 1)));
        }
        if map.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(CliError::Config(format!("line {}: duplicate key `{key}`", i + 1)));
        }
    }
    Ok(map)
}

/// Resolves values flag-first, then file, then default.
#[derive(Debug, Default)]
pub struct Resolver {
    file: BTreeMap<String, String>,
}

impl Resolver {
    pub fn new(file: BTreeMap<String, String>) -> Self {
        Self { file }
    }

    pub fn from_path(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                Ok(Self::new(parse_config(&text)?))
            }
        }
    }

    pub fn get<T: FromStr>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.file
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| CliError::Config(format!("`{key}`: {e}"))))
            .transpose()
    }

    pub fn or<T: FromStr>(&self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key, flag)?.unwrap_or(default))
    }

    pub fn required<T: FromStr>(&self, key: &str, flag: Option<T>) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key, flag)?
            .ok_or_else(|| CliError::Config(format!("missing required value `{key}`")))
    }

    /// Comma-separated list; a flag list replaces the file list outright.
    pub fn list<T: FromStr>(&self, key: &str, flag: Option<Vec<T>>) -> Result<Option<Vec<T>>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.file
            .get(key)
            .map(|v| {
                v.split(',')
                    .map(|item| {
                        item.trim()
                            .parse::<T>()
                            .map_err(|e| CliError::Config(format!("`{key}` item `{item}`: {e}")))
                    })
                    .collect()
            })
            .transpose()
    }
}

/// Fails with a config error unless `value` is finite and strictly positive.
pub fn positive(key: &str, value: f64) -> Result<f64, CliError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(CliError::Config(format!("`{key}` must be positive and finite, got {value}")))
    }
}

/// `λ:k` pair for fast sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FastCase {
    pub lambda: f64,
    pub k: f64,
}

impl FromStr for FastCase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (l, k) = s.split_once(':').ok_or_else(|| format!("expected lambda:k, got `{s}`"))?;
        Ok(Self {
            lambda: l.trim().parse().map_err(|e| format!("lambda: {e}"))?,
            k: k.trim().parse().map_err(|e| format!("k: {e}"))?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_whitespace() {
        let m = parse_config("# run\nbeta = 0.5  # slow\n\n n=1024\n").unwrap();
        assert_eq!(m["beta"], "0.5");
        assert_eq!(m["n"], "1024");
    }

    #[test]
    fn rejects_unknown_duplicate_and_malformed() {
        assert!(matches!(parse_config("bta = 1"), Err(CliError::Config(_))));
        assert!(matches!(parse_config("beta = 1\nbeta = 2"), Err(CliError::Config(_))));
        assert!(matches!(parse_config("beta 1"), Err(CliError::Config(_))));
    }

    #[test]
    fn flags_override_file() {
        let r = Resolver::new(parse_config("beta = 0.5\nn = 100").unwrap());
        assert_eq!(r.or("beta", Some(2.0), 1.0).unwrap(), 2.0);
        assert_eq!(r.or::<f64>("beta", None, 1.0).unwrap(), 0.5);
        assert_eq!(r.or::<usize>("n", None, 7).unwrap(), 100);
        assert_eq!(r.or::<f64>("lambda", None, 1.5).unwrap(), 1.5);
        assert!(r.required::<f64>("k", None).is_err());
    }

    #[test]
    fn bad_values_are_config_errors() {
        let r = Resolver::new(parse_config("beta = abc\ncases = 1.5:0.5, 2").unwrap());
        assert!(matches!(r.get::<f64>("beta", None), Err(CliError::Config(_))));
        assert!(matches!(r.list::<FastCase>("cases", None), Err(CliError::Config(_))));
        assert!(positive("beta", 0.0).is_err());
        assert!(positive("beta", f64::NAN).is_err());
    }
}
