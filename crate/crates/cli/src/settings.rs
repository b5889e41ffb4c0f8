//! Flat `key = value` configuration merged with command-line overrides.
//!
//! Every value remembers where it came from so that errors can point at the
//! offending file line or flag.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

pub const KEYS: &[&str] = &[
    "state",
    "phi",
    "delta",
    "delta-range",
    "eta",
    "eta-a",
    "eta-b",
    "grid-points",
    "grid-halfwidth",
    "axis",
    "families",
    "photons",
    "out",
    "format",
    "tol",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Origin {
    Flag,
    File { path: PathBuf, line: usize },
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Flag => f.write_str("command line"),
            Origin::File { path, line } => write!(f, "{}:{line}", path.display()),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<&'static str, (String, Origin)>,
}

fn canonical(key: &str) -> Option<&'static str> {
    let key = key.trim().trim_start_matches("--").replace('_', "-");
    KEYS.iter().copied().find(|k| *k == key)
}

impl Settings {
    pub fn parse_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        Self::parse_str(&text, path)
    }

    pub fn parse_str(text: &str, path: &Path) -> Result<Self> {
        let mut settings = Settings::default();
        for (idx, raw) in text.lines().enumerate() {
            let origin = Origin::File { path: path.to_path_buf(), line: idx + 1 };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = match line.split_once('=') {
                Some((k, v)) => (k.trim(), v.trim()),
                None => line
                    .split_once(char::is_whitespace)
                    .map(|(k, v)| (k.trim(), v.trim()))
                    .ok_or_else(|| anyhow!("{origin}: expected `key = value`, found `{line}`"))?,
            };
            let key = canonical(key).ok_or_else(|| {
                anyhow!("{origin}: unknown key `{key}` (known keys: {})", KEYS.join(", "))
            })?;
            if value.is_empty() {
                bail!("{origin}: key `{key}` has no value");
            }
            if let Some((_, first)) = settings.values.get(key) {
                bail!("{origin}: key `{key}` already set at {first}");
            }
            settings.values.insert(key, (value.to_string(), origin));
        }
        Ok(settings)
    }

    /// Command-line values take precedence over the file.
    pub fn set_flag(&mut self, key: &'static str, value: Option<&String>) {
        if let Some(v) = value {
            self.values.insert(key, (v.clone(), Origin::Flag));
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|(v, _)| v.as_str())
    }

    fn context(&self, key: &str) -> String {
        match self.values.get(key) {
            Some((_, Origin::Flag)) => format!("--{key}"),
            Some((_, origin)) => format!("{origin}: `{key}`"),
            None => key.to_string(),
        }
    }

    /// Fails if any key outside `allowed` is set.
    pub fn restrict(&self, command: &str, allowed: &[&str]) -> Result<()> {
        for (key, (_, origin)) in &self.values {
            if !allowed.contains(key) {
                bail!("{origin}: `{key}` is not used by `{command}`");
            }
        }
        Ok(())
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| anyhow!("{}: invalid value `{v}`: {e}", self.context(key)))
            })
            .transpose()
    }

    pub fn list<T>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|item| {
                        item.trim().parse::<T>().map_err(|e| {
                            anyhow!("{}: invalid list item `{}`: {e}", self.context(key), item.trim())
                        })
                    })
                    .collect()
            })
            .transpose()
    }

    /// Comma list of integers where items may be inclusive ranges `a..b`.
    pub fn ranges(&self, key: &str) -> Result<Option<Vec<usize>>> {
        let Some(v) = self.raw(key) else { return Ok(None) };
        let mut out = Vec::new();
        for item in v.split(',') {
            let item = item.trim();
            let bad = || anyhow!("{}: invalid item `{item}`, expected `n` or `a..b`", self.context(key));
            match item.split_once("..") {
                Some((a, b)) => {
                    let (a, b): (usize, usize) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
                    if a > b {
                        return Err(bad());
                    }
                    out.extend(a..=b);
                }
                None => out.push(item.parse().map_err(|_| bad())?),
            }
        }
        Ok(Some(out))
    }

    /// `a:b:steps`, log-spaced and inclusive of both ends.
    pub fn delta_range(&self) -> Result<Option<Vec<f64>>> {
        let Some(v) = self.raw("delta-range") else { return Ok(None) };
        let bad = |why: &str| anyhow!("{}: `{v}` {why}", self.context("delta-range"));
        let parts: Vec<&str> = v.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(bad("must have the form a:b:steps"));
        };
        let a: f64 = a.trim().parse().map_err(|_| bad("has a non-numeric start"))?;
        let b: f64 = b.trim().parse().map_err(|_| bad("has a non-numeric end"))?;
        let n: usize = n.trim().parse().map_err(|_| bad("has a non-integer step count"))?;
        if !(a > 0.0 && b >= a && n >= 1) {
            return Err(bad("needs 0 < a <= b and steps >= 1"));
        }
        Ok(Some(fockfisher::metrics::log_spaced(a, b, n)))
    }

    pub fn echo(&self) -> BTreeMap<String, String> {
        self.values
            .iter()
            .map(|(k, (v, _))| (k.to_string(), v.clone()))
            .collect()
    }
}
