//! Parameter resolution: command-line flags override a key=value config
//! file, which overrides built-in defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::CliError;

/// Keys accepted in a config file; same spelling as the long flags.
pub const KEYS: &[&str] = &[
    "s", "p", "q", "beta", "n", "zeta", "zeta-ratio", "grid", "tol", "out", "format", "precision", "threads",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", i + 1)))?;
            let k = k.trim().replace('_', "-");
            if !KEYS.contains(&k.as_str()) {
                return Err(CliError::Usage(format!("config line {}: unknown key '{k}'", i + 1)));
            }
            entries.insert(k, v.trim().to_string());
        }
        Ok(ConfigFile { entries })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

/// Picks the flag value, else the parsed config value.
pub fn merge<T: FromStr>(flag: Option<T>, cfg: &ConfigFile, key: &str) -> Result<Option<T>, CliError>
where
    T::Err: fmt::Display,
{
    if flag.is_some() {
        return Ok(flag);
    }
    match cfg.get(key) {
        None => Ok(None),
        Some(v) => v.parse().map(Some).map_err(|e| CliError::Usage(format!("config key {key}: {e}"))),
    }
}

/// An integer list written as `3`, `2..6` (inclusive) or `2,3,5`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntList(pub Vec<u64>);

impl FromStr for IntList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut out = Vec::new();
        for part in s.split(',') {
            let part = part.trim();
            if let Some((a, b)) = part.split_once("..") {
                let a: u64 = a.trim().parse().map_err(|_| format!("bad range start in '{part}'"))?;
                let b = b.trim().trim_start_matches('=');
                let b: u64 = b.parse().map_err(|_| format!("bad range end in '{part}'"))?;
                if b < a {
                    return Err(format!("empty range '{part}'"));
                }
                out.extend(a..=b);
            } else {
                out.push(part.parse().map_err(|_| format!("not an integer: '{part}'"))?);
            }
        }
        Ok(IntList(out))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    /// Geometric in the value.
    Log,
    /// Geometric in 1 − value, for grids accumulating at 1.
    Log1m,
}

/// `a:b:n[,log|,log1m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub spacing: Spacing,
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (body, spacing) = match s.split_once(',') {
            None => (s, Spacing::Linear),
            Some((b, "log")) => (b, Spacing::Log),
            Some((b, "log1m")) => (b, Spacing::Log1m),
            Some((b, "lin")) => (b, Spacing::Linear),
            Some((_, other)) => return Err(format!("unknown grid spacing '{other}'")),
        };
        let parts: Vec<&str> = body.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("grid '{s}' is not of the form a:b:n"));
        }
        let f = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("bad grid bound '{x}'"));
        let (a, b) = (f(parts[0])?, f(parts[1])?);
        let n: usize = parts[2].trim().parse().map_err(|_| format!("bad grid count '{}'", parts[2]))?;
        if n == 0 || !a.is_finite() || !b.is_finite() {
            return Err(format!("grid '{s}' is empty or not finite"));
        }
        match spacing {
            Spacing::Log if a <= 0.0 || b <= 0.0 => return Err("log grid needs positive bounds".into()),
            Spacing::Log1m if a >= 1.0 || b >= 1.0 => return Err("log1m grid needs bounds below 1".into()),
            _ => {}
        }
        Ok(Grid { a, b, n, spacing })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sp = match self.spacing {
            Spacing::Linear => "",
            Spacing::Log => ",log",
            Spacing::Log1m => ",log1m",
        };
        write!(f, "{}:{}:{}{}", self.a, self.b, self.n, sp)
    }
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.a];
        }
        let t = |i: usize| i as f64 / (self.n - 1) as f64;
        (0..self.n)
            .map(|i| match self.spacing {
                Spacing::Linear => self.a + (self.b - self.a) * t(i),
                Spacing::Log => (self.a.ln() + (self.b.ln() - self.a.ln()) * t(i)).exp(),
                Spacing::Log1m => {
                    let (la, lb) = ((1.0 - self.a).ln(), (1.0 - self.b).ln());
                    1.0 - (la + (lb - la) * t(i)).exp()
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Svg,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Format as clap::ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PrecisionArg {
    Double,
    Extended,
}

impl FromStr for PrecisionArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <PrecisionArg as clap::ValueEnum>::from_str(s, true)
    }
}

/// Common parameters after merging flags, config and defaults. Fields that
/// have no universal default stay optional and are filled per command.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub s: Option<Vec<u64>>,
    pub p: Option<Vec<u64>>,
    pub q: Option<u32>,
    pub beta: Option<f64>,
    pub n: Option<usize>,
    pub zeta: Option<f64>,
    pub zeta_ratio: Option<f64>,
    pub grid: Option<Grid>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub precision: Option<PrecisionArg>,
    pub threads: Option<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn int_lists() {
        assert_eq!("3".parse::<IntList>().unwrap().0, vec![3]);
        assert_eq!("2..6".parse::<IntList>().unwrap().0, vec![2, 3, 4, 5, 6]);
        assert_eq!("2..=3,5".parse::<IntList>().unwrap().0, vec![2, 3, 5]);
        assert!("6..2".parse::<IntList>().is_err());
        assert!("x".parse::<IntList>().is_err());
    }

    #[test]
    fn grids() {
        let g: Grid = "0:1:5".parse().unwrap();
        assert_eq!(g.points(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g: Grid = "1:100:3,log".parse().unwrap();
        let p = g.points();
        assert!((p[1] - 10.0).abs() < 1e-12);
        let g: Grid = "0.99:0.9999:3,log1m".parse().unwrap();
        let p = g.points();
        assert!((p[1] - 0.999).abs() < 1e-12 && (p[2] - 0.9999).abs() < 1e-12);
        assert!("1:2".parse::<Grid>().is_err());
        assert!("0:1:3,log".parse::<Grid>().is_err());
        assert_eq!(g.to_string().parse::<Grid>().unwrap(), g);
    }

    #[test]
    fn config_precedence() {
        let cfg = ConfigFile::parse("# comment\ns = 5\nbeta=0.5 # trailing\nzeta_ratio = 0.9\n").unwrap();
        assert_eq!(merge::<f64>(None, &cfg, "beta").unwrap(), Some(0.5));
        assert_eq!(merge(Some(2.0), &cfg, "beta").unwrap(), Some(2.0));
        assert_eq!(merge::<f64>(None, &cfg, "zeta-ratio").unwrap(), Some(0.9));
        assert_eq!(merge::<f64>(None, &cfg, "tol").unwrap(), None);
        assert!(ConfigFile::parse("colour = red").is_err());
        assert!(ConfigFile::parse("s 3").is_err());
        assert!(merge::<f64>(None, &ConfigFile::parse("beta = x").unwrap(), "beta").is_err());
    }
}
