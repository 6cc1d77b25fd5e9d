//! Run configuration: documented defaults, overridden by a TOML file,
//! overridden again by command-line flags. Complex numbers are written
//! `a+bi` / `a-bi` in config files and on the command line.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};

pub const DEFAULT_CUTOFF: usize = 30;
pub const DEFAULT_REG_R: f64 = 2.0;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SAMPLES: u64 = 1_000_000;

pub const SUITES: [&str; 9] = [
    "eigen", "ortho", "complete", "wigner", "su11", "squeeze", "circuit", "adjudicate", "all",
];

/// Parses `a+bi` / `a-bi` / `a` / `bi` (also bare `i`, `-i`). Exponent
/// notation is allowed in either part.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t = s.trim();
    let bad = || Error::Config(format!("cannot parse complex number {s:?} (want a+bi)"));
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Complex64::new(t.parse().map_err(|_| bad())?, 0.0));
    };
    let imag_part = |p: &str| -> Result<f64> {
        match p {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            other => other.parse().map_err(|_| bad()),
        }
    };
    // the sign separating the parts is the last +/- that neither leads the
    // string nor follows an exponent marker
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => Ok(Complex64::new(
            body[..k].parse().map_err(|_| bad())?,
            imag_part(&body[k..])?,
        )),
        None => Ok(Complex64::new(0.0, imag_part(body)?)),
    }
}

/// Parses a comma-separated weight list like `1,2,3`.
pub fn parse_weights(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse()
                .map_err(|_| Error::Config(format!("cannot parse weight {part:?}")))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub suite: String,
    pub weights: Vec<f64>,
    pub beta: Complex64,
    pub gamma: Complex64,
    /// Relative amplitudes for more than three modes; when present it
    /// replaces beta/gamma and must hold one entry per mode pair.
    pub betas: Option<Vec<Complex64>>,
    pub x: f64,
    pub reg_r: f64,
    pub cutoff: usize,
    pub seed: u64,
    pub samples: u64,
    pub out: Option<String>,
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            suite: "all".into(),
            weights: vec![1.0, 1.0, 1.0],
            beta: Complex64::default(),
            gamma: Complex64::default(),
            betas: None,
            x: 0.0,
            reg_r: DEFAULT_REG_R,
            cutoff: DEFAULT_CUTOFF,
            seed: DEFAULT_SEED,
            samples: DEFAULT_SAMPLES,
            out: None,
            tolerances: BTreeMap::new(),
        }
    }
}

impl RunConfig {
    /// Tolerance override by name, falling back to the built-in value.
    pub fn tolerance(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }

    /// Relative amplitudes for the configured mode count.
    pub fn relative_amplitudes(&self) -> Result<Vec<Complex64>> {
        let n = self.weights.len();
        if let Some(betas) = &self.betas {
            if betas.len() != n - 1 {
                return Err(Error::Config(format!(
                    "betas has {} entries for {} modes (need {})",
                    betas.len(),
                    n,
                    n - 1
                )));
            }
            return Ok(betas.clone());
        }
        if n != 3 {
            return Err(Error::Config(format!(
                "{n} modes need an explicit betas list; beta/gamma cover only three"
            )));
        }
        Ok(vec![self.beta, self.gamma])
    }

    pub fn validate(&self) -> Result<()> {
        if !SUITES.contains(&self.suite.as_str()) {
            return Err(Error::Config(format!(
                "unknown suite {:?} (expected one of {})",
                self.suite,
                SUITES.join("|")
            )));
        }
        if self.weights.len() < 2 {
            return Err(Error::Config("need at least two mode weights".into()));
        }
        if self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Config("weights must be finite".into()));
        }
        if !(self.reg_r > 0.0 && self.reg_r.is_finite()) {
            return Err(Error::Config("reg_r must be positive and finite".into()));
        }
        if self.cutoff < 2 {
            return Err(Error::Config("cutoff must be at least 2".into()));
        }
        if !self.x.is_finite() {
            return Err(Error::Config("x must be finite".into()));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<RunConfig> {
        let raw: RawConfig = toml::from_str(text)
            .map_err(|e| Error::Config(format!("config parse error: {e}")))?;
        let mut cfg = RunConfig::default();
        if let Some(v) = raw.suite {
            cfg.suite = v;
        }
        if let Some(v) = raw.weights {
            cfg.weights = v;
        }
        if let Some(v) = raw.beta {
            cfg.beta = v.resolve()?;
        }
        if let Some(v) = raw.gamma {
            cfg.gamma = v.resolve()?;
        }
        if let Some(list) = raw.betas {
            cfg.betas = Some(list.into_iter().map(|v| v.resolve()).collect::<Result<_>>()?);
        }
        if let Some(v) = raw.x {
            cfg.x = v;
        }
        if let Some(v) = raw.reg_r {
            cfg.reg_r = v;
        }
        if let Some(v) = raw.cutoff {
            cfg.cutoff = v;
        }
        if let Some(v) = raw.seed {
            cfg.seed = v;
        }
        if let Some(v) = raw.samples {
            cfg.samples = v;
        }
        if let Some(v) = raw.out {
            cfg.out = Some(v);
        }
        if let Some(t) = raw.tolerances {
            cfg.tolerances = t;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }
}

/// Complex entries accept either a plain TOML number (real) or an `a+bi`
/// string.
#[derive(Deserialize)]
#[serde(untagged)]
enum ComplexField {
    Real(f64),
    Text(String),
}

impl ComplexField {
    fn resolve(self) -> Result<Complex64> {
        match self {
            ComplexField::Real(v) => Ok(Complex64::new(v, 0.0)),
            ComplexField::Text(s) => parse_complex(&s),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    suite: Option<String>,
    weights: Option<Vec<f64>>,
    beta: Option<ComplexField>,
    gamma: Option<ComplexField>,
    betas: Option<Vec<ComplexField>>,
    x: Option<f64>,
    reg_r: Option<f64>,
    cutoff: Option<usize>,
    seed: Option<u64>,
    samples: Option<u64>,
    out: Option<String>,
    tolerances: Option<BTreeMap<String, f64>>,
}
