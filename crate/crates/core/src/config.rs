//! Flat `key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored. Every key is optional; unknown
//! keys are rejected. The resolved configuration is echoed into every output
//! manifest.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::BoundaryCondition;

/// Initial data for the PDE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitKind {
    /// `init_amp · u1`.
    U1,
    /// `init_amp · (v1 + v2)/√2`, PT-symmetric; `u1` below the collision.
    V1V2,
    /// Random band-limited `f(x) + f(-x)*`.
    RandomPt,
    Random,
    /// Snapshot CSV with columns `x, re_psi, im_psi, ...`.
    File(PathBuf),
}

impl FromStr for InitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "u1" => Ok(InitKind::U1),
            "v1v2" => Ok(InitKind::V1V2),
            "random_pt" => Ok(InitKind::RandomPt),
            "random" => Ok(InitKind::Random),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(InitKind::File(PathBuf::from(p))),
                _ => Err(Error::Config(format!(
                    "init must be one of u1, v1v2, random_pt, random, file:<path>; got '{s}'"
                ))),
            },
        }
    }
}

impl fmt::Display for InitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitKind::U1 => f.write_str("u1"),
            InitKind::V1V2 => f.write_str("v1v2"),
            InitKind::RandomPt => f.write_str("random_pt"),
            InitKind::Random => f.write_str("random"),
            InitKind::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n: usize,
    pub bc: BoundaryCondition,
    #[serde(rename = "I")]
    pub current: f64,
    pub k: usize,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub eps: f64,
    pub gamma_offset: f64,
    pub dt: f64,
    pub t_end: f64,
    pub init: InitKind,
    pub init_amp: f64,
    pub seed: u64,
    pub stride: usize,
    pub transient: f64,
    pub i_min: f64,
    pub i_max: f64,
    pub i_count: usize,
    pub threshold: Option<f64>,
    pub workers: usize,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 128,
            bc: BoundaryCondition::Dirichlet,
            current: 0.0,
            k: 4,
            bracket_lo: 10.0,
            bracket_hi: 14.0,
            eps: 0.01,
            gamma_offset: 0.01,
            dt: 1e-3,
            t_end: 100.0,
            init: InitKind::U1,
            init_amp: 0.01,
            seed: 0,
            stride: 100,
            transient: 0.4,
            i_min: 0.0,
            i_max: 30.0,
            i_count: 61,
            threshold: None,
            workers: 1,
            out_dir: PathBuf::from("out"),
        }
    }
}

pub const KEYS: &[&str] = &[
    "n",
    "bc",
    "I",
    "k",
    "bracket_lo",
    "bracket_hi",
    "eps",
    "gamma_offset",
    "dt",
    "t_end",
    "init",
    "init_amp",
    "seed",
    "stride",
    "transient",
    "i_min",
    "i_max",
    "i_count",
    "threshold",
    "workers",
    "out_dir",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse value '{value}' for key '{key}'")))
}

impl RunConfig {
    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "n" => self.n = parse(key, value)?,
            "bc" => self.bc = value.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
            "I" => self.current = parse(key, value)?,
            "k" => self.k = parse(key, value)?,
            "bracket_lo" => self.bracket_lo = parse(key, value)?,
            "bracket_hi" => self.bracket_hi = parse(key, value)?,
            "eps" => self.eps = parse(key, value)?,
            "gamma_offset" => self.gamma_offset = parse(key, value)?,
            "dt" => self.dt = parse(key, value)?,
            "t_end" => self.t_end = parse(key, value)?,
            "init" => self.init = value.parse()?,
            "init_amp" => self.init_amp = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "stride" => self.stride = parse(key, value)?,
            "transient" => self.transient = parse(key, value)?,
            "i_min" => self.i_min = parse(key, value)?,
            "i_max" => self.i_max = parse(key, value)?,
            "i_count" => self.i_count = parse(key, value)?,
            "threshold" => {
                self.threshold = if value == "auto" { None } else { Some(parse(key, value)?) }
            }
            "workers" => self.workers = parse(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`.
    pub fn merge_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        c.merge_text(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.current < 0.0 || !self.current.is_finite() {
            return bad("I must be nonnegative");
        }
        if self.n < 8 {
            return bad("n must be at least 8");
        }
        if self.k == 0 {
            return bad("k must be positive");
        }
        if !(self.dt > 0.0) || !(self.t_end > 0.0) {
            return bad("dt and t_end must be positive");
        }
        if self.stride == 0 {
            return bad("stride must be positive");
        }
        if !(0.0..1.0).contains(&self.transient) {
            return bad("transient must lie in [0, 1)");
        }
        if self.i_count == 0 || self.i_min > self.i_max || self.i_min < 0.0 {
            return bad("need 0 <= i_min <= i_max and i_count >= 1");
        }
        if !(self.bracket_lo < self.bracket_hi) {
            return bad("bracket_lo must be below bracket_hi");
        }
        if let Some(t) = self.threshold {
            if !(t > 0.0) {
                return bad("threshold must be positive");
            }
        }
        Ok(())
    }

    /// Evenly spaced currents `i_min..=i_max`.
    pub fn currents(&self) -> Vec<f64> {
        if self.i_count == 1 {
            return vec![self.i_min];
        }
        let h = (self.i_max - self.i_min) / (self.i_count - 1) as f64;
        (0..self.i_count).map(|j| self.i_min + h * j as f64).collect()
    }

    /// The resolved configuration as `key = value` lines in canonical order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.pairs() {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }

    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("n", self.n.to_string()),
            ("bc", self.bc.to_string()),
            ("I", self.current.to_string()),
            ("k", self.k.to_string()),
            ("bracket_lo", self.bracket_lo.to_string()),
            ("bracket_hi", self.bracket_hi.to_string()),
            ("eps", self.eps.to_string()),
            ("gamma_offset", self.gamma_offset.to_string()),
            ("dt", self.dt.to_string()),
            ("t_end", self.t_end.to_string()),
            ("init", self.init.to_string()),
            ("init_amp", self.init_amp.to_string()),
            ("seed", self.seed.to_string()),
            ("stride", self.stride.to_string()),
            ("transient", self.transient.to_string()),
            ("i_min", self.i_min.to_string()),
            ("i_max", self.i_max.to_string()),
            ("i_count", self.i_count.to_string()),
            ("threshold", self.threshold.map_or("auto".into(), |t| t.to_string())),
            ("workers", self.workers.to_string()),
            ("out_dir", self.out_dir.display().to_string()),
        ]
    }
}
