//! Experiment configuration and its `key = value` file format.
//!
//! One setting per line, `#` starts a comment, blank lines are ignored. Keys
//! may use `-` or `_`. Every key can also be applied programmatically with
//! [`ExperimentConfig::set`], which is how command-line flags override a
//! file.

use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::array::{ArchitectureKind, ArrayGeometry, CostParams};
use crate::circuit::CircuitConfig;
use crate::device::validate_variation;
use crate::error::{Error, Result};
use crate::io::scene::SyntheticSceneSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    None,
    Median3,
    Median5,
}

impl FilterKind {
    pub fn window(&self) -> Option<usize> {
        match self {
            FilterKind::None => None,
            FilterKind::Median3 => Some(3),
            FilterKind::Median5 => Some(5),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            FilterKind::None => "none",
            FilterKind::Median3 => "median3",
            FilterKind::Median5 => "median5",
        }
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" | "off" => Ok(FilterKind::None),
            "median3" => Ok(FilterKind::Median3),
            "median5" => Ok(FilterKind::Median5),
            other => Err(Error::invalid(
                "filter",
                format!("{other:?} (expected none, median3 or median5)"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub architecture: ArchitectureKind,
    pub rows: usize,
    pub cols: usize,
    pub variation: f64,
    pub seed: u64,
    /// `None` uses half the full-scale difference of `circuit`.
    pub threshold: Option<f64>,
    pub delay: usize,
    pub filter: FilterKind,
    pub circuit: CircuitConfig,
    pub costs: CostParams,
    /// Input graymaps. Empty means the synthetic scene is used.
    pub inputs: Vec<PathBuf>,
    pub out: Option<PathBuf>,
    pub object_size: (usize, usize),
    pub start: Option<(usize, usize)>,
    pub velocity: (i64, i64),
    pub frames: usize,
    pub foreground: u8,
    pub background: u8,
    /// Worker threads; `None` uses the global pool. Results do not depend
    /// on this value.
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let scene = SyntheticSceneSpec::standard();
        Self {
            architecture: ArchitectureKind::PixelParallel,
            rows: scene.geometry.n_rows(),
            cols: scene.geometry.n_cols(),
            variation: 0.0,
            seed: 0,
            threshold: None,
            delay: 1,
            filter: FilterKind::None,
            circuit: CircuitConfig::default(),
            costs: CostParams::default(),
            inputs: Vec::new(),
            out: None,
            object_size: scene.object_size,
            start: scene.start,
            velocity: scene.velocity,
            frames: scene.frames,
            foreground: scene.foreground,
            background: scene.background,
            threads: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("cannot parse {value:?} for {key}"))
}

impl ExperimentConfig {
    pub fn geometry(&self) -> Result<ArrayGeometry> {
        ArrayGeometry::new(self.rows, self.cols)
    }

    pub fn effective_threshold(&self) -> f64 {
        self.threshold.unwrap_or_else(|| self.circuit.default_threshold())
    }

    pub fn scene_spec(&self) -> Result<SyntheticSceneSpec> {
        Ok(SyntheticSceneSpec {
            geometry: self.geometry()?,
            object_size: self.object_size,
            start: self.start,
            velocity: self.velocity,
            frames: self.frames,
            foreground: self.foreground,
            background: self.background,
            delay: self.delay,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry()?;
        validate_variation(self.variation)?;
        if self.delay == 0 {
            return Err(Error::invalid("delay", "must be at least one frame"));
        }
        if let Some(t) = self.threshold {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::invalid("threshold", format!("{t} must be >= 0")));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::invalid("threads", "must be at least one"));
        }
        self.circuit.validate()?;
        self.costs.validate()
    }

    /// Applies one setting. Unknown keys and unparsable values are errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let k = key.as_str();
        match k {
            "arch" | "architecture" => {
                self.architecture = value.parse().map_err(|e: Error| e.to_string())?
            }
            "rows" => self.rows = parse(k, value)?,
            "cols" => self.cols = parse(k, value)?,
            "variation" => self.variation = parse(k, value)?,
            "seed" => self.seed = parse(k, value)?,
            "threshold" => {
                self.threshold = match value {
                    "default" | "auto" => None,
                    v => Some(parse(k, v)?),
                }
            }
            "delay" => self.delay = parse(k, value)?,
            "filter" => self.filter = value.parse().map_err(|e: Error| e.to_string())?,
            "out" => self.out = Some(PathBuf::from(value)),
            "inputs" | "input" => {
                self.inputs = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(PathBuf::from)
                    .collect()
            }
            "r1" => self.circuit.r1 = parse(k, value)?,
            "r2" => self.circuit.r2 = parse(k, value)?,
            "r3" => self.circuit.r3 = parse(k, value)?,
            "r4" => self.circuit.r4 = parse(k, value)?,
            "v_dd" | "vdd" => self.circuit.v_dd = parse(k, value)?,
            "r_on" => self.circuit.r_on = parse(k, value)?,
            "r_off" => self.circuit.r_off = parse(k, value)?,
            "power_w" => self.costs.per_circuit_power_w = parse(k, value)?,
            "area_um2" => self.costs.per_circuit_area_um2 = parse(k, value)?,
            "settle_s" | "row_settle_time_s" => self.costs.row_settle_time_s = parse(k, value)?,
            "object_rows" => self.object_size.0 = parse(k, value)?,
            "object_cols" => self.object_size.1 = parse(k, value)?,
            "object_size" => {
                let s = parse(k, value)?;
                self.object_size = (s, s);
            }
            "start_row" => self.start = Some((parse(k, value)?, self.start.map_or(0, |s| s.1))),
            "start_col" => self.start = Some((self.start.map_or(0, |s| s.0), parse(k, value)?)),
            "start" => {
                self.start = match value {
                    "random" => None,
                    v => {
                        let (r, c) = v
                            .split_once(',')
                            .ok_or_else(|| format!("start expects row,col or random, got {v:?}"))?;
                        Some((parse(k, r.trim())?, parse(k, c.trim())?))
                    }
                }
            }
            "velocity_rows" => self.velocity.0 = parse(k, value)?,
            "velocity_cols" => self.velocity.1 = parse(k, value)?,
            "frames" => self.frames = parse(k, value)?,
            "foreground" => self.foreground = parse(k, value)?,
            "background" => self.background = parse(k, value)?,
            "threads" => self.threads = Some(parse(k, value)?),
            other => return Err(format!("unknown key {other:?}")),
        }
        Ok(())
    }

    /// Parses a config file on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Self::default();
        config.merge(text)?;
        Ok(config)
    }

    /// Applies a config file on top of `self`.
    pub fn merge(&mut self, text: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: idx + 1,
                message: format!("expected `key = value`, got {line:?}"),
            })?;
            self.set(key, value).map_err(|message| Error::Config {
                line: idx + 1,
                message,
            })?;
        }
        Ok(())
    }
}
