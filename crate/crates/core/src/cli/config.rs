//! Flat `key = value` run configuration.
//!
//! Lines starting with `#` are comments. Lists are comma separated. Later
//! sources override earlier ones: file, then `--set`, then dedicated flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::evaluate::{Grid, Method};
use crate::graphbuild::{load_dataset, synth_dataset, Dataset, Similarity, SynthKind};

const KEYS: &[&str] = &[
    "dataset",
    "method",
    "k",
    "radius",
    "learning_rate",
    "patience",
    "embedding_dim",
    "nu",
    "weight_decay",
    "hidden",
    "folds",
    "fold",
    "max_epochs",
    "similarity",
    "snapshot_every",
    "seed",
    "out",
    "jobs",
    "scores",
    "radii",
    "n_max",
    "svg",
    "trace_dir",
];

/// Raw key/value pairs before typing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut raw = RawConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: origin.to_path_buf(),
                row: i + 1,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            raw.set(key.trim(), value.trim()).map_err(|e| Error::Parse {
                path: origin.to_path_buf(),
                row: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(raw)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::param(format!("unknown config key `{key}`")));
        }
        self.values.insert(key, value.to_string());
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::param(format!("override `{pair}` is not key=value")))?;
        self.set(key.trim(), value.trim())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn typed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::param(format!("config key `{key}`: cannot parse `{v}`")))
            })
            .transpose()
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty() && *s != "none")
                    .map(|s| {
                        s.parse::<T>()
                            .map_err(|_| Error::param(format!("config key `{key}`: cannot parse `{s}`")))
                    })
                    .collect()
            })
            .transpose()
    }
}

/// Where node features come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    File(PathBuf),
    /// `synth:<kind>:<n_interest>:<n_non_interest>`, drawn with the run seed.
    Synth {
        kind: SynthKind,
        n_interest: usize,
        n_non_interest: usize,
    },
}

impl FromStr for DataSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let Some(spec) = s.strip_prefix("synth:") else {
            return Ok(DataSource::File(PathBuf::from(s)));
        };
        let parts: Vec<&str> = spec.split(':').collect();
        let bad = || Error::param(format!("synthetic dataset spec `{s}` is not synth:<kind>:<n>:<m>"));
        match parts.as_slice() {
            [kind, n, m] => Ok(DataSource::Synth {
                kind: kind.parse()?,
                n_interest: n.parse().map_err(|_| bad())?,
                n_non_interest: m.parse().map_err(|_| bad())?,
            }),
            [kind] => Ok(DataSource::Synth {
                kind: kind.parse()?,
                n_interest: 250,
                n_non_interest: 250,
            }),
            _ => Err(bad()),
        }
    }
}

impl DataSource {
    pub fn load(&self, seed: u64) -> Result<Dataset> {
        match self {
            DataSource::File(path) => load_dataset(path),
            DataSource::Synth {
                kind,
                n_interest,
                n_non_interest,
            } => synth_dataset(*kind, *n_interest, *n_non_interest, seed),
        }
    }
}

/// Typed configuration shared by all commands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dataset: Option<DataSource>,
    pub method: Method,
    pub grid: Grid,
    pub folds: usize,
    pub fold: usize,
    pub max_epochs: usize,
    pub similarity: Similarity,
    pub snapshot_every: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub jobs: usize,
    pub scores: Option<PathBuf>,
    pub radii: Vec<f64>,
    pub n_max: usize,
    pub svg: bool,
    pub trace_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let defaults = Grid::default();
        let grid = Grid {
            k: raw.list("k")?.unwrap_or(defaults.k),
            radius: raw.list("radius")?.unwrap_or(defaults.radius),
            learning_rate: raw.list("learning_rate")?.unwrap_or(defaults.learning_rate),
            patience: raw.list("patience")?.unwrap_or(defaults.patience),
            embedding_dim: raw.list("embedding_dim")?.unwrap_or(defaults.embedding_dim),
            nu: raw.list("nu")?.unwrap_or(defaults.nu),
            weight_decay: raw.list("weight_decay")?.unwrap_or(defaults.weight_decay),
            hidden: raw.list("hidden")?.unwrap_or(defaults.hidden),
        };
        let similarity = match raw.get("similarity") {
            None | Some("cosine") => Similarity::Cosine,
            Some("euclidean") => Similarity::Euclidean,
            Some(other) => return Err(Error::param(format!("unknown similarity `{other}`"))),
        };
        let svg = match raw.get("svg") {
            None | Some("false") | Some("0") | Some("no") => false,
            Some("true") | Some("1") | Some("yes") => true,
            Some(other) => return Err(Error::param(format!("config key `svg`: cannot parse `{other}`"))),
        };
        let config = RunConfig {
            dataset: raw.typed("dataset")?,
            method: raw.typed("method")?.unwrap_or(Method::Olga),
            grid,
            folds: raw.typed("folds")?.unwrap_or(10),
            fold: raw.typed("fold")?.unwrap_or(0),
            max_epochs: raw.typed("max_epochs")?.unwrap_or(5000),
            similarity,
            snapshot_every: raw.typed("snapshot_every")?.unwrap_or(0),
            seed: raw.typed("seed")?.unwrap_or(0),
            out: raw.typed("out")?.unwrap_or_else(|| PathBuf::from("olga-out")),
            jobs: raw.typed("jobs")?.unwrap_or(0),
            scores: raw.typed("scores")?,
            radii: raw.list("radii")?.unwrap_or_else(|| vec![0.3, 0.45, 0.5]),
            n_max: raw.typed("n_max")?.unwrap_or(40),
            svg,
            trace_dir: raw.typed("trace_dir")?,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if g.k.contains(&0) {
            return Err(Error::param("k must be at least 1"));
        }
        if g.radius.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::param("radius values must be positive"));
        }
        if g.learning_rate.iter().any(|&lr| !(lr > 0.0 && lr.is_finite())) {
            return Err(Error::param("learning rates must be positive"));
        }
        if g.patience.iter().any(|&p| p == 0 || p >= self.max_epochs) {
            return Err(Error::param("patience values must satisfy 0 < patience < max_epochs"));
        }
        if g.nu.iter().any(|&nu| !(nu > 0.0 && nu < 1.0)) {
            return Err(Error::param("nu values must lie in (0, 1)"));
        }
        if g.weight_decay.iter().any(|&wd| !(wd >= 0.0 && wd.is_finite())) {
            return Err(Error::param("weight decay must be non-negative"));
        }
        if self.method == Method::Olga && g.embedding_dim.iter().any(|d| !(2..=3).contains(d)) {
            return Err(Error::param("OLGA embeddings must have 2 or 3 dimensions"));
        }
        if g.embedding_dim.contains(&0) || g.hidden.contains(&0) {
            return Err(Error::param("layer widths must be positive"));
        }
        if self.folds < 2 {
            return Err(Error::param("at least 2 folds are required"));
        }
        if self.fold >= self.folds {
            return Err(Error::param(format!(
                "fold {} out of range for {} folds",
                self.fold, self.folds
            )));
        }
        if self.radii.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
            return Err(Error::param("volume radii must lie in (0, 1]"));
        }
        if self.n_max == 0 {
            return Err(Error::param("n_max must be at least 1"));
        }
        Ok(())
    }

    pub fn dataset(&self) -> Result<Dataset> {
        self.dataset
            .as_ref()
            .ok_or_else(|| Error::param("no dataset given (set `dataset` or pass --dataset)"))?
            .load(self.seed)
    }
}
