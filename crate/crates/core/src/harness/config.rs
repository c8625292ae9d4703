//! Experiment configuration, read from TOML with `[dataset]`, `[train]` and
//! `[sweep]` sections.
//!
//! ```toml
//! [dataset]
//! builtin = "glass"
//! data_dir = "data"
//!
//! [train]
//! eta = 0.1
//! max_epochs = 2000
//!
//! [sweep]
//! widths = [1, 2, 3]      # or "auto"
//! seeds_per_width = 2
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bounds::WidthBounds;
use crate::dataset::{builtin_spec, load_csv, BuiltinDataset, DatasetSpec, LabeledDataset};
use crate::exec::Execution;
use crate::train::TrainConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    /// One of the built-in data sets.
    #[serde(default)]
    pub builtin: Option<BuiltinDataset>,
    /// A fully described delimited file, used when `builtin` is absent.
    #[serde(default)]
    pub custom: Option<DatasetSpec>,
    /// Relative paths are resolved against the config file's directory.
    #[serde(default = "default_data_dir")]
    pub data_dir: PathBuf,
}

fn default_data_dir() -> PathBuf {
    PathBuf::from("data")
}

impl DatasetConfig {
    pub fn builtin(which: BuiltinDataset, data_dir: impl Into<PathBuf>) -> Self {
        Self { builtin: Some(which), custom: None, data_dir: data_dir.into() }
    }

    pub fn spec(&self) -> Result<DatasetSpec> {
        match (&self.builtin, &self.custom) {
            (Some(b), None) => Ok(builtin_spec(*b)),
            (None, Some(spec)) => Ok(spec.clone()),
            (Some(_), Some(_)) => Err(Error::InvalidConfig("set either dataset.builtin or dataset.custom, not both".into())),
            (None, None) => Err(Error::InvalidConfig("no dataset configured".into())),
        }
    }

    pub fn load(&self) -> Result<LabeledDataset> {
        load_csv(&self.spec()?, &self.data_dir)
    }
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self::builtin(BuiltinDataset::Glass, default_data_dir())
    }
}

/// Widths to sweep: an explicit list, or `"auto"` for every width in the
/// bracket computed from the data set's size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Widths {
    List(Vec<usize>),
    Keyword(String),
}

impl Default for Widths {
    fn default() -> Self {
        Widths::Keyword("auto".into())
    }
}

impl Widths {
    pub fn auto() -> Self {
        Self::default()
    }

    pub fn is_auto(&self) -> bool {
        matches!(self, Widths::Keyword(k) if k == "auto")
    }

    /// Expand to a sorted, de-duplicated list. `bounds` is required for `auto`.
    pub fn resolve(&self, bounds: Option<&WidthBounds>, extra: &[usize]) -> Result<Vec<usize>> {
        let mut out: Vec<usize> = match self {
            Widths::List(list) => list.clone(),
            Widths::Keyword(k) if k == "auto" => {
                let b = bounds.ok_or_else(|| {
                    Error::InvalidConfig("widths = \"auto\" needs a width bracket, which requires n > 8".into())
                })?;
                b.widths()
                    .ok_or_else(|| Error::InvalidConfig(format!("width bracket for n={} r={} is empty", b.n, b.r)))?
                    .collect()
            }
            Widths::Keyword(k) => {
                return Err(Error::InvalidConfig(format!("widths must be a list or \"auto\", got \"{k}\"")))
            }
        };
        out.extend_from_slice(extra);
        out.sort_unstable();
        out.dedup();
        if out.is_empty() {
            return Err(Error::InvalidConfig("no widths to sweep".into()));
        }
        if out[0] == 0 {
            return Err(Error::InvalidConfig("widths must be at least 1".into()));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    pub widths: Widths,
    /// Added to the resolved widths, e.g. to probe outside the bracket.
    pub extra_widths: Vec<usize>,
    /// Row seeds are `train.seed`, `train.seed + 1`, ...
    pub seeds_per_width: usize,
    /// Train / validation / test proportions.
    pub split: [f64; 3],
    /// Min-max scale features using the training partition's ranges.
    pub normalize: bool,
    /// Worker threads: 0 for all cores, 1 for a sequential loop.
    pub jobs: usize,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            widths: Widths::default(),
            extra_widths: Vec::new(),
            seeds_per_width: 1,
            split: [0.7, 0.15, 0.15],
            normalize: true,
            jobs: 0,
        }
    }
}

impl SweepSettings {
    pub fn execution(&self) -> Execution {
        Execution::from_jobs(self.jobs)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub dataset: DatasetConfig,
    pub train: TrainConfig,
    pub sweep: SweepSettings,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.dataset.spec()?;
        self.train.validate()?;
        if self.sweep.seeds_per_width == 0 {
            return Err(Error::InvalidConfig("seeds_per_width must be at least 1".into()));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SweepConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read a config file; a relative `data_dir` is taken relative to the file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        if cfg.dataset.data_dir.is_relative() {
            let base = path.parent().unwrap_or(Path::new(""));
            cfg.dataset.data_dir = base.join(&cfg.dataset.data_dir);
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }
}
