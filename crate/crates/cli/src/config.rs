use std::fmt;
use std::path::{Path, PathBuf};

use mrrbf::datasets::{
    animals_dataset, load_csv, load_idx, split_caps, AnimalContext, IdxQuery, LabelColumn, LabeledDataset,
};
use mrrbf::network::{InitScheme, NetworkConfig};
use mrrbf::preprocess::Scaling;
use mrrbf::GridShape;
use serde::{Deserialize, Serialize};

/// Why a command stopped. Usage problems exit with 2, everything else with 1.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Runtime(m) => f.write_str(m),
        }
    }
}

pub fn usage(e: impl fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

pub fn runtime(e: impl fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

/// Where the instances come from. Exactly one source per config, enforced
/// by the externally tagged representation: `{"csv": {...}}`,
/// `{"idx": {...}}` or `{"animals": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    Csv {
        path: PathBuf,
        /// `last`, a zero-based column index, or a header name.
        #[serde(default = "default_label_column")]
        label_column: String,
        #[serde(default = "default_true")]
        has_header: bool,
    },
    Idx {
        images: PathBuf,
        labels: PathBuf,
        /// Digits to keep; all ten when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        classes: Option<Vec<u8>>,
        /// Per-class caps in ascending digit order; a single value applies to every class.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_per_class: Option<Vec<usize>>,
        /// Total instance count, split as evenly as possible over the kept classes.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        total: Option<usize>,
    },
    Animals {
        context: String,
    },
}

fn default_label_column() -> String {
    "last".into()
}

fn default_true() -> bool {
    true
}

/// One experiment: data, architecture, schedule and where results go.
/// Unset hyperparameters take the library defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetSource,
    /// Hidden grids as `RxC`, input side first.
    pub grids: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_out: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_hid: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub init: InitScheme,
    /// Defaults to `min-max`, except IDX data which is already scaled to [0, 1].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<Scaling>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    /// Epochs (0-based) after which map snapshots are written.
    #[serde(default)]
    pub checkpoints: Vec<usize>,
    /// Fold count for `crossval`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

/// A parsed config file and the directory its relative data paths resolve against.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub run: RunConfig,
    pub base_dir: PathBuf,
    pub stem: String,
}

impl LoadedConfig {
    pub fn read(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let run: RunConfig = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        Ok(LoadedConfig {
            run,
            base_dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
            stem: path
                .file_stem()
                .map_or("run".into(), |s| s.to_string_lossy().into_owned()),
        })
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Output directory: explicit setting, else `runs/<config stem>`.
    pub fn out_dir(&self) -> PathBuf {
        self.run
            .out_dir
            .clone()
            .unwrap_or_else(|| Path::new("runs").join(&self.stem))
    }

    /// Loads the raw (unscaled) dataset.
    pub fn load_dataset(&self) -> Result<LabeledDataset, Failure> {
        match &self.run.dataset {
            DatasetSource::Csv {
                path,
                label_column,
                has_header,
            } => {
                let label: LabelColumn = label_column.parse().map_err(usage)?;
                load_csv(self.resolve(path), &label, *has_header).map_err(usage)
            }
            DatasetSource::Idx {
                images,
                labels,
                classes,
                max_per_class,
                total,
            } => {
                let keep_classes = match classes {
                    Some(c) => c.iter().copied().collect(),
                    None => IdxQuery::all_digits().keep_classes,
                };
                let caps = match (max_per_class, total) {
                    (Some(_), Some(_)) => return Err(usage("idx source: set max_per_class or total, not both")),
                    (Some(c), None) => Some(c.clone()),
                    (None, Some(t)) => Some(split_caps(*t, keep_classes.len())),
                    (None, None) => None,
                };
                let query = IdxQuery {
                    keep_classes,
                    max_per_class: caps,
                };
                load_idx(self.resolve(images), self.resolve(labels), &query).map_err(usage)
            }
            DatasetSource::Animals { context } => {
                let ctx: AnimalContext = context.parse().map_err(usage)?;
                animals_dataset(ctx).map_err(usage)
            }
        }
    }

    pub fn scaling(&self) -> Scaling {
        self.run.scaling.unwrap_or(match self.run.dataset {
            DatasetSource::Idx { .. } => Scaling::None,
            _ => Scaling::MinMax,
        })
    }

    pub fn grids(&self) -> Result<Vec<GridShape>, Failure> {
        if self.run.grids.is_empty() {
            return Err(usage("config needs at least one grid"));
        }
        self.run.grids.iter().map(|g| g.parse().map_err(usage)).collect()
    }

    /// Network config for a dataset with the given shape.
    pub fn network_config(&self, input_dim: usize, num_classes: usize) -> Result<NetworkConfig, Failure> {
        let run = &self.run;
        let mut cfg = NetworkConfig::new(self.grids()?, input_dim, num_classes);
        if let Some(v) = run.s0 {
            cfg.s0 = v;
        }
        if let Some(v) = run.s_end {
            cfg.s_end = v;
        }
        if let Some(v) = run.t_end {
            cfg.t_end = v;
        }
        if let Some(v) = run.eta_out {
            cfg.eta_out = v;
        }
        if let Some(v) = run.eta_hid {
            cfg.eta_hid = v;
        }
        cfg.rng_seed = run.seed;
        cfg.init = run.init;
        cfg.validate().map_err(usage)?;
        if let Some(&c) = run.checkpoints.iter().find(|&&c| c >= cfg.t_end) {
            return Err(usage(format!(
                "checkpoint epoch {c} is not below t_end = {}",
                cfg.t_end
            )));
        }
        Ok(cfg)
    }
}
