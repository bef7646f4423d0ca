use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cohorts::GroupingScheme;
use crate::dataset::{CatalogFormat, RatingsFormat};
use crate::error::{Error, Result};
use crate::recommend::{Aggregation, AlgoConfig, Algorithm, Similarity};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_ratings_format() -> RatingsFormat {
    RatingsFormat::MovieLens1M
}
fn default_catalog_format() -> CatalogFormat {
    CatalogFormat::MovieLens1M
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataConfig {
    pub ratings: PathBuf,
    pub items: PathBuf,
    /// MovieLens users file; enables the gender analysis.
    #[serde(default)]
    pub users: Option<PathBuf>,
    #[serde(default = "default_ratings_format")]
    pub ratings_format: RatingsFormat,
    #[serde(default = "default_catalog_format")]
    pub catalog_format: CatalogFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    pub min_user_ratings: usize,
    pub min_item_ratings: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            min_user_ratings: 1,
            min_item_ratings: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitConfig {
    pub ratio: f64,
    pub seed: u64,
    pub stratify_by_user: bool,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            ratio: 0.8,
            seed: 42,
            stratify_by_user: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvaluationConfig {
    /// N, applied to every algorithm.
    pub list_size: usize,
    pub n_groups: usize,
    pub scheme: GroupingScheme,
    /// Minimum test rating counted as relevant for precision; any rating if unset.
    pub relevance_threshold: Option<f64>,
    pub kl_epsilon: f64,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig {
            list_size: 10,
            n_groups: 10,
            scheme: GroupingScheme::EqualWidth,
            relevance_threshold: None,
            kl_epsilon: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TuningConfig {
    /// Run the grid search as part of a full `run`.
    pub enabled: bool,
    /// Share of the training split used for fitting during tuning; the rest validates.
    pub validation_ratio: f64,
    pub seed: u64,
}

impl Default for TuningConfig {
    fn default() -> Self {
        TuningConfig {
            enabled: false,
            validation_ratio: 0.8,
            seed: 7,
        }
    }
}

/// Candidate values per hyperparameter; an empty list keeps the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HyperGrid {
    pub neighborhood_size: Vec<usize>,
    pub similarity: Vec<Similarity>,
    pub aggregation: Vec<Aggregation>,
    pub shrinkage: Vec<f64>,
    pub factors: Vec<usize>,
    pub learning_rate: Vec<f64>,
    pub regularization: Vec<f64>,
    pub epochs: Vec<usize>,
    pub init_std: Vec<f64>,
}

fn axis<T: Clone>(values: &[T], base: T) -> Vec<T> {
    if values.is_empty() {
        vec![base]
    } else {
        values.to_vec()
    }
}

impl HyperGrid {
    /// Cartesian product over `base`, in a fixed nesting order.
    pub fn expand(&self, base: &AlgoConfig) -> Vec<AlgoConfig> {
        let mut out = vec![base.clone()];
        macro_rules! vary {
            ($field:ident) => {
                out = out
                    .into_iter()
                    .flat_map(|c| {
                        axis(&self.$field, c.$field.clone())
                            .into_iter()
                            .map(move |v| AlgoConfig { $field: v, ..c.clone() })
                    })
                    .collect();
            };
        }
        vary!(neighborhood_size);
        vary!(similarity);
        vary!(aggregation);
        vary!(shrinkage);
        vary!(factors);
        vary!(learning_rate);
        vary!(regularization);
        vary!(epochs);
        vary!(init_std);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgoSpec {
    /// Display name; also used for output file names.
    pub name: String,
    #[serde(flatten)]
    pub config: AlgoConfig,
    #[serde(default)]
    pub grid: Option<HyperGrid>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub data: DataConfig,
    #[serde(default)]
    pub filter: FilterConfig,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
    #[serde(default)]
    pub tuning: TuningConfig,
    pub algorithms: Vec<AlgoSpec>,
}

impl ExperimentConfig {
    /// Parses a TOML config; relative paths resolve against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        Ok(config)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let mut config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for spec in &mut config.algorithms {
            spec.config.list_size = config.evaluation.list_size;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output_dir);
        fix(&mut self.data.ratings);
        fix(&mut self.data.items);
        if let Some(u) = &mut self.data.users {
            fix(u);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {CONFIG_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithms configured".into()));
        }
        let mut names = BTreeSet::new();
        let mut slugs = BTreeSet::new();
        for spec in &self.algorithms {
            if !names.insert(spec.name.as_str()) || !slugs.insert(slug(&spec.name)) {
                return Err(Error::Config(format!("duplicate algorithm name '{}'", spec.name)));
            }
            spec.config
                .validate()
                .map_err(|e| Error::Config(format!("{}: {e}", spec.name)))?;
        }
        if !(self.split.ratio > 0.0 && self.split.ratio < 1.0) {
            return Err(Error::Config("split.ratio must lie in (0, 1)".into()));
        }
        if !(self.tuning.validation_ratio > 0.0 && self.tuning.validation_ratio < 1.0) {
            return Err(Error::Config("tuning.validation_ratio must lie in (0, 1)".into()));
        }
        if self.evaluation.n_groups < 2 {
            return Err(Error::Config("evaluation.n_groups must be at least 2".into()));
        }
        if self.evaluation.list_size == 0 {
            return Err(Error::Config("evaluation.list_size must be positive".into()));
        }
        if self.filter.min_user_ratings == 0 || self.filter.min_item_ratings == 0 {
            return Err(Error::Config("filter thresholds must be at least 1".into()));
        }
        Ok(())
    }

    /// Checks that every referenced input file exists.
    pub fn check_inputs(&self) -> Result<()> {
        let mut paths = vec![&self.data.ratings, &self.data.items];
        if let Some(u) = &self.data.users {
            paths.push(u);
        }
        for p in paths {
            if !p.is_file() {
                let missing = std::io::Error::new(std::io::ErrorKind::NotFound, "input file does not exist");
                return Err(Error::io(p, missing));
            }
        }
        Ok(())
    }

    /// Replaces the split seed and every algorithm seed.
    pub fn override_seed(&mut self, seed: u64) {
        self.split.seed = seed;
        for spec in &mut self.algorithms {
            spec.config.seed = seed;
        }
    }

    /// Keeps only the named algorithms (matched case-insensitively).
    pub fn retain_algorithms(&mut self, names: &[String]) -> Result<()> {
        for n in names {
            if !self.algorithms.iter().any(|s| s.name.eq_ignore_ascii_case(n)) {
                return Err(Error::Config(format!("no algorithm named '{n}' in config")));
            }
        }
        self.algorithms
            .retain(|s| names.iter().any(|n| s.name.eq_ignore_ascii_case(n)));
        Ok(())
    }

    pub fn spec(&self, algorithm: Algorithm) -> Option<&AlgoSpec> {
        self.algorithms.iter().find(|s| s.config.algorithm == algorithm)
    }
}

/// File-name-safe form of an algorithm name.
pub fn slug(name: &str) -> String {
    name.chars()
        .map(|c| match c {
            c if c.is_ascii_alphanumeric() => c.to_ascii_lowercase(),
            '+' => 'p',
            _ => '_',
        })
        .collect()
}
