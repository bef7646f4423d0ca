//! Classical top-N recommenders: neighborhood models, biased matrix
//! factorization, SVD++ and a most-popular baseline.

mod factor;
mod knn;
mod lists;

use std::cmp::Ordering;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{DatasetIndex, ItemId, RatingsDataset, UserId};
use crate::error::{Error, Result};

pub use factor::FactorParams;
pub use knn::Neighbors;
pub use lists::{
    precision_at_n, read_recommendations, write_recommendations, PrecisionReport, Recommendation,
    RecommendationSet, TopN,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "user-knn")]
    UserKnn,
    #[serde(rename = "item-knn")]
    ItemKnn,
    #[serde(rename = "bmf")]
    Bmf,
    #[serde(rename = "svdpp")]
    SvdPlusPlus,
    #[serde(rename = "most-popular")]
    MostPopular,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::UserKnn,
        Algorithm::ItemKnn,
        Algorithm::Bmf,
        Algorithm::SvdPlusPlus,
        Algorithm::MostPopular,
    ];

    pub fn is_knn(self) -> bool {
        matches!(self, Algorithm::UserKnn | Algorithm::ItemKnn)
    }

    pub fn is_factor(self) -> bool {
        matches!(self, Algorithm::Bmf | Algorithm::SvdPlusPlus)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::UserKnn => "UserKNN",
            Algorithm::ItemKnn => "ItemKNN",
            Algorithm::Bmf => "BMF",
            Algorithm::SvdPlusPlus => "SVD++",
            Algorithm::MostPopular => "MostPopular",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric() || *c == '+')
            .collect::<String>()
            .to_ascii_lowercase();
        Ok(match key.as_str() {
            "userknn" => Algorithm::UserKnn,
            "itemknn" => Algorithm::ItemKnn,
            "bmf" => Algorithm::Bmf,
            "svd++" | "svdpp" => Algorithm::SvdPlusPlus,
            "mostpopular" | "popular" | "pop" => Algorithm::MostPopular,
            _ => return Err(Error::InvalidArgument(format!("unknown algorithm '{s}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Similarity {
    /// Cosine over ratings centred on each vector's mean.
    Cosine,
    /// Centred like `Cosine`, but normalised over co-rated entries only.
    Pearson,
    /// Cosine over uncentred ratings.
    RawCosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    /// Similarity-weighted mean of the neighbours' ratings.
    WeightedAverage,
    /// Sum of the similarities of the supporting neighbours.
    SimilaritySum,
}

fn default_neighborhood() -> usize {
    50
}
fn default_similarity() -> Similarity {
    Similarity::Cosine
}
fn default_aggregation() -> Aggregation {
    Aggregation::WeightedAverage
}
fn default_factors() -> usize {
    20
}
fn default_learning_rate() -> f64 {
    0.01
}
fn default_regularization() -> f64 {
    0.05
}
fn default_epochs() -> usize {
    30
}
fn default_init_std() -> f64 {
    0.1
}
fn default_seed() -> u64 {
    42
}
fn default_list_size() -> usize {
    10
}

/// Hyperparameters for one recommender. Fields irrelevant to the chosen
/// algorithm are carried but ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgoConfig {
    pub algorithm: Algorithm,
    #[serde(default = "default_neighborhood")]
    pub neighborhood_size: usize,
    #[serde(default = "default_similarity")]
    pub similarity: Similarity,
    #[serde(default = "default_aggregation")]
    pub aggregation: Aggregation,
    /// Similarity shrinkage `n / (n + shrinkage)` over co-rating counts.
    #[serde(default)]
    pub shrinkage: f64,
    #[serde(default = "default_factors")]
    pub factors: usize,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_regularization")]
    pub regularization: f64,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_init_std")]
    pub init_std: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_list_size")]
    pub list_size: usize,
}

impl AlgoConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        AlgoConfig {
            algorithm,
            neighborhood_size: default_neighborhood(),
            similarity: default_similarity(),
            aggregation: default_aggregation(),
            shrinkage: 0.0,
            factors: default_factors(),
            learning_rate: default_learning_rate(),
            regularization: default_regularization(),
            epochs: default_epochs(),
            init_std: default_init_std(),
            seed: default_seed(),
            list_size: default_list_size(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("{what} must be positive")));
        if self.neighborhood_size == 0 {
            return bad("neighborhood_size");
        }
        if self.factors == 0 {
            return bad("factors");
        }
        if self.epochs == 0 {
            return bad("epochs");
        }
        if self.list_size == 0 {
            return bad("list_size");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate");
        }
        if !(self.regularization > 0.0 && self.regularization.is_finite()) {
            return bad("regularization");
        }
        if !(self.init_std > 0.0 && self.init_std.is_finite()) {
            return bad("init_std");
        }
        if !(self.shrinkage >= 0.0 && self.shrinkage.is_finite()) {
            return Err(Error::InvalidArgument("shrinkage must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum Params {
    Popularity,
    UserKnn(Neighbors),
    ItemKnn(Neighbors),
    Factors(FactorParams),
}

/// A fitted recommender bound to the training data it was fitted on.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    config: AlgoConfig,
    data: Arc<DatasetIndex>,
    /// Training popularity per item position: share of training users who rated it.
    popularity: Vec<f64>,
    params: Params,
    /// For ItemKNN: for each item j, the items whose neighbourhood contains j.
    reverse: Option<Vec<Vec<(usize, f64)>>>,
    loss_curve: Vec<f64>,
}

/// Sort key for candidate items: supported scores outrank fallback scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct RankKey {
    pub supported: bool,
    pub value: f64,
}

impl RankKey {
    /// Descending by support then value; the caller breaks ties by item.
    fn cmp_desc(&self, other: &Self) -> Ordering {
        other
            .supported
            .cmp(&self.supported)
            .then_with(|| other.value.total_cmp(&self.value))
    }
}

pub fn fit(train: &RatingsDataset, config: &AlgoConfig) -> Result<TrainedModel> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyTrainingData);
    }
    let data = Arc::clone(train.index());
    let mut loss_curve = Vec::new();
    let params = match config.algorithm {
        Algorithm::MostPopular => Params::Popularity,
        Algorithm::UserKnn => Params::UserKnn(knn::fit_user(&data, config)),
        Algorithm::ItemKnn => Params::ItemKnn(knn::fit_item(&data, config)),
        Algorithm::Bmf => {
            let (p, curve) = factor::fit_bmf(&data, config)?;
            loss_curve = curve;
            Params::Factors(p)
        }
        Algorithm::SvdPlusPlus => {
            let (p, curve) = factor::fit_svdpp(&data, config)?;
            loss_curve = curve;
            Params::Factors(p)
        }
    };
    Ok(TrainedModel::assemble(config.clone(), data, params, loss_curve))
}

impl TrainedModel {
    fn assemble(
        config: AlgoConfig,
        data: Arc<DatasetIndex>,
        params: Params,
        loss_curve: Vec<f64>,
    ) -> Self {
        let n_users = data.n_users() as f64;
        let popularity = data
            .by_item
            .iter()
            .map(|raters| raters.len() as f64 / n_users)
            .collect();
        let reverse = match &params {
            Params::ItemKnn(n) => Some(n.reversed(data.n_items())),
            _ => None,
        };
        TrainedModel {
            config,
            data,
            popularity,
            params,
            reverse,
            loss_curve,
        }
    }

    pub fn config(&self) -> &AlgoConfig {
        &self.config
    }

    pub fn algorithm(&self) -> Algorithm {
        self.config.algorithm
    }

    pub fn data_fingerprint(&self) -> &str {
        self.data.fingerprint()
    }

    /// Hash of the configuration and training data.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&self.config).expect("config serializes"));
        h.update(self.data.fingerprint().as_bytes());
        hex::encode(h.finalize())
    }

    /// Training objective after each epoch (factor models only).
    pub fn loss_curve(&self) -> &[f64] {
        &self.loss_curve
    }

    pub fn factor_params(&self) -> Option<&FactorParams> {
        match &self.params {
            Params::Factors(p) => Some(p),
            _ => None,
        }
    }

    pub fn neighbors(&self) -> Option<&Neighbors> {
        match &self.params {
            Params::UserKnn(n) | Params::ItemKnn(n) => Some(n),
            _ => None,
        }
    }

    fn rank_key(&self, user: Option<usize>, item: Option<usize>) -> RankKey {
        let popularity = item.map_or(0.0, |i| self.popularity[i]);
        let fallback = RankKey {
            supported: false,
            value: popularity,
        };
        match &self.params {
            Params::Popularity => RankKey {
                supported: true,
                value: popularity,
            },
            Params::Factors(p) => RankKey {
                supported: true,
                value: p.predict(&self.data, user, item),
            },
            Params::UserKnn(n) => match (user, item) {
                (Some(u), Some(i)) => knn::score_user_pair(&self.data, n, &self.config, u, i)
                    .map_or(fallback, |value| RankKey {
                        supported: true,
                        value,
                    }),
                _ => fallback,
            },
            Params::ItemKnn(n) => match (user, item) {
                (Some(u), Some(i)) => knn::score_item_pair(&self.data, n, &self.config, u, i)
                    .map_or(fallback, |value| RankKey {
                        supported: true,
                        value,
                    }),
                _ => fallback,
            },
        }
    }

    /// Predicted preference of `user` for `item`.
    ///
    /// Neighbourhood models fall back to the item's training popularity when
    /// no neighbour supports the pair; factor models drop the bias and factor
    /// terms of an unseen user or item.
    pub fn score(&self, user: UserId, item: ItemId) -> f64 {
        self.rank_key(self.data.user_pos(user), self.data.item_pos(item))
            .value
    }

    /// Rank keys for every training item, for a known user.
    fn user_keys(&self, u: usize) -> Vec<RankKey> {
        let n_items = self.data.n_items();
        match &self.params {
            Params::Popularity => self
                .popularity
                .iter()
                .map(|&value| RankKey {
                    supported: true,
                    value,
                })
                .collect(),
            Params::Factors(p) => (0..n_items)
                .map(|i| RankKey {
                    supported: true,
                    value: p.predict(&self.data, Some(u), Some(i)),
                })
                .collect(),
            Params::UserKnn(n) => {
                let acc = knn::accumulate_user(&self.data, n, &self.config, u);
                self.merge_knn(acc)
            }
            Params::ItemKnn(_) => {
                let reverse = self.reverse.as_ref().expect("item-knn reverse lists");
                let acc = knn::accumulate_item(&self.data, reverse, &self.config, u);
                self.merge_knn(acc)
            }
        }
    }

    fn merge_knn(&self, acc: Vec<Option<f64>>) -> Vec<RankKey> {
        acc.into_iter()
            .zip(&self.popularity)
            .map(|(score, &pop)| match score {
                Some(value) => RankKey {
                    supported: true,
                    value,
                },
                None => RankKey {
                    supported: false,
                    value: pop,
                },
            })
            .collect()
    }

    /// The `n` best-scoring training items `user` has not rated, by
    /// descending score with ties broken by ascending item id.
    pub fn recommend_top_n(&self, user: UserId, n: usize) -> Result<TopN> {
        let u = self.data.user_pos(user).ok_or(Error::UnknownUser(user))?;
        let keys = self.user_keys(u);
        let profile = &self.data.by_user[u];
        let mut rated = vec![false; keys.len()];
        for &(i, _) in profile {
            rated[i] = true;
        }
        let mut candidates: Vec<(RankKey, usize)> = keys
            .into_iter()
            .enumerate()
            .filter(|(i, _)| !rated[*i])
            .map(|(i, k)| (k, i))
            .collect();
        let cmp = |a: &(RankKey, usize), b: &(RankKey, usize)| {
            a.0.cmp_desc(&b.0).then_with(|| a.1.cmp(&b.1))
        };
        let short = candidates.len() < n;
        if candidates.len() > n && n > 0 {
            candidates.select_nth_unstable_by(n - 1, cmp);
            candidates.truncate(n);
        }
        candidates.sort_by(cmp);
        candidates.truncate(n);
        Ok(TopN {
            items: candidates
                .into_iter()
                .map(|(k, i)| Recommendation {
                    item: self.data.item_ids[i],
                    score: k.value,
                })
                .collect(),
            short,
        })
    }

    /// Top-N lists for every training user.
    pub fn recommend_all(&self, n: usize) -> Result<RecommendationSet> {
        let lists: Vec<(UserId, TopN)> = self
            .data
            .user_ids
            .par_iter()
            .map(|&u| self.recommend_top_n(u, n).map(|t| (u, t)))
            .collect::<Result<_>>()?;
        Ok(RecommendationSet::from_lists(n, self.fingerprint(), lists))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            config: self.config.clone(),
            data_fingerprint: self.data.fingerprint().to_string(),
            loss_curve: self.loss_curve.clone(),
            params: self.params.clone(),
        };
        let text = serde_json::to_string(&file)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// Loads a saved model; `train` must be the dataset it was fitted on.
    pub fn load(path: &Path, train: &RatingsDataset) -> Result<TrainedModel> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: ModelFile = serde_json::from_str(&text)?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::ModelVersion(file.format_version));
        }
        let data = Arc::clone(train.index());
        if file.data_fingerprint != data.fingerprint() {
            return Err(Error::FingerprintMismatch {
                expected: file.data_fingerprint,
                found: data.fingerprint().to_string(),
            });
        }
        Ok(TrainedModel::assemble(
            file.config,
            data,
            file.params,
            file.loss_curve,
        ))
    }
}

const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    config: AlgoConfig,
    data_fingerprint: String,
    loss_curve: Vec<f64>,
    params: Params,
}
