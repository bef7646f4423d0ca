//! Rating data: parsing, validation, core-k filtering and train/test splits.

mod catalog;
mod filter;
mod parse;
mod split;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use catalog::{Gender, ItemCatalog, UserDemographics};
pub use filter::core_filter;
pub use parse::{
    parse_demographics, parse_item_catalog, parse_ratings, write_ratings, CatalogFormat,
    DelimitedCatalog, DelimitedRatings, RatingsFormat,
};
pub use split::{
    apply_manifest, read_manifest, split, split_with, write_manifest, Partition, SplitOptions,
    TrainTestSplit,
};

pub type UserId = u64;
pub type ItemId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rating {
    pub user: UserId,
    pub item: ItemId,
    pub value: f64,
    /// Parsed for completeness; nothing downstream weights by recency.
    pub timestamp: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatingScale {
    pub min: f64,
    pub max: f64,
}

impl RatingScale {
    pub const MOVIELENS: RatingScale = RatingScale { min: 1.0, max: 5.0 };

    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min <= max) {
            return Err(Error::InvalidArgument(format!(
                "rating scale [{min}, {max}] is not a finite interval"
            )));
        }
        Ok(RatingScale { min, max })
    }

    pub fn contains(&self, value: f64) -> bool {
        value >= self.min && value <= self.max
    }
}

/// A validated set of ratings. Immutable once built.
///
/// Every `(user, item)` pair occurs at most once, every value lies within
/// the scale, and the user and item sets are exactly those referenced by the
/// ratings.
#[derive(Debug, Clone)]
pub struct RatingsDataset {
    ratings: Vec<Rating>,
    users: BTreeSet<UserId>,
    items: BTreeSet<ItemId>,
    scale: RatingScale,
    index: OnceLock<Arc<DatasetIndex>>,
}

impl PartialEq for RatingsDataset {
    fn eq(&self, other: &Self) -> bool {
        self.ratings == other.ratings && self.scale == other.scale
    }
}

impl RatingsDataset {
    pub fn new(ratings: Vec<Rating>, scale: RatingScale) -> Result<Self> {
        if ratings.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut seen = HashSet::with_capacity(ratings.len());
        let mut users = BTreeSet::new();
        let mut items = BTreeSet::new();
        for r in &ratings {
            if !r.value.is_finite() || !scale.contains(r.value) {
                return Err(Error::OutOfScale {
                    user: r.user,
                    item: r.item,
                    value: r.value,
                    min: scale.min,
                    max: scale.max,
                });
            }
            if !seen.insert((r.user, r.item)) {
                return Err(Error::DuplicateRating {
                    user: r.user,
                    item: r.item,
                });
            }
            users.insert(r.user);
            items.insert(r.item);
        }
        Ok(RatingsDataset {
            ratings,
            users,
            items,
            scale,
            index: OnceLock::new(),
        })
    }

    pub fn ratings(&self) -> &[Rating] {
        &self.ratings
    }

    pub fn users(&self) -> &BTreeSet<UserId> {
        &self.users
    }

    pub fn items(&self) -> &BTreeSet<ItemId> {
        &self.items
    }

    pub fn scale(&self) -> RatingScale {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.ratings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratings.is_empty()
    }

    /// Dense per-user and per-item views, built on first use.
    pub fn index(&self) -> &Arc<DatasetIndex> {
        self.index
            .get_or_init(|| Arc::new(DatasetIndex::build(&self.ratings)))
    }

    /// Stable content hash over the ratings in canonical (user, item) order.
    pub fn fingerprint(&self) -> String {
        self.index().fingerprint.clone()
    }

    /// Builds a dataset from a subset of this one's records, keeping their order.
    pub(crate) fn subset(&self, keep: impl Fn(usize, &Rating) -> bool) -> Result<Self> {
        let ratings = self
            .ratings
            .iter()
            .enumerate()
            .filter(|(i, r)| keep(*i, r))
            .map(|(_, r)| *r)
            .collect();
        RatingsDataset::new(ratings, self.scale)
    }
}

/// Compact indexed view of a dataset. Users and items are numbered densely in
/// ascending id order, so dense position order equals id order.
#[derive(Debug)]
pub struct DatasetIndex {
    pub user_ids: Vec<UserId>,
    pub item_ids: Vec<ItemId>,
    user_pos: HashMap<UserId, usize>,
    item_pos: HashMap<ItemId, usize>,
    /// Per user: `(item position, value)` sorted by item position.
    pub by_user: Vec<Vec<(usize, f64)>>,
    /// Per item: `(user position, value)` sorted by user position.
    pub by_item: Vec<Vec<(usize, f64)>>,
    pub global_mean: f64,
    fingerprint: String,
}

impl DatasetIndex {
    fn build(ratings: &[Rating]) -> Self {
        let user_ids: Vec<UserId> = ratings
            .iter()
            .map(|r| r.user)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let item_ids: Vec<ItemId> = ratings
            .iter()
            .map(|r| r.item)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let user_pos: HashMap<_, _> = user_ids.iter().enumerate().map(|(i, &u)| (u, i)).collect();
        let item_pos: HashMap<_, _> = item_ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();

        let mut by_user = vec![Vec::new(); user_ids.len()];
        let mut by_item = vec![Vec::new(); item_ids.len()];
        let mut sum = 0.0;
        for r in ratings {
            let u = user_pos[&r.user];
            let i = item_pos[&r.item];
            by_user[u].push((i, r.value));
            by_item[i].push((u, r.value));
            sum += r.value;
        }
        for list in by_user.iter_mut().chain(by_item.iter_mut()) {
            list.sort_by_key(|&(pos, _)| pos);
        }

        let mut hasher = Sha256::new();
        for (u, list) in by_user.iter().enumerate() {
            for &(i, value) in list {
                hasher.update(user_ids[u].to_le_bytes());
                hasher.update(item_ids[i].to_le_bytes());
                hasher.update(value.to_bits().to_le_bytes());
            }
        }
        let fingerprint = hex::encode(hasher.finalize());

        let global_mean = if ratings.is_empty() {
            0.0
        } else {
            sum / ratings.len() as f64
        };

        DatasetIndex {
            user_ids,
            item_ids,
            user_pos,
            item_pos,
            by_user,
            by_item,
            global_mean,
            fingerprint,
        }
    }

    pub fn n_users(&self) -> usize {
        self.user_ids.len()
    }

    pub fn n_items(&self) -> usize {
        self.item_ids.len()
    }

    pub fn user_pos(&self, user: UserId) -> Option<usize> {
        self.user_pos.get(&user).copied()
    }

    pub fn item_pos(&self, item: ItemId) -> Option<usize> {
        self.item_pos.get(&item).copied()
    }

    /// Items rated by `user`, ascending by item id.
    pub fn profile(&self, user: UserId) -> Option<impl Iterator<Item = (ItemId, f64)> + '_> {
        self.user_pos(user).map(|u| {
            self.by_user[u]
                .iter()
                .map(move |&(i, v)| (self.item_ids[i], v))
        })
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }
}
