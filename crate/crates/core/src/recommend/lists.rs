use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{ItemId, RatingsDataset, UserId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub item: ItemId,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopN {
    pub items: Vec<Recommendation>,
    /// Fewer than `n` unrated candidates existed.
    pub short: bool,
}

/// Ordered top-N lists for a set of users.
#[derive(Debug, Clone, PartialEq)]
pub struct RecommendationSet {
    pub n: usize,
    pub model_fingerprint: String,
    lists: BTreeMap<UserId, Vec<Recommendation>>,
}

impl RecommendationSet {
    pub fn from_lists(n: usize, model_fingerprint: String, lists: impl IntoIterator<Item = (UserId, TopN)>) -> Self {
        RecommendationSet {
            n,
            model_fingerprint,
            lists: lists.into_iter().map(|(u, t)| (u, t.items)).collect(),
        }
    }

    pub fn list(&self, user: UserId) -> Option<&[Recommendation]> {
        self.lists.get(&user).map(Vec::as_slice)
    }

    pub fn items(&self, user: UserId) -> Option<impl Iterator<Item = ItemId> + '_> {
        self.lists.get(&user).map(|l| l.iter().map(|r| r.item))
    }

    pub fn users(&self) -> impl Iterator<Item = UserId> + '_ {
        self.lists.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (UserId, &[Recommendation])> + '_ {
        self.lists.iter().map(|(&u, l)| (u, l.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    /// Users whose list holds fewer than `n` items.
    pub fn short_lists(&self) -> BTreeSet<UserId> {
        self.lists
            .iter()
            .filter(|(_, l)| l.len() < self.n)
            .map(|(&u, _)| u)
            .collect()
    }

    pub fn total_recommendations(&self) -> usize {
        self.lists.values().map(Vec::len).sum()
    }
}

#[derive(Serialize, Deserialize)]
struct RecRow {
    user_id: UserId,
    rank: usize,
    item_id: ItemId,
    score: f64,
}

/// Writes `user_id,rank,item_id,score`, ranks starting at 1.
pub fn write_recommendations(recs: &RecommendationSet, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (user, list) in recs.iter() {
        for (rank, r) in list.iter().enumerate() {
            w.serialize(RecRow {
                user_id: user,
                rank: rank + 1,
                item_id: r.item,
                score: r.score,
            })?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_recommendations(path: &Path, n: usize, model_fingerprint: impl Into<String>) -> Result<RecommendationSet> {
    let mut r = csv::Reader::from_path(path)?;
    let mut lists: BTreeMap<UserId, Vec<Recommendation>> = BTreeMap::new();
    for (line, row) in r.deserialize::<RecRow>().enumerate() {
        let row = row?;
        let list = lists.entry(row.user_id).or_default();
        if row.rank != list.len() + 1 {
            return Err(Error::malformed(
                path,
                line + 2,
                format!("user {} rank {} out of order", row.user_id, row.rank),
            ));
        }
        list.push(Recommendation {
            item: row.item_id,
            score: row.score,
        });
    }
    Ok(RecommendationSet {
        n,
        model_fingerprint: model_fingerprint.into(),
        lists,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionReport {
    pub mean: f64,
    pub per_user: BTreeMap<UserId, f64>,
    /// Recommended-to users with no relevant test ratings.
    pub users_without_test: usize,
    /// Test users that received no list (no training profile).
    pub test_users_without_list: usize,
}

/// Precision@N: per user, hits among the list over N, averaged over users
/// with at least one relevant test rating. With `threshold`, only test
/// ratings at or above it count as relevant.
pub fn precision_at_n(recs: &RecommendationSet, test: &RatingsDataset, threshold: Option<f64>) -> Result<PrecisionReport> {
    let mut relevant: BTreeMap<UserId, HashSet<ItemId>> = BTreeMap::new();
    for r in test.ratings() {
        if threshold.is_none_or(|t| r.value >= t) {
            relevant.entry(r.user).or_default().insert(r.item);
        }
    }
    let mut per_user = BTreeMap::new();
    let mut users_without_test = 0;
    for (user, list) in recs.iter() {
        match relevant.get(&user) {
            Some(rel) => {
                let hits = list.iter().filter(|r| rel.contains(&r.item)).count();
                per_user.insert(user, hits as f64 / recs.n as f64);
            }
            None => users_without_test += 1,
        }
    }
    let test_users_without_list = relevant.keys().filter(|u| recs.list(**u).is_none()).count();
    if per_user.is_empty() {
        return Err(Error::InvalidArgument(
            "no user has both a recommendation list and relevant test ratings".into(),
        ));
    }
    let mean = per_user.values().sum::<f64>() / per_user.len() as f64;
    Ok(PrecisionReport {
        mean,
        per_user,
        users_without_test,
        test_users_without_list,
    })
}
