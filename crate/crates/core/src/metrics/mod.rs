//! Popularity and calibration metrics: item popularity, group average
//! popularity, popularity lift and genre miscalibration.

mod distribution;

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{ItemCatalog, ItemId, RatingsDataset, UserId};
use crate::error::{Error, Result};
use crate::recommend::RecommendationSet;

pub use distribution::{
    hellinger, item_feature_distribution, kl_miscalibration, mean_item_distribution,
    profile_distribution, recommendation_distribution, user_miscalibration,
    CategoricalDistribution, NORMALIZATION_TOLERANCE,
};

/// Share of training users who rated each item.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemPopularity {
    theta: BTreeMap<ItemId, f64>,
    n_users: usize,
}

impl ItemPopularity {
    /// Popularity of `item`; zero for items never rated in training.
    pub fn theta(&self, item: ItemId) -> f64 {
        self.theta.get(&item).copied().unwrap_or(0.0)
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn iter(&self) -> impl Iterator<Item = (ItemId, f64)> + '_ {
        self.theta.iter().map(|(&i, &t)| (i, t))
    }

    /// Every value multiplied by `factor`; used to check scale invariance.
    pub fn scaled(&self, factor: f64) -> ItemPopularity {
        ItemPopularity {
            theta: self.theta.iter().map(|(&i, &t)| (i, t * factor)).collect(),
            n_users: self.n_users,
        }
    }
}

pub fn item_popularity(train: &RatingsDataset) -> ItemPopularity {
    let idx = train.index();
    let n_users = idx.n_users();
    // (user, item) pairs are unique, so each rater is counted once.
    let theta = idx
        .item_ids
        .iter()
        .zip(&idx.by_item)
        .map(|(&item, raters)| (item, raters.len() as f64 / n_users as f64))
        .collect();
    ItemPopularity { theta, n_users }
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Mean popularity of the items in a user's training profile.
pub fn profile_avg_popularity(user: UserId, train: &RatingsDataset, popularity: &ItemPopularity) -> Result<f64> {
    let profile = train.index().profile(user).ok_or(Error::EmptyProfile(user))?;
    mean(profile.map(|(i, _)| popularity.theta(i))).ok_or(Error::EmptyProfile(user))
}

/// Mean popularity of the items recommended to a user.
pub fn rec_avg_popularity(user: UserId, recs: &RecommendationSet, popularity: &ItemPopularity) -> Result<f64> {
    let items = recs.items(user).ok_or(Error::NoRecommendations(user))?;
    mean(items.map(|i| popularity.theta(i))).ok_or(Error::NoRecommendations(user))
}

/// Group average popularity of the members' training profiles.
pub fn gap_profile(group: &BTreeSet<UserId>, train: &RatingsDataset, popularity: &ItemPopularity) -> Result<f64> {
    if group.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let values = group
        .iter()
        .map(|&u| profile_avg_popularity(u, train, popularity))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean(values).expect("non-empty group"))
}

/// Group average popularity of the members' recommendation lists.
pub fn gap_recs(group: &BTreeSet<UserId>, recs: &RecommendationSet, popularity: &ItemPopularity) -> Result<f64> {
    if group.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let values = group
        .iter()
        .map(|&u| rec_avg_popularity(u, recs, popularity))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean(values).expect("non-empty group"))
}

/// Relative change from profile to recommendation popularity. Positive
/// values mean the recommender amplifies popularity.
pub fn popularity_lift(gap_p: f64, gap_q: f64) -> Result<f64> {
    if !(gap_p > 0.0) || !gap_p.is_finite() {
        return Err(Error::UndefinedLift(gap_p));
    }
    Ok((gap_q - gap_p) / gap_p)
}

/// Mean of the members' miscalibration values. Members without a value
/// (excluded users) are skipped.
pub fn group_miscalibration(group: &BTreeSet<UserId>, per_user: &BTreeMap<UserId, f64>) -> Result<f64> {
    mean(group.iter().filter_map(|u| per_user.get(u).copied())).ok_or(Error::EmptyGroup)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserMetricRow {
    pub user: UserId,
    pub profile_avg_popularity: f64,
    pub rec_avg_popularity: f64,
    pub miscalibration: f64,
}

impl UserMetricRow {
    /// Per-user popularity lift, `None` for an all-zero-popularity profile.
    pub fn lift(&self) -> Option<f64> {
        popularity_lift(self.profile_avg_popularity, self.rec_avg_popularity).ok()
    }
}

/// Why users were left out of the per-user metrics.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusions {
    /// No training profile at all.
    pub no_profile: usize,
    /// No recommendation list, or an empty one.
    pub no_recommendations: usize,
    /// Profile items all missing from the catalog.
    pub empty_profile_distribution: usize,
    /// Recommended items all missing from the catalog.
    pub empty_recommendation_distribution: usize,
}

impl Exclusions {
    pub fn total(&self) -> usize {
        self.no_profile
            + self.no_recommendations
            + self.empty_profile_distribution
            + self.empty_recommendation_distribution
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserMetrics {
    pub rows: BTreeMap<UserId, UserMetricRow>,
    pub exclusions: Exclusions,
}

enum Outcome {
    Row(UserMetricRow),
    NoProfile,
    NoRecs,
    EmptyP,
    EmptyQ,
}

/// Per-user popularity and miscalibration for `users`. Users lacking any
/// ingredient are counted in `exclusions` and get no row, so group MC and
/// group PL are computed over the same population.
pub fn user_metrics(
    users: &BTreeSet<UserId>,
    train: &RatingsDataset,
    recs: &RecommendationSet,
    catalog: &ItemCatalog,
    popularity: &ItemPopularity,
) -> UserMetrics {
    let users: Vec<UserId> = users.iter().copied().collect();
    let outcomes: Vec<Outcome> = users
        .par_iter()
        .map(|&u| {
            let Ok(prof) = profile_avg_popularity(u, train, popularity) else {
                return Outcome::NoProfile;
            };
            let Ok(rec) = rec_avg_popularity(u, recs, popularity) else {
                return Outcome::NoRecs;
            };
            let p = profile_distribution(u, train, catalog);
            if p.is_empty() {
                return Outcome::EmptyP;
            }
            let q = recommendation_distribution(u, recs, catalog);
            if q.is_empty() {
                return Outcome::EmptyQ;
            }
            let mc = hellinger(&p, &q).expect("normalized distributions");
            Outcome::Row(UserMetricRow {
                user: u,
                profile_avg_popularity: prof,
                rec_avg_popularity: rec,
                miscalibration: mc,
            })
        })
        .collect();

    let mut rows = BTreeMap::new();
    let mut exclusions = Exclusions::default();
    for outcome in outcomes {
        match outcome {
            Outcome::Row(r) => {
                rows.insert(r.user, r);
            }
            Outcome::NoProfile => exclusions.no_profile += 1,
            Outcome::NoRecs => exclusions.no_recommendations += 1,
            Outcome::EmptyP => exclusions.empty_profile_distribution += 1,
            Outcome::EmptyQ => exclusions.empty_recommendation_distribution += 1,
        }
    }
    UserMetrics { rows, exclusions }
}

/// GAP_p, GAP_q, PL and MC for one group of users.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub size: usize,
    pub gap_p: f64,
    pub gap_q: f64,
    /// `None` when GAP_p is zero.
    pub lift: Option<f64>,
    pub miscalibration: f64,
}

impl GroupSummary {
    /// Summarizes the rows of `group` members; members without a row are
    /// ignored. `None` if no member has a row.
    pub fn of(group: &BTreeSet<UserId>, rows: &BTreeMap<UserId, UserMetricRow>) -> Option<GroupSummary> {
        let members: Vec<&UserMetricRow> = group.iter().filter_map(|u| rows.get(u)).collect();
        if members.is_empty() {
            return None;
        }
        let gap_p = mean(members.iter().map(|r| r.profile_avg_popularity))?;
        let gap_q = mean(members.iter().map(|r| r.rec_avg_popularity))?;
        let mc = mean(members.iter().map(|r| r.miscalibration))?;
        Some(GroupSummary {
            size: members.len(),
            gap_p,
            gap_q,
            lift: popularity_lift(gap_p, gap_q).ok(),
            miscalibration: mc,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ItemExposure {
    pub item_id: ItemId,
    pub times_rated: usize,
    pub times_recommended: usize,
    pub mean_rating: f64,
}

/// One row per training item: how often it was rated and recommended.
pub fn rated_vs_recommended(train: &RatingsDataset, recs: &RecommendationSet) -> Vec<ItemExposure> {
    let idx = train.index();
    let mut recommended = vec![0usize; idx.n_items()];
    for (_, list) in recs.iter() {
        for r in list {
            if let Some(i) = idx.item_pos(r.item) {
                recommended[i] += 1;
            }
        }
    }
    idx.item_ids
        .iter()
        .zip(&idx.by_item)
        .zip(recommended)
        .map(|((&item_id, raters), times_recommended)| ItemExposure {
            item_id,
            times_rated: raters.len(),
            times_recommended,
            mean_rating: raters.iter().map(|&(_, v)| v).sum::<f64>() / raters.len() as f64,
        })
        .collect()
}
