use serde::{Deserialize, Serialize};

use crate::dataset::{ItemCatalog, ItemId, RatingsDataset, UserId};
use crate::error::{Error, Result};
use crate::recommend::RecommendationSet;

/// Tolerance on total mass for a distribution to count as normalized.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Probability mass over a catalog's genre vocabulary, one cell per genre in
/// vocabulary order. A distribution built from no items is empty and
/// unusable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalDistribution {
    mass: Vec<f64>,
    empty: bool,
}

impl CategoricalDistribution {
    /// Normalizes non-negative weights. All-zero weights give an empty distribution.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidArgument(
                "distribution weights must be finite and non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Ok(Self::empty(weights.len()));
        }
        Ok(CategoricalDistribution {
            mass: weights.into_iter().map(|w| w / total).collect(),
            empty: false,
        })
    }

    pub fn empty(cells: usize) -> Self {
        CategoricalDistribution {
            mass: vec![0.0; cells],
            empty: true,
        }
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn get(&self, catalog: &ItemCatalog, genre: &str) -> Option<f64> {
        catalog
            .vocabulary()
            .iter()
            .position(|g| g == genre)
            .and_then(|p| self.mass.get(p).copied())
    }

    fn check(&self) -> Result<()> {
        if self.empty {
            return Err(Error::EmptyDistribution);
        }
        let total = self.total();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE || self.mass.iter().any(|m| *m < 0.0) {
            return Err(Error::Unnormalized(total));
        }
        Ok(())
    }
}

/// Genre distribution of one item: uniform over its genres.
pub fn item_feature_distribution(item: ItemId, catalog: &ItemCatalog) -> Result<CategoricalDistribution> {
    let positions = catalog.genre_positions(item).ok_or(Error::UnknownItem(item))?;
    let mut weights = vec![0.0; catalog.vocabulary().len()];
    let share = 1.0 / positions.len() as f64;
    for &p in positions {
        weights[p] = share;
    }
    CategoricalDistribution::from_weights(weights)
}

/// Mean of the item distributions of `items`, each weighted 1. Items missing
/// from the catalog are skipped.
pub fn mean_item_distribution(items: impl IntoIterator<Item = ItemId>, catalog: &ItemCatalog) -> CategoricalDistribution {
    let mut weights = vec![0.0; catalog.vocabulary().len()];
    for item in items {
        if let Some(positions) = catalog.genre_positions(item) {
            let share = 1.0 / positions.len() as f64;
            for &p in positions {
                weights[p] += share;
            }
        }
    }
    CategoricalDistribution::from_weights(weights).expect("non-negative weights")
}

/// Genre distribution of a user's training profile.
pub fn profile_distribution(user: UserId, train: &RatingsDataset, catalog: &ItemCatalog) -> CategoricalDistribution {
    match train.index().profile(user) {
        Some(profile) => mean_item_distribution(profile.map(|(i, _)| i), catalog),
        None => CategoricalDistribution::empty(catalog.vocabulary().len()),
    }
}

/// Genre distribution of a user's recommendation list.
pub fn recommendation_distribution(user: UserId, recs: &RecommendationSet, catalog: &ItemCatalog) -> CategoricalDistribution {
    match recs.items(user) {
        Some(items) => mean_item_distribution(items, catalog),
        None => CategoricalDistribution::empty(catalog.vocabulary().len()),
    }
}

/// Hellinger distance `‖√p − √q‖₂ / √2`, in [0, 1].
pub fn hellinger(p: &CategoricalDistribution, q: &CategoricalDistribution) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(p.len(), q.len()));
    }
    p.check()?;
    q.check()?;
    let sum: f64 = p
        .mass
        .iter()
        .zip(&q.mass)
        .map(|(a, b)| {
            let d = a.sqrt() - b.sqrt();
            d * d
        })
        .sum();
    Ok((sum.sqrt() / std::f64::consts::SQRT_2).clamp(0.0, 1.0))
}

/// `KL(p ‖ (1−ε)q + ε·uniform)`. Diagnostic only; the smoothing keeps it
/// finite where `q` has empty cells.
pub fn kl_miscalibration(p: &CategoricalDistribution, q: &CategoricalDistribution, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "KL smoothing must lie in (0, 1], got {epsilon}"
        )));
    }
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(p.len(), q.len()));
    }
    p.check()?;
    q.check()?;
    let uniform = 1.0 / q.len() as f64;
    Ok(p.mass
        .iter()
        .zip(&q.mass)
        .filter(|(a, _)| **a > 0.0)
        .map(|(a, b)| a * (a / ((1.0 - epsilon) * b + epsilon * uniform)).ln())
        .sum())
}

/// Miscalibration of one user's list: Hellinger distance between the genre
/// distributions of their profile and their recommendations.
pub fn user_miscalibration(
    user: UserId,
    train: &RatingsDataset,
    recs: &RecommendationSet,
    catalog: &ItemCatalog,
) -> Result<f64> {
    let p = profile_distribution(user, train, catalog);
    let q = recommendation_distribution(user, recs, catalog);
    hellinger(&p, &q)
}
