use std::collections::HashMap;

use super::RatingsDataset;
use crate::error::{Error, Result};

/// Repeatedly drops users and items with fewer ratings than their threshold
/// until every survivor meets it.
pub fn core_filter(
    dataset: &RatingsDataset,
    min_user_ratings: usize,
    min_item_ratings: usize,
) -> Result<RatingsDataset> {
    if min_user_ratings == 0 || min_item_ratings == 0 {
        return Err(Error::InvalidArgument(
            "core filter thresholds must be at least 1".into(),
        ));
    }
    let ratings = dataset.ratings();
    let mut keep = vec![true; ratings.len()];
    loop {
        let mut user_counts: HashMap<u64, usize> = HashMap::new();
        let mut item_counts: HashMap<u64, usize> = HashMap::new();
        for (r, _) in ratings.iter().zip(&keep).filter(|(_, &k)| k) {
            *user_counts.entry(r.user).or_default() += 1;
            *item_counts.entry(r.item).or_default() += 1;
        }
        let mut changed = false;
        for (r, k) in ratings.iter().zip(keep.iter_mut()) {
            if *k
                && (user_counts[&r.user] < min_user_ratings
                    || item_counts[&r.item] < min_item_ratings)
            {
                *k = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    if !keep.iter().any(|&k| k) {
        return Err(Error::FilterRemovedAll);
    }
    dataset.subset(|i, _| keep[i])
}
