use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{ItemId, UserId};
use crate::error::{Error, Result};

/// Item → genre set, plus the sorted vocabulary of every genre seen.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemCatalog {
    vocabulary: Vec<String>,
    /// Genre positions into `vocabulary`, sorted and de-duplicated.
    features: BTreeMap<ItemId, Vec<usize>>,
}

impl ItemCatalog {
    pub fn new<I, G, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (ItemId, G)>,
        G: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut raw: BTreeMap<ItemId, BTreeSet<String>> = BTreeMap::new();
        for (item, genres) in entries {
            let set: BTreeSet<String> = genres
                .into_iter()
                .map(Into::into)
                .filter(|g: &String| !g.is_empty())
                .collect();
            if set.is_empty() {
                return Err(Error::NoGenres(item));
            }
            raw.entry(item).or_default().extend(set);
        }
        let vocabulary: Vec<String> = raw
            .values()
            .flatten()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let features = raw
            .into_iter()
            .map(|(item, genres)| {
                let positions = genres
                    .iter()
                    .map(|g| vocabulary.binary_search(g).expect("genre in vocabulary"))
                    .collect();
                (item, positions)
            })
            .collect();
        Ok(ItemCatalog {
            vocabulary,
            features,
        })
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn contains(&self, item: ItemId) -> bool {
        self.features.contains_key(&item)
    }

    pub fn genre_positions(&self, item: ItemId) -> Option<&[usize]> {
        self.features.get(&item).map(Vec::as_slice)
    }

    pub fn genres(&self, item: ItemId) -> Option<Vec<&str>> {
        self.genre_positions(item)
            .map(|ps| ps.iter().map(|&p| self.vocabulary[p].as_str()).collect())
    }

    pub fn items(&self) -> impl Iterator<Item = ItemId> + '_ {
        self.features.keys().copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gender {
    Male,
    Female,
    Unknown,
}

impl Gender {
    pub fn from_code(code: &str) -> Gender {
        match code.trim() {
            "M" | "m" => Gender::Male,
            "F" | "f" => Gender::Female,
            _ => Gender::Unknown,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct UserDemographics {
    pub gender: BTreeMap<UserId, Gender>,
    /// Rows whose gender code was not recognised.
    pub unknown_codes: usize,
    pub warnings: Vec<String>,
}

impl UserDemographics {
    /// Drops entries for users outside `users`, keeping keys a subset of the dataset.
    pub fn restricted_to(&self, users: &BTreeSet<UserId>) -> UserDemographics {
        let gender: BTreeMap<_, _> = self
            .gender
            .iter()
            .filter(|(u, _)| users.contains(u))
            .map(|(&u, &g)| (u, g))
            .collect();
        let mut warnings = self.warnings.clone();
        let dropped = self.gender.len() - gender.len();
        if dropped > 0 {
            warnings.push(format!("{dropped} demographic rows refer to users not in the dataset"));
        }
        if gender.is_empty() {
            warnings.push("demographics cover no dataset users".to_string());
        }
        UserDemographics {
            gender,
            unknown_codes: self.unknown_codes,
            warnings,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vocabulary_is_union_of_genres() {
        let cat = ItemCatalog::new(vec![
            (1, vec!["Comedy", "Animation"]),
            (2, vec!["Drama"]),
            (3, vec!["Comedy"]),
        ])
        .unwrap();
        assert_eq!(cat.vocabulary(), &["Animation", "Comedy", "Drama"]);
        assert_eq!(cat.genres(1).unwrap(), vec!["Animation", "Comedy"]);
        assert_eq!(cat.genre_positions(2).unwrap(), &[2]);
    }

    #[test]
    fn empty_genre_set_is_rejected() {
        let err = ItemCatalog::new(vec![(7, Vec::<String>::new())]).unwrap_err();
        assert!(matches!(err, Error::NoGenres(7)));
    }

    #[test]
    fn restriction_warns_when_nothing_is_covered() {
        let mut d = UserDemographics::default();
        d.gender.insert(100, Gender::Female);
        let users: BTreeSet<UserId> = [1, 2].into_iter().collect();
        let r = d.restricted_to(&users);
        assert!(r.gender.is_empty());
        assert!(r.warnings.iter().any(|w| w.contains("no dataset users")));
    }
}
