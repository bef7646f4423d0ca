//! User cohorts: popularity-interest groups G1..Gn and gender groups.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{Gender, RatingsDataset, UserDemographics, UserId};
use crate::error::{Error, Result};
use crate::metrics::ItemPopularity;

pub use crate::metrics::profile_avg_popularity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupingScheme {
    /// Split `[min, max]` of the scores into equally wide bins.
    EqualWidth,
    /// Split the score-sorted users into equally sized blocks.
    EqualCount,
}

impl FromStr for GroupingScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal-width" => Ok(GroupingScheme::EqualWidth),
            "equal-count" => Ok(GroupingScheme::EqualCount),
            _ => Err(Error::InvalidArgument(format!("unknown grouping scheme '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cohort {
    pub label: String,
    pub members: BTreeSet<UserId>,
    /// Mean of the members' profile popularity; `None` for an empty cohort.
    pub mean_profile_popularity: Option<f64>,
    /// Score range the cohort was built from, for popularity groups.
    #[serde(default)]
    pub bounds: Option<(f64, f64)>,
}

impl Cohort {
    fn new(label: String, members: BTreeSet<UserId>, scores: &BTreeMap<UserId, f64>, bounds: Option<(f64, f64)>) -> Self {
        let mean = if members.is_empty() {
            None
        } else {
            Some(members.iter().map(|u| scores[u]).sum::<f64>() / members.len() as f64)
        };
        Cohort {
            label,
            members,
            mean_profile_popularity: mean,
            bounds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortPartition {
    pub name: String,
    pub cohorts: Vec<Cohort>,
    /// Labels of cohorts that ended up empty.
    pub empty_cohorts: Vec<String>,
    /// Users left out of every cohort (e.g. unknown gender).
    pub excluded: usize,
    pub warnings: Vec<String>,
}

impl CohortPartition {
    pub fn get(&self, label: &str) -> Option<&Cohort> {
        self.cohorts.iter().find(|c| c.label == label)
    }
}

/// Profile popularity of every user in `users` that has a training profile.
pub fn profile_scores(
    users: &BTreeSet<UserId>,
    train: &RatingsDataset,
    popularity: &ItemPopularity,
) -> BTreeMap<UserId, f64> {
    users
        .iter()
        .filter_map(|&u| profile_avg_popularity(u, train, popularity).ok().map(|s| (u, s)))
        .collect()
}

/// Splits users into `n_groups` cohorts labelled G1..Gn by ascending score.
pub fn group_by_popularity(
    scores: &BTreeMap<UserId, f64>,
    n_groups: usize,
    scheme: GroupingScheme,
) -> Result<CohortPartition> {
    if n_groups < 2 {
        return Err(Error::InvalidArgument("need at least 2 groups".into()));
    }
    if scores.values().any(|s| !s.is_finite()) {
        return Err(Error::InvalidArgument("scores must be finite".into()));
    }
    if scores.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let mut sorted: Vec<(f64, UserId)> = scores.iter().map(|(&u, &s)| (s, u)).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut members = vec![BTreeSet::new(); n_groups];
    let mut bounds = vec![None; n_groups];
    match scheme {
        GroupingScheme::EqualWidth => {
            let min = sorted[0].0;
            let max = sorted[sorted.len() - 1].0;
            let edge = |k: usize| min + (max - min) * k as f64 / n_groups as f64;
            for (k, b) in bounds.iter_mut().enumerate() {
                let upper = if k + 1 == n_groups { max } else { edge(k + 1) };
                *b = Some((edge(k), upper));
            }
            for &(s, u) in &sorted {
                // Largest bin whose lower edge is <= s; the last bin is closed.
                let mut k = 0;
                while max > min && k + 1 < n_groups && s >= edge(k + 1) {
                    k += 1;
                }
                members[k].insert(u);
            }
        }
        GroupingScheme::EqualCount => {
            let n = sorted.len();
            let mut start = 0;
            while start < n {
                let mut end = start + 1;
                while end < n && sorted[end].0 == sorted[start].0 {
                    end += 1;
                }
                // A run of tied scores lands entirely in the block of its first member.
                let k = start * n_groups / n;
                for &(_, u) in &sorted[start..end] {
                    members[k].insert(u);
                }
                start = end;
            }
            for (k, m) in members.iter().enumerate() {
                bounds[k] = m
                    .iter()
                    .map(|u| scores[u])
                    .fold(None, |acc: Option<(f64, f64)>, s| {
                        Some(acc.map_or((s, s), |(lo, hi)| (lo.min(s), hi.max(s))))
                    });
            }
        }
    }

    let cohorts: Vec<Cohort> = members
        .into_iter()
        .zip(bounds)
        .enumerate()
        .map(|(k, (m, b))| Cohort::new(format!("G{}", k + 1), m, scores, b))
        .collect();
    let empty_cohorts: Vec<String> = cohorts
        .iter()
        .filter(|c| c.members.is_empty())
        .map(|c| c.label.clone())
        .collect();
    let mut warnings = Vec::new();
    if !empty_cohorts.is_empty() {
        warnings.push(format!("empty popularity cohorts: {}", empty_cohorts.join(", ")));
    }
    Ok(CohortPartition {
        name: "popularity".into(),
        cohorts,
        empty_cohorts,
        excluded: 0,
        warnings,
    })
}

/// Splits scored users into `men` and `women`; users with unknown or missing
/// gender are excluded and counted.
pub fn group_by_gender(scores: &BTreeMap<UserId, f64>, demographics: &UserDemographics) -> CohortPartition {
    let mut men = BTreeSet::new();
    let mut women = BTreeSet::new();
    let mut excluded = 0;
    for &u in scores.keys() {
        match demographics.gender.get(&u) {
            Some(Gender::Male) => {
                men.insert(u);
            }
            Some(Gender::Female) => {
                women.insert(u);
            }
            _ => excluded += 1,
        }
    }
    let mut warnings = Vec::new();
    if demographics.gender.is_empty() {
        warnings.push("no demographic data; gender cohorts are empty".to_string());
    }
    if excluded > 0 {
        warnings.push(format!("{excluded} users have unknown gender"));
    }
    let cohorts = vec![
        Cohort::new("men".into(), men, scores, None),
        Cohort::new("women".into(), women, scores, None),
    ];
    let empty_cohorts = cohorts
        .iter()
        .filter(|c| c.members.is_empty())
        .map(|c| c.label.clone())
        .collect();
    CohortPartition {
        name: "gender".into(),
        cohorts,
        empty_cohorts,
        excluded,
        warnings,
    }
}

#[derive(Serialize, Deserialize)]
struct CohortRow {
    user_id: UserId,
    partition: String,
    label: String,
}

/// Writes `user_id,partition,label` rows for every partition.
pub fn write_cohorts(partitions: &[&CohortPartition], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for p in partitions {
        for c in &p.cohorts {
            for &user_id in &c.members {
                w.serialize(CohortRow {
                    user_id,
                    partition: p.name.clone(),
                    label: c.label.clone(),
                })?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads a cohort export back as partition → label → members.
pub fn read_cohorts(path: &Path) -> Result<BTreeMap<String, BTreeMap<String, BTreeSet<UserId>>>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out: BTreeMap<String, BTreeMap<String, BTreeSet<UserId>>> = BTreeMap::new();
    for row in r.deserialize::<CohortRow>() {
        let row = row?;
        out.entry(row.partition)
            .or_default()
            .entry(row.label)
            .or_default()
            .insert(row.user_id);
    }
    Ok(out)
}
