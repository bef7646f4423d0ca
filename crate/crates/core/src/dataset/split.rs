use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{RatingsDataset, UserId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partition {
    Train,
    Test,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitOptions {
    /// Split each user's ratings separately instead of the whole record set.
    #[serde(default)]
    pub stratify_by_user: bool,
}

#[derive(Debug, Clone)]
pub struct TrainTestSplit {
    pub train: RatingsDataset,
    pub test: RatingsDataset,
    pub ratio: f64,
    /// `None` when the split was replayed from a manifest.
    pub seed: Option<u64>,
    /// Partition of every record of the source dataset, by record index.
    pub assignment: Vec<Partition>,
}

impl TrainTestSplit {
    /// Test-set users with no training ratings. They have no profile, so they
    /// are left out of evaluation.
    pub fn test_only_users(&self) -> Vec<UserId> {
        self.test
            .users()
            .iter()
            .filter(|u| !self.train.users().contains(u))
            .copied()
            .collect()
    }
}

pub fn split(dataset: &RatingsDataset, ratio: f64, seed: u64) -> Result<TrainTestSplit> {
    split_with(dataset, ratio, seed, SplitOptions::default())
}

pub fn split_with(
    dataset: &RatingsDataset,
    ratio: f64,
    seed: u64,
    options: SplitOptions,
) -> Result<TrainTestSplit> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "split ratio must lie in (0, 1), got {ratio}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![Partition::Test; dataset.len()];

    if options.stratify_by_user {
        let mut by_user: BTreeMap<UserId, Vec<usize>> = BTreeMap::new();
        for (i, r) in dataset.ratings().iter().enumerate() {
            by_user.entry(r.user).or_default().push(i);
        }
        for records in by_user.values_mut() {
            records.shuffle(&mut rng);
            let n_train = (ratio * records.len() as f64).round() as usize;
            for &i in &records[..n_train] {
                assignment[i] = Partition::Train;
            }
        }
    } else {
        let mut order: Vec<usize> = (0..dataset.len()).collect();
        order.shuffle(&mut rng);
        let n_train = (ratio * dataset.len() as f64).round() as usize;
        for &i in &order[..n_train] {
            assignment[i] = Partition::Train;
        }
    }

    let mut out = apply_manifest(dataset, &assignment)?;
    out.ratio = ratio;
    out.seed = Some(seed);
    Ok(out)
}

/// Rebuilds a split from a stored per-record assignment.
pub fn apply_manifest(dataset: &RatingsDataset, assignment: &[Partition]) -> Result<TrainTestSplit> {
    if assignment.len() != dataset.len() {
        return Err(Error::InvalidArgument(format!(
            "manifest covers {} records but the dataset has {}",
            assignment.len(),
            dataset.len()
        )));
    }
    let empty_side = |side: &str| {
        Error::InvalidArgument(format!("split leaves the {side} partition empty"))
    };
    let train = dataset
        .subset(|i, _| assignment[i] == Partition::Train)
        .map_err(|e| match e {
            Error::EmptyDataset => empty_side("train"),
            e => e,
        })?;
    let test = dataset
        .subset(|i, _| assignment[i] == Partition::Test)
        .map_err(|e| match e {
            Error::EmptyDataset => empty_side("test"),
            e => e,
        })?;
    let ratio = train.len() as f64 / dataset.len() as f64;
    Ok(TrainTestSplit {
        train,
        test,
        ratio,
        seed: None,
        assignment: assignment.to_vec(),
    })
}

#[derive(Serialize, Deserialize)]
struct ManifestRow {
    record: usize,
    partition: Partition,
}

pub fn write_manifest(split: &TrainTestSplit, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (record, &partition) in split.assignment.iter().enumerate() {
        w.serialize(ManifestRow { record, partition })?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<Vec<Partition>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for (expected, row) in r.deserialize::<ManifestRow>().enumerate() {
        let row = row?;
        if row.record != expected {
            return Err(Error::malformed(
                path,
                expected + 2,
                format!("expected record {expected}, found {}", row.record),
            ));
        }
        out.push(row.partition);
    }
    Ok(out)
}
