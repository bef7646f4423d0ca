use serde::{Deserialize, Serialize};

use crate::dataset::{split, RatingsDataset};
use crate::error::{Error, Result};
use crate::recommend::{fit, precision_at_n, AlgoConfig, Algorithm};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub config: AlgoConfig,
    /// Validation precision; `None` if the point failed.
    pub precision: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneOutcome {
    pub best: AlgoConfig,
    pub trials: Vec<Trial>,
}

/// Grid search for the config with the highest precision@N on an inner
/// validation split of `train`. Ties keep the earliest grid point. Points
/// whose training diverges are skipped.
pub fn tune(
    train: &RatingsDataset,
    grid: &[AlgoConfig],
    validation_ratio: f64,
    seed: u64,
    relevance_threshold: Option<f64>,
) -> Result<TuneOutcome> {
    let Some(first) = grid.first() else {
        return Err(Error::InvalidArgument("empty tuning grid".into()));
    };
    if first.algorithm == Algorithm::MostPopular || grid.len() == 1 {
        return Ok(TuneOutcome {
            best: first.clone(),
            trials: Vec::new(),
        });
    }
    let inner = split(train, validation_ratio, seed)?;
    let mut trials = Vec::with_capacity(grid.len());
    let mut best: Option<(f64, usize)> = None;
    let mut last_divergence = None;
    for (k, config) in grid.iter().enumerate() {
        let outcome = fit(&inner.train, config)
            .and_then(|m| m.recommend_all(config.list_size))
            .and_then(|recs| precision_at_n(&recs, &inner.test, relevance_threshold));
        match outcome {
            Ok(report) => {
                log::info!("tune {:?}: precision {:.4}", config, report.mean);
                if best.is_none_or(|(p, _)| report.mean > p) {
                    best = Some((report.mean, k));
                }
                trials.push(Trial {
                    config: config.clone(),
                    precision: Some(report.mean),
                    error: None,
                });
            }
            Err(e @ Error::Diverged { .. }) => {
                log::warn!("tune: skipping diverging point: {e}");
                trials.push(Trial {
                    config: config.clone(),
                    precision: None,
                    error: Some(e.to_string()),
                });
                last_divergence = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    let Some((_, k)) = best else {
        return Err(last_divergence.expect("every failed point diverged"));
    };
    Ok(TuneOutcome {
        best: grid[k].clone(),
        trials,
    })
}
