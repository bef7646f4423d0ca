//! Long-format CSV data behind each figure. Figures 2 and 3 describe the
//! training split; 4 and 5 are the same rated-vs-recommended scatter (one per
//! dataset in the original layout).

use std::path::Path;

use serde::Serialize;

use super::{read_item_exposure, write_csv, Pipeline};
use crate::dataset::{ItemId, UserId};
use crate::error::Result;
use crate::metrics::{item_popularity, profile_avg_popularity};

pub const FIGURE_IDS: [&str; 8] = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9"];

#[derive(Serialize)]
struct LongTailRow {
    rank: usize,
    item_id: ItemId,
    times_rated: usize,
    popularity: f64,
    cumulative_share: f64,
}

#[derive(Serialize)]
struct ProfileRow {
    rank: usize,
    user_id: UserId,
    profile_avg_popularity: f64,
}

#[derive(Serialize)]
struct ScatterRow {
    algorithm: String,
    item_id: ItemId,
    times_rated: usize,
    times_recommended: usize,
    mean_rating: f64,
}

#[derive(Serialize)]
struct GroupShareRow {
    group: String,
    lower: Option<f64>,
    upper: Option<f64>,
    mean_profile_popularity: Option<f64>,
    users: usize,
    percentage: f64,
}

#[derive(Serialize)]
struct TotalLiftRow {
    algorithm: String,
    total_popularity_lift: Option<f64>,
}

#[derive(Serialize)]
struct GroupLiftRow {
    algorithm: String,
    group: String,
    mean_popularity: f64,
    popularity_lift: Option<f64>,
}

#[derive(Serialize)]
struct LiftMiscalibrationRow {
    algorithm: String,
    total_popularity_lift: Option<f64>,
    total_miscalibration: f64,
}

pub(super) fn export(p: &mut Pipeline, id: &str, path: &Path) -> Result<()> {
    match id {
        "fig2" => {
            let train = &p.prepared()?.split.train;
            let idx = train.index();
            let mut items: Vec<(ItemId, usize)> = idx
                .item_ids
                .iter()
                .zip(&idx.by_item)
                .map(|(&i, r)| (i, r.len()))
                .collect();
            items.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
            let total = train.len() as f64;
            let n_users = idx.n_users() as f64;
            let mut cumulative = 0usize;
            write_csv(
                path,
                items.into_iter().enumerate().map(|(k, (item_id, times_rated))| {
                    cumulative += times_rated;
                    LongTailRow {
                        rank: k + 1,
                        item_id,
                        times_rated,
                        popularity: times_rated as f64 / n_users,
                        cumulative_share: cumulative as f64 / total,
                    }
                }),
            )
        }
        "fig3" => {
            let train = &p.prepared()?.split.train;
            let pop = item_popularity(train);
            let mut users: Vec<(f64, UserId)> = train
                .users()
                .iter()
                .map(|&u| profile_avg_popularity(u, train, &pop).map(|s| (s, u)))
                .collect::<Result<_>>()?;
            users.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            write_csv(
                path,
                users.into_iter().enumerate().map(|(k, (s, user_id))| ProfileRow {
                    rank: k + 1,
                    user_id,
                    profile_avg_popularity: s,
                }),
            )
        }
        "fig4" | "fig5" => {
            let mut rows = Vec::new();
            for spec in &p.config.algorithms {
                for e in read_item_exposure(&p.scatter_path(&spec.name))? {
                    rows.push(ScatterRow {
                        algorithm: spec.name.clone(),
                        item_id: e.item_id,
                        times_rated: e.times_rated,
                        times_recommended: e.times_recommended,
                        mean_rating: e.mean_rating,
                    });
                }
            }
            write_csv(path, rows)
        }
        _ => {
            let report = p.load_report()?;
            match id {
                "fig6" => write_csv(
                    path,
                    report.popularity_groups.iter().map(|g| GroupShareRow {
                        group: g.label.clone(),
                        lower: g.lower,
                        upper: g.upper,
                        mean_profile_popularity: g.mean_profile_popularity,
                        users: g.users,
                        percentage: g.percentage,
                    }),
                ),
                "fig7" => write_csv(
                    path,
                    report.algorithms.iter().map(|a| TotalLiftRow {
                        algorithm: a.name.clone(),
                        total_popularity_lift: a.total.lift,
                    }),
                ),
                "fig8" => write_csv(
                    path,
                    report.algorithms.iter().flat_map(|a| {
                        a.popularity_groups.iter().filter_map(move |c| {
                            c.summary.as_ref().map(|s| GroupLiftRow {
                                algorithm: a.name.clone(),
                                group: c.label.clone(),
                                mean_popularity: s.gap_p,
                                popularity_lift: s.lift,
                            })
                        })
                    }),
                ),
                _ => write_csv(
                    path,
                    report.algorithms.iter().map(|a| LiftMiscalibrationRow {
                        algorithm: a.name.clone(),
                        total_popularity_lift: a.total.lift,
                        total_miscalibration: a.total.miscalibration,
                    }),
                ),
            }
        }
    }
}
