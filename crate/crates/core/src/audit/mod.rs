//! Experiment orchestration: each stage persists its outputs under the
//! experiment's output directory, so stages can be rerun one at a time.
//!
//! ```text
//! out/
//!   split_manifest.csv     record index -> train/test
//!   tuned.json             grid search results (tune)
//!   models/<algo>.json
//!   recs/<algo>.csv        user_id,rank,item_id,score
//!   metrics/<algo>_users.csv, metrics/<algo>_scatter.csv
//!   cohorts.csv
//!   evaluation/*.json      per-algorithm results
//!   report.json, report.txt
//!   figures/<id>.csv
//! ```

mod config;
mod figures;
mod report;
mod tune;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cohorts::{group_by_gender, group_by_popularity, profile_scores, write_cohorts, CohortPartition};
use crate::dataset::{
    apply_manifest, core_filter, parse_demographics, parse_item_catalog, parse_ratings, read_manifest, split_with,
    write_manifest, Gender, ItemCatalog, RatingsDataset, SplitOptions, TrainTestSplit, UserDemographics, UserId,
};
use crate::error::{Error, Result};
use crate::metrics::{
    item_popularity, kl_miscalibration, profile_distribution, rated_vs_recommended, recommendation_distribution,
    user_metrics, GroupSummary, ItemExposure, UserMetricRow,
};
use crate::recommend::{
    fit, precision_at_n, read_recommendations, write_recommendations, AlgoConfig, TrainedModel,
};
use crate::stats::{pearson_correlation, spearman_correlation, t_test};

pub use config::{
    slug, AlgoSpec, DataConfig, EvaluationConfig, ExperimentConfig, FilterConfig, HyperGrid, SplitConfig,
    TuningConfig, CONFIG_SCHEMA_VERSION,
};
pub use figures::FIGURE_IDS;
pub use report::{AlgorithmReport, AuditReport, CohortRow, DatasetSummary, GroupInfo, REPORT_SCHEMA_VERSION};
pub use tune::{tune, Trial, TuneOutcome};

const FAILED_MARKER: &str = "FAILED";

/// Filtered dataset, its split and the side information.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub dataset: RatingsDataset,
    pub split: TrainTestSplit,
    pub catalog: ItemCatalog,
    /// `None` without a users file.
    pub demographics: Option<UserDemographics>,
    pub summary: DatasetSummary,
}

/// One row of `metrics/<algo>_users.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserMetricsRecord {
    pub user_id: UserId,
    pub group: String,
    pub profile_avg_pop: f64,
    pub rec_avg_pop: f64,
    pub miscalibration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct EvaluationContext {
    dataset: DatasetSummary,
    popularity_groups: Vec<GroupInfo>,
}

pub fn read_user_metrics(path: &Path) -> Result<Vec<UserMetricsRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn read_item_exposure(path: &Path) -> Result<Vec<ItemExposure>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, missing: &str) -> Result<T> {
    if !path.is_file() {
        return Err(Error::Config(format!("{} not found; {missing}", path.display())));
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn mkdir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Runs the stages of one experiment against its output directory.
pub struct Pipeline {
    config: ExperimentConfig,
    prepared: Option<PreparedData>,
    models: BTreeMap<String, TrainedModel>,
}

impl Pipeline {
    pub fn new(config: ExperimentConfig) -> Self {
        Pipeline {
            config,
            prepared: None,
            models: BTreeMap::new(),
        }
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn output_dir(&self) -> &Path {
        &self.config.output_dir
    }

    fn path(&self, parts: &[&str]) -> PathBuf {
        let mut p = self.config.output_dir.clone();
        p.extend(parts);
        p
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.path(&["split_manifest.csv"])
    }
    pub fn tuned_path(&self) -> PathBuf {
        self.path(&["tuned.json"])
    }
    pub fn model_path(&self, name: &str) -> PathBuf {
        self.path(&["models", &format!("{}.json", slug(name))])
    }
    pub fn recs_path(&self, name: &str) -> PathBuf {
        self.path(&["recs", &format!("{}.csv", slug(name))])
    }
    pub fn user_metrics_path(&self, name: &str) -> PathBuf {
        self.path(&["metrics", &format!("{}_users.csv", slug(name))])
    }
    pub fn scatter_path(&self, name: &str) -> PathBuf {
        self.path(&["metrics", &format!("{}_scatter.csv", slug(name))])
    }
    pub fn cohorts_path(&self) -> PathBuf {
        self.path(&["cohorts.csv"])
    }
    fn evaluation_path(&self, name: &str) -> PathBuf {
        self.path(&["evaluation", &format!("{}.json", slug(name))])
    }
    fn context_path(&self) -> PathBuf {
        self.path(&["evaluation", "context.json"])
    }
    pub fn report_path(&self) -> PathBuf {
        self.path(&["report.json"])
    }
    pub fn figure_path(&self, id: &str) -> PathBuf {
        self.path(&["figures", &format!("{id}.csv")])
    }

    /// Runs `f` as stage `stage`. A failure leaves a `FAILED` marker naming
    /// the stage in the output directory.
    fn stage<T>(&mut self, stage: &'static str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let marker = self.path(&[FAILED_MARKER]);
        let _ = fs::remove_file(&marker);
        log::info!("stage {stage}");
        let out = mkdir(&self.config.output_dir.clone()).and_then(|_| f(self));
        out.map_err(|e| {
            let _ = fs::write(&marker, format!("stage {stage} failed: {e}\n"));
            match e {
                e @ Error::Stage { .. } => e,
                e => Error::Stage {
                    stage,
                    source: Box::new(e),
                },
            }
        })
    }

    fn load_inputs(&self) -> Result<(RatingsDataset, usize, ItemCatalog, Option<UserDemographics>)> {
        let c = &self.config;
        c.check_inputs()?;
        let raw = parse_ratings(&c.data.ratings, &c.data.ratings_format)?;
        let raw_len = raw.len();
        let dataset = core_filter(&raw, c.filter.min_user_ratings, c.filter.min_item_ratings)?;
        let catalog = parse_item_catalog(&c.data.items, &c.data.catalog_format)?;
        let demographics = match &c.data.users {
            Some(p) => Some(parse_demographics(p)?.restricted_to(dataset.users())),
            None => None,
        };
        Ok((dataset, raw_len, catalog, demographics))
    }

    fn assemble(
        dataset: RatingsDataset,
        raw_ratings: usize,
        split: TrainTestSplit,
        catalog: ItemCatalog,
        demographics: Option<UserDemographics>,
    ) -> PreparedData {
        let mut warnings = Vec::new();
        let uncataloged = dataset.items().iter().filter(|i| !catalog.contains(**i)).count();
        if uncataloged > 0 {
            warnings.push(format!("{uncataloged} rated items are missing from the catalog"));
        }
        let (mut men, mut women) = (0, 0);
        if let Some(d) = &demographics {
            for g in d.gender.values() {
                match g {
                    Gender::Male => men += 1,
                    Gender::Female => women += 1,
                    Gender::Unknown => {}
                }
            }
            warnings.extend(d.warnings.iter().cloned());
        }
        let summary = DatasetSummary {
            fingerprint: dataset.fingerprint(),
            raw_ratings,
            ratings: dataset.len(),
            users: dataset.users().len(),
            items: dataset.items().len(),
            train_ratings: split.train.len(),
            test_ratings: split.test.len(),
            train_users: split.train.users().len(),
            train_items: split.train.items().len(),
            test_only_users: split.test_only_users().len(),
            genres: catalog.vocabulary().len(),
            uncataloged_items: uncataloged,
            men,
            women,
            warnings,
        };
        PreparedData {
            dataset,
            split,
            catalog,
            demographics,
            summary,
        }
    }

    /// Loads, filters and splits the data and writes the split manifest.
    pub fn prepare(&mut self) -> Result<&PreparedData> {
        self.stage("prepare", |p| {
            let (dataset, raw, catalog, demographics) = p.load_inputs()?;
            let s = p.config.split;
            let split = split_with(
                &dataset,
                s.ratio,
                s.seed,
                SplitOptions {
                    stratify_by_user: s.stratify_by_user,
                },
            )?;
            write_manifest(&split, &p.manifest_path())?;
            let prepared = Self::assemble(dataset, raw, split, catalog, demographics);
            log::info!(
                "prepared {} ratings ({} train / {} test), {} test-only users",
                prepared.summary.ratings,
                prepared.summary.train_ratings,
                prepared.summary.test_ratings,
                prepared.summary.test_only_users
            );
            p.prepared = Some(prepared);
            p.models.clear();
            Ok(())
        })?;
        Ok(self.prepared.as_ref().expect("just prepared"))
    }

    /// Prepared data, replayed from the split manifest if not in memory.
    pub fn prepared(&mut self) -> Result<&PreparedData> {
        if self.prepared.is_none() {
            let manifest = self.manifest_path();
            if !manifest.is_file() {
                return Err(Error::Config(format!(
                    "{} not found; run prepare first",
                    manifest.display()
                )));
            }
            let (dataset, raw, catalog, demographics) = self.load_inputs()?;
            let assignment = read_manifest(&manifest)?;
            let split = apply_manifest(&dataset, &assignment)?;
            self.prepared = Some(Self::assemble(dataset, raw, split, catalog, demographics));
        }
        Ok(self.prepared.as_ref().expect("loaded"))
    }

    /// Grid search for every algorithm with a grid; writes `tuned.json`.
    pub fn tune(&mut self) -> Result<BTreeMap<String, TuneOutcome>> {
        self.stage("tune", |p| {
            let t = p.config.tuning;
            let threshold = p.config.evaluation.relevance_threshold;
            let specs = p.config.algorithms.clone();
            let train = p.prepared()?.split.train.clone();
            let mut outcomes = BTreeMap::new();
            for spec in &specs {
                let Some(grid) = &spec.grid else { continue };
                let points = grid.expand(&spec.config);
                log::info!("tuning {} over {} points", spec.name, points.len());
                let outcome = tune(&train, &points, t.validation_ratio, t.seed, threshold)?;
                outcomes.insert(spec.name.clone(), outcome);
            }
            write_json(&p.tuned_path(), &outcomes)?;
            Ok(outcomes)
        })
    }

    /// Config used for training: the tuned one if tuning has run, with the
    /// seed and list size still taken from the experiment config.
    pub fn effective_configs(&self) -> Result<Vec<(String, AlgoConfig)>> {
        let tuned: BTreeMap<String, TuneOutcome> = if self.tuned_path().is_file() {
            read_json(&self.tuned_path(), "")?
        } else {
            BTreeMap::new()
        };
        Ok(self
            .config
            .algorithms
            .iter()
            .map(|spec| {
                let config = match tuned.get(&spec.name) {
                    Some(t) if t.best.algorithm == spec.config.algorithm => AlgoConfig {
                        seed: spec.config.seed,
                        list_size: spec.config.list_size,
                        ..t.best.clone()
                    },
                    _ => spec.config.clone(),
                };
                (spec.name.clone(), config)
            })
            .collect())
    }

    /// Fits every algorithm on the training split and saves the models.
    pub fn train(&mut self) -> Result<()> {
        self.stage("train", |p| {
            mkdir(&p.path(&["models"]))?;
            let configs = p.effective_configs()?;
            let train = p.prepared()?.split.train.clone();
            for (name, config) in configs {
                log::info!("training {name}");
                let model = fit(&train, &config)?;
                model.save(&p.model_path(&name))?;
                p.models.insert(name, model);
            }
            Ok(())
        })
    }

    fn model(&mut self, name: &str) -> Result<&TrainedModel> {
        if !self.models.contains_key(name) {
            let path = self.model_path(name);
            if !path.is_file() {
                return Err(Error::Config(format!("{} not found; run train first", path.display())));
            }
            let train = self.prepared()?.split.train.clone();
            let model = TrainedModel::load(&path, &train)?;
            self.models.insert(name.to_string(), model);
        }
        Ok(&self.models[name])
    }

    /// Writes a top-N list for every training user and algorithm.
    pub fn recommend(&mut self) -> Result<()> {
        self.stage("recommend", |p| {
            mkdir(&p.path(&["recs"]))?;
            let names: Vec<String> = p.config.algorithms.iter().map(|s| s.name.clone()).collect();
            let n = p.config.evaluation.list_size;
            for name in names {
                let recs = p.model(&name)?.recommend_all(n)?;
                let short = recs.short_lists().len();
                if short > 0 {
                    log::warn!("{name}: {short} users received fewer than {n} items");
                }
                write_recommendations(&recs, &p.recs_path(&name))?;
            }
            Ok(())
        })
    }

    /// Computes precision, per-user metrics, cohorts and tests from the
    /// persisted recommendation lists.
    pub fn evaluate(&mut self) -> Result<Vec<AlgorithmReport>> {
        self.stage("evaluate", |p| {
            mkdir(&p.path(&["metrics"]))?;
            mkdir(&p.path(&["evaluation"]))?;
            let configs = p.effective_configs()?;
            let mut fingerprints = Vec::new();
            for (name, _) in &configs {
                fingerprints.push(p.model(name)?.fingerprint());
            }
            let eval = p.config.evaluation;
            let prepared = p.prepared()?.clone();
            let train = &prepared.split.train;
            let popularity = item_popularity(train);
            let scores = profile_scores(train.users(), train, &popularity);
            let groups = group_by_popularity(&scores, eval.n_groups, eval.scheme)?;
            let gender = prepared.demographics.as_ref().map(|d| group_by_gender(&scores, d));
            let mut partitions = vec![&groups];
            partitions.extend(gender.as_ref());
            write_cohorts(&partitions, &p.cohorts_path())?;

            let total_grouped: usize = groups.cohorts.iter().map(|c| c.members.len()).sum();
            let context = EvaluationContext {
                dataset: prepared.summary.clone(),
                popularity_groups: groups
                    .cohorts
                    .iter()
                    .map(|c| GroupInfo {
                        label: c.label.clone(),
                        lower: c.bounds.map(|b| b.0),
                        upper: c.bounds.map(|b| b.1),
                        users: c.members.len(),
                        percentage: 100.0 * c.members.len() as f64 / total_grouped as f64,
                        mean_profile_popularity: c.mean_profile_popularity,
                    })
                    .collect(),
            };
            write_json(&p.context_path(), &context)?;

            let label_of: BTreeMap<UserId, &str> = groups
                .cohorts
                .iter()
                .flat_map(|c| c.members.iter().map(move |&u| (u, c.label.as_str())))
                .collect();

            let mut reports = Vec::new();
            for ((name, config), fingerprint) in configs.into_iter().zip(fingerprints) {
                let recs = read_recommendations(&p.recs_path(&name), eval.list_size, fingerprint.clone())?;
                let precision = precision_at_n(&recs, &prepared.split.test, eval.relevance_threshold)?;
                let metrics = user_metrics(train.users(), train, &recs, &prepared.catalog, &popularity);
                let ex = &metrics.exclusions;
                log::info!(
                    "{name}: precision {:.4}; excluded users: {} without profile, {} without list, {} empty profile distribution, {} empty list distribution; {} users without test items",
                    precision.mean,
                    ex.no_profile,
                    ex.no_recommendations,
                    ex.empty_profile_distribution,
                    ex.empty_recommendation_distribution,
                    precision.users_without_test
                );
                write_csv(
                    &p.user_metrics_path(&name),
                    metrics.rows.values().map(|r| UserMetricsRecord {
                        user_id: r.user,
                        group: label_of.get(&r.user).copied().unwrap_or("").to_string(),
                        profile_avg_pop: r.profile_avg_popularity,
                        rec_avg_pop: r.rec_avg_popularity,
                        miscalibration: r.miscalibration,
                    }),
                )?;
                write_csv(&p.scatter_path(&name), rated_vs_recommended(train, &recs))?;

                let kl: Vec<f64> = metrics
                    .rows
                    .keys()
                    .filter_map(|&u| {
                        let pd = profile_distribution(u, train, &prepared.catalog);
                        let qd = recommendation_distribution(u, &recs, &prepared.catalog);
                        kl_miscalibration(&pd, &qd, eval.kl_epsilon).ok()
                    })
                    .collect();

                let report = algorithm_report(AlgorithmInputs {
                    name: &name,
                    config,
                    fingerprint,
                    rows: &metrics.rows,
                    groups: &groups,
                    gender: gender.as_ref(),
                })
                .map(|mut r| {
                    r.precision = precision.mean;
                    r.precision_users = precision.per_user.len();
                    r.users_without_test = precision.users_without_test;
                    r.test_users_without_list = precision.test_users_without_list;
                    r.lists = recs.len();
                    r.short_lists = recs.short_lists().len();
                    r.recommendations = recs.total_recommendations();
                    r.exclusions = metrics.exclusions.clone();
                    r.mean_kl_miscalibration = mean(&kl);
                    r
                })?;
                write_json(&p.evaluation_path(&name), &report)?;
                reports.push(report);
            }
            Ok(reports)
        })
    }

    /// Assembles `report.json` and `report.txt` from the evaluation outputs.
    pub fn report(&mut self) -> Result<AuditReport> {
        self.stage("report", |p| {
            let context: EvaluationContext = read_json(&p.context_path(), "run evaluate first")?;
            let mut algorithms = Vec::new();
            for spec in &p.config.algorithms {
                algorithms.push(read_json::<AlgorithmReport>(&p.evaluation_path(&spec.name), "run evaluate first")?);
            }
            let mut warnings = Vec::new();
            let points: Vec<(f64, f64)> = algorithms
                .iter()
                .filter_map(|a| a.total.lift.map(|l| (l, a.total.miscalibration)))
                .collect();
            let correlation = if points.len() >= 3 {
                let (xs, ys): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
                match pearson_correlation(&xs, &ys) {
                    Ok(r) => Some(r),
                    Err(e) => {
                        warnings.push(format!("PL-MC correlation not computed: {e}"));
                        None
                    }
                }
            } else {
                warnings.push("PL-MC correlation needs at least 3 algorithms".into());
                None
            };
            let report = AuditReport {
                schema_version: REPORT_SCHEMA_VERSION,
                config: p.config.clone(),
                dataset: context.dataset,
                popularity_groups: context.popularity_groups,
                algorithms,
                lift_miscalibration_correlation: correlation,
                warnings,
            };
            write_json(&p.report_path(), &report)?;
            let txt = p.path(&["report.txt"]);
            fs::write(&txt, report.render_text()).map_err(|e| Error::io(&txt, e))?;
            Ok(report)
        })
    }

    pub fn load_report(&self) -> Result<AuditReport> {
        read_json(&self.report_path(), "run report first")
    }

    /// Writes `figures/<id>.csv` for one figure id.
    pub fn export_figure(&mut self, id: &str) -> Result<PathBuf> {
        if !FIGURE_IDS.contains(&id) {
            return Err(Error::UnknownFigure {
                given: id.to_string(),
                valid: FIGURE_IDS.join(", "),
            });
        }
        self.stage("export-fig", |p| {
            mkdir(&p.path(&["figures"]))?;
            let path = p.figure_path(id);
            figures::export(p, id, &path)?;
            Ok(path)
        })
    }

    /// prepare, tune (if enabled), train, recommend, evaluate and report.
    pub fn run(&mut self) -> Result<AuditReport> {
        self.prepare()?;
        if self.config.tuning.enabled {
            self.tune()?;
        } else {
            let _ = fs::remove_file(self.tuned_path());
        }
        self.train()?;
        self.recommend()?;
        self.evaluate()?;
        self.report()
    }
}

/// Runs the whole pipeline for `config`.
pub fn run_experiment(config: ExperimentConfig) -> Result<AuditReport> {
    Pipeline::new(config).run()
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

struct AlgorithmInputs<'a> {
    name: &'a str,
    config: AlgoConfig,
    fingerprint: String,
    rows: &'a BTreeMap<UserId, UserMetricRow>,
    groups: &'a CohortPartition,
    gender: Option<&'a CohortPartition>,
}

fn cohort_rows(partition: &CohortPartition, rows: &BTreeMap<UserId, UserMetricRow>) -> Vec<CohortRow> {
    partition
        .cohorts
        .iter()
        .map(|c| CohortRow {
            label: c.label.clone(),
            members: c.members.len(),
            summary: GroupSummary::of(&c.members, rows),
        })
        .collect()
}

type Extract = fn(&UserMetricRow) -> Option<f64>;

fn compare(
    partition: &CohortPartition,
    a: &str,
    b: &str,
    rows: &BTreeMap<UserId, UserMetricRow>,
    value: Extract,
    what: &str,
    warnings: &mut Vec<String>,
) -> Option<crate::stats::TestResult> {
    let sample = |label: &str| -> Vec<f64> {
        partition
            .get(label)
            .map(|c| c.members.iter().filter_map(|u| rows.get(u)).filter_map(value).collect())
            .unwrap_or_default()
    };
    match t_test(&sample(a), &sample(b)) {
        Ok(t) => Some(t),
        Err(e) => {
            warnings.push(format!("{what} {a} vs {b} not tested: {e}"));
            None
        }
    }
}

fn algorithm_report(input: AlgorithmInputs<'_>) -> Result<AlgorithmReport> {
    let rows = input.rows;
    let all = rows.keys().copied().collect();
    let total = GroupSummary::of(&all, rows).ok_or(Error::EmptyGroup)?;
    let mut warnings = Vec::new();
    if total.lift.is_none() {
        warnings.push("total popularity lift undefined".into());
    }
    let popularity_groups = cohort_rows(input.groups, rows);
    let first = input.groups.cohorts.first().map(|c| c.label.clone()).unwrap_or_default();
    let last = input.groups.cohorts.last().map(|c| c.label.clone()).unwrap_or_default();
    let lift: Extract = UserMetricRow::lift;
    let mc: Extract = |r| Some(r.miscalibration);
    let extreme_lift_test = compare(input.groups, &first, &last, rows, lift, "PL", &mut warnings);
    let extreme_miscalibration_test = compare(input.groups, &first, &last, rows, mc, "MC", &mut warnings);

    let (gender_groups, gender_lift_test, gender_miscalibration_test) = match input.gender {
        Some(g) => (
            cohort_rows(g, rows),
            compare(g, "women", "men", rows, lift, "PL", &mut warnings),
            compare(g, "women", "men", rows, mc, "MC", &mut warnings),
        ),
        None => (Vec::new(), None, None),
    };

    let trend: Vec<(f64, f64)> = popularity_groups
        .iter()
        .filter_map(|c| c.summary.as_ref())
        .filter_map(|s| s.lift.map(|l| (s.gap_p, l)))
        .collect();
    let group_trend = if trend.len() >= 3 {
        let (xs, ys): (Vec<f64>, Vec<f64>) = trend.into_iter().unzip();
        spearman_correlation(&xs, &ys).ok()
    } else {
        None
    };
    if group_trend.is_none() {
        warnings.push("group trend needs at least 3 groups with a defined lift".into());
    }

    Ok(AlgorithmReport {
        name: input.name.to_string(),
        config: input.config,
        model_fingerprint: input.fingerprint,
        precision: 0.0,
        precision_users: 0,
        users_without_test: 0,
        test_users_without_list: 0,
        lists: 0,
        short_lists: 0,
        recommendations: 0,
        total,
        mean_kl_miscalibration: None,
        exclusions: Default::default(),
        popularity_groups,
        gender_groups,
        extreme_lift_test,
        extreme_miscalibration_test,
        gender_lift_test,
        gender_miscalibration_test,
        group_trend,
        warnings,
    })
}
