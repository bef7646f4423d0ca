use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::metrics::{Exclusions, GroupSummary};
use crate::recommend::AlgoConfig;
use crate::stats::TestResult;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub fingerprint: String,
    pub raw_ratings: usize,
    pub ratings: usize,
    pub users: usize,
    pub items: usize,
    pub train_ratings: usize,
    pub test_ratings: usize,
    pub train_users: usize,
    pub train_items: usize,
    /// Test users without training ratings; they get no list.
    pub test_only_users: usize,
    pub genres: usize,
    /// Rated items missing from the catalog.
    pub uncataloged_items: usize,
    pub men: usize,
    pub women: usize,
    pub warnings: Vec<String>,
}

/// One popularity group, independent of the algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupInfo {
    pub label: String,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub users: usize,
    /// Share of grouped users, in percent.
    pub percentage: f64,
    pub mean_profile_popularity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortRow {
    pub label: String,
    /// Cohort members, including those excluded from the metrics.
    pub members: usize,
    pub summary: Option<GroupSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmReport {
    pub name: String,
    pub config: AlgoConfig,
    pub model_fingerprint: String,
    pub precision: f64,
    /// Users averaged into precision (those with relevant test ratings).
    pub precision_users: usize,
    pub users_without_test: usize,
    pub test_users_without_list: usize,
    pub lists: usize,
    pub short_lists: usize,
    pub recommendations: usize,
    /// All evaluated users as a single group.
    pub total: GroupSummary,
    pub mean_kl_miscalibration: Option<f64>,
    pub exclusions: Exclusions,
    pub popularity_groups: Vec<CohortRow>,
    pub gender_groups: Vec<CohortRow>,
    /// Per-user lift, lowest vs highest popularity group.
    pub extreme_lift_test: Option<TestResult>,
    pub extreme_miscalibration_test: Option<TestResult>,
    /// Per-user lift, women vs men.
    pub gender_lift_test: Option<TestResult>,
    pub gender_miscalibration_test: Option<TestResult>,
    /// Spearman correlation of group mean profile popularity and group lift.
    pub group_trend: Option<f64>,
    pub warnings: Vec<String>,
}

impl AlgorithmReport {
    pub fn popularity_group(&self, label: &str) -> Option<&GroupSummary> {
        self.popularity_groups
            .iter()
            .find(|c| c.label == label)
            .and_then(|c| c.summary.as_ref())
    }

    pub fn gender_group(&self, label: &str) -> Option<&GroupSummary> {
        self.gender_groups
            .iter()
            .find(|c| c.label == label)
            .and_then(|c| c.summary.as_ref())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub dataset: DatasetSummary,
    pub popularity_groups: Vec<GroupInfo>,
    pub algorithms: Vec<AlgorithmReport>,
    /// Pearson correlation of total lift and total miscalibration across algorithms.
    pub lift_miscalibration_correlation: Option<f64>,
    pub warnings: Vec<String>,
}

impl AuditReport {
    pub fn algorithm(&self, name: &str) -> Option<&AlgorithmReport> {
        self.algorithms.iter().find(|a| a.name.eq_ignore_ascii_case(name))
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let d = &self.dataset;
        let _ = writeln!(
            s,
            "dataset: {} ratings ({} before filtering), {} users, {} items, {} genres",
            d.ratings, d.raw_ratings, d.users, d.items, d.genres
        );
        let _ = writeln!(
            s,
            "split: {} train / {} test ratings, {} test-only users; gender: {} men, {} women",
            d.train_ratings, d.test_ratings, d.test_only_users, d.men, d.women
        );
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<14} {:>10} {:>10} {:>10} {:>9}", "algorithm", "precision", "total PL", "total MC", "excluded");
        for a in &self.algorithms {
            let _ = writeln!(
                s,
                "{:<14} {:>10.4} {:>10} {:>10.4} {:>9}",
                a.name,
                a.precision,
                opt(a.total.lift),
                a.total.miscalibration,
                a.exclusions.total()
            );
        }
        if let Some(r) = self.lift_miscalibration_correlation {
            let _ = writeln!(s, "PL-MC correlation across algorithms: {r:.4}");
        }

        let _ = writeln!(s);
        let _ = writeln!(s, "popularity groups");
        for g in &self.popularity_groups {
            let _ = writeln!(
                s,
                "  {:<4} [{}, {}] users {:>6} ({:.1}%) mean popularity {}",
                g.label,
                opt(g.lower),
                opt(g.upper),
                g.users,
                g.percentage,
                opt(g.mean_profile_popularity)
            );
        }

        for a in &self.algorithms {
            let _ = writeln!(s);
            let _ = writeln!(s, "{}", a.name);
            let _ = writeln!(s, "  {:<6} {:>6} {:>8} {:>8} {:>9} {:>7}", "group", "n", "GAP_p", "GAP_q", "PL", "MC");
            for c in a.popularity_groups.iter().chain(&a.gender_groups) {
                match &c.summary {
                    Some(g) => {
                        let _ = writeln!(
                            s,
                            "  {:<6} {:>6} {:>8.4} {:>8.4} {:>9} {:>7.4}",
                            c.label,
                            g.size,
                            g.gap_p,
                            g.gap_q,
                            opt(g.lift),
                            g.miscalibration
                        );
                    }
                    None => {
                        let _ = writeln!(s, "  {:<6} {:>6} (no evaluated users)", c.label, 0);
                    }
                }
            }
            for (what, t) in [
                ("PL first vs last group", &a.extreme_lift_test),
                ("MC first vs last group", &a.extreme_miscalibration_test),
                ("PL women vs men", &a.gender_lift_test),
                ("MC women vs men", &a.gender_miscalibration_test),
            ] {
                match t {
                    Some(t) => {
                        let _ = writeln!(s, "  {what}: t = {:.3}, p = {:.3e}", t.statistic, t.p_value);
                    }
                    None => {
                        let _ = writeln!(s, "  {what}: not computed");
                    }
                }
            }
            let _ = writeln!(s, "  group trend (Spearman): {}", opt(a.group_trend));
            for w in &a.warnings {
                let _ = writeln!(s, "  warning: {w}");
            }
        }
        for w in self.dataset.warnings.iter().chain(&self.warnings) {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"))
}
