//! Welch's t-test and rank/linear correlation.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Significance levels reported on every test.
pub const SIGNIFICANCE_LEVELS: [f64; 2] = [0.05, 0.01];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    /// Two-sided.
    pub p_value: f64,
    pub dof: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    /// Levels from [`SIGNIFICANCE_LEVELS`] with `p < level`.
    pub significant_at: Vec<f64>,
    /// Both samples had zero variance; the statistic is a convention.
    pub degenerate: bool,
}

impl TestResult {
    pub fn significant(&self, level: f64) -> bool {
        self.p_value < level
    }
}

/// Mean and unbiased variance, summed in sorted order so the result does
/// not depend on input order.
fn moments(sample: &[f64]) -> (f64, f64) {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mean = s.iter().sum::<f64>() / n;
    let var = s.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Two-sample two-sided Welch t-test with Welch–Satterthwaite degrees of freedom.
pub fn t_test(a: &[f64], b: &[f64]) -> Result<TestResult> {
    for s in [a, b] {
        if s.len() < 2 {
            return Err(Error::SampleTooSmall(s.len()));
        }
        if s.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("samples must be finite".into()));
        }
    }
    let (mean_a, var_a) = moments(a);
    let (mean_b, var_b) = moments(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let se_a = var_a / na;
    let se_b = var_b / nb;
    let se = se_a + se_b;

    let (statistic, p_value, dof, degenerate) = if se == 0.0 {
        let dof = na + nb - 2.0;
        if mean_a == mean_b {
            (0.0, 1.0, dof, true)
        } else {
            let t = if mean_a > mean_b { f64::INFINITY } else { f64::NEG_INFINITY };
            (t, 0.0, dof, true)
        }
    } else {
        let t = (mean_a - mean_b) / se.sqrt();
        let dof = se * se / (se_a * se_a / (na - 1.0) + se_b * se_b / (nb - 1.0));
        let dist = StudentsT::new(0.0, 1.0, dof).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let p = (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0);
        (t, p, dof, false)
    };
    Ok(TestResult {
        statistic,
        p_value,
        dof,
        n_a: a.len(),
        n_b: b.len(),
        mean_a,
        mean_b,
        significant_at: SIGNIFICANCE_LEVELS
            .iter()
            .copied()
            .filter(|&l| p_value < l)
            .collect(),
        degenerate,
    })
}

fn check_pair(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidArgument(format!(
            "samples differ in length: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::SampleTooSmall(xs.len()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("samples must be finite".into()));
    }
    Ok(())
}

pub fn pearson_correlation(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_pair(xs, ys)?;
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the average of their ranks.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

pub fn spearman_correlation(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_pair(xs, ys)?;
    pearson_correlation(&average_ranks(xs), &average_ranks(ys))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let r = t_test(&a, &a).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(r.significant_at.is_empty());
    }

    #[test]
    fn shuffled_inputs_give_identical_results() {
        let a = [0.3, 1.7, 2.2, 9.1, 4.4];
        let b = [5.0, 0.1, 7.7, 3.3];
        let a2 = [9.1, 0.3, 4.4, 2.2, 1.7];
        let b2 = [3.3, 7.7, 5.0, 0.1];
        assert_eq!(t_test(&a, &b).unwrap(), t_test(&a2, &b2).unwrap());
    }

    #[test]
    fn degenerate_and_small_samples() {
        let r = t_test(&[2.0, 2.0], &[2.0, 2.0, 2.0]).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.p_value, 1.0);
        let r = t_test(&[1.0, 1.0], &[2.0, 2.0]).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.p_value, 0.0);
        assert!(matches!(t_test(&[1.0], &[1.0, 2.0]), Err(Error::SampleTooSmall(1))));
    }

    #[test]
    fn perfect_correlations() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        let up: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let down: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((pearson_correlation(&xs, &up).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson_correlation(&xs, &down).unwrap() + 1.0).abs() < 1e-12);
        let curved: Vec<f64> = xs.iter().map(|x| x * x * x).collect();
        assert_eq!(spearman_correlation(&xs, &curved).unwrap(), 1.0);
        let rev: Vec<f64> = xs.iter().map(|x| (-x).exp()).collect();
        assert_eq!(spearman_correlation(&xs, &rev).unwrap(), -1.0);
        assert!(matches!(pearson_correlation(&xs, &[1.0; 5]), Err(Error::ZeroVariance)));
    }

    #[test]
    fn tied_ranks_are_averaged() {
        assert_eq!(average_ranks(&[10.0, 20.0, 20.0, 5.0]), vec![2.0, 3.5, 3.5, 1.0]);
    }
}
