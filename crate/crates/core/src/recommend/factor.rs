use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::AlgoConfig;
use crate::dataset::DatasetIndex;
use crate::error::{Error, Result};

/// Learned parameters of a biased factor model. Factor matrices are stored
/// row-major, `factors` values per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorParams {
    pub factors: usize,
    pub global_mean: f64,
    pub user_bias: Vec<f64>,
    pub item_bias: Vec<f64>,
    pub user_factors: Vec<f64>,
    pub item_factors: Vec<f64>,
    /// SVD++ implicit item factors; `None` for plain biased MF.
    pub implicit_factors: Option<Vec<f64>>,
}

fn row(m: &[f64], r: usize, f: usize) -> &[f64] {
    &m[r * f..(r + 1) * f]
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl FactorParams {
    /// `μ + b_u + b_i + q_i · (p_u + |N(u)|^-½ Σ_{j∈N(u)} y_j)`, dropping
    /// whichever terms belong to an unknown user or item.
    pub fn predict(&self, data: &DatasetIndex, user: Option<usize>, item: Option<usize>) -> f64 {
        let f = self.factors;
        let mut score = self.global_mean;
        if let Some(u) = user {
            score += self.user_bias[u];
        }
        if let Some(i) = item {
            score += self.item_bias[i];
        }
        if let (Some(u), Some(i)) = (user, item) {
            let q = row(&self.item_factors, i, f);
            let mut p = row(&self.user_factors, u, f).to_vec();
            if let Some(y) = &self.implicit_factors {
                add_implicit(&mut p, y, &data.by_user[u], f);
            }
            score += dot(&p, q);
        }
        score
    }

    fn zeroed(data: &DatasetIndex, factors: usize, implicit: bool) -> Self {
        FactorParams {
            factors,
            global_mean: data.global_mean,
            user_bias: vec![0.0; data.n_users()],
            item_bias: vec![0.0; data.n_items()],
            user_factors: vec![0.0; data.n_users() * factors],
            item_factors: vec![0.0; data.n_items() * factors],
            implicit_factors: implicit.then(|| vec![0.0; data.n_items() * factors]),
        }
    }

    fn randomize(&mut self, rng: &mut ChaCha8Rng, std: f64) {
        let normal = Normal::new(0.0, std).expect("positive std");
        for m in [&mut self.user_factors, &mut self.item_factors] {
            for x in m.iter_mut() {
                *x = normal.sample(rng);
            }
        }
        if let Some(y) = &mut self.implicit_factors {
            for x in y.iter_mut() {
                *x = normal.sample(rng);
            }
        }
    }

    /// Regularised squared error over the training ratings.
    pub fn objective(&self, data: &DatasetIndex, regularization: f64) -> f64 {
        let mut sse = 0.0;
        for (u, profile) in data.by_user.iter().enumerate() {
            for &(i, r) in profile {
                let e = r - self.predict(data, Some(u), Some(i));
                sse += e * e;
            }
        }
        let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        let mut penalty = sq(&self.user_bias) + sq(&self.item_bias) + sq(&self.user_factors) + sq(&self.item_factors);
        if let Some(y) = &self.implicit_factors {
            penalty += sq(y);
        }
        sse + regularization * penalty
    }

    pub fn rmse(&self, data: &DatasetIndex) -> f64 {
        let mut sse = 0.0;
        let mut n = 0usize;
        for (u, profile) in data.by_user.iter().enumerate() {
            for &(i, r) in profile {
                let e = r - self.predict(data, Some(u), Some(i));
                sse += e * e;
                n += 1;
            }
        }
        (sse / n as f64).sqrt()
    }
}

fn add_implicit(p: &mut [f64], y: &[f64], profile: &[(usize, f64)], f: usize) {
    if profile.is_empty() {
        return;
    }
    let norm = 1.0 / (profile.len() as f64).sqrt();
    for &(j, _) in profile {
        for (pk, yk) in p.iter_mut().zip(row(y, j, f)) {
            *pk += norm * yk;
        }
    }
}

fn check(objective: f64, epoch: usize, config: &AlgoConfig) -> Result<()> {
    if objective.is_finite() {
        Ok(())
    } else {
        Err(Error::Diverged {
            epoch,
            learning_rate: config.learning_rate,
        })
    }
}

/// Biased MF, `μ + b_u + b_i + p_u·q_i`, fitted by SGD over shuffled ratings.
pub(crate) fn fit_bmf(data: &DatasetIndex, config: &AlgoConfig) -> Result<(FactorParams, Vec<f64>)> {
    let f = config.factors;
    let (lr, reg) = (config.learning_rate, config.regularization);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut p = FactorParams::zeroed(data, f, false);
    p.randomize(&mut rng, config.init_std);

    let mut records: Vec<(usize, usize, f64)> = data
        .by_user
        .iter()
        .enumerate()
        .flat_map(|(u, prof)| prof.iter().map(move |&(i, r)| (u, i, r)))
        .collect();
    let mut curve = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        records.shuffle(&mut rng);
        for &(u, i, r) in &records {
            let pu = &p.user_factors[u * f..(u + 1) * f];
            let qi = &p.item_factors[i * f..(i + 1) * f];
            let e = r - (p.global_mean + p.user_bias[u] + p.item_bias[i] + dot(pu, qi));
            p.user_bias[u] += lr * (e - reg * p.user_bias[u]);
            p.item_bias[i] += lr * (e - reg * p.item_bias[i]);
            for k in 0..f {
                let pk = p.user_factors[u * f + k];
                let qk = p.item_factors[i * f + k];
                p.user_factors[u * f + k] += lr * (e * qk - reg * pk);
                p.item_factors[i * f + k] += lr * (e * pk - reg * qk);
            }
        }
        let obj = p.objective(data, reg);
        check(obj, epoch, config)?;
        curve.push(obj);
    }
    Ok((p, curve))
}

/// SVD++ fitted by SGD, one user at a time in shuffled order. The implicit
/// term is held fixed while a user's ratings are visited and the implicit
/// factors are updated once per user from the accumulated gradient.
pub(crate) fn fit_svdpp(data: &DatasetIndex, config: &AlgoConfig) -> Result<(FactorParams, Vec<f64>)> {
    let f = config.factors;
    let (lr, reg) = (config.learning_rate, config.regularization);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut p = FactorParams::zeroed(data, f, true);
    p.randomize(&mut rng, config.init_std);

    let mut users: Vec<usize> = (0..data.n_users()).collect();
    let mut curve = Vec::with_capacity(config.epochs);
    let mut implicit = vec![0.0; f];
    let mut grad = vec![0.0; f];

    for epoch in 1..=config.epochs {
        users.shuffle(&mut rng);
        for &u in &users {
            let profile = &data.by_user[u];
            if profile.is_empty() {
                continue;
            }
            let norm = 1.0 / (profile.len() as f64).sqrt();
            implicit.iter_mut().for_each(|x| *x = 0.0);
            add_implicit(&mut implicit, p.implicit_factors.as_ref().expect("svdpp"), profile, f);
            grad.iter_mut().for_each(|x| *x = 0.0);

            let mut order: Vec<usize> = (0..profile.len()).collect();
            order.shuffle(&mut rng);
            for idx in order {
                let (i, r) = profile[idx];
                let mut pred = p.global_mean + p.user_bias[u] + p.item_bias[i];
                for k in 0..f {
                    pred += p.item_factors[i * f + k] * (p.user_factors[u * f + k] + implicit[k]);
                }
                let e = r - pred;
                p.user_bias[u] += lr * (e - reg * p.user_bias[u]);
                p.item_bias[i] += lr * (e - reg * p.item_bias[i]);
                for k in 0..f {
                    let pk = p.user_factors[u * f + k];
                    let qk = p.item_factors[i * f + k];
                    p.user_factors[u * f + k] += lr * (e * qk - reg * pk);
                    p.item_factors[i * f + k] += lr * (e * (pk + implicit[k]) - reg * qk);
                    grad[k] += e * qk;
                }
            }

            let y = p.implicit_factors.as_mut().expect("svdpp");
            for &(j, _) in profile {
                for k in 0..f {
                    let yk = y[j * f + k];
                    y[j * f + k] += lr * (norm * grad[k] - reg * yk);
                }
            }
        }
        let obj = p.objective(data, reg);
        check(obj, epoch, config)?;
        curve.push(obj);
    }
    Ok((p, curve))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Rating, RatingScale, RatingsDataset};
    use crate::recommend::Algorithm;

    fn fixture() -> RatingsDataset {
        let values = [[5.0, 3.0, 1.0], [4.0, 1.0, 2.0], [1.0, 2.0, 5.0]];
        let mut ratings = Vec::new();
        for (u, row) in values.iter().enumerate() {
            for (i, &value) in row.iter().enumerate() {
                ratings.push(Rating {
                    user: u as u64,
                    item: i as u64,
                    value,
                    timestamp: None,
                });
            }
        }
        RatingsDataset::new(ratings, RatingScale::MOVIELENS).unwrap()
    }

    #[test]
    fn zero_parameters_predict_global_mean() {
        let ds = fixture();
        let data = ds.index();
        let p = FactorParams::zeroed(data, 4, false);
        assert_eq!(p.predict(data, Some(0), Some(2)), data.global_mean);
        let p = FactorParams::zeroed(data, 4, true);
        assert_eq!(p.predict(data, Some(1), Some(1)), data.global_mean);
    }

    #[test]
    fn bmf_rmse_decreases_monotonically_after_warmup() {
        let ds = fixture();
        let data = ds.index();
        let mut config = AlgoConfig::new(Algorithm::Bmf);
        config.factors = 2;
        config.epochs = 1;
        config.learning_rate = 0.01;
        config.regularization = 0.01;
        // Refit with growing epoch counts: same seed, so each run extends the previous one.
        let mut rmse = Vec::new();
        for epochs in 1..=200 {
            config.epochs = epochs;
            let (p, _) = fit_bmf(data, &config).unwrap();
            rmse.push(p.rmse(data));
        }
        for w in rmse[4..].windows(2) {
            assert!(w[1] <= w[0], "rmse rose from {} to {}", w[0], w[1]);
        }
        assert!(rmse[199] < rmse[0]);
    }

    #[test]
    fn objectives_decrease_over_first_epochs() {
        let ds = fixture();
        for algorithm in [Algorithm::Bmf, Algorithm::SvdPlusPlus] {
            let mut config = AlgoConfig::new(algorithm);
            config.factors = 3;
            config.epochs = 10;
            let (_, curve) = match algorithm {
                Algorithm::Bmf => fit_bmf(ds.index(), &config).unwrap(),
                _ => fit_svdpp(ds.index(), &config).unwrap(),
            };
            for w in curve.windows(2) {
                assert!(w[1] <= w[0], "{algorithm}: {curve:?}");
            }
        }
    }

    #[test]
    fn same_seed_same_factors() {
        let ds = fixture();
        let config = AlgoConfig::new(Algorithm::SvdPlusPlus);
        let (a, _) = fit_svdpp(ds.index(), &config).unwrap();
        let (b, _) = fit_svdpp(ds.index(), &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn huge_learning_rate_diverges() {
        let ds = fixture();
        let mut config = AlgoConfig::new(Algorithm::Bmf);
        config.learning_rate = 50.0;
        config.epochs = 50;
        match fit_bmf(ds.index(), &config) {
            Err(Error::Diverged { learning_rate, .. }) => assert_eq!(learning_rate, 50.0),
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
