//! Python bindings: `import popaudit`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use popaudit_core::audit::{run_experiment as run, ExperimentConfig};
use popaudit_core::cohorts::{group_by_popularity as group, GroupingScheme};
use popaudit_core::dataset::{
    core_filter as filter, parse_item_catalog, parse_ratings, split as split_data, CatalogFormat, Rating, RatingScale,
    RatingsFormat,
};
use popaudit_core::metrics::{self, CategoricalDistribution};
use popaudit_core::recommend::{self, AlgoConfig, Algorithm};
use popaudit_core::{stats, Error, ErrorClass};
use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyFloat, PyInt, PyString};

create_exception!(popaudit, DataError, PyException);

fn py_err(e: Error) -> PyErr {
    match e.class() {
        ErrorClass::Usage => PyValueError::new_err(e.to_string()),
        ErrorClass::Numerical => PyArithmeticError::new_err(e.to_string()),
        ErrorClass::Data => DataError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for Result<T, Error> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

/// Ratings as (user, item, value) triples.
#[pyclass(name = "RatingsDataset", module = "popaudit", frozen)]
struct PyDataset(popaudit_core::dataset::RatingsDataset);

#[pymethods]
impl PyDataset {
    #[new]
    #[pyo3(signature = (ratings, min_rating = 1.0, max_rating = 5.0))]
    fn new(ratings: Vec<(u64, u64, f64)>, min_rating: f64, max_rating: f64) -> PyResult<Self> {
        let scale = RatingScale::new(min_rating, max_rating).py()?;
        let ratings = ratings
            .into_iter()
            .map(|(user, item, value)| Rating {
                user,
                item,
                value,
                timestamp: None,
            })
            .collect();
        Ok(PyDataset(popaudit_core::dataset::RatingsDataset::new(ratings, scale).py()?))
    }

    /// Reads a MovieLens 1M `ratings.dat`.
    #[staticmethod]
    fn from_movielens(path: PathBuf) -> PyResult<Self> {
        Ok(PyDataset(parse_ratings(&path, &RatingsFormat::MovieLens1M).py()?))
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "RatingsDataset({} ratings, {} users, {} items)",
            self.0.len(),
            self.0.users().len(),
            self.0.items().len()
        )
    }

    fn users(&self) -> Vec<u64> {
        self.0.users().iter().copied().collect()
    }

    fn items(&self) -> Vec<u64> {
        self.0.items().iter().copied().collect()
    }

    fn ratings(&self) -> Vec<(u64, u64, f64)> {
        self.0.ratings().iter().map(|r| (r.user, r.item, r.value)).collect()
    }

    fn fingerprint(&self) -> String {
        self.0.fingerprint()
    }

    fn core_filter(&self, min_user_ratings: usize, min_item_ratings: usize) -> PyResult<Self> {
        Ok(PyDataset(filter(&self.0, min_user_ratings, min_item_ratings).py()?))
    }

    /// Random record-level split into (train, test).
    #[pyo3(signature = (ratio = 0.8, seed = 42))]
    fn split(&self, ratio: f64, seed: u64) -> PyResult<(Self, Self)> {
        let s = split_data(&self.0, ratio, seed).py()?;
        Ok((PyDataset(s.train), PyDataset(s.test)))
    }

    /// Share of users who rated each item.
    fn item_popularity(&self) -> BTreeMap<u64, f64> {
        metrics::item_popularity(&self.0).iter().collect()
    }

    /// Mean item popularity of each user's profile.
    fn profile_popularity(&self) -> BTreeMap<u64, f64> {
        let pop = metrics::item_popularity(&self.0);
        popaudit_core::cohorts::profile_scores(self.0.users(), &self.0, &pop)
    }
}

#[pyclass(name = "ItemCatalog", module = "popaudit", frozen)]
struct PyCatalog(popaudit_core::dataset::ItemCatalog);

#[pymethods]
impl PyCatalog {
    #[new]
    fn new(genres: BTreeMap<u64, Vec<String>>) -> PyResult<Self> {
        Ok(PyCatalog(popaudit_core::dataset::ItemCatalog::new(genres).py()?))
    }

    /// Reads a MovieLens 1M `movies.dat`.
    #[staticmethod]
    fn from_movielens(path: PathBuf) -> PyResult<Self> {
        Ok(PyCatalog(parse_item_catalog(&path, &CatalogFormat::MovieLens1M).py()?))
    }

    fn vocabulary(&self) -> Vec<String> {
        self.0.vocabulary().to_vec()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

fn config_from(algorithm: &str, kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<AlgoConfig> {
    let algorithm: Algorithm = algorithm.parse().py()?;
    let mut value = serde_json::to_value(AlgoConfig::new(algorithm)).map_err(|e| PyValueError::new_err(e.to_string()))?;
    if let Some(kwargs) = kwargs {
        for (k, v) in kwargs.iter() {
            let key: String = k.extract()?;
            let json = if v.is_instance_of::<PyString>() {
                serde_json::Value::from(v.extract::<String>()?)
            } else if v.is_instance_of::<PyInt>() {
                serde_json::Value::from(v.extract::<u64>()?)
            } else if v.is_instance_of::<PyFloat>() {
                serde_json::Value::from(v.extract::<f64>()?)
            } else {
                return Err(PyValueError::new_err(format!("unsupported value for '{key}'")));
            };
            value[key] = json;
        }
    }
    let config: AlgoConfig = serde_json::from_value(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    config.validate().py()?;
    Ok(config)
}

/// A fitted recommender.
#[pyclass(name = "Model", module = "popaudit", frozen)]
struct PyModel(recommend::TrainedModel);

#[pymethods]
impl PyModel {
    /// `Model.fit(train, "item-knn", neighborhood_size=50, ...)`
    #[staticmethod]
    #[pyo3(signature = (train, algorithm, **kwargs))]
    fn fit(py: Python<'_>, train: &PyDataset, algorithm: &str, kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let config = config_from(algorithm, kwargs)?;
        let data = train.0.clone();
        let model = py.detach(move || recommend::fit(&data, &config)).py()?;
        Ok(PyModel(model))
    }

    #[getter]
    fn algorithm(&self) -> String {
        self.0.algorithm().to_string()
    }

    fn fingerprint(&self) -> String {
        self.0.fingerprint()
    }

    fn loss_curve(&self) -> Vec<f64> {
        self.0.loss_curve().to_vec()
    }

    fn score(&self, user: u64, item: u64) -> f64 {
        self.0.score(user, item)
    }

    /// Top-n (item, score) pairs, excluding the user's training items.
    #[pyo3(signature = (user, n = 10))]
    fn recommend(&self, user: u64, n: usize) -> PyResult<Vec<(u64, f64)>> {
        let top = self.0.recommend_top_n(user, n).py()?;
        Ok(top.items.iter().map(|r| (r.item, r.score)).collect())
    }

    #[pyo3(signature = (n = 10))]
    fn recommend_all(&self, py: Python<'_>, n: usize) -> PyResult<PyRecommendations> {
        Ok(PyRecommendations(py.detach(|| self.0.recommend_all(n)).py()?))
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.0.save(&path).py()
    }

    #[staticmethod]
    fn load(path: PathBuf, train: &PyDataset) -> PyResult<Self> {
        Ok(PyModel(recommend::TrainedModel::load(&path, &train.0).py()?))
    }
}

#[pyclass(name = "RecommendationSet", module = "popaudit", frozen)]
struct PyRecommendations(recommend::RecommendationSet);

#[pymethods]
impl PyRecommendations {
    #[getter]
    fn n(&self) -> usize {
        self.0.n
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn lists(&self) -> BTreeMap<u64, Vec<u64>> {
        self.0
            .iter()
            .map(|(u, l)| (u, l.iter().map(|r| r.item).collect()))
            .collect()
    }

    /// Mean precision@N over users with relevant test ratings.
    #[pyo3(signature = (test, threshold = None))]
    fn precision(&self, test: &PyDataset, threshold: Option<f64>) -> PyResult<f64> {
        Ok(recommend::precision_at_n(&self.0, &test.0, threshold).py()?.mean)
    }

    /// Per-user profile popularity, list popularity and miscalibration.
    fn user_metrics(
        &self,
        py: Python<'_>,
        train: &PyDataset,
        catalog: &PyCatalog,
    ) -> PyResult<BTreeMap<u64, (f64, f64, f64)>> {
        let m = py.detach(|| {
            let pop = metrics::item_popularity(&train.0);
            metrics::user_metrics(train.0.users(), &train.0, &self.0, &catalog.0, &pop)
        });
        Ok(m.rows
            .values()
            .map(|r| (r.user, (r.profile_avg_popularity, r.rec_avg_popularity, r.miscalibration)))
            .collect())
    }

    fn write_csv(&self, path: PathBuf) -> PyResult<()> {
        recommend::write_recommendations(&self.0, &path).py()
    }
}

fn distribution(mass: Vec<f64>) -> PyResult<CategoricalDistribution> {
    CategoricalDistribution::from_weights(mass).py()
}

/// Hellinger distance between two distributions (weights are normalized).
#[pyfunction]
fn hellinger(p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    metrics::hellinger(&distribution(p)?, &distribution(q)?).py()
}

#[pyfunction]
fn popularity_lift(gap_p: f64, gap_q: f64) -> PyResult<f64> {
    metrics::popularity_lift(gap_p, gap_q).py()
}

/// Welch's t-test: (t, p, dof).
#[pyfunction]
fn t_test(a: Vec<f64>, b: Vec<f64>) -> PyResult<(f64, f64, f64)> {
    let r = stats::t_test(&a, &b).py()?;
    Ok((r.statistic, r.p_value, r.dof))
}

#[pyfunction]
fn pearson(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    stats::pearson_correlation(&x, &y).py()
}

#[pyfunction]
fn spearman(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    stats::spearman_correlation(&x, &y).py()
}

/// Groups users by score into G1..Gn.
#[pyfunction]
#[pyo3(signature = (scores, n_groups = 10, scheme = "equal-width"))]
fn group_by_popularity(
    scores: BTreeMap<u64, f64>,
    n_groups: usize,
    scheme: &str,
) -> PyResult<BTreeMap<String, Vec<u64>>> {
    let scheme: GroupingScheme = scheme.parse().py()?;
    let p = group(&scores, n_groups, scheme).py()?;
    Ok(p.cohorts
        .into_iter()
        .map(|c| (c.label, c.members.into_iter().collect()))
        .collect())
}

/// Runs every stage for a TOML config and returns the report as JSON.
#[pyfunction]
fn run_experiment(py: Python<'_>, config_path: PathBuf) -> PyResult<String> {
    let report = py.detach(|| ExperimentConfig::load(&config_path).and_then(run)).py()?;
    serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn popaudit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DataError", m.py().get_type::<DataError>())?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyCatalog>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyRecommendations>()?;
    m.add_function(wrap_pyfunction!(hellinger, m)?)?;
    m.add_function(wrap_pyfunction!(popularity_lift, m)?)?;
    m.add_function(wrap_pyfunction!(t_test, m)?)?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add_function(wrap_pyfunction!(spearman, m)?)?;
    m.add_function(wrap_pyfunction!(group_by_popularity, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
