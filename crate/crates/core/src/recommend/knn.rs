use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Aggregation, AlgoConfig, Similarity};
use crate::dataset::DatasetIndex;

/// Top-k neighbour lists, one per user (UserKNN) or item (ItemKNN), each
/// sorted by descending similarity then ascending position. Only positive
/// similarities are kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbors {
    pub lists: Vec<Vec<(usize, f64)>>,
}

impl Neighbors {
    /// For each target, the owners whose lists contain it.
    pub(crate) fn reversed(&self, n: usize) -> Vec<Vec<(usize, f64)>> {
        let mut rev = vec![Vec::new(); n];
        for (owner, list) in self.lists.iter().enumerate() {
            for &(target, sim) in list {
                rev[target].push((owner, sim));
            }
        }
        rev
    }
}

pub(crate) fn fit_user(data: &DatasetIndex, config: &AlgoConfig) -> Neighbors {
    neighbors(&data.by_user, &data.by_item, config)
}

pub(crate) fn fit_item(data: &DatasetIndex, config: &AlgoConfig) -> Neighbors {
    neighbors(&data.by_item, &data.by_user, config)
}

fn centred(vectors: &[Vec<(usize, f64)>], similarity: Similarity) -> Vec<Vec<(usize, f64)>> {
    vectors
        .iter()
        .map(|v| {
            let shift = match similarity {
                Similarity::RawCosine => 0.0,
                Similarity::Cosine | Similarity::Pearson => {
                    if v.is_empty() {
                        0.0
                    } else {
                        v.iter().map(|&(_, x)| x).sum::<f64>() / v.len() as f64
                    }
                }
            };
            v.iter().map(|&(d, x)| (d, x - shift)).collect()
        })
        .collect()
}

/// Computes each vector's top-k most similar peers. `vectors` are the rows
/// being compared and `transpose` the same data indexed the other way.
fn neighbors(
    vectors: &[Vec<(usize, f64)>],
    transpose: &[Vec<(usize, f64)>],
    config: &AlgoConfig,
) -> Neighbors {
    let sim_kind = config.similarity;
    let rows = centred(vectors, sim_kind);
    // Re-express the transpose with the same centred values.
    let mut cols: Vec<Vec<(usize, f64)>> = transpose.iter().map(|c| Vec::with_capacity(c.len())).collect();
    for (owner, row) in rows.iter().enumerate() {
        for &(d, x) in row {
            cols[d].push((owner, x));
        }
    }
    let norms: Vec<f64> = rows
        .iter()
        .map(|r| r.iter().map(|&(_, x)| x * x).sum::<f64>().sqrt())
        .collect();
    let n = rows.len();
    let k = config.neighborhood_size;
    let shrinkage = config.shrinkage;

    let lists = (0..n)
        .into_par_iter()
        .map_init(
            || Accumulator::new(n),
            |acc, a| {
                acc.reset();
                for &(d, xa) in &rows[a] {
                    for &(b, xb) in &cols[d] {
                        if b != a {
                            acc.add(b, xa, xb);
                        }
                    }
                }
                let mut sims: Vec<(usize, f64)> = acc
                    .touched
                    .iter()
                    .filter_map(|&b| {
                        let denom = match sim_kind {
                            Similarity::Pearson => (acc.sq_a[b] * acc.sq_b[b]).sqrt(),
                            Similarity::Cosine | Similarity::RawCosine => norms[a] * norms[b],
                        };
                        if denom <= 0.0 {
                            return None;
                        }
                        let co = acc.count[b] as f64;
                        let sim = acc.dot[b] / denom * (co / (co + shrinkage));
                        (sim > 0.0 && sim.is_finite()).then_some((b, sim.min(1.0)))
                    })
                    .collect();
                sims.sort_by(|x, y| y.1.total_cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
                sims.truncate(k);
                sims
            },
        )
        .collect();
    Neighbors { lists }
}

struct Accumulator {
    dot: Vec<f64>,
    sq_a: Vec<f64>,
    sq_b: Vec<f64>,
    count: Vec<u32>,
    touched: Vec<usize>,
}

impl Accumulator {
    fn new(n: usize) -> Self {
        Accumulator {
            dot: vec![0.0; n],
            sq_a: vec![0.0; n],
            sq_b: vec![0.0; n],
            count: vec![0; n],
            touched: Vec::new(),
        }
    }

    fn reset(&mut self) {
        for &b in &self.touched {
            self.dot[b] = 0.0;
            self.sq_a[b] = 0.0;
            self.sq_b[b] = 0.0;
            self.count[b] = 0;
        }
        self.touched.clear();
    }

    fn add(&mut self, b: usize, xa: f64, xb: f64) {
        if self.count[b] == 0 {
            self.touched.push(b);
        }
        self.count[b] += 1;
        self.dot[b] += xa * xb;
        self.sq_a[b] += xa * xa;
        self.sq_b[b] += xb * xb;
    }
}

fn finish(num: f64, den: f64, aggregation: Aggregation) -> f64 {
    match aggregation {
        Aggregation::WeightedAverage => num / den,
        Aggregation::SimilaritySum => den,
    }
}

fn lookup(list: &[(usize, f64)], pos: usize) -> Option<f64> {
    list.binary_search_by_key(&pos, |&(p, _)| p)
        .ok()
        .map(|i| list[i].1)
}

pub(crate) fn score_user_pair(
    data: &DatasetIndex,
    n: &Neighbors,
    config: &AlgoConfig,
    u: usize,
    i: usize,
) -> Option<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    let mut support = false;
    for &(v, s) in &n.lists[u] {
        if let Some(r) = lookup(&data.by_user[v], i) {
            num += s * r;
            den += s;
            support = true;
        }
    }
    support.then(|| finish(num, den, config.aggregation))
}

pub(crate) fn score_item_pair(
    data: &DatasetIndex,
    n: &Neighbors,
    config: &AlgoConfig,
    u: usize,
    i: usize,
) -> Option<f64> {
    // Sum in profile order so results match `accumulate_item` bit for bit.
    let mut terms: Vec<(usize, f64, f64)> = n.lists[i]
        .iter()
        .filter_map(|&(j, s)| lookup(&data.by_user[u], j).map(|r| (j, s, r)))
        .collect();
    if terms.is_empty() {
        return None;
    }
    terms.sort_by_key(|t| t.0);
    let (mut num, mut den) = (0.0, 0.0);
    for (_, s, r) in terms {
        num += s * r;
        den += s;
    }
    Some(finish(num, den, config.aggregation))
}

/// Scores for every item, `None` where no neighbour of `u` rated it.
pub(crate) fn accumulate_user(
    data: &DatasetIndex,
    n: &Neighbors,
    config: &AlgoConfig,
    u: usize,
) -> Vec<Option<f64>> {
    let mut num = vec![0.0; data.n_items()];
    let mut den = vec![0.0; data.n_items()];
    let mut seen = vec![false; data.n_items()];
    for &(v, s) in &n.lists[u] {
        for &(i, r) in &data.by_user[v] {
            num[i] += s * r;
            den[i] += s;
            seen[i] = true;
        }
    }
    collect(num, den, seen, config.aggregation)
}

pub(crate) fn accumulate_item(
    data: &DatasetIndex,
    reverse: &[Vec<(usize, f64)>],
    config: &AlgoConfig,
    u: usize,
) -> Vec<Option<f64>> {
    let mut num = vec![0.0; data.n_items()];
    let mut den = vec![0.0; data.n_items()];
    let mut seen = vec![false; data.n_items()];
    for &(j, r) in &data.by_user[u] {
        for &(i, s) in &reverse[j] {
            num[i] += s * r;
            den[i] += s;
            seen[i] = true;
        }
    }
    collect(num, den, seen, config.aggregation)
}

fn collect(num: Vec<f64>, den: Vec<f64>, seen: Vec<bool>, aggregation: Aggregation) -> Vec<Option<f64>> {
    num.into_iter()
        .zip(den)
        .zip(seen)
        .map(|((n, d), s)| s.then(|| finish(n, d, aggregation)))
        .collect()
}
