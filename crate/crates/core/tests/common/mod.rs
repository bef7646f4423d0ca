//! Brute-force reference implementations and fixtures shared by the
//! integration tests. Written from the metric definitions with plain maps,
//! independent of the library's indexes.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use popaudit_core::dataset::{ItemCatalog, Rating, RatingScale, RatingsDataset};
use popaudit_core::recommend::RecommendationSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const GENRES: [&str; 6] = ["Action", "Comedy", "Drama", "Horror", "Romance", "Sci-Fi"];

/// Ratings with a popularity skew: item `i` is rated with probability
/// falling in `i`, so early ids are popular.
pub fn skewed_ratings(n_users: u64, n_items: u64, seed: u64) -> Vec<(u64, u64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for u in 1..=n_users {
        let taste: f64 = rng.random_range(0.3..1.5);
        let mut rated = 0;
        for i in 1..=n_items {
            let p = (0.9 * (i as f64).powf(-taste)).max(0.05);
            if rng.random::<f64>() < p {
                out.push((u, i, rng.random_range(1..=5) as f64));
                rated += 1;
            }
        }
        // at least three ratings per user
        let mut i = n_items;
        while rated < 3 {
            if !out.iter().any(|&(uu, ii, _)| uu == u && ii == i) {
                out.push((u, i, 3.0));
                rated += 1;
            }
            i -= 1;
        }
    }
    out
}

pub fn dataset(triples: &[(u64, u64, f64)]) -> RatingsDataset {
    RatingsDataset::new(
        triples
            .iter()
            .map(|&(user, item, value)| Rating {
                user,
                item,
                value,
                timestamp: None,
            })
            .collect(),
        RatingScale::MOVIELENS,
    )
    .unwrap()
}

/// Each item gets one to three genres, chosen from its id.
pub fn genre_map(n_items: u64) -> BTreeMap<u64, Vec<&'static str>> {
    (1..=n_items)
        .map(|i| {
            let k = i as usize;
            let mut g: Vec<&str> = vec![GENRES[k % 6]];
            if k % 3 == 0 {
                g.push(GENRES[(k / 3) % 6]);
            }
            if k % 7 == 0 {
                g.push(GENRES[(k + 2) % 6]);
            }
            g.sort();
            g.dedup();
            (i, g)
        })
        .collect()
}

pub fn catalog(genres: &BTreeMap<u64, Vec<&'static str>>) -> ItemCatalog {
    ItemCatalog::new(genres.iter().map(|(&i, g)| (i, g.clone()))).unwrap()
}

pub fn profiles(triples: &[(u64, u64, f64)]) -> BTreeMap<u64, Vec<u64>> {
    let mut out: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for &(u, i, _) in triples {
        out.entry(u).or_default().push(i);
    }
    out
}

/// θ(i): share of training users who rated i.
pub fn theta(train: &[(u64, u64, f64)]) -> HashMap<u64, f64> {
    let users: BTreeSet<u64> = train.iter().map(|t| t.0).collect();
    let mut raters: HashMap<u64, BTreeSet<u64>> = HashMap::new();
    for &(u, i, _) in train {
        raters.entry(i).or_default().insert(u);
    }
    raters
        .into_iter()
        .map(|(i, r)| (i, r.len() as f64 / users.len() as f64))
        .collect()
}

pub fn mean_popularity(items: &[u64], theta: &HashMap<u64, f64>) -> f64 {
    items.iter().map(|i| theta.get(i).copied().unwrap_or(0.0)).sum::<f64>() / items.len() as f64
}

/// Genre distribution of a set of items, each item weighted 1 and spread
/// evenly over its genres, keyed by genre name.
pub fn genre_distribution(items: &[u64], genres: &BTreeMap<u64, Vec<&'static str>>) -> BTreeMap<&'static str, f64> {
    let mut num: BTreeMap<&str, f64> = GENRES.iter().map(|g| (*g, 0.0)).collect();
    let mut den = 0.0;
    for i in items {
        let gs = &genres[i];
        for g in gs {
            *num.get_mut(g).unwrap() += 1.0 / gs.len() as f64;
        }
        den += 1.0;
    }
    num.into_iter().map(|(g, v)| (g, v / den)).collect()
}

pub fn hellinger(p: &BTreeMap<&str, f64>, q: &BTreeMap<&str, f64>) -> f64 {
    let keys: BTreeSet<&str> = p.keys().chain(q.keys()).copied().collect();
    let s: f64 = keys
        .iter()
        .map(|k| {
            let a = p.get(k).copied().unwrap_or(0.0).sqrt();
            let b = q.get(k).copied().unwrap_or(0.0).sqrt();
            (a - b).powi(2)
        })
        .sum();
    s.sqrt() / 2f64.sqrt()
}

pub fn hellinger_vec(p: &[f64], q: &[f64]) -> f64 {
    let s: f64 = p.iter().zip(q).map(|(a, b)| (a.sqrt() - b.sqrt()).powi(2)).sum();
    s.sqrt() / 2f64.sqrt()
}

pub struct OracleUser {
    pub profile_pop: f64,
    pub rec_pop: f64,
    pub mc: f64,
}

pub fn oracle_users(
    train: &[(u64, u64, f64)],
    lists: &BTreeMap<u64, Vec<u64>>,
    genres: &BTreeMap<u64, Vec<&'static str>>,
) -> BTreeMap<u64, OracleUser> {
    let theta = theta(train);
    let prof = profiles(train);
    lists
        .iter()
        .filter(|(_, l)| !l.is_empty())
        .map(|(u, list)| {
            let h = &prof[u];
            let p = genre_distribution(h, genres);
            let q = genre_distribution(list, genres);
            (
                *u,
                OracleUser {
                    profile_pop: mean_popularity(h, &theta),
                    rec_pop: mean_popularity(list, &theta),
                    mc: hellinger(&p, &q),
                },
            )
        })
        .collect()
}

/// (GAP_p, GAP_q, PL, MC) of a group.
pub fn oracle_group(users: &BTreeMap<u64, OracleUser>, group: &BTreeSet<u64>) -> (f64, f64, f64, f64) {
    let members: Vec<&OracleUser> = group.iter().filter_map(|u| users.get(u)).collect();
    let n = members.len() as f64;
    let gp = members.iter().map(|m| m.profile_pop).sum::<f64>() / n;
    let gq = members.iter().map(|m| m.rec_pop).sum::<f64>() / n;
    let mc = members.iter().map(|m| m.mc).sum::<f64>() / n;
    (gp, gq, (gq - gp) / gp, mc)
}

/// Mean over users with test ratings of |list ∩ test| / n.
pub fn oracle_precision(lists: &BTreeMap<u64, Vec<u64>>, test: &[(u64, u64, f64)], n: usize) -> f64 {
    let test = profiles(test);
    let mut total = 0.0;
    let mut users = 0;
    for (u, list) in lists {
        if let Some(t) = test.get(u) {
            total += list.iter().filter(|i| t.contains(i)).count() as f64 / n as f64;
            users += 1;
        }
    }
    total / users as f64
}

/// The n most-rated unrated items per user, ties by ascending id.
pub fn oracle_most_popular(train: &[(u64, u64, f64)], n: usize) -> BTreeMap<u64, Vec<u64>> {
    let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
    for &(_, i, _) in train {
        *counts.entry(i).or_default() += 1;
    }
    let mut ranked: Vec<(u64, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    profiles(train)
        .into_iter()
        .map(|(u, h)| {
            let list = ranked
                .iter()
                .map(|(i, _)| *i)
                .filter(|i| !h.contains(i))
                .take(n)
                .collect();
            (u, list)
        })
        .collect()
}

pub fn lists_of(recs: &RecommendationSet) -> BTreeMap<u64, Vec<u64>> {
    recs.iter().map(|(u, l)| (u, l.iter().map(|r| r.item).collect())).collect()
}

pub fn as_triples(ds: &RatingsDataset) -> Vec<(u64, u64, f64)> {
    ds.ratings().iter().map(|r| (r.user, r.item, r.value)).collect()
}

/// Welch's t statistic and Welch–Satterthwaite degrees of freedom.
pub fn welch(a: &[f64], b: &[f64]) -> (f64, f64) {
    let m = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
    let v = |x: &[f64]| {
        let mu = m(x);
        x.iter().map(|y| (y - mu).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0)
    };
    let (sa, sb) = (v(a) / a.len() as f64, v(b) / b.len() as f64);
    let t = (m(a) - m(b)) / (sa + sb).sqrt();
    let dof = (sa + sb).powi(2) / (sa * sa / (a.len() as f64 - 1.0) + sb * sb / (b.len() as f64 - 1.0));
    (t, dof)
}
