//! Synthetic ratings with a MovieLens-like shape: long-tailed item
//! popularity, users with varying appetite for popular items, multi-genre
//! items and a gender attribute.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::index::sample_weighted;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, LogNormal, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::{Gender, ItemCatalog, Rating, RatingScale, RatingsDataset, UserDemographics};
use crate::error::{Error, Result};

const GENRES: [&str; 18] = [
    "Action",
    "Adventure",
    "Animation",
    "Children's",
    "Comedy",
    "Crime",
    "Documentary",
    "Drama",
    "Fantasy",
    "Film-Noir",
    "Horror",
    "Musical",
    "Mystery",
    "Romance",
    "Sci-Fi",
    "Thriller",
    "War",
    "Western",
];

/// Relative frequency of each genre as an item's first genre.
const GENRE_PRIOR: [f64; 18] = [
    5.0, 3.0, 1.0, 1.5, 11.0, 2.0, 1.0, 15.0, 0.5, 0.5, 3.0, 1.0, 1.0, 4.0, 2.5, 4.0, 1.5, 0.7,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub users: usize,
    pub items: usize,
    /// Fewest ratings per user.
    pub min_profile: usize,
    /// Median of the extra ratings per user beyond `min_profile`.
    pub median_extra: f64,
    /// Exponent of the power-law item popularity.
    pub popularity_exponent: f64,
    pub female_share: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            users: 600,
            items: 400,
            min_profile: 20,
            median_extra: 40.0,
            popularity_exponent: 1.0,
            female_share: 0.28,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthData {
    pub ratings: RatingsDataset,
    pub catalog: ItemCatalog,
    pub demographics: UserDemographics,
}

pub fn generate(config: &SynthConfig) -> Result<SynthData> {
    if config.users == 0 || config.items <= config.min_profile || config.min_profile == 0 {
        return Err(Error::InvalidArgument(
            "need users > 0 and items > min_profile > 0".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let bad = |e: &dyn std::fmt::Display| Error::InvalidArgument(e.to_string());

    // Popularity rank is independent of item id.
    let mut rank: Vec<usize> = (0..config.items).collect();
    for i in (1..rank.len()).rev() {
        rank.swap(i, rng.random_range(0..=i));
    }
    let mut item_genres = Vec::with_capacity(config.items);
    let mut quality = Vec::with_capacity(config.items);
    let quality_noise = Normal::new(0.0, 0.45).map_err(|e| bad(&e))?;
    let prior_total: f64 = GENRE_PRIOR.iter().sum();
    for _ in 0..config.items {
        let mut genres = BTreeSet::new();
        let extra = [0, 0, 1, 1, 2][rng.random_range(0..5)];
        while genres.len() < 1 + extra {
            let mut x = rng.random::<f64>() * prior_total;
            let mut g = 0;
            while x >= GENRE_PRIOR[g] && g + 1 < GENRE_PRIOR.len() {
                x -= GENRE_PRIOR[g];
                g += 1;
            }
            genres.insert(g);
        }
        item_genres.push(genres);
        // popular items are rated somewhat higher
        let head = 0.5 - ((rank[quality.len()] + 1) as f64).ln() / (config.items as f64).ln();
        quality.push(0.5 * head + quality_noise.sample(&mut rng));
    }
    let base: Vec<f64> = rank
        .iter()
        .map(|&r| ((r + 1) as f64).powf(-config.popularity_exponent))
        .collect();

    let mainstream = Beta::new(2.0, 2.0).map_err(|e| bad(&e))?;
    let extra_len = LogNormal::new(config.median_extra.max(1.0).ln(), 0.9).map_err(|e| bad(&e))?;
    let rating_noise = Normal::new(0.0, 0.9).map_err(|e| bad(&e))?;
    let user_bias = Normal::new(0.0, 0.4).map_err(|e| bad(&e))?;

    let mut ratings = Vec::new();
    let mut gender = BTreeMap::new();
    for u in 0..config.users {
        let user = (u + 1) as u64;
        let female = rng.random::<f64>() < config.female_share;
        gender.insert(user, if female { Gender::Female } else { Gender::Male });
        let mut t: f64 = mainstream.sample(&mut rng);
        if female {
            t *= 0.85;
        }
        let favourites: Vec<usize> = if female {
            vec![13, 7, rng.random_range(0..GENRES.len())]
        } else {
            vec![0, 14, rng.random_range(0..GENRES.len())]
        };
        let exponent = 0.25 + 1.25 * t;
        let weights: Vec<f64> = (0..config.items)
            .map(|i| {
                let affinity = if item_genres[i].iter().any(|g| favourites.contains(g)) { 3.0 } else { 1.0 };
                base[i].powf(exponent) * affinity
            })
            .collect();
        let extra = extra_len.sample(&mut rng).round() as usize;
        let len = (config.min_profile + extra).min(config.items / 2).max(config.min_profile);
        let chosen = sample_weighted(&mut rng, config.items, |i| weights[i], len).map_err(|e| bad(&e))?;
        let bias = user_bias.sample(&mut rng);
        let mut chosen: Vec<usize> = chosen.into_iter().collect();
        chosen.sort_unstable();
        for (k, i) in chosen.into_iter().enumerate() {
            let raw: f64 = 3.6 + quality[i] + bias + rating_noise.sample(&mut rng);
            ratings.push(Rating {
                user,
                item: (i + 1) as u64,
                value: raw.round().clamp(1.0, 5.0),
                timestamp: Some(978_300_000 + (u * 1000 + k) as i64),
            });
        }
    }

    let ratings = RatingsDataset::new(ratings, RatingScale::MOVIELENS)?;
    let catalog = ItemCatalog::new(
        item_genres
            .iter()
            .enumerate()
            .map(|(i, gs)| ((i + 1) as u64, gs.iter().map(|&g| GENRES[g]).collect::<Vec<_>>())),
    )?;
    Ok(SynthData {
        ratings,
        catalog,
        demographics: UserDemographics {
            gender,
            ..Default::default()
        },
    })
}

/// Paths of a MovieLens-format export.
#[derive(Debug, Clone)]
pub struct MovieLensFiles {
    pub ratings: PathBuf,
    pub movies: PathBuf,
    pub users: PathBuf,
}

/// Writes `ratings.dat`, `movies.dat` and `users.dat` in MovieLens 1M format.
pub fn write_movielens(data: &SynthData, dir: &Path) -> Result<MovieLensFiles> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = MovieLensFiles {
        ratings: dir.join("ratings.dat"),
        movies: dir.join("movies.dat"),
        users: dir.join("users.dat"),
    };
    let mut s = String::new();
    for r in data.ratings.ratings() {
        let _ = writeln!(s, "{}::{}::{}::{}", r.user, r.item, r.value, r.timestamp.unwrap_or(0));
    }
    fs::write(&files.ratings, &s).map_err(|e| Error::io(&files.ratings, e))?;

    s.clear();
    for item in data.catalog.items() {
        let genres = data.catalog.genres(item).unwrap_or_default().join("|");
        let _ = writeln!(s, "{item}::Movie {item} (1999)::{genres}");
    }
    fs::write(&files.movies, &s).map_err(|e| Error::io(&files.movies, e))?;

    s.clear();
    for (user, g) in &data.demographics.gender {
        let code = match g {
            Gender::Male => "M",
            Gender::Female => "F",
            Gender::Unknown => "X",
        };
        let _ = writeln!(s, "{user}::{code}::25::0::00000");
    }
    fs::write(&files.users, &s).map_err(|e| Error::io(&files.users, e))?;
    Ok(files)
}
