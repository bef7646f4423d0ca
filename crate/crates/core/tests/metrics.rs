mod common;

use std::collections::{BTreeMap, BTreeSet};

use popaudit_core::dataset::ItemCatalog;
use popaudit_core::metrics::{
    gap_profile, gap_recs, hellinger, item_popularity, profile_distribution, rated_vs_recommended,
    recommendation_distribution, user_metrics, user_miscalibration, CategoricalDistribution,
};
use popaudit_core::recommend::{fit, AlgoConfig, Algorithm, Recommendation, RecommendationSet, TopN};

fn recs(lists: &[(u64, &[u64])]) -> RecommendationSet {
    let n = lists.iter().map(|(_, l)| l.len()).max().unwrap_or(1);
    RecommendationSet::from_lists(
        n,
        "test".into(),
        lists.iter().map(|(u, l)| {
            (
                *u,
                TopN {
                    items: l.iter().map(|&item| Recommendation { item, score: 0.0 }).collect(),
                    short: false,
                },
            )
        }),
    )
}

fn two_genre_catalog(n: u64) -> ItemCatalog {
    // odd ids Drama, even ids Action
    ItemCatalog::new((1..=n).map(|i| (i, vec![if i % 2 == 1 { "Drama" } else { "Action" }]))).unwrap()
}

#[test]
fn mixed_profile_distribution() {
    let cat = ItemCatalog::new(vec![(1, vec!["Drama"]), (2, vec!["Drama", "Action"])]).unwrap();
    let train = common::dataset(&[(1, 1, 4.0), (1, 2, 3.0), (2, 1, 5.0)]);
    let p = profile_distribution(1, &train, &cat);
    assert_eq!(p.get(&cat, "Drama"), Some(0.75));
    assert_eq!(p.get(&cat, "Action"), Some(0.25));
    // single-item profile is the item's own distribution
    assert_eq!(profile_distribution(2, &train, &cat).get(&cat, "Drama"), Some(1.0));
}

#[test]
fn seventy_thirty_profile_against_fifty_five_forty_five_list() {
    // 7 Drama and 3 Action items in the profile; 11 Drama and 9 Action recommended.
    let cat = two_genre_catalog(60);
    let drama = |k: u64| 2 * k + 1;
    let action = |k: u64| 2 * k + 2;
    let mut triples: Vec<(u64, u64, f64)> = (0..7).map(|k| (1, drama(k), 4.0)).collect();
    triples.extend((0..3).map(|k| (1, action(k), 4.0)));
    let train = common::dataset(&triples);
    let list: Vec<u64> = (10..21).map(drama).chain((10..19).map(action)).collect();
    let r = recs(&[(1, &list)]);

    let p = profile_distribution(1, &train, &cat);
    assert!((p.get(&cat, "Drama").unwrap() - 0.7).abs() < 1e-12);
    let q = recommendation_distribution(1, &r, &cat);
    assert!((q.get(&cat, "Drama").unwrap() - 0.55).abs() < 1e-12);

    let mc = user_miscalibration(1, &train, &r, &cat).unwrap();
    let oracle = common::hellinger_vec(&[0.7, 0.3], &[0.55, 0.45]);
    assert!((oracle - 0.1100).abs() < 1e-3);
    assert!((mc - oracle).abs() < 1e-12);
}

#[test]
fn calibrated_and_disjoint_lists() {
    let cat = two_genre_catalog(40);
    let train = common::dataset(&[(1, 1, 4.0), (1, 2, 4.0)]);
    let calibrated = recs(&[(1, &[3, 4, 5, 6])]);
    assert_eq!(user_miscalibration(1, &train, &calibrated, &cat).unwrap(), 0.0);

    let train = common::dataset(&[(1, 1, 4.0), (1, 3, 4.0)]);
    let wrong = recs(&[(1, &[2, 4, 6])]);
    assert!((user_miscalibration(1, &train, &wrong, &cat).unwrap() - 1.0).abs() < 1e-15);

    let drama = recs(&[(1, &[5, 7, 9, 11, 13, 15, 17, 19, 21, 23])]);
    let q = recommendation_distribution(1, &drama, &cat);
    assert_eq!(q.get(&cat, "Drama"), Some(1.0));
}

#[test]
fn mixed_ten_item_list_matches_hand_sum() {
    let genres = common::genre_map(30);
    let cat = common::catalog(&genres);
    let list: Vec<u64> = vec![3, 5, 7, 12, 14, 18, 21, 22, 27, 30];
    let r = recs(&[(1, &list)]);
    let q = recommendation_distribution(1, &r, &cat);
    let oracle = common::genre_distribution(&list, &genres);
    for (g, v) in oracle {
        assert!((q.get(&cat, g).unwrap() - v).abs() < 1e-12, "{g}");
    }
    assert!((q.total() - 1.0).abs() < 1e-12);
}

#[test]
fn popularity_and_gap_examples() {
    // item 1 rated by all four users, item 2 by three, item 9 by nobody
    let train = common::dataset(&[
        (1, 1, 4.0),
        (2, 1, 4.0),
        (3, 1, 4.0),
        (4, 1, 4.0),
        (1, 2, 3.0),
        (2, 2, 3.0),
        (3, 2, 3.0),
        (4, 3, 2.0),
    ]);
    let pop = item_popularity(&train);
    assert_eq!(pop.theta(1), 1.0);
    assert_eq!(pop.theta(2), 0.75);
    assert_eq!(pop.theta(9), 0.0);

    // user 4: θ = {1.0, 0.25} → 0.625; user 1: {1.0, 0.75} → 0.875
    let g: BTreeSet<u64> = [1, 4].into_iter().collect();
    assert!((gap_profile(&g, &train, &pop).unwrap() - 0.75).abs() < 1e-15);

    let r = recs(&[(1, &[3]), (4, &[2, 9])]);
    // user 1 list θ = {0.25}; user 4 list θ = {0.75, 0} → 0.375
    assert!((gap_recs(&g, &r, &pop).unwrap() - 0.3125).abs() < 1e-15);
    let never = recs(&[(1, &[9]), (4, &[9])]);
    assert_eq!(gap_recs(&g, &never, &pop).unwrap(), 0.0);
}

#[test]
fn user_metrics_count_exclusions() {
    let cat = ItemCatalog::new(vec![(1, vec!["Drama"]), (2, vec!["Action"])]).unwrap();
    // item 5 is not in the catalog
    let train = common::dataset(&[(1, 1, 4.0), (2, 5, 3.0), (3, 2, 3.0), (4, 1, 1.0)]);
    let r = recs(&[(1, &[2]), (2, &[1]), (3, &[5])]);
    let users: BTreeSet<u64> = [1, 2, 3, 4, 99].into_iter().collect();
    let m = user_metrics(&users, &train, &r, &cat, &item_popularity(&train));
    assert_eq!(m.rows.keys().copied().collect::<Vec<_>>(), vec![1]);
    assert_eq!(m.exclusions.no_profile, 1);
    assert_eq!(m.exclusions.no_recommendations, 1);
    assert_eq!(m.exclusions.empty_profile_distribution, 1);
    assert_eq!(m.exclusions.empty_recommendation_distribution, 1);
}

#[test]
fn exposure_recount_for_most_popular() {
    let triples = common::skewed_ratings(20, 30, 5);
    let train = common::dataset(&triples);
    let model = fit(&train, &AlgoConfig::new(Algorithm::MostPopular)).unwrap();
    let r = model.recommend_all(10).unwrap();
    let lists = common::lists_of(&r);
    assert_eq!(lists, common::oracle_most_popular(&triples, 10));

    let mut recount: BTreeMap<u64, usize> = BTreeMap::new();
    for l in lists.values() {
        for i in l {
            *recount.entry(*i).or_default() += 1;
        }
    }
    let rated = common::profiles(&triples);
    for row in rated_vs_recommended(&train, &r) {
        assert_eq!(row.times_recommended, recount.get(&row.item_id).copied().unwrap_or(0));
        let n = triples.iter().filter(|t| t.1 == row.item_id).count();
        assert_eq!(row.times_rated, n);
        if rated.values().all(|h| h.contains(&row.item_id)) {
            assert_eq!(row.times_recommended, 0);
        }
    }
}

#[test]
fn item_in_every_profile_is_never_recommended() {
    let train = common::dataset(&[(1, 1, 5.0), (1, 2, 4.0), (2, 1, 3.0), (2, 3, 2.0), (3, 1, 4.0)]);
    let model = fit(&train, &AlgoConfig::new(Algorithm::MostPopular)).unwrap();
    let r = model.recommend_all(10).unwrap();
    let row = rated_vs_recommended(&train, &r).into_iter().find(|e| e.item_id == 1).unwrap();
    assert_eq!(row.times_rated, 3);
    assert_eq!(row.times_recommended, 0);
    assert!((row.mean_rating - 4.0).abs() < 1e-15);
}

#[test]
fn hellinger_of_distributions_built_from_weights() {
    let p = CategoricalDistribution::from_weights(vec![7.0, 3.0]).unwrap();
    let q = CategoricalDistribution::from_weights(vec![11.0, 9.0]).unwrap();
    assert!((hellinger(&p, &q).unwrap() - common::hellinger_vec(&[0.7, 0.3], &[0.55, 0.45])).abs() < 1e-15);
}
