mod common;

use std::collections::{BTreeMap, BTreeSet};

use popaudit_core::cohorts::{group_by_popularity, GroupingScheme};
use popaudit_core::dataset::{core_filter, parse_ratings, split, write_ratings, RatingsFormat};
use popaudit_core::metrics::{
    gap_profile, gap_recs, hellinger, item_popularity, popularity_lift, recommendation_distribution, user_metrics,
    CategoricalDistribution, GroupSummary,
};
use popaudit_core::recommend::{fit, Aggregation, AlgoConfig, Algorithm, Similarity};
use popaudit_core::stats::{pearson_correlation, spearman_correlation, t_test};
use proptest::prelude::*;

fn weights(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..10.0, len).prop_filter("nonzero", |w| w.iter().sum::<f64>() > 1e-6)
}

fn dist(w: Vec<f64>) -> CategoricalDistribution {
    CategoricalDistribution::from_weights(w).unwrap()
}

fn triples(max_users: u64, max_items: u64) -> impl Strategy<Value = Vec<(u64, u64, f64)>> {
    prop::collection::btree_map((1..=max_users, 1..=max_items), 1u8..=5, 1..120)
        .prop_map(|m| m.into_iter().map(|((u, i), r)| (u, i, r as f64)).collect())
}

fn sample(min_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0f64..100.0, min_len..40)
}

fn algorithms() -> impl Strategy<Value = AlgoConfig> {
    prop_oneof![
        Just(AlgoConfig::new(Algorithm::MostPopular)),
        (2usize..8, 0usize..3, any::<bool>()).prop_map(|(k, s, sum)| AlgoConfig {
            neighborhood_size: k,
            similarity: [Similarity::Cosine, Similarity::Pearson, Similarity::RawCosine][s],
            aggregation: if sum { Aggregation::SimilaritySum } else { Aggregation::WeightedAverage },
            ..AlgoConfig::new(Algorithm::UserKnn)
        }),
        (2usize..8, 0usize..3).prop_map(|(k, s)| AlgoConfig {
            neighborhood_size: k,
            similarity: [Similarity::Cosine, Similarity::Pearson, Similarity::RawCosine][s],
            ..AlgoConfig::new(Algorithm::ItemKnn)
        }),
        Just(AlgoConfig { factors: 3, epochs: 3, ..AlgoConfig::new(Algorithm::Bmf) }),
        Just(AlgoConfig { factors: 3, epochs: 3, ..AlgoConfig::new(Algorithm::SvdPlusPlus) }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hellinger_is_a_bounded_metric(a in weights(6), b in weights(6), c in weights(6)) {
        let (p, q, r) = (dist(a), dist(b), dist(c));
        let pq = hellinger(&p, &q).unwrap();
        prop_assert!((0.0..=1.0).contains(&pq));
        prop_assert_eq!(pq, hellinger(&q, &p).unwrap());
        prop_assert!(hellinger(&p, &p).unwrap().abs() < 1e-12);
        let qr = hellinger(&q, &r).unwrap();
        let pr = hellinger(&p, &r).unwrap();
        prop_assert!(pr <= pq + qr + 1e-12);
        prop_assert!((pq - common::hellinger_vec(p.mass(), q.mass())).abs() < 1e-12);
    }

    #[test]
    fn distributions_are_normalised(w in weights(8)) {
        let d = dist(w.clone());
        prop_assert!((d.total() - 1.0).abs() < 1e-12);
        prop_assert!(d.mass().iter().all(|&x| x >= 0.0));
        let scaled = dist(w.iter().map(|x| x * 3.5).collect());
        for (a, b) in d.mass().iter().zip(scaled.mass()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn recommendation_distributions_sum_to_one(t in triples(12, 25), n in 1usize..8) {
        let train = common::dataset(&t);
        let cat = common::catalog(&common::genre_map(25));
        let recs = fit(&train, &AlgoConfig::new(Algorithm::MostPopular)).unwrap().recommend_all(n).unwrap();
        for (u, list) in recs.iter() {
            if !list.is_empty() {
                let q = recommendation_distribution(u, &recs, &cat);
                prop_assert!((q.total() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn popularity_and_gap_stay_in_unit_interval(t in triples(15, 20)) {
        let train = common::dataset(&t);
        let pop = item_popularity(&train);
        prop_assert!(pop.iter().all(|(_, th)| th > 0.0 && th <= 1.0));
        let oracle = common::theta(&t);
        for (i, th) in pop.iter() {
            prop_assert!((th - oracle[&i]).abs() < 1e-15);
        }
        let gap = gap_profile(train.users(), &train, &pop).unwrap();
        prop_assert!(gap > 0.0 && gap <= 1.0);
    }

    #[test]
    fn lift_ignores_popularity_scale(t in triples(15, 20), factor in 0.01f64..100.0) {
        let train = common::dataset(&t);
        let pop = item_popularity(&train);
        let recs = fit(&train, &AlgoConfig::new(Algorithm::MostPopular)).unwrap().recommend_all(3).unwrap();
        let users: BTreeSet<u64> = recs.iter().filter(|(_, l)| !l.is_empty()).map(|(u, _)| u).collect();
        prop_assume!(!users.is_empty());
        let lift = |p: &_| popularity_lift(gap_profile(&users, &train, p).unwrap(), gap_recs(&users, &recs, p).unwrap()).unwrap();
        let a = lift(&pop);
        let b = lift(&pop.scaled(factor));
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn t_test_symmetry_and_location(a in sample(2), b in sample(2), shift in -50.0f64..50.0) {
        prop_assume!(a.iter().any(|x| *x != a[0]) || b.iter().any(|x| *x != b[0]));
        let ab = t_test(&a, &b).unwrap();
        let ba = t_test(&b, &a).unwrap();
        prop_assert!((ab.statistic + ba.statistic).abs() < 1e-9 * ab.statistic.abs().max(1.0));
        prop_assert!((ab.p_value - ba.p_value).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab.p_value));

        let sa: Vec<f64> = a.iter().map(|x| x + shift).collect();
        let sb: Vec<f64> = b.iter().map(|x| x + shift).collect();
        let shifted = t_test(&sa, &sb).unwrap();
        prop_assert!((shifted.p_value - ab.p_value).abs() < 1e-6);

        let (t, dof) = common::welch(&a, &b);
        prop_assert!((ab.statistic - t).abs() < 1e-8 * t.abs().max(1.0));
        prop_assert!((ab.dof - dof).abs() < 1e-8 * dof);
    }

    #[test]
    fn t_test_p_value_falls_as_groups_separate(a in sample(3), b in sample(3), d in 1.0f64..50.0) {
        prop_assume!(a.iter().any(|x| *x != a[0]) && b.iter().any(|x| *x != b[0]));
        let ma = a.iter().sum::<f64>() / a.len() as f64;
        let mb = b.iter().sum::<f64>() / b.len() as f64;
        // move b away from a by d in the direction it already lies
        let dir = if mb >= ma { 1.0 } else { -1.0 };
        let far: Vec<f64> = b.iter().map(|x| x + dir * d).collect();
        prop_assert!(t_test(&a, &far).unwrap().p_value <= t_test(&a, &b).unwrap().p_value + 1e-12);
    }

    #[test]
    fn correlations_are_affine_invariant(
        pairs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..30),
        scale in 0.1f64..10.0,
        offset in -10.0f64..10.0,
    ) {
        let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        prop_assume!(xs.iter().any(|x| (x - xs[0]).abs() > 1e-3) && ys.iter().any(|y| (y - ys[0]).abs() > 1e-3));
        let r = pearson_correlation(&xs, &ys).unwrap();
        prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&r));
        let moved: Vec<f64> = xs.iter().map(|x| scale * x + offset).collect();
        prop_assert!((pearson_correlation(&moved, &ys).unwrap() - r).abs() < 1e-9);
        let flipped: Vec<f64> = xs.iter().map(|x| -scale * x + offset).collect();
        prop_assert!((pearson_correlation(&flipped, &ys).unwrap() + r).abs() < 1e-9);

        let rho = spearman_correlation(&xs, &ys).unwrap();
        let cubed: Vec<f64> = xs.iter().map(|x| x.powi(3)).collect();
        prop_assert!((spearman_correlation(&cubed, &ys).unwrap() - rho).abs() < 1e-9);
    }

    #[test]
    fn popularity_groups_partition_users(
        scores in prop::collection::btree_map(1u64..500, 0.0f64..1.0, 2..80),
        n in 2usize..12,
        equal_count in any::<bool>(),
        rotate in 0usize..80,
    ) {
        let scheme = if equal_count { GroupingScheme::EqualCount } else { GroupingScheme::EqualWidth };
        let part = group_by_popularity(&scores, n, scheme).unwrap();
        prop_assert_eq!(part.cohorts.len(), n);
        let mut seen = BTreeSet::new();
        for c in &part.cohorts {
            for u in &c.members {
                prop_assert!(seen.insert(*u));
            }
        }
        prop_assert_eq!(seen, scores.keys().copied().collect::<BTreeSet<_>>());

        // a lower group never holds a higher score than a later one
        let ranges: Vec<(f64, f64)> = part.cohorts.iter().filter(|c| !c.members.is_empty()).map(|c| {
            let v: Vec<f64> = c.members.iter().map(|u| scores[u]).collect();
            (v.iter().copied().fold(f64::INFINITY, f64::min), v.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        }).collect();
        for w in ranges.windows(2) {
            prop_assert!(w[0].1 <= w[1].0);
        }

        // relabelling users by a permutation of ids does not change group sizes
        let ids: Vec<u64> = scores.keys().copied().collect();
        let k = rotate % ids.len();
        let relabel: BTreeMap<u64, u64> = ids.iter().zip(ids.iter().cycle().skip(k)).map(|(a, b)| (*a, *b)).collect();
        let moved: BTreeMap<u64, f64> = scores.iter().map(|(u, s)| (relabel[u], *s)).collect();
        let other = group_by_popularity(&moved, n, scheme).unwrap();
        if scheme == GroupingScheme::EqualWidth {
            for (a, b) in part.cohorts.iter().zip(&other.cohorts) {
                let mapped: BTreeSet<u64> = a.members.iter().map(|u| relabel[u]).collect();
                prop_assert_eq!(&mapped, &b.members);
            }
        } else {
            let sizes = |p: &popaudit_core::cohorts::CohortPartition| p.cohorts.iter().map(|c| c.members.len()).collect::<Vec<_>>();
            prop_assert_eq!(sizes(&part), sizes(&other));
        }
    }

    #[test]
    fn core_filter_reaches_a_fixed_point(t in triples(20, 20), mu in 1usize..5, mi in 1usize..5) {
        let ds = common::dataset(&t);
        let Ok(once) = core_filter(&ds, mu, mi) else { return Ok(()); };
        for u in once.users() {
            prop_assert!(once.ratings().iter().filter(|r| r.user == *u).count() >= mu);
        }
        for i in once.items() {
            prop_assert!(once.ratings().iter().filter(|r| r.item == *i).count() >= mi);
        }
        let twice = core_filter(&once, mu, mi).unwrap();
        prop_assert_eq!(twice.fingerprint(), once.fingerprint());
    }

    #[test]
    fn ratings_round_trip_through_files(t in triples(30, 30)) {
        let ds = common::dataset(&t);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ratings.dat");
        write_ratings(&ds, &path, &RatingsFormat::MovieLens1M).unwrap();
        let back = parse_ratings(&path, &RatingsFormat::MovieLens1M).unwrap();
        prop_assert_eq!(common::as_triples(&back), common::as_triples(&ds));
        prop_assert_eq!(back.fingerprint(), ds.fingerprint());
    }

    #[test]
    fn split_conserves_records(t in triples(20, 20), seed in any::<u64>(), ratio in 0.1f64..0.9) {
        let ds = common::dataset(&t);
        // tiny inputs may leave a side empty, which is refused
        let Ok(s) = split(&ds, ratio, seed) else {
            prop_assume!(false);
            unreachable!()
        };
        prop_assert!(!s.train.is_empty() && !s.test.is_empty());
        let mut all = common::as_triples(&s.train);
        all.extend(common::as_triples(&s.test));
        all.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut orig = t.clone();
        orig.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        prop_assert_eq!(all, orig);
        let again = split(&ds, ratio, seed).unwrap();
        prop_assert_eq!(again.assignment, s.assignment);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn recommendations_exclude_training_items(t in triples(15, 25), config in algorithms(), n in 1usize..12) {
        let train = common::dataset(&t);
        let model = fit(&train, &config).unwrap();
        let recs = model.recommend_all(n).unwrap();
        let profiles = common::profiles(&t);
        let n_items = train.items().len();
        for (u, list) in recs.iter() {
            let h = &profiles[&u];
            prop_assert!(list.len() <= n);
            prop_assert_eq!(list.len(), n.min(n_items - h.len()));
            let ids: BTreeSet<u64> = list.iter().map(|r| r.item).collect();
            prop_assert_eq!(ids.len(), list.len());
            prop_assert!(ids.iter().all(|i| !h.contains(i) && train.items().contains(i)));
        }
        let again = fit(&train, &config).unwrap().recommend_all(n).unwrap();
        prop_assert_eq!(recs, again);
    }

    #[test]
    fn group_metrics_conserve_users(t in triples(20, 25), config in algorithms()) {
        let train = common::dataset(&t);
        let cat = common::catalog(&common::genre_map(25));
        let pop = item_popularity(&train);
        let recs = fit(&train, &config).unwrap().recommend_all(5).unwrap();
        let m = user_metrics(train.users(), &train, &recs, &cat, &pop);
        prop_assert_eq!(m.rows.len() + m.exclusions.total(), train.users().len());

        let scores: BTreeMap<u64, f64> = m.rows.iter().map(|(u, r)| (*u, r.profile_avg_popularity)).collect();
        prop_assume!(scores.len() >= 2);
        let part = group_by_popularity(&scores, 3, GroupingScheme::EqualWidth).unwrap();
        let all: BTreeSet<u64> = scores.keys().copied().collect();
        let total = GroupSummary::of(&all, &m.rows).unwrap();
        // group means weighted by size recover the overall means
        let (mut gp, mut gq, mut mc) = (0.0, 0.0, 0.0);
        for c in &part.cohorts {
            if let Some(g) = GroupSummary::of(&c.members, &m.rows) {
                gp += g.gap_p * g.size as f64;
                gq += g.gap_q * g.size as f64;
                mc += g.miscalibration * g.size as f64;
            }
        }
        let n = total.size as f64;
        prop_assert!((gp / n - total.gap_p).abs() < 1e-12);
        prop_assert!((gq / n - total.gap_q).abs() < 1e-12);
        prop_assert!((mc / n - total.miscalibration).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&total.miscalibration));
    }
}
