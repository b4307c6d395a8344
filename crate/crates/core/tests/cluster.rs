mod common;

use ndarray::Axis;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ras_core::cluster::{self, kmeans_fit, rank_members, ClusterSpec, ClustersFile, KMeansOptions};

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("r{i:03}")).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn assignment_is_stable_at_convergence(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(4..=80);
        let k = rng.random_range(2..=4.min(n));
        let x = common::uniform_points(n, 3, &mut rng);
        let model = kmeans_fit(&x, k, seed, &KMeansOptions { tol: 0.0, ..KMeansOptions::default() }).unwrap();
        for (p, &label) in x.rows().into_iter().zip(&model.labels) {
            let own = (&p - &model.centroids.row(label)).mapv(|v| v * v).sum();
            for c in model.centroids.rows() {
                prop_assert!(own <= (&p - &c).mapv(|v| v * v).sum());
            }
        }
        prop_assert!(model.cluster_sizes().iter().all(|&s| s > 0));
        let recomputed = cluster::inertia(&x, &model.centroids, &model.labels);
        prop_assert!((recomputed - model.inertia).abs() <= 1e-9 * recomputed.max(1.0));
    }

    #[test]
    fn more_restarts_never_hurt(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = common::uniform_points(40, 2, &mut rng);
        let full = kmeans_fit(&x, 4, seed, &KMeansOptions::default()).unwrap();
        for restarts in 1..10 {
            let fewer = kmeans_fit(&x, 4, seed, &KMeansOptions { restarts, ..KMeansOptions::default() }).unwrap();
            prop_assert!(full.inertia <= fewer.inertia);
        }
    }

    #[test]
    fn ranking_ignores_row_order(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(3..=40);
        let x = common::uniform_points(n, 3, &mut rng);
        let names = ids(n);
        let model = kmeans_fit(&x, 2, seed, &KMeansOptions::default()).unwrap();
        let ranking = rank_members(&x, &model, &names, 5).unwrap();

        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let px = x.select(Axis(0), &order);
        let pnames: Vec<String> = order.iter().map(|&i| names[i].clone()).collect();
        let mut pmodel = model.clone();
        pmodel.labels = order.iter().map(|&i| model.labels[i]).collect();
        prop_assert_eq!(ranking, rank_members(&px, &pmodel, &pnames, 5).unwrap());
    }

    #[test]
    fn fit_is_deterministic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = common::uniform_points(30, 2, &mut rng);
        let a = kmeans_fit(&x, 3, seed, &KMeansOptions::default()).unwrap();
        let b = kmeans_fit(&x, 3, seed, &KMeansOptions::default()).unwrap();
        prop_assert_eq!(a, b);
    }
}

/// Deterministic instance set: the restarts only make reaching the optimum
/// very likely, so the set is fixed rather than drawn per run.
#[test]
fn two_means_finds_the_global_optimum() {
    for seed in 0..200u64 {
        let x = common::small_two_means_instance(seed);
        let model = kmeans_fit(&x, 2, seed, &KMeansOptions::default()).unwrap();
        let best = common::best_two_partition_inertia(&x);
        assert!(
            (model.inertia - best).abs() <= 1e-9,
            "seed {seed}: {} vs {best}",
            model.inertia
        );
    }
}

#[test]
fn clusters_file_round_trips_through_json() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x = common::uniform_points(25, 2, &mut rng);
    let names = ids(25);
    let model = kmeans_fit(&x, 3, 9, &KMeansOptions::default()).unwrap();
    let ranking = rank_members(&x, &model, &names, 10).unwrap();
    let file = ClustersFile::new(&model, &names, &ranking);
    let text = serde_json::to_string_pretty(&file).unwrap();
    let back: ClustersFile = serde_json::from_str(&text).unwrap();
    back.validate().unwrap();
    assert_eq!(back, file);
    assert_eq!(back.labels_for(&names).unwrap(), model.labels);
    assert_eq!(back.ranking(), ranking);
}

#[test]
fn topic_lists_set_k() {
    let spec = ClusterSpec::new(&["Sport", "Education", "Information Technology"], true).unwrap();
    assert_eq!(spec.k(), 4);
    assert_eq!(spec.labels().last().map(String::as_str), Some("Else"));
    assert_eq!(ClusterSpec::new(&["Sport", "Education"], false).unwrap().k(), 2);
}
