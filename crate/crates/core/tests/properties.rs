mod common;

use std::collections::HashSet;

use common::*;
use igk_core::*;
use proptest::prelude::*;
use rand::Rng;

fn sized_data() -> impl Strategy<Value = (u64, usize, usize)> {
    (any::<u64>(), 2usize..80, 1usize..4)
}

fn small_ga(seed: u64) -> GaConfig {
    GaConfig {
        population_size: 6,
        generations: 8,
        stall_generations: 8,
        seed,
        ..GaConfig::default()
    }
}

fn coordinate_sum(r: &ClusteringResult<f64>) -> Vec<f64> {
    let mut total = vec![0.0; r.centroids.dim()];
    for (j, c) in r.centroids.centers().enumerate() {
        let n = r.partition.sizes()[j] as f64;
        for (t, v) in total.iter_mut().zip(c) {
            *t += n * v;
        }
    }
    total
}

fn check_partition(p: &Partition, n: usize, k: usize) {
    assert_eq!(p.len(), n);
    assert_eq!(p.k(), k);
    assert!(p.labels().iter().all(|&l| l < k));
    assert_eq!(p.sizes().iter().sum::<usize>(), n);
    let mut counts = vec![0; k];
    for &l in p.labels() {
        counts[l] += 1;
    }
    assert_eq!(counts, p.sizes());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn remove_points_composes((seed, n, dim) in sized_data()) {
        let mut r = rng(seed);
        let data = random_data(&mut r, n, dim);
        let a: HashSet<usize> = (0..n).filter(|_| r.random_bool(0.3)).collect();
        let b: HashSet<usize> = (0..n).filter(|i| !a.contains(i) && r.random_bool(0.3)).collect();
        let stepwise = data.remove_points(&a).unwrap().remove_points(&b).unwrap();
        let union: HashSet<usize> = a.union(&b).copied().collect();
        let at_once = data.remove_points(&union).unwrap();
        prop_assert_eq!(&stepwise, &at_once);
        prop_assert_eq!(at_once.len(), n - union.len());
        prop_assert!(at_once.ids().iter().all(|id| !union.contains(id)));
        // survivors keep their ids and coordinates
        for (id, p) in at_once.iter() {
            prop_assert_eq!(p, data.point(id));
        }
    }

    #[test]
    fn removing_unknown_id_fails((seed, n, dim) in sized_data()) {
        let data = random_data(&mut rng(seed), n, dim);
        let gone: HashSet<usize> = [0].into();
        let smaller = data.remove_points(&gone).unwrap();
        prop_assert!(matches!(smaller.remove_points(&gone), Err(Error::UnknownId(0))));
    }

    #[test]
    fn subsamples_have_no_duplicates(
        (seed, n, dim) in sized_data(),
        count in 1usize..6,
        fraction in 0.05f64..=1.0,
    ) {
        let data = random_data(&mut rng(seed), n, dim);
        let subs = data.subsample(count, fraction, seed).unwrap();
        prop_assert_eq!(subs.len(), count);
        for s in &subs {
            let ids: HashSet<usize> = s.ids().iter().copied().collect();
            prop_assert_eq!(ids.len(), s.len());
            prop_assert_eq!(s.len(), subsample_size(n, fraction));
            for (id, p) in s.iter() {
                prop_assert_eq!(p, data.point(id));
            }
        }
        prop_assert_eq!(subs, data.subsample(count, fraction, seed).unwrap());
    }

    #[test]
    fn text_round_trip((seed, n, dim) in sized_data()) {
        let data = random_data(&mut rng(seed), n, dim);
        let back: Vec<Vec<f64>> = parse_points(&data.to_text()).unwrap();
        prop_assert_eq!(back, data.to_rows());
    }

    #[test]
    fn generated_points_belong_to_their_center(seed in any::<u64>(), m in 1usize..6, dim in 1usize..4) {
        let spec = GenSpec {
            num_clusters: m,
            points_per_cluster: 20,
            dimension: dim,
            spread: 1.0,
            box_lo: 0.0,
            box_hi: 1.0,
            outlier_fraction: 0.0,
            seed,
        };
        // pick the spread from the realized separation of the centers
        let (_, truth) = generate::<f64>(&spec).unwrap();
        let rows = truth.centroids.to_rows();
        let mut sep = f64::INFINITY;
        for a in 0..m {
            for b in a + 1..m {
                sep = sep.min(sq_dist(&rows[a], &rows[b]).sqrt());
            }
        }
        let spread = if sep.is_finite() { 0.01 * sep / 3.0 } else { 0.01 };
        prop_assume!(spread > 0.0);
        let (data, truth) = generate::<f64>(&GenSpec { spread, ..spec }).unwrap();
        prop_assert_eq!(truth.centroids.to_rows(), rows);
        for (i, p) in data.points().enumerate() {
            prop_assert_eq!(truth.centroids.nearest(p).0, i / 20);
        }
    }

    #[test]
    fn lloyd_is_monotone_and_stops_at_a_fixed_point((seed, n, dim) in sized_data(), k in 1usize..6) {
        let mut r = rng(seed);
        let k = k.min(n);
        let data = random_data(&mut r, n, dim);
        let init = random_init(&data, k, &mut r).unwrap();
        let (res, hist) = lloyd_with_history(&data, &init, 100, 1e-6).unwrap();
        for w in hist.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9, "{:?}", hist);
        }
        check_partition(&res.partition, n, k);
        approx::assert_relative_eq!(res.jc, squared_error(&data, &res.centroids, &res.partition), max_relative = 1e-9);
        prop_assert_eq!(&res.partition, &assign(&data, &res.centroids).unwrap());
        if res.iterations_run < 100 {
            let (next, _) = update_centroids(&data, res.partition.clone(), &res.centroids);
            prop_assert_eq!(assign(&data, &next).unwrap(), res.partition.clone());
        }
        let again = lloyd(&data, &init, 100, 1e-6).unwrap();
        prop_assert_eq!(res, again);
    }

    #[test]
    fn multistart_is_deterministic((seed, n, dim) in sized_data(), k in 1usize..5) {
        let data = random_data(&mut rng(seed), n, dim);
        let k = k.min(n);
        let a = kmeans_multistart(&data, k, 3, seed).unwrap();
        check_partition(&a.partition, n, k);
        prop_assert_eq!(a, kmeans_multistart(&data, k, 3, seed).unwrap());
    }

    #[test]
    fn fitness_is_dual_to_criterion((seed, n, dim) in sized_data(), k in 1usize..6) {
        let mut r = rng(seed);
        let data = random_data(&mut r, n, dim);
        let c = random_centroids(&mut r, k, dim);
        let ch = Chromosome::evaluate(&data, c).unwrap();
        prop_assert!(ch.fitness > 0.0 && ch.fitness <= 1.0);
        approx::assert_relative_eq!(ch.fitness * (1.0 + ch.jc), 1.0, max_relative = 1e-9);
    }

    #[test]
    fn ga_best_so_far_never_increases((seed, n, dim) in sized_data(), k in 1usize..5) {
        let data = random_data(&mut rng(seed), n, dim);
        let k = k.min(n);
        let (res, trace) = genetic_kmeans_traced(&data, k, &small_ga(seed), None).unwrap();
        for w in trace.best_jc.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9);
        }
        approx::assert_relative_eq!(res.jc, *trace.best_jc.last().unwrap(), max_relative = 1e-12);
        check_partition(&res.partition, n, k);
    }

    #[test]
    fn merge_preserves_weighted_center_sum((seed, n, dim) in sized_data(), k in 2usize..8) {
        let mut r = rng(seed);
        let data = random_data(&mut r, n, dim);
        let k = k.min(n).max(2);
        prop_assume!(n >= k);
        let init = random_init(&data, k, &mut r).unwrap();
        let start = lloyd(&data, &init, 5, 1e-6).unwrap();
        let merged = merge_step(&start, &data).unwrap();
        prop_assert_eq!(merged.k(), k - 1);
        check_partition(&merged.partition, n, k - 1);
        for (a, b) in coordinate_sum(&start).iter().zip(coordinate_sum(&merged)) {
            approx::assert_relative_eq!(*a, b, max_relative = 1e-9, epsilon = 1e-9);
        }
        approx::assert_relative_eq!(merged.jc, squared_error(&data, &merged.centroids, &merged.partition), max_relative = 1e-9);
    }

    #[test]
    fn igk_returns_exactly_k((seed, n, dim) in (any::<u64>(), 60usize..120, 1usize..3), k in 1usize..4, extra in 1usize..4) {
        let data = random_data(&mut rng(seed), n, dim);
        let cfg = IgkConfig { k, k_prime: k + extra, num_subsamples: 3, subsample_fraction: 0.2, ga: small_ga(seed) };
        let (res, trace) = igk_traced(&data, &cfg).unwrap();
        prop_assert_eq!(res.k(), k);
        check_partition(&res.partition, n, k);
        prop_assert_eq!(trace.merges, extra);
        for (c, jc) in trace.candidates.iter().zip(&trace.candidate_jc) {
            let p = assign(&data, c).unwrap();
            approx::assert_relative_eq!(*jc, squared_error(&data, c, &p), max_relative = 1e-12);
        }
        prop_assert_eq!(res, igk(&data, &cfg).unwrap());
    }

    #[test]
    fn outlyingness_is_normalized((seed, n, dim) in sized_data(), k in 1usize..6, t in 0.01f64..0.999) {
        let mut r = rng(seed);
        let data = random_data(&mut r, n, dim);
        let c = random_centroids(&mut r, k, dim);
        let mut rep = outlyingness(&data, &c).unwrap();
        prop_assert!(rep.d_max > 0.0);
        prop_assert!(rep.factors.iter().all(|&o| (0.0..=1.0).contains(&o)));
        prop_assert_eq!(rep.factors.iter().copied().fold(0.0, f64::max), 1.0);
        rep.apply_threshold(t, 1);
        prop_assert!(!rep.removed_ids.is_empty());
        let expect: Vec<usize> = rep.ids.iter().zip(&rep.factors).filter(|(_, &o)| o > t).map(|(&id, _)| id).collect();
        prop_assert_eq!(&rep.removed_ids, &expect);
    }

    #[test]
    fn higher_threshold_removes_a_subset((seed, n, dim) in sized_data(), k in 1usize..6, t1 in 0.01f64..0.99, dt in 0.0f64..0.5) {
        let mut r = rng(seed);
        let data = random_data(&mut r, n, dim);
        let c = random_centroids(&mut r, k, dim);
        let base = outlyingness(&data, &c).unwrap();
        let (mut lo, mut hi) = (base.clone(), base);
        lo.apply_threshold(t1, 1);
        hi.apply_threshold((t1 + dt).min(0.999), 1);
        let lo: HashSet<usize> = lo.removed_ids.into_iter().collect();
        prop_assert!(hi.removed_ids.iter().all(|id| lo.contains(id)));
    }

    #[test]
    fn orc_never_resurrects((seed, n, dim) in (any::<u64>(), 20usize..80, 1usize..3), k in 1usize..4, t in 0.3f64..0.99) {
        let data = random_data(&mut rng(seed), n, dim);
        let cfg = RemovalConfig { iterations: 5, threshold: t, seed, ..RemovalConfig::default() };
        let out = orc(&data, k, &cfg, 2).unwrap();
        check_removal_run(&data, &out, k);
        prop_assert_eq!(out, orc(&data, k, &cfg, 2).unwrap());
    }

    #[test]
    fn mse_ignores_order_and_translation((seed, _n, dim) in sized_data(), k in 1usize..7, shift in -100.0f64..100.0) {
        let mut r = rng(seed);
        let est = random_rows(&mut r, k, dim, 10.0);
        let truth = random_rows(&mut r, k, dim, 10.0);
        let gt = |rows: &[Vec<f64>]| GroundTruth { centroids: Centroids::from_rows(rows).unwrap() };
        let c = |rows: &[Vec<f64>]| Centroids::from_rows(rows).unwrap();
        let base = centroid_mse(&c(&est), &gt(&truth)).unwrap();
        prop_assert_eq!(centroid_mse(&c(&truth), &gt(&truth)).unwrap(), 0.0);
        let mut reversed = est.clone();
        reversed.reverse();
        approx::assert_relative_eq!(centroid_mse(&c(&reversed), &gt(&truth)).unwrap(), base, max_relative = 1e-12);
        let moved = |rows: &[Vec<f64>]| -> Vec<Vec<f64>> { rows.iter().map(|p| p.iter().map(|v| v + shift).collect()).collect() };
        approx::assert_relative_eq!(centroid_mse(&c(&moved(&est)), &gt(&moved(&truth))).unwrap(), base, max_relative = 1e-9);
    }
}

/// Every pass with d_max > 0 removes something, removed and surviving ids partition the
/// input, and no id comes back.
fn check_removal_run(data: &DataSet<f64>, out: &OutlierRunResult<f64>, k: usize) {
    let removed = out.removed_ids();
    assert_eq!(removed.len(), out.all_removed.len());
    assert_eq!(removed.len() + out.surviving.len(), data.len());
    assert!(out.surviving.ids().iter().all(|id| !removed.contains(id)));
    let mut before: HashSet<usize> = data.ids().iter().copied().collect();
    for rep in &out.per_iteration {
        if rep.d_max > 0.0 {
            assert!(
                !rep.removed_ids.is_empty(),
                "pass {} removed nothing",
                rep.iteration
            );
        }
        let now: HashSet<usize> = rep.ids.iter().copied().collect();
        assert!(now.is_subset(&before));
        before = now
            .difference(&rep.removed_ids.iter().copied().collect())
            .copied()
            .collect();
    }
    assert_eq!(
        before,
        out.surviving.ids().iter().copied().collect::<HashSet<_>>()
    );
    assert!(out.surviving.len() >= k);
    assert_eq!(out.final_clustering.partition.len(), out.surviving.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn proposed_never_resurrects(seed in any::<u64>(), k in 1usize..4) {
        let data = random_data(&mut rng(seed), 60, 2);
        let igk_cfg = IgkConfig { k, k_prime: k + 1, num_subsamples: 2, subsample_fraction: 0.3, ga: small_ga(0) };
        let cfg = RemovalConfig { iterations: 4, threshold: 0.8, seed, ..RemovalConfig::default() };
        let out = proposed(&data, &igk_cfg, &cfg).unwrap();
        check_removal_run(&data, &out, k);
        prop_assert_eq!(out, proposed(&data, &igk_cfg, &cfg).unwrap());
    }

    #[test]
    fn single_precision_pipeline_runs(seed in any::<u64>()) {
        let rows = random_rows(&mut rng(seed), 50, 2, 10.0);
        let rows32: Vec<Vec<f32>> = rows.iter().map(|p| p.iter().map(|&v| v as f32).collect()).collect();
        let data = DataSet32::from_rows(&rows32).unwrap();
        let res = kmeans_multistart(&data, 3, 2, seed).unwrap();
        check_partition(&res.partition, 50, 3);
        let cfg = RemovalConfig { iterations: 3, seed, ..RemovalConfig::default() };
        let out = orc(&data, 3, &cfg, 2).unwrap();
        prop_assert_eq!(out.surviving.len() + out.all_removed.len(), 50);
        let rep = outlyingness(&data, &res.centroids).unwrap();
        prop_assert_eq!(rep.factors.iter().copied().fold(0.0f32, f32::max), 1.0);
    }
}
