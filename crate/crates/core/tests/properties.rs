mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;

use common::*;
use l2graph::graph::{build_gaussian_graph, build_l2_graph, build_lle_graph, l2_coefficients, threshold_topk};
use l2graph::matrix_io::{load_graph, load_matrix, save_graph, save_matrix};
use l2graph::metrics::{accuracy, nmi};
use l2graph::spectral::{kmeans, kmeans_restart};
use l2graph::synth::{CorruptionKind, CorruptionSpec};
use l2graph::theory::{first_principal_angle, optimal_k};
use l2graph::{DataMatrix, Orientation};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 48,
        ..ProptestConfig::default()
    }
}

prop_compose! {
    fn data_matrix()(m in 2usize..8, n in 4usize..20, seed in any::<u64>()) -> DataMatrix {
        DataMatrix::new(gaussian(&mut rng(seed), m, n), "p").unwrap()
    }
}

fn labels(max_len: usize, clusters: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..clusters, 1..=max_len)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn every_builder_yields_a_valid_graph(data in data_matrix(), k_frac in 0.0f64..1.0) {
        let n = data.len();
        let k = 1 + ((n - 2) as f64 * k_frac) as usize;
        for g in [
            build_l2_graph(&data, 0.1, k).unwrap(),
            build_gaussian_graph(&data, 1.0, k).unwrap(),
            build_lle_graph(&data, k).unwrap(),
        ] {
            let w = g.weights();
            prop_assert_eq!(w, &w.transpose());
            prop_assert!(w.iter().all(|v| v.is_finite() && *v >= 0.0));
            prop_assert!((0..n).all(|i| w[(i, i)] == 0.0));
        }
    }

    #[test]
    fn topk_supports_are_nested(data in data_matrix()) {
        let coef = l2_coefficients(&data, 0.1).unwrap();
        let n = data.len();
        let mut prev = threshold_topk(&coef, 0).unwrap().values;
        prop_assert_eq!(prev.iter().filter(|v| **v != 0.0).count(), 0);
        for k in 1..n {
            let next = threshold_topk(&coef, k).unwrap().values;
            prop_assert!(prev.iter().zip(next.iter()).all(|(a, b)| *a == 0.0 || *b == *a));
            prop_assert!(next.column_iter().all(|c| c.iter().filter(|v| **v != 0.0).count() <= k));
            prev = next;
        }
    }

    #[test]
    fn coefficients_are_scale_invariant(data in data_matrix(), alpha in 0.1f64..10.0, lambda in 0.01f64..2.0) {
        let scaled = DataMatrix::new(data.values() * alpha, "s").unwrap();
        let a = l2_coefficients(&data, lambda).unwrap().values;
        let b = l2_coefficients(&scaled, alpha * alpha * lambda).unwrap().values;
        prop_assert!((&a - &b).norm() <= 1e-8 * a.norm().max(1.0));
    }

    #[test]
    fn nmi_is_symmetric_and_bounded(a in labels(12, 4), seed in any::<u64>()) {
        let b: Vec<usize> = a.iter().enumerate().map(|(i, x)| (x + (seed as usize >> (i % 8))) % 3).collect();
        let (ab, ba) = (nmi(&a, &b).unwrap(), nmi(&b, &a).unwrap());
        prop_assert!((ab - ba).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(nmi(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn accuracy_ignores_label_names(a in labels(12, 4), b in labels(12, 4), shift in 1usize..4) {
        let n = a.len().min(b.len());
        let (a, b) = (&a[..n], &b[..n]);
        let renamed: Vec<usize> = a.iter().map(|x| (x + shift) % 4 + 10).collect();
        prop_assert_eq!(accuracy(a, b).unwrap(), accuracy(&renamed, b).unwrap());
        prop_assert_eq!(accuracy(a, b).unwrap(), brute_force_accuracy(a, b));
    }

    #[test]
    fn principal_angle_is_symmetric_and_basis_free(seed in any::<u64>(), ra in 1usize..4, rb in 1usize..4) {
        let mut r = rng(seed);
        let a = gaussian(&mut r, 9, ra);
        let b = gaussian(&mut r, 9, rb);
        let mix = gaussian(&mut r, ra, ra);
        let theta = first_principal_angle(&a, &b).unwrap();
        prop_assert!((theta - first_principal_angle(&b, &a).unwrap()).abs() <= 1e-9);
        prop_assert!((theta - first_principal_angle(&(&a * mix), &b).unwrap()).abs() <= 1e-8);
        prop_assert!((0.0..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(&theta));
    }

    #[test]
    fn optimal_k_matches_exhaustive_search(mut sigmas in prop::collection::vec(0.0f64..4.0, 0..10), alpha in 0.0f64..50.0) {
        sigmas.sort_by(|a, b| b.total_cmp(a));
        prop_assert_eq!(optimal_k(&sigmas, alpha).unwrap(), brute_force_k(&sigmas, alpha));
    }

    #[test]
    fn matrices_and_graphs_round_trip(data in data_matrix(), rows in any::<bool>()) {
        let dir = tempfile::tempdir().unwrap();
        let orientation = if rows { Orientation::SamplesAsRows } else { Orientation::SamplesAsColumns };
        let labels: Vec<usize> = (0..data.len()).map(|i| i % 3).collect();
        let labelled = data.clone().with_labels(&labels).unwrap();
        let path = dir.path().join("x.csv");
        save_matrix(&labelled, &path, orientation, &["note".into()]).unwrap();
        let back = load_matrix(&path, orientation).unwrap();
        prop_assert_eq!(back.values(), data.values());
        prop_assert_eq!(back.labels(), Some(&labels[..]));

        let graph = build_l2_graph(&data, 0.1, 2.min(data.len() - 1)).unwrap();
        let gpath = dir.path().join("g.csv");
        save_graph(&graph, &gpath).unwrap();
        let loaded = load_graph(&gpath).unwrap();
        prop_assert_eq!(loaded.weights(), graph.weights());
        prop_assert_eq!(loaded.provenance(), graph.provenance());
    }

    #[test]
    fn corruption_commutes_with_column_permutation(data in data_matrix(), seed in any::<u64>(), pixel in any::<bool>()) {
        let n = data.len();
        let values = data.values().map(|v| v.abs().min(3.0));
        let data = DataMatrix::new(values, "c").unwrap();
        let spec = CorruptionSpec {
            kind: if pixel { CorruptionKind::RandomPixel } else { CorruptionKind::Gaussian },
            ratio: 0.4,
            fraction_of_samples: 0.5,
            pixel_max: 3.0,
            seed,
        };
        let perm: Vec<usize> = (0..n).rev().collect();
        let permuted = DataMatrix::new(DMatrix::from_fn(data.dim(), n, |r, c| data.values()[(r, perm[c])]), "p").unwrap();
        let ids: Vec<u64> = perm.iter().map(|&j| j as u64).collect();
        let direct = spec.apply(&data).unwrap();
        let via_perm = spec.apply_with_ids(&permuted, &ids).unwrap();
        for (c, &j) in perm.iter().enumerate() {
            prop_assert_eq!(via_perm.values().column(c), direct.values().column(j));
        }
    }

    #[test]
    fn kmeans_is_no_worse_than_any_restart(seed in any::<u64>(), l in 1usize..4) {
        let points = gaussian(&mut rng(seed), 12, 2);
        let best = kmeans(&points, l, seed).unwrap();
        for r in 0..20 {
            prop_assert!(best.inertia <= kmeans_restart(&points, l, seed, r).unwrap().inertia);
        }
    }
}
