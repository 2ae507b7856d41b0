mod common;

use covsel::bounds::feasible_region_curve;
use covsel::generators::{matrix_to_csv, parse_matrix_csv, write_matrix_csv, load_matrix_csv};
use covsel::graph::EdgeSet;
use covsel::{analyze, auc_exact, chow_liu_tree, CamSpectrum, QuadratureConfig};
use proptest::prelude::*;

use common::*;

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn report_invariants_hold(seed in any::<u64>(), n in 3usize..9, extra in 1usize..8) {
        let mut r = rng(seed);
        let sigma = random_correlation(n, n + extra, &mut r);
        let tree = random_tree(n, &mut r);
        let rep = analyze(&sigma, tree.edge_set(), &cfg()).unwrap();

        prop_assert!(rep.kl >= 0.0 && rep.reverse_kl >= 0.0);
        prop_assert!((rep.jeffreys - rep.kl - rep.reverse_kl).abs() <= 1e-10 * (1.0 + rep.jeffreys));
        prop_assert!((rep.jeffreys - 0.5 * rep.alphas.iter().sum::<f64>()).abs() <= 1e-9 * (1.0 + rep.jeffreys));
        // tree models reproduce the diagonal, so tr Δ = n
        prop_assert!((rep.cam_trace - n as f64).abs() < 1e-8);
        prop_assert!(rep.auc >= 0.5 && rep.auc <= 1.0);
        prop_assert!((rep.auc + rep.one_minus_auc - 1.0).abs() < 1e-12);
        prop_assert!(rep.auc_lower <= rep.auc + 1e-9 && rep.auc <= rep.auc_upper + 1e-9);

        let oracle = gaussian_kl(sigma.as_matrix(), &{
            let m = covsel::covariance_select(&sigma, tree.edge_set()).unwrap();
            m.base().as_matrix().clone()
        });
        prop_assert!((rep.kl - oracle).abs() < 1e-9 * (1.0 + oracle));
    }

    #[test]
    fn chow_liu_beats_random_trees(seed in any::<u64>(), n in 3usize..8) {
        let mut r = rng(seed);
        let sigma = random_correlation(n, n + 2, &mut r);
        let best = analyze(&sigma, chow_liu_tree(&sigma).unwrap().edge_set(), &cfg()).unwrap().kl;
        for _ in 0..5 {
            let t = random_tree(n, &mut r);
            let kl = analyze(&sigma, t.edge_set(), &cfg()).unwrap().kl;
            prop_assert!(best <= kl + 1e-10, "{} > {}", best, kl);
        }
    }

    #[test]
    fn auc_grows_with_each_alpha(alphas in prop::collection::vec(0.0f64..20.0, 1..6), bump in 0.01f64..5.0, k in 0usize..6) {
        let k = k % alphas.len();
        let base = auc_exact(&CamSpectrum::from_alphas(&alphas).unwrap(), &cfg()).unwrap();
        let mut more = alphas.clone();
        more[k] += bump;
        let bigger = auc_exact(&CamSpectrum::from_alphas(&more).unwrap(), &cfg()).unwrap();
        prop_assert!(bigger >= base - 1e-10, "{} < {}", bigger, base);
    }

    #[test]
    fn feasible_curve_is_monotone(a in 1e-4f64..50.0, step in 1e-3f64..1.0) {
        let (x0, d0) = feasible_region_curve(a).unwrap();
        let (x1, d1) = feasible_region_curve(a * (1.0 + step)).unwrap();
        prop_assert!(x1 >= x0 && d1 >= d0);
        prop_assert!(x0 > 0.5 && x0 < 1.0 && d0 > 0.0);
    }

    #[test]
    fn matrix_csv_round_trips(seed in any::<u64>(), n in 1usize..7) {
        let sigma = random_correlation(n, n + 3, &mut rng(seed));
        let back = parse_matrix_csv(&matrix_to_csv(sigma.as_matrix()), false).unwrap();
        prop_assert_eq!(back.as_matrix(), sigma.as_matrix());
    }

    #[test]
    fn edge_list_round_trips(seed in any::<u64>(), n in 2usize..10) {
        let tree = random_tree(n, &mut rng(seed));
        let back = EdgeSet::parse(&tree.edge_set().to_text(), n).unwrap();
        prop_assert_eq!(back.canonical(), tree.canonical());
    }
}

#[test]
fn matrix_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sigma.csv");
    let sigma = random_correlation(6, 9, &mut rng(4));
    write_matrix_csv(&path, &sigma).unwrap();
    assert_eq!(load_matrix_csv(&path, false).unwrap(), sigma);
    assert!(load_matrix_csv(&dir.path().join("missing.csv"), false).is_err());
}

#[test]
fn covariance_input_needs_normalize() {
    let text = "4,2\n2,9\n";
    assert!(parse_matrix_csv(text, false).is_err());
    let m = parse_matrix_csv(text, true).unwrap();
    assert!((m.get(0, 1) - 2.0 / 6.0).abs() < 1e-15);
}
