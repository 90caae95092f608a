mod common;

use common::random_instance;
use pairwise_core::data::{Dataset, LatentScores};
use pairwise_core::graph::ComparisonGraph;
use pairwise_core::inference::{
    asymptotic_variance, benjamini_hochberg, confidence_interval, individual_error_bound, plugin_variance, test_report,
    two_sided_p, vertex_report, z_test_difference, VarianceEstimate, VarianceSource,
};
use pairwise_core::mle::{fit, FitOptions};
use pairwise_core::model::{ModelSpec, PairwiseModel};
use pairwise_core::normal;
use pairwise_core::Error;
use proptest::prelude::*;

fn zeros(n: usize) -> LatentScores {
    LatentScores::raw(vec![0.0; n])
}

#[test]
fn cardinal_variance_is_sigma_squared_over_degree() {
    let m = ModelSpec::paired_cardinal(2.0).unwrap();
    let g = ComparisonGraph::from_pairs(5, [(0, 1), (0, 2), (0, 3), (1, 2), (3, 4)]).unwrap();
    let u = LatentScores::raw(vec![0.9, -0.3, 0.1, 2.0, -1.7]);
    let rho = asymptotic_variance(&m, &g, &u).unwrap();
    for i in 0..5 {
        assert_eq!(rho.rho[i], 4.0 / g.degree(i).unwrap() as f64);
    }
    assert_eq!(rho.source, VarianceSource::Truth);
}

#[test]
fn bt_complete_three() {
    let rho = asymptotic_variance(&ModelSpec::bradley_terry(), &ComparisonGraph::complete(3), &zeros(3)).unwrap();
    assert_eq!(rho.rho, vec![2.0; 3]);
}

#[test]
fn isolated_vertex_is_flagged() {
    let g = ComparisonGraph::from_pairs(3, [(0, 1)]).unwrap();
    let rho = asymptotic_variance(&ModelSpec::bradley_terry(), &g, &zeros(3)).unwrap();
    assert!(rho.rho[2].is_infinite());
    assert_eq!(rho.isolated(), vec![2]);
    let report = vertex_report(&zeros(3), &rho, 0.05).unwrap();
    assert!(report[2].ci_lo.is_infinite() && report[2].ci_hi.is_infinite());
    assert!(matches!(
        z_test_difference(0, 2, &zeros(3), &rho),
        Err(Error::IsolatedVertex(2))
    ));
}

fn single_outcome_data(model: &ModelSpec, g: ComparisonGraph, x: f64) -> Dataset {
    let outcomes = vec![vec![x]; g.edge_count()];
    Dataset::new(g, outcomes, model.support().clone()).unwrap()
}

#[test]
fn plugin_examples() {
    let bt = ModelSpec::bradley_terry();
    let star = ComparisonGraph::from_pairs(5, [(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
    let d = single_outcome_data(&bt, star, 1.0);
    let rho = plugin_variance(&bt, &d, &zeros(5)).unwrap();
    assert_eq!(rho.rho[0], 1.0);
    assert_eq!(rho.source, VarianceSource::PlugIn);

    let rk = ModelSpec::rao_kupper(2.0).unwrap();
    let d = single_outcome_data(&rk, ComparisonGraph::from_pairs(2, [(0, 1)]).unwrap(), 0.0);
    let rho = plugin_variance(&rk, &d, &zeros(2)).unwrap();
    for r in rho.rho {
        assert!((r - 3.375).abs() < 1e-13);
    }
}

#[test]
fn plugin_at_truth_matches_asymptotic() {
    let m = ModelSpec::davidson(1.0).unwrap();
    let (d, u) = random_instance(&m, 10, 3);
    let u = LatentScores::raw(u);
    let a = asymptotic_variance(&m, d.graph(), &u).unwrap();
    let p = plugin_variance(&m, &d, &u).unwrap();
    assert_eq!(a.rho, p.rho);
}

#[test]
fn multiplicity_weights_information() {
    let bt = ModelSpec::bradley_terry();
    let g = ComparisonGraph::from_edges(2, [(0, 1, 4)]).unwrap();
    assert_eq!(asymptotic_variance(&bt, &g, &zeros(2)).unwrap().rho, vec![1.0, 1.0]);
}

#[test]
fn cardinal_plugin_ignores_estimate() {
    let m = ModelSpec::paired_cardinal(2.0).unwrap();
    let (d, _) = random_instance(&m, 10, 8);
    let a = plugin_variance(&m, &d, &LatentScores::raw(vec![0.0; 10])).unwrap();
    let b = plugin_variance(
        &m,
        &d,
        &LatentScores::raw((0..10).map(|k| k as f64 * 0.7 - 3.0).collect()),
    )
    .unwrap();
    assert_eq!(a.rho, b.rho);
}

#[test]
fn plugin_is_continuous() {
    // ties keep the estimate finite on small random graphs
    let rk = ModelSpec::rao_kupper(2.0).unwrap();
    let (d, _) = random_instance(&rk, 10, 21);
    let r = fit(&rk, &d, &FitOptions::default());
    assert!(r.converged(), "{:?}", r.status);
    let base = plugin_variance(&rk, &d, &r.u_hat).unwrap();
    let nudged: Vec<f64> = r
        .u_hat
        .values()
        .iter()
        .enumerate()
        .map(|(k, u)| u + 1e-6 * (k as f64 - 4.5) / 4.5)
        .collect();
    let moved = plugin_variance(&rk, &d, &LatentScores::raw(nudged)).unwrap();
    for (a, b) in base.rho.iter().zip(&moved.rho) {
        assert!((a - b).abs() <= 1e-4 * a);
    }
}

#[test]
fn interval_examples() {
    let (lo, hi) = confidence_interval(0.0, 0.04, 0.05).unwrap();
    assert!((lo + 0.391_993).abs() < 5e-7 && (hi - 0.391_993).abs() < 5e-7);
    let (lo1, hi1) = confidence_interval(1.0, 0.04, 0.05).unwrap();
    assert!(((lo1 + hi1) / 2.0 - 1.0).abs() < 1e-15);
    assert!(((hi1 - lo1) - (hi - lo)).abs() < 1e-15);
    let (lo, hi) = confidence_interval(0.0, 0.25, 0.32).unwrap();
    // Φ⁻¹(0.84) to 15 digits from an independent high-precision evaluation
    assert!(((hi - lo) / 2.0 - 0.5 * 0.994_457_883_209_753).abs() < 1e-12);
    assert!(matches!(
        confidence_interval(0.0, 0.04, -0.1),
        Err(Error::InvalidAlpha(_))
    ));
    assert!(confidence_interval(0.0, 0.0, 0.05).is_err());
}

#[test]
fn critical_value() {
    assert!((normal::two_sided_critical(0.05) - 1.959_964).abs() < 5e-7);
}

fn published() -> (LatentScores, VarianceEstimate) {
    let u = LatentScores::raw(vec![3.235, 3.214, 3.129, 2.872]);
    let sd = [0.229f64, 0.203, 0.179, 0.196];
    (
        u,
        VarianceEstimate::external(sd.iter().map(|s| s * s).collect()).unwrap(),
    )
}

#[test]
fn atp_p_values() {
    let (u, rho) = published();
    let p: Vec<f64> = (0..3)
        .map(|i| z_test_difference(i, 3, &u, &rho).unwrap().p_value)
        .collect();
    for (got, want) in p.iter().zip([0.229, 0.226, 0.334]) {
        assert!((got - want).abs() <= 0.002, "{got} vs {want}");
    }
    assert!(benjamini_hochberg(&p, 0.05).unwrap().is_empty());
    assert!(benjamini_hochberg(&[0.229, 0.226, 0.334], 0.05).unwrap().is_empty());
    let report = test_report(&[(0, 3), (1, 3), (2, 3)], &u, &rho, 0.05, true).unwrap();
    assert!(report.iter().all(|t| !t.rejected));
}

#[test]
fn z_test_edge_cases() {
    let (u, rho) = published();
    assert!(z_test_difference(1, 1, &u, &rho).is_err());
    assert!(z_test_difference(0, 9, &u, &rho).is_err());
    let same = LatentScores::raw(vec![1.0; 4]);
    let t = z_test_difference(0, 1, &same, &rho).unwrap();
    assert_eq!((t.statistic, t.p_value), (0.0, 1.0));
}

#[test]
fn bh_examples() {
    assert_eq!(benjamini_hochberg(&[0.01, 0.02, 0.04], 0.05).unwrap(), vec![0, 1, 2]);
    assert!(benjamini_hochberg(&[0.9], 0.05).unwrap().is_empty());
    assert!(matches!(benjamini_hochberg(&[0.1], 0.0), Err(Error::InvalidAlpha(_))));
}

#[test]
fn error_bound_examples() {
    let e = std::f64::consts::E;
    assert!((individual_error_bound(3.0, 3.0, e, 1, 1.0).unwrap() - 1.0).abs() < 1e-15);
    assert!((individual_error_bound(3.0, 3.0, e, 4, 1.0).unwrap() - 0.5).abs() < 1e-15);
    let bounds: Vec<f64> = (1..20)
        .map(|d| individual_error_bound(1.5, 0.7, 100.0, d, 2.0).unwrap())
        .collect();
    assert!(bounds.windows(2).all(|w| w[1] < w[0]));
    assert!(matches!(
        individual_error_bound(1.0, 1.0, e, 0, 1.0),
        Err(Error::ZeroDegree)
    ));
}

proptest! {
    #[test]
    fn z_test_is_antisymmetric(u in prop::collection::vec(-3.0..3.0f64, 4), r in prop::collection::vec(0.01..2.0f64, 4), i in 0usize..4, j in 0usize..4) {
        prop_assume!(i != j);
        let u = LatentScores::raw(u);
        let rho = VarianceEstimate::external(r).unwrap();
        let a = z_test_difference(i, j, &u, &rho).unwrap();
        let b = z_test_difference(j, i, &u, &rho).unwrap();
        prop_assert_eq!(a.statistic, -b.statistic);
        prop_assert_eq!(a.p_value, b.p_value);
        prop_assert!((a.p_value - 2.0 * (1.0 - normal::cdf(a.statistic.abs()))).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a.p_value));
    }

    #[test]
    fn bh_contains_bonferroni(p in prop::collection::vec(0.0..1.0f64, 1..20), alpha in 0.001..0.5f64) {
        let bh = benjamini_hochberg(&p, alpha).unwrap();
        let m = p.len() as f64;
        for (k, &pk) in p.iter().enumerate() {
            if pk <= alpha / m {
                prop_assert!(bh.contains(&k));
            }
        }
        // every rejection is no larger than the largest rejected p-value's threshold
        let uncorrected = p.iter().filter(|&&x| x <= alpha).count();
        prop_assert!(bh.len() <= uncorrected);
    }

    #[test]
    fn p_value_is_monotone_in_z(a in 0.0..8.0f64, b in 0.0..8.0f64) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(two_sided_p(hi) <= two_sided_p(lo));
    }
}
