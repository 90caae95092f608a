use pairwise_core::data::{load_csv, map_match_scores, read_csv, sample_outcomes, LatentScores};
use pairwise_core::graph::{sample_graph, ComparisonGraph, GraphSamplerConfig, PairScheme, ProbabilityRule};
use pairwise_core::model::{ModelSpec, OutcomeSupport, PairwiseModel};
use pairwise_core::Error;
use proptest::prelude::*;

fn config(n: usize, p: f64, q: f64, seed: u64) -> GraphSamplerConfig {
    GraphSamplerConfig::new(n, p, q, seed)
}

#[test]
fn degenerate_probabilities() {
    assert_eq!(sample_graph(&config(4, 1.0, 1.0, 0)).unwrap().edge_count(), 6);
    assert_eq!(sample_graph(&config(2, 0.0, 0.0, 0)).unwrap().edge_count(), 0);
    for (p, q) in [(0.5, 0.2), (-0.1, 0.5), (0.2, 1.5)] {
        assert!(matches!(
            sample_graph(&config(5, p, q, 0)),
            Err(Error::InvalidProbability { .. })
        ));
    }
}

#[test]
fn edge_counts_are_binomial() {
    // Binomial(499500, 0.1): mean 49950, sd ≈ 212.0
    let sd = (499_500.0f64 * 0.1 * 0.9).sqrt();
    for seed in 0..20 {
        let m = sample_graph(&config(1000, 0.1, 0.1, seed)).unwrap().edge_count() as f64;
        assert!((m - 49_950.0).abs() < 4.0 * sd, "seed {seed}: {m}");
    }
}

#[test]
fn sparse_regime_is_connected() {
    let n = 500;
    let p = (n as f64).powf(-0.5);
    let q = p * (n as f64).ln();
    for seed in 0..20 {
        let g = sample_graph(&config(n, p, q, seed)).unwrap();
        assert!(g.is_connected(), "seed {seed}");
    }
}

#[test]
fn per_edge_marginal() {
    // one fixed pair over many seeds, constant-p rule
    let (n, p, trials) = (6, 0.3, 10_000);
    let mut hits = 0;
    for seed in 0..trials {
        let cfg = GraphSamplerConfig {
            rule: ProbabilityRule::ConstantP,
            ..config(n, p, 0.8, seed)
        };
        hits += usize::from(sample_graph(&cfg).unwrap().edge_index(2, 4).is_some());
    }
    let mean = trials as f64 * p;
    let sd = (trials as f64 * p * (1.0 - p)).sqrt();
    assert!((hits as f64 - mean).abs() < 4.0 * sd, "{hits}");
}

#[test]
fn ordered_union_edge_rate() {
    // P(edge) = 1 − (1 − p)² for constant p
    let (n, p) = (400, 0.1);
    let cfg = GraphSamplerConfig {
        rule: ProbabilityRule::ConstantP,
        scheme: PairScheme::OrderedUnion,
        ..config(n, p, p, 11)
    };
    let pairs = (n * (n - 1) / 2) as f64;
    let rate = 1.0 - (1.0 - p) * (1.0 - p);
    let m = sample_graph(&cfg).unwrap().edge_count() as f64;
    assert!((m - pairs * rate).abs() < 4.0 * (pairs * rate * (1.0 - rate)).sqrt());
}

#[test]
fn neighborhoods_and_connectivity() {
    let star = ComparisonGraph::from_pairs(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
    assert_eq!(star.neighborhood(0).unwrap(), vec![1, 2, 3]);
    assert_eq!(star.degree(0).unwrap(), 3);
    let lonely = ComparisonGraph::from_pairs(3, [(0, 1)]).unwrap();
    assert!(lonely.neighborhood(2).unwrap().is_empty());
    assert_eq!(lonely.degree(2).unwrap(), 0);
    assert_eq!(ComparisonGraph::complete(4).neighborhood(2).unwrap(), vec![0, 1, 3]);
    assert!(matches!(
        star.neighborhood(4),
        Err(Error::VertexOutOfRange { vertex: 4, n: 4 })
    ));
    assert!(ComparisonGraph::from_pairs(3, [(0, 1), (1, 2)]).unwrap().is_connected());
    assert!(!ComparisonGraph::from_pairs(2, []).unwrap().is_connected());
}

proptest! {
    #[test]
    fn sampling_is_reproducible_and_handshakes(seed in any::<u64>(), n in 2usize..60, p in 0.0..1.0f64, w in 0.0..1.0f64) {
        let q = p + (1.0 - p) * w;
        let a = sample_graph(&config(n, p, q, seed)).unwrap();
        let b = sample_graph(&config(n, p, q, seed)).unwrap();
        prop_assert_eq!(a.edges(), b.edges());
        let degree_sum: usize = (0..n).map(|i| a.degree(i).unwrap()).sum();
        prop_assert_eq!(degree_sum, 2 * a.edge_count());
        for i in 0..n {
            for j in a.neighborhood(i).unwrap() {
                prop_assert!(a.neighborhood(j).unwrap().contains(&i));
            }
        }
    }
}

#[test]
fn cardinal_outcome_moments() {
    let m = ModelSpec::paired_cardinal(2.0).unwrap();
    let g = ComparisonGraph::from_pairs(2, [(0, 1)]).unwrap();
    let u = LatentScores::raw(vec![0.0, 0.0]);
    let draws: Vec<f64> = (0..10_000)
        .map(|s| sample_outcomes(&m, &u, &g, s).unwrap().edge_outcomes(0)[0])
        .collect();
    let mean = draws.iter().sum::<f64>() / 1e4;
    let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 9_999.0;
    assert!(mean.abs() < 4.0 * 2.0 / 100.0, "{mean}");
    assert!((var - 4.0).abs() < 0.4, "{var}");
}

#[test]
fn bt_outcome_frequency() {
    let m = ModelSpec::bradley_terry();
    let g = ComparisonGraph::from_pairs(2, [(0, 1)]).unwrap();
    let u = LatentScores::raw(vec![1.0, -1.0]);
    let wins = (0..10_000)
        .filter(|&s| sample_outcomes(&m, &u, &g, s).unwrap().edge_outcomes(0)[0] == 1.0)
        .count() as f64;
    let p = 0.880_797_077_977_882_3;
    assert!((wins / 1e4 - p).abs() < 4.0 * (p * (1.0 - p) / 1e4).sqrt());
}

/// Chi-square critical value at level 0.001 for 1, 2, 3 degrees of freedom.
const CHI2_999: [f64; 3] = [10.828, 13.816, 16.266];

#[test]
fn finite_outcomes_follow_the_law() {
    let models = [
        ModelSpec::bradley_terry(),
        ModelSpec::thurstone_mosteller(),
        ModelSpec::rao_kupper(2.0).unwrap(),
        ModelSpec::davidson(1.0).unwrap(),
        ModelSpec::cumulative_link4(2.32).unwrap(),
    ];
    let draws = 10_000;
    for m in &models {
        let support = m.support().values().unwrap().to_vec();
        for delta in [-2.0, -1.0, 0.0, 1.0, 2.0] {
            let g = ComparisonGraph::from_edges(2, [(0, 1, draws)]).unwrap();
            let u = LatentScores::raw(vec![delta, 0.0]);
            let d = sample_outcomes(m, &u, &g, 77).unwrap();
            let stat: f64 = support
                .iter()
                .map(|&x| {
                    let observed = d.edge_outcomes(0).iter().filter(|&&v| v == x).count() as f64;
                    let expected = draws as f64 * m.density(x, delta);
                    (observed - expected).powi(2) / expected
                })
                .sum();
            assert!(stat < CHI2_999[support.len() - 2], "{m} Δ={delta}: χ²={stat}");
        }
    }
}

#[test]
fn antisymmetric_access() {
    let m = ModelSpec::rao_kupper(2.0).unwrap();
    let g = ComparisonGraph::from_edges(3, [(0, 1, 2), (1, 2, 1)]).unwrap();
    let (u, _) = LatentScores::centered(vec![0.3, -0.2, 0.5]);
    let d = sample_outcomes(&m, &u, &g, 5).unwrap();
    for (a, b) in [(0, 1), (1, 2)] {
        let fwd = d.outcomes(a, b).unwrap();
        let back = d.outcomes(b, a).unwrap();
        assert!(fwd.iter().zip(&back).all(|(x, y)| x + y == 0.0));
    }
    assert!(d.outcomes(0, 2).is_none());
    assert!(matches!(
        sample_outcomes(&m, &LatentScores::raw(vec![0.0]), &g, 0),
        Err(Error::DimensionMismatch { expected: 3, got: 1 })
    ));
}

fn bt_support() -> OutcomeSupport {
    ModelSpec::bradley_terry().support().clone()
}

#[test]
fn csv_examples() {
    let d = read_csv("a,b,1\nb,c,-1\n".as_bytes(), &bt_support()).unwrap();
    assert_eq!(d.labels, ["a", "b", "c"]);
    assert_eq!(d.dataset.n(), 3);
    assert_eq!(d.dataset.graph().edge_count(), 2);
    assert_eq!(d.dataset.outcomes(0, 1).unwrap(), vec![1.0]);
    assert_eq!(d.dataset.outcomes(1, 2).unwrap(), vec![-1.0]);
    assert!(matches!(
        read_csv("a,a,1\n".as_bytes(), &bt_support()),
        Err(Error::SelfComparison(_))
    ));
    assert!(matches!(
        read_csv("a,b,3\n".as_bytes(), &bt_support()),
        Err(Error::OutcomeNotInSupport(_))
    ));
    assert!(matches!(
        read_csv("a,b\n".as_bytes(), &bt_support()),
        Err(Error::Parse { .. })
    ));
    assert!(matches!(
        read_csv("a,b,x\n".as_bytes(), &bt_support()),
        Err(Error::Parse { .. })
    ));
}

#[test]
fn csv_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("games.csv");
    let text = "i,j,outcome\nx,y,1\nx,y,-1\ny,z,1\nz,x,-1\n";
    std::fs::write(&path, text).unwrap();
    let loaded = load_csv(&path, &bt_support()).unwrap();
    assert_eq!(loaded.dataset.comparison_count(), 4);
    assert_eq!(loaded.dataset.graph().edges()[0].multiplicity, 2);
    let mut out = Vec::new();
    loaded.dataset.write_csv(&loaded.labels, &mut out).unwrap();
    let again = read_csv(out.as_slice(), &bt_support()).unwrap();
    let mut out2 = Vec::new();
    again.dataset.write_csv(&again.labels, &mut out2).unwrap();
    assert_eq!(out, out2);
    assert_eq!(
        again.dataset.outcomes(0, 2).unwrap(),
        loaded.dataset.outcomes(0, 2).unwrap()
    );
}

#[test]
fn match_scores() {
    assert_eq!(map_match_scores("2:0").unwrap(), 2.0);
    assert_eq!(map_match_scores("2:1").unwrap(), 1.0);
    assert_eq!(map_match_scores("1:2").unwrap(), -1.0);
    assert_eq!(map_match_scores("0:2").unwrap(), -2.0);
    assert!(matches!(map_match_scores("2:2"), Err(Error::UnrecognizedScore(_))));
}

#[test]
fn latent_scores() {
    let (u, shift) = LatentScores::centered(vec![1.0, 2.0, 6.0]);
    assert_eq!(shift, 3.0);
    assert!(u.is_centered());
    assert!(u.values().iter().sum::<f64>().abs() < 1e-12);
    assert_eq!(u.dynamic_range(), 5.0);
}
