//! Independent oracles shared by the integration tests. Nothing here calls the
//! closed forms under test; derivatives come from finite differences of the
//! density and integrals from plain composite rules.
#![allow(dead_code)]

use pairwise_core::data::{sample_outcomes, Dataset, LatentScores};
use pairwise_core::graph::ComparisonGraph;
use pairwise_core::model::{ModelSpec, OutcomeSupport, PairwiseModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn all_models() -> Vec<ModelSpec> {
    vec![
        ModelSpec::bradley_terry(),
        ModelSpec::thurstone_mosteller(),
        ModelSpec::rao_kupper(2.0).unwrap(),
        ModelSpec::davidson(1.0).unwrap(),
        ModelSpec::cumulative_link4(2.32).unwrap(),
        ModelSpec::paired_cardinal(2.0).unwrap(),
    ]
}

/// Five-point central difference of `f` at `y`.
pub fn stencil5(f: impl Fn(f64) -> f64, y: f64, h: f64) -> f64 {
    (f(y - 2.0 * h) - 8.0 * f(y - h) + 8.0 * f(y + h) - f(y + 2.0 * h)) / (12.0 * h)
}

/// Σ_x (∂_y f)²/f over finite support, or ∫ (∂_y f)²/f dx by composite
/// Simpson over ±14σ for the real line.
pub fn fisher_oracle(model: &ModelSpec, y: f64) -> f64 {
    let term = |x: f64| {
        let f = model.density(x, y);
        if f == 0.0 {
            return 0.0;
        }
        let df = stencil5(|t| model.density(x, t), y, 1e-3);
        df * df / f
    };
    match model.support() {
        OutcomeSupport::Finite(v) => v.iter().map(|&x| term(x)).sum(),
        OutcomeSupport::RealLine => {
            let s = model.spread();
            let (lo, hi) = (y - 14.0 * s, y + 14.0 * s);
            let panels = 4000;
            let h = (hi - lo) / panels as f64;
            let mut acc = term(lo) + term(hi);
            for k in 1..panels {
                acc += if k % 2 == 1 { 4.0 } else { 2.0 } * term(lo + k as f64 * h);
            }
            acc * h / 3.0
        }
    }
}

/// Outcomes at which pointwise checks are made.
pub fn probe_outcomes(model: &ModelSpec) -> Vec<f64> {
    match model.support() {
        OutcomeSupport::Finite(v) => v.clone(),
        OutcomeSupport::RealLine => vec![-3.0, -1.0, -0.2, 0.0, 0.7, 2.5],
    }
}

/// Random connected instance with n vertices, edge probability 0.5 and
/// multiplicities in 1..=3.
pub fn random_instance(model: &ModelSpec, n: usize, seed: u64) -> (Dataset, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < 0.5 {
                    edges.push((i, j, rng.random_range(1..=3)));
                }
            }
        }
        let graph = ComparisonGraph::from_edges(n, edges).unwrap();
        if !graph.is_connected() {
            continue;
        }
        let (u, _) = LatentScores::uniform(n, 1.5, &mut rng);
        let data = sample_outcomes(model, &u, &graph, rng.random()).unwrap();
        let probe: Vec<f64> = (0..n).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
        return (data, probe);
    }
}

/// Grid maximizer of `l` over the sum-zero subspace, parametrized by the
/// first n−1 coordinates. Coarse pass at step 0.01 over [−range, range], then
/// a fine pass at step 0.001 within ±0.02 of the coarse winner.
pub fn grid_search(n: usize, range: f64, l: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let embed = |free: &[f64]| {
        let mut u = free.to_vec();
        u.push(-free.iter().sum::<f64>());
        u
    };
    let search = |centre: &[f64], half: f64, step: f64| -> Vec<f64> {
        let k = (half / step).round() as i64;
        let dims = n - 1;
        let mut best = (f64::NEG_INFINITY, centre.to_vec());
        let mut idx = vec![-k; dims];
        loop {
            let free: Vec<f64> = centre.iter().zip(&idx).map(|(c, &i)| c + i as f64 * step).collect();
            let v = l(&embed(&free));
            if v > best.0 {
                best = (v, free);
            }
            let mut d = 0;
            loop {
                if d == dims {
                    return best.1;
                }
                idx[d] += 1;
                if idx[d] <= k {
                    break;
                }
                idx[d] = -k;
                d += 1;
            }
        }
    };
    let coarse = search(&vec![0.0; n - 1], range, 0.01);
    embed(&search(&coarse, 0.02, 0.001))
}

pub fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
