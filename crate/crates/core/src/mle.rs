//! Log-likelihood, its derivatives, and the sum-zero constrained MLE.
//!
//! The Hessian of l(u) = Σ_{(i,j)∈ℰ} log f(X_ij; u_i − u_j) is the negated
//! Laplacian of the graph weighted by −∂_y g(X_ij; u_i − u_j) ≥ 0, so each
//! Newton step is one Laplacian solve on the sum-zero subspace.

use nalgebra::{DMatrix, DVector};
use petgraph::algo::kosaraju_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, LatentScores};
use crate::error::{Error, Result};
use crate::graph::ComparisonGraph;
use crate::model::{OutcomeTrend, PairwiseModel, ThresholdFamily};

/// Systems up to this size are solved by dense Cholesky; larger ones by
/// Jacobi-preconditioned conjugate gradients.
const DENSE_SOLVE_LIMIT: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    #[default]
    Zero,
    Warm(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Stop when ‖∇l‖_∞ ≤ grad_tol.
    pub grad_tol: f64,
    pub max_iter: usize,
    /// Iterates with ‖u‖_∞ above this are declared divergent.
    pub divergence_bound: f64,
    /// Backtracking factor.
    pub shrink: f64,
    /// Armijo sufficient-increase constant.
    pub sufficient_increase: f64,
    pub init: Init,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            grad_tol: 1e-10,
            max_iter: 200,
            divergence_bound: 50.0,
            shrink: 0.5,
            sufficient_increase: 1e-4,
            init: Init::Zero,
        }
    }
}

impl FitOptions {
    pub fn warm(u: Vec<f64>) -> Self {
        Self {
            init: Init::Warm(u),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitStatus {
    Converged,
    /// No finite maximizer: disconnected graph, a subset of subjects that
    /// dominates the rest, or divergent iterates.
    Nonexistent,
    MaxIter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub u_hat: LatentScores,
    pub loglik: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub status: FitStatus,
}

impl FitResult {
    pub fn converged(&self) -> bool {
        self.status == FitStatus::Converged
    }

    pub fn to_record(&self) -> FitRecord {
        FitRecord {
            u_hat: self.u_hat.values().to_vec(),
            loglik: self.loglik,
            iterations: self.iterations,
            status: self.status,
            rho: None,
        }
    }
}

/// JSON form of a fit: `{"u_hat": [...], "loglik": r, "iterations": k, "status": s}`.
///
/// `rho` is optional on input; when present it carries externally supplied
/// variances (for instance published standard errors, squared).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub u_hat: Vec<f64>,
    pub loglik: f64,
    pub iterations: usize,
    pub status: FitStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<Vec<f64>>,
}

fn check_len(data: &Dataset, u: &[f64]) -> Result<()> {
    if u.len() == data.n() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: data.n(),
            got: u.len(),
        })
    }
}

/// l(u), summed over every comparison unit.
pub fn log_likelihood<M: PairwiseModel + ?Sized>(model: &M, data: &Dataset, u: &[f64]) -> Result<f64> {
    check_len(data, u)?;
    Ok(loglik_unchecked(model, data, u))
}

fn loglik_unchecked<M: PairwiseModel + ?Sized>(model: &M, data: &Dataset, u: &[f64]) -> f64 {
    let mut total = 0.0;
    for (k, e) in data.graph().edges().iter().enumerate() {
        let y = u[e.i] - u[e.j];
        for &x in data.edge_outcomes(k) {
            total += model.log_density(x, y);
        }
    }
    total
}

/// ∂_i l(u) = Σ_{j∈δ{i}} g(X_ij; u_i − u_j).
pub fn gradient<M: PairwiseModel + ?Sized>(model: &M, data: &Dataset, u: &[f64]) -> Result<Vec<f64>> {
    check_len(data, u)?;
    let mut grad = vec![0.0; u.len()];
    for (k, e) in data.graph().edges().iter().enumerate() {
        let y = u[e.i] - u[e.j];
        let g: f64 = data.edge_outcomes(k).iter().map(|&x| model.score_terms(x, y).g).sum();
        grad[e.i] += g;
        grad[e.j] -= g;
    }
    Ok(grad)
}

/// Dense Hessian: off-diagonal −∂_y g ≥ 0 on edges, diagonal the negated row sum.
pub fn hessian<M: PairwiseModel + ?Sized>(model: &M, data: &Dataset, u: &[f64]) -> Result<DMatrix<f64>> {
    check_len(data, u)?;
    let weights = edge_weights(model, data, u);
    Ok(negated_laplacian(data.graph(), &weights))
}

/// Per-edge Laplacian weights −Σ ∂_y g(X; u_i − u_j).
fn edge_weights<M: PairwiseModel + ?Sized>(model: &M, data: &Dataset, u: &[f64]) -> Vec<f64> {
    data.graph()
        .edges()
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let y = u[e.i] - u[e.j];
            -data
                .edge_outcomes(k)
                .iter()
                .map(|&x| model.score_terms(x, y).d1)
                .sum::<f64>()
        })
        .collect()
}

/// −L for edge weights w: off-diagonals w_e, rows summing to zero.
pub(crate) fn negated_laplacian(graph: &ComparisonGraph, weights: &[f64]) -> DMatrix<f64> {
    let n = graph.n();
    let mut h = DMatrix::zeros(n, n);
    for (e, &w) in graph.edges().iter().zip(weights) {
        h[(e.i, e.j)] += w;
        h[(e.j, e.i)] += w;
    }
    for i in 0..n {
        let row: f64 = (0..n).filter(|&j| j != i).map(|j| h[(i, j)]).sum();
        h[(i, i)] = -row;
    }
    h
}

/// Whether l has a finite maximizer on the sum-zero subspace.
///
/// Each comparison whose log-density keeps rising (falling) in u_i − u_j only
/// forbids u_j − u_i (u_i − u_j) from growing without bound; outcomes that are
/// unlikely at both extremes pin the difference in both directions. A finite
/// maximizer exists iff the resulting constraint digraph is strongly
/// connected.
pub fn has_finite_maximizer<M: PairwiseModel + ?Sized>(model: &M, data: &Dataset) -> bool {
    let graph = data.graph();
    let n = graph.n();
    if n <= 1 {
        return true;
    }
    if !graph.is_connected() {
        return false;
    }
    if !model.support().is_finite() {
        return true;
    }
    let trends: Vec<(f64, OutcomeTrend)> = model
        .support()
        .values()
        .unwrap()
        .iter()
        .map(|&x| (x, model.outcome_trend(x)))
        .collect();
    let trend_of = |x: f64| {
        trends
            .iter()
            .find(|(v, _)| *v == x)
            .map(|t| t.1)
            .unwrap_or(OutcomeTrend::Bounded)
    };

    let mut dg: DiGraph<(), ()> = DiGraph::with_capacity(n, 2 * graph.edge_count());
    let nodes: Vec<_> = (0..n).map(|_| dg.add_node(())).collect();
    for (k, e) in graph.edges().iter().enumerate() {
        let (mut fwd, mut back) = (false, false);
        for &x in data.edge_outcomes(k) {
            match trend_of(x) {
                OutcomeTrend::Rising => fwd = true,
                OutcomeTrend::Falling => back = true,
                OutcomeTrend::Bounded => {
                    fwd = true;
                    back = true;
                }
            }
        }
        // arc a → b encodes the constraint u_a ≥ u_b along any recession direction
        if fwd {
            dg.add_edge(nodes[e.i], nodes[e.j], ());
        }
        if back {
            dg.add_edge(nodes[e.j], nodes[e.i], ());
        }
    }
    kosaraju_scc(&dg).len() == 1
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn center(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len().max(1) as f64;
    for x in v.iter_mut() {
        *x -= mean;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves L d = r with 1ᵀd = 0 for the weighted Laplacian L; `r` must sum to zero.
fn solve_laplacian(graph: &ComparisonGraph, weights: &[f64], r: &[f64]) -> Option<Vec<f64>> {
    let n = graph.n();
    if n <= DENSE_SOLVE_LIMIT {
        // Pin the null direction with a rank-one term scaled like the diagonal.
        let mut l = -negated_laplacian(graph, weights);
        let scale = (0..n).map(|i| l[(i, i)]).sum::<f64>() / n as f64;
        if !(scale > 0.0) {
            return None;
        }
        l.add_scalar_mut(scale / n as f64);
        let chol = l.cholesky()?;
        let mut d = chol.solve(&DVector::from_column_slice(r)).as_slice().to_vec();
        center(&mut d);
        return Some(d);
    }
    conjugate_gradient(graph, weights, r)
}

fn conjugate_gradient(graph: &ComparisonGraph, weights: &[f64], r0: &[f64]) -> Option<Vec<f64>> {
    let n = graph.n();
    let edges = graph.edges();
    let mut diag = vec![0.0; n];
    for (e, &w) in edges.iter().zip(weights) {
        diag[e.i] += w;
        diag[e.j] += w;
    }
    if diag.iter().any(|&d| !(d > 0.0)) {
        return None;
    }
    let apply = |v: &[f64], out: &mut [f64]| {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (e, &w) in edges.iter().zip(weights) {
            let t = w * (v[e.i] - v[e.j]);
            out[e.i] += t;
            out[e.j] -= t;
        }
    };
    let precondition = |r: &[f64]| -> Vec<f64> {
        let mut z: Vec<f64> = r.iter().zip(&diag).map(|(a, d)| a / d).collect();
        center(&mut z);
        z
    };

    let mut x = vec![0.0; n];
    let mut r = r0.to_vec();
    center(&mut r);
    let target = 1e-12 * dot(&r, &r).sqrt();
    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for _ in 0..(10 * n).max(100) {
        if dot(&r, &r).sqrt() <= target {
            break;
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return None;
        }
        let alpha = rz / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        z = precondition(&r);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    center(&mut x);
    Some(x)
}

/// Sum-zero constrained MLE by damped Newton ascent.
///
/// Each iteration solves the Laplacian system for the Newton direction and
/// backtracks until the Armijo condition holds; if the Newton direction
/// cannot be computed or fails to increase l, a projected gradient step is
/// used instead. Once the predicted increase falls below floating-point
/// resolution of l, full Newton steps are taken without the Armijo test.
pub fn fit<M: PairwiseModel + ?Sized>(model: &M, data: &Dataset, options: &FitOptions) -> FitResult {
    let n = data.n();
    let mut u = match &options.init {
        Init::Zero => vec![0.0; n],
        Init::Warm(v) if v.len() == n => v.clone(),
        Init::Warm(_) => vec![0.0; n],
    };
    center(&mut u);
    let finish = |u: Vec<f64>, loglik: f64, iterations, grad_norm, status| FitResult {
        u_hat: LatentScores::centered(u).0,
        loglik,
        iterations,
        grad_norm,
        status,
    };

    let mut loglik = loglik_unchecked(model, data, &u);
    let mut grad = gradient(model, data, &u).expect("length checked");
    if data.is_empty() || !has_finite_maximizer(model, data) {
        let g = sup_norm(&grad);
        return finish(u, loglik, 0, g, FitStatus::Nonexistent);
    }

    let graph = data.graph();
    for iter in 0..options.max_iter {
        let gnorm = sup_norm(&grad);
        if gnorm <= options.grad_tol {
            return finish(u, loglik, iter, gnorm, FitStatus::Converged);
        }
        let weights = edge_weights(model, data, &u);
        let newton = solve_laplacian(graph, &weights, &grad).filter(|d| dot(&grad, d) > 0.0);

        let mut step = None;
        for direction in newton.iter().chain(std::iter::once(&grad)) {
            let slope = dot(&grad, direction);
            let resolution = 1e-13 * (1.0 + loglik.abs());
            let mut t = 1.0;
            for _ in 0..60 {
                let trial: Vec<f64> = u.iter().zip(direction).map(|(a, d)| a + t * d).collect();
                let l_trial = loglik_unchecked(model, data, &trial);
                let armijo = l_trial >= loglik + options.sufficient_increase * t * slope;
                let flat = slope < resolution && l_trial >= loglik - resolution;
                if l_trial.is_finite() && (armijo || flat) {
                    step = Some((trial, l_trial));
                    break;
                }
                t *= options.shrink;
            }
            if step.is_some() {
                break;
            }
        }

        let Some((mut next, l_next)) = step else {
            return finish(u, loglik, iter, gnorm, FitStatus::MaxIter);
        };
        center(&mut next);
        u = next;
        loglik = l_next;
        if sup_norm(&u) > options.divergence_bound {
            let g = sup_norm(&gradient(model, data, &u).expect("length checked"));
            return finish(u, loglik, iter + 1, g, FitStatus::Nonexistent);
        }
        grad = gradient(model, data, &u).expect("length checked");
    }
    let gnorm = sup_norm(&grad);
    let status = if gnorm <= options.grad_tol {
        FitStatus::Converged
    } else {
        FitStatus::MaxIter
    };
    finish(u, loglik, options.max_iter, gnorm, status)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub theta: f64,
    /// Maximized log-likelihood, `None` when the fit at this θ did not converge.
    pub loglik: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ProfileFit {
    pub theta: f64,
    pub fit: FitResult,
    pub profile: Vec<ProfilePoint>,
}

/// Profile likelihood over a threshold grid: fits û at each θ and keeps the
/// θ with the largest maximized log-likelihood.
pub fn profile_fit_threshold(
    family: ThresholdFamily,
    data: &Dataset,
    theta_grid: &[f64],
    options: &FitOptions,
) -> Result<ProfileFit> {
    if theta_grid.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut best: Option<(f64, FitResult)> = None;
    let mut profile = Vec::with_capacity(theta_grid.len());
    for &theta in theta_grid {
        let model = family.with_theta(theta)?;
        let result = fit(&model, data, options);
        let loglik = result.converged().then_some(result.loglik);
        profile.push(ProfilePoint { theta, loglik });
        if let Some(l) = loglik {
            if best.as_ref().is_none_or(|(_, b)| l > b.loglik) {
                best = Some((theta, result));
            }
        }
    }
    let (theta, fit) = best.ok_or(Error::NoFiniteEstimate)?;
    Ok(ProfileFit { theta, fit, profile })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelSpec, OutcomeSupport};

    fn single_edge(model: &ModelSpec, x: f64) -> Dataset {
        let g = ComparisonGraph::from_pairs(2, [(0, 1)]).unwrap();
        Dataset::new(g, vec![vec![x]], model.support().clone()).unwrap()
    }

    #[test]
    fn bt_single_edge_values() {
        let bt = ModelSpec::bradley_terry();
        let d = single_edge(&bt, 1.0);
        assert!((log_likelihood(&bt, &d, &[0.0, 0.0]).unwrap() - 0.5f64.ln()).abs() < 1e-15);
        assert_eq!(gradient(&bt, &d, &[0.0, 0.0]).unwrap(), vec![0.5, -0.5]);
        let h = hessian(&bt, &d, &[0.0, 0.0]).unwrap();
        assert_eq!(h, DMatrix::from_row_slice(2, 2, &[-0.25, 0.25, 0.25, -0.25]));
        assert!(matches!(
            log_likelihood(&bt, &d, &[0.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn cardinal_loglik_at_zero_residual() {
        let m = ModelSpec::paired_cardinal(2.0).unwrap();
        let d = single_edge(&m, 1.0);
        let l = log_likelihood(&m, &d, &[0.5, -0.5]).unwrap();
        let expected = -(2.0 * (2.0 * std::f64::consts::PI).sqrt()).ln();
        assert!((l - expected).abs() < 1e-14);
    }

    #[test]
    fn bt_single_edge_has_no_mle() {
        let bt = ModelSpec::bradley_terry();
        let r = fit(&bt, &single_edge(&bt, 1.0), &FitOptions::default());
        assert_eq!(r.status, FitStatus::Nonexistent);
    }

    #[test]
    fn tie_outcome_pins_difference() {
        let rk = ModelSpec::rao_kupper(2.0).unwrap();
        let r = fit(&rk, &single_edge(&rk, 0.0), &FitOptions::default());
        assert!(r.converged());
        assert!(r.u_hat.values().iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn disconnected_graph_is_nonexistent() {
        let m = ModelSpec::paired_cardinal(1.0).unwrap();
        let g = ComparisonGraph::from_pairs(4, [(0, 1), (2, 3)]).unwrap();
        let d = Dataset::new(g, vec![vec![0.3], vec![-0.1]], OutcomeSupport::RealLine).unwrap();
        assert_eq!(fit(&m, &d, &FitOptions::default()).status, FitStatus::Nonexistent);
    }

    #[test]
    fn fit_record_json_shape() {
        let rec = FitRecord {
            u_hat: vec![0.5, -0.5],
            loglik: -1.0,
            iterations: 3,
            status: FitStatus::Converged,
            rho: None,
        };
        let text = serde_json::to_string(&rec).unwrap();
        assert_eq!(
            text,
            r#"{"u_hat":[0.5,-0.5],"loglik":-1.0,"iterations":3,"status":"converged"}"#
        );
    }
}
