//! Expected Hessian, its degree normalization, spectral gap and the series
//! form of the normalized-Laplacian pseudoinverse. Dense, diagnostic scale.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ComparisonGraph;
use crate::mle::negated_laplacian;
use crate::model::{ConstantsReport, PairwiseModel};

/// Series depth cap for the pseudoinverse.
pub const MAX_SERIES_TERMS: usize = 1_000_000;

/// H*(u): off-diagonals m_ij·I(u_i − u_j) on edges, rows summing to zero.
pub fn expected_hessian<M: PairwiseModel + ?Sized>(
    model: &M,
    graph: &ComparisonGraph,
    u: &[f64],
) -> Result<DMatrix<f64>> {
    if u.len() != graph.n() {
        return Err(Error::DimensionMismatch {
            expected: graph.n(),
            got: u.len(),
        });
    }
    let weights: Vec<f64> = graph
        .edges()
        .iter()
        .map(|e| e.multiplicity as f64 * model.pair_information(u[e.i] - u[e.j]))
        .collect();
    Ok(negated_laplacian(graph, &weights))
}

#[derive(Debug, Clone)]
pub struct SpectralBundle {
    pub h_star: DMatrix<f64>,
    /// Diagonal of D.
    pub degrees: DVector<f64>,
    pub a: DMatrix<f64>,
    pub p1: DMatrix<f64>,
    pub l_sym: DMatrix<f64>,
    /// ‖A − P1‖₂.
    pub gap: f64,
}

impl SpectralBundle {
    pub fn d(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.degrees)
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    /// Whether the weighted graph behind A is connected.
    pub fn is_connected(&self) -> bool {
        let n = self.n();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for (j, s) in seen.iter_mut().enumerate() {
                if !*s && self.a[(i, j)] != 0.0 {
                    *s = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// JSON view with matrices as row-major nested arrays.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "H_star": rows(&self.h_star),
            "D": self.degrees.iter().copied().collect::<Vec<_>>(),
            "A": rows(&self.a),
            "P1": rows(&self.p1),
            "L_sym": rows(&self.l_sym),
            "gap": self.gap,
        })
    }
}

pub fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// D, 𝒜 = D^{-1/2}(−H* off-diagonal)D^{-1/2}, 𝒫₁ = √d√dᵀ/Σd, L_sym = I − 𝒜.
pub fn normalized_components(h_star: &DMatrix<f64>) -> Result<SpectralBundle> {
    let n = h_star.nrows();
    if h_star.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: h_star.ncols(),
        });
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let degrees = DVector::from_fn(n, |i, _| {
        (0..n).filter(|&j| j != i).map(|j| h_star[(i, j)]).sum::<f64>()
    });
    if degrees.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::ZeroDegree);
    }
    let root = degrees.map(f64::sqrt);
    let a = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            h_star[(i, j)] / (root[i] * root[j])
        }
    });
    let total: f64 = degrees.sum();
    let p1 = &root * root.transpose() / total;
    let l_sym = DMatrix::identity(n, n) - &a;
    let gap = spectral_norm_symmetric(&(&a - &p1));
    Ok(SpectralBundle {
        h_star: h_star.clone(),
        degrees,
        a,
        p1,
        l_sym,
        gap,
    })
}

fn spectral_norm_symmetric(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .fold(0.0, |acc: f64, v| acc.max(v.abs()))
}

#[derive(Debug, Clone)]
pub struct Pseudoinverse {
    pub matrix: DMatrix<f64>,
    /// Highest power T kept in Σ_{t=0}^{T} (𝒜 − 𝒫₁)^t.
    pub terms: usize,
    /// ‖tail‖₂ ≤ gap^{T+1}/(1 − gap).
    pub error_bound: f64,
}

/// L_sym† ≈ Σ_{t=0}^{T} (𝒜 − 𝒫₁)^t − 𝒫₁ with the smallest T whose tail bound
/// gap^{T+1}/(1 − gap) is at most `tol`.
pub fn laplacian_pseudoinverse(bundle: &SpectralBundle, tol: f64) -> Result<Pseudoinverse> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let gap = bundle.gap;
    if !bundle.is_connected() {
        return Err(Error::DisconnectedGraph);
    }
    if gap >= 1.0 - 1e-12 {
        return Err(Error::NonContractive(gap));
    }
    let terms = if gap == 0.0 {
        0
    } else {
        // gap^{T+1} ≤ tol·(1 − gap)
        let t = ((tol * (1.0 - gap)).ln() / gap.ln() - 1.0).ceil().max(0.0);
        if t > MAX_SERIES_TERMS as f64 {
            return Err(Error::InvalidParameter(format!(
                "series needs {t} terms at gap {gap}; cap is {MAX_SERIES_TERMS}"
            )));
        }
        t as usize
    };
    let n = bundle.n();
    let b = &bundle.a - &bundle.p1;
    let mut power = DMatrix::identity(n, n);
    let mut sum = power.clone();
    for _ in 0..terms {
        power = &power * &b;
        sum += &power;
    }
    Ok(Pseudoinverse {
        matrix: sum - &bundle.p1,
        terms,
        error_bound: gap.powi(terms as i32 + 1) / (1.0 - gap),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    /// (c2/c3)·{q²(log n)³/(n p³)}^{1/2}.
    pub alpha_n: f64,
    /// max{c2²c4^{5/2}c5/c3⁵, c2c4^{11/2}/c3⁶}·{q¹⁰(log n)⁸/(n p¹¹)}^{1/2}.
    pub beta_n: f64,
    /// log n/(n p |log c1|).
    pub exist_ratio: f64,
    pub alpha_small: bool,
    pub beta_small: bool,
    pub exist_small: bool,
}

/// Evaluates the consistency, normality and existence rates. A verdict is
/// "small" when the value is below 1.
pub fn condition_report(n: usize, p: f64, q: f64, constants: &ConstantsReport) -> Result<ConditionReport> {
    if !(p > 0.0 && p <= q && q <= 1.0) {
        return Err(Error::InvalidProbability { p, q });
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need n ≥ 2, got {n}")));
    }
    let ConstantsReport { c1, c2, c3, c4, c5, .. } = *constants;
    let nf = n as f64;
    let log_n = nf.ln();
    let alpha_n = (c2 / c3) * (q * q * log_n.powi(3) / (nf * p.powi(3))).sqrt();
    let lead = (c2 * c2 * c4.powf(2.5) * c5 / c3.powi(5)).max(c2 * c4.powf(5.5) / c3.powi(6));
    let beta_n = lead * (q.powi(10) * log_n.powi(8) / (nf * p.powi(11))).sqrt();
    let exist_ratio = log_n / (nf * p * c1.ln().abs());
    Ok(ConditionReport {
        alpha_n,
        beta_n,
        exist_ratio,
        alpha_small: alpha_n < 1.0,
        beta_small: beta_n < 1.0,
        exist_small: exist_ratio < 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSpec;

    #[test]
    fn complete_graph_gap() {
        let g = ComparisonGraph::complete(4);
        let h = expected_hessian(&ModelSpec::bradley_terry(), &g, &[0.0; 4]).unwrap();
        let b = normalized_components(&h).unwrap();
        assert!((b.gap - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn disconnected_is_rejected() {
        let g = ComparisonGraph::from_pairs(4, [(0, 1), (2, 3)]).unwrap();
        let h = expected_hessian(&ModelSpec::bradley_terry(), &g, &[0.0; 4]).unwrap();
        let b = normalized_components(&h).unwrap();
        assert!((b.gap - 1.0).abs() < 1e-12);
        assert!(matches!(
            laplacian_pseudoinverse(&b, 1e-8),
            Err(Error::DisconnectedGraph)
        ));
    }

    #[test]
    fn bipartite_is_not_contractive() {
        let g = ComparisonGraph::from_pairs(3, [(0, 1), (1, 2)]).unwrap();
        let h = expected_hessian(&ModelSpec::bradley_terry(), &g, &[0.0; 3]).unwrap();
        let b = normalized_components(&h).unwrap();
        assert!(matches!(
            laplacian_pseudoinverse(&b, 1e-8),
            Err(Error::NonContractive(_))
        ));
    }

    #[test]
    fn zero_degree_rejected() {
        let g = ComparisonGraph::from_pairs(3, [(0, 1)]).unwrap();
        let h = expected_hessian(&ModelSpec::bradley_terry(), &g, &[0.0; 3]).unwrap();
        assert!(matches!(normalized_components(&h), Err(Error::ZeroDegree)));
    }
}
