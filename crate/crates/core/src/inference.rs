//! Asymptotic variances, confidence intervals, pairwise z-tests and
//! Benjamini–Hochberg step-up correction.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, LatentScores};
use crate::error::{Error, Result};
use crate::graph::ComparisonGraph;
use crate::model::PairwiseModel;
use crate::normal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceSource {
    Truth,
    PlugIn,
    /// Supplied from outside, e.g. published standard errors.
    External,
}

/// Per-vertex asymptotic variance ρ_i. Isolated vertices carry `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub rho: Vec<f64>,
    pub source: VarianceSource,
}

impl VarianceEstimate {
    /// Wraps externally supplied variances; they must be positive.
    pub fn external(rho: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = rho.iter().find(|r| !(**r > 0.0)) {
            return Err(Error::InvalidParameter(format!("variance must be positive, got {bad}")));
        }
        Ok(Self {
            rho,
            source: VarianceSource::External,
        })
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// Vertices whose variance is flagged infinite.
    pub fn isolated(&self) -> Vec<usize> {
        (0..self.rho.len()).filter(|&i| self.rho[i].is_infinite()).collect()
    }

    pub fn sd(&self, i: usize) -> f64 {
        self.rho[i].sqrt()
    }

    fn finite_at(&self, i: usize) -> Result<f64> {
        match self.rho.get(i) {
            None => Err(Error::VertexOutOfRange {
                vertex: i,
                n: self.rho.len(),
            }),
            Some(r) if r.is_finite() => Ok(*r),
            Some(_) => Err(Error::IsolatedVertex(i)),
        }
    }
}

fn variance_at<M: PairwiseModel + ?Sized>(
    model: &M,
    graph: &ComparisonGraph,
    u: &[f64],
    source: VarianceSource,
) -> Result<VarianceEstimate> {
    if u.len() != graph.n() {
        return Err(Error::DimensionMismatch {
            expected: graph.n(),
            got: u.len(),
        });
    }
    let rho = (0..graph.n())
        .map(|i| {
            let info: f64 = graph
                .incident(i)
                .iter()
                .map(|&(j, e)| graph.edges()[e].multiplicity as f64 * model.pair_information(u[i] - u[j]))
                .sum();
            if info > 0.0 {
                1.0 / info
            } else {
                f64::INFINITY
            }
        })
        .collect();
    Ok(VarianceEstimate { rho, source })
}

/// ρ_i(u) = [Σ_{j∈δ{i}} m_ij · I(u_i − u_j)]⁻¹ at the true scores.
pub fn asymptotic_variance<M: PairwiseModel + ?Sized>(
    model: &M,
    graph: &ComparisonGraph,
    u: &LatentScores,
) -> Result<VarianceEstimate> {
    variance_at(model, graph, u.values(), VarianceSource::Truth)
}

/// The same formula evaluated at the estimate û.
pub fn plugin_variance<M: PairwiseModel + ?Sized>(
    model: &M,
    data: &Dataset,
    u_hat: &LatentScores,
) -> Result<VarianceEstimate> {
    variance_at(model, data.graph(), u_hat.values(), VarianceSource::PlugIn)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

/// Two-sided level-(1−α) interval û_i ± z_{α/2}·√ρ_i.
pub fn confidence_interval(u_hat_i: f64, rho_i: f64, alpha: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    if !(rho_i > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "variance must be positive, got {rho_i}"
        )));
    }
    let half = normal::two_sided_critical(alpha) * rho_i.sqrt();
    Ok((u_hat_i - half, u_hat_i + half))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub pair: (usize, usize),
}

/// Two-sided p-value 2(1 − Φ(|z|)).
pub fn two_sided_p(z: f64) -> f64 {
    (2.0 * normal::sf(z.abs())).min(1.0)
}

/// z = (û_i − û_j)/√(ρ_i + ρ_j) with its two-sided p-value.
pub fn z_test_difference(i: usize, j: usize, u_hat: &LatentScores, rho: &VarianceEstimate) -> Result<TestResult> {
    if i == j {
        return Err(Error::SelfComparison(format!("cannot test vertex {i} against itself")));
    }
    let n = u_hat.len();
    if rho.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: rho.len(),
        });
    }
    let (ri, rj) = (rho.finite_at(i)?, rho.finite_at(j)?);
    let u = u_hat.values();
    let z = (u[i] - u[j]) / (ri + rj).sqrt();
    Ok(TestResult {
        statistic: z,
        p_value: two_sided_p(z),
        pair: (i, j),
    })
}

/// Indices (into `p_values`) rejected by the Benjamini–Hochberg step-up rule
/// at level α, in ascending index order.
pub fn benjamini_hochberg(p_values: &[f64], alpha: f64) -> Result<Vec<usize>> {
    check_alpha(alpha)?;
    if let Some(&bad) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidParameter(format!("p-value {bad} outside [0, 1]")));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]).then(a.cmp(&b)));
    let k = (1..=m)
        .rev()
        .find(|&k| p_values[order[k - 1]] <= k as f64 * alpha / m as f64)
        .unwrap_or(0);
    let mut rejected = order[..k].to_vec();
    rejected.sort_unstable();
    Ok(rejected)
}

/// C·(c2/c3)·√(log n / degree).
pub fn individual_error_bound(c2: f64, c3: f64, n: f64, degree: usize, constant: f64) -> Result<f64> {
    if degree == 0 {
        return Err(Error::ZeroDegree);
    }
    if !(n > 1.0) || !(c3 > 0.0) || c2 < 0.0 || constant < 0.0 {
        return Err(Error::InvalidParameter("need n > 1, c3 > 0, c2 ≥ 0, C ≥ 0".into()));
    }
    Ok(constant * (c2 / c3) * (n.ln() / degree as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexReport {
    pub u_hat: f64,
    pub rho: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Per-vertex report; isolated vertices get an unbounded interval.
pub fn vertex_report(u_hat: &LatentScores, rho: &VarianceEstimate, alpha: f64) -> Result<Vec<VertexReport>> {
    check_alpha(alpha)?;
    if rho.len() != u_hat.len() {
        return Err(Error::DimensionMismatch {
            expected: u_hat.len(),
            got: rho.len(),
        });
    }
    u_hat
        .values()
        .iter()
        .zip(&rho.rho)
        .map(|(&u, &r)| {
            let (ci_lo, ci_hi) = if r.is_finite() {
                confidence_interval(u, r, alpha)?
            } else {
                (f64::NEG_INFINITY, f64::INFINITY)
            };
            Ok(VertexReport {
                u_hat: u,
                rho: r,
                ci_lo,
                ci_hi,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub i: usize,
    pub j: usize,
    pub z: f64,
    pub p: f64,
    pub rejected: bool,
}

/// Runs every requested z-test. With `bh` the rejections come from the
/// Benjamini–Hochberg rule; otherwise each test is compared to α alone.
pub fn test_report(
    pairs: &[(usize, usize)],
    u_hat: &LatentScores,
    rho: &VarianceEstimate,
    alpha: f64,
    bh: bool,
) -> Result<Vec<TestReport>> {
    check_alpha(alpha)?;
    let tests = pairs
        .iter()
        .map(|&(i, j)| z_test_difference(i, j, u_hat, rho))
        .collect::<Result<Vec<_>>>()?;
    let p: Vec<f64> = tests.iter().map(|t| t.p_value).collect();
    let rejected = if bh {
        let r = benjamini_hochberg(&p, alpha)?;
        (0..p.len()).map(|k| r.contains(&k)).collect()
    } else {
        p.iter().map(|&x| x <= alpha).collect::<Vec<_>>()
    };
    Ok(tests
        .iter()
        .zip(rejected)
        .map(|(t, rejected)| TestReport {
            i: t.pair.0,
            j: t.pair.1,
            z: t.statistic,
            p: t.p_value,
            rejected,
        })
        .collect())
}
