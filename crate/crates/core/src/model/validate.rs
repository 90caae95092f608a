//! Numerical certification of the validity axioms and of the model constants
//! that enter the rate conditions. All checks are on a finite y-grid only.

use serde::{Deserialize, Serialize};

use super::{OutcomeSupport, PairwiseModel};
use crate::error::{Error, Result};
use crate::quadrature::GaussHermite;

const A1_TOL: f64 = 1e-8;
const A2_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axiom {
    /// Total mass one.
    Normalization,
    /// f(x; y) = f(−x; −y).
    Symmetry,
    /// Mass on outcomes below any x < 0 decreases in y.
    Monotonicity,
    /// f bounded over the grid.
    Boundedness,
    /// ∂_y g < 0.
    LogConcavity,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub axiom: Axiom,
    pub passed: bool,
    /// Worst-case residual. For monotonicity this is the largest increase
    /// observed; for log-concavity the largest value of ∂_y g (must be < 0);
    /// for boundedness the largest density seen.
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridDescription {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub model: String,
    pub checks: [AxiomCheck; 5],
    pub grid: GridDescription,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, axiom: Axiom) -> &AxiomCheck {
        self.checks
            .iter()
            .find(|c| c.axiom == axiom)
            .expect("every axiom is reported")
    }
}

/// Grid {−L, …, L} with `2·ceil(L/step) + 1` points, exactly symmetric.
pub fn symmetric_grid(limit: f64, step: f64) -> Vec<f64> {
    let half = (limit / step).ceil().max(1.0) as usize;
    let h = limit / half as f64;
    (0..=2 * half).map(|k| (k as f64 - half as f64) * h).collect()
}

/// Outcome points at which continuous-support checks are evaluated.
fn probe_outcomes<M: PairwiseModel + ?Sized>(model: &M) -> Vec<f64> {
    match model.support() {
        OutcomeSupport::Finite(v) => v.clone(),
        OutcomeSupport::RealLine => {
            let s = model.spread();
            [-4.0, -2.0, -1.0, -0.5, -0.1, 0.1, 0.5, 1.0, 2.0, 4.0]
                .iter()
                .map(|k| k * s)
                .collect()
        }
    }
}

fn total_mass<M: PairwiseModel + ?Sized>(model: &M, y: f64) -> f64 {
    match model.support() {
        OutcomeSupport::Finite(v) => v.iter().map(|&x| model.density(x, y)).sum(),
        OutcomeSupport::RealLine => GaussHermite::standard().integrate_line(y, model.spread(), |x| model.density(x, y)),
    }
}

/// P(X ≤ x; y). Continuous support uses composite Simpson from far in the
/// left tail.
fn lower_mass<M: PairwiseModel + ?Sized>(model: &M, x: f64, y: f64) -> f64 {
    match model.support() {
        OutcomeSupport::Finite(v) => v.iter().filter(|&&a| a <= x).map(|&a| model.density(a, y)).sum(),
        OutcomeSupport::RealLine => {
            let lo = x.min(y) - 14.0 * model.spread();
            if lo >= x {
                return 0.0;
            }
            let panels = 4000;
            let h = (x - lo) / panels as f64;
            let mut acc = model.density(lo, y) + model.density(x, y);
            for k in 1..panels {
                let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * model.density(lo + k as f64 * h, y);
            }
            acc * h / 3.0
        }
    }
}

/// Checks A1–A5 on `y_grid`; failures are recorded, never raised.
pub fn validate_model<M: PairwiseModel + ?Sized>(model: &M, y_grid: &[f64]) -> Result<ValidationReport> {
    if y_grid.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut grid = y_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let n = grid.len();
    if (0..n).any(|k| (grid[k] + grid[n - 1 - k]).abs() > 1e-12 * (1.0 + grid[k].abs())) {
        return Err(Error::InvalidParameter("y grid must be symmetric about 0".into()));
    }
    let xs = probe_outcomes(model);

    let a1 = grid
        .iter()
        .map(|&y| (total_mass(model, y) - 1.0).abs())
        .fold(0.0, f64::max);

    let mut a2: f64 = 0.0;
    for &y in &grid {
        for &x in &xs {
            a2 = a2.max((model.density(x, y) - model.density(-x, -y)).abs());
        }
    }

    let mut a3: f64 = 0.0;
    for &x in xs.iter().filter(|&&x| x < 0.0) {
        let mut prev = lower_mass(model, x, grid[0]);
        for &y in &grid[1..] {
            let cur = lower_mass(model, x, y);
            a3 = a3.max(cur - prev);
            prev = cur;
        }
    }

    let mut a4: f64 = 0.0;
    let mut finite = true;
    let mut a5 = f64::NEG_INFINITY;
    for &y in &grid {
        for &x in &xs {
            let f = model.density(x, y);
            finite &= f.is_finite() && f >= 0.0;
            a4 = a4.max(f);
            a5 = a5.max(model.score_terms(x, y).d1);
        }
    }
    let a4_ok = finite
        && match model.support() {
            OutcomeSupport::Finite(_) => a4 <= 1.0 + 1e-12,
            OutcomeSupport::RealLine => a4.is_finite(),
        };

    Ok(ValidationReport {
        model: model.name(),
        checks: [
            AxiomCheck {
                axiom: Axiom::Normalization,
                passed: a1 <= A1_TOL,
                residual: a1,
            },
            AxiomCheck {
                axiom: Axiom::Symmetry,
                passed: a2 < A2_TOL,
                residual: a2,
            },
            AxiomCheck {
                axiom: Axiom::Monotonicity,
                passed: a3 <= 1e-14,
                residual: a3,
            },
            AxiomCheck {
                axiom: Axiom::Boundedness,
                passed: a4_ok,
                residual: a4,
            },
            AxiomCheck {
                axiom: Axiom::LogConcavity,
                passed: a5 < 0.0,
                residual: a5,
            },
        ],
        grid: GridDescription {
            min: grid[0],
            max: grid[n - 1],
            points: n,
        },
    })
}

/// Model constants over a dynamic range M.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantsReport {
    /// Global discrepancy: mass on non-negative outcomes at y = M.
    pub c1: f64,
    /// Subgaussian-norm proxy for g(X_y; y), |y| ≤ M.
    pub c2: f64,
    /// inf |∂_y g| over 𝔸 × [−M−1, M+1].
    pub c3: f64,
    /// sup |∂_y g| over the same set.
    pub c4: f64,
    /// sup |∂_yy g| over the same set.
    pub c5: f64,
    pub kappa: f64,
    pub dynamic_range: f64,
}

/// Evaluates c1…c5 on a grid of step `grid_step`.
///
/// For finite support c2 is the bounded-variable bound max|g|/√(ln 2); models
/// on the real line must supply an exact ψ₂ norm, otherwise
/// `UnsupportedForContinuousSupport` is returned.
pub fn model_constants<M: PairwiseModel + ?Sized>(
    model: &M,
    dynamic_range: f64,
    grid_step: f64,
) -> Result<ConstantsReport> {
    if !(dynamic_range > 0.0) || !(grid_step > 0.0) {
        return Err(Error::InvalidParameter(
            "dynamic range and grid step must be positive".into(),
        ));
    }
    let m = dynamic_range;
    let c1 = match model.support() {
        OutcomeSupport::Finite(v) => v.iter().filter(|&&x| x >= 0.0).map(|&x| model.density(x, m)).sum(),
        OutcomeSupport::RealLine => 1.0 - lower_mass(model, 0.0, m),
    };

    let xs = probe_outcomes(model);
    let c2 = match model.support() {
        OutcomeSupport::Finite(_) => {
            let mut max_g: f64 = 0.0;
            for y in symmetric_grid(m, grid_step) {
                for &x in &xs {
                    max_g = max_g.max(model.score_terms(x, y).g.abs());
                }
            }
            max_g / std::f64::consts::LN_2.sqrt()
        }
        OutcomeSupport::RealLine => model
            .score_psi2_norm()
            .ok_or(Error::UnsupportedForContinuousSupport("c2 grid maximization"))?,
    };

    let mut c3 = f64::INFINITY;
    let mut c4: f64 = 0.0;
    let mut c5: f64 = 0.0;
    for y in symmetric_grid(m + 1.0, grid_step) {
        for &x in &xs {
            let t = model.score_terms(x, y);
            c3 = c3.min(t.d1.abs());
            c4 = c4.max(t.d1.abs());
            c5 = c5.max(t.d2.abs());
        }
    }

    Ok(ConstantsReport {
        c1,
        c2,
        c3,
        c4,
        c5,
        kappa: c4 / c3,
        dynamic_range: m,
    })
}
