//! Monte-Carlo coverage study: repeated draw of u*, graph and outcomes,
//! followed by fit, plug-in variance and confidence intervals.
//!
//! Every replication derives its own seeds from `(seed, index)` and results
//! are merged in index order, so summaries do not depend on the thread count.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{sample_outcomes, LatentScores};
use crate::error::{Error, Result};
use crate::graph::{sample_graph, GraphSamplerConfig, PairScheme, ProbabilityRule};
use crate::inference::{confidence_interval, plugin_variance};
use crate::mle::{fit, FitOptions};
use crate::model::{Family, ModelSpec};
use crate::normal;

/// A number, or one of `n^e` (e may be a fraction such as `-1/2`) and
/// `p*log n` / `log n` expressions evaluated against n and p.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RateExpr {
    Literal(f64),
    Expr(String),
}

fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim().trim_start_matches('(').trim_end_matches(')');
    match s.split_once('/') {
        Some((a, b)) => Some(a.trim().parse::<f64>().ok()? / b.trim().parse::<f64>().ok()?),
        None => s.parse().ok(),
    }
}

impl RateExpr {
    pub fn evaluate(&self, n: usize, p: Option<f64>) -> Result<f64> {
        let text = match self {
            RateExpr::Literal(v) => return Ok(*v),
            RateExpr::Expr(s) => s,
        };
        let bad = || Error::ConfigInvalid(format!("cannot evaluate rate expression `{text}`"));
        let compact: String = text
            .chars()
            .filter(|c| !c.is_whitespace())
            .collect::<String>()
            .to_lowercase();
        let nf = n as f64;
        let log_n = nf.ln();
        if let Some(v) = parse_number(&compact) {
            return Ok(v);
        }
        if let Some(exp) = compact.strip_prefix("n^") {
            return parse_number(exp).map(|e| nf.powf(e)).ok_or_else(bad);
        }
        let (coef, rest) = match compact.split_once('*') {
            Some((c, r)) => (Some(c), r),
            None => (None, compact.as_str()),
        };
        if !matches!(rest, "logn" | "log(n)" | "ln(n)" | "lnn") {
            return Err(bad());
        }
        let factor = match coef {
            None => 1.0,
            Some("p") => p.ok_or_else(bad)?,
            Some(c) => parse_number(c).ok_or_else(bad)?,
        };
        Ok(factor * log_n)
    }
}

/// Dynamic range M: a number or `"loglog"` for log(log n).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DynamicRange {
    Value(f64),
    Named(String),
}

impl DynamicRange {
    pub fn evaluate(&self, n: usize) -> Result<f64> {
        match self {
            DynamicRange::Value(v) => Ok(*v),
            DynamicRange::Named(s) => {
                let key: String = s
                    .chars()
                    .filter(|c| c.is_alphanumeric())
                    .collect::<String>()
                    .to_lowercase();
                match key.as_str() {
                    "loglog" | "loglogn" => Ok((n as f64).ln().ln()),
                    _ => parse_number(s).ok_or_else(|| Error::ConfigInvalid(format!("unknown dynamic range `{s}`"))),
                }
            }
        }
    }
}

fn default_alpha() -> f64 {
    0.05
}

fn default_p() -> RateExpr {
    RateExpr::Expr("n^-1/2".into())
}

fn default_q() -> RateExpr {
    RateExpr::Expr("p*log n".into())
}

fn default_scheme() -> PairScheme {
    PairScheme::OrderedUnion
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: Family,
    pub n: usize,
    #[serde(rename = "M")]
    pub dynamic_range: DynamicRange,
    #[serde(default = "default_p")]
    pub p: RateExpr,
    #[serde(default = "default_q")]
    pub q: RateExpr,
    pub replications: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; `None` uses the global rayon pool.
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub rule: ProbabilityRule,
    /// Defaults to one draw per ordered pair; see [`PairScheme::OrderedUnion`].
    #[serde(default = "default_scheme")]
    pub scheme: PairScheme,
    /// Draw u* once from the master seed instead of once per replication.
    #[serde(default)]
    pub fixed_u_star: bool,
    /// Coordinate whose z-score is recorded.
    #[serde(default)]
    pub tracked: usize,
}

impl ExperimentConfig {
    pub fn new(model: Family, n: usize, dynamic_range: DynamicRange, replications: usize, seed: u64) -> Self {
        Self {
            model,
            n,
            dynamic_range,
            p: default_p(),
            q: default_q(),
            replications,
            alpha: default_alpha(),
            seed,
            threads: None,
            rule: ProbabilityRule::UniformRandom,
            scheme: default_scheme(),
            fixed_u_star: false,
            tracked: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// (M, p, q) after evaluating the expressions.
    pub fn resolve(&self) -> Result<(f64, f64, f64)> {
        let m = self.dynamic_range.evaluate(self.n)?;
        let p = self.p.evaluate(self.n, None)?;
        let q = self.q.evaluate(self.n, Some(p))?;
        Ok((m, p, q))
    }

    pub fn validate(&self) -> Result<(ModelSpec, f64, f64, f64)> {
        let invalid = |m: String| Err(Error::ConfigInvalid(m));
        if self.replications == 0 {
            return invalid("replications must be at least 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return invalid(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.n < 2 {
            return invalid(format!("n must be at least 2, got {}", self.n));
        }
        if self.tracked >= self.n {
            return invalid(format!("tracked coordinate {} out of range", self.tracked));
        }
        if self.threads == Some(0) {
            return invalid("threads must be positive".into());
        }
        let (m, p, q) = self.resolve()?;
        if !(m > 0.0 && m.is_finite()) {
            return invalid(format!("dynamic range must be positive, got {m}"));
        }
        if !(p > 0.0 && p <= q && q <= 1.0) {
            return invalid(format!("need 0 < p ≤ q ≤ 1, got p={p}, q={q}"));
        }
        let model = ModelSpec::from_family(self.model).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        Ok((model, m, p, q))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub model: String,
    pub n: usize,
    #[serde(rename = "M")]
    pub dynamic_range: f64,
    /// Mean of √ρ_i(û) over coordinates and successful replications.
    pub mean_sd: f64,
    /// Fraction of (replication, coordinate) pairs whose interval covers u*_i.
    pub coverage: f64,
    /// (û_k − u*_k)/√ρ_k(û) for the tracked coordinate, one per success.
    pub z_scores: Vec<f64>,
    /// Replication index of each z-score.
    pub z_replications: Vec<usize>,
    pub failed_replications: usize,
}

/// splitmix64 finalizer applied to `seed + (index + 1)·golden`.
pub fn replication_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Replication {
    sd_sum: f64,
    covered: usize,
    coordinates: usize,
    z: f64,
}

const FIXED_U_STREAM: u64 = u64::MAX;

fn run_one(config: &ExperimentConfig, model: &ModelSpec, m: f64, p: f64, q: f64, index: usize) -> Option<Replication> {
    let rep_seed = replication_seed(config.seed, index as u64);
    let u_seed = if config.fixed_u_star {
        replication_seed(config.seed, FIXED_U_STREAM)
    } else {
        replication_seed(rep_seed, 0)
    };
    let (u_star, _) = LatentScores::uniform(config.n, m, &mut ChaCha8Rng::seed_from_u64(u_seed));
    let graph_config = GraphSamplerConfig {
        n: config.n,
        p,
        q,
        rule: config.rule,
        scheme: config.scheme,
        seed: replication_seed(rep_seed, 1),
    };
    let graph = sample_graph(&graph_config).ok()?;
    let data = sample_outcomes(model, &u_star, &graph, replication_seed(rep_seed, 2)).ok()?;
    let result = fit(model, &data, &FitOptions::default());
    if !result.converged() {
        return None;
    }
    let rho = plugin_variance(model, &data, &result.u_hat).ok()?;
    let (u_hat, truth) = (result.u_hat.values(), u_star.values());
    let mut sd_sum = 0.0;
    let mut covered = 0;
    for i in 0..config.n {
        let (lo, hi) = confidence_interval(u_hat[i], rho.rho[i], config.alpha).ok()?;
        sd_sum += rho.rho[i].sqrt();
        covered += usize::from(lo <= truth[i] && truth[i] <= hi);
    }
    let k = config.tracked;
    let z = (u_hat[k] - truth[k]) / rho.rho[k].sqrt();
    Some(Replication {
        sd_sum,
        covered,
        coordinates: config.n,
        z,
    })
}

/// Runs all replications and aggregates them in replication order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentSummary> {
    let (model, m, p, q) = config.validate()?;
    let work = || {
        (0..config.replications)
            .into_par_iter()
            .map(|r| run_one(config, &model, m, p, q, r))
            .collect::<Vec<_>>()
    };
    let outcomes = match config.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::ConfigInvalid(e.to_string()))?
            .install(work),
        None => work(),
    };

    let (mut sd_sum, mut covered, mut coords, mut failed) = (0.0, 0usize, 0usize, 0usize);
    let mut z_scores = Vec::new();
    let mut z_replications = Vec::new();
    for (r, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Some(rep) => {
                sd_sum += rep.sd_sum;
                covered += rep.covered;
                coords += rep.coordinates;
                z_scores.push(rep.z);
                z_replications.push(r);
            }
            None => failed += 1,
        }
    }
    let (mean_sd, coverage) = if coords == 0 {
        (f64::NAN, f64::NAN)
    } else {
        (sd_sum / coords as f64, covered as f64 / coords as f64)
    };
    Ok(ExperimentSummary {
        model: model.to_string(),
        n: config.n,
        dynamic_range: m,
        mean_sd,
        coverage,
        z_scores,
        z_replications,
        failed_replications: failed,
    })
}

/// (Φ⁻¹((k − ½)/m), z_(k)) for k = 1..m.
pub fn qq_data(z_scores: &[f64]) -> Result<Vec<(f64, f64)>> {
    if z_scores.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sorted = z_scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(k, z)| (normal::quantile((k as f64 + 0.5) / m), z))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample Kolmogorov–Smirnov test against N(0, 1), with the asymptotic
/// Kolmogorov distribution and Stephens' small-sample correction.
pub fn ks_normal_test(sample: &[f64]) -> Result<KsResult> {
    if sample.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    let d = sorted.iter().enumerate().fold(0.0f64, |acc, (k, &x)| {
        let f = normal::cdf(x);
        acc.max(f - k as f64 / m).max((k as f64 + 1.0) / m - f)
    });
    let root = m.sqrt();
    let lambda = (root + 0.12 + 0.11 / root) * d;
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_sf(lambda),
    })
}

/// P(K > λ) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²λ²}.
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Summary rows with header `model,n,M,mean_sd,coverage,failed`.
pub fn write_summary_csv<W: Write>(summaries: &[ExperimentSummary], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["model", "n", "M", "mean_sd", "coverage", "failed"])?;
    for s in summaries {
        w.write_record([
            s.model.clone(),
            s.n.to_string(),
            s.dynamic_range.to_string(),
            s.mean_sd.to_string(),
            s.coverage.to_string(),
            s.failed_replications.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// z-score rows with header `replication,z`.
pub fn write_z_csv<W: Write>(summary: &ExperimentSummary, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["replication", "z"])?;
    for (r, z) in summary.z_replications.iter().zip(&summary.z_scores) {
        w.write_record([r.to_string(), z.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
