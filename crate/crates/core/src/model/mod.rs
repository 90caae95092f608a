//! Valid pairwise-comparison parameterizations.
//!
//! A model is a family f(x; y) of outcome distributions indexed by the score
//! difference y = u_i − u_j. Everything downstream (likelihood, Hessian,
//! asymptotic variance) only needs the density, the score
//! g(x; y) = ∂_y log f(x; y), its first two y-derivatives and the per-pair
//! Fisher information I(y) = ∫ (∂_y f)² / f dx, which is what
//! [`PairwiseModel`] exposes.
//!
//! [`ModelSpec`] provides the six concrete families: Bradley–Terry,
//! Thurstone–Mosteller, Rao–Kupper, Davidson, the four-outcome cumulative
//! logistic link, and the paired cardinal (Gaussian) model.

use std::fmt;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal;
use crate::quadrature::GaussHermite;

mod validate;

pub use validate::{
    model_constants, symmetric_grid, validate_model, Axiom, AxiomCheck, ConstantsReport, GridDescription,
    ValidationReport,
};

/// The set 𝔸 of possible comparison outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OutcomeSupport {
    /// Finitely many outcomes, strictly increasing and symmetric about zero.
    Finite(Vec<f64>),
    RealLine,
}

impl OutcomeSupport {
    pub fn finite(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("empty outcome support".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite outcome".into()));
        }
        if !values.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter("outcomes must be strictly increasing".into()));
        }
        let n = values.len();
        if (0..n).any(|k| values[k] != -values[n - 1 - k]) {
            return Err(Error::InvalidParameter(
                "outcome support must be symmetric about zero".into(),
            ));
        }
        Ok(Self::Finite(values))
    }

    pub fn values(&self) -> Option<&[f64]> {
        match self {
            Self::Finite(v) => Some(v),
            Self::RealLine => None,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        match self {
            Self::Finite(v) => v.contains(&x),
            Self::RealLine => x.is_finite(),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Self::Finite(_))
    }
}

/// g(x; y) and its first two derivatives in y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreTerms {
    pub g: f64,
    pub d1: f64,
    pub d2: f64,
}

/// How log f(x; y) behaves as y → ±∞ for a fixed outcome. Used to decide
/// whether a finite maximum-likelihood estimate can exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeTrend {
    /// log f(x; ·) increases for all y: the outcome keeps rewarding a larger
    /// score difference.
    Rising,
    /// log f(x; ·) decreases for all y.
    Falling,
    /// log f(x; y) → −∞ in both directions.
    Bounded,
}

/// A valid parameterization f(x; y).
///
/// Implementations may assume `x` lies in [`support`](Self::support); the
/// checked entry points [`pdf`], [`score`] and [`score_derivatives`] enforce it.
pub trait PairwiseModel: Send + Sync {
    fn name(&self) -> String;

    fn support(&self) -> &OutcomeSupport;

    fn density(&self, x: f64, y: f64) -> f64;

    fn log_density(&self, x: f64, y: f64) -> f64 {
        self.density(x, y).ln()
    }

    fn score_terms(&self, x: f64, y: f64) -> ScoreTerms;

    /// Per-pair Fisher information. The default sums (or integrates) f·g²,
    /// which equals (∂f)²/f.
    fn pair_information(&self, y: f64) -> f64 {
        match self.support() {
            OutcomeSupport::Finite(values) => values
                .iter()
                .map(|&x| {
                    let g = self.score_terms(x, y).g;
                    self.density(x, y) * g * g
                })
                .sum(),
            OutcomeSupport::RealLine => GaussHermite::standard().integrate_line(y, self.spread(), |x| {
                let g = self.score_terms(x, y).g;
                self.density(x, y) * g * g
            }),
        }
    }

    /// Typical width of f(·; y) for continuous support; sets the quadrature scale.
    fn spread(&self) -> f64 {
        1.0
    }

    fn sample_outcome(&self, y: f64, rng: &mut dyn RngCore) -> f64;

    /// Exact ψ₂ norm of g(X_y; y) when the model knows it in closed form.
    fn score_psi2_norm(&self) -> Option<f64> {
        None
    }

    /// Limiting behaviour of log f(x; ·). The default reads the sign of the
    /// score far out in each direction, which is exact for log-concave f.
    fn outcome_trend(&self, x: f64) -> OutcomeTrend {
        if !self.support().is_finite() {
            return OutcomeTrend::Bounded;
        }
        const FAR: f64 = 40.0;
        if self.score_terms(x, FAR).g >= 0.0 {
            OutcomeTrend::Rising
        } else if self.score_terms(x, -FAR).g <= 0.0 {
            OutcomeTrend::Falling
        } else {
            OutcomeTrend::Bounded
        }
    }
}

fn check_support<M: PairwiseModel + ?Sized>(model: &M, x: f64) -> Result<()> {
    if model.support().contains(x) {
        Ok(())
    } else {
        Err(Error::OutcomeNotInSupport(x))
    }
}

/// f(x; y), rejecting outcomes outside the support.
pub fn pdf<M: PairwiseModel + ?Sized>(model: &M, x: f64, y: f64) -> Result<f64> {
    check_support(model, x)?;
    Ok(model.density(x, y))
}

/// g(x; y) = ∂_y log f(x; y).
pub fn score<M: PairwiseModel + ?Sized>(model: &M, x: f64, y: f64) -> Result<f64> {
    check_support(model, x)?;
    Ok(model.score_terms(x, y).g)
}

/// (∂_y g, ∂_yy g) at (x, y).
pub fn score_derivatives<M: PairwiseModel + ?Sized>(model: &M, x: f64, y: f64) -> Result<(f64, f64)> {
    check_support(model, x)?;
    let t = model.score_terms(x, y);
    Ok((t.d1, t.d2))
}

/// Per-pair Fisher information I(y).
pub fn pair_fisher_info<M: PairwiseModel + ?Sized>(model: &M, y: f64) -> f64 {
    model.pair_information(y)
}

// ---------------------------------------------------------------------------
// Concrete families
// ---------------------------------------------------------------------------

/// Which of the six built-in families a [`ModelSpec`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Family {
    #[serde(rename = "bt")]
    BradleyTerry,
    #[serde(rename = "thurstone")]
    ThurstoneMosteller,
    RaoKupper {
        theta: f64,
    },
    Davidson {
        theta: f64,
    },
    #[serde(rename = "clm4")]
    CumulativeLink4 {
        theta: f64,
    },
    #[serde(rename = "cardinal")]
    PairedCardinal {
        sigma: f64,
    },
}

impl Family {
    pub fn id(&self) -> &'static str {
        match self {
            Family::BradleyTerry => "bt",
            Family::ThurstoneMosteller => "thurstone",
            Family::RaoKupper { .. } => "rao-kupper",
            Family::Davidson { .. } => "davidson",
            Family::CumulativeLink4 { .. } => "clm4",
            Family::PairedCardinal { .. } => "cardinal",
        }
    }
}

/// Model families that carry a threshold θ, for profile likelihood over θ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdFamily {
    RaoKupper,
    Davidson,
    CumulativeLink4,
}

impl ThresholdFamily {
    pub fn with_theta(self, theta: f64) -> Result<ModelSpec> {
        match self {
            ThresholdFamily::RaoKupper => ModelSpec::rao_kupper(theta),
            ThresholdFamily::Davidson => ModelSpec::davidson(theta),
            ThresholdFamily::CumulativeLink4 => ModelSpec::cumulative_link4(theta),
        }
    }
}

/// Cumulative logistic link: categories x_0 < … < x_K with
/// P(X ≥ x_k) = F(y − τ_k), F the logistic CDF, τ_1 < … < τ_K.
/// Bradley–Terry, Rao–Kupper and the four-outcome link are all of this form.
#[derive(Debug, Clone, PartialEq)]
struct CumulativeLogistic {
    cuts: Vec<f64>,
}

fn logistic(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// log F(s) = −log(1 + e^{−s}).
fn log_logistic(s: f64) -> f64 {
    if s >= 0.0 {
        -(-s).exp().ln_1p()
    } else {
        s - s.exp().ln_1p()
    }
}

impl CumulativeLogistic {
    fn categories(&self) -> usize {
        self.cuts.len() + 1
    }

    fn log_density(&self, k: usize, y: f64) -> f64 {
        let last = self.cuts.len();
        if k == 0 {
            log_logistic(self.cuts[0] - y)
        } else if k == last {
            log_logistic(y - self.cuts[last - 1])
        } else {
            let lo = self.cuts[k - 1];
            let hi = self.cuts[k];
            (-(lo - hi).exp_m1()).ln() + log_logistic(y - lo) + log_logistic(hi - y)
        }
    }

    fn density(&self, k: usize, y: f64) -> f64 {
        let last = self.cuts.len();
        if k == 0 {
            logistic(self.cuts[0] - y)
        } else if k == last {
            logistic(y - self.cuts[last - 1])
        } else {
            let lo = self.cuts[k - 1];
            let hi = self.cuts[k];
            -(lo - hi).exp_m1() * logistic(y - lo) * logistic(hi - y)
        }
    }

    /// g = [k>0](1 − S_k) − [k<K] S_{k+1}; each active cut contributes
    /// −S(1−S) and −S(1−S)(1−2S) to the derivatives.
    fn score_terms(&self, k: usize, y: f64) -> ScoreTerms {
        let last = self.cuts.len();
        let mut t = ScoreTerms {
            g: 0.0,
            d1: 0.0,
            d2: 0.0,
        };
        let mut add_cut = |tau: f64| {
            let s = logistic(y - tau);
            let sc = logistic(tau - y);
            t.d1 -= s * sc;
            t.d2 -= s * sc * (sc - s);
        };
        if k > 0 {
            add_cut(self.cuts[k - 1]);
        }
        if k < last {
            add_cut(self.cuts[k]);
        }
        if k > 0 {
            t.g += logistic(self.cuts[k - 1] - y);
        }
        if k < last {
            t.g -= logistic(y - self.cuts[k]);
        }
        t
    }

    fn sample(&self, y: f64, u: f64) -> usize {
        self.cuts.iter().filter(|&&tau| u < logistic(y - tau)).count()
    }
}

/// A concrete, immutable model: family, parameters and outcome support.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    family: Family,
    support: OutcomeSupport,
    link: Option<CumulativeLogistic>,
}

impl ModelSpec {
    pub fn bradley_terry() -> Self {
        Self {
            family: Family::BradleyTerry,
            support: OutcomeSupport::Finite(vec![-1.0, 1.0]),
            link: Some(CumulativeLogistic { cuts: vec![0.0] }),
        }
    }

    pub fn thurstone_mosteller() -> Self {
        Self {
            family: Family::ThurstoneMosteller,
            support: OutcomeSupport::Finite(vec![-1.0, 1.0]),
            link: None,
        }
    }

    /// Ties allowed; θ > 1.
    pub fn rao_kupper(theta: f64) -> Result<Self> {
        if !(theta > 1.0 && theta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Rao–Kupper requires theta > 1, got {theta}"
            )));
        }
        let c = theta.ln();
        Ok(Self {
            family: Family::RaoKupper { theta },
            support: OutcomeSupport::Finite(vec![-1.0, 0.0, 1.0]),
            link: Some(CumulativeLogistic { cuts: vec![-c, c] }),
        })
    }

    /// Ties with weight θ·e^{y/2}; θ > 0.
    pub fn davidson(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Davidson requires theta > 0, got {theta}"
            )));
        }
        Ok(Self {
            family: Family::Davidson { theta },
            support: OutcomeSupport::Finite(vec![-1.0, 0.0, 1.0]),
            link: None,
        })
    }

    /// Four ordinal outcomes {−2, −1, 1, 2}; θ > 1.
    pub fn cumulative_link4(theta: f64) -> Result<Self> {
        if !(theta > 1.0 && theta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "cumulative link model requires theta > 1, got {theta}"
            )));
        }
        let c = theta.ln();
        Ok(Self {
            family: Family::CumulativeLink4 { theta },
            support: OutcomeSupport::Finite(vec![-2.0, -1.0, 1.0, 2.0]),
            link: Some(CumulativeLogistic { cuts: vec![-c, 0.0, c] }),
        })
    }

    /// Gaussian outcome X ~ N(y, σ²); σ > 0.
    pub fn paired_cardinal(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "paired cardinal requires sigma > 0, got {sigma}"
            )));
        }
        Ok(Self {
            family: Family::PairedCardinal { sigma },
            support: OutcomeSupport::RealLine,
            link: None,
        })
    }

    pub fn from_family(family: Family) -> Result<Self> {
        match family {
            Family::BradleyTerry => Ok(Self::bradley_terry()),
            Family::ThurstoneMosteller => Ok(Self::thurstone_mosteller()),
            Family::RaoKupper { theta } => Self::rao_kupper(theta),
            Family::Davidson { theta } => Self::davidson(theta),
            Family::CumulativeLink4 { theta } => Self::cumulative_link4(theta),
            Family::PairedCardinal { sigma } => Self::paired_cardinal(sigma),
        }
    }

    /// Builds a model from its identifier (case-insensitive) and `name=value`
    /// parameters. Missing parameters take the defaults θ=2 (Rao–Kupper,
    /// cumulative link), θ=1 (Davidson) and σ=2 (cardinal).
    pub fn from_name(name: &str, params: &[(String, f64)]) -> Result<Self> {
        let lookup = |key: &str, default: f64| -> f64 {
            params
                .iter()
                .find(|(k, _)| k.eq_ignore_ascii_case(key))
                .map(|(_, v)| *v)
                .unwrap_or(default)
        };
        let id = name.trim().to_ascii_lowercase();
        let allowed: &[&str] = match id.as_str() {
            "bt" | "thurstone" => &[],
            "rao-kupper" | "davidson" | "clm4" => &["theta"],
            "cardinal" => &["sigma"],
            _ => return Err(Error::UnknownModel(name.to_string())),
        };
        if let Some((k, _)) = params
            .iter()
            .find(|(k, _)| !allowed.iter().any(|a| a.eq_ignore_ascii_case(k)))
        {
            return Err(Error::InvalidParameter(format!("model `{id}` has no parameter `{k}`")));
        }
        match id.as_str() {
            "bt" => Ok(Self::bradley_terry()),
            "thurstone" => Ok(Self::thurstone_mosteller()),
            "rao-kupper" => Self::rao_kupper(lookup("theta", 2.0)),
            "davidson" => Self::davidson(lookup("theta", 1.0)),
            "clm4" => Self::cumulative_link4(lookup("theta", 2.0)),
            _ => Self::paired_cardinal(lookup("sigma", 2.0)),
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    fn category(&self, x: f64) -> usize {
        match &self.support {
            OutcomeSupport::Finite(v) => v
                .iter()
                .position(|&a| a == x)
                .unwrap_or_else(|| panic!("outcome {x} outside support of {}", self.family.id())),
            OutcomeSupport::RealLine => 0,
        }
    }
}

/// Parses "k=v[,k=v]" parameter lists.
pub fn parse_params(text: &str) -> Result<Vec<(String, f64)>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("expected name=value, got `{pair}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("`{v}` is not a number")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::RaoKupper { theta } | Family::Davidson { theta } | Family::CumulativeLink4 { theta } => {
                write!(f, "{}(theta={theta})", self.family.id())
            }
            Family::PairedCardinal { sigma } => write!(f, "cardinal(sigma={sigma})"),
            _ => f.write_str(self.family.id()),
        }
    }
}

/// Weighted moments of the Davidson exponent k ∈ {1, ½, 0} (for x = 1, 0, −1):
/// returns (f(1), f(0), f(−1), mean, variance, third central moment).
/// ∂_y log Z is the mean, so g = k_x − mean, ∂g = −var, ∂²g = −third moment.
fn davidson_moments(theta: f64, y: f64) -> [f64; 6] {
    let a = y.abs();
    let t = (-0.5 * a).exp();
    // normalized by the dominant term e^{|y|/2}
    let z = 1.0 + theta * t + t * t;
    let (p_hi, p_mid, p_lo) = (1.0 / z, theta * t / z, t * t / z);
    let (p1, pm1) = if y >= 0.0 { (p_hi, p_lo) } else { (p_lo, p_hi) };
    let p0 = p_mid;
    let mean = p1 + 0.5 * p0;
    let c1 = 1.0 - mean;
    let c0 = 0.5 - mean;
    let cm = -mean;
    let var = p1 * c1 * c1 + p0 * c0 * c0 + pm1 * cm * cm;
    let third = p1 * c1.powi(3) + p0 * c0.powi(3) + pm1 * cm.powi(3);
    [p1, p0, pm1, mean, var, third]
}

impl PairwiseModel for ModelSpec {
    fn name(&self) -> String {
        self.to_string()
    }

    fn support(&self) -> &OutcomeSupport {
        &self.support
    }

    fn density(&self, x: f64, y: f64) -> f64 {
        match self.family {
            Family::ThurstoneMosteller => {
                if x > 0.0 {
                    normal::cdf(y)
                } else {
                    normal::sf(y)
                }
            }
            Family::Davidson { theta } => {
                let m = davidson_moments(theta, y);
                if x > 0.0 {
                    m[0]
                } else if x < 0.0 {
                    m[2]
                } else {
                    m[1]
                }
            }
            Family::PairedCardinal { sigma } => normal::pdf((x - y) / sigma) / sigma,
            _ => self.link.as_ref().unwrap().density(self.category(x), y),
        }
    }

    fn log_density(&self, x: f64, y: f64) -> f64 {
        match self.family {
            Family::ThurstoneMosteller => {
                let s = if x > 0.0 { y } else { -y };
                if s > -30.0 {
                    normal::cdf(s).ln()
                } else {
                    -0.5 * s * s - 0.5 * (2.0 * std::f64::consts::PI).ln() - normal::mills_ratio(s).ln()
                }
            }
            Family::Davidson { theta } => {
                let a = y.abs();
                let t = (-0.5 * a).exp();
                let log_z = 0.5 * a + (theta * t + t * t).ln_1p();
                let expo = if x > 0.0 {
                    0.5 * y
                } else if x < 0.0 {
                    -0.5 * y
                } else {
                    theta.ln()
                };
                expo - log_z
            }
            Family::PairedCardinal { sigma } => {
                let r = (x - y) / sigma;
                -0.5 * r * r - sigma.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
            }
            _ => self.link.as_ref().unwrap().log_density(self.category(x), y),
        }
    }

    fn score_terms(&self, x: f64, y: f64) -> ScoreTerms {
        match self.family {
            Family::ThurstoneMosteller => {
                // m(s) = φ(s)/Φ(s); m' = −m(s + m); m'' = −m'(s + m) − m(1 + m')
                let s = if x > 0.0 { y } else { -y };
                let m = normal::mills_ratio(s);
                let m1 = -m * (s + m);
                let m2 = -m1 * (s + m) - m * (1.0 + m1);
                if x > 0.0 {
                    ScoreTerms { g: m, d1: m1, d2: m2 }
                } else {
                    ScoreTerms { g: -m, d1: m1, d2: -m2 }
                }
            }
            Family::Davidson { theta } => {
                let m = davidson_moments(theta, y);
                let k = if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    0.0
                } else {
                    0.5
                };
                ScoreTerms {
                    g: k - m[3],
                    d1: -m[4],
                    d2: -m[5],
                }
            }
            Family::PairedCardinal { sigma } => {
                let s2 = sigma * sigma;
                ScoreTerms {
                    g: (x - y) / s2,
                    d1: -1.0 / s2,
                    d2: 0.0,
                }
            }
            _ => self.link.as_ref().unwrap().score_terms(self.category(x), y),
        }
    }

    /// Closed-form per-pair information. Every family is evaluated at −|y|,
    /// which is exact because I(y) = I(−y) and keeps e^y ≤ 1.
    fn pair_information(&self, y: f64) -> f64 {
        let d = -y.abs();
        let e = d.exp();
        match self.family {
            Family::BradleyTerry => e / ((1.0 + e) * (1.0 + e)),
            Family::ThurstoneMosteller => {
                // φ²/(Φ(1 − Φ)) written as a product of Mills ratios
                normal::mills_ratio(d) * normal::mills_ratio(-d)
            }
            Family::RaoKupper { theta } => {
                let t2 = theta * theta;
                let a = e + theta;
                let b = theta * e + 1.0;
                let tie = 1.0 - e * e;
                t2 * e / a.powi(3) + t2 * (t2 - 1.0) * e * tie * tie / (a.powi(3) * b.powi(3)) + t2 * e * e / b.powi(3)
            }
            Family::Davidson { theta } => {
                let h = (0.5 * d).exp();
                let z = e + theta * h + 1.0;
                (e * (theta * h + 2.0).powi(2) + theta * h * (1.0 - e).powi(2) + (2.0 * e + theta * h).powi(2))
                    / (4.0 * z.powi(3))
            }
            Family::CumulativeLink4 { theta } => {
                let t2 = theta * theta;
                let a = theta + e;
                let b = theta * e + 1.0;
                let c = 1.0 + e;
                t2 * e / a.powi(3)
                    + t2 * e * e / b.powi(3)
                    + (theta - 1.0) * e / c.powi(3)
                        * ((theta - e * e).powi(2) / a.powi(3) + (1.0 - theta * e * e).powi(2) / b.powi(3))
            }
            Family::PairedCardinal { sigma } => 1.0 / (sigma * sigma),
        }
    }

    fn spread(&self) -> f64 {
        match self.family {
            Family::PairedCardinal { sigma } => sigma,
            _ => 1.0,
        }
    }

    /// g(X; y) ~ N(0, σ⁻²) for the cardinal model; E exp(g²/t²) = 2 at t = √(8/3)/σ.
    fn score_psi2_norm(&self) -> Option<f64> {
        match self.family {
            Family::PairedCardinal { sigma } => Some((8.0f64 / 3.0).sqrt() / sigma),
            _ => None,
        }
    }

    fn sample_outcome(&self, y: f64, rng: &mut dyn RngCore) -> f64 {
        match self.family {
            Family::PairedCardinal { sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                y + sigma * z
            }
            Family::ThurstoneMosteller => {
                let u: f64 = rng.random();
                if u < normal::cdf(y) {
                    1.0
                } else {
                    -1.0
                }
            }
            Family::Davidson { theta } => {
                let m = davidson_moments(theta, y);
                let u: f64 = rng.random();
                if u < m[0] {
                    1.0
                } else if u < m[0] + m[1] {
                    0.0
                } else {
                    -1.0
                }
            }
            _ => {
                let link = self.link.as_ref().unwrap();
                let u: f64 = rng.random();
                let k = link.sample(y, u);
                debug_assert!(k < link.categories());
                self.support.values().unwrap()[k]
            }
        }
    }
}
