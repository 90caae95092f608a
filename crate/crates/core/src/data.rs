//! Comparison datasets: synthetic generation and CSV ingestion.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ComparisonGraph;
use crate::model::{OutcomeSupport, PairwiseModel};

/// Latent score vector u.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentScores {
    values: Vec<f64>,
    centered: bool,
}

impl LatentScores {
    /// Wraps `values` as-is.
    pub fn raw(values: Vec<f64>) -> Self {
        Self {
            values,
            centered: false,
        }
    }

    /// Shifts `values` to sum to zero; returns the scores and the shift that
    /// was subtracted.
    pub fn centered(mut values: Vec<f64>) -> (Self, f64) {
        let shift = mean(&values);
        for v in &mut values {
            *v -= shift;
        }
        (Self { values, centered: true }, shift)
    }

    /// Draws u_i i.i.d. Uniform[−M, M] and centers the result.
    pub fn uniform<R: Rng + ?Sized>(n: usize, dynamic_range: f64, rng: &mut R) -> (Self, f64) {
        let values = (0..n)
            .map(|_| dynamic_range * (2.0 * rng.random::<f64>() - 1.0))
            .collect();
        Self::centered(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    /// max_{i,j} |u_i − u_j|.
    pub fn dynamic_range(&self) -> f64 {
        let (lo, hi) = self
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        if self.values.is_empty() {
            0.0
        } else {
            hi - lo
        }
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// A comparison graph with the observed outcomes of every comparison.
///
/// Outcomes are stored for the orientation i < j of each edge; reading the
/// edge as (j, i) returns the negated values.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    graph: ComparisonGraph,
    /// `values[offsets[e]..offsets[e + 1]]` are the outcomes on edge e.
    offsets: Vec<usize>,
    values: Vec<f64>,
    support: OutcomeSupport,
}

impl Dataset {
    /// `outcomes[e]` lists the outcomes X_ij (i < j) for edge e; its length
    /// must equal that edge's multiplicity.
    pub fn new(graph: ComparisonGraph, outcomes: Vec<Vec<f64>>, support: OutcomeSupport) -> Result<Self> {
        if outcomes.len() != graph.edge_count() {
            return Err(Error::DimensionMismatch {
                expected: graph.edge_count(),
                got: outcomes.len(),
            });
        }
        let mut offsets = Vec::with_capacity(outcomes.len() + 1);
        let mut values = Vec::new();
        offsets.push(0);
        for (e, obs) in graph.edges().iter().zip(&outcomes) {
            if obs.len() != e.multiplicity {
                return Err(Error::DimensionMismatch {
                    expected: e.multiplicity,
                    got: obs.len(),
                });
            }
            if let Some(&bad) = obs.iter().find(|&&x| !support.contains(x)) {
                return Err(Error::OutcomeNotInSupport(bad));
            }
            values.extend_from_slice(obs);
            offsets.push(values.len());
        }
        Ok(Self {
            graph,
            offsets,
            values,
            support,
        })
    }

    pub fn graph(&self) -> &ComparisonGraph {
        &self.graph
    }

    pub fn support(&self) -> &OutcomeSupport {
        &self.support
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Total number of observed comparisons.
    pub fn comparison_count(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Outcomes on edge `e`, oriented from its smaller to its larger endpoint.
    pub fn edge_outcomes(&self, e: usize) -> &[f64] {
        &self.values[self.offsets[e]..self.offsets[e + 1]]
    }

    /// X_ab for every comparison between `a` and `b`, oriented a → b.
    pub fn outcomes(&self, a: usize, b: usize) -> Option<Vec<f64>> {
        let e = self.graph.edge_index(a, b)?;
        let obs = self.edge_outcomes(e);
        Some(if a < b {
            obs.to_vec()
        } else {
            obs.iter().map(|x| -x).collect()
        })
    }

    /// Writes `label_i,label_j,outcome` rows, one per comparison, in edge order.
    pub fn write_csv<W: Write>(&self, labels: &[String], writer: W) -> Result<()> {
        if labels.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: labels.len(),
            });
        }
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
        for (k, e) in self.graph.edges().iter().enumerate() {
            for x in self.edge_outcomes(k) {
                w.write_record([labels[e.i].as_str(), labels[e.j].as_str(), &x.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Draws one outcome per comparison unit from f(·; u_i − u_j).
pub fn sample_outcomes<M: PairwiseModel + ?Sized>(
    model: &M,
    scores: &LatentScores,
    graph: &ComparisonGraph,
    seed: u64,
) -> Result<Dataset> {
    if scores.len() != graph.n() {
        return Err(Error::DimensionMismatch {
            expected: graph.n(),
            got: scores.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = scores.values();
    let outcomes = graph
        .edges()
        .iter()
        .map(|e| {
            let y = u[e.i] - u[e.j];
            (0..e.multiplicity).map(|_| model.sample_outcome(y, &mut rng)).collect()
        })
        .collect();
    Dataset::new(graph.clone(), outcomes, model.support().clone())
}

/// A dataset read from CSV, with the vertex labels in id order.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub dataset: Dataset,
    pub labels: Vec<String>,
}

/// Loads `label_i,label_j,outcome` rows (optional `i,j,outcome` header).
/// Labels get dense ids in order of first appearance; repeated pairs
/// accumulate multiplicity.
pub fn load_csv<P: AsRef<Path>>(path: P, support: &OutcomeSupport) -> Result<LabeledDataset> {
    let file = std::fs::File::open(path)?;
    read_csv(file, support)
}

pub fn read_csv<R: Read>(reader: R, support: &OutcomeSupport) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut pair_index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut outcomes: Vec<Vec<f64>> = Vec::new();

    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(row + 1);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected 3 fields, found {}", record.len()),
            });
        }
        if row == 0
            && record[0].eq_ignore_ascii_case("i")
            && record[1].eq_ignore_ascii_case("j")
            && record[2].eq_ignore_ascii_case("outcome")
        {
            continue;
        }
        let x: f64 = record[2].parse().map_err(|_| Error::Parse {
            line,
            message: format!("`{}` is not a number", &record[2]),
        })?;
        if record[0] == record[1] {
            return Err(Error::SelfComparison(record[0].to_string()));
        }
        if !support.contains(x) {
            return Err(Error::OutcomeNotInSupport(x));
        }
        let mut id = |label: &str| -> usize {
            if let Some(&k) = ids.get(label) {
                return k;
            }
            let k = labels.len();
            ids.insert(label.to_string(), k);
            labels.push(label.to_string());
            k
        };
        let a = id(&record[0]);
        let b = id(&record[1]);
        let (key, x) = if a < b { ((a, b), x) } else { ((b, a), -x) };
        let e = *pair_index.entry(key).or_insert_with(|| {
            pairs.push(key);
            outcomes.push(Vec::new());
            pairs.len() - 1
        });
        outcomes[e].push(x);
    }

    let graph = ComparisonGraph::from_edges(
        labels.len(),
        pairs.iter().zip(&outcomes).map(|(&(i, j), obs)| (i, j, obs.len())),
    )?;
    let dataset = Dataset::new(graph, outcomes, support.clone())?;
    Ok(LabeledDataset { dataset, labels })
}

/// Best-of-3 set score to the ordinal outcome in {−2, −1, 1, 2}.
pub fn map_match_scores(raw: &str) -> Result<f64> {
    match raw.trim() {
        "2:0" => Ok(2.0),
        "2:1" => Ok(1.0),
        "1:2" => Ok(-1.0),
        "0:2" => Ok(-2.0),
        other => Err(Error::UnrecognizedScore(other.to_string())),
    }
}
