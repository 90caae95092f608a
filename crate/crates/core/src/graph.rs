//! Comparison graphs and the G(n, p, q) sampler.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One undirected edge, stored with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    /// Number of comparisons between `i` and `j` (≥ 1).
    pub multiplicity: usize,
}

/// Simple undirected graph on vertices `0..n` with optional edge multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonGraph {
    n: usize,
    edges: Vec<Edge>,
    /// (neighbor, edge index), sorted by neighbor.
    adjacency: Vec<Vec<(usize, usize)>>,
    index: HashMap<(usize, usize), usize>,
}

impl ComparisonGraph {
    /// Builds a graph from `(i, j, multiplicity)` triples. Pairs are
    /// normalized to `i < j`; edge order is preserved.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, usize)>,
    {
        let mut list = Vec::new();
        let mut index = HashMap::new();
        for (a, b, mult) in edges {
            for v in [a, b] {
                if v >= n {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
            }
            if a == b {
                return Err(Error::SelfComparison(a.to_string()));
            }
            if mult == 0 {
                return Err(Error::InvalidParameter(format!(
                    "edge ({a}, {b}) has zero multiplicity"
                )));
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if index.insert((i, j), list.len()).is_some() {
                return Err(Error::DuplicateEdge(i, j));
            }
            list.push(Edge {
                i,
                j,
                multiplicity: mult,
            });
        }
        let mut adjacency = vec![Vec::new(); n];
        for (k, e) in list.iter().enumerate() {
            adjacency[e.i].push((e.j, k));
            adjacency[e.j].push((e.i, k));
        }
        for nb in &mut adjacency {
            nb.sort_unstable();
        }
        Ok(Self {
            n,
            edges: list,
            adjacency,
            index,
        })
    }

    /// Simple graph from unit-multiplicity pairs.
    pub fn from_pairs<I>(n: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::from_edges(n, pairs.into_iter().map(|(i, j)| (i, j, 1)))
    }

    pub fn complete(n: usize) -> Self {
        let pairs = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
        Self::from_pairs(n, pairs).expect("complete graph is simple")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Index of the edge joining `a` and `b`, in either orientation.
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = if a < b { (a, b) } else { (b, a) };
        self.index.get(&key).copied()
    }

    /// Sorted neighbor list δ{i}.
    pub fn neighborhood(&self, i: usize) -> Result<Vec<usize>> {
        self.check_vertex(i)?;
        Ok(self.adjacency[i].iter().map(|&(j, _)| j).collect())
    }

    /// |δ{i}| (distinct neighbors).
    pub fn degree(&self, i: usize) -> Result<usize> {
        self.check_vertex(i)?;
        Ok(self.adjacency[i].len())
    }

    /// Number of comparisons involving `i`, counting multiplicity.
    pub fn weighted_degree(&self, i: usize) -> Result<usize> {
        self.check_vertex(i)?;
        Ok(self.adjacency[i].iter().map(|&(_, e)| self.edges[e].multiplicity).sum())
    }

    /// (neighbor, edge index) pairs for `i`; panics on an invalid vertex.
    pub(crate) fn incident(&self, i: usize) -> &[(usize, usize)] {
        &self.adjacency[i]
    }

    fn check_vertex(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange { vertex: i, n: self.n })
        }
    }

    /// Connected-component label per vertex (labels are 0.., in vertex order).
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut stack = Vec::new();
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            stack.push(s);
            while let Some(v) = stack.pop() {
                for &(w, _) in &self.adjacency[v] {
                    if label[w] == usize::MAX {
                        label[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().iter().all(|&c| c == 0)
    }

    /// Reads the edge-list text format: one `i j [multiplicity]` per line,
    /// `#` starts a comment. `n` is one more than the largest vertex id
    /// unless a `# n=<count>` header says otherwise.
    pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Self> {
        let mut n_header = None;
        let mut triples = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let (content, comment) = match line.split_once('#') {
                Some((c, rest)) => (c, Some(rest)),
                None => (line.as_str(), None),
            };
            if let Some(n) = comment.and_then(|c| c.trim().strip_prefix("n=")) {
                n_header = Some(n.trim().parse::<usize>().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    message: format!("bad vertex count `{n}`"),
                })?);
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if fields.len() > 3 || fields.len() < 2 {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: "expected `i j [multiplicity]`".into(),
                });
            }
            let parse = |s: &str| {
                s.parse::<usize>().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    message: format!("`{s}` is not a non-negative integer"),
                })
            };
            let mult = if fields.len() == 3 { parse(fields[2])? } else { 1 };
            triples.push((parse(fields[0])?, parse(fields[1])?, mult));
        }
        let inferred = triples.iter().map(|&(a, b, _)| a.max(b) + 1).max().unwrap_or(0);
        Self::from_edges(n_header.unwrap_or(inferred), triples)
    }

    /// Writes the edge-list format read by [`read_edge_list`](Self::read_edge_list).
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# n={}", self.n)?;
        for e in &self.edges {
            if e.multiplicity == 1 {
                writeln!(w, "{} {}", e.i, e.j)?;
            } else {
                writeln!(w, "{} {} {}", e.i, e.j, e.multiplicity)?;
            }
        }
        Ok(())
    }
}

/// How each pair's edge probability p_ij ∈ [p, q] is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ProbabilityRule {
    /// p_ij ~ Uniform[p, q], drawn once per pair.
    #[default]
    UniformRandom,
    ConstantP,
    ConstantQ,
}

/// How pairs are visited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PairScheme {
    /// One draw per unordered pair i < j.
    #[default]
    Unordered,
    /// One independent draw per ordered pair (i, j), i ≠ j; the undirected
    /// edge is present if either draw succeeds. Each pair then appears with
    /// probability 1 − (1 − p_ij)(1 − p_ji) ∈ [2p − p², 2q − q²].
    OrderedUnion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphSamplerConfig {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    #[serde(default)]
    pub rule: ProbabilityRule,
    #[serde(default)]
    pub scheme: PairScheme,
    pub seed: u64,
}

impl GraphSamplerConfig {
    pub fn new(n: usize, p: f64, q: f64, seed: u64) -> Self {
        Self {
            n,
            p,
            q,
            rule: ProbabilityRule::UniformRandom,
            scheme: PairScheme::Unordered,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = (0.0..=1.0).contains(&self.p) && (0.0..=1.0).contains(&self.q) && self.p <= self.q;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidProbability { p: self.p, q: self.q })
        }
    }
}

/// Samples a graph from G(n, p, q).
///
/// Pairs are visited in row-major order (i < j; for the ordered scheme (i, j)
/// then (j, i)) and each visit consumes the RNG in a fixed pattern, so the
/// result depends only on the config.
pub fn sample_graph(config: &GraphSamplerConfig) -> Result<ComparisonGraph> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.n;
    let (p, q) = (config.p, config.q);
    let draw = |rng: &mut ChaCha8Rng| -> bool {
        let prob = match config.rule {
            ProbabilityRule::UniformRandom => p + (q - p) * rng.random::<f64>(),
            ProbabilityRule::ConstantP => p,
            ProbabilityRule::ConstantQ => q,
        };
        rng.random::<f64>() < prob
    };
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let hit = match config.scheme {
                PairScheme::Unordered => draw(&mut rng),
                PairScheme::OrderedUnion => {
                    let a = draw(&mut rng);
                    let b = draw(&mut rng);
                    a || b
                }
            };
            if hit {
                pairs.push((i, j));
            }
        }
    }
    ComparisonGraph::from_pairs(n, pairs)
}
