//! Undirected weighted word graphs shared by the association (WA) and
//! embedding (WE) sides, with the network statistics reported per study.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::Partition;
use crate::embed::{cosine_slices, EmbeddingTable};
use crate::error::{Error, Result};
use crate::norms::{AssociationTable, Pos, StrengthClass};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GraphKind {
    WA,
    WE,
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphKind::WA => "WA",
            GraphKind::WE => "WE",
        })
    }
}

impl FromStr for GraphKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "WA" => Ok(GraphKind::WA),
            "WE" => Ok(GraphKind::WE),
            _ => Err(Error::InvalidParameter(format!("unknown graph kind {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Undirected graph over an ordered, duplicate-free token list. Edges are
/// stored once with `a < b`; no self-loops, weights finite and `>= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    kind: GraphKind,
    nodes: Vec<String>,
    edges: Vec<Edge>,
}

impl WeightedGraph {
    pub fn new(kind: GraphKind, nodes: Vec<String>, edges: Vec<Edge>) -> Result<Self> {
        let mut seen = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if seen.insert(n.as_str(), i).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate node {n:?}")));
            }
        }
        let mut edges = edges;
        for e in edges.iter_mut() {
            if e.a == e.b {
                return Err(Error::InvalidParameter(format!("self-loop on node {}", e.a)));
            }
            if e.a.max(e.b) >= nodes.len() {
                return Err(Error::InvalidParameter(format!(
                    "edge ({}, {}) out of range",
                    e.a, e.b
                )));
            }
            if !e.weight.is_finite() || e.weight < 0.0 {
                return Err(Error::InvalidParameter(format!("edge weight {}", e.weight)));
            }
            if e.a > e.b {
                std::mem::swap(&mut e.a, &mut e.b);
            }
        }
        edges.sort_by_key(|e| (e.a, e.b));
        if edges.windows(2).any(|w| (w[0].a, w[0].b) == (w[1].a, w[1].b)) {
            return Err(Error::InvalidParameter("duplicate edge".into()));
        }
        Ok(WeightedGraph { kind, nodes, edges })
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Weighted degree of every node.
    pub fn strengths(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.nodes.len()];
        for e in &self.edges {
            s[e.a] += e.weight;
            s[e.b] += e.weight;
        }
        s
    }

    /// Neighbor lists `(node, weight)`, each sorted by node.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            adj[e.a].push((e.b, e.weight));
            adj[e.b].push((e.a, e.weight));
        }
        for row in adj.iter_mut() {
            row.sort_by_key(|&(v, _)| v);
        }
        adj
    }

    /// Same nodes, only edges whose weight satisfies `keep`.
    pub fn filter_edges(&self, mut keep: impl FnMut(&Edge) -> bool) -> WeightedGraph {
        WeightedGraph {
            kind: self.kind,
            nodes: self.nodes.clone(),
            edges: self.edges.iter().filter(|e| keep(e)).copied().collect(),
        }
    }

    /// Thresholded WE graph from a complete one: identical to calling
    /// [`we_graph`] with `Some(threshold)` on the same words.
    pub fn at_threshold(&self, threshold: f64) -> WeightedGraph {
        self.filter_edges(|e| e.weight >= threshold)
    }

    /// Connected components as a partition; isolates are singletons.
    pub fn components(&self) -> Partition {
        let n = self.nodes.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in &self.edges {
            let (ra, rb) = (find(&mut parent, e.a), find(&mut parent, e.b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let labels: Vec<usize> = (0..n).map(|v| find(&mut parent, v)).collect();
        Partition::from_labels(&labels)
    }
}

/// WA graph: one node per word of the table (sorted), edge weight the
/// averaged FSA/BSA weight. Words without edges stay as isolates.
pub fn wa_graph(table: &AssociationTable) -> Result<WeightedGraph> {
    if table.word_count() == 0 {
        return Err(Error::Empty("association table"));
    }
    let nodes: Vec<String> = table.tokens().map(str::to_owned).collect();
    let index: HashMap<&str, usize> = nodes.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    let edges = table
        .edges()
        .iter()
        .map(|e| Edge {
            a: index[e.word_a.as_str()],
            b: index[e.word_b.as_str()],
            weight: e.weight,
        })
        .collect();
    WeightedGraph::new(GraphKind::WA, nodes, edges)
}

/// WE graph over `words` in the given order.
///
/// Without a threshold every pair with a positive cosine is connected;
/// orthogonal and opposed pairs would carry zero weight and are left out.
/// With a threshold only pairs at or above it are kept. Weight is the cosine.
pub fn we_graph(words: &[String], table: &EmbeddingTable, threshold: Option<f64>) -> Result<WeightedGraph> {
    let vectors = words
        .iter()
        .map(|w| table.require(w).map(|v| v.as_slice()))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<Edge>> = (0..words.len())
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::new();
            for j in (i + 1)..words.len() {
                let c = cosine_slices(vectors[i], vectors[j])?;
                match threshold {
                    None if c > 0.0 => row.push(Edge { a: i, b: j, weight: c }),
                    Some(t) if c >= t && c > 0.0 => row.push(Edge { a: i, b: j, weight: c }),
                    _ => {}
                }
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    WeightedGraph::new(GraphKind::WE, words.to_vec(), rows.into_iter().flatten().collect())
}

/// Weighted Newman modularity
/// `Q = sum_c [ w_in(c)/W - (s(c) / 2W)^2 ]`.
pub fn modularity(graph: &WeightedGraph, partition: &Partition) -> Result<f64> {
    if partition.len() != graph.node_count() {
        return Err(Error::Coverage(format!(
            "partition covers {} nodes, graph has {}",
            partition.len(),
            graph.node_count()
        )));
    }
    let total = graph.total_weight();
    if total <= 0.0 {
        return Err(Error::ZeroWeight);
    }
    let k = partition.n_clusters();
    let mut internal = vec![0.0; k];
    let mut strength = vec![0.0; k];
    for e in graph.edges() {
        let (ca, cb) = (partition.cluster_of(e.a), partition.cluster_of(e.b));
        if ca == cb {
            internal[ca] += e.weight;
        }
        strength[ca] += e.weight;
        strength[cb] += e.weight;
    }
    Ok(internal
        .iter()
        .zip(&strength)
        .map(|(w, s)| w / total - (s / (2.0 * total)).powi(2))
        .sum())
}

/// `2 * edges / nodes`, counting edges regardless of weight.
pub fn average_degree(graph: &WeightedGraph) -> Result<f64> {
    if graph.node_count() == 0 {
        return Err(Error::Empty("graph"));
    }
    Ok(2.0 * graph.edge_count() as f64 / graph.node_count() as f64)
}

/// Fraction of absent node pairs; 0 for graphs with fewer than two nodes.
pub fn sparsity(graph: &WeightedGraph) -> f64 {
    let n = graph.node_count() as f64;
    if n < 2.0 {
        return 0.0;
    }
    1.0 - graph.edge_count() as f64 / (n * (n - 1.0) / 2.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkStats {
    /// `None` when the graph has no edge weight.
    pub modularity: Option<f64>,
    pub average_degree: f64,
    pub node_count: usize,
    pub edge_count: usize,
    pub sparsity: f64,
}

pub fn network_stats(graph: &WeightedGraph, partition: &Partition) -> Result<NetworkStats> {
    let modularity = match modularity(graph, partition) {
        Ok(q) => Some(q),
        Err(Error::ZeroWeight) => None,
        Err(e) => return Err(e),
    };
    Ok(NetworkStats {
        modularity,
        average_degree: average_degree(graph)?,
        node_count: graph.node_count(),
        edge_count: graph.edge_count(),
        sparsity: sparsity(graph),
    })
}

/// WA probability ranges used to calibrate cosine thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ProbabilityBand {
    #[serde(rename = "<1%")]
    Under1,
    #[serde(rename = "5-10%")]
    From5To10,
    #[serde(rename = "10-15%")]
    From10To15,
    #[serde(rename = "15-20%")]
    From15To20,
    #[serde(rename = ">20%")]
    Over20,
}

impl ProbabilityBand {
    pub const ALL: [ProbabilityBand; 5] = [
        ProbabilityBand::Under1,
        ProbabilityBand::From5To10,
        ProbabilityBand::From10To15,
        ProbabilityBand::From15To20,
        ProbabilityBand::Over20,
    ];

    /// Half-open `[lo, hi)` bounds; the top band is closed at 1.
    pub fn bounds(self) -> (f64, f64) {
        match self {
            ProbabilityBand::Under1 => (0.0, 0.01),
            ProbabilityBand::From5To10 => (0.05, 0.10),
            ProbabilityBand::From10To15 => (0.10, 0.15),
            ProbabilityBand::From15To20 => (0.15, 0.20),
            ProbabilityBand::Over20 => (0.20, f64::INFINITY),
        }
    }

    pub fn of(probability: f64) -> Option<ProbabilityBand> {
        if probability <= 0.0 {
            return None;
        }
        ProbabilityBand::ALL.into_iter().find(|b| {
            let (lo, hi) = b.bounds();
            probability >= lo && probability < hi
        })
    }

    /// The band whose cosine gates a WE network paired with a WA network of
    /// the given strength class; `None` is the unrestricted network.
    pub fn for_class(class: Option<StrengthClass>) -> ProbabilityBand {
        match class {
            None => ProbabilityBand::From5To10,
            Some(StrengthClass::Low) => ProbabilityBand::From10To15,
            Some(StrengthClass::Moderate) => ProbabilityBand::From15To20,
            Some(StrengthClass::High) => ProbabilityBand::Over20,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ProbabilityBand::Under1 => "<1%",
            ProbabilityBand::From5To10 => "5-10%",
            ProbabilityBand::From10To15 => "10-15%",
            ProbabilityBand::From15To20 => "15-20%",
            ProbabilityBand::Over20 => ">20%",
        }
    }
}

/// Per-POS cosine thresholds, strictly increasing with band.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    pub pos: Pos,
    pub thresholds: Vec<(ProbabilityBand, f64)>,
}

impl ThresholdTable {
    pub fn new(pos: Pos, mut thresholds: Vec<(ProbabilityBand, f64)>) -> Result<Self> {
        thresholds.sort_by_key(|(b, _)| *b);
        for w in thresholds.windows(2) {
            if w[0].0 == w[1].0 || w[1].1 <= w[0].1 {
                return Err(Error::InvalidParameter(format!(
                    "{pos} thresholds must strictly increase with band ({} {} vs {} {})",
                    w[0].0.label(),
                    w[0].1,
                    w[1].0.label(),
                    w[1].1
                )));
            }
        }
        Ok(ThresholdTable { pos, thresholds })
    }

    /// Thresholds for all five bands, in band order.
    pub fn from_values(pos: Pos, values: &[f64]) -> Result<Self> {
        if values.len() != ProbabilityBand::ALL.len() {
            return Err(Error::InvalidParameter(format!(
                "{pos}: expected {} thresholds, got {}",
                ProbabilityBand::ALL.len(),
                values.len()
            )));
        }
        ThresholdTable::new(pos, ProbabilityBand::ALL.into_iter().zip(values.iter().copied()).collect())
    }

    /// The published noun, verb, and adjective lists.
    pub fn published(pos: Pos) -> Option<Self> {
        let values: &[f64] = match pos {
            Pos::Noun => &[0.65, 0.71, 0.72, 0.74, 0.77],
            Pos::Verb => &[0.67, 0.72, 0.74, 0.75, 0.78],
            Pos::Adjective => &[0.68, 0.75, 0.77, 0.79, 0.81],
            Pos::Adverb => return None,
        };
        Some(ThresholdTable::from_values(pos, values).expect("published values increase"))
    }

    pub fn get(&self, band: ProbabilityBand) -> Option<f64> {
        self.thresholds.iter().find(|(b, _)| *b == band).map(|(_, t)| *t)
    }

    pub fn for_class(&self, class: Option<StrengthClass>) -> Option<f64> {
        self.get(ProbabilityBand::for_class(class))
    }
}

/// Write the graph as a node manifest (`@node<TAB>token` lines, in order)
/// followed by a `node_a node_b weight` edge list.
pub fn write_graph<W: Write>(graph: &WeightedGraph, mut out: W) -> Result<()> {
    writeln!(out, "#kind\t{}", graph.kind())?;
    for n in graph.nodes() {
        writeln!(out, "@node\t{n}")?;
    }
    writeln!(out, "node_a\tnode_b\tweight")?;
    for e in graph.edges() {
        writeln!(out, "{}\t{}\t{}", graph.nodes[e.a], graph.nodes[e.b], e.weight)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_graph<R: BufRead>(reader: R) -> Result<WeightedGraph> {
    let mut kind = None;
    let mut nodes = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut edges = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        let parse_err = |message: String| Error::Parse { line: lineno, message };
        if line.trim().is_empty() || line == "node_a\tnode_b\tweight" {
            continue;
        }
        if let Some(k) = line.strip_prefix("#kind\t") {
            kind = Some(k.parse::<GraphKind>().map_err(|e| parse_err(e.to_string()))?);
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        if let Some(token) = line.strip_prefix("@node\t") {
            if index.insert(token.to_owned(), nodes.len()).is_some() {
                return Err(parse_err(format!("duplicate node {token:?}")));
            }
            nodes.push(token.to_owned());
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(parse_err("expected node_a<TAB>node_b<TAB>weight".into()));
        }
        let lookup = |t: &str| {
            index
                .get(t)
                .copied()
                .ok_or_else(|| parse_err(format!("edge references unknown node {t:?}")))
        };
        let weight: f64 = fields[2]
            .parse()
            .map_err(|_| parse_err(format!("bad weight {:?}", fields[2])))?;
        edges.push(Edge {
            a: lookup(fields[0])?,
            b: lookup(fields[1])?,
            weight,
        });
    }
    let kind = kind.ok_or_else(|| Error::MalformedHeader("missing #kind line".into()))?;
    WeightedGraph::new(kind, nodes, edges)
}
