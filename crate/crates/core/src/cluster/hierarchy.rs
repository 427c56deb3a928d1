use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::str::FromStr;

use kodama::Method;
use serde::{Deserialize, Serialize};

use crate::embed::{cosine_slices, EmbeddingTable};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    #[default]
    Average,
    Complete,
    Single,
}

impl Linkage {
    fn method(self) -> Method {
        match self {
            Linkage::Average => Method::Average,
            Linkage::Complete => Method::Complete,
            Linkage::Single => Method::Single,
        }
    }
}

impl FromStr for Linkage {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "average" => Ok(Linkage::Average),
            "complete" => Ok(Linkage::Complete),
            "single" => Ok(Linkage::Single),
            other => Err(Error::InvalidParameter(format!("unknown linkage {other:?}"))),
        }
    }
}

/// One agglomeration step. Subtree ids below `n` are leaves; merge `i`
/// creates subtree `n + i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

/// Binary merge record over `leaves` leaves: exactly `leaves - 1` merges,
/// heights non-decreasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    leaves: usize,
    merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn new(leaves: usize, merges: Vec<Merge>) -> Result<Self> {
        if leaves < 1 || merges.len() + 1 != leaves {
            return Err(Error::InvalidParameter(format!(
                "{} merges cannot join {leaves} leaves",
                merges.len()
            )));
        }
        let mut size = vec![1usize; leaves];
        let mut used = vec![false; 2 * leaves - 1];
        for (i, m) in merges.iter().enumerate() {
            let id = leaves + i;
            for child in [m.left, m.right] {
                if child >= id || used[child] {
                    return Err(Error::InvalidParameter(format!("merge {i} reuses or forward-references subtree {child}")));
                }
                used[child] = true;
            }
            if !(m.height.is_finite() && m.height >= 0.0) {
                return Err(Error::InvalidParameter(format!("merge {i} has height {}", m.height)));
            }
            size.push(size[m.left] + size[m.right]);
            if m.size != size[id] {
                return Err(Error::InvalidParameter(format!("merge {i} declares size {} but joins {}", m.size, size[id])));
            }
        }
        Ok(Dendrogram { leaves, merges })
    }

    pub fn leaves(&self) -> usize {
        self.leaves
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn max_height(&self) -> f64 {
        self.merges.iter().map(|m| m.height).fold(0.0, f64::max)
    }

    /// Leaf ids under every subtree id, leaves first.
    pub(crate) fn members(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = (0..self.leaves).map(|v| vec![v]).collect();
        for m in &self.merges {
            let mut joined = out[m.left].clone();
            joined.extend_from_slice(&out[m.right]);
            joined.sort_unstable();
            out.push(joined);
        }
        out
    }
}

/// Agglomerate `words` under `1 - cosine` with average linkage.
pub fn agglomerate(words: &[String], table: &EmbeddingTable) -> Result<Dendrogram> {
    agglomerate_with(words, table, Linkage::Average)
}

pub fn agglomerate_with(words: &[String], table: &EmbeddingTable, linkage: Linkage) -> Result<Dendrogram> {
    let n = words.len();
    if n < 2 {
        return Err(Error::InvalidParameter(format!("agglomeration needs at least 2 words, got {n}")));
    }
    let mut seen = HashSet::new();
    for w in words {
        if !seen.insert(w.as_str()) {
            return Err(Error::InvalidParameter(format!("duplicate word {w:?}")));
        }
    }
    let vectors = words
        .iter()
        .map(|w| table.require(w).map(|v| v.as_slice()))
        .collect::<Result<Vec<_>>>()?;
    let mut condensed = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            condensed.push(1.0 - cosine_slices(vectors[i], vectors[j])?);
        }
    }
    Ok(from_condensed(&mut condensed, n, linkage))
}

/// Cluster a condensed upper-triangle distance matrix (row-major, `i < j`).
/// The buffer is overwritten.
pub fn from_condensed(condensed: &mut [f64], n: usize, linkage: Linkage) -> Dendrogram {
    let dend = kodama::linkage(condensed, n, linkage.method());
    let merges = dend
        .steps()
        .iter()
        .map(|s| Merge {
            left: s.cluster1.min(s.cluster2),
            right: s.cluster1.max(s.cluster2),
            height: s.dissimilarity.max(0.0),
            size: s.size,
        })
        .collect();
    Dendrogram { leaves: n, merges }
}

const DENDROGRAM_HEADER: &str = "left\tright\theight\tsize";

pub fn write_dendrogram<W: Write>(d: &Dendrogram, mut out: W) -> Result<()> {
    writeln!(out, "#leaves\t{}", d.leaves)?;
    writeln!(out, "{DENDROGRAM_HEADER}")?;
    for m in &d.merges {
        writeln!(out, "{}\t{}\t{}\t{}", m.left, m.right, m.height, m.size)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_dendrogram<R: BufRead>(reader: R) -> Result<Dendrogram> {
    let mut leaves = None;
    let mut merges = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        let parse_err = |message: String| Error::Parse { line: i + 1, message };
        if line.trim().is_empty() || line == DENDROGRAM_HEADER {
            continue;
        }
        if let Some(rest) = line.strip_prefix("#leaves\t") {
            leaves = Some(rest.trim().parse::<usize>().map_err(|e| parse_err(e.to_string()))?);
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 4 {
            return Err(parse_err(format!("expected 4 fields, found {}", f.len())));
        }
        let int = |s: &str| s.trim().parse::<usize>().map_err(|e| parse_err(format!("{s:?}: {e}")));
        merges.push(Merge {
            left: int(f[0])?,
            right: int(f[1])?,
            height: f[2].trim().parse().map_err(|e| parse_err(format!("{:?}: {e}", f[2])))?,
            size: int(f[3])?,
        });
    }
    let leaves = leaves.ok_or_else(|| Error::MalformedHeader("missing #leaves line".into()))?;
    Dendrogram::new(leaves, merges)
}
