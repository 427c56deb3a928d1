use serde::{Deserialize, Serialize};

use super::{Dendrogram, Partition};
use crate::embed::{cosine, sum_vectors, EmbeddingTable, WordVector};
use crate::error::{Error, Result};

/// Static-height branch cut with reassignment of undersized branches.
///
/// `min_split_height` is carried for configuration parity; this variant
/// never splits below the join height, so only a value above
/// `max_join_height` would constrain it, and that is rejected.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeCut {
    pub min_cluster_size: usize,
    pub max_join_height: f64,
    pub min_split_height: f64,
}

impl Default for TreeCut {
    fn default() -> Self {
        TreeCut {
            min_cluster_size: 2,
            max_join_height: 0.99,
            min_split_height: 0.0,
        }
    }
}

impl TreeCut {
    fn validate(&self) -> Result<()> {
        if self.min_cluster_size == 0 {
            return Err(Error::InvalidParameter("min_cluster_size must be at least 1".into()));
        }
        if !(self.max_join_height >= 0.0 && self.min_split_height >= 0.0) {
            return Err(Error::InvalidParameter("cut heights must be nonnegative".into()));
        }
        if self.min_split_height > self.max_join_height {
            return Err(Error::InvalidParameter(format!(
                "min_split_height {} exceeds max_join_height {}",
                self.min_split_height, self.max_join_height
            )));
        }
        Ok(())
    }

    /// Cut `dendrogram`; `leaf_vectors[i]` is the vector of leaf `i`.
    pub fn cut(&self, dendrogram: &Dendrogram, leaf_vectors: &[&WordVector]) -> Result<Partition> {
        self.validate()?;
        let n = dendrogram.leaves();
        if leaf_vectors.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: leaf_vectors.len(),
            });
        }
        let branches = branches_below(dendrogram, self.max_join_height);
        let (large, small): (Vec<_>, Vec<_>) = branches
            .into_iter()
            .partition(|b| b.len() >= self.min_cluster_size);
        if large.is_empty() {
            return Ok(Partition::one_cluster(n));
        }
        let centers = large
            .iter()
            .map(|b| sum_vectors(b.iter().map(|&v| leaf_vectors[v])))
            .collect::<Result<Vec<_>>>()?;
        let mut clusters = large;
        for branch in small {
            let summed = sum_vectors(branch.iter().map(|&v| leaf_vectors[v]))?;
            let mut best = (f64::NEG_INFINITY, 0);
            for (c, center) in centers.iter().enumerate() {
                // A zero sum has no direction; it ranks below every real cosine.
                let score = cosine(&summed, center).unwrap_or(f64::NEG_INFINITY);
                if score > best.0 {
                    best = (score, c);
                }
            }
            clusters[best.1].extend(branch);
        }
        Partition::from_clusters(n, &clusters)
    }
}

/// Leaf sets of the components joined by merges at or below `height`,
/// ordered by smallest member.
fn branches_below(d: &Dendrogram, height: f64) -> Vec<Vec<usize>> {
    let n = d.leaves();
    let members = d.members();
    let mut root: Vec<usize> = (0..n).collect();
    for (i, m) in d.merges().iter().enumerate() {
        if m.height <= height {
            let id = n + i;
            for &v in &members[id] {
                root[v] = id;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (v, &r) in root.iter().enumerate() {
        groups.entry(r).or_default().push(v);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort_by_key(|b| b[0]);
    out
}

/// Cut with the leaf vectors looked up by word.
pub fn dynamic_tree_cut(
    dendrogram: &Dendrogram,
    words: &[String],
    table: &EmbeddingTable,
    params: &TreeCut,
) -> Result<Partition> {
    let vectors = words.iter().map(|w| table.require(w)).collect::<Result<Vec<_>>>()?;
    params.cut(dendrogram, &vectors)
}
