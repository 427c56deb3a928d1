use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matching::{match_clusters, MatchingMode};
use crate::cluster::Partition;
use crate::embed::{cosine, EmbeddingTable, WordVector};
use crate::error::{Error, Result};

/// A cluster reduced to one vector (the sum of its members) and the table
/// token nearest to that vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterSummary {
    pub cluster_id: usize,
    pub members: Vec<String>,
    pub vector: WordVector,
    pub label: String,
}

/// Summarize every cluster of `partition`, where node `i` is `words[i]`.
/// With `normalize`, member vectors are scaled to unit length before summing.
pub fn summarize_clusters(
    partition: &Partition,
    words: &[String],
    table: &EmbeddingTable,
    normalize: bool,
) -> Result<Vec<ClusterSummary>> {
    if words.len() != partition.len() {
        return Err(Error::NodeSetMismatch {
            left: words.len(),
            right: partition.len(),
        });
    }
    let none = HashSet::new();
    partition
        .clusters()
        .into_par_iter()
        .enumerate()
        .map(|(cluster_id, nodes)| {
            let mut vector = WordVector::zeros(table.dim());
            for &v in &nodes {
                let member = table.require(&words[v])?;
                if normalize {
                    vector.add_assign(member.normalized()?.as_slice());
                } else {
                    vector.add_assign(member.as_slice());
                }
            }
            let label = table.nearest_label(&vector, &none)?;
            Ok(ClusterSummary {
                cluster_id,
                members: nodes.iter().map(|&v| words[v].clone()).collect(),
                vector,
                label,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub wa_cluster_id: usize,
    pub we_cluster_id: usize,
    pub cosine: f64,
    pub wa_label: String,
    pub we_label: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemanticConvergence {
    pub percent: f64,
    pub pairs: Vec<MatchedPair>,
    /// Mean cosine over matched pairs; 0 without pairs.
    pub mean_cosine: f64,
    /// Sample standard deviation over matched pairs; 0 with fewer than two.
    pub sd_cosine: f64,
}

/// Cosine between every WA summary (rows) and WE summary (columns).
pub fn summary_cosines(was: &[ClusterSummary], wes: &[ClusterSummary]) -> Result<Vec<Vec<f64>>> {
    was.par_iter()
        .map(|a| wes.iter().map(|e| cosine(&a.vector, &e.vector)).collect())
        .collect()
}

/// Share of the smaller cluster list paired one-to-one at cosine `>= threshold`.
pub fn semantic_convergence(
    was: &[ClusterSummary],
    wes: &[ClusterSummary],
    threshold: f64,
    mode: MatchingMode,
) -> Result<SemanticConvergence> {
    if was.is_empty() || wes.is_empty() {
        return Err(Error::Empty("cluster summaries"));
    }
    let sim = summary_cosines(was, wes)?;
    let pairs: Vec<MatchedPair> = match_clusters(&sim, threshold, mode)
        .into_iter()
        .map(|(i, j)| MatchedPair {
            wa_cluster_id: was[i].cluster_id,
            we_cluster_id: wes[j].cluster_id,
            cosine: sim[i][j],
            wa_label: was[i].label.clone(),
            we_label: wes[j].label.clone(),
        })
        .collect();
    let k = pairs.len() as f64;
    let mean_cosine = if pairs.is_empty() {
        0.0
    } else {
        pairs.iter().map(|p| p.cosine).sum::<f64>() / k
    };
    let sd_cosine = if pairs.len() < 2 {
        0.0
    } else {
        (pairs.iter().map(|p| (p.cosine - mean_cosine).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    };
    Ok(SemanticConvergence {
        percent: 100.0 * k / was.len().min(wes.len()) as f64,
        pairs,
        mean_cosine,
        sd_cosine,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn summary(id: usize, v: Vec<f64>) -> ClusterSummary {
        ClusterSummary {
            cluster_id: id,
            members: vec![],
            vector: WordVector::new(v).unwrap(),
            label: format!("c{id}"),
        }
    }

    fn table(rows: &[(&str, Vec<f64>)]) -> EmbeddingTable {
        let mut t = EmbeddingTable::new(rows[0].1.len()).unwrap();
        for (w, v) in rows {
            t.insert(*w, WordVector::new(v.clone()).unwrap()).unwrap();
        }
        t
    }

    #[test]
    fn singleton_cluster_is_its_own_vector() {
        let t = table(&[("a", vec![1.0, 0.2]), ("b", vec![0.0, 1.0])]);
        let words = vec!["a".to_string(), "b".to_string()];
        let s = summarize_clusters(&Partition::singletons(2), &words, &t, false).unwrap();
        assert_eq!(s[0].vector.as_slice(), &[1.0, 0.2]);
        assert_eq!(s[0].label, "a");
        assert_eq!(s[1].members, vec!["b"]);
    }

    #[test]
    fn planted_bundle_is_labeled_by_its_center() {
        // "fear" is the bundle center; members are small perturbations around
        // it, none equal to it.
        let mut rows = vec![("fear", vec![1.0, 0.0, 0.0]), ("calm", vec![0.0, 1.0, 0.0])];
        let names = ["f1", "f2", "f3", "f4", "f5"];
        let offsets = [0.1, -0.1, 0.05, -0.05, 0.02];
        for (n, o) in names.iter().zip(offsets) {
            rows.push((n, vec![1.0, o, -o]));
        }
        let t = table(&rows);
        let words: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        let s = summarize_clusters(&Partition::one_cluster(5), &words, &t, false).unwrap();
        // Exhaustive check: no table token beats the planted center.
        let best = t
            .iter()
            .map(|(w, v)| (cosine(&s[0].vector, v).unwrap(), w))
            .fold((f64::NEG_INFINITY, ""), |b, c| if c.0 > b.0 { c } else { b });
        assert_eq!(best.1, "fear");
        assert_eq!(s[0].label, "fear");
    }

    #[test]
    fn missing_member_is_an_error() {
        let t = table(&[("a", vec![1.0])]);
        let words = vec!["a".to_string(), "zz".to_string()];
        assert!(matches!(
            summarize_clusters(&Partition::one_cluster(2), &words, &t, false),
            Err(Error::MissingToken(_))
        ));
    }

    #[test]
    fn identical_lists_converge_fully() {
        let a = vec![summary(0, vec![1.0, 0.0]), summary(1, vec![0.0, 1.0])];
        let sc = semantic_convergence(&a, &a, 0.726, MatchingMode::Optimal).unwrap();
        assert_eq!(sc.percent, 100.0);
        assert!(sc.pairs.iter().all(|p| (p.cosine - 1.0).abs() < 1e-12));
        assert_eq!(sc.sd_cosine, 0.0);
    }

    #[test]
    fn nothing_above_threshold() {
        let a = vec![summary(0, vec![1.0, 0.0])];
        let e = vec![summary(0, vec![0.0, 1.0]), summary(1, vec![1.0, 1.5])];
        let sc = semantic_convergence(&a, &e, 0.726, MatchingMode::Optimal).unwrap();
        assert_eq!(sc.percent, 0.0);
        assert!(sc.pairs.is_empty());
        assert_eq!(sc.mean_cosine, 0.0);
    }

    fn summaries(max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(0.05f64..1.0, 3), 1..max)
    }

    proptest! {
        #[test]
        fn monotone_in_threshold(wa in summaries(7), we in summaries(7)) {
            let a: Vec<_> = wa.into_iter().enumerate().map(|(i, v)| summary(i, v)).collect();
            let e: Vec<_> = we.into_iter().enumerate().map(|(i, v)| summary(i, v)).collect();
            let mut last = 100.0;
            for step in 0..=35 {
                let t = 0.60 + 0.01 * step as f64;
                let sc = semantic_convergence(&a, &e, t, MatchingMode::Optimal).unwrap();
                prop_assert!((0.0..=100.0).contains(&sc.percent));
                prop_assert!(sc.percent <= last + 1e-12);
                if !sc.pairs.is_empty() {
                    prop_assert!(sc.mean_cosine >= t);
                }
                last = sc.percent;
            }
        }
    }
}
