use std::collections::HashMap;
use std::hash::Hash;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Assignment of every node `0..n` to exactly one cluster.
///
/// Cluster ids are dense and numbered by first appearance in node order, so
/// two partitions with the same blocks compare equal regardless of the
/// labels they were built from.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    assignment: Vec<usize>,
    n_clusters: usize,
}

impl Partition {
    pub fn from_labels<T: Hash + Eq + Clone>(labels: &[T]) -> Self {
        let mut ids: HashMap<T, usize> = HashMap::new();
        let assignment = labels
            .iter()
            .map(|l| {
                let next = ids.len();
                *ids.entry(l.clone()).or_insert(next)
            })
            .collect();
        Partition {
            assignment,
            n_clusters: ids.len(),
        }
    }

    pub fn singletons(n: usize) -> Self {
        Partition {
            assignment: (0..n).collect(),
            n_clusters: n,
        }
    }

    pub fn one_cluster(n: usize) -> Self {
        Partition {
            assignment: vec![0; n],
            n_clusters: usize::from(n > 0),
        }
    }

    /// Build from explicit member lists; every node in `0..n` must appear
    /// exactly once.
    pub fn from_clusters(n: usize, clusters: &[Vec<usize>]) -> Result<Self> {
        let mut labels = vec![usize::MAX; n];
        for (c, members) in clusters.iter().enumerate() {
            for &v in members {
                if v >= n || labels[v] != usize::MAX {
                    return Err(Error::Coverage(format!("node {v} out of range or repeated")));
                }
                labels[v] = c;
            }
        }
        if let Some(v) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(Error::Coverage(format!("node {v} not assigned")));
        }
        Ok(Partition::from_labels(&labels))
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn cluster_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_clusters];
        for (v, &c) in self.assignment.iter().enumerate() {
            out[c].push(v);
        }
        out
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_clusters];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }

    /// Partition induced on `nodes` (in the given order).
    pub fn subset(&self, nodes: &[usize]) -> Partition {
        let labels: Vec<usize> = nodes.iter().map(|&v| self.assignment[v]).collect();
        Partition::from_labels(&labels)
    }

    /// Partition induced on the first `n` nodes.
    pub fn truncate(&self, n: usize) -> Partition {
        Partition::from_labels(&self.assignment[..n])
    }
}

/// Write `token<TAB>cluster_id` lines under a header.
pub fn write_partition<W: Write>(tokens: &[String], partition: &Partition, mut out: W) -> Result<()> {
    if tokens.len() != partition.len() {
        return Err(Error::NodeSetMismatch {
            left: tokens.len(),
            right: partition.len(),
        });
    }
    writeln!(out, "token\tcluster_id")?;
    for (t, &c) in tokens.iter().zip(partition.assignment()) {
        writeln!(out, "{t}\t{c}")?;
    }
    out.flush()?;
    Ok(())
}

/// Read a partition file against a known node list; every node must be
/// assigned exactly once and no unknown tokens may appear.
pub fn read_partition<R: BufRead>(reader: R, nodes: &[String]) -> Result<Partition> {
    let index: HashMap<&str, usize> = nodes.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    let mut labels: Vec<Option<String>> = vec![None; nodes.len()];
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || (i == 0 && line.starts_with("token\t")) {
            continue;
        }
        let (token, cluster) = line.split_once('\t').ok_or_else(|| Error::Parse {
            line: i + 1,
            message: "expected token<TAB>cluster_id".into(),
        })?;
        let &v = index
            .get(token)
            .ok_or_else(|| Error::Coverage(format!("line {}: {token:?} is not a graph node", i + 1)))?;
        if labels[v].is_some() {
            return Err(Error::Coverage(format!("line {}: {token:?} assigned twice", i + 1)));
        }
        labels[v] = Some(cluster.trim().to_owned());
    }
    let missing: Vec<&str> = labels
        .iter()
        .zip(nodes)
        .filter(|(l, _)| l.is_none())
        .map(|(_, t)| t.as_str())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Coverage(format!(
            "{} node(s) missing from partition, first {:?}",
            missing.len(),
            missing[0]
        )));
    }
    let labels: Vec<String> = labels.into_iter().map(Option::unwrap).collect();
    Ok(Partition::from_labels(&labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_are_canonical() {
        let a = Partition::from_labels(&[7, 7, 3, 9]);
        let b = Partition::from_labels(&["x", "x", "y", "z"]);
        assert_eq!(a, b);
        assert_eq!(a.assignment(), &[0, 0, 1, 2]);
        assert_eq!(a.clusters(), vec![vec![0, 1], vec![2], vec![3]]);
        assert_eq!(a.truncate(2), Partition::one_cluster(2));
        assert_eq!(a.subset(&[3, 2]), Partition::singletons(2));
    }

    #[test]
    fn from_clusters_checks_coverage() {
        assert!(Partition::from_clusters(3, &[vec![0, 1]]).is_err());
        assert!(Partition::from_clusters(2, &[vec![0, 1], vec![1]]).is_err());
        let p = Partition::from_clusters(3, &[vec![2], vec![0, 1]]).unwrap();
        assert_eq!(p.assignment(), &[0, 0, 1]);
    }

    #[test]
    fn file_round_trip_and_coverage() {
        let nodes: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let p = Partition::from_labels(&[0, 1, 0]);
        let mut buf = Vec::new();
        write_partition(&nodes, &p, &mut buf).unwrap();
        assert_eq!(read_partition(buf.as_slice(), &nodes).unwrap(), p);
        let missing = "token\tcluster_id\na\t0\nb\t1\n";
        assert!(matches!(
            read_partition(missing.as_bytes(), &nodes),
            Err(Error::Coverage(_))
        ));
        let unknown = "a\t0\nb\t1\nc\t0\nd\t2\n";
        assert!(read_partition(unknown.as_bytes(), &nodes).is_err());
    }
}
