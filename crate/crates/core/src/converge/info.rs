use std::collections::HashMap;

use crate::cluster::Partition;
use crate::error::{Error, Result};

fn check_same_nodes(a: &Partition, e: &Partition) -> Result<()> {
    if a.len() != e.len() {
        return Err(Error::NodeSetMismatch {
            left: a.len(),
            right: e.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::Empty("partition"));
    }
    Ok(())
}

fn entropy_of_counts<I: IntoIterator<Item = usize>>(counts: I, n: usize) -> f64 {
    let n = n as f64;
    counts
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Shannon entropy (nats) of the cluster-size distribution.
pub fn entropy(p: &Partition) -> f64 {
    entropy_of_counts(p.cluster_sizes(), p.len())
}

fn joint_entropy(a: &Partition, e: &Partition) -> f64 {
    let mut cells: HashMap<(usize, usize), usize> = HashMap::new();
    for v in 0..a.len() {
        *cells.entry((a.cluster_of(v), e.cluster_of(v))).or_insert(0) += 1;
    }
    let mut counts: Vec<usize> = cells.into_values().collect();
    // Fixed summation order keeps results bit-stable across runs.
    counts.sort_unstable();
    entropy_of_counts(counts, a.len())
}

/// `H(A|E) = H(A,E) - H(E)`, clamped at zero against rounding.
pub fn conditional_entropy(a: &Partition, e: &Partition) -> Result<f64> {
    check_same_nodes(a, e)?;
    Ok((joint_entropy(a, e) - entropy(e)).max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InformationalConvergence {
    pub percent: f64,
    pub h_wa: f64,
    pub h_we: f64,
    pub h_wa_given_we: f64,
    /// Both partitions are a single cluster; the percent is 100 by convention.
    pub degenerate: bool,
}

/// Normalized mutual information between two partitions of the same nodes,
/// as a percentage.
pub fn informational_convergence(a: &Partition, e: &Partition) -> Result<InformationalConvergence> {
    check_same_nodes(a, e)?;
    let h_a = entropy(a);
    let h_e = entropy(e);
    let h_ae = conditional_entropy(a, e)?;
    if h_a + h_e == 0.0 {
        return Ok(InformationalConvergence {
            percent: 100.0,
            h_wa: 0.0,
            h_we: 0.0,
            h_wa_given_we: 0.0,
            degenerate: true,
        });
    }
    // Canonical labels make equality exact; skip the rounding in the ratio.
    let percent = if a == e {
        100.0
    } else {
        (100.0 * 2.0 * (h_a - h_ae) / (h_a + h_e)).clamp(0.0, 100.0)
    };
    Ok(InformationalConvergence {
        percent,
        h_wa: h_a,
        h_we: h_e,
        h_wa_given_we: h_ae,
        degenerate: false,
    })
}
