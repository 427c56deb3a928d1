//! Agreement between a WA partition and a WE partition of the same words:
//! informational convergence compares cluster memberships, semantic
//! convergence compares what the clusters mean.

mod info;
mod matching;
mod semantic;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use info::{conditional_entropy, entropy, informational_convergence, InformationalConvergence};
pub use matching::{match_clusters, MatchingMode};
pub use semantic::{
    semantic_convergence, summarize_clusters, summary_cosines, ClusterSummary, MatchedPair, SemanticConvergence,
};

use crate::cluster::Partition;
use crate::embed::EmbeddingTable;
use crate::error::{Error, Result};
use crate::graph::{network_stats, NetworkStats, WeightedGraph};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceOptions {
    pub sc_threshold: f64,
    pub matching: MatchingMode,
    pub normalize_before_sum: bool,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        ConvergenceOptions {
            sc_threshold: 0.726,
            matching: MatchingMode::Optimal,
            normalize_before_sum: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub ic_percent: f64,
    pub sc_percent: f64,
    pub pairs: Vec<MatchedPair>,
    pub mean_cosine: f64,
    pub sd_cosine: f64,
    pub h_wa: f64,
    pub h_we: f64,
    pub h_wa_given_we: f64,
    pub n_wa_clusters: usize,
    pub n_we_clusters: usize,
    pub stats_wa: NetworkStats,
    pub stats_we: NetworkStats,
    pub seed: u64,
    /// Both partitions are a single cluster, so IC is 100 by convention.
    pub ic_degenerate: bool,
    pub sc_threshold: f64,
    pub matching: MatchingMode,
}

/// Full comparison of two clustered graphs over the same node list.
pub fn convergence_report(
    wa: (&WeightedGraph, &Partition),
    we: (&WeightedGraph, &Partition),
    table: &EmbeddingTable,
    opts: &ConvergenceOptions,
    seed: u64,
) -> Result<ConvergenceReport> {
    let (wa_graph, wa_part) = wa;
    let (we_graph, we_part) = we;
    if wa_graph.nodes() != we_graph.nodes() {
        return Err(Error::NodeSetMismatch {
            left: wa_graph.node_count(),
            right: we_graph.node_count(),
        });
    }
    let words = wa_graph.nodes();
    let ic = informational_convergence(wa_part, we_part)?;
    let was = summarize_clusters(wa_part, words, table, opts.normalize_before_sum)?;
    let wes = summarize_clusters(we_part, words, table, opts.normalize_before_sum)?;
    let sc = semantic_convergence(&was, &wes, opts.sc_threshold, opts.matching)?;
    Ok(ConvergenceReport {
        ic_percent: ic.percent,
        sc_percent: sc.percent,
        pairs: sc.pairs,
        mean_cosine: sc.mean_cosine,
        sd_cosine: sc.sd_cosine,
        h_wa: ic.h_wa,
        h_we: ic.h_we,
        h_wa_given_we: ic.h_wa_given_we,
        n_wa_clusters: wa_part.n_clusters(),
        n_we_clusters: we_part.n_clusters(),
        stats_wa: network_stats(wa_graph, wa_part)?,
        stats_we: network_stats(we_graph, we_part)?,
        seed,
        ic_degenerate: ic.degenerate,
        sc_threshold: opts.sc_threshold,
        matching: opts.matching,
    })
}

/// Matched pairs as `wa_cluster_id we_cluster_id cosine wa_label we_label`.
pub fn write_pairs<W: Write>(pairs: &[MatchedPair], mut out: W) -> Result<()> {
    writeln!(out, "wa_cluster_id\twe_cluster_id\tcosine\twa_label\twe_label")?;
    for p in pairs {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            p.wa_cluster_id, p.we_cluster_id, p.cosine, p.wa_label, p.we_label
        )?;
    }
    out.flush()?;
    Ok(())
}
