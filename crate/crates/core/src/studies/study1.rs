use serde::Serialize;

use super::config::{PosSelection, StudyConfig};
use super::data::Dataset;
use crate::cluster::{agglomerate_with, infomap_with, Dendrogram, Partition};
use crate::converge::{convergence_report, ConvergenceReport};
use crate::error::{Error, Result, StageExt};
use crate::graph::{wa_graph, we_graph, WeightedGraph};
use crate::norms::{filter_strength, split_pos, AssociationTable, ScreeningSummary};

#[derive(Clone, Debug, Serialize)]
pub struct Study1Output {
    pub report: ConvergenceReport,
    pub screening: ScreeningSummary,
    #[serde(skip)]
    pub wa_graph: WeightedGraph,
    #[serde(skip)]
    pub wa_partition: Partition,
    #[serde(skip)]
    pub we_partition: Partition,
    #[serde(skip)]
    pub dendrogram: Dendrogram,
}

/// Apply the config's optional strength class and POS restriction.
pub(crate) fn restrict(table: &AssociationTable, cfg: &StudyConfig) -> Result<AssociationTable> {
    let mut t = match cfg.strength {
        Some(class) => filter_strength(table, class, cfg.strength_rule),
        None => table.clone(),
    };
    if let PosSelection::Only(p) = cfg.pos {
        t = split_pos(&t).remove(&p).expect("split covers every POS");
    }
    if t.word_count() < 2 {
        return Err(Error::Empty("fewer than two words after restriction").at_stage("restrict"));
    }
    Ok(t)
}

/// Whole-network comparison: WA clusters by map-equation optimization, WE
/// clusters by agglomeration and tree cut over the complete cosine graph.
pub fn run_study1(cfg: &StudyConfig, data: &Dataset) -> Result<Study1Output> {
    let (table, screening) = data.prescreened(cfg)?;
    let table = restrict(&table, cfg)?;
    let wa = wa_graph(&table).stage("build-wa")?;
    let wa_partition = infomap_with(&wa, cfg.seed, &cfg.infomap_options());
    let words = wa.nodes().to_vec();
    let we = we_graph(&words, &data.embeddings, None).stage("build-we")?;
    let dendrogram = agglomerate_with(&words, &data.embeddings, cfg.linkage).stage("agglomerate")?;
    let we_partition = crate::cluster::dynamic_tree_cut(&dendrogram, &words, &data.embeddings, &cfg.tree_cut())
        .stage("tree-cut")?;
    let report = convergence_report(
        (&wa, &wa_partition),
        (&we, &we_partition),
        &data.embeddings,
        &cfg.convergence_options(),
        cfg.seed,
    )
    .stage("compare")?;
    Ok(Study1Output {
        report,
        screening,
        wa_graph: wa,
        wa_partition,
        we_partition,
        dendrogram,
    })
}
