use std::collections::BTreeMap;

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{StudyConfig, ThresholdMode};
use super::data::Dataset;
use crate::cluster::{agglomerate_with, dynamic_tree_cut, infomap_with};
use crate::converge::{convergence_report, informational_convergence, ConvergenceReport};
use crate::embed::{cosine, EmbeddingTable};
use crate::error::{Error, Result, StageExt};
use crate::graph::{wa_graph, we_graph, ProbabilityBand};
use crate::norms::{
    filter_strength, screen_vectors, split_pos, AssociationTable, DirectedProbs, Pos, ScreeningSummary, StrengthClass,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandCalibration {
    pub band: ProbabilityBand,
    pub mean_cosine: f64,
    pub pairs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Calibration {
    pub pos: Pos,
    pub bands: Vec<BandCalibration>,
    /// Bands without a single qualifying pair.
    pub empty_bands: Vec<ProbabilityBand>,
}

/// Mean cosine of embedded same-POS word pairs per WA probability band.
/// Each directed probability is one observation. POS classes without any
/// observation are left out.
pub fn calibrate_thresholds(
    probs: &DirectedProbs,
    pos: &BTreeMap<String, Pos>,
    embeddings: &EmbeddingTable,
) -> BTreeMap<Pos, Calibration> {
    let mut sums: BTreeMap<(Pos, ProbabilityBand), (f64, usize)> = BTreeMap::new();
    for ((cue, response), &p) in probs {
        if cue == response {
            continue;
        }
        let (Some(&pc), Some(&pr)) = (pos.get(cue), pos.get(response)) else { continue };
        if pc != pr {
            continue;
        }
        let (Some(u), Some(v)) = (embeddings.vector(cue), embeddings.vector(response)) else { continue };
        let (Some(band), Ok(c)) = (ProbabilityBand::of(p), cosine(u, v)) else { continue };
        let slot = sums.entry((pc, band)).or_insert((0.0, 0));
        slot.0 += c;
        slot.1 += 1;
    }
    Pos::ALL
        .iter()
        .filter(|&&p| sums.keys().any(|&(q, _)| q == p))
        .map(|&p| {
            let mut bands = Vec::new();
            let mut empty_bands = Vec::new();
            for band in ProbabilityBand::ALL {
                match sums.get(&(p, band)) {
                    Some(&(sum, pairs)) => bands.push(BandCalibration {
                        band,
                        mean_cosine: sum / pairs as f64,
                        pairs,
                    }),
                    None => {
                        warn!("no {p} pairs in the {} band; band omitted", band.label());
                        empty_bands.push(band);
                    }
                }
            }
            (p, Calibration { pos: p, bands, empty_bands })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Group {
    Heterogeneous,
    Pos(Pos),
}

impl Group {
    pub const ALL: [Group; 4] = [
        Group::Heterogeneous,
        Group::Pos(Pos::Noun),
        Group::Pos(Pos::Verb),
        Group::Pos(Pos::Adjective),
    ];

    pub fn name(self) -> &'static str {
        match self {
            Group::Heterogeneous => "heterogeneous",
            Group::Pos(p) => p.as_str(),
        }
    }
}

pub fn class_name(class: Option<StrengthClass>) -> &'static str {
    class.map_or("none", StrengthClass::as_str)
}

#[derive(Clone, Debug, Serialize)]
pub struct CellOutcome {
    pub cell: String,
    pub screened: bool,
    pub group: &'static str,
    pub class: &'static str,
    pub we_method: &'static str,
    pub threshold: Option<f64>,
    pub report: Option<ConvergenceReport>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Study2Output {
    pub screening: ScreeningSummary,
    pub excluded_vectors: Vec<String>,
    pub calibration: BTreeMap<Pos, Calibration>,
    pub cells: Vec<CellOutcome>,
}

fn strength_tables(base: &AssociationTable, cfg: &StudyConfig) -> Result<Vec<(Option<StrengthClass>, AssociationTable)>> {
    let mut out = vec![(None, base.clone())];
    for class in StrengthClass::ALL {
        out.push((Some(class), filter_strength(base, class, cfg.strength_rule)));
    }
    for w in out.windows(2) {
        if !w[1].1.edges_subset_of(&w[0].1) {
            return Err(Error::Invariant(format!(
                "{} edge set is not nested in {}",
                class_name(w[1].0),
                class_name(w[0].0)
            )));
        }
    }
    Ok(out)
}

fn run_cell(
    cfg: &StudyConfig,
    data: &Dataset,
    table: &AssociationTable,
    group: Group,
    class: Option<StrengthClass>,
) -> Result<(ConvergenceReport, Option<f64>, &'static str)> {
    let table = match group {
        Group::Heterogeneous => table.clone(),
        Group::Pos(p) => split_pos(table).remove(&p).expect("split covers every POS"),
    };
    if table.word_count() < 2 {
        return Err(Error::Empty("fewer than two words in cell"));
    }
    let wa = wa_graph(&table).stage("build-wa")?;
    let wa_part = infomap_with(&wa, cfg.seed, &cfg.infomap_options());
    let words = wa.nodes().to_vec();
    let emb = &data.embeddings;
    let opts = cfg.convergence_options();
    match group {
        Group::Heterogeneous => {
            let we = we_graph(&words, emb, None).stage("build-we")?;
            let d = agglomerate_with(&words, emb, cfg.linkage).stage("agglomerate")?;
            let we_part = dynamic_tree_cut(&d, &words, emb, &cfg.tree_cut()).stage("tree-cut")?;
            let r = convergence_report((&wa, &wa_part), (&we, &we_part), emb, &opts, cfg.seed).stage("compare")?;
            Ok((r, None, "agglomerative"))
        }
        Group::Pos(p) => {
            let threshold = match cfg.threshold_mode {
                ThresholdMode::Sweep => {
                    let complete = we_graph(&words, emb, None).stage("build-we")?;
                    let scores = cfg
                        .sweep_grid()
                        .into_par_iter()
                        .map(|t| {
                            let we = complete.at_threshold(t);
                            let part = infomap_with(&we, cfg.seed, &cfg.infomap_options());
                            Ok((t, informational_convergence(&wa_part, &part)?.percent))
                        })
                        .collect::<Result<Vec<_>>>()
                        .stage("sweep")?;
                    best_threshold(&scores)
                }
                _ => cfg.we_threshold(p, class)?,
            };
            let we = we_graph(&words, emb, Some(threshold)).stage("build-we")?;
            let we_part = infomap_with(&we, cfg.seed, &cfg.infomap_options());
            let r = convergence_report((&wa, &wa_part), (&we, &we_part), emb, &opts, cfg.seed).stage("compare")?;
            Ok((r, Some(threshold), "infomap"))
        }
    }
}

/// Threshold with the highest score; ties go to the smallest threshold.
pub(crate) fn best_threshold(scores: &[(f64, f64)]) -> f64 {
    let mut best = scores[0];
    for &(t, s) in &scores[1..] {
        if s > best.1 || (s == best.1 && t < best.0) {
            best = (t, s);
        }
    }
    best.0
}

/// Screening x part of speech x strength class, 32 cells. Cell failures are
/// recorded and the remaining cells still run.
pub fn run_study2(cfg: &StudyConfig, data: &Dataset) -> Result<Study2Output> {
    let (base, mut screening) = data.prescreened(cfg)?;
    let (_, excluded) = screen_vectors(base.tokens(), &data.synonyms, &data.embeddings, cfg.screen_threshold)
        .stage("screen-vectors")?;
    screening.excluded_vectors = excluded.iter().cloned().collect();
    let screened = base.without_words(&excluded);
    let calibration = calibrate_thresholds(&data.probs, &data.pos, &data.embeddings);

    let mut jobs = Vec::new();
    for (is_screened, source) in [(false, &base), (true, &screened)] {
        for (class, table) in strength_tables(source, cfg)? {
            for group in Group::ALL {
                jobs.push((is_screened, group, class, table.clone()));
            }
        }
    }
    let cells = jobs
        .into_par_iter()
        .map(|(is_screened, group, class, table)| {
            let cell = format!(
                "{}/{}/{}",
                if is_screened { "screened" } else { "unscreened" },
                group.name(),
                class_name(class)
            );
            let (report, threshold, we_method, error) = match run_cell(cfg, data, &table, group, class) {
                Ok((r, t, m)) => (Some(r), t, m, None),
                Err(e) => {
                    warn!("cell {cell} failed: {e}");
                    let method = if group == Group::Heterogeneous { "agglomerative" } else { "infomap" };
                    (None, None, method, Some(e.to_string()))
                }
            };
            CellOutcome {
                cell,
                screened: is_screened,
                group: group.name(),
                class: class_name(class),
                we_method,
                threshold,
                report,
                error,
            }
        })
        .collect();
    Ok(Study2Output {
        screening,
        excluded_vectors: excluded.into_iter().collect(),
        calibration,
        cells,
    })
}
