use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::BufReader;

use super::config::StudyConfig;
use crate::embed::{parse_embeddings, EmbeddingTable};
use crate::error::{Error, Result, StageExt};
use crate::norms::{
    build_edges, compute_probabilities, content_pos, count_one_directional, prescreen, read_norms, read_synonyms,
    AssociationEdge, AssociationTable, DirectedProbs, Pos, ResponseCount, ScreeningSummary,
};

/// Everything a study reads, parsed once.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub embeddings: EmbeddingTable,
    pub probs: DirectedProbs,
    pub edges: Vec<AssociationEdge>,
    /// Content POS of every norms token.
    pub pos: BTreeMap<String, Pos>,
    pub synonyms: HashMap<String, Vec<String>>,
    pub one_directional_pairs: usize,
}

impl Dataset {
    /// Read norms and synonyms, then stream only the embedding rows for
    /// tokens those files mention.
    pub fn load(cfg: &StudyConfig) -> Result<Dataset> {
        let norms = read_norms(BufReader::new(File::open(&cfg.norms).stage("load-norms")?)).stage("load-norms")?;
        let synonyms = match &cfg.synonyms {
            Some(p) => read_synonyms(BufReader::new(File::open(p).stage("load-synonyms")?)).stage("load-synonyms")?,
            None => HashMap::new(),
        };
        let mut vocab: HashSet<String> = norms.tags.keys().cloned().collect();
        vocab.extend(synonyms.iter().flat_map(|(w, s)| std::iter::once(w).chain(s)).cloned());
        let embeddings = parse_embeddings(
            BufReader::new(File::open(&cfg.embeddings).stage("load-embeddings")?),
            Some(&vocab),
        )
        .stage("load-embeddings")?;
        Dataset::from_parts(&norms.records, &norms.tags, embeddings, synonyms)
    }

    pub fn from_parts(
        records: &[ResponseCount],
        tags: &BTreeMap<String, String>,
        embeddings: EmbeddingTable,
        synonyms: HashMap<String, Vec<String>>,
    ) -> Result<Dataset> {
        let probs = compute_probabilities(records).stage("probabilities")?;
        Ok(Dataset {
            edges: build_edges(&probs),
            one_directional_pairs: count_one_directional(&probs),
            pos: content_pos(tags),
            probs,
            embeddings,
            synonyms,
        })
    }

    /// Norms records' raw POS tags, as [`Dataset::from_parts`] expects them.
    pub fn tags_of(records: &[ResponseCount]) -> BTreeMap<String, String> {
        let mut tags = BTreeMap::new();
        for r in records {
            tags.entry(r.cue.clone()).or_insert_with(|| r.pos_cue.clone());
            tags.entry(r.response.clone()).or_insert_with(|| r.pos_response.clone());
        }
        tags
    }

    /// Bidirectional, embedded, content-POS edges above the probability floor.
    pub fn prescreened(&self, cfg: &StudyConfig) -> Result<(AssociationTable, ScreeningSummary)> {
        let (table, mut summary) = prescreen(&self.edges, Some(&self.embeddings), &self.pos, cfg.prescreen_options());
        summary.missing_direction = self.one_directional_pairs;
        if table.is_empty() {
            return Err(Error::Empty("no association edge survives prescreening").at_stage("prescreen"));
        }
        Ok((table, summary))
    }
}
