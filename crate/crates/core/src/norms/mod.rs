//! Word-association norms: directed response probabilities, averaged
//! undirected edge weights, and the screening rules that decide which word
//! pairs enter a network.

mod io;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::embed::{cosine_slices, EmbeddingTable};
use crate::error::{Error, Result};

pub use io::{
    read_association_table, read_norms, read_synonyms, write_association_table, NormsFile,
};

/// Lowercase then NFC. Every token read from norms or synonym files goes
/// through this before it is matched against an embedding table.
pub fn normalize_token(raw: &str) -> String {
    raw.trim().to_lowercase().nfc().collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pos {
    Noun,
    Verb,
    Adjective,
    Adverb,
}

impl Pos {
    pub const ALL: [Pos; 4] = [Pos::Noun, Pos::Verb, Pos::Adjective, Pos::Adverb];

    /// Map a raw tag (full name or a common abbreviation such as the USF
    /// `N`/`V`/`AJ`/`AD` codes) onto a content POS. Function-word tags map to
    /// `None`.
    pub fn from_tag(tag: &str) -> Option<Pos> {
        match tag.trim().to_ascii_lowercase().as_str() {
            "noun" | "n" | "nn" => Some(Pos::Noun),
            "verb" | "v" | "vb" => Some(Pos::Verb),
            "adjective" | "adj" | "aj" | "a" | "jj" => Some(Pos::Adjective),
            "adverb" | "adv" | "ad" | "av" | "r" | "rb" => Some(Pos::Adverb),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Noun => "noun",
            Pos::Verb => "verb",
            Pos::Adjective => "adjective",
            Pos::Adverb => "adverb",
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pos {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Pos::from_tag(s).ok_or_else(|| Error::InvalidParameter(format!("unknown POS {s:?}")))
    }
}

/// One raw cue→response count line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResponseCount {
    pub cue: String,
    pub response: String,
    pub n_response: u64,
    pub n_cue_presentations: u64,
    pub pos_cue: String,
    pub pos_response: String,
}

/// Directed probabilities keyed by `(cue, response)`.
pub type DirectedProbs = BTreeMap<(String, String), f64>;

/// `n_response / n_cue_presentations` for every record.
pub fn compute_probabilities(records: &[ResponseCount]) -> Result<DirectedProbs> {
    let mut probs = DirectedProbs::new();
    for r in records {
        if r.n_cue_presentations == 0 {
            return Err(Error::ZeroPresentations(r.cue.clone()));
        }
        if r.n_response > r.n_cue_presentations {
            return Err(Error::InvalidParameter(format!(
                "{} -> {}: {} responses exceed {} presentations",
                r.cue, r.response, r.n_response, r.n_cue_presentations
            )));
        }
        let key = (r.cue.clone(), r.response.clone());
        if probs.contains_key(&key) {
            return Err(Error::DuplicatePair {
                cue: key.0,
                response: key.1,
            });
        }
        probs.insert(key, r.n_response as f64 / r.n_cue_presentations as f64);
    }
    Ok(probs)
}

/// An undirected association with `word_a < word_b`. `fsa` is the
/// probability of `word_b` given cue `word_a`; `bsa` the reverse.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssociationEdge {
    pub word_a: String,
    pub word_b: String,
    pub fsa: f64,
    pub bsa: f64,
    pub weight: f64,
}

impl AssociationEdge {
    pub fn new(word_a: String, word_b: String, fsa: f64, bsa: f64) -> Self {
        AssociationEdge {
            word_a,
            word_b,
            fsa,
            bsa,
            weight: (fsa + bsa) / 2.0,
        }
    }

    pub fn strength(&self, rule: StrengthRule) -> f64 {
        match rule {
            StrengthRule::Max => self.fsa.max(self.bsa),
            StrengthRule::Mean => self.weight,
        }
    }
}

/// One undirected edge per pair observed in both directions, weight the mean
/// of the two probabilities. One-directional pairs are dropped.
pub fn build_edges(probs: &DirectedProbs) -> Vec<AssociationEdge> {
    let mut edges = Vec::new();
    for ((cue, response), &p) in probs {
        if cue >= response {
            continue;
        }
        if let Some(&back) = probs.get(&(response.clone(), cue.clone())) {
            edges.push(AssociationEdge::new(cue.clone(), response.clone(), p, back));
        }
    }
    edges
}

/// Number of unordered pairs that only appear in one direction.
pub fn count_one_directional(probs: &DirectedProbs) -> usize {
    probs
        .keys()
        .filter(|(c, r)| c != r && !probs.contains_key(&(r.clone(), c.clone())))
        .count()
}

/// Which directional probability a threshold is compared against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrengthRule {
    #[default]
    Max,
    Mean,
}

impl FromStr for StrengthRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "max" => Ok(StrengthRule::Max),
            "mean" => Ok(StrengthRule::Mean),
            _ => Err(Error::InvalidParameter(format!("unknown strength rule {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrengthClass {
    Low,
    Moderate,
    High,
}

impl StrengthClass {
    pub const ALL: [StrengthClass; 3] =
        [StrengthClass::Low, StrengthClass::Moderate, StrengthClass::High];

    pub fn min_probability(self) -> f64 {
        match self {
            StrengthClass::Low => 0.10,
            StrengthClass::Moderate => 0.15,
            StrengthClass::High => 0.20,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StrengthClass::Low => "low",
            StrengthClass::Moderate => "moderate",
            StrengthClass::High => "high",
        }
    }
}

impl FromStr for StrengthClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "low" => Ok(StrengthClass::Low),
            "moderate" => Ok(StrengthClass::Moderate),
            "high" => Ok(StrengthClass::High),
            _ => Err(Error::InvalidParameter(format!("unknown strength class {s:?}"))),
        }
    }
}

/// Screened association edges plus the POS of every word in the network.
/// Words may appear in `pos` without touching any edge; they are kept as
/// isolates so that filtered networks share a node set with their source.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AssociationTable {
    edges: Vec<AssociationEdge>,
    pos: BTreeMap<String, Pos>,
}

impl AssociationTable {
    pub fn new(edges: Vec<AssociationEdge>, pos: BTreeMap<String, Pos>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for e in &edges {
            if e.word_a >= e.word_b {
                return Err(Error::InvalidParameter(format!(
                    "edge ({}, {}) must have word_a < word_b",
                    e.word_a, e.word_b
                )));
            }
            if !seen.insert((e.word_a.as_str(), e.word_b.as_str())) {
                return Err(Error::DuplicatePair {
                    cue: e.word_a.clone(),
                    response: e.word_b.clone(),
                });
            }
            for w in [&e.word_a, &e.word_b] {
                if !pos.contains_key(w) {
                    return Err(Error::InvalidParameter(format!("{w:?} has no POS entry")));
                }
            }
            for p in [e.fsa, e.bsa] {
                if !(p > 0.0 && p <= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "probability {p} outside (0, 1]"
                    )));
                }
            }
        }
        let mut edges = edges;
        edges.sort_by(|x, y| (&x.word_a, &x.word_b).cmp(&(&y.word_a, &y.word_b)));
        Ok(AssociationTable { edges, pos })
    }

    pub fn edges(&self) -> &[AssociationEdge] {
        &self.edges
    }

    pub fn pos_map(&self) -> &BTreeMap<String, Pos> {
        &self.pos
    }

    pub fn pos(&self, token: &str) -> Option<Pos> {
        self.pos.get(token).copied()
    }

    /// All words in the network, sorted.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.pos.keys().map(String::as_str)
    }

    pub fn word_count(&self) -> usize {
        self.pos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    fn retain_edges(&self, mut keep: impl FnMut(&AssociationEdge) -> bool) -> AssociationTable {
        AssociationTable {
            edges: self.edges.iter().filter(|e| keep(e)).cloned().collect(),
            pos: self.pos.clone(),
        }
    }

    /// Drop the given words and every edge touching them.
    pub fn without_words(&self, words: &BTreeSet<String>) -> AssociationTable {
        AssociationTable {
            edges: self
                .edges
                .iter()
                .filter(|e| !words.contains(&e.word_a) && !words.contains(&e.word_b))
                .cloned()
                .collect(),
            pos: self
                .pos
                .iter()
                .filter(|(w, _)| !words.contains(*w))
                .map(|(w, p)| (w.clone(), *p))
                .collect(),
        }
    }

    /// True when every edge of `self` is also an edge of `other`.
    pub fn edges_subset_of(&self, other: &AssociationTable) -> bool {
        let theirs: BTreeSet<(&str, &str)> = other
            .edges
            .iter()
            .map(|e| (e.word_a.as_str(), e.word_b.as_str()))
            .collect();
        self.edges
            .iter()
            .all(|e| theirs.contains(&(e.word_a.as_str(), e.word_b.as_str())))
    }
}

/// Edge counts removed by each screening rule, in rule order; each removed
/// edge is charged to the first rule it fails.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreeningSummary {
    pub input_edges: usize,
    pub missing_embedding: usize,
    pub missing_direction: usize,
    pub below_min_probability: usize,
    pub excluded_pos: usize,
    pub retained_edges: usize,
    pub retained_words: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub excluded_vectors: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrescreenOptions {
    pub min_probability: f64,
    pub rule: StrengthRule,
}

impl Default for PrescreenOptions {
    fn default() -> Self {
        PrescreenOptions {
            min_probability: 0.05,
            rule: StrengthRule::Max,
        }
    }
}

/// Keep an edge iff both words are embedded, its strength is above
/// `min_probability`, and both words carry a content POS. The bidirectional
/// rule is already enforced by [`build_edges`]. `embeddings = None` skips the
/// embedding rule (used when ingesting norms on their own).
pub fn prescreen(
    edges: &[AssociationEdge],
    embeddings: Option<&EmbeddingTable>,
    pos: &BTreeMap<String, Pos>,
    opts: PrescreenOptions,
) -> (AssociationTable, ScreeningSummary) {
    let mut summary = ScreeningSummary {
        input_edges: edges.len(),
        ..Default::default()
    };
    let mut kept = Vec::new();
    let mut words = BTreeMap::new();
    for e in edges {
        let embedded = embeddings.is_none_or(|t| t.contains(&e.word_a) && t.contains(&e.word_b));
        if !embedded {
            summary.missing_embedding += 1;
            continue;
        }
        if e.strength(opts.rule) <= opts.min_probability {
            summary.below_min_probability += 1;
            continue;
        }
        let (Some(&pa), Some(&pb)) = (pos.get(&e.word_a), pos.get(&e.word_b)) else {
            summary.excluded_pos += 1;
            continue;
        };
        words.insert(e.word_a.clone(), pa);
        words.insert(e.word_b.clone(), pb);
        kept.push(e.clone());
    }
    summary.retained_edges = kept.len();
    summary.retained_words = words.len();
    let table = AssociationTable { edges: kept, pos: words };
    (table, summary)
}

/// Keep edges whose strength reaches the class floor. The word set is
/// unchanged, so words that lose every edge remain as isolates.
pub fn filter_strength(
    table: &AssociationTable,
    class: StrengthClass,
    rule: StrengthRule,
) -> AssociationTable {
    let floor = class.min_probability();
    table.retain_edges(|e| e.strength(rule) >= floor)
}

/// One table per POS holding the edges whose endpoints both carry that POS.
/// Cross-POS edges appear in no output.
pub fn split_pos(table: &AssociationTable) -> BTreeMap<Pos, AssociationTable> {
    Pos::ALL
        .iter()
        .map(|&p| {
            let pos: BTreeMap<String, Pos> = table
                .pos
                .iter()
                .filter(|(_, &q)| q == p)
                .map(|(w, &q)| (w.clone(), q))
                .collect();
            let edges = table
                .edges
                .iter()
                .filter(|e| pos.contains_key(&e.word_a) && pos.contains_key(&e.word_b))
                .cloned()
                .collect();
            (p, AssociationTable { edges, pos })
        })
        .collect()
}

/// Flag words whose vectors sit far from all of their known synonyms.
///
/// A word is excluded when it has at least one synonym in the table and every
/// such synonym has cosine `<= threshold` with it. Words without embedded
/// synonyms are retained.
pub fn screen_vectors<'a, I>(
    words: I,
    synonyms: &HashMap<String, Vec<String>>,
    table: &EmbeddingTable,
    threshold: f64,
) -> Result<(BTreeSet<String>, BTreeSet<String>)>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut retained = BTreeSet::new();
    let mut excluded = BTreeSet::new();
    for word in words {
        let v = table.require(word)?;
        let cosines: Vec<f64> = synonyms
            .get(word)
            .into_iter()
            .flatten()
            .filter(|s| s.as_str() != word)
            .filter_map(|s| table.vector(s))
            .filter_map(|s| cosine_slices(v.as_slice(), s.as_slice()).ok())
            .collect();
        if !cosines.is_empty() && cosines.iter().all(|&c| c <= threshold) {
            excluded.insert(word.to_owned());
        } else {
            retained.insert(word.to_owned());
        }
    }
    Ok((retained, excluded))
}

/// Map raw POS tags onto content POS, dropping tokens with function-word tags.
pub fn content_pos(tags: &BTreeMap<String, String>) -> BTreeMap<String, Pos> {
    tags.iter()
        .filter_map(|(w, t)| Pos::from_tag(t).map(|p| (w.clone(), p)))
        .collect()
}
