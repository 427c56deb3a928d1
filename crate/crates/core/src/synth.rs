//! Planted-concept datasets: embeddings, association counts and synonyms
//! that agree on a known set of concepts.
//!
//! Concept `c` owns its own block of dimensions, so vectors of different
//! concepts are exactly orthogonal and vectors within a concept are nearly
//! parallel. Every pair inside a concept is associated in both directions
//! with probability at least .20, so the concepts survive every strength
//! class.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::embed::{EmbeddingTable, WordVector};
use crate::error::Result;
use crate::norms::{Pos, ResponseCount};
use crate::studies::Dataset;

const BLOCK: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct SynthSpec {
    pub concepts: usize,
    pub min_size: usize,
    pub max_size: usize,
    /// Standard deviation of the off-axis components inside a block.
    pub jitter: f64,
    /// Link each concept to the next concept of the same POS with a weak
    /// bidirectional association (probability .05 to .09).
    pub cross_links: bool,
    /// Words associated with the vocabulary only below 1%.
    pub weak_words: usize,
    /// Words whose vectors sit in another concept's block.
    pub misencoded: usize,
    /// Embedded tokens absent from the norms.
    pub distractors: usize,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            concepts: 10,
            min_size: 3,
            max_size: 5,
            jitter: 0.05,
            cross_links: true,
            weak_words: 0,
            misencoded: 0,
            distractors: 0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SynthData {
    pub embeddings: EmbeddingTable,
    pub norms: Vec<ResponseCount>,
    pub synonyms: BTreeMap<String, Vec<String>>,
    /// Planted concept members, in concept order.
    pub concepts: Vec<Vec<String>>,
    pub concept_pos: Vec<Pos>,
    pub weak_words: Vec<String>,
    pub misencoded: Vec<String>,
}

/// POS of concept `index`: three nouns, then a verb and an adjective, repeating.
pub fn concept_pos(index: usize) -> Pos {
    match index % 5 {
        0..=2 => Pos::Noun,
        3 => Pos::Verb,
        _ => Pos::Adjective,
    }
}

fn next_same_pos(c: usize, n: usize) -> Option<usize> {
    (1..n).map(|d| (c + d) % n).find(|&o| concept_pos(o) == concept_pos(c))
}

pub fn generate(spec: &SynthSpec) -> Result<SynthData> {
    assert!(spec.min_size >= 2 && spec.min_size <= spec.max_size, "concept sizes");
    assert!(spec.concepts >= 1, "at least one concept");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.jitter).expect("finite jitter");
    let n = spec.concepts;
    // One extra block hosts weak words whose concept has no same-POS partner,
    // another hosts the distractors.
    let dim = BLOCK * (n + 2);
    let center = |c: usize| -> Vec<f64> {
        let mut v = vec![0.0; dim];
        v[BLOCK * c] = 1.0;
        v
    };

    let mut embeddings = EmbeddingTable::new(dim)?;
    let mut concepts = Vec::with_capacity(n);
    let mut misencoded = Vec::new();
    let mis_every = n.checked_div(spec.misencoded).map_or(usize::MAX, |k| k.max(1));
    for c in 0..n {
        let size = rng.gen_range(spec.min_size..=spec.max_size);
        let mut members = Vec::with_capacity(size);
        for j in 0..size {
            let word = format!("c{c:03}w{j}");
            let is_mis = j == size - 1 && size > 2 && c % mis_every == 0 && misencoded.len() < spec.misencoded;
            let block = if is_mis { (c + 1) % n.max(2) } else { c };
            let mut v = vec![0.0; dim];
            v[BLOCK * block] = 1.0;
            for k in 1..BLOCK {
                v[BLOCK * block + k] = noise.sample(&mut rng);
            }
            if is_mis {
                misencoded.push(word.clone());
            }
            embeddings.insert(word.clone(), WordVector::new(v)?)?;
            members.push(word);
        }
        concepts.push(members);
    }

    let mut norms = Vec::new();
    let presentations: Vec<Vec<u64>> = concepts
        .iter()
        .map(|m| m.iter().map(|_| rng.gen_range(100..=120)).collect())
        .collect();
    let tag = |c: usize| concept_pos(c).as_str().to_owned();
    for (c, members) in concepts.iter().enumerate() {
        for (i, cue) in members.iter().enumerate() {
            let total = presentations[c][i];
            let floor = (total as f64 * 0.2).ceil() as u64;
            for (j, response) in members.iter().enumerate() {
                if i != j {
                    norms.push(ResponseCount {
                        cue: cue.clone(),
                        response: response.clone(),
                        n_response: floor + rng.gen_range(0..=1),
                        n_cue_presentations: total,
                        pos_cue: tag(c),
                        pos_response: tag(c),
                    });
                }
            }
        }
    }
    if spec.cross_links {
        // Word 0 of a concept links to word 1 of the next same-POS concept,
        // so no word carries more than one cross-link.
        for c in 0..n {
            let Some(o) = next_same_pos(c, n) else { continue };
            if o == c {
                continue;
            }
            let (a, b) = (&concepts[c][0], &concepts[o][1]);
            for (cue, cc, ci, resp, rc) in [(a, c, 0, b, o), (b, o, 1, a, c)] {
                let total = presentations[cc][ci];
                let count = (total as f64 * rng.gen_range(0.055..0.09)).round() as u64;
                norms.push(ResponseCount {
                    cue: cue.clone(),
                    response: resp.clone(),
                    n_response: count,
                    n_cue_presentations: total,
                    pos_cue: tag(cc),
                    pos_response: tag(rc),
                });
            }
        }
    }

    let mut weak_words = Vec::new();
    for w in 0..spec.weak_words {
        let c = w % n;
        let mut v = center(c);
        let partner = next_same_pos(c, n).filter(|&o| o != c);
        match partner {
            Some(o) => v[BLOCK * o] = 1.0,
            None => v[BLOCK * n + (w % BLOCK)] = 1.0,
        }
        let word = format!("weak{w:03}");
        embeddings.insert(word.clone(), WordVector::new(v)?.normalized()?)?;
        let mut targets = vec![c];
        targets.extend(partner);
        for t in targets {
            norms.push(ResponseCount {
                cue: word.clone(),
                response: concepts[t][0].clone(),
                n_response: 1,
                n_cue_presentations: 150,
                pos_cue: tag(c),
                pos_response: tag(t),
            });
        }
        weak_words.push(word);
    }

    for d in 0..spec.distractors {
        let mut v = vec![0.0; dim];
        v[BLOCK * (n + 1) + d % BLOCK] = 1.0;
        for k in 0..BLOCK {
            v[BLOCK * (n + 1) + k] += noise.sample(&mut rng);
        }
        embeddings.insert(format!("zz{d:03}"), WordVector::new(v)?)?;
    }

    let mut synonyms = BTreeMap::new();
    for members in &concepts {
        for w in members {
            let mates: Vec<String> = members.iter().filter(|m| *m != w).cloned().collect();
            synonyms.insert(w.clone(), mates);
        }
    }
    Ok(SynthData {
        embeddings,
        norms,
        synonyms,
        concept_pos: (0..n).map(concept_pos).collect(),
        concepts,
        weak_words,
        misencoded,
    })
}

impl SynthData {
    /// The in-memory dataset a study would load from [`SynthData::write_to`].
    pub fn dataset(&self) -> Result<Dataset> {
        let synonyms = self.synonyms.iter().map(|(w, s)| (w.clone(), s.clone())).collect();
        Dataset::from_parts(&self.norms, &Dataset::tags_of(&self.norms), self.embeddings.clone(), synonyms)
    }

    /// Write `embeddings.vec`, `norms.tsv` and `synonyms.tsv` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.embeddings
            .write_vec(BufWriter::new(File::create(dir.join("embeddings.vec"))?))?;
        let mut out = BufWriter::new(File::create(dir.join("norms.tsv"))?);
        writeln!(out, "cue\tresponse\tn_response\tn_cue_presentations\tpos_cue\tpos_response")?;
        for r in &self.norms {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                r.cue, r.response, r.n_response, r.n_cue_presentations, r.pos_cue, r.pos_response
            )?;
        }
        out.flush()?;
        let mut out = BufWriter::new(File::create(dir.join("synonyms.tsv"))?);
        writeln!(out, "word\tsynonyms")?;
        for (w, syns) in &self.synonyms {
            writeln!(out, "{w}\t{}", syns.join(","))?;
        }
        out.flush()?;
        Ok(())
    }
}
