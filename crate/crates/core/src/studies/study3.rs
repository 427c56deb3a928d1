use std::collections::{BTreeMap, BTreeSet};

use log::warn;
use rand::seq::index::sample;
use rayon::prelude::*;
use serde::Serialize;

use super::config::StudyConfig;
use super::data::Dataset;
use super::output::ResultRow;
use super::stream_rng;
use super::study2::best_threshold;
use crate::cluster::{infomap_with, Partition};
use crate::converge::informational_convergence;
use crate::error::{Error, Result, StageExt};
use crate::graph::{average_degree, modularity, wa_graph, we_graph, WeightedGraph};
use crate::norms::{filter_strength, split_pos, AssociationTable, Pos, StrengthClass};

const SAMPLING_TAG: u64 = 3;
const NOISE_TAG: u64 = 4;

/// Node indices of `k` distinct clusters drawn uniformly, ascending.
pub fn sample_concepts<R: rand::Rng>(partition: &Partition, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    let n = partition.n_clusters();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("cannot sample {k} of {n} clusters")));
    }
    let chosen: BTreeSet<usize> = sample(rng, n, k).into_iter().collect();
    Ok((0..partition.len()).filter(|&v| chosen.contains(&partition.cluster_of(v))).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub threshold: f64,
    pub mean_ic: f64,
    pub sd_ic: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub pos: Pos,
    pub concept_count: usize,
    pub replicates: usize,
    pub curve: Vec<CurvePoint>,
    pub optimal_threshold: f64,
    pub optimal_mean_ic: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SamplingOutput {
    pub seed: u64,
    /// Multi-member WA clusters available for sampling, per POS.
    pub available_concepts: BTreeMap<Pos, usize>,
    pub results: Vec<SweepResult>,
    /// `(pos, k)` pairs skipped because fewer than `k` concepts exist.
    pub skipped: Vec<(Pos, usize)>,
    #[serde(skip)]
    pub rows: Vec<ResultRow>,
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = if xs.len() < 2 {
        0.0
    } else {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    (mean, sd)
}

fn pos_table(data: &Dataset, cfg: &StudyConfig, class: StrengthClass, pos: Pos) -> Result<AssociationTable> {
    let (base, _) = data.prescreened(cfg)?;
    Ok(split_pos(&filter_strength(&base, class, cfg.strength_rule))
        .remove(&pos)
        .expect("split covers every POS"))
}

fn we_stats(g: &WeightedGraph, p: &Partition) -> (Option<f64>, Option<f64>) {
    (modularity(g, p).ok(), average_degree(g).ok())
}

struct Replicate {
    ics: Vec<f64>,
    rows: Vec<ResultRow>,
}

/// Bootstrap concept samples from the High-class WA network of each POS and
/// record IC over the cosine sweep grid.
pub fn run_sampling_study(cfg: &StudyConfig, data: &Dataset) -> Result<SamplingOutput> {
    let grid = cfg.sweep_grid();
    let mut results = Vec::new();
    let mut skipped = Vec::new();
    let mut rows = Vec::new();
    let mut available = BTreeMap::new();
    for (pos_index, pos) in cfg.pos.classes().into_iter().enumerate() {
        let table = pos_table(data, cfg, StrengthClass::High, pos)?;
        if table.word_count() < 2 {
            warn!("no {pos} network at High strength; skipped");
            available.insert(pos, 0);
            continue;
        }
        let wa = wa_graph(&table).stage("build-wa")?;
        let wa_full = infomap_with(&wa, cfg.seed, &cfg.infomap_options());
        let eligible: Vec<usize> = (0..wa.node_count())
            .filter(|&v| wa_full.cluster_sizes()[wa_full.cluster_of(v)] >= 2)
            .collect();
        let concepts = wa_full.subset(&eligible);
        let words: Vec<String> = eligible.iter().map(|&v| wa.nodes()[v].clone()).collect();
        available.insert(pos, concepts.n_clusters());
        for &k in &cfg.sample_sizes {
            if k > concepts.n_clusters() {
                skipped.push((pos, k));
                continue;
            }
            let reps: Vec<Replicate> = (0..cfg.sampling_replicates)
                .into_par_iter()
                .map(|rep| -> Result<Replicate> {
                    let mut rng = stream_rng(cfg.seed, &[SAMPLING_TAG, pos_index as u64, k as u64, rep as u64]);
                    let nodes = sample_concepts(&concepts, k, &mut rng)?;
                    let wa_part = concepts.subset(&nodes);
                    let sample_words: Vec<String> = nodes.iter().map(|&v| words[v].clone()).collect();
                    let infomap_seed = super::derive_seed(cfg.seed, &[SAMPLING_TAG, pos_index as u64, k as u64, rep as u64, 1]);
                    let mut ics = Vec::with_capacity(grid.len());
                    let mut out = Vec::with_capacity(grid.len());
                    let complete = we_graph(&sample_words, &data.embeddings, None)?;
                    for &t in &grid {
                        let we = complete.at_threshold(t);
                        let we_part = infomap_with(&we, infomap_seed, &cfg.infomap_options());
                        let ic = informational_convergence(&wa_part, &we_part)?.percent;
                        let (modularity, degree) = we_stats(&we, &we_part);
                        ics.push(ic);
                        out.push(ResultRow {
                            study: "3-sample".into(),
                            cell: pos.as_str().into(),
                            k: Some(k),
                            threshold: Some(t),
                            replicate: Some(rep),
                            ic,
                            sc: None,
                            modularity,
                            degree,
                        });
                    }
                    Ok(Replicate { ics, rows: out })
                })
                .collect::<Result<_>>()
                .stage("sampling")?;
            let curve: Vec<CurvePoint> = grid
                .iter()
                .enumerate()
                .map(|(i, &threshold)| {
                    let at: Vec<f64> = reps.iter().map(|r| r.ics[i]).collect();
                    let (mean_ic, sd_ic) = mean_sd(&at);
                    CurvePoint { threshold, mean_ic, sd_ic }
                })
                .collect();
            let scores: Vec<(f64, f64)> = curve.iter().map(|c| (c.threshold, c.mean_ic)).collect();
            let optimal_threshold = best_threshold(&scores);
            let optimal_mean_ic = curve
                .iter()
                .find(|c| c.threshold == optimal_threshold)
                .map(|c| c.mean_ic)
                .expect("optimum lies on the grid");
            rows.extend(reps.into_iter().flat_map(|r| r.rows));
            results.push(SweepResult {
                pos,
                concept_count: k,
                replicates: cfg.sampling_replicates,
                curve,
                optimal_threshold,
                optimal_mean_ic,
            });
        }
    }
    Ok(SamplingOutput {
        seed: cfg.seed,
        available_concepts: available,
        results,
        skipped,
        rows,
    })
}

/// Words of `pos` outside `vocab` that are embedded and associated with the
/// vocabulary at least once, always below 1%.
pub fn weak_word_pool(data: &Dataset, vocab: &BTreeSet<String>, pos: Pos) -> Vec<String> {
    let mut strongest: BTreeMap<&str, f64> = BTreeMap::new();
    for ((cue, response), &p) in &data.probs {
        let outside = match (vocab.contains(cue), vocab.contains(response)) {
            (true, false) => response,
            (false, true) => cue,
            _ => continue,
        };
        let slot = strongest.entry(outside.as_str()).or_insert(0.0);
        *slot = slot.max(p);
    }
    strongest
        .into_iter()
        .filter(|&(w, p)| p < 0.01 && data.pos.get(w) == Some(&pos) && data.embeddings.contains(w))
        .map(|(w, _)| w.to_owned())
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NoisePoint {
    pub level: usize,
    pub mean_ic: f64,
    pub sd_ic: f64,
    pub replicates: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoiseCurve {
    pub pos: Pos,
    pub threshold: f64,
    pub vocabulary: usize,
    pub pool_size: usize,
    pub baseline_ic: f64,
    pub points: Vec<NoisePoint>,
    /// Levels larger than the weak-word pool.
    pub skipped_levels: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NoiseOutput {
    pub seed: u64,
    pub curves: Vec<NoiseCurve>,
    /// POS classes that could not run, with the reason.
    pub failures: BTreeMap<Pos, String>,
    #[serde(skip)]
    pub rows: Vec<ResultRow>,
}

/// IC of a WE partition over `vocab` plus `noise`, restricted to `vocab`.
fn noisy_ic(
    cfg: &StudyConfig,
    data: &Dataset,
    vocab: &[String],
    noise: &[String],
    threshold: f64,
    wa_part: &Partition,
) -> Result<(f64, Option<f64>, Option<f64>)> {
    let mut words = vocab.to_vec();
    words.extend_from_slice(noise);
    let we = we_graph(&words, &data.embeddings, Some(threshold))?;
    let part = infomap_with(&we, cfg.seed, &cfg.infomap_options());
    let ic = informational_convergence(wa_part, &part.truncate(vocab.len()))?.percent;
    let (m, d) = we_stats(&we, &part);
    Ok((ic, m, d))
}

fn noise_curve(cfg: &StudyConfig, data: &Dataset, pos_index: usize, pos: Pos, rows: &mut Vec<ResultRow>) -> Result<NoiseCurve> {
    let table = pos_table(data, cfg, StrengthClass::Moderate, pos)?;
    if table.word_count() < 2 {
        return Err(Error::Empty("fewer than two words in the Moderate network"));
    }
    let wa = wa_graph(&table).stage("build-wa")?;
    let wa_part = infomap_with(&wa, cfg.seed, &cfg.infomap_options());
    let vocab = wa.nodes().to_vec();
    let threshold = cfg.we_threshold(pos, Some(StrengthClass::Moderate))?;
    let vocab_set: BTreeSet<String> = vocab.iter().cloned().collect();
    let pool = weak_word_pool(data, &vocab_set, pos);
    if pool.is_empty() {
        return Err(Error::Empty("weak-word pool").at_stage("noise-pool"));
    }
    let (baseline_ic, _, _) = noisy_ic(cfg, data, &vocab, &[], threshold, &wa_part).stage("noise")?;
    let mut points = Vec::new();
    let mut skipped_levels = Vec::new();
    for &level in &cfg.noise_levels {
        if level > pool.len() {
            skipped_levels.push(level);
            continue;
        }
        let reps: Vec<(f64, Option<f64>, Option<f64>)> = (0..cfg.noise_replicates)
            .into_par_iter()
            .map(|rep| {
                let mut rng = stream_rng(cfg.seed, &[NOISE_TAG, pos_index as u64, level as u64, rep as u64]);
                let mut picked: Vec<usize> = sample(&mut rng, pool.len(), level).into_vec();
                picked.sort_unstable();
                let noise: Vec<String> = picked.into_iter().map(|i| pool[i].clone()).collect();
                noisy_ic(cfg, data, &vocab, &noise, threshold, &wa_part)
            })
            .collect::<Result<_>>()
            .stage("noise")?;
        let ics: Vec<f64> = reps.iter().map(|r| r.0).collect();
        let (mean_ic, sd_ic) = mean_sd(&ics);
        for (rep, &(ic, modularity, degree)) in reps.iter().enumerate() {
            rows.push(ResultRow {
                study: "3-noise".into(),
                cell: pos.as_str().into(),
                k: Some(level),
                threshold: Some(threshold),
                replicate: Some(rep),
                ic,
                sc: None,
                modularity,
                degree,
            });
        }
        points.push(NoisePoint {
            level,
            mean_ic,
            sd_ic,
            replicates: cfg.noise_replicates,
        });
    }
    Ok(NoiseCurve {
        pos,
        threshold,
        vocabulary: vocab.len(),
        pool_size: pool.len(),
        baseline_ic,
        points,
        skipped_levels,
    })
}

/// Add weakly associated words to Moderate-class WE networks and track IC
/// against the noise-free WA partition. Fails only if no POS can run.
pub fn run_noise_study(cfg: &StudyConfig, data: &Dataset) -> Result<NoiseOutput> {
    let mut curves = Vec::new();
    let mut failures = BTreeMap::new();
    let mut rows = Vec::new();
    let mut last_error = None;
    for (pos_index, pos) in cfg.pos.classes().into_iter().enumerate() {
        match noise_curve(cfg, data, pos_index, pos, &mut rows) {
            Ok(c) => curves.push(c),
            Err(e) => {
                warn!("noise study for {pos} failed: {e}");
                failures.insert(pos, e.to_string());
                last_error = Some(e);
            }
        }
    }
    if curves.is_empty() {
        return Err(last_error.unwrap_or(Error::Empty("POS selection")));
    }
    Ok(NoiseOutput {
        seed: cfg.seed,
        curves,
        failures,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sample_extremes() {
        let p = Partition::from_labels(&[0, 0, 1, 1, 1, 2, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(sample_concepts(&p, 3, &mut rng).unwrap(), (0..7).collect::<Vec<_>>());
        let one = sample_concepts(&p, 1, &mut rng).unwrap();
        assert!(p.clusters().contains(&one));
        assert!(sample_concepts(&p, 4, &mut rng).is_err());
        assert!(sample_concepts(&p, 0, &mut rng).is_err());
        let a = sample_concepts(&p, 2, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = sample_concepts(&p, 2, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cluster_draws_are_uniform() {
        // 12 clusters, k = 3: each cluster is drawn with probability 1/4.
        let labels: Vec<usize> = (0..36).map(|v| v / 3).collect();
        let p = Partition::from_labels(&labels);
        let reps = 4000;
        let mut hits = [0usize; 12];
        for rep in 0..reps {
            let mut rng = stream_rng(11, &[rep]);
            for v in sample_concepts(&p, 3, &mut rng).unwrap() {
                if v % 3 == 0 {
                    hits[v / 3] += 1;
                }
            }
        }
        let (n, q) = (reps as f64, 0.25);
        let sigma = (n * q * (1.0 - q)).sqrt();
        for h in hits {
            assert!((h as f64 - n * q).abs() < 5.0 * sigma, "{hits:?}");
        }
    }

    #[test]
    fn sd_is_sample_sd() {
        assert_eq!(mean_sd(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_sd(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-12);
    }
}
