//! File-level operations behind the `conceptmap` binary. Every command
//! writes its artifacts atomically and a `.manifest.json` beside them.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::cluster::{
    agglomerate_with, dynamic_tree_cut, infomap_with, read_partition, write_dendrogram, write_partition,
    InfomapOptions, Linkage, Partition, TreeCut,
};
use crate::converge::{convergence_report, write_pairs, ConvergenceOptions, ConvergenceReport};
use crate::embed::{parse_embeddings, EmbeddingTable};
use crate::error::{Error, Result, StageExt};
use crate::graph::{network_stats, read_graph, wa_graph, we_graph, write_graph, NetworkStats, WeightedGraph};
use crate::manifest::RunManifest;
use crate::norms::{
    build_edges, compute_probabilities, content_pos, count_one_directional, prescreen, read_association_table,
    filter_strength, read_norms, read_synonyms, split_pos, write_association_table, AssociationTable,
    PrescreenOptions, StrengthClass, StrengthRule,
};
use crate::studies::{json_bytes, run_and_write, write_atomic, Dataset, PosSelection, Study, StudyConfig, ThresholdMode};

fn open(path: &Path, stage: &'static str) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).stage(stage)
}

fn render(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

/// Sidecar manifest path for a single-file artifact.
pub fn manifest_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    artifact.with_file_name(name)
}

fn seal(mut manifest: RunManifest, outputs: Vec<PathBuf>, at: &Path) -> Result<Vec<PathBuf>> {
    manifest.finish(outputs.clone());
    write_atomic(at, &json_bytes(&manifest)?)?;
    let mut all = outputs;
    all.push(at.to_path_buf());
    Ok(all)
}

#[derive(Clone, Debug)]
pub struct IngestArgs {
    pub norms: PathBuf,
    pub synonyms: Option<PathBuf>,
    /// When given, edges with an unembedded endpoint are dropped too.
    pub embeddings: Option<PathBuf>,
    pub out: PathBuf,
    pub prescreen: PrescreenOptions,
}

#[derive(Clone, Debug, Serialize)]
struct IngestSummary {
    records: usize,
    tokens: usize,
    one_directional_pairs: usize,
    synonym_entries: Option<usize>,
    screening: crate::norms::ScreeningSummary,
}

/// Norms file to canonical association table plus a screening summary
/// (`<out>.screening.json`).
pub fn ingest(args: &IngestArgs, command: Vec<String>) -> Result<Vec<PathBuf>> {
    let mut manifest = RunManifest::begin(command);
    manifest.add_input(&args.norms)?;
    let norms = read_norms(open(&args.norms, "load-norms")?).stage("load-norms")?;
    let synonyms = match &args.synonyms {
        Some(p) => {
            manifest.add_input(p)?;
            Some(read_synonyms(open(p, "load-synonyms")?).stage("load-synonyms")?)
        }
        None => None,
    };
    let embeddings = match &args.embeddings {
        Some(p) => {
            manifest.add_input(p)?;
            let vocab: HashSet<String> = norms.tags.keys().cloned().collect();
            Some(parse_embeddings(open(p, "load-embeddings")?, Some(&vocab)).stage("load-embeddings")?)
        }
        None => None,
    };
    let probs = compute_probabilities(&norms.records).stage("probabilities")?;
    let pos = content_pos(&norms.tags);
    let (table, mut screening) = prescreen(&build_edges(&probs), embeddings.as_ref(), &pos, args.prescreen);
    screening.missing_direction = count_one_directional(&probs);
    let summary = IngestSummary {
        records: norms.records.len(),
        tokens: norms.tags.len(),
        one_directional_pairs: screening.missing_direction,
        synonym_entries: synonyms.map(|s| s.len()),
        screening,
    };
    let summary_path = args.out.with_extension("screening.json");
    write_atomic(&args.out, &render(|b| write_association_table(&table, b))?)?;
    write_atomic(&summary_path, &json_bytes(&summary)?)?;
    seal(manifest, vec![args.out.clone(), summary_path], &manifest_path(&args.out))
}

/// Restrict an association table by strength class and POS.
pub fn restrict_table(
    table: &AssociationTable,
    strength: Option<StrengthClass>,
    rule: StrengthRule,
    pos: PosSelection,
) -> AssociationTable {
    let t = match strength {
        Some(class) => filter_strength(table, class, rule),
        None => table.clone(),
    };
    match pos {
        PosSelection::All => t,
        PosSelection::Only(p) => split_pos(&t).remove(&p).expect("split covers every POS"),
    }
}

#[derive(Clone, Debug)]
pub struct BuildWaArgs {
    pub table: PathBuf,
    pub strength: Option<StrengthClass>,
    pub rule: StrengthRule,
    pub pos: PosSelection,
    pub out: PathBuf,
}

pub fn build_wa(args: &BuildWaArgs, command: Vec<String>) -> Result<Vec<PathBuf>> {
    let mut manifest = RunManifest::begin(command);
    manifest.add_input(&args.table)?;
    let table = read_association_table(open(&args.table, "load-table")?).stage("load-table")?;
    let table = restrict_table(&table, args.strength, args.rule, args.pos);
    let g = wa_graph(&table).stage("build-wa")?;
    write_atomic(&args.out, &render(|b| write_graph(&g, b))?)?;
    seal(manifest, vec![args.out.clone()], &manifest_path(&args.out))
}

/// Where a WE network takes its node list from.
#[derive(Clone, Debug)]
pub enum WordSource {
    /// One token per line.
    List(PathBuf),
    /// The node list of a saved graph, typically the paired WA network.
    Graph(PathBuf),
}

#[derive(Clone, Debug)]
pub struct BuildWeArgs {
    pub embeddings: PathBuf,
    pub words: WordSource,
    /// `None` builds the complete cosine graph.
    pub threshold: Option<f64>,
    pub out: PathBuf,
}

fn read_word_list<R: BufRead>(reader: R) -> Result<Vec<String>> {
    let mut words = Vec::new();
    let mut seen = HashSet::new();
    for line in reader.lines() {
        let line = line?;
        let w = line.trim();
        if !w.is_empty() && seen.insert(w.to_owned()) {
            words.push(w.to_owned());
        }
    }
    Ok(words)
}

fn load_embeddings_for(path: &Path, words: &[String]) -> Result<EmbeddingTable> {
    let vocab: HashSet<String> = words.iter().cloned().collect();
    parse_embeddings(open(path, "load-embeddings")?, Some(&vocab)).stage("load-embeddings")
}

pub fn build_we(args: &BuildWeArgs, command: Vec<String>) -> Result<Vec<PathBuf>> {
    let mut manifest = RunManifest::begin(command);
    let words = match &args.words {
        WordSource::List(p) => {
            manifest.add_input(p)?;
            read_word_list(open(p, "load-words")?).stage("load-words")?
        }
        WordSource::Graph(p) => {
            manifest.add_input(p)?;
            read_graph(open(p, "load-graph")?).stage("load-graph")?.nodes().to_vec()
        }
    };
    manifest.add_input(&args.embeddings)?;
    let table = load_embeddings_for(&args.embeddings, &words)?;
    let g = we_graph(&words, &table, args.threshold).stage("build-we")?;
    write_atomic(&args.out, &render(|b| write_graph(&g, b))?)?;
    seal(manifest, vec![args.out.clone()], &manifest_path(&args.out))
}

#[derive(Clone, Debug)]
pub enum ClusterMethod {
    Infomap { seed: u64, options: InfomapOptions },
    /// Agglomeration over the graph's nodes plus a tree cut; edges are unused.
    Agglomerative {
        embeddings: PathBuf,
        linkage: Linkage,
        cut: TreeCut,
    },
}

#[derive(Clone, Debug)]
pub struct ClusterArgs {
    pub graph: PathBuf,
    pub method: ClusterMethod,
    pub out: PathBuf,
}

/// Partition a saved graph. Agglomerative runs also write
/// `<out>.dendrogram.tsv`.
pub fn cluster(args: &ClusterArgs, command: Vec<String>) -> Result<Vec<PathBuf>> {
    let mut manifest = RunManifest::begin(command);
    manifest.add_input(&args.graph)?;
    let g = read_graph(open(&args.graph, "load-graph")?).stage("load-graph")?;
    let words = g.nodes();
    let mut outputs = vec![args.out.clone()];
    let partition = match &args.method {
        ClusterMethod::Infomap { seed, options } => {
            manifest.seed = Some(*seed);
            infomap_with(&g, *seed, options)
        }
        ClusterMethod::Agglomerative {
            embeddings,
            linkage,
            cut,
        } => {
            manifest.add_input(embeddings)?;
            let table = load_embeddings_for(embeddings, words)?;
            let d = agglomerate_with(words, &table, *linkage).stage("agglomerate")?;
            let dpath = args.out.with_extension("dendrogram.tsv");
            write_atomic(&dpath, &render(|b| write_dendrogram(&d, b))?)?;
            outputs.push(dpath);
            dynamic_tree_cut(&d, words, &table, cut).stage("tree-cut")?
        }
    };
    write_atomic(&args.out, &render(|b| write_partition(words, &partition, b))?)?;
    seal(manifest, outputs, &manifest_path(&args.out))
}

fn load_clustered(graph: &Path, partition: &Path, manifest: &mut RunManifest) -> Result<(WeightedGraph, Partition)> {
    manifest.add_input(graph)?;
    manifest.add_input(partition)?;
    let g = read_graph(open(graph, "load-graph")?).stage("load-graph")?;
    let p = read_partition(open(partition, "load-partition")?, g.nodes()).stage("load-partition")?;
    Ok((g, p))
}

#[derive(Clone, Debug)]
pub struct CompareArgs {
    pub wa_graph: PathBuf,
    pub wa_partition: PathBuf,
    pub we_graph: PathBuf,
    pub we_partition: PathBuf,
    pub embeddings: PathBuf,
    pub options: ConvergenceOptions,
    pub seed: u64,
    /// Report JSON; matched pairs go to `<out>.pairs.tsv`.
    pub out: PathBuf,
}

pub fn compare(args: &CompareArgs, command: Vec<String>) -> Result<(ConvergenceReport, Vec<PathBuf>)> {
    let mut manifest = RunManifest::begin(command);
    manifest.seed = Some(args.seed);
    let (wa, wa_part) = load_clustered(&args.wa_graph, &args.wa_partition, &mut manifest)?;
    let (we, we_part) = load_clustered(&args.we_graph, &args.we_partition, &mut manifest)?;
    manifest.add_input(&args.embeddings)?;
    let table = load_embeddings_for(&args.embeddings, wa.nodes())?;
    let report = convergence_report((&wa, &wa_part), (&we, &we_part), &table, &args.options, args.seed)
        .stage("compare")?;
    let pairs = args.out.with_extension("pairs.tsv");
    write_atomic(&args.out, &json_bytes(&report)?)?;
    write_atomic(&pairs, &render(|b| write_pairs(&report.pairs, b))?)?;
    let written = seal(manifest, vec![args.out.clone(), pairs], &manifest_path(&args.out))?;
    Ok((report, written))
}

#[derive(Clone, Debug)]
pub struct StatsArgs {
    pub graph: PathBuf,
    pub partition: PathBuf,
    pub out: Option<PathBuf>,
}

pub fn stats(args: &StatsArgs, command: Vec<String>) -> Result<(NetworkStats, Vec<PathBuf>)> {
    let mut manifest = RunManifest::begin(command);
    let (g, p) = load_clustered(&args.graph, &args.partition, &mut manifest)?;
    let s = network_stats(&g, &p).stage("stats")?;
    let written = match &args.out {
        Some(out) => {
            write_atomic(out, &json_bytes(&s)?)?;
            seal(manifest, vec![out.clone()], &manifest_path(out))?
        }
        None => Vec::new(),
    };
    Ok((s, written))
}

/// Command-line overrides applied on top of a config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub threshold: Option<f64>,
    pub strength: Option<StrengthClass>,
    pub pos: Option<PosSelection>,
}

impl Overrides {
    /// Apply and revalidate; a threshold switches the config to fixed mode.
    pub fn apply(&self, cfg: &mut StudyConfig) -> Result<()> {
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.threshold {
            cfg.threshold = Some(t);
            cfg.threshold_mode = ThresholdMode::Fixed;
        }
        if self.strength.is_some() {
            cfg.strength = self.strength;
        }
        if let Some(p) = self.pos {
            cfg.pos = p;
        }
        let problems = cfg.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunArgs {
    pub study: Study,
    pub config: PathBuf,
    pub overrides: Overrides,
    pub out_dir: PathBuf,
}

/// Load data, run one study and write its outputs plus `manifest.json`
/// under `out_dir/<study dir>`.
pub fn run(args: &RunArgs, command: Vec<String>) -> Result<Vec<PathBuf>> {
    let mut cfg = StudyConfig::load(&args.config)?;
    args.overrides.apply(&mut cfg)?;
    let mut manifest = RunManifest::begin(command).with_config(&args.config, &cfg.canonical_json());
    manifest.seed = Some(cfg.seed);
    manifest.add_input(&args.config)?;
    for p in [Some(&cfg.embeddings), Some(&cfg.norms), cfg.synonyms.as_ref()].into_iter().flatten() {
        manifest.add_input(p).stage("fingerprint")?;
    }
    let data = Dataset::load(&cfg)?;
    let outputs = run_and_write(args.study, &cfg, &data, &args.out_dir)?;
    let at = args.out_dir.join(args.study.dir_name()).join("manifest.json");
    seal(manifest, outputs, &at)
}
