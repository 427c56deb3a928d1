use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use toml::{Table, Value};

use crate::cluster::{InfomapOptions, Linkage, TreeCut};
use crate::converge::{ConvergenceOptions, MatchingMode};
use crate::error::{Error, Result};
use crate::graph::ThresholdTable;
use crate::norms::{Pos, PrescreenOptions, StrengthClass, StrengthRule};

/// Environment variable naming the directory relative data paths resolve
/// against. Without it they resolve against the config file's directory.
pub const DATA_DIR_ENV: &str = "CONCEPTMAP_DATA_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdMode {
    /// Per-POS thresholds from `thresholds.<pos>` (published values by default).
    Table,
    /// Per-cell threshold maximizing IC over the sweep grid.
    Sweep,
    /// The single `threshold` value everywhere.
    Fixed,
}

impl FromStr for ThresholdMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(ThresholdMode::Table),
            "sweep" => Ok(ThresholdMode::Sweep),
            "fixed" => Ok(ThresholdMode::Fixed),
            _ => Err(Error::InvalidParameter(format!("unknown threshold_mode {s:?}"))),
        }
    }
}

/// Which POS networks a study looks at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PosSelection {
    All,
    Only(Pos),
}

impl FromStr for PosSelection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("all") {
            Ok(PosSelection::All)
        } else {
            s.parse().map(PosSelection::Only)
        }
    }
}

impl PosSelection {
    /// Content POS classes with threshold tables, restricted by the selection.
    pub fn classes(self) -> Vec<Pos> {
        match self {
            PosSelection::All => vec![Pos::Noun, Pos::Verb, Pos::Adjective],
            PosSelection::Only(p) => vec![p],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyConfig {
    pub seed: u64,
    pub language: String,
    pub embeddings: PathBuf,
    pub norms: PathBuf,
    pub synonyms: Option<PathBuf>,
    pub strength: Option<StrengthClass>,
    pub pos: PosSelection,
    pub threshold_mode: ThresholdMode,
    pub threshold: Option<f64>,
    pub sample_sizes: Vec<usize>,
    pub sampling_replicates: usize,
    pub noise_replicates: usize,
    pub noise_levels: Vec<usize>,
    pub sweep_min: f64,
    pub sweep_max: f64,
    pub sweep_step: f64,
    pub thresholds: BTreeMap<Pos, ThresholdTable>,
    pub sc_threshold: f64,
    pub screen_threshold: f64,
    pub min_probability: f64,
    pub strength_rule: StrengthRule,
    pub matching: MatchingMode,
    pub restarts: usize,
    pub min_cluster_size: usize,
    pub max_join_height: f64,
    pub min_split_height: f64,
    pub linkage: Linkage,
    pub normalize_before_sum: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            seed: 1,
            language: "en".into(),
            embeddings: PathBuf::new(),
            norms: PathBuf::new(),
            synonyms: None,
            strength: None,
            pos: PosSelection::All,
            threshold_mode: ThresholdMode::Table,
            threshold: None,
            sample_sizes: (1..=10).map(|i| 5 * i).collect(),
            sampling_replicates: 100,
            noise_replicates: 50,
            noise_levels: vec![0, 5, 10, 15, 20, 25],
            sweep_min: 0.65,
            sweep_max: 0.85,
            sweep_step: 0.01,
            thresholds: [Pos::Noun, Pos::Verb, Pos::Adjective]
                .into_iter()
                .filter_map(|p| ThresholdTable::published(p).map(|t| (p, t)))
                .collect(),
            sc_threshold: 0.726,
            screen_threshold: 0.692,
            min_probability: 0.05,
            strength_rule: StrengthRule::Max,
            matching: MatchingMode::Optimal,
            restarts: 8,
            min_cluster_size: 2,
            max_join_height: 0.99,
            min_split_height: 0.0,
            linkage: Linkage::Average,
            normalize_before_sum: false,
        }
    }
}

/// Collects every problem in a config so they can be reported together.
struct Reader {
    table: Table,
    errors: Vec<String>,
}

impl Reader {
    fn take(&mut self, key: &str) -> Option<Value> {
        self.table.remove(key)
    }

    fn string(&mut self, key: &str) -> Option<String> {
        match self.take(key)? {
            Value::String(s) => Some(s),
            other => {
                self.errors.push(format!("{key}: expected a string, found {}", other.type_str()));
                None
            }
        }
    }

    fn parsed<T: FromStr>(&mut self, key: &str) -> Option<T>
    where
        T::Err: std::fmt::Display,
    {
        let s = self.string(key)?;
        match s.parse() {
            Ok(v) => Some(v),
            Err(e) => {
                self.errors.push(format!("{key}: {e}"));
                None
            }
        }
    }

    fn float(&mut self, key: &str) -> Option<f64> {
        match self.take(key)? {
            Value::Float(f) => Some(f),
            Value::Integer(i) => Some(i as f64),
            other => {
                self.errors.push(format!("{key}: expected a number, found {}", other.type_str()));
                None
            }
        }
    }

    fn count(&mut self, key: &str) -> Option<usize> {
        match self.take(key)? {
            Value::Integer(i) if i >= 0 => Some(i as usize),
            other => {
                self.errors.push(format!("{key}: expected a nonnegative integer, found {other}"));
                None
            }
        }
    }

    fn boolean(&mut self, key: &str) -> Option<bool> {
        match self.take(key)? {
            Value::Boolean(b) => Some(b),
            other => {
                self.errors.push(format!("{key}: expected true or false, found {other}"));
                None
            }
        }
    }

    fn float_list(&mut self, key: &str, value: Value) -> Option<Vec<f64>> {
        let Value::Array(items) = value else {
            self.errors.push(format!("{key}: expected an array of numbers"));
            return None;
        };
        let mut out = Vec::with_capacity(items.len());
        for item in items {
            match item {
                Value::Float(f) => out.push(f),
                Value::Integer(i) => out.push(i as f64),
                other => {
                    self.errors.push(format!("{key}: expected numbers, found {other}"));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn count_list(&mut self, key: &str) -> Option<Vec<usize>> {
        let Value::Array(items) = self.take(key)? else {
            self.errors.push(format!("{key}: expected an array of integers"));
            return None;
        };
        let mut out = Vec::with_capacity(items.len());
        for item in items {
            match item {
                Value::Integer(i) if i >= 0 => out.push(i as usize),
                other => {
                    self.errors.push(format!("{key}: expected nonnegative integers, found {other}"));
                    return None;
                }
            }
        }
        Some(out)
    }
}

impl StudyConfig {
    /// Parse and validate a config file. Relative data paths resolve against
    /// `$CONCEPTMAP_DATA_DIR` if set, else the file's directory.
    pub fn load(path: &Path) -> Result<StudyConfig> {
        let text = std::fs::read_to_string(path)?;
        let base = match std::env::var_os(DATA_DIR_ENV) {
            Some(dir) => PathBuf::from(dir),
            None => path.parent().map(Path::to_path_buf).unwrap_or_default(),
        };
        StudyConfig::parse(&text, &base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<StudyConfig> {
        let table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(vec![e.message().to_owned()]))?;
        let mut r = Reader { table, errors: Vec::new() };
        let mut c = StudyConfig::default();
        let resolve = |p: String| {
            let p = PathBuf::from(p);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };

        match r.take("seed") {
            Some(Value::Integer(i)) if i >= 0 => c.seed = i as u64,
            Some(other) => r.errors.push(format!("seed: expected a nonnegative integer, found {other}")),
            None => {}
        }
        if let Some(s) = r.string("language") {
            c.language = s;
        }
        match r.string("embeddings") {
            Some(p) => c.embeddings = resolve(p),
            None => r.errors.push("embeddings: required".into()),
        }
        match r.string("norms") {
            Some(p) => c.norms = resolve(p),
            None => r.errors.push("norms: required".into()),
        }
        c.synonyms = r.string("synonyms").map(resolve);
        if let Some(s) = r.string("strength") {
            if s != "none" {
                match s.parse() {
                    Ok(v) => c.strength = Some(v),
                    Err(e) => r.errors.push(format!("strength: {e}")),
                }
            }
        }
        if let Some(v) = r.parsed("pos") {
            c.pos = v;
        }
        if let Some(v) = r.parsed("threshold_mode") {
            c.threshold_mode = v;
        }
        c.threshold = r.float("threshold");
        if let Some(v) = r.count_list("sample_sizes") {
            c.sample_sizes = v;
        }
        if let Some(v) = r.count("sampling_replicates") {
            c.sampling_replicates = v;
        }
        if let Some(v) = r.count("noise_replicates") {
            c.noise_replicates = v;
        }
        if let Some(v) = r.count_list("noise_levels") {
            c.noise_levels = v;
        }
        for (key, slot) in [
            ("sweep_min", &mut c.sweep_min),
            ("sweep_max", &mut c.sweep_max),
            ("sweep_step", &mut c.sweep_step),
            ("sc_threshold", &mut c.sc_threshold),
            ("screen_threshold", &mut c.screen_threshold),
            ("min_probability", &mut c.min_probability),
            ("max_join_height", &mut c.max_join_height),
            ("min_split_height", &mut c.min_split_height),
        ] {
            if let Some(v) = r.float(key) {
                *slot = v;
            }
        }
        match r.take("thresholds") {
            Some(Value::Table(t)) => {
                for (key, value) in t {
                    let Ok(pos) = key.parse::<Pos>() else {
                        r.errors.push(format!("thresholds.{key}: unknown POS"));
                        continue;
                    };
                    let name = format!("thresholds.{key}");
                    if let Some(values) = r.float_list(&name, value) {
                        match ThresholdTable::from_values(pos, &values) {
                            Ok(table) => {
                                c.thresholds.insert(pos, table);
                            }
                            Err(e) => r.errors.push(format!("{name}: {e}")),
                        }
                    }
                }
            }
            Some(other) => r.errors.push(format!("thresholds: expected a table, found {}", other.type_str())),
            None => {}
        }
        if let Some(v) = r.parsed("strength_rule") {
            c.strength_rule = v;
        }
        if let Some(v) = r.parsed("matching") {
            c.matching = v;
        }
        if let Some(v) = r.count("restarts") {
            c.restarts = v;
        }
        if let Some(v) = r.count("min_cluster_size") {
            c.min_cluster_size = v;
        }
        if let Some(v) = r.parsed("linkage") {
            c.linkage = v;
        }
        if let Some(v) = r.boolean("normalize_before_sum") {
            c.normalize_before_sum = v;
        }
        let leftover: Vec<String> = r.table.keys().cloned().collect();
        for key in leftover {
            r.errors.push(format!("{key}: unknown key"));
        }
        let mut errors = r.errors;
        errors.extend(c.problems());
        if errors.is_empty() {
            Ok(c)
        } else {
            Err(Error::Config(errors))
        }
    }

    /// Range and consistency problems, all of them.
    pub fn problems(&self) -> Vec<String> {
        let mut e = Vec::new();
        let unit = |x: f64| (-1.0..=1.0).contains(&x);
        if self.sampling_replicates == 0 {
            e.push("sampling_replicates: must be > 0".into());
        }
        if self.noise_replicates == 0 {
            e.push("noise_replicates: must be > 0".into());
        }
        if self.restarts == 0 {
            e.push("restarts: must be > 0".into());
        }
        if self.min_cluster_size == 0 {
            e.push("min_cluster_size: must be > 0".into());
        }
        if self.sample_sizes.is_empty() || self.sample_sizes.contains(&0) {
            e.push("sample_sizes: must be a nonempty list of positive sizes".into());
        }
        if self.sweep_step.is_nan() || self.sweep_step <= 0.0 {
            e.push("sweep_step: must be > 0".into());
        }
        if !(unit(self.sweep_min) && unit(self.sweep_max) && self.sweep_min <= self.sweep_max) {
            e.push(format!(
                "sweep_min/sweep_max: need -1 <= min <= max <= 1, got {} and {}",
                self.sweep_min, self.sweep_max
            ));
        }
        for (key, v) in [
            ("sc_threshold", self.sc_threshold),
            ("screen_threshold", self.screen_threshold),
        ] {
            if !unit(v) {
                e.push(format!("{key}: {v} is not a cosine"));
            }
        }
        if !(0.0..1.0).contains(&self.min_probability) {
            e.push(format!("min_probability: {} outside [0, 1)", self.min_probability));
        }
        if !(self.max_join_height >= 0.0 && self.min_split_height >= 0.0 && self.min_split_height <= self.max_join_height) {
            e.push("min_split_height/max_join_height: need 0 <= min_split_height <= max_join_height".into());
        }
        match (self.threshold_mode, self.threshold) {
            (ThresholdMode::Fixed, None) => e.push("threshold: required when threshold_mode = \"fixed\"".into()),
            (_, Some(t)) if !unit(t) => e.push(format!("threshold: {t} is not a cosine")),
            _ => {}
        }
        if self.threshold_mode == ThresholdMode::Table {
            for p in self.pos.classes() {
                if !self.thresholds.contains_key(&p) {
                    e.push(format!("thresholds.{p}: required for threshold_mode = \"table\""));
                }
            }
        }
        e
    }

    /// Cosine grid from `sweep_min` to `sweep_max` inclusive, rounded to
    /// 1e-9 so grid points print cleanly.
    pub fn sweep_grid(&self) -> Vec<f64> {
        let steps = ((self.sweep_max - self.sweep_min) / self.sweep_step + 1e-9).floor() as usize;
        (0..=steps)
            .map(|i| ((self.sweep_min + i as f64 * self.sweep_step) * 1e9).round() / 1e9)
            .collect()
    }

    pub fn prescreen_options(&self) -> PrescreenOptions {
        PrescreenOptions {
            min_probability: self.min_probability,
            rule: self.strength_rule,
        }
    }

    pub fn infomap_options(&self) -> InfomapOptions {
        InfomapOptions {
            restarts: self.restarts,
            ..InfomapOptions::default()
        }
    }

    pub fn tree_cut(&self) -> TreeCut {
        TreeCut {
            min_cluster_size: self.min_cluster_size,
            max_join_height: self.max_join_height,
            min_split_height: self.min_split_height,
        }
    }

    pub fn convergence_options(&self) -> ConvergenceOptions {
        ConvergenceOptions {
            sc_threshold: self.sc_threshold,
            matching: self.matching,
            normalize_before_sum: self.normalize_before_sum,
        }
    }

    /// Cosine threshold for a POS network paired with a WA network of the
    /// given class, under `table` or `fixed` mode.
    pub fn we_threshold(&self, pos: Pos, class: Option<StrengthClass>) -> Result<f64> {
        match self.threshold_mode {
            ThresholdMode::Fixed => Ok(self.threshold.expect("validated")),
            _ => self
                .thresholds
                .get(&pos)
                .and_then(|t| t.for_class(class))
                .ok_or_else(|| Error::InvalidParameter(format!("no {pos} threshold configured"))),
        }
    }

    /// Stable JSON rendering used for the config hash.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<StudyConfig> {
        StudyConfig::parse(text, Path::new("/data"))
    }

    #[test]
    fn defaults_and_paths() {
        let c = parse("embeddings = \"e.vec\"\nnorms = \"/abs/n.tsv\"\n").unwrap();
        assert_eq!(c.embeddings, PathBuf::from("/data/e.vec"));
        assert_eq!(c.norms, PathBuf::from("/abs/n.tsv"));
        assert_eq!(c.sc_threshold, 0.726);
        assert_eq!(c.sample_sizes, vec![5, 10, 15, 20, 25, 30, 35, 40, 45, 50]);
        assert_eq!(c.we_threshold(Pos::Noun, Some(StrengthClass::High)).unwrap(), 0.77);
        assert_eq!(c.we_threshold(Pos::Verb, None).unwrap(), 0.72);
    }

    #[test]
    fn overrides() {
        let c = parse(
            r#"
            seed = 7
            embeddings = "e"
            norms = "n"
            strength = "moderate"
            pos = "verb"
            threshold_mode = "fixed"
            threshold = 0.7
            noise_levels = [0, 2]
            matching = "greedy"
            thresholds.noun = [0.1, 0.2, 0.3, 0.4, 0.5]
            "#,
        )
        .unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.strength, Some(StrengthClass::Moderate));
        assert_eq!(c.pos, PosSelection::Only(Pos::Verb));
        assert_eq!(c.we_threshold(Pos::Noun, None).unwrap(), 0.7);
        assert_eq!(c.thresholds[&Pos::Noun].for_class(None), Some(0.2));
        assert_eq!(c.matching, MatchingMode::Greedy);
    }

    #[test]
    fn all_errors_reported_together() {
        let err = parse(
            "sampling_replicates = 0\nsc_threshold = 3\nstrength = \"huge\"\nbogus = 1\nthreshold_mode = \"fixed\"\n",
        )
        .unwrap_err();
        let Error::Config(list) = err else { panic!("{err}") };
        for needle in ["embeddings", "norms", "sampling_replicates", "sc_threshold", "strength", "bogus", "threshold:"] {
            assert!(list.iter().any(|m| m.starts_with(needle)), "{needle} missing from {list:?}");
        }
        assert_eq!(Error::Config(list).exit_code(), 1);
    }

    #[test]
    fn sweep_grid_is_complete() {
        let c = StudyConfig::default();
        let g = c.sweep_grid();
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], 0.65);
        assert_eq!(g[20], 0.85);
        assert_eq!(g[7], 0.72);
    }
}
