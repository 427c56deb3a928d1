//! Study orchestration: configuration, dataset loading, the three study
//! designs and their on-disk outputs.

mod config;
mod data;
mod output;
mod study1;
mod study2;
mod study3;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub use config::{PosSelection, StudyConfig, ThresholdMode, DATA_DIR_ENV};
pub use data::Dataset;
pub use output::{render_csv, write_atomic, write_json, ResultRow, CSV_HEADER};
pub use study1::{run_study1, Study1Output};
pub use study2::{calibrate_thresholds, run_study2, BandCalibration, Calibration, CellOutcome, Group, Study2Output};
pub use study3::{
    run_noise_study, run_sampling_study, sample_concepts, weak_word_pool, CurvePoint, NoiseCurve, NoiseOutput,
    NoisePoint, SamplingOutput, SweepResult,
};

use crate::cluster::{write_dendrogram, write_partition};
use crate::converge::{write_pairs, ConvergenceReport};
use crate::error::{Error, Result};

/// Seed for an independent task, a pure function of the master seed and the
/// task's coordinates.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    for p in parts {
        h.update(p.to_le_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("sha256 has 32 bytes"))
}

pub(crate) fn stream_rng(master: u64, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, parts))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Study {
    One,
    Two,
    ThreeSample,
    ThreeNoise,
}

impl Study {
    pub const ALL: [Study; 4] = [Study::One, Study::Two, Study::ThreeSample, Study::ThreeNoise];

    pub fn as_str(self) -> &'static str {
        match self {
            Study::One => "1",
            Study::Two => "2",
            Study::ThreeSample => "3-sample",
            Study::ThreeNoise => "3-noise",
        }
    }

    /// Output subdirectory under the run's output root.
    pub fn dir_name(self) -> &'static str {
        match self {
            Study::One => "study1",
            Study::Two => "study2",
            Study::ThreeSample => "study3-sample",
            Study::ThreeNoise => "study3-noise",
        }
    }
}

impl fmt::Display for Study {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Study {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Study::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown study {s:?}; expected 1, 2, 3-sample or 3-noise")))
    }
}

/// One CSV row per network of a comparison, cells suffixed `/wa` and `/we`.
pub fn report_rows(study: &str, cell: &str, threshold: Option<f64>, report: &ConvergenceReport) -> Vec<ResultRow> {
    [("wa", &report.stats_wa), ("we", &report.stats_we)]
        .into_iter()
        .map(|(net, stats)| ResultRow {
            study: study.into(),
            cell: format!("{cell}/{net}"),
            k: None,
            threshold,
            replicate: None,
            ic: report.ic_percent,
            sc: Some(report.sc_percent),
            modularity: stats.modularity,
            degree: Some(stats.average_degree),
        })
        .collect()
}

fn to_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

/// Run `study` and write its reports plus `results.csv` under
/// `out_dir/<study dir>`. Returns the written paths in write order.
pub fn run_and_write(study: Study, cfg: &StudyConfig, data: &Dataset, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let dir = out_dir.join(study.dir_name());
    let mut written = Vec::new();
    let mut put = |name: &str, bytes: Vec<u8>| -> Result<()> {
        let path = dir.join(name);
        write_atomic(&path, &bytes)?;
        written.push(path);
        Ok(())
    };
    let rows = match study {
        Study::One => {
            let out = run_study1(cfg, data)?;
            let words = out.wa_graph.nodes();
            put("report.json", json_bytes(&out)?)?;
            put("pairs.tsv", to_bytes(|b| write_pairs(&out.report.pairs, b))?)?;
            put("wa_partition.tsv", to_bytes(|b| write_partition(words, &out.wa_partition, b))?)?;
            put("we_partition.tsv", to_bytes(|b| write_partition(words, &out.we_partition, b))?)?;
            put("dendrogram.tsv", to_bytes(|b| write_dendrogram(&out.dendrogram, b))?)?;
            report_rows("1", "all", None, &out.report)
        }
        Study::Two => {
            let out = run_study2(cfg, data)?;
            let mut rows = Vec::new();
            for cell in &out.cells {
                put(&format!("cells/{}.json", cell.cell.replace('/', "_")), json_bytes(cell)?)?;
                if let Some(r) = &cell.report {
                    rows.extend(report_rows("2", &cell.cell, cell.threshold, r));
                }
            }
            put("summary.json", json_bytes(&out)?)?;
            rows
        }
        Study::ThreeSample => {
            let out = run_sampling_study(cfg, data)?;
            put("sampling.json", json_bytes(&out)?)?;
            out.rows
        }
        Study::ThreeNoise => {
            let out = run_noise_study(cfg, data)?;
            put("noise.json", json_bytes(&out)?)?;
            out.rows
        }
    };
    put("results.csv", render_csv(&rows).into_bytes())?;
    Ok(written)
}

/// Pretty JSON with a trailing newline, the format of every report file.
pub fn json_bytes<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}
