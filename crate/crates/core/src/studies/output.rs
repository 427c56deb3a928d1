use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// One line of the flat results table.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResultRow {
    pub study: String,
    pub cell: String,
    pub k: Option<usize>,
    pub threshold: Option<f64>,
    pub replicate: Option<usize>,
    pub ic: f64,
    pub sc: Option<f64>,
    pub modularity: Option<f64>,
    pub degree: Option<f64>,
}

pub const CSV_HEADER: &str = "study,cell,k,threshold,replicate,ic,sc,modularity,degree";

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn render_csv(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.study,
            r.cell,
            opt(r.k),
            opt(r.threshold),
            opt(r.replicate),
            r.ic,
            opt(r.sc),
            opt(r.modularity),
            opt(r.degree)
        );
    }
    out
}

/// Write through a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}
