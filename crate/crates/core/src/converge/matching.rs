//! One-to-one pairing of clusters across two partitions.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchingMode {
    /// Maximum number of pairs, ties broken by maximum cosine sum.
    #[default]
    Optimal,
    /// Take candidate pairs in descending cosine order while both ends are free.
    Greedy,
}

impl FromStr for MatchingMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "optimal" => Ok(MatchingMode::Optimal),
            "greedy" => Ok(MatchingMode::Greedy),
            other => Err(Error::InvalidParameter(format!("unknown matching mode {other:?}"))),
        }
    }
}

/// Pairs `(row, col)` over entries of `sim` that are `>= threshold`, sorted
/// by row. No row or column appears twice.
pub fn match_clusters(sim: &[Vec<f64>], threshold: f64, mode: MatchingMode) -> Vec<(usize, usize)> {
    let rows = sim.len();
    let cols = sim.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    let mut pairs = match mode {
        MatchingMode::Greedy => greedy(sim, threshold),
        MatchingMode::Optimal => optimal(sim, threshold, rows, cols),
    };
    pairs.sort_unstable();
    pairs
}

fn greedy(sim: &[Vec<f64>], threshold: f64) -> Vec<(usize, usize)> {
    let mut cands: Vec<(f64, usize, usize)> = Vec::new();
    for (i, row) in sim.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c >= threshold {
                cands.push((c, i, j));
            }
        }
    }
    cands.sort_by(|x, y| y.0.total_cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    let mut row_used = vec![false; sim.len()];
    let mut col_used = vec![false; sim[0].len()];
    let mut out = Vec::new();
    for (_, i, j) in cands {
        if !row_used[i] && !col_used[j] {
            row_used[i] = true;
            col_used[j] = true;
            out.push((i, j));
        }
    }
    out
}

fn optimal(sim: &[Vec<f64>], threshold: f64, rows: usize, cols: usize) -> Vec<(usize, usize)> {
    // Each candidate is worth a bonus larger than any possible cosine sum,
    // so the heaviest assignment first maximizes the number of candidates.
    let bonus = 4.0 * (rows.min(cols) as f64 + 1.0);
    let transpose = rows > cols;
    let (n, m) = if transpose { (cols, rows) } else { (rows, cols) };
    let weight = |r: usize, c: usize| -> f64 {
        let s = if transpose { sim[c][r] } else { sim[r][c] };
        if s >= threshold {
            bonus + s
        } else {
            0.0
        }
    };
    let assigned = hungarian_max(n, m, weight);
    assigned
        .into_iter()
        .enumerate()
        .filter(|&(r, c)| weight(r, c) > 0.0)
        .map(|(r, c)| if transpose { (c, r) } else { (r, c) })
        .collect()
}

/// Maximum-weight assignment of every row to a distinct column (`n <= m`),
/// by the shortest augmenting path method with potentials. Returns the
/// column of each row.
fn hungarian_max(n: usize, m: usize, weight: impl Fn(usize, usize) -> f64) -> Vec<usize> {
    // 1-based arrays; index 0 is the virtual source.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut col_row = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        col_row[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = col_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = -weight(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[col_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_row[j0] = col_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_col = vec![0; n];
    for j in 1..=m {
        if col_row[j] > 0 {
            row_col[col_row[j] - 1] = j - 1;
        }
    }
    row_col
}
