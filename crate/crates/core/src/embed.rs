//! Pre-trained embedding tables in the fastText `.vec` text format, plus the
//! vector operations the rest of the crate builds on.
//!
//! The text format is a header line `count dim` followed by one line per
//! token: the token, a space, then `dim` space-separated reals. Tokens are
//! split off at the first space, so they can never contain one.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// A dense real vector. All components are finite.
#[derive(Clone, Debug, PartialEq)]
pub struct WordVector(Vec<f64>);

impl WordVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if let Some(bad) = components.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite vector component {bad}"
            )));
        }
        Ok(WordVector(components))
    }

    pub fn zeros(dim: usize) -> Self {
        WordVector(vec![0.0; dim])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        dot(&self.0, &self.0).sqrt()
    }

    /// Unit-length copy. Errors on a zero vector.
    pub fn normalized(&self) -> Result<WordVector> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(WordVector(self.0.iter().map(|c| c / n).collect()))
    }

    pub(crate) fn add_assign(&mut self, other: &[f64]) {
        for (a, b) in self.0.iter_mut().zip(other) {
            *a += b;
        }
    }
}

impl From<WordVector> for Vec<f64> {
    fn from(v: WordVector) -> Self {
        v.0
    }
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub(crate) fn cosine_slices(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let nu = dot(u, u).sqrt();
    let nv = dot(v, v).sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// Cosine similarity, clamped to `[-1, 1]` against rounding.
pub fn cosine(u: &WordVector, v: &WordVector) -> Result<f64> {
    cosine_slices(&u.0, &v.0)
}

/// Componentwise sum of a nonempty list of equal-length vectors.
pub fn sum_vectors<'a, I>(vectors: I) -> Result<WordVector>
where
    I: IntoIterator<Item = &'a WordVector>,
{
    let mut iter = vectors.into_iter();
    let first = iter.next().ok_or(Error::Empty("vector list"))?;
    let mut acc = first.clone();
    for v in iter {
        if v.len() != acc.len() {
            return Err(Error::LengthMismatch {
                left: acc.len(),
                right: v.len(),
            });
        }
        acc.add_assign(&v.0);
    }
    Ok(acc)
}

/// Token-indexed vectors of one fixed dimension, in file order.
#[derive(Clone, Debug)]
pub struct EmbeddingTable {
    dim: usize,
    declared_count: usize,
    tokens: Vec<String>,
    vectors: Vec<WordVector>,
    norms: Vec<f64>,
    index: HashMap<String, usize>,
}

impl PartialEq for EmbeddingTable {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.declared_count == other.declared_count
            && self.tokens == other.tokens
            && self.vectors == other.vectors
    }
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("embedding dim must be >= 1".into()));
        }
        Ok(EmbeddingTable {
            dim,
            declared_count: 0,
            tokens: Vec::new(),
            vectors: Vec::new(),
            norms: Vec::new(),
            index: HashMap::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row count announced by the file header (not necessarily `len()`).
    pub fn declared_count(&self) -> usize {
        self.declared_count
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn insert(&mut self, token: impl Into<String>, vector: WordVector) -> Result<()> {
        let token = token.into();
        if token.is_empty() {
            return Err(Error::InvalidParameter("empty token".into()));
        }
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                line: 0,
                expected: self.dim,
                found: vector.len(),
            });
        }
        if self.index.contains_key(&token) {
            return Err(Error::DuplicateToken { line: 0, token });
        }
        self.index.insert(token.clone(), self.tokens.len());
        self.norms.push(vector.norm());
        self.tokens.push(token);
        self.vectors.push(vector);
        if self.declared_count < self.tokens.len() {
            self.declared_count = self.tokens.len();
        }
        Ok(())
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn vector(&self, token: &str) -> Option<&WordVector> {
        self.index.get(token).map(|&i| &self.vectors[i])
    }

    pub fn require(&self, token: &str) -> Result<&WordVector> {
        self.vector(token)
            .ok_or_else(|| Error::MissingToken(token.to_owned()))
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &WordVector)> {
        self.tokens
            .iter()
            .map(String::as_str)
            .zip(self.vectors.iter())
    }

    /// The token whose vector has the highest cosine with `query`, skipping
    /// `exclude`. Equal cosines resolve to the lexicographically smallest
    /// token; zero vectors in the table are never candidates.
    pub fn nearest_label(&self, query: &WordVector, exclude: &HashSet<String>) -> Result<String> {
        if query.len() != self.dim {
            return Err(Error::LengthMismatch {
                left: query.len(),
                right: self.dim,
            });
        }
        let qn = query.norm();
        if qn == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let mut best: Option<(f64, &str)> = None;
        for (i, token) in self.tokens.iter().enumerate() {
            if self.norms[i] == 0.0 || exclude.contains(token) {
                continue;
            }
            let c = (dot(&query.0, &self.vectors[i].0) / (qn * self.norms[i])).clamp(-1.0, 1.0);
            best = match best {
                None => Some((c, token)),
                Some((bc, bt)) if c > bc || (c == bc && token.as_str() < bt) => Some((c, token)),
                keep => keep,
            };
        }
        best.map(|(_, t)| t.to_owned())
            .ok_or(Error::Empty("label candidates"))
    }

    /// Serialize in the `.vec` text format. `{}` formatting of `f64` is
    /// shortest-round-trip, so parse(write(t)) == t.
    pub fn write_vec<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {}", self.len(), self.dim)?;
        for (token, v) in self.iter() {
            out.write_all(token.as_bytes())?;
            for c in v.as_slice() {
                write!(out, " {c}")?;
            }
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn nearest_label(
    query: &WordVector,
    table: &EmbeddingTable,
    exclude: &HashSet<String>,
) -> Result<String> {
    table.nearest_label(query, exclude)
}

fn parse_header(line: &str) -> Result<(usize, usize)> {
    let mut parts = line.split_ascii_whitespace();
    let mut field = |what: &str| -> Result<usize> {
        parts
            .next()
            .ok_or_else(|| Error::MalformedHeader(format!("missing {what}")))?
            .parse::<usize>()
            .map_err(|e| Error::MalformedHeader(format!("{what}: {e}")))
    };
    let count = field("count")?;
    let dim = field("dim")?;
    if parts.next().is_some() {
        return Err(Error::MalformedHeader("expected exactly two integers".into()));
    }
    if dim == 0 {
        return Err(Error::MalformedHeader("dim must be >= 1".into()));
    }
    Ok((count, dim))
}

/// Parse a `.vec` stream. With a `vocab_filter`, rows for other tokens are
/// only checked for their component count, so multi-million-row files can be
/// streamed cheaply; duplicate detection covers retained tokens only.
pub fn parse_embeddings<R: BufRead>(
    mut source: R,
    vocab_filter: Option<&HashSet<String>>,
) -> Result<EmbeddingTable> {
    let mut line = String::new();
    if source.read_line(&mut line)? == 0 {
        return Err(Error::MalformedHeader("empty input".into()));
    }
    let (count, dim) = parse_header(line.trim_end_matches(['\n', '\r']))?;
    let mut table = EmbeddingTable::new(dim)?;
    let mut lineno = 1;
    loop {
        line.clear();
        if source.read_line(&mut line)? == 0 {
            break;
        }
        lineno += 1;
        let text = line.trim_end_matches(['\n', '\r']);
        if text.trim().is_empty() {
            continue;
        }
        let (token, rest) = text.split_once(' ').unwrap_or((text, ""));
        if token.is_empty() {
            return Err(Error::Parse {
                line: lineno,
                message: "empty token".into(),
            });
        }
        let keep = vocab_filter.is_none_or(|f| f.contains(token));
        if !keep {
            let found = rest.split_ascii_whitespace().count();
            if found != dim {
                return Err(Error::DimensionMismatch {
                    line: lineno,
                    expected: dim,
                    found,
                });
            }
            continue;
        }
        let mut components = Vec::with_capacity(dim);
        for field in rest.split_ascii_whitespace() {
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("non-numeric component {field:?}"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("non-finite component {field:?}"),
                });
            }
            components.push(value);
        }
        if components.len() != dim {
            return Err(Error::DimensionMismatch {
                line: lineno,
                expected: dim,
                found: components.len(),
            });
        }
        if table.contains(token) {
            return Err(Error::DuplicateToken {
                line: lineno,
                token: token.to_owned(),
            });
        }
        table.insert(token, WordVector(components))?;
    }
    table.declared_count = count;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn wv(c: &[f64]) -> WordVector {
        WordVector::new(c.to_vec()).unwrap()
    }

    fn table(rows: &[(&str, &[f64])]) -> EmbeddingTable {
        let mut t = EmbeddingTable::new(rows[0].1.len()).unwrap();
        for (tok, v) in rows {
            t.insert(*tok, wv(v)).unwrap();
        }
        t
    }

    #[test]
    fn parses_minimal_file() {
        let t = parse_embeddings("2 3\ncat 1 0 0\ndog 0 1 0\n".as_bytes(), None).unwrap();
        assert_eq!(t.dim(), 3);
        assert_eq!(t.len(), 2);
        assert_eq!(t.declared_count(), 2);
        assert_eq!(t.vector("dog").unwrap().as_slice(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn accepts_crlf_and_trailing_space() {
        let t = parse_embeddings("1 2\r\nx 0.5 -1 \r\n".as_bytes(), None).unwrap();
        assert_eq!(t.vector("x").unwrap().as_slice(), &[0.5, -1.0]);
    }

    #[test]
    fn rejects_short_row() {
        let err = parse_embeddings("1 3\ncat 1 0\n".as_bytes(), None).unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionMismatch {
                line: 2,
                expected: 3,
                found: 2
            }
        ));
    }

    #[test]
    fn rejects_bad_header_and_values() {
        assert!(matches!(
            parse_embeddings("two 3\n".as_bytes(), None),
            Err(Error::MalformedHeader(_))
        ));
        assert!(matches!(
            parse_embeddings("1\n".as_bytes(), None),
            Err(Error::MalformedHeader(_))
        ));
        assert!(matches!(
            parse_embeddings("1 2\na 1 x\n".as_bytes(), None),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_embeddings("2 1\na 1\na 2\n".as_bytes(), None),
            Err(Error::DuplicateToken { line: 3, .. })
        ));
    }

    #[test]
    fn filter_keeps_only_requested_tokens() {
        let filter: HashSet<String> = ["b".to_string(), "zz".to_string()].into();
        let src = "2000000 2\na 1 2\nb 3 4\nc 5 6\n";
        let t = parse_embeddings(src.as_bytes(), Some(&filter)).unwrap();
        assert_eq!(t.declared_count(), 2_000_000);
        assert_eq!(t.tokens(), &["b".to_string()]);
        // Filtered-out rows are still shape-checked.
        let bad = "2 2\na 1\nb 3 4\n";
        assert!(parse_embeddings(bad.as_bytes(), Some(&filter)).is_err());
    }

    #[test]
    fn cosine_examples() {
        assert!((cosine(&wv(&[1., 2., 3.]), &wv(&[1., 2., 3.])).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&wv(&[1., 0.]), &wv(&[0., 1.])).unwrap(), 0.0);
        let c = cosine(&wv(&[1., 1.]), &wv(&[1., 0.])).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        assert!(matches!(
            cosine(&wv(&[0., 0.]), &wv(&[1., 0.])),
            Err(Error::ZeroNorm)
        ));
        assert!(matches!(
            cosine(&wv(&[1.]), &wv(&[1., 0.])),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn sum_examples() {
        assert_eq!(sum_vectors([&wv(&[1., 0.])]).unwrap(), wv(&[1., 0.]));
        assert_eq!(
            sum_vectors([&wv(&[1., 0.]), &wv(&[0., 1.])]).unwrap(),
            wv(&[1., 1.])
        );
        assert_eq!(
            sum_vectors([&wv(&[1., 2.]), &wv(&[3., 4.]), &wv(&[-4., -6.])]).unwrap(),
            wv(&[0., 0.])
        );
        assert!(matches!(
            sum_vectors(std::iter::empty()),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn nearest_label_examples() {
        let t = table(&[("b", &[0., 1.]), ("a", &[1., 0.])]);
        let none = HashSet::new();
        assert_eq!(t.nearest_label(&wv(&[1., 0.]), &none).unwrap(), "a");
        assert_eq!(t.nearest_label(&wv(&[1., 1.]), &none).unwrap(), "a");
        let ex: HashSet<String> = ["a".to_string()].into();
        assert_eq!(t.nearest_label(&wv(&[1., 0.]), &ex).unwrap(), "b");
        let all: HashSet<String> = ["a".to_string(), "b".to_string()].into();
        assert!(matches!(
            t.nearest_label(&wv(&[1., 0.]), &all),
            Err(Error::Empty(_))
        ));
        assert!(matches!(
            t.nearest_label(&wv(&[0., 0.]), &none),
            Err(Error::ZeroNorm)
        ));
    }

    #[test]
    fn nearest_label_of_planted_sum() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let dim = 16;
        let mut t = EmbeddingTable::new(dim).unwrap();
        let base: Vec<f64> = (0..dim).map(|i| if i == 3 { 1.0 } else { 0.0 }).collect();
        t.insert("x", wv(&base)).unwrap();
        for k in 0..dim {
            if k != 3 {
                let mut v = vec![0.0; dim];
                v[k] = 1.0;
                v[3] = 0.3;
                t.insert(format!("d{k}"), wv(&v)).unwrap();
            }
        }
        let dups: Vec<WordVector> = (0..5)
            .map(|_| wv(&base.iter().map(|b| b + noise.sample(&mut rng)).collect::<Vec<_>>()))
            .collect();
        let q = sum_vectors(&dups).unwrap();
        // Exhaustive scan as the reference.
        let expected = t
            .iter()
            .map(|(tok, v)| (cosine(&q, v).unwrap(), tok))
            .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
            .unwrap()
            .1
            .to_owned();
        assert_eq!(expected, "x");
        assert_eq!(t.nearest_label(&q, &HashSet::new()).unwrap(), "x");
    }

    fn finite_vec(dim: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-10.0f64..10.0, dim)
    }

    proptest! {
        #[test]
        fn cosine_symmetric_and_scale_invariant(
            u in finite_vec(6), v in finite_vec(6), alpha in 0.01f64..100.0
        ) {
            let (u, v) = (wv(&u), wv(&v));
            prop_assume!(u.norm() > 1e-6 && v.norm() > 1e-6);
            let c = cosine(&u, &v).unwrap();
            prop_assert!((c - cosine(&v, &u).unwrap()).abs() < 1e-12);
            prop_assert!((cosine(&u, &u).unwrap() - 1.0).abs() < 1e-12);
            let scaled = wv(&u.as_slice().iter().map(|x| x * alpha).collect::<Vec<_>>());
            prop_assert!((cosine(&scaled, &v).unwrap() - c).abs() < 1e-9);
        }

        #[test]
        fn unique_vectors_label_themselves(rows in proptest::collection::vec(finite_vec(4), 1..8)) {
            let mut t = EmbeddingTable::new(4).unwrap();
            for (i, r) in rows.iter().enumerate() {
                t.insert(format!("t{i}"), wv(r)).unwrap();
            }
            for (i, r) in rows.iter().enumerate() {
                let v = wv(r);
                prop_assume!(v.norm() > 1e-6);
                // Only meaningful when no other row points the same direction.
                let unique = rows.iter().enumerate().all(|(j, o)| {
                    j == i || wv(o).norm() == 0.0 || cosine(&v, &wv(o)).unwrap() < 1.0 - 1e-12
                });
                if unique {
                    prop_assert_eq!(t.nearest_label(&v, &HashSet::new()).unwrap(), format!("t{i}"));
                }
            }
        }

        #[test]
        fn write_then_parse_round_trips(rows in proptest::collection::vec(finite_vec(3), 1..6)) {
            let mut t = EmbeddingTable::new(3).unwrap();
            for (i, r) in rows.iter().enumerate() {
                t.insert(format!("w{i}"), wv(r)).unwrap();
            }
            let mut buf = Vec::new();
            t.write_vec(&mut buf).unwrap();
            let back = parse_embeddings(buf.as_slice(), None).unwrap();
            prop_assert_eq!(&back, &t);
            let mut buf2 = Vec::new();
            back.write_vec(&mut buf2).unwrap();
            prop_assert_eq!(buf, buf2);
        }
    }
}
