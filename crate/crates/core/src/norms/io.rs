use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use super::{normalize_token, AssociationEdge, AssociationTable, Pos, ResponseCount};
use crate::error::{Error, Result};

const NORMS_COLUMNS: [&str; 6] = [
    "cue",
    "response",
    "n_response",
    "n_cue_presentations",
    "pos_cue",
    "pos_response",
];

const TABLE_HEADER: &str = "word_a\tword_b\tfsa\tbsa\tweight\tpos_a\tpos_b";

/// Parsed norms TSV: raw records plus one POS tag per token.
#[derive(Clone, Debug, Default)]
pub struct NormsFile {
    pub records: Vec<ResponseCount>,
    pub tags: BTreeMap<String, String>,
}

fn canonical_tag(tag: &str) -> String {
    match Pos::from_tag(tag) {
        Some(p) => p.as_str().to_owned(),
        None => tag.trim().to_lowercase(),
    }
}

fn column_index(header: &str, names: &[&str]) -> Result<Vec<usize>> {
    let cols: Vec<String> = header
        .split('\t')
        .map(|c| c.trim().to_ascii_lowercase())
        .collect();
    names
        .iter()
        .map(|name| {
            cols.iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::MissingColumn((*name).to_owned()))
        })
        .collect()
}

fn record_tag(
    tags: &mut BTreeMap<String, (String, usize)>,
    token: &str,
    tag: String,
    line: usize,
) -> Result<()> {
    match tags.get(token) {
        Some((first, _)) if *first != tag => Err(Error::ConflictingPos {
            line,
            token: token.to_owned(),
            first: first.clone(),
            second: tag,
        }),
        Some(_) => Ok(()),
        None => {
            tags.insert(token.to_owned(), (tag, line));
            Ok(())
        }
    }
}

/// Read a norms TSV with header
/// `cue response n_response n_cue_presentations pos_cue pos_response`
/// (columns located by name). Tokens are normalized; POS tags are
/// canonicalized and must agree across every line a token appears on.
pub fn read_norms<R: BufRead>(reader: R) -> Result<NormsFile> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or(Error::Empty("norms file"))??;
    let idx = column_index(header.trim_end_matches('\r'), &NORMS_COLUMNS)?;
    let mut records = Vec::new();
    let mut tags: BTreeMap<String, (String, usize)> = BTreeMap::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let get = |k: usize| -> Result<&str> {
            fields.get(idx[k]).copied().ok_or_else(|| Error::Parse {
                line: lineno,
                message: format!("missing field {:?}", NORMS_COLUMNS[k]),
            })
        };
        let count = |k: usize| -> Result<u64> {
            let raw = get(k)?;
            raw.trim().parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("{} is not a count: {raw:?}", NORMS_COLUMNS[k]),
            })
        };
        let cue = normalize_token(get(0)?);
        let response = normalize_token(get(1)?);
        if cue.is_empty() || response.is_empty() {
            return Err(Error::Parse {
                line: lineno,
                message: "empty token".into(),
            });
        }
        let n_response = count(2)?;
        let n_cue_presentations = count(3)?;
        if n_response > n_cue_presentations {
            return Err(Error::Parse {
                line: lineno,
                message: format!("n_response {n_response} exceeds presentations {n_cue_presentations}"),
            });
        }
        let pos_cue = canonical_tag(get(4)?);
        let pos_response = canonical_tag(get(5)?);
        record_tag(&mut tags, &cue, pos_cue.clone(), lineno)?;
        record_tag(&mut tags, &response, pos_response.clone(), lineno)?;
        records.push(ResponseCount {
            cue,
            response,
            n_response,
            n_cue_presentations,
            pos_cue,
            pos_response,
        });
    }
    Ok(NormsFile {
        records,
        tags: tags.into_iter().map(|(k, (t, _))| (k, t)).collect(),
    })
}

/// Read `word<TAB>syn1,syn2,...` lines. A leading `word` header is skipped.
pub fn read_synonyms<R: BufRead>(reader: R) -> Result<HashMap<String, Vec<String>>> {
    let mut out: HashMap<String, Vec<String>> = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let (word, syns) = line.split_once('\t').ok_or_else(|| Error::Parse {
            line: i + 1,
            message: "expected word<TAB>synonyms".into(),
        })?;
        if i == 0 && word.trim().eq_ignore_ascii_case("word") {
            continue;
        }
        let word = normalize_token(word);
        let entry = out.entry(word).or_default();
        entry.extend(
            syns.split(',')
                .map(normalize_token)
                .filter(|s| !s.is_empty()),
        );
    }
    Ok(out)
}

/// Write the canonical screened table: one edge per line with both
/// directional probabilities and both POS tags.
pub fn write_association_table<W: Write>(table: &AssociationTable, mut out: W) -> Result<()> {
    writeln!(out, "{TABLE_HEADER}")?;
    for e in table.edges() {
        let pa = table.pos(&e.word_a).expect("edge word has POS");
        let pb = table.pos(&e.word_b).expect("edge word has POS");
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            e.word_a, e.word_b, e.fsa, e.bsa, e.weight, pa, pb
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_association_table<R: BufRead>(reader: R) -> Result<AssociationTable> {
    let mut lines = reader.lines();
    let header = lines.next().ok_or(Error::Empty("association table"))??;
    let names: Vec<&str> = TABLE_HEADER.split('\t').collect();
    let idx = column_index(header.trim_end_matches('\r'), &names)?;
    let mut edges = Vec::new();
    let mut tags: BTreeMap<String, (String, usize)> = BTreeMap::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let get = |k: usize| -> Result<&str> {
            fields.get(idx[k]).copied().ok_or_else(|| Error::Parse {
                line: lineno,
                message: format!("missing field {:?}", names[k]),
            })
        };
        let prob = |k: usize| -> Result<f64> {
            let raw = get(k)?;
            raw.trim().parse::<f64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("{} is not a number: {raw:?}", names[k]),
            })
        };
        let a = normalize_token(get(0)?);
        let b = normalize_token(get(1)?);
        let (fsa, bsa) = (prob(2)?, prob(3)?);
        let pos = |k: usize| -> Result<Pos> {
            get(k)?.parse().map_err(|e: Error| Error::Parse {
                line: lineno,
                message: e.to_string(),
            })
        };
        let (pa, pb) = (pos(5)?, pos(6)?);
        record_tag(&mut tags, &a, pa.as_str().to_owned(), lineno)?;
        record_tag(&mut tags, &b, pb.as_str().to_owned(), lineno)?;
        let edge = if a < b {
            AssociationEdge::new(a, b, fsa, bsa)
        } else {
            AssociationEdge::new(b, a, bsa, fsa)
        };
        edges.push(edge);
    }
    let pos = tags
        .into_iter()
        .map(|(w, (t, _))| (w, t.parse::<Pos>().expect("canonical tag")))
        .collect();
    AssociationTable::new(edges, pos)
}

#[cfg(test)]
mod tests {
    use super::*;

    const NORMS: &str = "cue\tresponse\tn_response\tn_cue_presentations\tpos_cue\tpos_response\n\
                         outer\tspace\t49\t283\tN\tN\n\
                         Space\touter\t22\t296\tnoun\tAJ\n\
                         space\ttime\t5\t296\tN\tN\n";

    #[test]
    fn reads_norms_and_conflicts() {
        let err = read_norms(NORMS.as_bytes()).unwrap_err();
        // "outer" is N on line 2 and AJ on line 3.
        assert!(matches!(err, Error::ConflictingPos { line: 3, .. }), "{err}");

        let ok = NORMS.replace("noun\tAJ", "noun\tN");
        let f = read_norms(ok.as_bytes()).unwrap();
        assert_eq!(f.records.len(), 3);
        assert_eq!(f.records[1].cue, "space");
        assert_eq!(f.tags["outer"], "noun");
    }

    #[test]
    fn missing_column_is_named() {
        let src = "cue\tresponse\tn_response\tpos_cue\tpos_response\na\tb\t1\tN\tN\n";
        match read_norms(src.as_bytes()) {
            Err(Error::MissingColumn(c)) => assert_eq!(c, "n_cue_presentations"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_count_reports_line() {
        let src = "cue\tresponse\tn_response\tn_cue_presentations\tpos_cue\tpos_response\n\
                   a\tb\t1\t10\tN\tN\na\tc\tx\t10\tN\tN\n";
        assert!(matches!(
            read_norms(src.as_bytes()),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn synonyms_file() {
        let s = read_synonyms("word\tsynonyms\nHappy\tglad, Cheerful\nsad\t\n".as_bytes()).unwrap();
        assert_eq!(s["happy"], vec!["glad", "cheerful"]);
        assert!(s["sad"].is_empty());
    }

    #[test]
    fn table_round_trip() {
        let pos: BTreeMap<String, Pos> =
            [("a".to_string(), Pos::Noun), ("b".to_string(), Pos::Verb)].into();
        let t = AssociationTable::new(vec![AssociationEdge::new("a".into(), "b".into(), 0.17, 0.07)], pos)
            .unwrap();
        let mut buf = Vec::new();
        write_association_table(&t, &mut buf).unwrap();
        let back = read_association_table(buf.as_slice()).unwrap();
        assert_eq!(back, t);
    }
}
