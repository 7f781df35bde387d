//! Normalized corpus format: one JSON record per comment, newline-delimited.
//!
//! ```json
//! {"id": "00195", "text": "...", "propositions": [{"start": 0, "end": 18,
//!  "label": "value"}], "links": [{"src": 1, "dst": 0}], "split": "train"}
//! ```
//!
//! `src` is the premise index, `dst` the conclusion index. Proposition text
//! is reconstructed from the offsets on read, so records stay compact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{Comment, Corpus, Link, PropLabel, Proposition, Split};

#[derive(Serialize, Deserialize)]
struct Record {
    id: String,
    text: String,
    propositions: Vec<RecordProp>,
    links: Vec<Link>,
    split: Split,
}

#[derive(Serialize, Deserialize)]
struct RecordProp {
    start: usize,
    end: usize,
    label: PropLabel,
}

pub fn write_jsonl(corpus: &Corpus, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for c in &corpus.comments {
        let record = Record {
            id: c.id.clone(),
            text: c.text.clone(),
            propositions: c
                .propositions
                .iter()
                .map(|p| RecordProp {
                    start: p.start,
                    end: p.end,
                    label: p.label,
                })
                .collect(),
            links: c.links.iter().copied().collect(),
            split: c.split,
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_jsonl(path: &Path) -> Result<Corpus> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut comments = Vec::new();
    for (line_no, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(&line).map_err(|e| {
            Error::validation(format!("{}:{}: bad corpus record: {e}", path.display(), line_no + 1))
        })?;
        let chars: Vec<char> = record.text.chars().collect();
        let mut propositions = Vec::with_capacity(record.propositions.len());
        for p in &record.propositions {
            if p.start >= p.end || p.end > chars.len() {
                return Err(Error::validation(format!(
                    "comment '{}': span [{}, {}) outside text of length {}",
                    record.id,
                    p.start,
                    p.end,
                    chars.len()
                )));
            }
            propositions.push(Proposition {
                start: p.start,
                end: p.end,
                label: p.label,
                text: chars[p.start..p.end].iter().collect(),
            });
        }
        let comment = Comment {
            id: record.id,
            text: record.text,
            propositions,
            links: record.links.into_iter().collect(),
            split: record.split,
            link_families: Vec::new(),
        };
        comment.validate()?;
        comments.push(comment);
    }
    Corpus::new(comments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    use crate::corpus::candidate_pairs;

    fn arb_comment(id: usize) -> impl Strategy<Value = Comment> {
        (1usize..8).prop_flat_map(move |m| {
            let links = proptest::collection::btree_set((0..m, 0..m), 0..=m.min(4));
            (Just(m), links).prop_map(move |(m, raw)| {
                let mut c = crate::corpus::tests::comment(&format!("c{id}"), m, &[]);
                c.links = raw
                    .into_iter()
                    .filter(|(s, d)| s != d)
                    .map(|(s, d)| Link::new(s, d))
                    .collect();
                c
            })
        })
    }

    proptest! {
        #[test]
        fn round_trip_is_structurally_identical(
            comments in proptest::collection::vec(arb_comment(0), 0..6)
        ) {
            let comments: Vec<Comment> = comments
                .into_iter()
                .enumerate()
                .map(|(i, mut c)| { c.id = format!("c{i}"); c })
                .collect();
            let corpus = Corpus::new(comments).unwrap();
            let tmp = tempfile::NamedTempFile::new().unwrap();
            write_jsonl(&corpus, tmp.path()).unwrap();
            let loaded = read_jsonl(tmp.path()).unwrap();
            prop_assert_eq!(&corpus, &loaded);
        }

        #[test]
        fn candidate_pairs_count_and_gold_membership(c in arb_comment(0)) {
            let m = c.propositions.len();
            let pairs = candidate_pairs(&c);
            prop_assert_eq!(pairs.len(), m * (m - 1));
            for l in &c.links {
                prop_assert!(pairs.contains(&(l.src, l.dst)));
            }
        }
    }

    #[test]
    fn read_rejects_bad_span() {
        let tmp = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(
            tmp.path(),
            r#"{"id":"x","text":"hi","propositions":[{"start":0,"end":99,"label":"fact"}],"links":[],"split":"train"}"#,
        )
        .unwrap();
        assert!(read_jsonl(tmp.path()).is_err());
    }
}
