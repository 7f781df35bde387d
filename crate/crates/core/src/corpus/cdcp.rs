//! Adapter for the public CDCP release layout.
//!
//! Each comment is a pair of files named by a numeric id: `<id>.txt` with
//! the raw comment text and `<id>.ann.json` with the annotation record:
//!
//! ```json
//! {
//!   "prop_labels": ["value", "policy", ...],
//!   "prop_offsets": [[0, 48], [48, 110], ...],
//!   "reasons":   [[[1, 2], 0], ...],
//!   "evidences": [[[4, 4], 3], ...],
//!   "url": {}
//! }
//! ```
//!
//! Offsets are 0-based character indices, end exclusive. A link source
//! `[first, last]` is an inclusive index range: every proposition in the
//! range is a premise of the target. Reason and evidence families are
//! unioned into one untyped link set; the family is kept as metadata.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};

use super::{Comment, Corpus, Link, LinkFamily, PropLabel, Proposition, Split};

#[derive(Debug, Deserialize)]
struct RawAnnotation {
    prop_labels: Vec<String>,
    prop_offsets: Vec<(usize, usize)>,
    #[serde(default)]
    reasons: Vec<RawLink>,
    #[serde(default)]
    evidences: Vec<RawLink>,
}

/// `[[first, last], target]` with an inclusive source range.
#[derive(Debug, Deserialize)]
struct RawLink((usize, usize), usize);

/// Loads one split of a CDCP release directory.
///
/// `directory` may be the release root (containing `train/` and `test/`
/// subdirectories) or a split directory itself. A directory with no
/// comment files yields an empty corpus.
pub fn load_corpus(directory: &Path, split: Split) -> Result<Corpus> {
    let split_dir = resolve_split_dir(directory, split)?;
    let mut txt_files: Vec<PathBuf> = Vec::new();
    if split_dir.is_dir() {
        for entry in fs::read_dir(&split_dir).map_err(|e| Error::io(&split_dir, e))? {
            let entry = entry.map_err(|e| Error::io(&split_dir, e))?;
            let path = entry.path();
            if path.extension().is_some_and(|e| e == "txt") {
                txt_files.push(path);
            }
        }
    }
    txt_files.sort();

    let mut comments = txt_files
        .par_iter()
        .map(|txt| load_comment(txt, split))
        .collect::<Result<Vec<Comment>>>()?;
    comments.sort_by(|a, b| a.id.cmp(&b.id));
    Corpus::new(comments)
}

fn resolve_split_dir(directory: &Path, split: Split) -> Result<PathBuf> {
    if !directory.exists() {
        return Err(Error::io(
            directory,
            std::io::Error::new(std::io::ErrorKind::NotFound, "corpus directory not found"),
        ));
    }
    let sub = directory.join(split.dir_name());
    if sub.is_dir() {
        Ok(sub)
    } else {
        Ok(directory.to_path_buf())
    }
}

fn load_comment(txt_path: &Path, split: Split) -> Result<Comment> {
    let id = txt_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default()
        .to_string();
    let text = fs::read_to_string(txt_path).map_err(|e| Error::io(txt_path, e))?;

    let ann_path = annotation_path(txt_path)
        .ok_or_else(|| Error::parse(&id, "missing .ann.json annotation record"))?;
    let raw = fs::read_to_string(&ann_path).map_err(|e| Error::io(&ann_path, e))?;
    let ann: RawAnnotation = serde_json::from_str(&raw)
        .map_err(|e| Error::parse(&id, format!("malformed annotation record: {e}")))?;

    if ann.prop_labels.len() != ann.prop_offsets.len() {
        return Err(Error::parse(
            &id,
            format!(
                "{} labels for {} offsets",
                ann.prop_labels.len(),
                ann.prop_offsets.len()
            ),
        ));
    }

    let chars: Vec<char> = text.chars().collect();
    let mut propositions = Vec::with_capacity(ann.prop_offsets.len());
    for (i, (&(start, end), label)) in ann.prop_offsets.iter().zip(&ann.prop_labels).enumerate() {
        let label = PropLabel::parse(label)
            .ok_or_else(|| Error::parse(&id, format!("unknown label '{label}'")))?;
        if start >= end || end > chars.len() {
            return Err(Error::validation(format!(
                "comment '{id}': proposition {i} span [{start}, {end}) outside text of length {}",
                chars.len()
            )));
        }
        propositions.push(Proposition {
            start,
            end,
            label,
            text: chars[start..end].iter().collect(),
        });
    }

    let m = propositions.len();
    let mut links = BTreeSet::new();
    let mut link_families = Vec::new();
    for (family, raw_links) in [
        (LinkFamily::Reason, &ann.reasons),
        (LinkFamily::Evidence, &ann.evidences),
    ] {
        for RawLink((first, last), target) in raw_links {
            if *first > *last || *last >= m || *target >= m {
                return Err(Error::parse(
                    &id,
                    format!("link source range [{first}, {last}] -> {target} out of bounds (m = {m})"),
                ));
            }
            for src in *first..=*last {
                if src == *target {
                    warn!("comment '{id}': skipping self-link at proposition {src}");
                    continue;
                }
                let link = Link::new(src, *target);
                if links.insert(link) {
                    link_families.push((link, family));
                }
            }
        }
    }

    let comment = Comment {
        id,
        text,
        propositions,
        links,
        split,
        link_families,
    };
    comment.validate()?;
    Ok(comment)
}

fn annotation_path(txt_path: &Path) -> Option<PathBuf> {
    let with_ext = txt_path.with_extension("ann.json");
    if with_ext.exists() {
        return Some(with_ext);
    }
    let plain = txt_path.with_extension("json");
    plain.exists().then_some(plain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write_comment(dir: &Path, id: &str, text: &str, ann: &str) {
        fs::write(dir.join(format!("{id}.txt")), text).unwrap();
        fs::write(dir.join(format!("{id}.ann.json")), ann).unwrap();
    }

    #[test]
    fn loads_release_layout_and_expands_ranges() {
        let tmp = tempfile::tempdir().unwrap();
        let train = tmp.path().join("train");
        fs::create_dir(&train).unwrap();
        write_comment(
            &train,
            "00001",
            "Fees are too high. Cap them now. I have seen this happen.",
            r#"{"prop_labels": ["value", "policy", "testimony"],
                "prop_offsets": [[0, 18], [19, 32], [33, 57]],
                "reasons": [[[0, 0], 1]],
                "evidences": [[[2, 2], 1]],
                "url": {}}"#,
        );
        write_comment(
            &train,
            "00002",
            "abc def ghi jkl",
            r#"{"prop_labels": ["fact", "fact", "value", "reference"],
                "prop_offsets": [[0, 3], [4, 7], [8, 11], [12, 15]],
                "reasons": [[[0, 1], 2]],
                "evidences": []}"#,
        );
        let corpus = load_corpus(tmp.path(), Split::Train).unwrap();
        assert_eq!(corpus.comments.len(), 2);
        let c1 = &corpus.comments[0];
        assert_eq!(c1.id, "00001");
        assert_eq!(c1.propositions[0].text, "Fees are too high.");
        assert!(c1.links.contains(&Link::new(0, 1)));
        assert!(c1.links.contains(&Link::new(2, 1)));
        // range [0, 1] -> 2 expands to two links
        let c2 = &corpus.comments[1];
        assert_eq!(c2.links.len(), 2);
        assert!(c2.links.contains(&Link::new(0, 2)));
        assert!(c2.links.contains(&Link::new(1, 2)));
    }

    #[test]
    fn empty_directory_yields_empty_corpus() {
        let tmp = tempfile::tempdir().unwrap();
        let corpus = load_corpus(tmp.path(), Split::Test).unwrap();
        assert!(corpus.comments.is_empty());
    }

    #[test]
    fn malformed_record_names_the_comment() {
        let tmp = tempfile::tempdir().unwrap();
        write_comment(tmp.path(), "00009", "some text", "{not json");
        let err = load_corpus(tmp.path(), Split::Train).unwrap_err();
        assert!(err.to_string().contains("00009"), "{err}");
    }

    #[test]
    fn span_outside_bounds_is_a_validation_error() {
        let tmp = tempfile::tempdir().unwrap();
        write_comment(
            tmp.path(),
            "00010",
            "short",
            r#"{"prop_labels": ["fact"], "prop_offsets": [[0, 50]], "reasons": [], "evidences": []}"#,
        );
        let err = load_corpus(tmp.path(), Split::Train).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn duplicate_links_across_families_are_unioned() {
        let tmp = tempfile::tempdir().unwrap();
        write_comment(
            tmp.path(),
            "00011",
            "aa bb",
            r#"{"prop_labels": ["fact", "value"], "prop_offsets": [[0, 2], [3, 5]],
                "reasons": [[[0, 0], 1]], "evidences": [[[0, 0], 1]]}"#,
        );
        let corpus = load_corpus(tmp.path(), Split::Train).unwrap();
        assert_eq!(corpus.comments[0].links.len(), 1);
    }
}
