//! Corpus data model: comments, proposition spans, directed support links.
//!
//! A [`Comment`] is one forum post whose argumentative spans are
//! pre-annotated. Each [`Proposition`] is a character span with one of five
//! type labels; [`Link`]s are directed premise-to-conclusion edges between
//! propositions of the same comment. The structure is a general directed
//! graph, not a tree.

mod cdcp;
mod jsonl;

pub use cdcp::load_corpus;
pub use jsonl::{read_jsonl, write_jsonl};

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The five proposition types, in fixed tie-breaking order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropLabel {
    Value,
    Policy,
    Reference,
    Fact,
    Testimony,
}

impl PropLabel {
    pub const ALL: [PropLabel; 5] = [
        PropLabel::Value,
        PropLabel::Policy,
        PropLabel::Reference,
        PropLabel::Fact,
        PropLabel::Testimony,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<PropLabel> {
        PropLabel::ALL.get(i).copied()
    }

    pub fn parse(s: &str) -> Option<PropLabel> {
        match s.to_ascii_lowercase().as_str() {
            "value" => Some(PropLabel::Value),
            "policy" => Some(PropLabel::Policy),
            "reference" => Some(PropLabel::Reference),
            "fact" => Some(PropLabel::Fact),
            "testimony" => Some(PropLabel::Testimony),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PropLabel::Value => "value",
            PropLabel::Policy => "policy",
            PropLabel::Reference => "reference",
            PropLabel::Fact => "fact",
            PropLabel::Testimony => "testimony",
        }
    }
}

impl fmt::Display for PropLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which predefined portion of the corpus a comment belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn dir_name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

/// One annotated span: character offsets into the parent comment text,
/// the span text itself, and its type label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proposition {
    pub start: usize,
    pub end: usize,
    pub label: PropLabel,
    pub text: String,
}

/// Origin of a link in the raw annotations. Links are treated as untyped
/// by the models; the family is retained as metadata only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkFamily {
    Reason,
    Evidence,
}

/// A directed support edge: proposition `src` (the premise) supports
/// proposition `dst` (the conclusion). Indices refer to the parent
/// comment's proposition list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Link {
    pub src: usize,
    pub dst: usize,
}

impl Link {
    pub fn new(src: usize, dst: usize) -> Link {
        Link { src, dst }
    }
}

/// One forum comment with its annotated argument structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comment {
    pub id: String,
    pub text: String,
    pub propositions: Vec<Proposition>,
    pub links: BTreeSet<Link>,
    pub split: Split,
    /// Raw-annotation family per link, when known. Not used by the models.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub link_families: Vec<(Link, LinkFamily)>,
}

impl Comment {
    /// Checks every structural invariant; returns a validation error naming
    /// the first violation.
    pub fn validate(&self) -> Result<()> {
        let text_len = self.text.chars().count();
        let mut prev_end = 0usize;
        for (i, p) in self.propositions.iter().enumerate() {
            if p.start >= p.end || p.end > text_len {
                return Err(Error::validation(format!(
                    "comment '{}': proposition {} span [{}, {}) outside text of length {}",
                    self.id, i, p.start, p.end, text_len
                )));
            }
            if p.start < prev_end {
                return Err(Error::validation(format!(
                    "comment '{}': proposition {} overlaps or is out of order",
                    self.id, i
                )));
            }
            let span: String = self
                .text
                .chars()
                .skip(p.start)
                .take(p.end - p.start)
                .collect();
            if span != p.text {
                return Err(Error::validation(format!(
                    "comment '{}': proposition {} text does not match span [{}, {})",
                    self.id, i, p.start, p.end
                )));
            }
            prev_end = p.end;
        }
        let m = self.propositions.len();
        for l in &self.links {
            if l.src == l.dst {
                return Err(Error::validation(format!(
                    "comment '{}': self-link at proposition {}",
                    self.id, l.src
                )));
            }
            if l.src >= m || l.dst >= m {
                return Err(Error::validation(format!(
                    "comment '{}': link ({}, {}) references missing proposition (m = {})",
                    self.id, l.src, l.dst, m
                )));
            }
        }
        Ok(())
    }
}

/// All ordered proposition pairs of a comment, excluding self-pairs.
///
/// Order is row-major over the score matrix: for each conclusion index
/// `dst`, every premise index `src != dst` in ascending order.
pub fn candidate_pairs(comment: &Comment) -> Vec<(usize, usize)> {
    let m = comment.propositions.len();
    let mut pairs = Vec::with_capacity(m.saturating_sub(1) * m);
    for dst in 0..m {
        for src in 0..m {
            if src != dst {
                pairs.push((src, dst));
            }
        }
    }
    pairs
}

/// A loaded corpus: a flat list of comments with unique ids.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub comments: Vec<Comment>,
}

impl Corpus {
    pub fn new(comments: Vec<Comment>) -> Result<Corpus> {
        let corpus = Corpus { comments };
        corpus.validate()?;
        Ok(corpus)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for c in &self.comments {
            if !seen.insert(&c.id) {
                return Err(Error::validation(format!("duplicate comment id '{}'", c.id)));
            }
            c.validate()?;
        }
        Ok(())
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &Comment> {
        self.comments.iter().filter(move |c| c.split == split)
    }

    /// Propositions of one split in corpus order, with their comment.
    pub fn propositions(&self, split: Split) -> Vec<(&Comment, usize, &Proposition)> {
        self.split(split)
            .flat_map(|c| c.propositions.iter().enumerate().map(move |(i, p)| (c, i, p)))
            .collect()
    }

    pub fn merged(mut self, other: Corpus) -> Result<Corpus> {
        self.comments.extend(other.comments);
        self.validate()?;
        Ok(self)
    }
}

/// Aggregate corpus statistics in the shape of the published split table.
#[derive(Debug, Clone, Serialize)]
pub struct StatsReport {
    pub comments: usize,
    pub propositions: usize,
    pub label_counts: Vec<(PropLabel, usize)>,
    pub label_fractions: Vec<(PropLabel, f64)>,
    pub links: usize,
    pub candidate_pairs: usize,
    /// links / ordered candidate pairs; 0 when there are no pairs.
    pub link_rate: f64,
}

/// Counts propositions, per-label totals and fractions, links, and the
/// link rate over ordered candidate pairs.
pub fn corpus_stats(corpus: &Corpus) -> StatsReport {
    let mut label_counts = vec![0usize; PropLabel::ALL.len()];
    let mut propositions = 0usize;
    let mut links = 0usize;
    let mut pairs = 0usize;
    for c in &corpus.comments {
        propositions += c.propositions.len();
        for p in &c.propositions {
            label_counts[p.label.index()] += 1;
        }
        links += c.links.len();
        let m = c.propositions.len();
        pairs += m * m.saturating_sub(1);
    }
    let link_rate = if pairs == 0 { 0.0 } else { links as f64 / pairs as f64 };
    StatsReport {
        comments: corpus.comments.len(),
        propositions,
        label_counts: PropLabel::ALL
            .iter()
            .map(|&l| (l, label_counts[l.index()]))
            .collect(),
        label_fractions: PropLabel::ALL
            .iter()
            .map(|&l| {
                let f = if propositions == 0 {
                    0.0
                } else {
                    label_counts[l.index()] as f64 / propositions as f64
                };
                (l, f)
            })
            .collect(),
        links,
        candidate_pairs: pairs,
        link_rate,
    }
}

impl StatsReport {
    pub fn render(&self, title: &str) -> String {
        let mut out = String::new();
        out.push_str(&format!("{title}\n"));
        out.push_str(&format!(
            "  comments      {:>6}\n  propositions  {:>6}\n",
            self.comments, self.propositions
        ));
        for ((label, n), (_, f)) in self.label_counts.iter().zip(&self.label_fractions) {
            out.push_str(&format!(
                "  {:<12}  {:>6}  ({:>5.1}%)\n",
                label.as_str().to_uppercase(),
                n,
                f * 100.0
            ));
        }
        out.push_str(&format!(
            "  links         {:>6}  over {} ordered pairs (link rate {:.4})\n",
            self.links, self.candidate_pairs, self.link_rate
        ));
        out
    }
}
