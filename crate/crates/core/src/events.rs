//! Singleton event spaces: the documents in which a term occurs.
//!
//! A term can occur in a document in two ways. Under
//! [`MatchMode::ContainsAll`] every word of the term appears somewhere in
//! the document; under [`MatchMode::Phrase`] the words appear contiguously
//! and in order. The phrase space is always contained in the conjunctive one.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::Serialize;
use thiserror::Error;

use crate::index::{InvertedIndex, PostingList};
use crate::termspace::Term;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EventError {
    #[error("probability is undefined over an empty universe")]
    EmptyUniverse,
    #[error("event spaces come from different universes ({left} vs {right} documents)")]
    UniverseMismatch { left: u64, right: u64 },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MatchMode {
    #[default]
    ContainsAll,
    Phrase,
}

impl fmt::Display for MatchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatchMode::ContainsAll => "CONTAINS_ALL",
            MatchMode::Phrase => "PHRASE",
        })
    }
}

impl FromStr for MatchMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "contains" | "contains_all" => Ok(MatchMode::ContainsAll),
            "phrase" => Ok(MatchMode::Phrase),
            other => Err(format!("unknown match mode {other:?} (expected contains|phrase)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub term: Term,
    pub mode: MatchMode,
}

impl Query {
    pub fn new(term: Term, mode: MatchMode) -> Self {
        Query { term, mode }
    }
}

/// What an event space was computed from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Descriptor {
    Term { term: Term, mode: MatchMode },
    /// Result of a set operation; unions of terms are not terms.
    Composite(String),
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Descriptor::Term { term, mode } => write!(f, "\"{term}\"/{mode}"),
            Descriptor::Composite(text) => f.write_str(text),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventSpace {
    descriptor: Descriptor,
    doc_ids: Vec<u64>,
    universe_size: u64,
}

impl EventSpace {
    /// Builds an event space from raw parts. `doc_ids` must be strictly
    /// ascending and below `universe_size`.
    pub fn from_parts(descriptor: Descriptor, doc_ids: Vec<u64>, universe_size: u64) -> Self {
        assert!(
            doc_ids.windows(2).all(|w| w[0] < w[1]),
            "doc ids must be strictly ascending"
        );
        assert!(
            doc_ids.last().is_none_or(|&d| d < universe_size),
            "doc id outside the universe"
        );
        EventSpace {
            descriptor,
            doc_ids,
            universe_size,
        }
    }

    pub fn descriptor(&self) -> &Descriptor {
        &self.descriptor
    }

    pub fn doc_ids(&self) -> &[u64] {
        &self.doc_ids
    }

    pub fn universe_size(&self) -> u64 {
        self.universe_size
    }

    /// |Ω_x|.
    pub fn cardinality(&self) -> u64 {
        self.doc_ids.len() as u64
    }

    /// |Ω_x| / |Ω| as an exact ratio.
    pub fn probability(&self) -> Result<Ratio<u64>, EventError> {
        if self.universe_size == 0 {
            return Err(EventError::EmptyUniverse);
        }
        Ok(Ratio::new(self.cardinality(), self.universe_size))
    }

    pub fn is_subset_of(&self, other: &EventSpace) -> bool {
        let mut theirs = other.doc_ids.iter().peekable();
        self.doc_ids.iter().all(|d| {
            while theirs.next_if(|&&o| o < *d).is_some() {}
            theirs.next_if_eq(&d).is_some()
        })
    }

    /// JSON view; doc ids are included (up to `id_limit`) only when requested.
    pub fn report(&self, show_ids: bool, id_limit: usize) -> EventReport {
        let (term, mode) = match &self.descriptor {
            Descriptor::Term { term, mode } => (term.to_string(), Some(*mode)),
            Descriptor::Composite(text) => (text.clone(), None),
        };
        let probability = self.probability().ok();
        EventReport {
            term,
            mode,
            universe_size: self.universe_size,
            cardinality: self.cardinality(),
            doc_ids: show_ids.then(|| self.doc_ids.iter().copied().take(id_limit).collect()),
            doc_ids_truncated: show_ids.then_some(self.doc_ids.len() > id_limit),
            probability: probability.map(ratio_to_f64),
            probability_exact: probability.map(|p| p.to_string()),
        }
    }
}

pub fn ratio_to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventReport {
    pub term: String,
    pub mode: Option<MatchMode>,
    pub universe_size: u64,
    pub cardinality: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub doc_ids: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub doc_ids_truncated: Option<bool>,
    pub probability: Option<f64>,
    pub probability_exact: Option<String>,
}

/// Computes Ω_x for a query.
pub fn evaluate(index: &InvertedIndex, query: &Query) -> EventSpace {
    let words = query.term.words();
    let lists: Vec<&PostingList> = words
        .iter()
        .map(|w| index.postings_lookup(w.as_str()))
        .collect();

    let mut by_df: Vec<&PostingList> = lists.clone();
    by_df.sort_by_key(|l| (l.df(), *l as *const PostingList as usize));
    by_df.dedup_by(|a, b| std::ptr::eq(*a, *b));
    let mut candidates: Vec<u64> = by_df[0].doc_ids().collect();
    for list in &by_df[1..] {
        if candidates.is_empty() {
            break;
        }
        candidates = intersect_sorted(&candidates, list.doc_ids());
    }

    if query.mode == MatchMode::Phrase && words.len() > 1 {
        candidates.retain(|&doc| {
            let positions: Vec<&[u32]> = lists
                .iter()
                .map(|l| l.positions_in(doc).expect("candidate contains every word"))
                .collect();
            has_phrase(&positions)
        });
    }

    EventSpace {
        descriptor: Descriptor::Term {
            term: query.term.clone(),
            mode: query.mode,
        },
        doc_ids: candidates,
        universe_size: index.doc_count(),
    }
}

/// True when some start `p` has word `i` at `p + i` for every `i`.
fn has_phrase(positions: &[&[u32]]) -> bool {
    positions[0].iter().any(|&start| {
        positions[1..].iter().enumerate().all(|(offset, list)| {
            start
                .checked_add(offset as u32 + 1)
                .is_some_and(|want| list.binary_search(&want).is_ok())
        })
    })
}

fn intersect_sorted(left: &[u64], right: impl Iterator<Item = u64>) -> Vec<u64> {
    let mut out = Vec::new();
    let mut right = right.peekable();
    for &d in left {
        while right.next_if(|&r| r < d).is_some() {}
        if right.next_if_eq(&d).is_some() {
            out.push(d);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetOp {
    Union,
    Intersect,
    Difference,
}

impl SetOp {
    fn symbol(self) -> &'static str {
        match self {
            SetOp::Union => "|",
            SetOp::Intersect => "&",
            SetOp::Difference => "-",
        }
    }
}

/// Set operation over two event spaces of the same universe.
pub fn combine(op: SetOp, a: &EventSpace, b: &EventSpace) -> Result<EventSpace, EventError> {
    if a.universe_size != b.universe_size {
        return Err(EventError::UniverseMismatch {
            left: a.universe_size,
            right: b.universe_size,
        });
    }
    let (x, y) = (&a.doc_ids, &b.doc_ids);
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < x.len() && j < y.len() {
        match x[i].cmp(&y[j]) {
            std::cmp::Ordering::Less => {
                if op != SetOp::Intersect {
                    out.push(x[i]);
                }
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                if op == SetOp::Union {
                    out.push(y[j]);
                }
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                if op != SetOp::Difference {
                    out.push(x[i]);
                }
                i += 1;
                j += 1;
            }
        }
    }
    if op != SetOp::Intersect {
        out.extend_from_slice(&x[i..]);
    }
    if op == SetOp::Union {
        out.extend_from_slice(&y[j..]);
    }
    Ok(EventSpace {
        descriptor: Descriptor::Composite(format!(
            "({} {} {})",
            a.descriptor,
            op.symbol(),
            b.descriptor
        )),
        doc_ids: out,
        universe_size: a.universe_size,
    })
}
