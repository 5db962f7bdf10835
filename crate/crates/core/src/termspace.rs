//! Search terms as word sequences, and the relations and subsets between them.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use num_rational::Ratio;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::corpus::{tokenize, NormalizerConfig, Word};

/// Largest term size accepted; subset enumeration is `2^k - 1`.
pub const K_MAX: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("term {0:?} contains no words after normalization")]
    Empty(String),
    #[error("term has {k} words, more than the limit of {max}")]
    TooLarge { k: usize, max: usize },
}

/// An ordered, non-empty sequence of at most [`K_MAX`] words.
///
/// Word order and repeats matter for phrase matching; relations between
/// terms only look at the word set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    words: Vec<Word>,
}

impl Term {
    pub fn new(words: Vec<Word>) -> Result<Self, TermError> {
        if words.is_empty() {
            return Err(TermError::Empty(String::new()));
        }
        if words.len() > K_MAX {
            return Err(TermError::TooLarge {
                k: words.len(),
                max: K_MAX,
            });
        }
        Ok(Term { words })
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    /// Number of words, `k`.
    pub fn k(&self) -> usize {
        self.words.len()
    }

    /// Distinct words, duplicates collapsed.
    pub fn word_set(&self) -> BTreeSet<&str> {
        self.words.iter().map(Word::as_str).collect()
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.words.iter().format(" "))
    }
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

pub fn parse_term(text: &str, config: &NormalizerConfig) -> Result<Term, TermError> {
    let words = tokenize(text, config);
    if words.is_empty() {
        return Err(TermError::Empty(text.to_owned()));
    }
    Term::new(words)
}

/// All `2^k - 1` non-empty sub-terms, each keeping the original word order.
///
/// Ordered by size, then lexicographically by the chosen word positions.
pub fn enumerate_subsets(term: &Term) -> Result<Vec<Term>, TermError> {
    let k = term.k();
    if k > K_MAX {
        return Err(TermError::TooLarge { k, max: K_MAX });
    }
    let mut subsets = Vec::with_capacity((1usize << k) - 1);
    for size in 1..=k {
        for picks in (0..k).combinations(size) {
            subsets.push(Term {
                words: picks.into_iter().map(|i| term.words[i].clone()).collect(),
            });
        }
    }
    Ok(subsets)
}

/// Uniform mass `1 / (2^k - 1)` over the non-empty subsets of a term.
pub fn subset_probability(term: &Term) -> Ratio<u64> {
    Ratio::new(1, (1u64 << term.k()) - 1)
}

/// Relation between two sets, read left-to-right.
///
/// `Subset` and `Superset` are strict. When both sets are empty they are
/// `Equal`; an empty set against a non-empty one is `Disjoint`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Relation {
    Equal,
    Subset,
    Superset,
    Overlap,
    Disjoint,
}

impl Relation {
    /// Classifies two sets given their sizes and the size of their intersection.
    pub fn from_counts(left: usize, right: usize, intersect: usize) -> Self {
        if intersect == left && intersect == right {
            Relation::Equal
        } else if intersect == 0 {
            Relation::Disjoint
        } else if intersect == left {
            Relation::Subset
        } else if intersect == right {
            Relation::Superset
        } else {
            Relation::Overlap
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Relation::Subset => Relation::Superset,
            Relation::Superset => Relation::Subset,
            other => other,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Relation::Equal => "EQUAL",
            Relation::Subset => "SUBSET",
            Relation::Superset => "SUPERSET",
            Relation::Overlap => "OVERLAP",
            Relation::Disjoint => "DISJOINT",
        };
        f.write_str(name)
    }
}

/// Compares the word sets of two terms.
pub fn term_relation(a: &Term, b: &Term) -> Relation {
    let left = a.word_set();
    let right = b.word_set();
    let intersect = left.intersection(&right).count();
    Relation::from_counts(left.len(), right.len(), intersect)
}
