//! Test-only fixtures and a naive full-scan oracle.
//!
//! The oracle reads document token sequences directly and never touches the
//! inverted index, so it is independent of the evaluation path it checks.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sse_core::corpus::{generate_synthetic, SyntheticSpec, TermGroup};
use sse_core::{Corpus, MatchMode, NormalizerConfig, Term, Word};

pub const NATURAL_WORDS: &[&str] = &[
    "the", "of", "and", "to", "in", "is", "for", "on", "that", "by", "this", "with", "you", "it",
    "not", "or", "be", "are", "from", "at", "as", "your", "all", "have", "new", "more", "an",
    "was", "we", "will", "home", "can", "us", "about", "if", "page", "my", "has", "search",
    "free", "but", "our", "one", "other", "do", "no", "information", "time", "they", "site",
    "he", "up", "may", "what", "which", "their", "news", "out", "use", "any", "there", "see",
    "only", "so", "his", "when", "contact", "here", "business", "who", "web", "also", "now",
    "help", "get", "view", "online", "first", "been", "would", "how", "were", "me", "services",
    "some", "these", "click", "its", "like", "service", "than", "find", "price", "date", "back",
    "top", "people", "had", "list", "name", "just", "over", "state", "year", "day", "into",
    "email", "two", "health", "world", "next", "used", "go", "work", "last", "most", "products",
    "music", "buy", "data", "make", "them", "should", "product", "system", "post", "her", "city",
    "social", "network", "university", "research", "engine", "query", "term", "event",
];

/// Zipf-like text over [`NATURAL_WORDS`]: word `r` is drawn with weight `1 / (r + 1)`.
pub fn natural_texts(seed: u64, docs: usize, vocab: usize, max_len: usize) -> Vec<String> {
    let vocab = vocab.min(NATURAL_WORDS.len());
    let weights: Vec<f64> = (0..vocab).map(|r| 1.0 / (r as f64 + 1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..docs)
        .map(|_| {
            let len = rng.random_range(0..=max_len);
            (0..len)
                .map(|_| {
                    let mut x = rng.random::<f64>() * total;
                    let mut pick = vocab - 1;
                    for (i, w) in weights.iter().enumerate() {
                        if x < *w {
                            pick = i;
                            break;
                        }
                        x -= w;
                    }
                    NATURAL_WORDS[pick]
                })
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}

pub fn natural_corpus(seed: u64, docs: usize, vocab: usize, max_len: usize) -> Corpus {
    Corpus::from_texts(NormalizerConfig::default(), natural_texts(seed, docs, vocab, max_len))
}

pub fn synthetic_spec(terms: &[&str], docs: u64, noise: f64) -> SyntheticSpec {
    SyntheticSpec {
        groups: terms
            .iter()
            .map(|t| TermGroup {
                term: t.to_string(),
                docs,
            })
            .collect(),
        noise,
    }
}

/// Synthetic documents followed by natural ones, in a single corpus.
pub fn mixed_corpus(seed: u64, synthetic_docs: u64, natural_docs: usize) -> Corpus {
    let groups = ["alpha beta", "gamma", "delta epsilon zeta", "eta", "theta iota"];
    let per_group = synthetic_docs / groups.len() as u64;
    let synthetic = generate_synthetic(seed, &synthetic_spec(&groups, per_group, 0.1)).unwrap();
    let mut corpus = Corpus::new(NormalizerConfig::default());
    for doc in synthetic.documents() {
        corpus.push(doc.source_uri.clone(), doc.raw_text.clone());
    }
    for text in natural_texts(seed ^ 0x5eed, natural_docs, NATURAL_WORDS.len(), 40) {
        corpus.push("natural", text);
    }
    corpus
}

pub fn term_of(words: &[&str]) -> Term {
    Term::new(words.iter().map(|w| Word::new(*w).unwrap()).collect()).unwrap()
}

/// Per-document token sequences and token sets, read straight from the corpus.
pub struct ScanOracle<'a> {
    docs: Vec<(u64, Vec<&'a str>, HashSet<&'a str>)>,
}

impl<'a> ScanOracle<'a> {
    pub fn new(corpus: &'a Corpus) -> Self {
        let docs = corpus
            .documents()
            .iter()
            .map(|doc| {
                let tokens: Vec<&str> = doc.tokens.iter().map(Word::as_str).collect();
                let present = tokens.iter().copied().collect();
                (doc.doc_id, tokens, present)
            })
            .collect();
        ScanOracle { docs }
    }

    /// Documents matching `term` under `mode`, by scanning every document.
    pub fn scan(&self, term: &Term, mode: MatchMode) -> Vec<u64> {
        let needle: Vec<&str> = term.words().iter().map(Word::as_str).collect();
        self.docs
            .iter()
            .filter(|(_, tokens, present)| match mode {
                MatchMode::ContainsAll => needle.iter().all(|w| present.contains(w)),
                MatchMode::Phrase => tokens.windows(needle.len()).any(|w| w == needle.as_slice()),
            })
            .map(|(id, _, _)| *id)
            .collect()
    }

    pub fn set(&self, term: &Term, mode: MatchMode) -> BTreeSet<u64> {
        self.scan(term, mode).into_iter().collect()
    }
}

pub fn oracle_scan(corpus: &Corpus, term: &Term, mode: MatchMode) -> Vec<u64> {
    ScanOracle::new(corpus).scan(term, mode)
}

pub fn oracle_set(corpus: &Corpus, term: &Term, mode: MatchMode) -> BTreeSet<u64> {
    ScanOracle::new(corpus).set(term, mode)
}

/// Random term of 1..=max_k words, either a window lifted from a document
/// (so phrase matches exist) or words drawn from the vocabulary.
pub fn random_term(rng: &mut impl Rng, corpus: &Corpus, vocab: &[String], max_k: usize) -> Term {
    let k = rng.random_range(1..=max_k);
    if rng.random_bool(0.5) {
        let docs: Vec<_> = corpus.documents().iter().filter(|d| d.tokens.len() >= k).collect();
        if let Some(doc) = docs.choose(rng) {
            let start = rng.random_range(0..=doc.tokens.len() - k);
            return Term::new(doc.tokens[start..start + k].to_vec()).unwrap();
        }
    }
    let words = (0..k)
        .map(|_| Word::new(vocab.choose(rng).unwrap().clone()).unwrap())
        .collect();
    Term::new(words).unwrap()
}

pub fn vocabulary(corpus: &Corpus) -> Vec<String> {
    let set: BTreeSet<&str> = corpus
        .documents()
        .iter()
        .flat_map(|d| d.tokens.iter().map(Word::as_str))
        .collect();
    let mut v: Vec<String> = set.into_iter().map(str::to_owned).collect();
    if v.is_empty() {
        v.push("missing".into());
    }
    v
}
