//! Document ingestion and text normalization.
//!
//! A [`Corpus`] is the universe of documents every event space is measured
//! against. Documents are flat token sequences; doc ids are assigned in
//! ingestion order starting at 0.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::io::{self, BufRead, BufReader};
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_segmentation::UnicodeSegmentation;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("malformed corpus file {path}: {reason}")]
    Format { path: String, reason: String },
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
}

/// A single normalized token. Never empty, never contains whitespace.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(String);

impl Word {
    /// Wraps an already-normalized token, rejecting empty or whitespace-bearing text.
    pub fn new(text: impl Into<String>) -> Option<Self> {
        let text = text.into();
        if text.is_empty() || text.chars().any(char::is_whitespace) {
            None
        } else {
            Some(Word(text))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::borrow::Borrow<str> for Word {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// How raw text is cut into candidate tokens before normalization.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenRule {
    /// Unicode (UAX #29) word boundaries.
    #[default]
    Unicode,
    /// Runs of non-whitespace characters.
    Whitespace,
}

impl TokenRule {
    pub fn id(self) -> u8 {
        match self {
            TokenRule::Unicode => 0,
            TokenRule::Whitespace => 1,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            0 => Some(TokenRule::Unicode),
            1 => Some(TokenRule::Whitespace),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NormalizerConfig {
    pub lowercase: bool,
    pub strip_punctuation: bool,
    pub token_rule: TokenRule,
}

impl Default for NormalizerConfig {
    fn default() -> Self {
        NormalizerConfig {
            lowercase: true,
            strip_punctuation: true,
            token_rule: TokenRule::Unicode,
        }
    }
}

/// Splits and normalizes `text` into words.
///
/// Segments first, then lowercases, then (optionally) drops every character
/// that is not alphanumeric. Segments that end up empty are discarded.
pub fn tokenize(text: &str, config: &NormalizerConfig) -> Vec<Word> {
    let segments: Box<dyn Iterator<Item = &str>> = match config.token_rule {
        TokenRule::Unicode => Box::new(text.unicode_words()),
        TokenRule::Whitespace => Box::new(text.split_whitespace()),
    };
    segments
        .filter_map(|segment| {
            let mut token = if config.lowercase {
                segment.to_lowercase()
            } else {
                segment.to_owned()
            };
            if config.strip_punctuation {
                token.retain(char::is_alphanumeric);
            }
            Word::new(token)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: u64,
    pub source_uri: String,
    pub raw_text: String,
    #[serde(skip)]
    pub tokens: Vec<Word>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    documents: Vec<Document>,
    normalizer: NormalizerConfig,
}

impl Corpus {
    pub fn new(normalizer: NormalizerConfig) -> Self {
        Corpus {
            documents: Vec::new(),
            normalizer,
        }
    }

    /// Appends a document, assigning the next doc id.
    pub fn push(&mut self, source_uri: impl Into<String>, raw_text: impl Into<String>) -> u64 {
        let doc_id = self.documents.len() as u64;
        let raw_text = raw_text.into();
        let tokens = tokenize(&raw_text, &self.normalizer);
        self.documents.push(Document {
            doc_id,
            source_uri: source_uri.into(),
            raw_text,
            tokens,
        });
        doc_id
    }

    /// Builds a corpus from plain texts, one document each.
    pub fn from_texts<I, S>(normalizer: NormalizerConfig, texts: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut corpus = Corpus::new(normalizer);
        for (i, text) in texts.into_iter().enumerate() {
            corpus.push(format!("doc:{i}"), text);
        }
        corpus
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn normalizer(&self) -> &NormalizerConfig {
        &self.normalizer
    }

    /// |Ω|.
    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Serializes to the corpus JSON file format.
    ///
    /// Tokens are not stored; they are recomputed from `raw_text` on load.
    pub fn to_json(&self) -> String {
        let file = CorpusFileRef {
            format: CORPUS_FORMAT,
            version: CORPUS_VERSION,
            normalizer: &self.normalizer,
            documents: &self.documents,
        };
        serde_json::to_string_pretty(&file).expect("corpus serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let file: CorpusFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if file.format != CORPUS_FORMAT {
            return Err(format!("unexpected format tag {:?}", file.format));
        }
        if file.version != CORPUS_VERSION {
            return Err(format!("unsupported corpus version {}", file.version));
        }
        let mut corpus = Corpus::new(file.normalizer);
        for (i, doc) in file.documents.into_iter().enumerate() {
            if doc.doc_id != i as u64 {
                return Err(format!("doc_id {} out of order at position {i}", doc.doc_id));
            }
            corpus.push(doc.source_uri, doc.raw_text);
        }
        Ok(corpus)
    }

    pub fn save(&self, path: &Path) -> Result<(), CorpusError> {
        fs::write(path, self.to_json()).map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Corpus::from_json(&text).map_err(|reason| CorpusError::Format {
            path: path.display().to_string(),
            reason,
        })
    }
}

const CORPUS_FORMAT: &str = "sse-corpus";
const CORPUS_VERSION: u32 = 1;

#[derive(Serialize)]
struct CorpusFileRef<'a> {
    format: &'a str,
    version: u32,
    normalizer: &'a NormalizerConfig,
    documents: &'a [Document],
}

#[derive(Deserialize)]
struct CorpusFile {
    format: String,
    version: u32,
    normalizer: NormalizerConfig,
    documents: Vec<Document>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub doc_count: u64,
    pub total_tokens: u64,
    pub vocabulary_size: u64,
}

pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let mut vocabulary: HashSet<&str> = HashSet::new();
    let mut total_tokens = 0u64;
    for doc in corpus.documents() {
        total_tokens += doc.tokens.len() as u64;
        vocabulary.extend(doc.tokens.iter().map(Word::as_str));
    }
    CorpusStats {
        doc_count: corpus.len() as u64,
        total_tokens,
        vocabulary_size: vocabulary.len() as u64,
    }
}

/// A JSONL line that could not be turned into a document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MalformedRecord {
    /// 1-based line number.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub corpus: Corpus,
    pub malformed: Vec<MalformedRecord>,
}

#[derive(Deserialize)]
struct JsonlRecord {
    id: Option<String>,
    text: Option<String>,
}

/// Reads one document per JSONL line (`{"id": "...", "text": "..."}`).
///
/// Blank lines are skipped. Lines that fail to parse or lack `text` are
/// collected in [`Ingested::malformed`] and do not consume a doc id.
pub fn ingest_jsonl(path: &Path, config: NormalizerConfig) -> Result<Ingested, CorpusError> {
    let io_err = |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = fs::File::open(path).map_err(io_err)?;
    let reader = BufReader::new(file);
    let mut corpus = Corpus::new(config);
    let mut malformed = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err)?;
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<JsonlRecord>(&line) {
            Ok(JsonlRecord {
                id,
                text: Some(text),
            }) => {
                let uri = id.unwrap_or_else(|| format!("{}#{line_no}", path.display()));
                corpus.push(uri, text);
            }
            Ok(_) => malformed.push(MalformedRecord {
                line: line_no,
                reason: "missing required field `text`".into(),
            }),
            Err(e) => malformed.push(MalformedRecord {
                line: line_no,
                reason: e.to_string(),
            }),
        }
    }
    Ok(Ingested { corpus, malformed })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermGroup {
    pub term: String,
    pub docs: u64,
}

/// Recipe for a synthetic corpus: each group's term is planted in `docs`
/// documents of its own, padded with filler words that never collide with
/// any group term. `noise` is the per-document probability of also planting
/// another group's term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub groups: Vec<TermGroup>,
    #[serde(default)]
    pub noise: f64,
}

impl SyntheticSpec {
    pub fn from_json(text: &str) -> Result<Self, CorpusError> {
        serde_json::from_str(text).map_err(|e| CorpusError::InvalidSpec(e.to_string()))
    }
}

const FILLER_ONSETS: &[&str] = &[
    "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z",
];
const FILLER_NUCLEI: &[&str] = &["a", "e", "i", "o", "u"];
const FILLER_MIN: usize = 4;
const FILLER_MAX: usize = 16;

fn filler_vocabulary(excluded: &BTreeSet<&str>) -> Vec<String> {
    let mut words = Vec::new();
    for a in FILLER_ONSETS {
        for b in FILLER_NUCLEI {
            for c in FILLER_ONSETS {
                for d in FILLER_NUCLEI {
                    let word = format!("{a}{b}{c}{d}");
                    if !excluded.contains(word.as_str()) {
                        words.push(word);
                    }
                }
            }
        }
    }
    words
}

/// Generates a deterministic corpus for `(seed, spec)`.
///
/// With `noise == 0` the designated terms' conjunctive event spaces are
/// pairwise disjoint. Documents are shuffled, so group membership is not
/// recoverable from doc ids.
pub fn generate_synthetic(seed: u64, spec: &SyntheticSpec) -> Result<Corpus, CorpusError> {
    if spec.groups.is_empty() {
        return Err(CorpusError::InvalidSpec("at least one term group is required".into()));
    }
    if !(0.0..=1.0).contains(&spec.noise) {
        return Err(CorpusError::InvalidSpec(format!(
            "noise must be in [0, 1], got {}",
            spec.noise
        )));
    }
    let config = NormalizerConfig::default();
    let mut terms: Vec<Vec<Word>> = Vec::with_capacity(spec.groups.len());
    for group in &spec.groups {
        let words = tokenize(&group.term, &config);
        if words.is_empty() {
            return Err(CorpusError::InvalidSpec(format!(
                "group term {:?} has no words",
                group.term
            )));
        }
        terms.push(words);
    }
    let word_sets: Vec<BTreeSet<&str>> = terms
        .iter()
        .map(|t| t.iter().map(Word::as_str).collect())
        .collect();
    for (i, a) in word_sets.iter().enumerate() {
        for (j, b) in word_sets.iter().enumerate() {
            if i != j && a.is_subset(b) {
                return Err(CorpusError::InvalidSpec(format!(
                    "group term {:?} is contained in {:?}; their event spaces cannot be disjoint",
                    spec.groups[i].term, spec.groups[j].term
                )));
            }
        }
    }

    let excluded: BTreeSet<&str> = word_sets.iter().flatten().copied().collect();
    let filler = filler_vocabulary(&excluded);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut texts = Vec::new();
    for (g, group) in spec.groups.iter().enumerate() {
        for _ in 0..group.docs {
            let len = rng.random_range(FILLER_MIN..=FILLER_MAX);
            let mut words: Vec<&str> = (0..len)
                .map(|_| filler.choose(&mut rng).expect("filler is non-empty").as_str())
                .collect();
            plant(&mut words, &terms[g], &mut rng);
            if terms.len() > 1 && spec.noise > 0.0 && rng.random_bool(spec.noise) {
                let mut other = rng.random_range(0..terms.len() - 1);
                if other >= g {
                    other += 1;
                }
                plant(&mut words, &terms[other], &mut rng);
            }
            texts.push(words.join(" "));
        }
    }
    texts.shuffle(&mut rng);

    let mut corpus = Corpus::new(config);
    for (i, text) in texts.into_iter().enumerate() {
        corpus.push(format!("synthetic:{seed}:{i}"), text);
    }
    Ok(corpus)
}

fn plant<'a>(words: &mut Vec<&'a str>, term: &'a [Word], rng: &mut impl Rng) {
    let at = rng.random_range(0..=words.len());
    words.splice(at..at, term.iter().map(Word::as_str));
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn words(tokens: &[Word]) -> Vec<&str> {
        tokens.iter().map(Word::as_str).collect()
    }

    #[test]
    fn tokenize_examples() {
        let cfg = NormalizerConfig::default();
        assert_eq!(words(&tokenize("Social Network", &cfg)), ["social", "network"]);
        assert_eq!(
            words(&tokenize("Amara K. M. Okafor", &cfg)),
            ["amara", "k", "m", "okafor"]
        );
        assert!(tokenize("", &cfg).is_empty());
        assert!(tokenize("  !!! ... ", &cfg).is_empty());
    }

    #[test]
    fn tokenize_respects_config() {
        let keep = NormalizerConfig {
            lowercase: false,
            strip_punctuation: false,
            token_rule: TokenRule::Whitespace,
        };
        assert_eq!(words(&tokenize("Amara K. M.", &keep)), ["Amara", "K.", "M."]);
        let ws = NormalizerConfig {
            token_rule: TokenRule::Whitespace,
            ..NormalizerConfig::default()
        };
        assert_eq!(words(&tokenize("K. can't", &ws)), ["k", "cant"]);
    }

    #[test]
    fn word_rejects_whitespace() {
        assert!(Word::new("").is_none());
        assert!(Word::new("a b").is_none());
        assert!(Word::new("ab").is_some());
    }

    #[test]
    fn stats_examples() {
        let empty = Corpus::new(NormalizerConfig::default());
        assert_eq!(
            corpus_stats(&empty),
            CorpusStats {
                doc_count: 0,
                total_tokens: 0,
                vocabulary_size: 0
            }
        );
        let one = Corpus::from_texts(NormalizerConfig::default(), ["a b a"]);
        assert_eq!(
            corpus_stats(&one),
            CorpusStats {
                doc_count: 1,
                total_tokens: 3,
                vocabulary_size: 2
            }
        );
    }

    fn jsonl(lines: &[&str]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for line in lines {
            writeln!(f, "{line}").unwrap();
        }
        f
    }

    #[test]
    fn ingest_well_formed() {
        let f = jsonl(&[
            r#"{"id":"a","text":"one"}"#,
            r#"{"text":"two"}"#,
            r#"{"id":"c","text":"three"}"#,
        ]);
        let ingested = ingest_jsonl(f.path(), NormalizerConfig::default()).unwrap();
        let ids: Vec<u64> = ingested.corpus.documents().iter().map(|d| d.doc_id).collect();
        assert_eq!(ids, [0, 1, 2]);
        assert!(ingested.malformed.is_empty());
        assert_eq!(ingested.corpus.documents()[0].source_uri, "a");
    }

    #[test]
    fn ingest_empty_file() {
        let f = jsonl(&[]);
        let ingested = ingest_jsonl(f.path(), NormalizerConfig::default()).unwrap();
        assert_eq!(ingested.corpus.len(), 0);
    }

    #[test]
    fn ingest_collects_malformed() {
        let f = jsonl(&[
            r#"{"text":"a"}"#,
            r#"{"text":"b"}"#,
            r#"{"id":"no-text"}"#,
            r#"{"text":"c"}"#,
            r#"{"text":"d"}"#,
        ]);
        let ingested = ingest_jsonl(f.path(), NormalizerConfig::default()).unwrap();
        assert_eq!(ingested.corpus.len(), 4);
        assert_eq!(ingested.malformed.len(), 1);
        assert_eq!(ingested.malformed[0].line, 3);
        assert_eq!(ingested.corpus.documents()[2].raw_text, "c");
        assert_eq!(ingested.corpus.documents()[2].doc_id, 2);
    }

    #[test]
    fn ingest_missing_file_is_io_error() {
        let err = ingest_jsonl(Path::new("/nonexistent/x.jsonl"), NormalizerConfig::default())
            .unwrap_err();
        assert!(matches!(err, CorpusError::Io { .. }));
    }

    #[test]
    fn corpus_json_round_trip() {
        let corpus = Corpus::from_texts(NormalizerConfig::default(), ["Hello world", "a b a"]);
        let back = Corpus::from_json(&corpus.to_json()).unwrap();
        assert_eq!(back, corpus);
    }

    fn spec(groups: &[(&str, u64)], noise: f64) -> SyntheticSpec {
        SyntheticSpec {
            groups: groups
                .iter()
                .map(|&(term, docs)| TermGroup {
                    term: term.into(),
                    docs,
                })
                .collect(),
            noise,
        }
    }

    #[test]
    fn synthetic_is_deterministic() {
        let s = spec(&[("alpha", 10), ("beta gamma", 10), ("delta", 10)], 0.3);
        let a = generate_synthetic(42, &s).unwrap();
        let b = generate_synthetic(42, &s).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let c = generate_synthetic(43, &s).unwrap();
        assert_ne!(a.to_json(), c.to_json());
    }

    #[test]
    fn synthetic_edge_cases() {
        assert_eq!(generate_synthetic(1, &spec(&[("x", 0)], 0.0)).unwrap().len(), 0);
        assert!(matches!(
            generate_synthetic(1, &spec(&[], 0.0)),
            Err(CorpusError::InvalidSpec(_))
        ));
        assert!(generate_synthetic(1, &spec(&[("x", 1)], 1.5)).is_err());
        assert!(generate_synthetic(1, &spec(&[("!!!", 1)], 0.0)).is_err());
        assert!(generate_synthetic(1, &spec(&[("a", 1), ("a b", 1)], 0.0)).is_err());
    }

    #[test]
    fn synthetic_spec_parses() {
        let s = SyntheticSpec::from_json(r#"{"groups":[{"term":"a b","docs":3}],"noise":0.1}"#)
            .unwrap();
        assert_eq!(s, spec(&[("a b", 3)], 0.1));
        assert!(SyntheticSpec::from_json("{}").is_err());
    }
}
