//! Positional inverted index and its on-disk format.
//!
//! File layout (all integers little-endian):
//!
//! ```text
//! magic        4 bytes  "SSE1"
//! version      u32
//! timestamp    u64      build time, seconds since the Unix epoch
//! doc_count    u64
//! normalizer   3 x u8   lowercase, strip_punctuation, token_rule
//! vocab_size   u64
//! vocab_size x {
//!     word_len     u32, then word_len bytes of UTF-8 (words strictly ascending)
//!     entry_count  u64
//!     entry_count x {
//!         doc_gap    u64   doc_id minus the previous doc_id (first entry: doc_id)
//!         pos_count  u32
//!         pos_count x u32  position gaps, same scheme as doc_gap
//!     }
//! }
//! crc32        u32      over every preceding byte
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::corpus::{Corpus, CorpusStats, NormalizerConfig, TokenRule, Word};

pub const MAGIC: &[u8; 4] = b"SSE1";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("not an index file: bad magic bytes")]
    BadMagic,
    #[error("unsupported index format version {found} (expected {expected})")]
    UnsupportedVersion { found: u32, expected: u32 },
    #[error("corrupt index at byte {offset}: {reason}")]
    Corrupt { offset: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Posting {
    pub doc_id: u64,
    /// Token positions, strictly ascending and non-empty.
    pub positions: Vec<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PostingList {
    pub entries: Vec<Posting>,
}

impl PostingList {
    pub fn doc_ids(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().map(|p| p.doc_id)
    }

    /// Document frequency.
    pub fn df(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Positions of this word inside `doc_id`, if it occurs there.
    pub fn positions_in(&self, doc_id: u64) -> Option<&[u32]> {
        self.entries
            .binary_search_by_key(&doc_id, |p| p.doc_id)
            .ok()
            .map(|i| self.entries[i].positions.as_slice())
    }
}

static EMPTY_POSTINGS: PostingList = PostingList {
    entries: Vec::new(),
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexMeta {
    pub format_version: u32,
    pub vocabulary_size: u64,
    pub build_timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvertedIndex {
    postings: BTreeMap<Word, PostingList>,
    doc_count: u64,
    normalizer: NormalizerConfig,
    meta: IndexMeta,
}

/// Indexes every token position of every document.
///
/// The build timestamp is left at 0; see [`InvertedIndex::with_build_timestamp`].
pub fn build_index(corpus: &Corpus) -> InvertedIndex {
    let mut postings: HashMap<&Word, Vec<Posting>> = HashMap::new();
    for doc in corpus.documents() {
        for (pos, word) in doc.tokens.iter().enumerate() {
            let pos = u32::try_from(pos).expect("document longer than u32::MAX tokens");
            let list = postings.entry(word).or_default();
            match list.last_mut() {
                Some(last) if last.doc_id == doc.doc_id => last.positions.push(pos),
                _ => list.push(Posting {
                    doc_id: doc.doc_id,
                    positions: vec![pos],
                }),
            }
        }
    }
    let postings: BTreeMap<Word, PostingList> = postings
        .into_iter()
        .map(|(w, entries)| (w.clone(), PostingList { entries }))
        .collect();
    InvertedIndex {
        meta: IndexMeta {
            format_version: FORMAT_VERSION,
            vocabulary_size: postings.len() as u64,
            build_timestamp: 0,
        },
        postings,
        doc_count: corpus.len() as u64,
        normalizer: *corpus.normalizer(),
    }
}

impl InvertedIndex {
    pub fn with_build_timestamp(mut self, seconds: u64) -> Self {
        self.meta.build_timestamp = seconds;
        self
    }

    /// |Ω|.
    pub fn doc_count(&self) -> u64 {
        self.doc_count
    }

    pub fn normalizer(&self) -> &NormalizerConfig {
        &self.normalizer
    }

    pub fn meta(&self) -> &IndexMeta {
        &self.meta
    }

    pub fn vocabulary(&self) -> impl Iterator<Item = &Word> {
        self.postings.keys()
    }

    pub fn postings(&self) -> impl Iterator<Item = (&Word, &PostingList)> {
        self.postings.iter()
    }

    /// Postings for `word`; empty when the word never occurs.
    pub fn postings_lookup(&self, word: &str) -> &PostingList {
        self.postings.get(word).unwrap_or(&EMPTY_POSTINGS)
    }

    pub fn stats(&self) -> CorpusStats {
        let total_tokens = self
            .postings
            .values()
            .flat_map(|list| &list.entries)
            .map(|p| p.positions.len() as u64)
            .sum();
        CorpusStats {
            doc_count: self.doc_count,
            total_tokens,
            vocabulary_size: self.postings.len() as u64,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&self.meta.format_version.to_le_bytes());
        out.extend_from_slice(&self.meta.build_timestamp.to_le_bytes());
        out.extend_from_slice(&self.doc_count.to_le_bytes());
        out.push(self.normalizer.lowercase as u8);
        out.push(self.normalizer.strip_punctuation as u8);
        out.push(self.normalizer.token_rule.id());
        out.extend_from_slice(&(self.postings.len() as u64).to_le_bytes());
        for (word, list) in &self.postings {
            let bytes = word.as_str().as_bytes();
            out.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
            out.extend_from_slice(bytes);
            out.extend_from_slice(&(list.entries.len() as u64).to_le_bytes());
            let mut prev_doc = 0u64;
            for entry in &list.entries {
                out.extend_from_slice(&(entry.doc_id - prev_doc).to_le_bytes());
                prev_doc = entry.doc_id;
                out.extend_from_slice(&(entry.positions.len() as u32).to_le_bytes());
                let mut prev_pos = 0u32;
                for &pos in &entry.positions {
                    out.extend_from_slice(&(pos - prev_pos).to_le_bytes());
                    prev_pos = pos;
                }
            }
        }
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, IndexError> {
        Decoder::new(bytes).decode()
    }

    pub fn save(&self, path: &Path) -> Result<(), IndexError> {
        fs::write(path, self.to_bytes()).map_err(|source| IndexError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, IndexError> {
        let bytes = fs::read(path).map_err(|source| IndexError::Io {
            path: path.display().to_string(),
            source,
        })?;
        InvertedIndex::from_bytes(&bytes)
    }
}

struct Decoder<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Decoder<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Decoder { buf, pos: 0 }
    }

    fn corrupt(&self, offset: usize, reason: impl Into<String>) -> IndexError {
        IndexError::Corrupt {
            offset,
            reason: reason.into(),
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], IndexError> {
        let remaining = self.buf.len() - self.pos;
        if n > remaining {
            return Err(self.corrupt(
                self.buf.len(),
                format!("unexpected end of file reading {n} bytes at byte {}", self.pos),
            ));
        }
        let slice = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8, IndexError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, IndexError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, IndexError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn flag(&mut self) -> Result<bool, IndexError> {
        let at = self.pos;
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(self.corrupt(at, format!("invalid flag byte {other}"))),
        }
    }

    /// Rejects counts that could not possibly fit in the rest of the file.
    fn check_count(&self, at: usize, count: u64, min_item_bytes: usize) -> Result<usize, IndexError> {
        let remaining = (self.buf.len() - self.pos) as u64;
        if count.saturating_mul(min_item_bytes as u64) > remaining {
            return Err(self.corrupt(at, format!("count {count} exceeds remaining data")));
        }
        Ok(count as usize)
    }

    fn decode(mut self) -> Result<InvertedIndex, IndexError> {
        if self.buf.len() < MAGIC.len() || &self.buf[..MAGIC.len()] != MAGIC {
            return Err(IndexError::BadMagic);
        }
        self.pos = MAGIC.len();
        let version = self.u32()?;
        if version != FORMAT_VERSION {
            return Err(IndexError::UnsupportedVersion {
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        let build_timestamp = self.u64()?;
        let doc_count = self.u64()?;
        let lowercase = self.flag()?;
        let strip_punctuation = self.flag()?;
        let at = self.pos;
        let rule_id = self.u8()?;
        let token_rule = TokenRule::from_id(rule_id)
            .ok_or_else(|| self.corrupt(at, format!("unknown token rule {rule_id}")))?;

        let at = self.pos;
        let vocab_size = self.u64()?;
        // word_len + one byte + entry_count
        let vocab_size = self.check_count(at, vocab_size, 4 + 1 + 8)?;
        let mut postings = BTreeMap::new();
        let mut prev_word: Option<Word> = None;
        for _ in 0..vocab_size {
            let at = self.pos;
            let len = self.u32()? as usize;
            let raw = self.take(len)?;
            let text = std::str::from_utf8(raw)
                .map_err(|_| self.corrupt(at, "word is not valid UTF-8"))?;
            let word = Word::new(text).ok_or_else(|| self.corrupt(at, "invalid word"))?;
            if prev_word.as_ref().is_some_and(|p| p >= &word) {
                return Err(self.corrupt(at, "vocabulary not strictly ascending"));
            }
            let list = self.posting_list(doc_count)?;
            prev_word = Some(word.clone());
            postings.insert(word, list);
        }

        let body_end = self.pos;
        let stored = self.u32()?;
        if self.pos != self.buf.len() {
            return Err(self.corrupt(self.pos, "trailing bytes after checksum"));
        }
        let actual = crc32fast::hash(&self.buf[..body_end]);
        if stored != actual {
            return Err(self.corrupt(
                body_end,
                format!("checksum mismatch (stored {stored:#010x}, computed {actual:#010x})"),
            ));
        }

        Ok(InvertedIndex {
            meta: IndexMeta {
                format_version: version,
                vocabulary_size: postings.len() as u64,
                build_timestamp,
            },
            postings,
            doc_count,
            normalizer: NormalizerConfig {
                lowercase,
                strip_punctuation,
                token_rule,
            },
        })
    }

    fn posting_list(&mut self, doc_count: u64) -> Result<PostingList, IndexError> {
        let at = self.pos;
        let entry_count = self.u64()?;
        if entry_count == 0 {
            return Err(self.corrupt(at, "empty posting list"));
        }
        // doc_gap + pos_count + one position
        let entry_count = self.check_count(at, entry_count, 8 + 4 + 4)?;
        let mut entries = Vec::with_capacity(entry_count);
        let mut doc_id = 0u64;
        for i in 0..entry_count {
            let at = self.pos;
            let gap = self.u64()?;
            if i > 0 && gap == 0 {
                return Err(self.corrupt(at, "doc ids not strictly ascending"));
            }
            doc_id = doc_id
                .checked_add(gap)
                .filter(|&d| d < doc_count)
                .ok_or_else(|| self.corrupt(at, "doc id out of range"))?;
            let at = self.pos;
            let pos_count = self.u32()? as u64;
            if pos_count == 0 {
                return Err(self.corrupt(at, "posting without positions"));
            }
            let pos_count = self.check_count(at, pos_count, 4)?;
            let mut positions = Vec::with_capacity(pos_count);
            let mut pos = 0u32;
            for j in 0..pos_count {
                let at = self.pos;
                let gap = self.u32()?;
                if j > 0 && gap == 0 {
                    return Err(self.corrupt(at, "positions not strictly ascending"));
                }
                pos = pos
                    .checked_add(gap)
                    .ok_or_else(|| self.corrupt(at, "position overflow"))?;
                positions.push(pos);
            }
            entries.push(Posting { doc_id, positions });
        }
        Ok(PostingList { entries })
    }
}
