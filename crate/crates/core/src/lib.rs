//! A small search engine that treats a query as a *singleton event space*:
//! the set of indexed documents in which a term occurs.
//!
//! - [`corpus`]: tokenization, JSONL ingestion and seeded synthetic corpora
//! - [`termspace`]: terms as word sequences, their subsets and relations
//! - [`index`]: positional inverted index and the `SSE1` file format
//! - [`events`]: event-space evaluation, probabilities and set algebra
//! - [`audit`]: hold-rate audits of set-relation claims between event spaces
//! - [`cli`]: the `sse` command line

pub mod audit;
pub mod cli;
pub mod corpus;
pub mod events;
pub mod index;
pub mod termspace;

pub use audit::{AuditError, AuditOptions, AuditReport, LemmaId, PairVerdict};
pub use corpus::{tokenize, Corpus, CorpusError, Document, NormalizerConfig, Word};
pub use events::{combine, evaluate, EventError, EventSpace, MatchMode, Query, SetOp};
pub use index::{build_index, IndexError, InvertedIndex, PostingList};
pub use termspace::{parse_term, Relation, Term, TermError};
