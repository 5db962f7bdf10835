//! The `sse` command line.
//!
//! Exit codes: 0 on success, 1 on validation or precondition errors, 2 on
//! I/O or file format errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::audit::{self, AuditError, AuditOptions, AuditReport};
use crate::corpus::{
    corpus_stats, generate_synthetic, ingest_jsonl, Corpus, CorpusError, NormalizerConfig,
    SyntheticSpec, TokenRule,
};
use crate::events::{evaluate, ratio_to_f64, MatchMode, Query};
use crate::index::{build_index, IndexError, InvertedIndex, MAGIC};
use crate::termspace::{enumerate_subsets, parse_term, subset_probability, Term, TermError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Contains,
    Phrase,
}

impl From<ModeArg> for MatchMode {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::Contains => MatchMode::ContainsAll,
            ModeArg::Phrase => MatchMode::Phrase,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LemmaArg {
    L1,
    P1,
    L2,
    P2,
    L3,
    Indep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TokenRuleArg {
    Unicode,
    Whitespace,
}

#[derive(Debug, Parser)]
#[command(name = "sse", about = "Singleton event spaces over a local corpus", version)]
pub struct Cli {
    /// Output format; defaults to $SSE_FORMAT, then text.
    #[arg(long, global = true, env = "SSE_FORMAT", value_enum, default_value = "text")]
    pub format: OutputFormat,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Read a JSON-lines file into a corpus file.
    Ingest {
        input: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        no_lowercase: bool,
        #[arg(long)]
        keep_punctuation: bool,
        #[arg(long, value_enum, default_value = "unicode")]
        token_rule: TokenRuleArg,
    },
    /// Generate a seeded synthetic corpus from a JSON recipe.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Build an index file from a corpus file.
    Build {
        corpus: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Document, token and vocabulary counts of a corpus or index file.
    Stats { path: PathBuf },
    /// Evaluate the event space of a term.
    Query {
        #[arg(short, long)]
        index: PathBuf,
        #[arg(long)]
        term: String,
        #[arg(long, value_enum, default_value = "contains")]
        mode: ModeArg,
        #[arg(long)]
        show_ids: bool,
        /// Maximum number of doc ids printed with --show-ids.
        #[arg(long, default_value_t = 1000)]
        id_limit: usize,
    },
    /// List the non-empty word subsets of a term.
    Subsets {
        #[arg(long)]
        term: String,
        /// Parse the term with this index's normalizer instead of the default.
        #[arg(short, long)]
        index: Option<PathBuf>,
    },
    /// Subset probability of a term and the probability of its event space.
    Prob {
        #[arg(short, long)]
        index: PathBuf,
        #[arg(long)]
        term: String,
        #[arg(long, value_enum, default_value = "contains")]
        mode: ModeArg,
    },
    /// Audit a set-relation claim over term pairs.
    Audit {
        #[arg(short, long)]
        index: PathBuf,
        #[arg(long, value_enum)]
        lemma: LemmaArg,
        /// JSON array of [t_x, t_y] string pairs; a flat string array for p1 and indep.
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long, value_enum, default_value = "contains")]
        mode: ModeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Io(m) => m,
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::InvalidSpec(_) => CliError::Validation(e.to_string()),
            CorpusError::Io { .. } | CorpusError::Format { .. } => CliError::Io(e.to_string()),
        }
    }
}

impl From<IndexError> for CliError {
    fn from(e: IndexError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<AuditError> for CliError {
    fn from(e: AuditError) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn term_arg(flag: &str, text: &str, config: &NormalizerConfig) -> Result<Term, CliError> {
    parse_term(text, config).map_err(|e: TermError| CliError::Validation(format!("{flag}: {e}")))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Runs one invocation and returns the process exit code.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{rendered}");
                    0
                }
                _ => {
                    let _ = write!(err, "{rendered}");
                    1
                }
            };
        }
    };
    match execute(&cli) {
        Ok(output) => {
            let text = match cli.format {
                OutputFormat::Json => {
                    serde_json::to_string_pretty(&output.json).expect("json output") + "\n"
                }
                OutputFormat::Text => output.text,
            };
            if out.write_all(text.as_bytes()).is_err() {
                return 2;
            }
            for warning in output.warnings {
                let _ = writeln!(err, "warning: {warning}");
            }
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.exit_code()
        }
    }
}

struct Output {
    text: String,
    json: Value,
    warnings: Vec<String>,
}

impl Output {
    fn new(text: String, json: Value) -> Self {
        Output {
            text,
            json,
            warnings: Vec::new(),
        }
    }
}

fn to_value(v: &impl Serialize) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn execute(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Ingest {
            input,
            out,
            no_lowercase,
            keep_punctuation,
            token_rule,
        } => {
            let config = NormalizerConfig {
                lowercase: !no_lowercase,
                strip_punctuation: !keep_punctuation,
                token_rule: match token_rule {
                    TokenRuleArg::Unicode => TokenRule::Unicode,
                    TokenRuleArg::Whitespace => TokenRule::Whitespace,
                },
            };
            let ingested = ingest_jsonl(input, config)?;
            ingested.corpus.save(out)?;
            let mut output = Output::new(
                format!(
                    "ingested {} documents ({} malformed) into {}\n",
                    ingested.corpus.len(),
                    ingested.malformed.len(),
                    out.display()
                ),
                json!({
                    "documents": ingested.corpus.len(),
                    "malformed": ingested.malformed,
                    "output": out.display().to_string(),
                }),
            );
            output.warnings = ingested
                .malformed
                .iter()
                .map(|m| format!("{} line {}: {}", input.display(), m.line, m.reason))
                .collect();
            Ok(output)
        }
        Command::Synth { spec, seed, out } => {
            let text = fs::read_to_string(spec)
                .map_err(|e| CliError::Io(format!("--spec {}: {e}", spec.display())))?;
            let recipe = SyntheticSpec::from_json(&text)
                .map_err(|e| CliError::Validation(format!("--spec: {e}")))?;
            let corpus = generate_synthetic(*seed, &recipe)?;
            corpus.save(out)?;
            Ok(Output::new(
                format!(
                    "generated {} documents (seed {seed}) into {}\n",
                    corpus.len(),
                    out.display()
                ),
                json!({
                    "documents": corpus.len(),
                    "seed": seed,
                    "output": out.display().to_string(),
                }),
            ))
        }
        Command::Build { corpus, out } => {
            let corpus = Corpus::load(corpus)?;
            let index = build_index(&corpus).with_build_timestamp(source_date_epoch());
            write_file(out, &index.to_bytes())?;
            let stats = index.stats();
            Ok(Output::new(
                format!(
                    "indexed {} documents, {} tokens, {} words into {}\n",
                    stats.doc_count,
                    stats.total_tokens,
                    stats.vocabulary_size,
                    out.display()
                ),
                json!({
                    "documents": stats.doc_count,
                    "total_tokens": stats.total_tokens,
                    "vocabulary_size": stats.vocabulary_size,
                    "output": out.display().to_string(),
                }),
            ))
        }
        Command::Stats { path } => stats(path),
        Command::Query {
            index,
            term,
            mode,
            show_ids,
            id_limit,
        } => {
            let index = InvertedIndex::load(index)?;
            let term = term_arg("--term", term, index.normalizer())?;
            let space = evaluate(&index, &Query::new(term, (*mode).into()));
            let report = space.report(*show_ids, *id_limit);
            let mut text = format!(
                "term: {}\nmode: {}\ncardinality: {}\nuniverse: {}\n",
                report.term,
                space_mode(&report.mode),
                report.cardinality,
                report.universe_size
            );
            match (&report.probability, &report.probability_exact) {
                (Some(p), Some(exact)) => text += &format!("probability: {p} ({exact})\n"),
                _ => text += "probability: undefined (empty universe)\n",
            }
            if let Some(ids) = &report.doc_ids {
                let ids: Vec<String> = ids.iter().map(u64::to_string).collect();
                text += &format!("doc_ids: {}\n", ids.join(" "));
                if report.doc_ids_truncated == Some(true) {
                    text += &format!("(truncated to {id_limit})\n");
                }
            }
            Ok(Output::new(text, to_value(&report)))
        }
        Command::Subsets { term, index } => {
            let config = match index {
                Some(path) => *InvertedIndex::load(path)?.normalizer(),
                None => NormalizerConfig::default(),
            };
            let term = term_arg("--term", term, &config)?;
            let subsets = enumerate_subsets(&term)
                .map_err(|e| CliError::Validation(format!("--term: {e}")))?;
            let p = subset_probability(&term);
            let mut text = format!(
                "term: {term}\nk: {}\nsubsets: {}\nsubset_probability: {} ({p})\n",
                term.k(),
                subsets.len(),
                ratio_to_f64(p)
            );
            for s in &subsets {
                text += &format!("  {s}\n");
            }
            Ok(Output::new(
                text,
                json!({
                    "term": term,
                    "k": term.k(),
                    "count": subsets.len(),
                    "subset_probability": ratio_to_f64(p),
                    "subset_probability_exact": p.to_string(),
                    "subsets": subsets,
                }),
            ))
        }
        Command::Prob { index, term, mode } => {
            let index = InvertedIndex::load(index)?;
            let term = term_arg("--term", term, index.normalizer())?;
            let subset_p = subset_probability(&term);
            let mode: MatchMode = (*mode).into();
            let space = evaluate(&index, &Query::new(term.clone(), mode));
            let event_p = space
                .probability()
                .map_err(|e| CliError::Validation(format!("--index: {e}")))?;
            Ok(Output::new(
                format!(
                    "term: {term}\nk: {}\nsubset_probability: {} ({subset_p})\nmode: {mode}\n\
                     cardinality: {}\nuniverse: {}\nevent_probability: {} ({event_p})\n",
                    term.k(),
                    ratio_to_f64(subset_p),
                    space.cardinality(),
                    space.universe_size(),
                    ratio_to_f64(event_p),
                ),
                json!({
                    "term": term,
                    "k": term.k(),
                    "subset_probability": ratio_to_f64(subset_p),
                    "subset_probability_exact": subset_p.to_string(),
                    "mode": mode,
                    "cardinality": space.cardinality(),
                    "universe_size": space.universe_size(),
                    "event_probability": ratio_to_f64(event_p),
                    "event_probability_exact": event_p.to_string(),
                }),
            ))
        }
        Command::Audit {
            index,
            lemma,
            pairs,
            mode,
            seed,
        } => {
            let index = InvertedIndex::load(index)?;
            let text = fs::read_to_string(pairs)
                .map_err(|e| CliError::Io(format!("--pairs {}: {e}", pairs.display())))?;
            let value: Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Io(format!("--pairs {}: {e}", pairs.display())))?;
            let opts = AuditOptions {
                mode: (*mode).into(),
                seed: *seed,
            };
            let config = *index.normalizer();
            let report = match lemma {
                LemmaArg::P1 => audit::audit_prop1(&index, &term_list(&value, &config)?, opts)?,
                LemmaArg::Indep => {
                    audit::audit_independence(&index, &term_list(&value, &config)?, opts)?
                }
                LemmaArg::L1 => audit::audit_lemma1(&index, &pair_list(&value, &config)?, opts)?,
                LemmaArg::L2 => audit::audit_lemma2(&index, &pair_list(&value, &config)?, opts)?,
                LemmaArg::P2 => audit::audit_prop2(&index, &pair_list(&value, &config)?, opts)?,
                LemmaArg::L3 => audit::audit_lemma3(&index, &pair_list(&value, &config)?, opts)?,
            };
            Ok(Output::new(audit_text(&report), to_value(&report)))
        }
    }
}

fn space_mode(mode: &Option<MatchMode>) -> String {
    mode.map_or_else(|| "-".to_owned(), |m| m.to_string())
}

/// Build timestamp: `$SOURCE_DATE_EPOCH` when set, else 0 so repeated builds are identical.
fn source_date_epoch() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

fn stats(path: &Path) -> Result<Output, CliError> {
    let bytes =
        fs::read(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    if bytes.starts_with(MAGIC) {
        let index = InvertedIndex::from_bytes(&bytes)?;
        let s = index.stats();
        let meta = index.meta();
        return Ok(Output::new(
            format!(
                "kind: index\ndocuments: {}\ntokens: {}\nvocabulary: {}\nformat_version: {}\nbuild_timestamp: {}\n",
                s.doc_count, s.total_tokens, s.vocabulary_size, meta.format_version, meta.build_timestamp
            ),
            json!({
                "kind": "index",
                "doc_count": s.doc_count,
                "total_tokens": s.total_tokens,
                "vocabulary_size": s.vocabulary_size,
                "format_version": meta.format_version,
                "build_timestamp": meta.build_timestamp,
            }),
        ));
    }
    let text = String::from_utf8(bytes)
        .map_err(|_| CliError::Io(format!("{}: neither an index nor a corpus file", path.display())))?;
    let corpus = Corpus::from_json(&text)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let s = corpus_stats(&corpus);
    Ok(Output::new(
        format!(
            "kind: corpus\ndocuments: {}\ntokens: {}\nvocabulary: {}\n",
            s.doc_count, s.total_tokens, s.vocabulary_size
        ),
        json!({
            "kind": "corpus",
            "doc_count": s.doc_count,
            "total_tokens": s.total_tokens,
            "vocabulary_size": s.vocabulary_size,
        }),
    ))
}

fn term_list(value: &Value, config: &NormalizerConfig) -> Result<Vec<Term>, CliError> {
    let items = value
        .as_array()
        .ok_or_else(|| CliError::Validation("--pairs: expected a JSON array of term strings".into()))?;
    items
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let text = item.as_str().ok_or_else(|| {
                CliError::Validation(format!("--pairs: entry {i} is not a string"))
            })?;
            term_arg(&format!("--pairs entry {i}"), text, config)
        })
        .collect()
}

fn pair_list(value: &Value, config: &NormalizerConfig) -> Result<Vec<(Term, Term)>, CliError> {
    let items = value.as_array().ok_or_else(|| {
        CliError::Validation("--pairs: expected a JSON array of [t_x, t_y] pairs".into())
    })?;
    items
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let (a, b) = match item.as_array().map(Vec::as_slice) {
                Some([Value::String(a), Value::String(b)]) => (a, b),
                _ => {
                    return Err(CliError::Validation(format!(
                        "--pairs: entry {i} is not a pair of strings"
                    )))
                }
            };
            Ok((
                term_arg(&format!("--pairs entry {i}"), a, config)?,
                term_arg(&format!("--pairs entry {i}"), b, config)?,
            ))
        })
        .collect()
}

fn audit_text(report: &AuditReport) -> String {
    let mut text = format!(
        "audit: {} mode: {} seed: {}\n",
        report.lemma_id, report.mode, report.seed
    );
    for v in &report.verdicts {
        text += &format!(
            "  [{}] \"{}\" vs \"{}\": predicted {:?}, observed {}, |x|={} |y|={} |x&y|={} |x|y|={} jaccard={:.4}\n",
            if v.holds { "hold" } else { "FAIL" },
            v.t_x,
            v.t_y,
            v.predicted,
            v.observed,
            v.cards.x,
            v.cards.y,
            v.cards.intersect,
            v.cards.union,
            v.jaccard
        );
    }
    text += &format!(
        "pairs_tested: {}\nholds: {}\nhold_rate: {}\n",
        report.pairs_tested, report.holds, report.hold_rate
    );
    if let Some(bias) = report.aggregate_bias {
        text += &format!("aggregate_bias: {bias}\n");
    }
    if let Some(chain) = report.chain_holds {
        text += &format!("chain_holds: {chain}\n");
    }
    if report.degenerate {
        text += "degenerate: single-term chain\n";
    }
    text
}
