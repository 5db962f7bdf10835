//! Browser bindings for `sse-core`.
//!
//! The page pastes a corpus (one document per line) and explores it through
//! three operations: evaluating a term's event space, walking the subset
//! lattice of a term, and auditing pairwise independence of several terms.
//! Each operation returns a JSON string; the plain functions are usable
//! (and tested) outside the browser.

use serde_json::json;
use sse_core::audit::{audit_independence, AuditOptions};
use sse_core::termspace::{enumerate_subsets, subset_probability};
use sse_core::{build_index, evaluate, parse_term, Corpus, InvertedIndex, MatchMode, NormalizerConfig, Query};
use wasm_bindgen::prelude::*;

/// Largest term accepted by the subset view; 2^10 - 1 rows is plenty for a page.
const DEMO_MAX_K: usize = 10;

fn index_lines(corpus_text: &str) -> InvertedIndex {
    let lines = corpus_text.lines().map(str::trim).filter(|l| !l.is_empty());
    build_index(&Corpus::from_texts(NormalizerConfig::default(), lines))
}

fn mode_arg(mode: &str) -> Result<MatchMode, String> {
    mode.parse()
}

/// Event spaces of `term` under both match modes.
pub fn query_json(corpus_text: &str, term: &str) -> Result<String, String> {
    let index = index_lines(corpus_text);
    let term = parse_term(term, index.normalizer()).map_err(|e| e.to_string())?;
    let contains = evaluate(&index, &Query::new(term.clone(), MatchMode::ContainsAll));
    let phrase = evaluate(&index, &Query::new(term, MatchMode::Phrase));
    Ok(json!({
        "contains": contains.report(true, usize::MAX),
        "phrase": phrase.report(true, usize::MAX),
    })
    .to_string())
}

/// Every non-empty word subset of `term` with its hit count in the corpus.
pub fn subsets_json(corpus_text: &str, term: &str, mode: &str) -> Result<String, String> {
    let mode = mode_arg(mode)?;
    let index = index_lines(corpus_text);
    let term = parse_term(term, index.normalizer()).map_err(|e| e.to_string())?;
    if term.k() > DEMO_MAX_K {
        return Err(format!("the demo lists subsets for up to {DEMO_MAX_K} words"));
    }
    let rows: Vec<_> = enumerate_subsets(&term)
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|sub| {
            let space = evaluate(&index, &Query::new(sub.clone(), mode));
            json!({ "term": sub, "k": sub.k(), "cardinality": space.cardinality() })
        })
        .collect();
    let p = subset_probability(&term);
    Ok(json!({
        "term": term,
        "universe_size": index.doc_count(),
        "subset_probability": p.to_string(),
        "subsets": rows,
    })
    .to_string())
}

/// Pairwise disjointness audit over the terms listed one per line.
pub fn independence_json(corpus_text: &str, terms_text: &str, mode: &str) -> Result<String, String> {
    let mode = mode_arg(mode)?;
    let index = index_lines(corpus_text);
    let terms = terms_text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| parse_term(l, index.normalizer()).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    let report = audit_independence(&index, &terms, AuditOptions { mode, seed: 0 })
        .map_err(|e| e.to_string())?;
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn query(corpus_text: &str, term: &str) -> Result<String, JsValue> {
    query_json(corpus_text, term).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn subsets(corpus_text: &str, term: &str, mode: &str) -> Result<String, JsValue> {
    subsets_json(corpus_text, term, mode).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn independence(corpus_text: &str, terms_text: &str, mode: &str) -> Result<String, JsValue> {
    independence_json(corpus_text, terms_text, mode).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    const CORPUS: &str = "\
Amara K. M. Okafor wrote about social network extraction
Okafor, Amara: social network of authors

network social graph
unrelated text here
";

    fn parse(s: String) -> Value {
        serde_json::from_str(&s).unwrap()
    }

    #[test]
    fn query_both_modes() {
        let v = parse(query_json(CORPUS, "social network").unwrap());
        assert_eq!(v["contains"]["cardinality"], 3);
        assert_eq!(v["phrase"]["cardinality"], 2);
        assert_eq!(v["contains"]["universe_size"], 4);
        assert_eq!(v["phrase"]["doc_ids"], serde_json::json!([0, 1]));
        assert!(query_json(CORPUS, "...").is_err());
    }

    #[test]
    fn subsets_with_counts() {
        let v = parse(subsets_json(CORPUS, "Amara K. M. Okafor", "contains").unwrap());
        let rows = v["subsets"].as_array().unwrap();
        assert_eq!(rows.len(), 15);
        assert_eq!(v["subset_probability"], "1/15");
        assert_eq!(rows[0]["term"], "amara");
        assert_eq!(rows[0]["cardinality"], 2);
        assert_eq!(rows[14]["cardinality"], 1);
        assert!(subsets_json(CORPUS, "a b c d e f g h i j k", "contains").is_err());
        assert!(subsets_json(CORPUS, "a", "fuzzy").is_err());
    }

    #[test]
    fn independence_report() {
        let v = parse(independence_json(CORPUS, "social\nnetwork\n\nunrelated", "contains").unwrap());
        assert_eq!(v["pairs_tested"], 3);
        assert_eq!(v["aggregate_bias"], 3);
        assert!(independence_json(CORPUS, "social", "contains").is_err());
    }
}
