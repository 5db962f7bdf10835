//! Empirical audits of set-relation claims about event spaces.
//!
//! Each audit takes term pairs satisfying a hypothesis about their word sets,
//! predicts a relation between their event spaces, and measures whether the
//! corpus agrees. Pairs that do not satisfy the hypothesis are rejected
//! up front so hold rates are computed over honest denominators.
//!
//! | audit | hypothesis on words          | predicted relation on documents |
//! |-------|------------------------------|---------------------------------|
//! | L1    | `t_y ⊊ t_x`                  | `Ω_y ⊆ Ω_x`                      |
//! | P1    | chain `t_1 ⊊ t_2 ⊊ …`        | L1 on every adjacent link       |
//! | L2    | `t_y ∩ t_z = ∅`              | `Ω_y ∩ Ω_z = ∅`                  |
//! | P2    | none                         | `|Ω_x ∩ Ω_y| ≥ 0`                |
//! | L3    | `t_x ∩ t_z = ∅`, `Ω_x ∩ Ω_z ≠ ∅` | `Ω_x = Ω_z`                  |
//! | INDEP | none                         | pairwise `Ω_i ∩ Ω_j = ∅`         |

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::events::{combine, evaluate, EventSpace, MatchMode, Query, SetOp};
use crate::index::InvertedIndex;
use crate::termspace::{term_relation, Relation, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum LemmaId {
    L1,
    P1,
    L2,
    P2,
    L3,
    #[serde(rename = "INDEP")]
    Indep,
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LemmaId::L1 => "L1",
            LemmaId::P1 => "P1",
            LemmaId::L2 => "L2",
            LemmaId::P2 => "P2",
            LemmaId::L3 => "L3",
            LemmaId::Indep => "INDEP",
        })
    }
}

/// A pair that fails an audit's hypothesis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Offender {
    /// Position in the input.
    pub index: usize,
    pub t_x: String,
    pub t_y: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error("{lemma} audit needs at least one pair")]
    Empty { lemma: LemmaId },
    #[error("{lemma} audit needs at least {needed} terms, got {got}")]
    TooFewTerms {
        lemma: LemmaId,
        needed: usize,
        got: usize,
    },
    #[error("{lemma} hypothesis fails for {}", describe(offenders))]
    Precondition {
        lemma: LemmaId,
        offenders: Vec<Offender>,
    },
}

fn describe(offenders: &[Offender]) -> String {
    offenders
        .iter()
        .map(|o| format!("pair {} ({:?}, {:?}): {}", o.index, o.t_x, o.t_y, o.reason))
        .collect::<Vec<_>>()
        .join("; ")
}

/// The relation an audit expects between `Ω_x` and `Ω_y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Prediction {
    /// `Ω_y ⊆ Ω_x`, i.e. `Ω_x = Ω_x ∪ Ω_y`.
    YWithinX,
    Disjoint,
    Equal,
    /// `|Ω_x ∩ Ω_y| ≥ 0`.
    IntersectionNonNegative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Cardinalities {
    pub x: u64,
    pub y: u64,
    pub intersect: u64,
    pub union: u64,
}

impl Cardinalities {
    /// `|A ∪ B| + |A ∩ B| = |A| + |B|`.
    pub fn inclusion_exclusion_holds(&self) -> bool {
        self.union + self.intersect == self.x + self.y
    }

    /// `|A ∩ B| ≥ 0`, read through inclusion–exclusion as `|A| + |B| ≥ |A ∪ B|`.
    pub fn intersection_nonnegative(&self) -> bool {
        self.x + self.y >= self.union
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Containment {
    pub x_within_y: bool,
    pub y_within_x: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairVerdict {
    pub t_x: Term,
    pub t_y: Term,
    pub predicted: Prediction,
    pub observed: Relation,
    pub holds: bool,
    pub cards: Cardinalities,
    pub containment: Containment,
    /// `|Ω_x ∩ Ω_y| / |Ω_x ∪ Ω_y|`; 1 when both spaces are empty.
    pub jaccard: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prop2_holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub lemma_id: LemmaId,
    pub mode: MatchMode,
    pub seed: u64,
    pub pairs_tested: u64,
    pub holds: u64,
    pub hold_rate: f64,
    /// Sum of pairwise intersection sizes (independence audit only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aggregate_bias: Option<u64>,
    /// Whether every link of a chain holds (P1 only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain_holds: Option<bool>,
    /// Set when a chain has a single term and holds vacuously.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub degenerate: bool,
    pub verdicts: Vec<PairVerdict>,
}

impl AuditReport {
    fn new(lemma_id: LemmaId, opts: &AuditOptions, verdicts: Vec<PairVerdict>) -> Self {
        let pairs_tested = verdicts.len() as u64;
        let holds = verdicts.iter().filter(|v| v.holds).count() as u64;
        AuditReport {
            lemma_id,
            mode: opts.mode,
            seed: opts.seed,
            pairs_tested,
            holds,
            hold_rate: if pairs_tested == 0 {
                1.0
            } else {
                holds as f64 / pairs_tested as f64
            },
            aggregate_bias: None,
            chain_holds: None,
            degenerate: false,
            verdicts,
        }
    }

    pub fn violations(&self) -> u64 {
        self.pairs_tested - self.holds
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AuditOptions {
    pub mode: MatchMode,
    /// Recorded in the report; identifies how the audited corpus or pairs were sampled.
    pub seed: u64,
}

struct Measured {
    cards: Cardinalities,
}

impl Measured {
    fn new(x: &EventSpace, y: &EventSpace) -> Self {
        let intersect = combine(SetOp::Intersect, x, y).expect("same index");
        let union = combine(SetOp::Union, x, y).expect("same index");
        let cards = Cardinalities {
            x: x.cardinality(),
            y: y.cardinality(),
            intersect: intersect.cardinality(),
            union: union.cardinality(),
        };
        Measured { cards }
    }

    fn verdict(&self, t_x: &Term, t_y: &Term, predicted: Prediction) -> PairVerdict {
        let c = self.cards;
        let containment = Containment {
            x_within_y: c.intersect == c.x,
            y_within_x: c.intersect == c.y,
        };
        let holds = match predicted {
            Prediction::YWithinX => containment.y_within_x,
            Prediction::Disjoint => c.intersect == 0,
            Prediction::Equal => containment.x_within_y && containment.y_within_x,
            Prediction::IntersectionNonNegative => c.intersection_nonnegative(),
        };
        PairVerdict {
            t_x: t_x.clone(),
            t_y: t_y.clone(),
            predicted,
            observed: Relation::from_counts(c.x as usize, c.y as usize, c.intersect as usize),
            holds,
            cards: c,
            containment,
            jaccard: if c.union == 0 {
                1.0
            } else {
                c.intersect as f64 / c.union as f64
            },
            prop2_holds: None,
        }
    }
}

fn measure(index: &InvertedIndex, mode: MatchMode, t_x: &Term, t_y: &Term) -> Measured {
    Measured::new(
        &evaluate(index, &Query::new(t_x.clone(), mode)),
        &evaluate(index, &Query::new(t_y.clone(), mode)),
    )
}

#[cfg(feature = "parallel")]
fn map_ordered<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_ordered<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.iter().map(f).collect()
}

fn check_hypothesis(
    lemma: LemmaId,
    pairs: &[(Term, Term)],
    reason: impl Fn(&Term, &Term) -> Option<String>,
) -> Result<(), AuditError> {
    if pairs.is_empty() {
        return Err(AuditError::Empty { lemma });
    }
    let offenders: Vec<Offender> = pairs
        .iter()
        .enumerate()
        .filter_map(|(index, (a, b))| {
            reason(a, b).map(|reason| Offender {
                index,
                t_x: a.to_string(),
                t_y: b.to_string(),
                reason,
            })
        })
        .collect();
    if offenders.is_empty() {
        Ok(())
    } else {
        Err(AuditError::Precondition { lemma, offenders })
    }
}

fn strict_word_subset(t_x: &Term, t_y: &Term) -> Option<String> {
    match term_relation(t_y, t_x) {
        Relation::Subset => None,
        other => Some(format!("words of t_y must be a strict subset of t_x, found {other}")),
    }
}

fn word_disjoint(a: &Term, b: &Term) -> Option<String> {
    match term_relation(a, b) {
        Relation::Disjoint => None,
        other => Some(format!("terms must share no words, found {other}")),
    }
}

/// Pairs are `(t_x, t_y)` with the words of `t_y` a strict subset of `t_x`'s.
/// Holds when `Ω_y ⊆ Ω_x`.
pub fn audit_lemma1(
    index: &InvertedIndex,
    pairs: &[(Term, Term)],
    opts: AuditOptions,
) -> Result<AuditReport, AuditError> {
    check_hypothesis(LemmaId::L1, pairs, strict_word_subset)?;
    let verdicts = map_ordered(pairs, |(t_x, t_y)| {
        measure(index, opts.mode, t_x, t_y).verdict(t_x, t_y, Prediction::YWithinX)
    });
    Ok(AuditReport::new(LemmaId::L1, &opts, verdicts))
}

/// `chain` runs from the smallest term to the largest, each link a strict
/// word-set superset of the previous one. One verdict per adjacent link.
pub fn audit_prop1(
    index: &InvertedIndex,
    chain: &[Term],
    opts: AuditOptions,
) -> Result<AuditReport, AuditError> {
    match chain.len() {
        0 => return Err(AuditError::Empty { lemma: LemmaId::P1 }),
        1 => {
            let mut report = AuditReport::new(LemmaId::P1, &opts, Vec::new());
            report.chain_holds = Some(true);
            report.degenerate = true;
            return Ok(report);
        }
        _ => {}
    }
    let links: Vec<(Term, Term)> = chain
        .windows(2)
        .map(|w| (w[1].clone(), w[0].clone()))
        .collect();
    check_hypothesis(LemmaId::P1, &links, strict_word_subset)?;
    let verdicts = map_ordered(&links, |(t_x, t_y)| {
        measure(index, opts.mode, t_x, t_y).verdict(t_x, t_y, Prediction::YWithinX)
    });
    let mut report = AuditReport::new(LemmaId::P1, &opts, verdicts);
    report.chain_holds = Some(report.holds == report.pairs_tested);
    Ok(report)
}

/// Pairs must be word-disjoint. Holds when the event spaces are disjoint.
pub fn audit_lemma2(
    index: &InvertedIndex,
    pairs: &[(Term, Term)],
    opts: AuditOptions,
) -> Result<AuditReport, AuditError> {
    check_hypothesis(LemmaId::L2, pairs, word_disjoint)?;
    let verdicts = map_ordered(pairs, |(t_y, t_z)| {
        measure(index, opts.mode, t_y, t_z).verdict(t_y, t_z, Prediction::Disjoint)
    });
    Ok(AuditReport::new(LemmaId::L2, &opts, verdicts))
}

/// Records `|Ω_x ∩ Ω_y| ≥ 0` for each pair. It always holds; the report
/// exists so the claim shows up alongside the others.
pub fn audit_prop2(
    index: &InvertedIndex,
    pairs: &[(Term, Term)],
    opts: AuditOptions,
) -> Result<AuditReport, AuditError> {
    check_hypothesis(LemmaId::P2, pairs, |_, _| None)?;
    let verdicts = map_ordered(pairs, |(t_x, t_y)| {
        let mut v = measure(index, opts.mode, t_x, t_y).verdict(
            t_x,
            t_y,
            Prediction::IntersectionNonNegative,
        );
        v.prop2_holds = Some(v.cards.intersection_nonnegative());
        v
    });
    Ok(AuditReport::new(LemmaId::P2, &opts, verdicts))
}

/// Pairs must be word-disjoint and share at least one document.
/// Holds when the two event spaces are identical.
pub fn audit_lemma3(
    index: &InvertedIndex,
    pairs: &[(Term, Term)],
    opts: AuditOptions,
) -> Result<AuditReport, AuditError> {
    check_hypothesis(LemmaId::L3, pairs, word_disjoint)?;
    let measured = map_ordered(pairs, |(t_x, t_z)| measure(index, opts.mode, t_x, t_z));
    let offenders: Vec<Offender> = measured
        .iter()
        .zip(pairs)
        .enumerate()
        .filter(|(_, (m, _))| m.cards.intersect == 0)
        .map(|(index, (_, (t_x, t_z)))| Offender {
            index,
            t_x: t_x.to_string(),
            t_y: t_z.to_string(),
            reason: "event spaces share no document".into(),
        })
        .collect();
    if !offenders.is_empty() {
        return Err(AuditError::Precondition {
            lemma: LemmaId::L3,
            offenders,
        });
    }
    let verdicts = measured
        .iter()
        .zip(pairs)
        .map(|(m, (t_x, t_z))| m.verdict(t_x, t_z, Prediction::Equal))
        .collect();
    Ok(AuditReport::new(LemmaId::L3, &opts, verdicts))
}

/// Every unordered pair of `terms`, after sorting the terms lexicographically.
pub fn sorted_pairs(terms: &[Term]) -> Vec<(Term, Term)> {
    let mut sorted = terms.to_vec();
    sorted.sort_by_cached_key(Term::to_string);
    let mut pairs = Vec::new();
    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            pairs.push((sorted[i].clone(), sorted[j].clone()));
        }
    }
    pairs
}

/// Tests pairwise disjointness of all listed terms' event spaces.
///
/// The aggregate bias is the sum of pairwise intersection sizes; it is 0
/// exactly when every pair is disjoint.
pub fn audit_independence(
    index: &InvertedIndex,
    terms: &[Term],
    opts: AuditOptions,
) -> Result<AuditReport, AuditError> {
    if terms.len() < 2 {
        return Err(AuditError::TooFewTerms {
            lemma: LemmaId::Indep,
            needed: 2,
            got: terms.len(),
        });
    }
    let mut sorted = terms.to_vec();
    sorted.sort_by_cached_key(Term::to_string);
    let spaces = map_ordered(&sorted, |t| evaluate(index, &Query::new(t.clone(), opts.mode)));
    let mut index_pairs = Vec::new();
    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            index_pairs.push((i, j));
        }
    }
    let verdicts = map_ordered(&index_pairs, |&(i, j)| {
        let m = Measured::new(&spaces[i], &spaces[j]);
        let mut v = m.verdict(&sorted[i], &sorted[j], Prediction::Disjoint);
        v.prop2_holds = Some(v.cards.intersection_nonnegative());
        v
    });
    let bias = verdicts.iter().map(|v| v.cards.intersect).sum();
    let mut report = AuditReport::new(LemmaId::Indep, &opts, verdicts);
    report.aggregate_bias = Some(bias);
    Ok(report)
}
