//! Attack evaluation: semantic similarity between original and perturbed
//! text, and the drop in entity-level F1 of the victim model.
//!
//! F1 is micro-averaged over exact `(sentence, start, end, type)` spans,
//! decoded from BIO tags with conlleval semantics. A precision or recall
//! whose denominator is zero is 1 when gold and predicted sets are both empty
//! and 0 otherwise.

use crate::attack::AttackConfig;
use crate::corpus::{extract_spans, Corpus, CorpusError, EntitySpan};
use crate::parallel;
use nerperturb_backend::{BackendError, Capability, Client};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use thiserror::Error;

/// Sentences per backend request.
pub const DEFAULT_BATCH_SIZE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize, both_empty: bool) -> f64 {
    if den == 0 {
        if both_empty {
            1.0
        } else {
            0.0
        }
    } else {
        num as f64 / den as f64
    }
}

impl Prf {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Prf {
        let both_empty = tp + fp == 0 && tp + fn_ == 0;
        let precision = ratio(tp, tp + fp, both_empty);
        let recall = ratio(tp, tp + fn_, both_empty);
        Prf {
            tp,
            fp,
            fn_,
            precision,
            recall,
            f1: f1_from(precision, recall),
        }
    }
}

/// Harmonic mean; 0 when both inputs are 0.
pub fn f1_from(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Precision, recall and F1 of `predicted` against `gold`, one span list per
/// sentence. The lists are paired by position.
pub fn span_prf(gold: &[Vec<EntitySpan>], predicted: &[Vec<EntitySpan>]) -> Prf {
    assert_eq!(gold.len(), predicted.len(), "span lists must be paired");
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (g, p) in gold.iter().zip(predicted) {
        let g: BTreeSet<&EntitySpan> = g.iter().collect();
        let p: BTreeSet<&EntitySpan> = p.iter().collect();
        let hit = g.intersection(&p).count();
        tp += hit;
        fp += p.len() - hit;
        fn_ += g.len() - hit;
    }
    Prf::from_counts(tp, fp, fn_)
}

/// Entity-level scores from BIO tag sequences, one per sentence.
pub fn f1_score<S: AsRef<str>>(gold: &[Vec<S>], predicted: &[Vec<S>]) -> Result<Prf, EvalError> {
    if gold.len() != predicted.len() {
        return Err(EvalError::Shape(format!(
            "{} gold sentences but {} predicted",
            gold.len(),
            predicted.len()
        )));
    }
    let mut g = Vec::with_capacity(gold.len());
    let mut p = Vec::with_capacity(gold.len());
    for (i, (gt, pt)) in gold.iter().zip(predicted).enumerate() {
        if gt.len() != pt.len() {
            return Err(EvalError::Shape(format!(
                "sentence {i}: {} gold tags but {} predicted",
                gt.len(),
                pt.len()
            )));
        }
        g.push(extract_spans(gt)?);
        p.push(extract_spans(pt)?);
    }
    Ok(span_prf(&g, &p))
}

/// Cosine similarity clamped to `[-1, 1]`. Identical vectors score exactly 1;
/// a zero vector scores 0 against anything else.
pub fn cosine(u: &[f64], v: &[f64]) -> f64 {
    assert_eq!(u.len(), v.len(), "cosine of vectors with different lengths");
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let uu: f64 = u.iter().map(|a| a * a).sum();
    let vv: f64 = v.iter().map(|b| b * b).sum();
    if uu == 0.0 || vv == 0.0 {
        return if u == v { 1.0 } else { 0.0 };
    }
    if u == v {
        return 1.0;
    }
    (dot / (uu * vv).sqrt()).clamp(-1.0, 1.0)
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("corpora are not aligned at sentence {position}: expected `{expected}`, found `{found}`")]
    Misaligned {
        position: usize,
        expected: String,
        found: String,
    },

    #[error("{0}")]
    Shape(String),

    #[error("backend does not offer `{0}`")]
    MissingCapability(Capability),

    #[error(transparent)]
    Backend(#[from] BackendError),

    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

fn check_aligned(reference: &Corpus, other: &Corpus, what: &str) -> Result<(), EvalError> {
    if reference.len() != other.len() {
        return Err(EvalError::Shape(format!(
            "{what} corpus has {} sentences, expected {}",
            other.len(),
            reference.len()
        )));
    }
    for (position, (a, b)) in reference.sentences().iter().zip(other.sentences()).enumerate() {
        if a.id() != b.id() {
            return Err(EvalError::Misaligned {
                position,
                expected: a.id().to_string(),
                found: b.id().to_string(),
            });
        }
        if a.len() != b.len() {
            return Err(EvalError::Shape(format!(
                "sentence `{}`: {what} corpus has {} tokens, expected {}",
                a.id(),
                b.len(),
                a.len()
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    pub batch_size: usize,
    /// Concurrent backend requests (`0` means one per CPU).
    pub jobs: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            batch_size: DEFAULT_BATCH_SIZE,
            jobs: 1,
        }
    }
}

fn batched<T: Sync, R: Send>(
    items: &[T],
    options: &EvalOptions,
    call: impl Fn(&[T]) -> Result<Vec<R>, BackendError> + Sync,
) -> Result<Vec<R>, BackendError> {
    let chunks: Vec<&[T]> = items.chunks(options.batch_size.max(1)).collect();
    let mut out = Vec::with_capacity(items.len());
    for result in parallel::map_ordered(&chunks, options.jobs, |c| call(c)) {
        out.extend(result?);
    }
    Ok(out)
}

fn predict_spans(corpus: &Corpus, backend: &Client, options: &EvalOptions) -> Result<Vec<Vec<EntitySpan>>, EvalError> {
    let forms: Vec<Vec<String>> = corpus.sentences().iter().map(|s| s.forms()).collect();
    let tags = batched(&forms, options, |batch| backend.ner_predict(batch))?;
    tags.iter().map(|t| Ok(extract_spans(t)?)).collect()
}

fn embed_corpus(corpus: &Corpus, backend: &Client, options: &EvalOptions) -> Result<Vec<Vec<f64>>, EvalError> {
    let texts: Vec<String> = corpus.sentences().iter().map(|s| s.text()).collect();
    Ok(batched(&texts, options, |batch| backend.embed(batch))?)
}

/// Per-sentence cosine similarity between original and perturbed text.
pub fn similarity_scores(
    original: &Corpus,
    adversarial: &Corpus,
    backend: &Client,
    options: &EvalOptions,
) -> Result<Vec<f64>, EvalError> {
    check_aligned(original, adversarial, "adversarial")?;
    let a = embed_corpus(original, backend, options)?;
    let b = embed_corpus(adversarial, backend, options)?;
    Ok(a.iter().zip(&b).map(|(u, v)| cosine(u, v)).collect())
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        1.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub id: String,
    pub similarity: f64,
    /// Tokens whose FORM differs from the original.
    pub replaced_count: usize,
    pub predicted_original: Vec<EntitySpan>,
    pub predicted_adversarial: Vec<EntitySpan>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub original_corpus: String,
    pub adversarial_corpus: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<AttackConfig>,
    pub ner_model: String,
    pub embed_model: String,
    pub f1_original: f64,
    pub f1_adversarial: f64,
    /// `f1_original - f1_adversarial`.
    pub delta_perf: f64,
    /// Mean per-sentence similarity; 1 for an empty corpus.
    pub mean_similarity: f64,
    pub prf_original: Prf,
    pub prf_adversarial: Prf,
    pub sentences: Vec<SentenceRecord>,
}

impl AttackReport {
    /// The one-line summary printed by the command-line tool.
    pub fn summary_line(&self) -> String {
        format!(
            "Sim={:.4} F1_orig={:.4} F1_adv={:.4} dPerf={:.4}",
            self.mean_similarity, self.f1_original, self.f1_adversarial, self.delta_perf
        )
    }
}

/// Scores perturbed corpora against one original corpus. Victim predictions
/// and embeddings of the original are computed once, so evaluating many
/// attack outputs (a sweep) costs one pass per output.
pub struct Evaluator<'a> {
    original: &'a Corpus,
    backend: &'a Client,
    options: EvalOptions,
    gold: Vec<Vec<EntitySpan>>,
    predicted_original: Vec<Vec<EntitySpan>>,
    prf_original: Prf,
    original_vectors: Vec<Vec<f64>>,
}

impl<'a> Evaluator<'a> {
    /// `gold` defaults to the NER column of `original`.
    pub fn new(
        original: &'a Corpus,
        gold: Option<&Corpus>,
        backend: &'a Client,
        options: EvalOptions,
    ) -> Result<Self, EvalError> {
        for cap in [Capability::NerPredict, Capability::Embed] {
            if !backend.supports(cap) {
                return Err(EvalError::MissingCapability(cap));
            }
        }
        let gold_corpus = gold.unwrap_or(original);
        check_aligned(original, gold_corpus, "gold")?;
        let gold: Vec<Vec<EntitySpan>> = gold_corpus.sentences().iter().map(|s| s.spans()).collect();
        let predicted_original = predict_spans(original, backend, &options)?;
        let prf_original = span_prf(&gold, &predicted_original);
        let original_vectors = embed_corpus(original, backend, &options)?;
        Ok(Evaluator {
            original,
            backend,
            options,
            gold,
            predicted_original,
            prf_original,
            original_vectors,
        })
    }

    pub fn prf_original(&self) -> Prf {
        self.prf_original
    }

    pub fn evaluate(&self, adversarial: &Corpus, config: Option<&AttackConfig>) -> Result<AttackReport, EvalError> {
        check_aligned(self.original, adversarial, "adversarial")?;
        let predicted = predict_spans(adversarial, self.backend, &self.options)?;
        let prf_adversarial = span_prf(&self.gold, &predicted);
        let vectors = embed_corpus(adversarial, self.backend, &self.options)?;
        let similarities: Vec<f64> = self
            .original_vectors
            .iter()
            .zip(&vectors)
            .map(|(u, v)| cosine(u, v))
            .collect();
        let sentences = self
            .original
            .sentences()
            .iter()
            .zip(adversarial.sentences())
            .enumerate()
            .map(|(i, (o, a))| SentenceRecord {
                id: o.id().to_string(),
                similarity: similarities[i],
                replaced_count: o
                    .tokens()
                    .iter()
                    .zip(a.tokens())
                    .filter(|(x, y)| x.form != y.form)
                    .count(),
                predicted_original: self.predicted_original[i].clone(),
                predicted_adversarial: predicted[i].clone(),
            })
            .collect();
        let model = |cap| self.backend.model(cap).unwrap_or("unknown").to_string();
        Ok(AttackReport {
            original_corpus: self.original.origin().to_string(),
            adversarial_corpus: adversarial.origin().to_string(),
            config: config.cloned(),
            ner_model: model(Capability::NerPredict),
            embed_model: model(Capability::Embed),
            f1_original: self.prf_original.f1,
            f1_adversarial: prf_adversarial.f1,
            delta_perf: self.prf_original.f1 - prf_adversarial.f1,
            mean_similarity: mean(&similarities),
            prf_original: self.prf_original,
            prf_adversarial,
            sentences,
        })
    }
}

/// One-shot evaluation of a single perturbed corpus.
pub fn evaluate_attack(
    original: &Corpus,
    adversarial: &Corpus,
    gold: Option<&Corpus>,
    backend: &Client,
    options: EvalOptions,
) -> Result<AttackReport, EvalError> {
    Evaluator::new(original, gold, backend, options)?.evaluate(adversarial, None)
}

/// One row of a budget curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub method: String,
    pub replacer: String,
    pub budget: usize,
    pub similarity: f64,
    pub f1_original: f64,
    pub f1_adversarial: f64,
    pub delta_perf: f64,
    /// Replacements actually made across the corpus.
    pub replacements: usize,
}

pub const CURVE_HEADER: &str = "method\treplacer\tbudget\tsim\tf1_orig\tf1_adv\tdelta_perf\treplacements";

/// Tab-separated table with a header line.
pub fn render_curve_tsv(rows: &[CurveRow]) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{}",
            r.method, r.replacer, r.budget, r.similarity, r.f1_original, r.f1_adversarial, r.delta_perf, r.replacements
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prf_conventions() {
        let p = Prf::from_counts(0, 0, 0);
        assert_eq!((p.precision, p.recall, p.f1), (1.0, 1.0, 1.0));
        let p = Prf::from_counts(0, 2, 0);
        assert_eq!((p.precision, p.recall, p.f1), (0.0, 0.0, 0.0));
        let p = Prf::from_counts(0, 0, 3);
        assert_eq!((p.precision, p.recall, p.f1), (0.0, 0.0, 0.0));
        let p = Prf::from_counts(1, 0, 1);
        assert_eq!((p.precision, p.recall), (1.0, 0.5));
        assert!((p.f1 - 0.6667).abs() < 1e-4);
    }

    #[test]
    fn f1_on_tags() {
        let gold = vec![vec!["B-PER", "I-PER", "O", "B-LOC"]];
        let pred = vec![vec!["B-PER", "I-PER", "O", "O"]];
        let p = f1_score(&gold, &pred).unwrap();
        assert_eq!((p.tp, p.fp, p.fn_), (1, 0, 1));
        let bad = vec![vec!["B-PER"]];
        assert!(matches!(f1_score(&gold, &bad), Err(EvalError::Shape(_))));
    }

    #[test]
    fn cosine_edges() {
        assert_eq!(cosine(&[0.1, 0.7, 0.3], &[0.1, 0.7, 0.3]), 1.0);
        assert_eq!(cosine(&[0.0, 0.0], &[0.0, 0.0]), 1.0);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 0.0]), 0.0);
        assert_eq!(cosine(&[1.0, 0.0], &[-2.0, 0.0]), -1.0);
        assert!((cosine(&[1.0, 1.0, 1.0, 1.0], &[1.0, 1.0, 1.0, 0.0]) - 3.0 / 12f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn prf_serializes_fn_field() {
        let json = serde_json::to_value(Prf::from_counts(1, 2, 3)).unwrap();
        assert_eq!(json["fn"], 3);
    }
}
