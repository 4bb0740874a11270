//! Candidate replacement: a single-token substitute for each selected index,
//! either a WordNet synonym or a masked-language-model fill.

use crate::corpus::Sentence;
use crate::seed;
use crate::wordnet::{map_pos, WordNetStore};
use nerperturb_backend::protocol::MaskFillRequest;
use nerperturb_backend::{BackendError, Client};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReplacementSource {
    Synonym,
    Mlm,
}

impl fmt::Display for ReplacementSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReplacementSource::Synonym => "synonym",
            ReplacementSource::Mlm => "mlm",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Replacement {
    pub index: usize,
    pub original: String,
    pub substitute: String,
    pub source: ReplacementSource,
    /// Synset (`wn:n:02958343`) or fill rank and score (`rank=0 score=1`).
    pub detail: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CasePolicy {
    /// See [`apply_case`].
    #[default]
    Mirror,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplacerConfig {
    /// Fill candidates requested per mask.
    pub mlm_top_k: usize,
    pub seed: u64,
    pub case_policy: CasePolicy,
}

impl Default for ReplacerConfig {
    fn default() -> Self {
        ReplacerConfig {
            mlm_top_k: 10,
            seed: 0,
            case_policy: CasePolicy::Mirror,
        }
    }
}

#[derive(Debug, Error)]
pub enum ReplaceError {
    #[error("sentence `{sentence_id}`: token {index} is an entity token")]
    EntityIndex { sentence_id: String, index: usize },

    #[error("sentence `{sentence_id}`: index {index} out of range")]
    OutOfRange { sentence_id: String, index: usize },

    #[error("sentence `{sentence_id}`: index {index} listed twice")]
    DuplicateIndex { sentence_id: String, index: usize },

    #[error("mlm_top_k must be at least 1")]
    InvalidTopK,

    #[error("mask_fill failed for sentence `{sentence_id}` (mask {}): {source}", request.mask_index)]
    Backend {
        sentence_id: String,
        request: Box<MaskFillRequest>,
        #[source]
        source: BackendError,
    },
}

fn is_all_upper(s: &str) -> bool {
    s.chars().any(char::is_alphabetic) && !s.chars().any(char::is_lowercase)
}

fn is_title(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(char::is_uppercase) && !chars.any(char::is_uppercase)
}

/// Gives `substitute` the casing pattern of `original`: all-uppercase,
/// title case, or left unchanged.
pub fn apply_case(original: &str, substitute: &str) -> String {
    if is_all_upper(original) {
        substitute.to_uppercase()
    } else if is_title(original) {
        let mut chars = substitute.chars();
        match chars.next() {
            Some(first) => first.to_uppercase().chain(chars.flat_map(char::to_lowercase)).collect(),
            None => String::new(),
        }
    } else {
        substitute.to_string()
    }
}

fn check_index(sentence: &Sentence, index: usize) -> Result<(), ReplaceError> {
    let token = sentence.tokens().get(index).ok_or_else(|| ReplaceError::OutOfRange {
        sentence_id: sentence.id().to_string(),
        index,
    })?;
    if token.is_entity() {
        return Err(ReplaceError::EntityIndex {
            sentence_id: sentence.id().to_string(),
            index,
        });
    }
    Ok(())
}

/// Draws one synonym uniformly from the POS-matched WordNet pool, seeded by
/// `(seed, sentence id, index)`. `None` when the POS has no WordNet category
/// or the pool is empty.
pub fn synonym_replace(
    sentence: &Sentence,
    index: usize,
    store: &WordNetStore,
    seed: u64,
) -> Result<Option<Replacement>, ReplaceError> {
    check_index(sentence, index)?;
    let token = &sentence.tokens()[index];
    let Some(pos) = map_pos(&token.upos) else {
        return Ok(None);
    };
    let original_folded = token.form.to_lowercase();
    let pool: Vec<_> = store
        .synonyms_with_source(&original_folded, pos)
        .into_iter()
        .filter(|s| s.lemma.to_lowercase() != original_folded)
        .collect();
    if pool.is_empty() {
        return Ok(None);
    }
    let mut rng = seed::rng(seed::token_seed(seed, sentence.id(), index));
    let pick = &pool[rng.random_range(0..pool.len())];
    Ok(Some(Replacement {
        index,
        original: token.form.clone(),
        substitute: apply_case(&token.form, &pick.lemma),
        source: ReplacementSource::Synonym,
        detail: format!("wn:{}:{:08}", pos.code(), pick.offset),
    }))
}

/// Whether a fill candidate is an acceptable replacement for `original`.
pub fn acceptable_fill(candidate: &str, original: &str) -> bool {
    !candidate.is_empty()
        && candidate.chars().all(|c| c.is_alphanumeric() || c == '-')
        && candidate.chars().any(char::is_alphanumeric)
        && candidate.to_lowercase() != original.to_lowercase()
}

/// Masks one token of `working` and applies the best acceptable fill in
/// place. Tokens without a letter or digit (punctuation, symbols) are left
/// alone without querying the backend.
pub(crate) fn mlm_replace_one(
    working: &mut Sentence,
    index: usize,
    backend: &Client,
    config: &ReplacerConfig,
) -> Result<Option<Replacement>, ReplaceError> {
    let tokens = working.forms();
    let original = tokens[index].clone();
    if !original.chars().any(char::is_alphanumeric) {
        return Ok(None);
    }
    let candidates = backend
        .mask_fill(&tokens, index, config.mlm_top_k)
        .map_err(|source| ReplaceError::Backend {
            sentence_id: working.id().to_string(),
            request: Box::new(MaskFillRequest {
                tokens: tokens.clone(),
                mask_index: index,
                top_k: config.mlm_top_k,
            }),
            source,
        })?;
    let accepted = candidates
        .iter()
        .enumerate()
        .find(|(_, c)| acceptable_fill(c.token.trim(), &original));
    Ok(accepted.map(|(rank, c)| {
        let substitute = apply_case(&original, c.token.trim());
        *working = working.with_form(index, &substitute);
        Replacement {
            index,
            original,
            substitute,
            source: ReplacementSource::Mlm,
            detail: format!("rank={rank} score={}", c.score),
        }
    }))
}

pub(crate) fn validate_indices(sentence: &Sentence, indices: &[usize]) -> Result<(), ReplaceError> {
    for (pos, &i) in indices.iter().enumerate() {
        check_index(sentence, i)?;
        if indices[..pos].contains(&i) {
            return Err(ReplaceError::DuplicateIndex {
                sentence_id: sentence.id().to_string(),
                index: i,
            });
        }
    }
    Ok(())
}

/// Masks each index in turn (in the given order) against the working
/// sentence, so earlier replacements are visible as context, and accepts the
/// best-scoring fill that is a single plain word different from the original.
/// Indices with no acceptable fill, and punctuation, are skipped.
pub fn mlm_replace(
    sentence: &Sentence,
    indices: &[usize],
    backend: &Client,
    config: &ReplacerConfig,
) -> Result<Vec<Replacement>, ReplaceError> {
    if config.mlm_top_k == 0 {
        return Err(ReplaceError::InvalidTopK);
    }
    validate_indices(sentence, indices)?;
    let mut working = sentence.clone();
    let mut out = Vec::new();
    for &index in indices {
        if let Some(r) = mlm_replace_one(&mut working, index, backend, config)? {
            out.push(r);
        }
    }
    Ok(out)
}
