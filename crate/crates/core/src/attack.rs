//! Selection followed by replacement under a per-sentence budget.
//!
//! The ranking is requested `budget × overshoot` deep so that candidates the
//! replacer rejects can be back-filled by the next ranked ones. Only the FORM
//! column changes; NER labels are carried over as gold.

use crate::corpus::{Corpus, Sentence};
use crate::parallel;
use crate::replacement::{self, ReplaceError, Replacement, ReplacerConfig};
use crate::selection::{self, ImportanceScores, SelectionError, SelectionMethod};
use crate::wordnet::WordNetStore;
use nerperturb_backend::{BackendError, Capability, Client};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Default number of perturbed words per sentence.
pub const DEFAULT_BUDGET: usize = 5;
pub const DEFAULT_OVERSHOOT: usize = 3;
pub const DEFAULT_MLM_TOP_K: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReplacerKind {
    Synonym,
    Mlm,
}

impl ReplacerKind {
    pub const ALL: [ReplacerKind; 2] = [ReplacerKind::Synonym, ReplacerKind::Mlm];

    pub fn as_str(&self) -> &'static str {
        match self {
            ReplacerKind::Synonym => "synonym",
            ReplacerKind::Mlm => "mlm",
        }
    }
}

impl fmt::Display for ReplacerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReplacerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ReplacerKind::ALL
            .into_iter()
            .find(|r| r.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown replacer `{s}` (expected synonym or mlm)"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackConfig {
    pub method: SelectionMethod,
    pub replacer: ReplacerKind,
    /// Maximum number of replaced words per sentence.
    pub budget: usize,
    pub seed: u64,
    pub mlm_top_k: usize,
    /// Ranking depth multiplier, at least 1.
    pub overshoot: usize,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            method: SelectionMethod::Rdm,
            replacer: ReplacerKind::Synonym,
            budget: DEFAULT_BUDGET,
            seed: 0,
            mlm_top_k: DEFAULT_MLM_TOP_K,
            overshoot: DEFAULT_OVERSHOOT,
        }
    }
}

impl AttackConfig {
    pub fn validate(&self) -> Result<(), AttackError> {
        if self.overshoot == 0 {
            return Err(AttackError::InvalidConfig("overshoot must be at least 1".into()));
        }
        if self.mlm_top_k == 0 {
            return Err(AttackError::InvalidConfig("mlm_top_k must be at least 1".into()));
        }
        Ok(())
    }

    fn replacer_config(&self) -> ReplacerConfig {
        ReplacerConfig {
            mlm_top_k: self.mlm_top_k,
            seed: self.seed,
            ..ReplacerConfig::default()
        }
    }

    /// Capabilities a backend must offer to run this configuration.
    pub fn required_capabilities(&self) -> Vec<Capability> {
        let mut caps = Vec::new();
        if self.method == SelectionMethod::Gdt {
            caps.push(Capability::Importance);
        }
        if self.replacer == ReplacerKind::Mlm {
            caps.push(Capability::MaskFill);
        }
        caps
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversarialExample {
    pub original: Sentence,
    pub perturbed: Sentence,
    pub replacements: Vec<Replacement>,
    pub config: AttackConfig,
}

#[derive(Debug, Error)]
pub enum AttackError {
    #[error("invalid attack configuration: {0}")]
    InvalidConfig(String),

    #[error("synonym replacement needs a WordNet store")]
    MissingWordNet,

    #[error("{0} needs a model backend offering `{1}`")]
    MissingBackend(String, Capability),

    #[error(transparent)]
    Selection(#[from] SelectionError),

    #[error(transparent)]
    Replace(#[from] ReplaceError),

    #[error("importance request failed for sentence `{sentence_id}`: {source}")]
    Importance {
        sentence_id: String,
        #[source]
        source: BackendError,
    },

    #[error("attack aborted at sentence `{sentence_id}` after {completed} completed sentences: {source}")]
    Aborted {
        sentence_id: String,
        completed: usize,
        #[source]
        source: Box<AttackError>,
    },
}

/// Model-side resources an attack may need.
#[derive(Debug, Clone, Copy, Default)]
pub struct AttackResources<'a> {
    pub wordnet: Option<&'a WordNetStore>,
    pub backend: Option<&'a Client>,
}

impl<'a> AttackResources<'a> {
    pub fn new(wordnet: Option<&'a WordNetStore>, backend: Option<&'a Client>) -> Self {
        AttackResources { wordnet, backend }
    }

    /// Fails early when the configuration needs something that is missing.
    pub fn check(&self, config: &AttackConfig) -> Result<(), AttackError> {
        if config.replacer == ReplacerKind::Synonym && self.wordnet.is_none() {
            return Err(AttackError::MissingWordNet);
        }
        for cap in config.required_capabilities() {
            match self.backend {
                Some(b) if b.supports(cap) => {}
                _ => {
                    let what = match cap {
                        Capability::Importance => "GDT selection",
                        _ => "MLM replacement",
                    };
                    return Err(AttackError::MissingBackend(what.to_string(), cap));
                }
            }
        }
        Ok(())
    }
}

fn importance_scores(sentence: &Sentence, backend: &Client) -> Result<ImportanceScores, AttackError> {
    let scores = backend
        .importance(&sentence.forms(), &sentence.entity_indices())
        .map_err(|source| AttackError::Importance {
            sentence_id: sentence.id().to_string(),
            source,
        })?;
    Ok(ImportanceScores {
        sentence_id: sentence.id().to_string(),
        scores,
    })
}

/// Attacks one sentence: ranks candidates, then tries them in rank order until
/// `budget` replacements succeed or the ranking is exhausted.
pub fn attack_sentence(
    sentence: &Sentence,
    config: &AttackConfig,
    resources: AttackResources<'_>,
) -> Result<AdversarialExample, AttackError> {
    config.validate()?;
    resources.check(config)?;
    let unchanged = |replacements| AdversarialExample {
        original: sentence.clone(),
        perturbed: sentence.clone(),
        replacements,
        config: config.clone(),
    };
    if config.budget == 0 {
        return Ok(unchanged(Vec::new()));
    }
    let depth = config.budget.saturating_mul(config.overshoot);
    let scores = match config.method {
        SelectionMethod::Gdt => {
            if selection::non_entity_indices(sentence).is_empty() {
                return Ok(unchanged(Vec::new()));
            }
            let backend = resources.backend.expect("checked above");
            Some(importance_scores(sentence, backend)?)
        }
        _ => None,
    };
    let ranking = selection::select(config.method, sentence, depth, config.seed, scores.as_ref())?;

    let mut replacements = Vec::new();
    let mut perturbed = sentence.clone();
    match config.replacer {
        ReplacerKind::Synonym => {
            let store = resources.wordnet.expect("checked above");
            for &index in &ranking.ranked_indices {
                if replacements.len() == config.budget {
                    break;
                }
                if let Some(r) = replacement::synonym_replace(sentence, index, store, config.seed)? {
                    perturbed = perturbed.with_form(index, &r.substitute);
                    replacements.push(r);
                }
            }
        }
        ReplacerKind::Mlm => {
            let backend = resources.backend.expect("checked above");
            let replacer = config.replacer_config();
            replacement::validate_indices(sentence, &ranking.ranked_indices)?;
            for &index in &ranking.ranked_indices {
                if replacements.len() == config.budget {
                    break;
                }
                if let Some(r) = replacement::mlm_replace_one(&mut perturbed, index, backend, &replacer)? {
                    replacements.push(r);
                }
            }
        }
    }
    Ok(AdversarialExample {
        original: sentence.clone(),
        perturbed,
        replacements,
        config: config.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackOutput {
    pub corpus: Corpus,
    pub examples: Vec<AdversarialExample>,
}

/// Attacks every sentence, on up to `jobs` threads. Output order matches the
/// input and does not depend on `jobs`. The first failing sentence (in input
/// order) aborts the run.
pub fn attack_corpus(
    corpus: &Corpus,
    config: &AttackConfig,
    resources: AttackResources<'_>,
    jobs: usize,
) -> Result<AttackOutput, AttackError> {
    config.validate()?;
    resources.check(config)?;
    let results = parallel::map_ordered(corpus.sentences(), jobs, |s| attack_sentence(s, config, resources));
    let mut examples = Vec::with_capacity(results.len());
    for (completed, result) in results.into_iter().enumerate() {
        match result {
            Ok(e) => examples.push(e),
            Err(source) => {
                return Err(AttackError::Aborted {
                    sentence_id: corpus.sentences()[completed].id().to_string(),
                    completed,
                    source: Box::new(source),
                })
            }
        }
    }
    let perturbed = examples.iter().map(|e| e.perturbed.clone()).collect();
    let corpus =
        Corpus::new(format!("adversarial:{}", corpus.origin()), perturbed).expect("ids are unique in the input corpus");
    Ok(AttackOutput { corpus, examples })
}

/// One line of the replacement log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplacementRecord {
    pub sentence_id: String,
    pub index: usize,
    pub original: String,
    pub substitute: String,
    pub source: replacement::ReplacementSource,
    pub detail: String,
}

/// Replacement log as JSON Lines, one record per replacement, in corpus order.
pub fn replacement_log(examples: &[AdversarialExample]) -> String {
    let mut out = String::new();
    for e in examples {
        for r in &e.replacements {
            let record = ReplacementRecord {
                sentence_id: e.original.id().to_string(),
                index: r.index,
                original: r.original.clone(),
                substitute: r.substitute.clone(),
                source: r.source,
                detail: r.detail.clone(),
            };
            out.push_str(&serde_json::to_string(&record).expect("records serialize"));
            out.push('\n');
        }
    }
    out
}

pub fn parse_replacement_log(text: &str) -> Result<Vec<ReplacementRecord>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}
