//! Context-aware adversarial perturbation of named-entity-recognition data.
//!
//! A sentence is attacked in two stages. A *selection* method ranks the
//! non-entity tokens most likely to influence the victim's entity
//! predictions (random, part-of-speech, dependency, chunk or
//! gradient-importance based). A *replacement* method then swaps the top
//! candidates for a WordNet synonym or a masked-language-model fill. Entity
//! tokens and the NER column are never modified, so the original labels
//! remain gold for the perturbed text.
//!
//! Attacks are judged by the cosine similarity between original and perturbed
//! sentence embeddings and by the drop in the victim's entity-level F1.

pub mod attack;
pub mod corpus;
pub mod evaluation;
pub mod parallel;
pub mod replacement;
pub mod seed;
pub mod selection;
pub mod sweep;
pub mod wordnet;

pub use attack::{
    attack_corpus, attack_sentence, replacement_log, AdversarialExample, AttackConfig, AttackError, AttackOutput,
    AttackResources, ReplacerKind,
};
pub use corpus::{
    corpus_stats, extract_spans, parse_conll, read_conll, serialize_conll, Corpus, CorpusError, CorpusStats,
    EntitySpan, Sentence, Token,
};
pub use evaluation::{
    cosine, evaluate_attack, f1_score, render_curve_tsv, AttackReport, CurveRow, EvalError, EvalOptions, Evaluator, Prf,
};
pub use replacement::{mlm_replace, synonym_replace, Replacement, ReplacementSource, ReplacerConfig};
pub use selection::{select, CandidateRanking, ImportanceScores, SelectionError, SelectionMethod};
pub use sweep::{run_sweep, SweepError, SweepPlan};
pub use wordnet::{find_wordnet_dir, load_wordnet, WnPos, WordNetError, WordNetStore};
