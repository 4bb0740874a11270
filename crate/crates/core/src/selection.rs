//! Candidate selection: which context (non-entity) words to perturb.
//!
//! Every selector returns at most `k` distinct indices of tokens tagged `O`,
//! most informative first. Entity tokens are never eligible.

use crate::corpus::Sentence;
use crate::seed;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMethod {
    /// Random non-entity words.
    Rdm,
    /// Content words (ADJ, NOUN, ADV, VERB) nearest to an entity.
    Pst,
    /// Words within two dependency arcs of an entity.
    Dep,
    /// Words in noun chunks nearest to an entity.
    Chk,
    /// Words with the highest backend importance scores.
    Gdt,
}

impl SelectionMethod {
    pub const ALL: [SelectionMethod; 5] = [
        SelectionMethod::Rdm,
        SelectionMethod::Pst,
        SelectionMethod::Dep,
        SelectionMethod::Chk,
        SelectionMethod::Gdt,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SelectionMethod::Rdm => "rdm",
            SelectionMethod::Pst => "pst",
            SelectionMethod::Dep => "dep",
            SelectionMethod::Chk => "chk",
            SelectionMethod::Gdt => "gdt",
        }
    }
}

impl fmt::Display for SelectionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.as_str().to_uppercase())
    }
}

impl FromStr for SelectionMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SelectionMethod::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown selection method `{s}` (expected rdm, pst, dep, chk or gdt)"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateRanking {
    pub sentence_id: String,
    pub ranked_indices: Vec<usize>,
    pub method: SelectionMethod,
}

/// Per-token importance for gradient-based selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceScores {
    pub sentence_id: String,
    pub scores: Vec<f64>,
}

#[derive(Debug, Error, PartialEq)]
pub enum SelectionError {
    #[error("sentence `{sentence_id}` has {tokens} tokens but {scores} importance scores")]
    LengthMismatch {
        sentence_id: String,
        tokens: usize,
        scores: usize,
    },
    #[error("sentence `{sentence_id}`: importance score at {index} is not finite")]
    NonFinite { sentence_id: String, index: usize },
    #[error("{0} selection needs importance scores")]
    MissingScores(SelectionMethod),
}

fn ranking(sentence: &Sentence, method: SelectionMethod, mut indices: Vec<usize>, k: usize) -> CandidateRanking {
    indices.truncate(k);
    CandidateRanking {
        sentence_id: sentence.id().to_string(),
        ranked_indices: indices,
        method,
    }
}

/// Indices of tokens tagged `O`, ascending.
pub fn non_entity_indices(sentence: &Sentence) -> Vec<usize> {
    sentence
        .tokens()
        .iter()
        .filter(|t| !t.is_entity())
        .map(|t| t.index)
        .collect()
}

/// Token distance from each position to the nearest entity token.
fn entity_distances(sentence: &Sentence) -> Vec<Option<usize>> {
    let entities = sentence.entity_indices();
    (0..sentence.len())
        .map(|i| entities.iter().map(|&e| i.abs_diff(e)).min())
        .collect()
}

/// Uniform sample without replacement, seeded by `(seed, sentence id)`.
pub fn select_random(sentence: &Sentence, k: usize, seed: u64) -> CandidateRanking {
    let mut eligible = non_entity_indices(sentence);
    let take = k.min(eligible.len());
    let mut rng = seed::rng(seed::sentence_seed(seed, sentence.id()));
    seed::partial_shuffle(&mut eligible, take, &mut rng);
    ranking(sentence, SelectionMethod::Rdm, eligible, take)
}

const CONTENT_POS: [&str; 4] = ["ADJ", "NOUN", "ADV", "VERB"];

/// Content words ranked by distance to the nearest entity token (by index
/// when the sentence has no entities), ties left to right.
pub fn select_pos(sentence: &Sentence, k: usize) -> CandidateRanking {
    let distances = entity_distances(sentence);
    let mut eligible: Vec<usize> = sentence
        .tokens()
        .iter()
        .filter(|t| !t.is_entity() && CONTENT_POS.contains(&t.upos.as_str()))
        .map(|t| t.index)
        .collect();
    eligible.sort_by_key(|&i| (distances[i].unwrap_or(0), i));
    ranking(sentence, SelectionMethod::Pst, eligible, k)
}

/// Undirected dependency-graph distance to the nearest entity token.
fn dependency_distances(sentence: &Sentence) -> Vec<Option<usize>> {
    let n = sentence.len();
    let mut adjacent = vec![Vec::new(); n];
    for t in sentence.tokens() {
        if t.head > 0 {
            adjacent[t.index].push(t.head - 1);
            adjacent[t.head - 1].push(t.index);
        }
    }
    let mut dist = vec![None; n];
    let mut queue = VecDeque::new();
    for e in sentence.entity_indices() {
        dist[e] = Some(0);
        queue.push_back(e);
    }
    while let Some(u) = queue.pop_front() {
        let d = dist[u].expect("queued nodes have a distance");
        for &v in &adjacent[u] {
            if dist[v].is_none() {
                dist[v] = Some(d + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Context words one dependency arc from an entity (tier 1), then two arcs
/// (tier 2); within a tier by token distance to the nearest entity, ties
/// left to right.
pub fn select_dep(sentence: &Sentence, k: usize) -> CandidateRanking {
    let dep = dependency_distances(sentence);
    let linear = entity_distances(sentence);
    let mut eligible: Vec<(usize, usize, usize)> = non_entity_indices(sentence)
        .into_iter()
        .filter_map(|i| match dep[i] {
            Some(tier @ (1 | 2)) => Some((tier, linear[i].unwrap_or(0), i)),
            _ => None,
        })
        .collect();
    eligible.sort_unstable();
    ranking(
        sentence,
        SelectionMethod::Dep,
        eligible.into_iter().map(|(_, _, i)| i).collect(),
        k,
    )
}

/// Chunks decoded from the CHUNK column, leniently: `B-X` opens, `I-X`
/// continues an open `X` chunk (or opens one), anything else is outside.
fn chunks(sentence: &Sentence) -> Vec<(usize, usize, String)> {
    let mut out = Vec::new();
    let mut open: Option<(usize, &str)> = None;
    for (i, t) in sentence.tokens().iter().enumerate() {
        let (prefix, ctype) = match t.chunk.split_once('-') {
            Some((p @ ("B" | "I"), c)) if !c.is_empty() => (p, c),
            _ => {
                if let Some((start, c)) = open.take() {
                    out.push((start, i, c.to_string()));
                }
                continue;
            }
        };
        match open {
            Some((_, c)) if prefix == "I" && c == ctype => {}
            _ => {
                if let Some((start, c)) = open.take() {
                    out.push((start, i, c.to_string()));
                }
                open = Some((i, ctype));
            }
        }
    }
    if let Some((start, c)) = open {
        out.push((start, sentence.len(), c.to_string()));
    }
    out
}

/// Context words inside NP chunks; chunks ranked by their minimum token
/// distance to an entity (0 when the chunk contains one), members left to
/// right.
pub fn select_chunk(sentence: &Sentence, k: usize) -> CandidateRanking {
    let distances = entity_distances(sentence);
    let tokens = sentence.tokens();
    let mut nps: Vec<(usize, usize, usize)> = chunks(sentence)
        .into_iter()
        .filter(|(_, _, c)| c == "NP")
        .filter_map(|(start, end, _)| (start..end).filter_map(|i| distances[i]).min().map(|d| (d, start, end)))
        .collect();
    nps.sort_unstable();
    let eligible = nps
        .into_iter()
        .flat_map(|(_, start, end)| (start..end).filter(|&i| !tokens[i].is_entity()))
        .collect();
    ranking(sentence, SelectionMethod::Chk, eligible, k)
}

/// Context words by descending importance, ties left to right.
pub fn select_gradient(
    sentence: &Sentence,
    k: usize,
    scores: &ImportanceScores,
) -> Result<CandidateRanking, SelectionError> {
    if scores.scores.len() != sentence.len() {
        return Err(SelectionError::LengthMismatch {
            sentence_id: sentence.id().to_string(),
            tokens: sentence.len(),
            scores: scores.scores.len(),
        });
    }
    if let Some(index) = scores.scores.iter().position(|s| !s.is_finite()) {
        return Err(SelectionError::NonFinite {
            sentence_id: sentence.id().to_string(),
            index,
        });
    }
    let mut eligible = non_entity_indices(sentence);
    eligible.sort_by(|&a, &b| scores.scores[b].total_cmp(&scores.scores[a]).then(a.cmp(&b)));
    Ok(ranking(sentence, SelectionMethod::Gdt, eligible, k))
}

/// Dispatches to the selector for `method`. `scores` is required for GDT and
/// ignored otherwise; `seed` only matters for RDM.
pub fn select(
    method: SelectionMethod,
    sentence: &Sentence,
    k: usize,
    seed: u64,
    scores: Option<&ImportanceScores>,
) -> Result<CandidateRanking, SelectionError> {
    Ok(match method {
        SelectionMethod::Rdm => select_random(sentence, k, seed),
        SelectionMethod::Pst => select_pos(sentence, k),
        SelectionMethod::Dep => select_dep(sentence, k),
        SelectionMethod::Chk => select_chunk(sentence, k),
        SelectionMethod::Gdt => {
            let scores = scores.ok_or(SelectionError::MissingScores(method))?;
            select_gradient(sentence, k, scores)?
        }
    })
}
