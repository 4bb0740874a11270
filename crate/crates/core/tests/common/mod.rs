//! Fixtures and independent reference implementations shared by the
//! integration tests. The oracles here deliberately avoid the library's own
//! code paths.

#![allow(dead_code)]

use nerperturb_backend::{Client, StubConfig, StubService};
use nerperturb_core::{read_conll, Corpus, EntitySpan};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

pub fn toy_corpus() -> Corpus {
    read_conll(&fixture("toy/toy.conll")).expect("toy corpus parses")
}

pub fn toy_lexicon() -> BTreeMap<String, String> {
    let text = std::fs::read_to_string(fixture("toy/lexicon.tsv")).unwrap();
    StubConfig::parse_lexicon(&text).unwrap()
}

pub fn stub_client(config: StubConfig) -> Client {
    Client::in_process(Arc::new(StubService::new(config).unwrap())).unwrap()
}

/// Stub whose NER predictions reproduce the toy gold labels.
pub fn toy_stub() -> Client {
    stub_client(StubConfig {
        lexicon: toy_lexicon(),
        ..StubConfig::default()
    })
}

/// Every `(start, end, type)` that satisfies the conlleval chunk definition,
/// found by checking all candidate intervals.
pub fn brute_force_spans(tags: &[String]) -> BTreeSet<EntitySpan> {
    let split = |t: &str| -> Option<(char, String)> {
        if t == "O" {
            None
        } else {
            Some((t.chars().next().unwrap(), t[2..].to_string()))
        }
    };
    let parsed: Vec<Option<(char, String)>> = tags.iter().map(|t| split(t)).collect();
    let type_at = |i: usize| parsed[i].as_ref().map(|(_, ty)| ty.as_str());
    let mut out = BTreeSet::new();
    let n = tags.len();
    for start in 0..n {
        let Some((prefix, ty)) = &parsed[start] else { continue };
        let opens = *prefix == 'B' || start == 0 || type_at(start - 1) != Some(ty.as_str());
        if !opens {
            continue;
        }
        for end in start + 1..=n {
            let inside = (start + 1..end).all(|i| matches!(&parsed[i], Some(('I', t)) if t == ty));
            let closed = end == n || !matches!(&parsed[end], Some(('I', t)) if t == ty);
            if inside && closed {
                out.insert(EntitySpan::new(start, end, ty.clone()));
            }
        }
    }
    out
}

/// Micro precision/recall/F1 over `(sentence, span)` sets, by set algebra.
pub fn set_f1(gold: &[Vec<String>], pred: &[Vec<String>]) -> (f64, f64, f64) {
    let collect = |corpus: &[Vec<String>]| -> HashSet<(usize, EntitySpan)> {
        corpus
            .iter()
            .enumerate()
            .flat_map(|(i, tags)| brute_force_spans(tags).into_iter().map(move |s| (i, s)))
            .collect()
    };
    let g = collect(gold);
    let p = collect(pred);
    let inter = g.intersection(&p).count() as f64;
    if g.is_empty() && p.is_empty() {
        return (1.0, 1.0, 1.0);
    }
    let precision = if p.is_empty() { 0.0 } else { inter / p.len() as f64 };
    let recall = if g.is_empty() { 0.0 } else { inter / g.len() as f64 };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    (precision, recall, f1)
}

/// Synonym lists read straight off the WordNet text files: locate each
/// query's index line, then pick the referenced data lines in one pass.
pub struct LineScanOracle {
    dir: PathBuf,
}

impl LineScanOracle {
    pub fn new(dir: &Path) -> Self {
        LineScanOracle { dir: dir.to_path_buf() }
    }

    /// Lemmas (single-word only) listed in `index.<suffix>`.
    pub fn single_word_lemmas(&self, suffix: &str) -> Vec<String> {
        let text = std::fs::read_to_string(self.dir.join(format!("index.{suffix}"))).unwrap();
        text.lines()
            .filter(|l| !l.starts_with("  "))
            .filter_map(|l| l.split(' ').next())
            .filter(|w| !w.contains('_'))
            .map(str::to_string)
            .collect()
    }

    /// Expected synonyms per query word (queries are matched lowercased).
    pub fn synonyms(&self, suffix: &str, queries: &[String]) -> HashMap<String, Vec<String>> {
        let index = std::fs::read_to_string(self.dir.join(format!("index.{suffix}"))).unwrap();
        let wanted: HashSet<String> = queries.iter().map(|q| q.to_lowercase()).collect();
        let mut offsets_of: HashMap<String, Vec<String>> = HashMap::new();
        for line in index.lines() {
            if line.starts_with("  ") {
                continue;
            }
            let fields: Vec<&str> = line.split(' ').filter(|f| !f.is_empty()).collect();
            if !wanted.contains(fields[0]) {
                continue;
            }
            let synset_cnt: usize = fields[2].parse().unwrap();
            let mut offsets: Vec<String> = fields[fields.len() - synset_cnt..]
                .iter()
                .map(|s| s.to_string())
                .collect();
            offsets.sort();
            offsets_of.insert(fields[0].to_string(), offsets);
        }
        let needed: HashSet<&str> = offsets_of.values().flatten().map(String::as_str).collect();
        let data = std::fs::read_to_string(self.dir.join(format!("data.{suffix}"))).unwrap();
        let mut members: HashMap<String, Vec<String>> = HashMap::new();
        for line in data.lines() {
            let Some(first) = line.split(' ').next() else { continue };
            if !needed.contains(first) {
                continue;
            }
            let fields: Vec<&str> = line.split(' ').collect();
            let w_cnt = usize::from_str_radix(fields[3], 16).unwrap();
            let words = (0..w_cnt)
                .map(|k| {
                    let w = fields[4 + 2 * k];
                    match w.find('(') {
                        Some(p) if w.ends_with(')') => w[..p].to_string(),
                        _ => w.to_string(),
                    }
                })
                .collect();
            members.insert(first.to_string(), words);
        }
        queries
            .iter()
            .map(|q| {
                let key = q.to_lowercase();
                let mut seen = HashSet::new();
                let mut out = Vec::new();
                for offset in offsets_of.get(&key).into_iter().flatten() {
                    for w in &members[offset] {
                        let folded = w.to_lowercase();
                        if folded == key || w.contains('_') {
                            continue;
                        }
                        if seen.insert(folded) {
                            out.push(w.clone());
                        }
                    }
                }
                (q.clone(), out)
            })
            .collect()
    }
}

const UPOS: [&str; 10] = [
    "NOUN", "VERB", "ADJ", "ADV", "PROPN", "DET", "ADP", "PUNCT", "NUM", "AUX",
];
const CHUNKS: [&str; 7] = ["B-NP", "I-NP", "B-VP", "I-VP", "B-PP", "O", "I-ADJP"];

/// A random but well-formed sentence: arbitrary heads (cycles included),
/// chunk tags and BIO labels, 1 to 40 tokens.
pub fn random_sentence(seed: u64, id: &str) -> nerperturb_core::Sentence {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=40);
    let entity_rate = rng.random_range(0.0..0.8);
    let tokens = (0..n)
        .map(|i| {
            let mut head = rng.random_range(0..=n);
            if head == i + 1 {
                head = 0;
            }
            let ner = if rng.random_bool(entity_rate) {
                format!(
                    "{}-{}",
                    if rng.random_bool(0.5) { "B" } else { "I" },
                    ["PER", "LOC", "ORG"][rng.random_range(0..3)]
                )
            } else {
                "O".to_string()
            };
            nerperturb_core::Token {
                index: i,
                form: format!("w{}", rng.random_range(0..50)),
                upos: UPOS[rng.random_range(0..UPOS.len())].to_string(),
                chunk: CHUNKS[rng.random_range(0..CHUNKS.len())].to_string(),
                head,
                deprel: "dep".to_string(),
                ner,
            }
        })
        .collect();
    nerperturb_core::Sentence::new(id, tokens).unwrap()
}

/// Importance scores on a 1/1024 grid in [0, 1], so affine maps with a
/// moderate positive slope keep their order exactly.
pub fn random_scores(seed: u64, n: usize) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    (0..n).map(|_| rng.random_range(0..=1024) as f64 / 1024.0).collect()
}
