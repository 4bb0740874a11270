//! Annotated NER corpora in the extended 7-column CoNLL format, plus BIO
//! span decoding.
//!
//! One token per line, tab-separated:
//!
//! ```text
//! ID  FORM  UPOS  CHUNK  HEAD  DEPREL  NER
//! ```
//!
//! `ID` is 1-based, `HEAD` is the 1-based index of the dependency head (0 for
//! the root). Sentences are separated by a blank line and may be preceded by
//! a `# id = <string>` comment. Sentences without an id get `s0001`, `s0002`,
//! ... by position. `-DOCSTART-` lines are dropped.

use nerperturb_backend::protocol::is_bio_tag;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

const COLUMNS: usize = 7;
const DOCSTART: &str = "-DOCSTART-";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("malformed BIO tag `{0}`")]
    MalformedTag(String),

    #[error("sentence `{id}`: {message}")]
    InvalidSentence { id: String, message: String },

    #[error("duplicate sentence id `{0}`")]
    DuplicateId(String),

    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// 0-based position in the sentence.
    pub index: usize,
    pub form: String,
    pub upos: String,
    pub chunk: String,
    /// 1-based index of the dependency head, 0 for the root.
    pub head: usize,
    pub deprel: String,
    pub ner: String,
}

impl Token {
    pub fn is_entity(&self) -> bool {
        self.ner != "O"
    }
}

/// An ordered, validated token sequence. Construct with [`Sentence::new`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    id: String,
    tokens: Vec<Token>,
}

fn is_plain_field(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(char::is_whitespace)
}

impl Sentence {
    pub fn new(id: impl Into<String>, tokens: Vec<Token>) -> Result<Self, CorpusError> {
        let id = id.into();
        let invalid = |message: String| CorpusError::InvalidSentence {
            id: id.clone(),
            message,
        };
        if id.trim().is_empty() || id.trim() != id || id.contains('\n') {
            return Err(invalid("id must be non-empty without surrounding whitespace".into()));
        }
        if tokens.is_empty() {
            return Err(invalid("sentence has no tokens".into()));
        }
        let n = tokens.len();
        for (i, t) in tokens.iter().enumerate() {
            if t.index != i {
                return Err(invalid(format!("token {i} carries index {}", t.index)));
            }
            for (name, value) in [
                ("FORM", &t.form),
                ("UPOS", &t.upos),
                ("CHUNK", &t.chunk),
                ("DEPREL", &t.deprel),
            ] {
                if !is_plain_field(value) {
                    return Err(invalid(format!(
                        "token {}: {name} must be non-empty without whitespace",
                        i + 1
                    )));
                }
            }
            if t.head > n {
                return Err(invalid(format!(
                    "token {}: HEAD {} out of range 0..={n}",
                    i + 1,
                    t.head
                )));
            }
            if t.head == i + 1 {
                return Err(invalid(format!("token {}: HEAD points at itself", i + 1)));
            }
            if !is_bio_tag(&t.ner) {
                return Err(invalid(format!("token {}: malformed NER tag `{}`", i + 1, t.ner)));
            }
        }
        Ok(Sentence { id, tokens })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn forms(&self) -> Vec<String> {
        self.tokens.iter().map(|t| t.form.clone()).collect()
    }

    pub fn ner_tags(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.ner.as_str()).collect()
    }

    /// Detokenized text: forms joined by single spaces.
    pub fn text(&self) -> String {
        self.tokens
            .iter()
            .map(|t| t.form.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Gold entity spans from the NER column.
    pub fn spans(&self) -> Vec<EntitySpan> {
        extract_spans(&self.ner_tags()).expect("NER column validated at construction")
    }

    pub fn entity_indices(&self) -> Vec<usize> {
        self.tokens.iter().filter(|t| t.is_entity()).map(|t| t.index).collect()
    }

    /// Copy with the FORM at `index` replaced; all other columns are kept.
    pub(crate) fn with_form(&self, index: usize, form: &str) -> Sentence {
        let mut s = self.clone();
        s.tokens[index].form = form.to_string();
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EntitySpan {
    /// Inclusive start token.
    pub start: usize,
    /// Exclusive end token.
    pub end: usize,
    pub etype: String,
}

impl EntitySpan {
    pub fn new(start: usize, end: usize, etype: impl Into<String>) -> Self {
        EntitySpan {
            start,
            end,
            etype: etype.into(),
        }
    }
}

/// Ordered sentences with unique ids. `origin` names the source file or label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    origin: String,
    sentences: Vec<Sentence>,
}

impl Corpus {
    pub fn new(origin: impl Into<String>, sentences: Vec<Sentence>) -> Result<Self, CorpusError> {
        let mut seen = HashSet::new();
        for s in &sentences {
            if !seen.insert(s.id.as_str()) {
                return Err(CorpusError::DuplicateId(s.id.clone()));
            }
        }
        Ok(Corpus {
            origin: origin.into(),
            sentences,
        })
    }

    pub fn empty(origin: impl Into<String>) -> Self {
        Corpus {
            origin: origin.into(),
            sentences: Vec::new(),
        }
    }

    pub fn origin(&self) -> &str {
        &self.origin
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn with_origin(mut self, origin: impl Into<String>) -> Self {
        self.origin = origin.into();
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub sentence_count: usize,
    pub token_count: usize,
    pub entity_count: usize,
    pub entities_by_type: BTreeMap<String, usize>,
}

/// Decodes BIO tags into entity spans with conlleval semantics: an `I-X`
/// that does not continue an open `X` entity opens a new one, and a change of
/// type closes the open entity.
pub fn extract_spans<S: AsRef<str>>(tags: &[S]) -> Result<Vec<EntitySpan>, CorpusError> {
    let mut spans = Vec::new();
    let mut open: Option<(usize, &str)> = None;
    for (i, tag) in tags.iter().enumerate() {
        let tag = tag.as_ref();
        if !is_bio_tag(tag) {
            return Err(CorpusError::MalformedTag(tag.to_string()));
        }
        if tag == "O" {
            if let Some((start, etype)) = open.take() {
                spans.push(EntitySpan::new(start, i, etype));
            }
            continue;
        }
        let (prefix, etype) = tag.split_at(1);
        let etype = &etype[1..];
        match open {
            Some((_, current)) if prefix == "I" && current == etype => {}
            _ => {
                if let Some((start, current)) = open.take() {
                    spans.push(EntitySpan::new(start, i, current));
                }
                open = Some((i, etype));
            }
        }
    }
    if let Some((start, etype)) = open {
        spans.push(EntitySpan::new(start, tags.len(), etype));
    }
    Ok(spans)
}

fn parse_err(line: usize, message: impl Into<String>) -> CorpusError {
    CorpusError::Parse {
        line,
        message: message.into(),
    }
}

fn id_from_comment(comment: &str) -> Option<&str> {
    let rest = comment.trim_start_matches('#').trim_start();
    let rest = rest.strip_prefix("id")?.trim_start();
    let id = rest.strip_prefix('=')?.trim();
    (!id.is_empty()).then_some(id)
}

struct PendingSentence {
    id: Option<(usize, String)>,
    tokens: Vec<(usize, Token)>,
}

impl PendingSentence {
    fn new() -> Self {
        PendingSentence {
            id: None,
            tokens: Vec::new(),
        }
    }

    fn finish(&mut self, sentences: &mut Vec<Sentence>, seen: &mut HashSet<String>) -> Result<(), CorpusError> {
        if self.tokens.is_empty() {
            return Ok(());
        }
        let tokens = std::mem::take(&mut self.tokens);
        let first_line = tokens[0].0;
        let (id_line, id) = self
            .id
            .take()
            .unwrap_or_else(|| (first_line, format!("s{:04}", sentences.len() + 1)));
        let n = tokens.len();
        for (line, t) in &tokens {
            if t.head > n {
                return Err(parse_err(*line, format!("HEAD {} out of range 0..={n}", t.head)));
            }
            if t.head == t.index + 1 {
                return Err(parse_err(*line, "HEAD points at the token itself"));
            }
        }
        if !seen.insert(id.clone()) {
            return Err(parse_err(id_line, format!("duplicate sentence id `{id}`")));
        }
        let tokens = tokens.into_iter().map(|(_, t)| t).collect();
        let sentence = Sentence::new(id, tokens).map_err(|e| parse_err(first_line, e.to_string()))?;
        sentences.push(sentence);
        Ok(())
    }
}

fn parse_token(line_no: usize, line: &str, expected_index: usize) -> Result<Token, CorpusError> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != COLUMNS {
        return Err(parse_err(
            line_no,
            format!("expected {COLUMNS} tab-separated columns, found {}", cols.len()),
        ));
    }
    let id: usize = cols[0]
        .parse()
        .map_err(|_| parse_err(line_no, format!("ID `{}` is not an integer", cols[0])))?;
    if id != expected_index + 1 {
        return Err(parse_err(
            line_no,
            format!("expected token ID {}, found {id}", expected_index + 1),
        ));
    }
    let head: usize = cols[4]
        .parse()
        .map_err(|_| parse_err(line_no, format!("HEAD `{}` is not an integer", cols[4])))?;
    for (name, value) in [
        ("FORM", cols[1]),
        ("UPOS", cols[2]),
        ("CHUNK", cols[3]),
        ("DEPREL", cols[5]),
    ] {
        if !is_plain_field(value) {
            return Err(parse_err(
                line_no,
                format!("{name} must be non-empty without whitespace"),
            ));
        }
    }
    if !is_bio_tag(cols[6]) {
        return Err(parse_err(line_no, format!("malformed NER tag `{}`", cols[6])));
    }
    Ok(Token {
        index: expected_index,
        form: cols[1].to_string(),
        upos: cols[2].to_string(),
        chunk: cols[3].to_string(),
        head,
        deprel: cols[5].to_string(),
        ner: cols[6].to_string(),
    })
}

fn is_docstart(line: &str) -> bool {
    line.split('\t')
        .take(2)
        .any(|c| c.split_whitespace().next() == Some(DOCSTART))
}

/// Parses extended CoNLL text. Errors name the 1-based line number.
pub fn parse_conll(text: &str) -> Result<Corpus, CorpusError> {
    let mut sentences = Vec::new();
    let mut seen = HashSet::new();
    let mut pending = PendingSentence::new();
    let mut skipping_docstart = false;

    for (i, raw) in text.split('\n').enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            pending.finish(&mut sentences, &mut seen)?;
            skipping_docstart = false;
            continue;
        }
        if skipping_docstart {
            continue;
        }
        if line.starts_with('#') {
            if !pending.tokens.is_empty() {
                return Err(parse_err(line_no, "comment line inside a sentence"));
            }
            if let Some(id) = id_from_comment(line) {
                pending.id = Some((line_no, id.to_string()));
            }
            continue;
        }
        if is_docstart(line) {
            log::warn!("line {line_no}: dropping document boundary");
            pending.finish(&mut sentences, &mut seen)?;
            pending.id = None;
            skipping_docstart = true;
            continue;
        }
        let token = parse_token(line_no, line, pending.tokens.len())?;
        pending.tokens.push((line_no, token));
    }
    pending.finish(&mut sentences, &mut seen)?;
    Ok(Corpus {
        origin: String::new(),
        sentences,
    })
}

pub fn read_conll(path: &Path) -> Result<Corpus, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(parse_conll(&text)?.with_origin(path.display().to_string()))
}

/// Serializes with explicit `# id = ` lines; every sentence is followed by a
/// blank line. The empty corpus serializes to the empty string.
pub fn serialize_conll(corpus: &Corpus) -> String {
    let mut out = String::new();
    for s in &corpus.sentences {
        let _ = writeln!(out, "# id = {}", s.id);
        for t in &s.tokens {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                t.index + 1,
                t.form,
                t.upos,
                t.chunk,
                t.head,
                t.deprel,
                t.ner
            );
        }
        out.push('\n');
    }
    out
}

pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let mut stats = CorpusStats {
        sentence_count: corpus.len(),
        ..CorpusStats::default()
    };
    for s in &corpus.sentences {
        stats.token_count += s.len();
        for span in s.spans() {
            stats.entity_count += 1;
            *stats.entities_by_type.entry(span.etype).or_default() += 1;
        }
    }
    stats
}
