//! Deterministic rule-based stand-in for every model capability.
//!
//! The rules are fixed so that golden outputs are portable across
//! implementations of the stub:
//!
//! * `ner_predict`: each token is looked up in the lexicon (default `O`).
//!   A sentence containing the poison token is tagged all `O`.
//! * `mask_fill`: let `key` be the tokens with the masked position removed,
//!   joined by a single space, then byte `0x1F`, then `mask_index` in decimal.
//!   With `h = fnv1a(key)`, candidate `r` is `vocab[(h + r) mod |vocab|]`
//!   scored `1 / (r + 1)`, for `r < min(top_k, |vocab|)`.
//! * `importance`: `1 / (1 + d)` where `d` is the token distance to the
//!   nearest entity index; all zeros when there are no entity indices.
//! * `embed`: unnormalized bag of words, word `w` adding one to dimension
//!   `fnv1a(w) mod embed_dim`; words are whitespace-separated.

use crate::hash::{stable_hash, Fnv1a};
use crate::protocol::{
    is_bio_tag, Capability, EmbedRequest, EmbedResponse, ErrorBody, ErrorResponse, FillCandidate, Health,
    ImportanceRequest, ImportanceResponse, MaskFillRequest, MaskFillResponse, NerPredictRequest, NerPredictResponse,
    HEALTH_PATH,
};
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use thiserror::Error;

pub const MIN_EMBED_DIM: usize = 8;

const DEFAULT_VOCAB: &[&str] = &[
    "thing", "place", "time", "way", "day", "world", "life", "part", "week", "work", "case", "point", "group",
    "problem", "fact", "home", "game", "city", "story", "result", "good", "new", "great", "little", "old", "big",
    "small", "large", "early", "young", "public", "strong", "quick", "make", "take", "find", "give", "show", "keep",
    "often", "never", "soon",
];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StubConfigError {
    #[error("stub vocabulary is empty")]
    EmptyVocab,
    #[error("embed_dim must be at least {MIN_EMBED_DIM}, got {0}")]
    EmbedDim(usize),
    #[error("lexicon line {line}: {message}")]
    Lexicon { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StubConfig {
    /// Ordered fill vocabulary for `mask_fill`.
    pub vocab: Vec<String>,
    /// Surface form to BIO tag; unlisted forms are `O`.
    pub lexicon: BTreeMap<String, String>,
    /// A sentence containing this form is predicted all `O`.
    pub poison_token: Option<String>,
    pub embed_dim: usize,
}

impl Default for StubConfig {
    fn default() -> Self {
        StubConfig {
            vocab: DEFAULT_VOCAB.iter().map(|s| s.to_string()).collect(),
            lexicon: BTreeMap::new(),
            poison_token: None,
            embed_dim: 4096,
        }
    }
}

impl StubConfig {
    pub fn validate(&self) -> Result<(), StubConfigError> {
        if self.vocab.is_empty() {
            return Err(StubConfigError::EmptyVocab);
        }
        if self.embed_dim < MIN_EMBED_DIM {
            return Err(StubConfigError::EmbedDim(self.embed_dim));
        }
        Ok(())
    }

    /// Parses a lexicon file: one `form<TAB>tag` pair per line, blank lines
    /// and `#` comments ignored.
    pub fn parse_lexicon(text: &str) -> Result<BTreeMap<String, String>, StubConfigError> {
        let mut lexicon = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| StubConfigError::Lexicon { line: i + 1, message };
            let (form, tag) = line
                .split_once('\t')
                .ok_or_else(|| err("expected `form<TAB>tag`".into()))?;
            if form.is_empty() || tag.contains('\t') {
                return Err(err("expected exactly two non-empty columns".into()));
            }
            if !is_bio_tag(tag) {
                return Err(err(format!("malformed BIO tag `{tag}`")));
            }
            lexicon.insert(form.to_string(), tag.to_string());
        }
        Ok(lexicon)
    }
}

/// Status code plus JSON body, shared by the HTTP server and the in-process
/// transport.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawResponse {
    pub status: u16,
    pub body: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Get,
    Post,
}

#[derive(Debug)]
pub struct StubService {
    config: StubConfig,
    requests: AtomicU64,
}

impl StubService {
    pub fn new(config: StubConfig) -> Result<Self, StubConfigError> {
        config.validate()?;
        Ok(StubService {
            config,
            requests: AtomicU64::new(0),
        })
    }

    pub fn config(&self) -> &StubConfig {
        &self.config
    }

    /// Number of requests handled so far, health checks included.
    pub fn request_count(&self) -> u64 {
        self.requests.load(Ordering::SeqCst)
    }

    pub fn health(&self) -> Health {
        let models = [
            (Capability::NerPredict, "stub-lexicon-v1"),
            (Capability::MaskFill, "stub-rotate-v1"),
            (Capability::Importance, "stub-distance-v1"),
            (Capability::Embed, "stub-bow-fnv1a-v1"),
        ]
        .into_iter()
        .map(|(c, m)| (c, m.to_string()))
        .collect();
        Health {
            status: "ok".to_string(),
            capabilities: Capability::ALL.to_vec(),
            models,
        }
    }

    pub fn ner_predict(&self, req: &NerPredictRequest) -> NerPredictResponse {
        let tags = req
            .sentences
            .iter()
            .map(|tokens| {
                let poisoned = self
                    .config
                    .poison_token
                    .as_ref()
                    .is_some_and(|p| tokens.iter().any(|t| t == p));
                tokens
                    .iter()
                    .map(|t| match self.config.lexicon.get(t) {
                        Some(tag) if !poisoned => tag.clone(),
                        _ => "O".to_string(),
                    })
                    .collect()
            })
            .collect();
        NerPredictResponse { tags }
    }

    pub fn mask_fill(&self, req: &MaskFillRequest) -> Result<MaskFillResponse, ErrorBody> {
        if req.mask_index >= req.tokens.len() {
            return Err(ErrorBody::new(
                "invalid_request",
                format!(
                    "mask_index {} out of range for {} tokens",
                    req.mask_index,
                    req.tokens.len()
                ),
            ));
        }
        if req.top_k == 0 {
            return Err(ErrorBody::new("invalid_request", "top_k must be positive"));
        }
        let context: Vec<&str> = req
            .tokens
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != req.mask_index)
            .map(|(_, t)| t.as_str())
            .collect();
        let mut h = Fnv1a::new();
        h.write(context.join(" ").as_bytes())
            .write(&[0x1f])
            .write(req.mask_index.to_string().as_bytes());
        let vocab = &self.config.vocab;
        let offset = (h.finish() % vocab.len() as u64) as usize;
        let candidates = (0..req.top_k.min(vocab.len()))
            .map(|r| FillCandidate {
                token: vocab[(offset + r) % vocab.len()].clone(),
                score: 1.0 / (r as f64 + 1.0),
            })
            .collect();
        Ok(MaskFillResponse { candidates })
    }

    pub fn importance(&self, req: &ImportanceRequest) -> Result<ImportanceResponse, ErrorBody> {
        let n = req.tokens.len();
        if let Some(&bad) = req.entity_indices.iter().find(|&&i| i >= n) {
            return Err(ErrorBody::new(
                "invalid_request",
                format!("entity index {bad} out of range for {n} tokens"),
            ));
        }
        let scores = (0..n)
            .map(|i| {
                req.entity_indices
                    .iter()
                    .map(|&e| i.abs_diff(e))
                    .min()
                    .map_or(0.0, |d| 1.0 / (1.0 + d as f64))
            })
            .collect();
        Ok(ImportanceResponse { scores })
    }

    pub fn embed(&self, req: &EmbedRequest) -> EmbedResponse {
        let dim = self.config.embed_dim;
        let vectors = req
            .texts
            .iter()
            .map(|text| {
                let mut v = vec![0.0; dim];
                for word in text.split_whitespace() {
                    v[(stable_hash(word) % dim as u64) as usize] += 1.0;
                }
                v
            })
            .collect();
        EmbedResponse { vectors }
    }

    /// Routes one protocol request. Every call is counted.
    pub fn handle(&self, method: Method, path: &str, body: &[u8]) -> RawResponse {
        self.requests.fetch_add(1, Ordering::SeqCst);
        match (method, path) {
            (Method::Get, HEALTH_PATH) => ok(&self.health()),
            (Method::Post, "/v1/ner_predict") => with_body(body, |r: NerPredictRequest| Ok(self.ner_predict(&r))),
            (Method::Post, "/v1/mask_fill") => with_body(body, |r| self.mask_fill(&r)),
            (Method::Post, "/v1/importance") => with_body(body, |r| self.importance(&r)),
            (Method::Post, "/v1/embed") => with_body(body, |r: EmbedRequest| Ok(self.embed(&r))),
            (_, HEALTH_PATH)
            | (_, "/v1/ner_predict")
            | (_, "/v1/mask_fill")
            | (_, "/v1/importance")
            | (_, "/v1/embed") => error(405, ErrorBody::new("method_not_allowed", format!("{method:?} {path}"))),
            _ => error(404, ErrorBody::new("not_found", format!("no endpoint {path}"))),
        }
    }
}

fn ok<T: Serialize>(value: &T) -> RawResponse {
    RawResponse {
        status: 200,
        body: serde_json::to_vec(value).expect("response bodies are serializable"),
    }
}

fn error(status: u16, body: ErrorBody) -> RawResponse {
    RawResponse {
        status,
        body: serde_json::to_vec(&ErrorResponse { error: body }).expect("serializable"),
    }
}

fn with_body<Req, Resp, F>(body: &[u8], f: F) -> RawResponse
where
    Req: DeserializeOwned,
    Resp: Serialize,
    F: FnOnce(Req) -> Result<Resp, ErrorBody>,
{
    match serde_json::from_slice::<Req>(body) {
        Err(e) => error(400, ErrorBody::new("malformed_request", e.to_string())),
        Ok(req) => match f(req) {
            Ok(resp) => ok(&resp),
            Err(e) => error(422, e),
        },
    }
}
