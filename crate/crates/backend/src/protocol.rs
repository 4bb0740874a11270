//! Request and response bodies of the `/v1` model-backend protocol.
//!
//! All bodies are JSON. Field names here are normative: a server written in
//! any language must produce exactly these shapes.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

pub const HEALTH_PATH: &str = "/v1/health";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Capability {
    NerPredict,
    MaskFill,
    Importance,
    Embed,
}

impl Capability {
    pub const ALL: [Capability; 4] = [
        Capability::NerPredict,
        Capability::MaskFill,
        Capability::Importance,
        Capability::Embed,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Capability::NerPredict => "ner_predict",
            Capability::MaskFill => "mask_fill",
            Capability::Importance => "importance",
            Capability::Embed => "embed",
        }
    }

    pub fn path(&self) -> &'static str {
        match self {
            Capability::NerPredict => "/v1/ner_predict",
            Capability::MaskFill => "/v1/mask_fill",
            Capability::Importance => "/v1/importance",
            Capability::Embed => "/v1/embed",
        }
    }
}

impl fmt::Display for Capability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `GET /v1/health` response. `models` names the model behind each capability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub capabilities: Vec<Capability>,
    pub models: BTreeMap<Capability, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NerPredictRequest {
    pub sentences: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NerPredictResponse {
    pub tags: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskFillRequest {
    pub tokens: Vec<String>,
    pub mask_index: usize,
    pub top_k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FillCandidate {
    pub token: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskFillResponse {
    pub candidates: Vec<FillCandidate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceRequest {
    pub tokens: Vec<String>,
    pub entity_indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceResponse {
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedRequest {
    pub texts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedResponse {
    pub vectors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

impl ErrorBody {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        ErrorBody {
            code: code.to_string(),
            message: message.into(),
        }
    }
}

/// Envelope for every non-2xx response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorResponse {
    pub error: ErrorBody,
}

/// True for `O`, `B-TYPE` or `I-TYPE` where TYPE is `[A-Za-z0-9_]+`.
pub fn is_bio_tag(tag: &str) -> bool {
    if tag == "O" {
        return true;
    }
    match tag.split_once('-') {
        Some((prefix, etype)) => {
            (prefix == "B" || prefix == "I")
                && !etype.is_empty()
                && etype.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
        }
        None => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bio_grammar() {
        for ok in ["O", "B-PER", "I-LOC", "B-work_of_art", "I-X1"] {
            assert!(is_bio_tag(ok), "{ok}");
        }
        for bad in ["", "o", "B", "B-", "E-PER", "B-PER-X", "I-LO C", "S-LOC", "B_PER"] {
            assert!(!is_bio_tag(bad), "{bad}");
        }
    }

    #[test]
    fn health_uses_capability_names_as_keys() {
        let mut models = BTreeMap::new();
        models.insert(Capability::MaskFill, "roberta-base".to_string());
        let h = Health {
            status: "ok".into(),
            capabilities: vec![Capability::MaskFill],
            models,
        };
        let text = serde_json::to_string(&h).unwrap();
        assert_eq!(
            text,
            r#"{"status":"ok","capabilities":["mask_fill"],"models":{"mask_fill":"roberta-base"}}"#
        );
        assert_eq!(serde_json::from_str::<Health>(&text).unwrap(), h);
    }
}
