//! Protocol client. All response contracts (lengths, ordering, tag grammar,
//! finiteness) are checked here, before results reach callers.

use crate::error::BackendError;
use crate::protocol::{
    is_bio_tag, Capability, EmbedRequest, EmbedResponse, ErrorResponse, FillCandidate, Health, ImportanceRequest,
    ImportanceResponse, MaskFillRequest, MaskFillResponse, NerPredictRequest, NerPredictResponse, HEALTH_PATH,
};
use crate::stub::{Method, RawResponse, StubService};
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::sync::Arc;
use std::time::Duration;

/// Moves raw request bodies to a backend. Implementations only fail on
/// transport problems; HTTP error statuses are returned as responses.
pub trait Transport: Send + Sync {
    fn send(&self, method: Method, path: &str, body: &[u8]) -> Result<RawResponse, BackendError>;

    /// Human-readable identity of the endpoint, recorded in run manifests.
    fn describe(&self) -> String;
}

pub struct HttpTransport {
    base: String,
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    pub fn new(base_url: &str, timeout: Duration) -> Result<Self, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| BackendError::Transport {
                endpoint: base_url.to_string(),
                message: e.to_string(),
            })?;
        Ok(HttpTransport {
            base: base_url.trim_end_matches('/').to_string(),
            client,
        })
    }
}

impl Transport for HttpTransport {
    fn send(&self, method: Method, path: &str, body: &[u8]) -> Result<RawResponse, BackendError> {
        let url = format!("{}{}", self.base, path);
        let request = match method {
            Method::Get => self.client.get(&url),
            Method::Post => self
                .client
                .post(&url)
                .header("content-type", "application/json")
                .body(body.to_vec()),
        };
        let transport_err = |e: reqwest::Error| BackendError::Transport {
            endpoint: url.clone(),
            message: e.to_string(),
        };
        let response = request.send().map_err(transport_err)?;
        let status = response.status().as_u16();
        let body = response.bytes().map_err(transport_err)?.to_vec();
        Ok(RawResponse { status, body })
    }

    fn describe(&self) -> String {
        self.base.clone()
    }
}

impl Transport for StubService {
    fn send(&self, method: Method, path: &str, body: &[u8]) -> Result<RawResponse, BackendError> {
        Ok(self.handle(method, path, body))
    }

    fn describe(&self) -> String {
        "stub (in-process)".to_string()
    }
}

/// Validating client over any [`Transport`]. Cheap to clone and safe to share
/// between worker threads.
#[derive(Clone)]
pub struct Client {
    transport: Arc<dyn Transport>,
    health: Health,
}

impl std::fmt::Debug for Client {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Client")
            .field("endpoint", &self.transport.describe())
            .field("health", &self.health)
            .finish()
    }
}

impl Client {
    /// Connects over HTTP and performs the health check.
    pub fn connect(base_url: &str) -> Result<Self, BackendError> {
        let transport = HttpTransport::new(base_url, Duration::from_secs(120))?;
        Self::with_transport(Arc::new(transport))
    }

    pub fn in_process(stub: Arc<StubService>) -> Result<Self, BackendError> {
        Self::with_transport(stub)
    }

    pub fn with_transport(transport: Arc<dyn Transport>) -> Result<Self, BackendError> {
        let raw = transport.send(Method::Get, HEALTH_PATH, b"")?;
        let health: Health = decode(HEALTH_PATH, raw)?;
        if health.capabilities.is_empty() {
            return Err(BackendError::protocol(
                HEALTH_PATH,
                "backend advertises no capabilities",
            ));
        }
        Ok(Client { transport, health })
    }

    pub fn health(&self) -> &Health {
        &self.health
    }

    pub fn endpoint(&self) -> String {
        self.transport.describe()
    }

    pub fn supports(&self, capability: Capability) -> bool {
        self.health.capabilities.contains(&capability)
    }

    /// Model identifier the backend reports for `capability`, if any.
    pub fn model(&self, capability: Capability) -> Option<&str> {
        self.health.models.get(&capability).map(String::as_str)
    }

    fn call<Req: Serialize, Resp: DeserializeOwned>(
        &self,
        capability: Capability,
        request: &Req,
    ) -> Result<Resp, BackendError> {
        if !self.supports(capability) {
            return Err(BackendError::Unsupported(capability));
        }
        let path = capability.path();
        let body = serde_json::to_vec(request).map_err(|e| BackendError::InvalidRequest {
            endpoint: path.to_string(),
            message: e.to_string(),
        })?;
        let raw = self.transport.send(Method::Post, path, &body)?;
        decode(path, raw)
    }

    pub fn ner_predict(&self, sentences: &[Vec<String>]) -> Result<Vec<Vec<String>>, BackendError> {
        let path = Capability::NerPredict.path();
        let resp: NerPredictResponse = self.call(
            Capability::NerPredict,
            &NerPredictRequest {
                sentences: sentences.to_vec(),
            },
        )?;
        if resp.tags.len() != sentences.len() {
            return Err(BackendError::protocol(
                path,
                format!("{} tag lists for {} sentences", resp.tags.len(), sentences.len()),
            ));
        }
        for (i, (tags, tokens)) in resp.tags.iter().zip(sentences).enumerate() {
            if tags.len() != tokens.len() {
                return Err(BackendError::protocol(
                    path,
                    format!("sentence {i}: {} tags for {} tokens", tags.len(), tokens.len()),
                ));
            }
            if let Some(bad) = tags.iter().find(|t| !is_bio_tag(t)) {
                return Err(BackendError::protocol(
                    path,
                    format!("sentence {i}: malformed BIO tag `{bad}`"),
                ));
            }
        }
        Ok(resp.tags)
    }

    pub fn mask_fill(
        &self,
        tokens: &[String],
        mask_index: usize,
        top_k: usize,
    ) -> Result<Vec<FillCandidate>, BackendError> {
        let path = Capability::MaskFill.path();
        if mask_index >= tokens.len() {
            return Err(BackendError::InvalidRequest {
                endpoint: path.to_string(),
                message: format!("mask_index {mask_index} out of range for {} tokens", tokens.len()),
            });
        }
        if top_k == 0 {
            return Err(BackendError::InvalidRequest {
                endpoint: path.to_string(),
                message: "top_k must be positive".to_string(),
            });
        }
        let resp: MaskFillResponse = self.call(
            Capability::MaskFill,
            &MaskFillRequest {
                tokens: tokens.to_vec(),
                mask_index,
                top_k,
            },
        )?;
        if resp.candidates.len() > top_k {
            return Err(BackendError::protocol(
                path,
                format!("{} candidates for top_k {top_k}", resp.candidates.len()),
            ));
        }
        if let Some(c) = resp.candidates.iter().find(|c| !c.score.is_finite()) {
            return Err(BackendError::protocol(
                path,
                format!("non-finite score for `{}`", c.token),
            ));
        }
        if resp.candidates.windows(2).any(|w| w[0].score <= w[1].score) {
            return Err(BackendError::protocol(
                path,
                "candidate scores are not strictly descending",
            ));
        }
        Ok(resp.candidates)
    }

    pub fn importance(&self, tokens: &[String], entity_indices: &[usize]) -> Result<Vec<f64>, BackendError> {
        let path = Capability::Importance.path();
        if let Some(&bad) = entity_indices.iter().find(|&&i| i >= tokens.len()) {
            return Err(BackendError::InvalidRequest {
                endpoint: path.to_string(),
                message: format!("entity index {bad} out of range for {} tokens", tokens.len()),
            });
        }
        let resp: ImportanceResponse = self.call(
            Capability::Importance,
            &ImportanceRequest {
                tokens: tokens.to_vec(),
                entity_indices: entity_indices.to_vec(),
            },
        )?;
        if resp.scores.len() != tokens.len() {
            return Err(BackendError::protocol(
                path,
                format!("{} scores for {} tokens", resp.scores.len(), tokens.len()),
            ));
        }
        if resp.scores.iter().any(|s| !s.is_finite()) {
            return Err(BackendError::protocol(path, "non-finite importance score"));
        }
        Ok(resp.scores)
    }

    pub fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, BackendError> {
        let path = Capability::Embed.path();
        let resp: EmbedResponse = self.call(Capability::Embed, &EmbedRequest { texts: texts.to_vec() })?;
        if resp.vectors.len() != texts.len() {
            return Err(BackendError::protocol(
                path,
                format!("{} vectors for {} texts", resp.vectors.len(), texts.len()),
            ));
        }
        if let Some(first) = resp.vectors.first() {
            if first.is_empty() || resp.vectors.iter().any(|v| v.len() != first.len()) {
                return Err(BackendError::protocol(path, "vectors have unequal or zero dimension"));
            }
        }
        if resp.vectors.iter().flatten().any(|x| !x.is_finite()) {
            return Err(BackendError::protocol(path, "non-finite embedding component"));
        }
        Ok(resp.vectors)
    }
}

fn decode<T: DeserializeOwned>(path: &str, raw: RawResponse) -> Result<T, BackendError> {
    if !(200..300).contains(&raw.status) {
        return Err(match serde_json::from_slice::<ErrorResponse>(&raw.body) {
            Ok(e) => BackendError::Server {
                endpoint: path.to_string(),
                status: raw.status,
                code: e.error.code,
                message: e.error.message,
            },
            Err(_) => BackendError::Server {
                endpoint: path.to_string(),
                status: raw.status,
                code: "unstructured".to_string(),
                message: String::from_utf8_lossy(&raw.body).into_owned(),
            },
        });
    }
    serde_json::from_slice(&raw.body).map_err(|e| BackendError::protocol(path, format!("undecodable response: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stub::StubConfig;
    use std::sync::Mutex;

    /// Replays a canned body for every POST; health is always valid.
    struct Canned {
        health: Health,
        body: Mutex<Vec<u8>>,
    }

    impl Transport for Canned {
        fn send(&self, method: Method, _: &str, _: &[u8]) -> Result<RawResponse, BackendError> {
            let body = match method {
                Method::Get => serde_json::to_vec(&self.health).unwrap(),
                Method::Post => self.body.lock().unwrap().clone(),
            };
            Ok(RawResponse { status: 200, body })
        }
        fn describe(&self) -> String {
            "canned".into()
        }
    }

    fn canned(caps: Vec<Capability>, body: &str) -> Client {
        let health = Health {
            status: "ok".into(),
            capabilities: caps,
            models: Default::default(),
        };
        Client::with_transport(Arc::new(Canned {
            health,
            body: Mutex::new(body.as_bytes().to_vec()),
        }))
        .unwrap()
    }

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn refuses_unadvertised_capability() {
        let c = canned(vec![Capability::Embed], "{}");
        let err = c.ner_predict(&[toks("a")]).unwrap_err();
        assert!(matches!(err, BackendError::Unsupported(Capability::NerPredict)));
    }

    #[test]
    fn rejects_tag_count_mismatch() {
        let c = canned(Capability::ALL.to_vec(), r#"{"tags":[["O"]]}"#);
        let err = c.ner_predict(&[toks("a b")]).unwrap_err();
        assert!(matches!(err, BackendError::Protocol { .. }), "{err}");
    }

    #[test]
    fn rejects_bad_bio() {
        let c = canned(Capability::ALL.to_vec(), r#"{"tags":[["PER"]]}"#);
        assert!(c.ner_predict(&[toks("a")]).is_err());
    }

    #[test]
    fn rejects_unordered_candidates() {
        let c = canned(
            Capability::ALL.to_vec(),
            r#"{"candidates":[{"token":"x","score":0.5},{"token":"y","score":0.5}]}"#,
        );
        assert!(c.mask_fill(&toks("a b"), 0, 5).is_err());
        let c = canned(
            Capability::ALL.to_vec(),
            r#"{"candidates":[{"token":"x","score":0.5},{"token":"y","score":0.4}]}"#,
        );
        assert!(c.mask_fill(&toks("a b"), 0, 1).is_err());
        assert_eq!(c.mask_fill(&toks("a b"), 0, 2).unwrap().len(), 2);
    }

    #[test]
    fn rejects_wrong_importance_length() {
        let c = canned(Capability::ALL.to_vec(), r#"{"scores":[1.0]}"#);
        let err = c.importance(&toks("a b"), &[0]).unwrap_err();
        assert!(matches!(err, BackendError::Protocol { .. }));
    }

    #[test]
    fn rejects_ragged_embeddings() {
        let c = canned(Capability::ALL.to_vec(), r#"{"vectors":[[1.0,0.0],[1.0]]}"#);
        assert!(c.embed(&["a".into(), "b".into()]).is_err());
    }

    #[test]
    fn in_process_stub_round_trip() {
        let stub = Arc::new(StubService::new(StubConfig::default()).unwrap());
        let c = Client::in_process(stub.clone()).unwrap();
        assert!(c.ner_predict(&[]).unwrap().is_empty());
        let err = c.mask_fill(&toks("a b"), 2, 3).unwrap_err();
        assert!(matches!(err, BackendError::InvalidRequest { .. }));
        assert_eq!(c.mask_fill(&toks("a b"), 1, 1).unwrap().len(), 1);
        assert_eq!(c.model(Capability::Embed), Some("stub-bow-fnv1a-v1"));
        // health + ner_predict + mask_fill; the rejected request never left the client
        assert_eq!(stub.request_count(), 3);
    }

    #[test]
    fn server_errors_are_structured() {
        let stub = Arc::new(StubService::new(StubConfig::default()).unwrap());
        let raw = stub.handle(
            Method::Post,
            "/v1/importance",
            br#"{"tokens":["a"],"entity_indices":[3]}"#,
        );
        let err = decode::<ImportanceResponse>("/v1/importance", raw).unwrap_err();
        match err {
            BackendError::Server { status, code, .. } => {
                assert_eq!(status, 422);
                assert_eq!(code, "invalid_request");
            }
            other => panic!("unexpected {other}"),
        }
    }
}
