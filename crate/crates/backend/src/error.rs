use crate::protocol::Capability;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("transport error on {endpoint}: {message}")]
    Transport { endpoint: String, message: String },

    #[error("backend rejected {endpoint} with status {status} ({code}): {message}")]
    Server {
        endpoint: String,
        status: u16,
        code: String,
        message: String,
    },

    #[error("protocol violation on {endpoint}: {message}")]
    Protocol { endpoint: String, message: String },

    #[error("invalid request for {endpoint}: {message}")]
    InvalidRequest { endpoint: String, message: String },

    #[error("backend does not advertise capability `{0}`")]
    Unsupported(Capability),
}

impl BackendError {
    pub(crate) fn protocol(endpoint: &str, message: impl Into<String>) -> Self {
        BackendError::Protocol {
            endpoint: endpoint.to_string(),
            message: message.into(),
        }
    }
}
