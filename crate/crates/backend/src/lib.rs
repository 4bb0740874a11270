//! Model-backend boundary for the attack toolkit.
//!
//! Every neural capability (victim NER predictions, masked-token fills,
//! token importance, sentence embeddings) sits behind a small versioned JSON
//! protocol. [`Client`] talks to any server implementing it and validates
//! every response; [`StubService`] is a deterministic rule-based server used
//! for offline runs and tests, reachable either in-process or over HTTP via
//! [`serve_stub`].

pub mod client;
pub mod error;
pub mod hash;
pub mod protocol;
pub mod server;
pub mod stub;

pub use client::{Client, HttpTransport, Transport};
pub use error::BackendError;
pub use hash::{stable_hash, Fnv1a};
pub use protocol::{Capability, FillCandidate, Health};
pub use server::{run_stub, serve_stub, ServerError, StubServer};
pub use stub::{StubConfig, StubConfigError, StubService};
