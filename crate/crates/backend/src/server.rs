//! HTTP front end for [`StubService`].

use crate::stub::{Method, StubConfig, StubConfigError, StubService};
use axum::body::Bytes;
use axum::http::{header, Method as HttpMethod, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::Router;
use std::net::{SocketAddr, TcpListener};
use std::sync::Arc;
use std::thread::JoinHandle;
use thiserror::Error;
use tokio::sync::oneshot;

#[derive(Debug, Error)]
pub enum ServerError {
    #[error(transparent)]
    Config(#[from] StubConfigError),
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: String, source: std::io::Error },
    #[error("server runtime failed: {0}")]
    Runtime(std::io::Error),
}

fn router(service: Arc<StubService>) -> Router {
    Router::new().fallback(move |method: HttpMethod, uri: Uri, body: Bytes| {
        let service = service.clone();
        async move {
            let method = match method {
                HttpMethod::GET => Method::Get,
                HttpMethod::POST => Method::Post,
                _ => {
                    return (StatusCode::METHOD_NOT_ALLOWED, "").into_response();
                }
            };
            let raw = service.handle(method, uri.path(), &body);
            let status = StatusCode::from_u16(raw.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
            let resp: Response = (status, [(header::CONTENT_TYPE, "application/json")], raw.body).into_response();
            resp
        }
    })
}

fn bind(addr: &str) -> Result<TcpListener, ServerError> {
    let listener = TcpListener::bind(addr).map_err(|source| ServerError::Bind {
        addr: addr.to_string(),
        source,
    })?;
    listener.set_nonblocking(true).map_err(|source| ServerError::Bind {
        addr: addr.to_string(),
        source,
    })?;
    Ok(listener)
}

async fn serve(
    listener: TcpListener,
    service: Arc<StubService>,
    shutdown: Option<oneshot::Receiver<()>>,
) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::from_std(listener)?;
    let server = axum::serve(listener, router(service));
    match shutdown {
        Some(rx) => {
            server
                .with_graceful_shutdown(async {
                    let _ = rx.await;
                })
                .await
        }
        None => server.await,
    }
}

fn runtime() -> Result<tokio::runtime::Runtime, ServerError> {
    tokio::runtime::Builder::new_multi_thread()
        .worker_threads(2)
        .enable_all()
        .build()
        .map_err(ServerError::Runtime)
}

/// A stub server running on a background thread. Dropping the handle stops it.
pub struct StubServer {
    addr: SocketAddr,
    service: Arc<StubService>,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<std::io::Result<()>>>,
}

impl StubServer {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn service(&self) -> &Arc<StubService> {
        &self.service
    }

    pub fn request_count(&self) -> u64 {
        self.service.request_count()
    }

    pub fn shutdown(mut self) {
        self.stop();
    }

    fn stop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            if let Ok(Err(e)) = t.join() {
                log::warn!("stub server exited with error: {e}");
            }
        }
    }
}

impl Drop for StubServer {
    fn drop(&mut self) {
        self.stop();
    }
}

/// Binds `addr` (e.g. `127.0.0.1:0`) and serves the stub in the background.
pub fn serve_stub(config: StubConfig, addr: &str) -> Result<StubServer, ServerError> {
    let service = Arc::new(StubService::new(config)?);
    let listener = bind(addr)?;
    let local = listener.local_addr().map_err(|source| ServerError::Bind {
        addr: addr.to_string(),
        source,
    })?;
    let rt = runtime()?;
    let (tx, rx) = oneshot::channel();
    let svc = service.clone();
    let thread = std::thread::spawn(move || rt.block_on(serve(listener, svc, Some(rx))));
    Ok(StubServer {
        addr: local,
        service,
        shutdown: Some(tx),
        thread: Some(thread),
    })
}

/// Serves the stub on the calling thread until the process is terminated.
/// `on_ready` runs once the socket is bound.
pub fn run_stub(config: StubConfig, addr: &str, on_ready: impl FnOnce(SocketAddr)) -> Result<(), ServerError> {
    let service = Arc::new(StubService::new(config)?);
    let listener = bind(addr)?;
    let local = listener.local_addr().map_err(|source| ServerError::Bind {
        addr: addr.to_string(),
        source,
    })?;
    let rt = runtime()?;
    on_ready(local);
    rt.block_on(serve(listener, service, None))
        .map_err(ServerError::Runtime)
}
