// SPDX-License-Identifier: Apache-2.0

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde_json::{json, Map, Value};
use std::future::Future;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};
use thiserror::Error;
use tokio::net::TcpListener;
use tokio::sync::oneshot;

use super::graphql::execute_graphql;
use super::service::{QueryService, ServiceConfig};
use super::types::{ApiError, ErrorKind};
use crate::store::load_store;

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        #[source]
        source: std::io::Error,
    },
    #[error("store load failed: {0}")]
    Load(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug)]
pub struct ServeConfig {
    pub addr: SocketAddr,
    pub store_path: PathBuf,
    pub service: ServiceConfig,
}

enum Phase {
    Loading,
    Ready(Arc<QueryService>),
    Failed(String),
}

/// Shared handle on the service; requests see 503 until a store is ready.
#[derive(Clone)]
pub struct AppState {
    phase: Arc<RwLock<Phase>>,
}

impl AppState {
    pub fn loading() -> Self {
        Self { phase: Arc::new(RwLock::new(Phase::Loading)) }
    }

    pub fn ready(service: QueryService) -> Self {
        let s = Self::loading();
        s.set_ready(service);
        s
    }

    pub fn set_ready(&self, service: QueryService) {
        *self.phase.write().expect("state lock") = Phase::Ready(Arc::new(service));
    }

    fn set_failed(&self, message: String) {
        *self.phase.write().expect("state lock") = Phase::Failed(message);
    }

    fn service(&self) -> Result<Arc<QueryService>, ApiError> {
        match &*self.phase.read().expect("state lock") {
            Phase::Ready(s) => Ok(Arc::clone(s)),
            Phase::Loading => Err(ApiError::unavailable()),
            Phase::Failed(m) => Err(ApiError::new(ErrorKind::Unavailable, format!("store failed to load: {m}"))),
        }
    }
}

fn json_response(status: u16, body: &Value) -> Response {
    let status = StatusCode::from_u16(status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    let bytes = serde_json::to_vec(body).expect("serializable");
    (status, [(header::CONTENT_TYPE, "application/json; charset=utf-8")], bytes).into_response()
}

fn plain_error(e: &ApiError) -> Response {
    json_response(e.status(), &json!({ "error": e }))
}

fn graphql_error(e: &ApiError) -> Response {
    let mut ext = json!({ "code": e.kind });
    if let Some(f) = &e.field {
        ext["field"] = Value::from(f.as_str());
    }
    json_response(e.status(), &json!({ "errors": [{ "message": e.message, "extensions": ext }] }))
}

async fn query(State(state): State<AppState>, body: Bytes) -> Response {
    let parsed: Value = match serde_json::from_slice(&body) {
        Ok(v) => v,
        Err(e) => return plain_error(&ApiError::parse_json(&e)),
    };
    let Value::Object(obj) = parsed else {
        return plain_error(&ApiError::new(ErrorKind::Parse, "request body must be a JSON object"));
    };
    let variables = match obj.get("variables") {
        None | Some(Value::Null) => Map::new(),
        Some(Value::Object(m)) => m.clone(),
        Some(_) => return plain_error(&ApiError::validation("variables", "variables must be an object")),
    };
    if let Some(q) = obj.get("query") {
        let Some(q) = q.as_str() else {
            return graphql_error(&ApiError::validation("query", "query must be a string"));
        };
        let q = q.to_string();
        return match state.service() {
            Ok(svc) => match tokio::task::spawn_blocking(move || execute_graphql(&svc, &q, &variables)).await {
                Ok(Ok(body)) => json_response(200, &body),
                Ok(Err(e)) => graphql_error(&e),
                Err(e) => graphql_error(&ApiError::new(ErrorKind::Internal, e.to_string())),
            },
            Err(e) => graphql_error(&e),
        };
    }
    let Some(op) = obj.get("operation").and_then(Value::as_str).map(str::to_string) else {
        return plain_error(&ApiError::validation("operation", "missing operation"));
    };
    match state.service() {
        Ok(svc) => match tokio::task::spawn_blocking(move || svc.execute(&op, &variables)).await {
            Ok(Ok(body)) => json_response(200, &body),
            Ok(Err(e)) => plain_error(&e),
            Err(e) => plain_error(&ApiError::new(ErrorKind::Internal, e.to_string())),
        },
        Err(e) => plain_error(&e),
    }
}

async fn health(State(state): State<AppState>) -> Response {
    match &*state.phase.read().expect("state lock") {
        Phase::Ready(s) => json_response(200, &s.health()),
        Phase::Loading => json_response(503, &json!({ "status": "loading" })),
        Phase::Failed(m) => json_response(503, &json!({ "status": "failed", "error": m })),
    }
}

async fn vertex(State(state): State<AppState>, Path(handle): Path<String>) -> Response {
    match state.service().and_then(|s| s.vertex_detail(&handle)) {
        Ok(doc) => json_response(200, &doc),
        Err(e) => plain_error(&e),
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/query", post(query))
        .route("/health", get(health))
        .route("/vertex/{*handle}", get(vertex))
        .with_state(state)
}

/// A bound listener whose store is loaded once [`Server::run`] starts.
pub struct Server {
    listener: TcpListener,
    state: AppState,
    config: ServeConfig,
}

impl Server {
    pub async fn bind(config: ServeConfig) -> Result<Self, ServeError> {
        let listener = TcpListener::bind(config.addr)
            .await
            .map_err(|source| ServeError::Bind { addr: config.addr, source })?;
        Ok(Self { listener, state: AppState::loading(), config })
    }

    pub fn local_addr(&self) -> std::io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    pub fn state(&self) -> AppState {
        self.state.clone()
    }

    /// Serves until `shutdown` resolves, then stops accepting connections and
    /// lets in-flight requests finish. A store that fails to load also ends
    /// the server, with an error.
    pub async fn run<F>(self, shutdown: F) -> Result<(), ServeError>
    where
        F: Future<Output = ()> + Send + 'static,
    {
        let (fail_tx, fail_rx) = oneshot::channel::<String>();
        let state = self.state.clone();
        let path = self.config.store_path.clone();
        let service_config = self.config.service.clone();
        tokio::task::spawn_blocking(move || {
            let loaded = load_store(&path)
                .map_err(|e| e.to_string())
                .and_then(|store| QueryService::new(Arc::new(store), service_config).map_err(|e| e.message));
            match loaded {
                Ok(svc) => {
                    log::info!("store {} loaded", path.display());
                    state.set_ready(svc);
                }
                Err(m) => {
                    log::error!("store {} failed to load: {m}", path.display());
                    state.set_failed(m.clone());
                    let _ = fail_tx.send(m);
                }
            }
        });

        let failure: Arc<std::sync::Mutex<Option<String>>> = Arc::default();
        let failure_slot = Arc::clone(&failure);
        let stop = async move {
            tokio::pin!(shutdown);
            tokio::select! {
                _ = &mut shutdown => {}
                m = fail_rx => match m {
                    Ok(m) => *failure_slot.lock().expect("failure slot") = Some(m),
                    // Loader finished successfully; wait for the real signal.
                    Err(_) => shutdown.await,
                },
            }
        };
        axum::serve(self.listener, router(self.state)).with_graceful_shutdown(stop).await?;
        let failed = failure.lock().expect("failure slot").take();
        match failed {
            Some(m) => Err(ServeError::Load(m)),
            None => Ok(()),
        }
    }
}

/// Resolves on Ctrl-C or SIGTERM.
pub async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
}
