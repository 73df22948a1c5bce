//! In-process HTTP server implementing the remote solve protocol over the
//! local backends, with a few deliberately faulty modes for client testing.

use std::net::SocketAddr;
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use axum::extract::State;
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::{Json, Router};
use serde_json::json;
use tokio::sync::oneshot;

use super::{brute_force, simulated_annealing, SaParams, SolveRequest, SolveResponse};
use crate::error::Result;
use crate::ising::SpinConfig;

#[derive(Clone, Debug, PartialEq)]
pub enum LoopbackMode {
    Brute,
    Sa(SaParams),
    /// Answers with one spin fewer than requested.
    WrongLength,
    /// Answers with all spins up, whatever the problem.
    AllUp,
    /// Sleeps before answering with the exhaustive optimum.
    Delay(Duration),
    /// Answers with a body that is not JSON.
    Garbage,
}

#[derive(Clone, Debug)]
pub struct LoopbackConfig {
    pub mode: LoopbackMode,
    pub capacity: usize,
    /// Bearer token the server insists on, if any.
    pub token: Option<String>,
}

impl LoopbackConfig {
    pub fn new(mode: LoopbackMode) -> Self {
        Self {
            mode,
            capacity: super::BRUTE_FORCE_MAX_SITES,
            token: None,
        }
    }
}

/// Running loopback server; shuts down when dropped.
pub struct LoopbackServer {
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
}

impl LoopbackServer {
    pub fn spawn(config: LoopbackConfig) -> Result<Self> {
        let listener = std::net::TcpListener::bind("127.0.0.1:0")?;
        listener.set_nonblocking(true)?;
        let addr = listener.local_addr()?;
        let (tx, rx) = oneshot::channel::<()>();
        let state = Arc::new(config);
        thread::Builder::new().name("loopback-annealer".into()).spawn(move || {
            let runtime = tokio::runtime::Builder::new_current_thread()
                .enable_all()
                .build()
                .expect("tokio runtime");
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(listener).expect("listener");
                let app = Router::new().route("/solve", post(handle)).with_state(state);
                let _ = axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = rx.await;
                    })
                    .await;
            });
        })?;
        Ok(Self {
            addr,
            shutdown: Some(tx),
        })
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }
}

impl Drop for LoopbackServer {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
    }
}

async fn handle(
    State(config): State<Arc<LoopbackConfig>>,
    headers: HeaderMap,
    Json(req): Json<SolveRequest>,
) -> Response {
    if let Some(expected) = &config.token {
        let given = headers.get(header::AUTHORIZATION).and_then(|v| v.to_str().ok());
        if given != Some(format!("Bearer {expected}").as_str()) {
            return (StatusCode::UNAUTHORIZED, Json(json!({"error": "bad token"}))).into_response();
        }
    }
    if req.n > config.capacity {
        return (
            StatusCode::PAYLOAD_TOO_LARGE,
            Json(json!({"error": "problem too large", "capacity": config.capacity})),
        )
            .into_response();
    }
    let problem = match req.to_problem() {
        Ok(p) => p,
        Err(e) => return (StatusCode::BAD_REQUEST, Json(json!({"error": e.to_string()}))).into_response(),
    };
    let mode = config.mode.clone();
    if let LoopbackMode::Delay(d) = &mode {
        tokio::time::sleep(*d).await;
    }
    if mode == LoopbackMode::Garbage {
        return (StatusCode::OK, "not json").into_response();
    }
    let reads = req.num_reads as u64;
    let solved = tokio::task::spawn_blocking(move || -> Result<SolveResponse> {
        let (spins, energy) = match &mode {
            LoopbackMode::Sa(params) => {
                let r = simulated_annealing(&problem, params, None)?;
                (r.spins, r.energy)
            }
            LoopbackMode::AllUp => {
                let s = SpinConfig::all_up(problem.n_sites());
                let e = problem.energy(&s)?;
                (s, e)
            }
            _ => {
                let r = brute_force(&problem, None)?;
                (r.spins, r.energy)
            }
        };
        let mut spins: Vec<i64> = spins.iter().map(i64::from).collect();
        if mode == LoopbackMode::WrongLength {
            spins.pop();
        }
        Ok(SolveResponse {
            spins,
            energy,
            reads_used: reads,
        })
    })
    .await;
    match solved {
        Ok(Ok(resp)) => (StatusCode::OK, Json(resp)).into_response(),
        Ok(Err(e)) => (StatusCode::INTERNAL_SERVER_ERROR, Json(json!({"error": e.to_string()}))).into_response(),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, Json(json!({"error": e.to_string()}))).into_response(),
    }
}
