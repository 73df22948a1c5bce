//! Client for a remote annealer speaking JSON over HTTP.
//!
//! `POST <endpoint>/solve` with
//! `{"n": int, "J": [[i, j, value], ...], "h": [...], "num_reads": int, "timeout_ms": int}`
//! answered by `{"spins": [...], "energy": float, "reads_used": int}`.
//! HTTP 413 signals that the problem exceeds the remote's capacity.

use std::time::{Duration, Instant};

use reqwest::StatusCode;
use serde::{Deserialize, Serialize};

use super::{check_warm_start, finish, greedy_descent, SubsolverResult};
use crate::error::{RemoteError, Result};
use crate::ising::{IsingProblem, SpinConfig};
use crate::scalar::Scalar;

/// Environment variable whose value is sent as a bearer token.
pub const TOKEN_ENV: &str = "FLUXANNEAL_REMOTE_TOKEN";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemoteConfig {
    pub endpoint: String,
    #[serde(with = "millis")]
    pub timeout: Duration,
    pub num_reads: u32,
    #[serde(skip)]
    pub token: Option<String>,
    /// Run a local steepest-descent pass on the returned sample.
    #[serde(default)]
    pub polish: bool,
}

impl RemoteConfig {
    /// Config for `endpoint` with the token taken from the environment.
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            timeout: Duration::from_secs(30),
            num_reads: 100,
            token: std::env::var(TOKEN_ENV).ok().filter(|t| !t.is_empty()),
            polish: false,
        }
    }

    pub fn with_timeout(self, timeout: Duration) -> Self {
        Self { timeout, ..self }
    }

    fn solve_url(&self) -> String {
        let base = self.endpoint.trim_end_matches('/');
        if base.ends_with("/solve") {
            base.to_string()
        } else {
            format!("{base}/solve")
        }
    }
}

mod millis {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_millis(u64::deserialize(d)?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveRequest {
    pub n: usize,
    #[serde(rename = "J")]
    pub couplings: Vec<(usize, usize, f64)>,
    pub h: Vec<f64>,
    pub num_reads: u32,
    pub timeout_ms: u64,
}

impl SolveRequest {
    pub fn from_problem<T: Scalar>(problem: &IsingProblem<T>, num_reads: u32, timeout: Duration) -> Self {
        Self {
            n: problem.n_sites(),
            couplings: problem
                .upper_pairs()
                .into_iter()
                .map(|(i, j, v)| (i, j, v.as_f64()))
                .collect(),
            h: problem.fields().iter().map(|h| h.as_f64()).collect(),
            num_reads,
            timeout_ms: timeout.as_millis() as u64,
        }
    }

    pub fn to_problem(&self) -> Result<IsingProblem<f64>> {
        IsingProblem::from_pairs(self.n, self.couplings.iter().copied(), self.h.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResponse {
    pub spins: Vec<i64>,
    pub energy: f64,
    pub reads_used: u64,
}

#[derive(Deserialize)]
struct CapacityBody {
    capacity: Option<usize>,
}

/// Sends `problem` to the remote annealer and returns its best sample, or the
/// warm start if that is better.
pub fn remote_solve<T: Scalar>(
    problem: &IsingProblem<T>,
    config: &RemoteConfig,
    warm_start: Option<&SpinConfig>,
) -> Result<SubsolverResult<T>> {
    let started = Instant::now();
    check_warm_start(problem, warm_start)?;
    let n = problem.n_sites();
    let request = SolveRequest::from_problem(problem, config.num_reads, config.timeout);

    let client = reqwest::blocking::Client::builder()
        .timeout(config.timeout)
        .build()
        .map_err(|e| RemoteError::Transport(e.to_string()))?;
    let mut call = client.post(config.solve_url()).json(&request);
    if let Some(token) = &config.token {
        call = call.bearer_auth(token);
    }
    let transport = |e: reqwest::Error| {
        if e.is_timeout() {
            RemoteError::Timeout(config.timeout)
        } else {
            RemoteError::Transport(e.to_string())
        }
    };
    let response = call.send().map_err(transport)?;
    let status = response.status();
    let body = response.bytes().map_err(transport)?;
    if status == StatusCode::PAYLOAD_TOO_LARGE {
        let capacity = serde_json::from_slice::<CapacityBody>(&body).ok().and_then(|b| b.capacity);
        return Err(RemoteError::CapacityExceeded { n, capacity }.into());
    }
    if !status.is_success() {
        return Err(RemoteError::Transport(format!("HTTP {status}: {}", String::from_utf8_lossy(&body))).into());
    }
    let reply: SolveResponse =
        serde_json::from_slice(&body).map_err(|e| RemoteError::Malformed(format!("undecodable body: {e}")))?;
    let spins = decode_spins(&reply, n)?;

    let claimed = reply.energy;
    let actual = problem.energy(&spins)?.as_f64();
    if !claimed.is_finite() || (claimed - actual).abs() > 1e-6 * (1.0 + actual.abs()) {
        return Err(RemoteError::Malformed(format!("reported energy {claimed} but the spins give {actual}")).into());
    }
    let spins = if config.polish {
        greedy_descent(problem, &spins)?
    } else {
        spins
    };
    finish(problem, spins, warm_start, "remote", started, reply.reads_used)
}

fn decode_spins(reply: &SolveResponse, n: usize) -> Result<SpinConfig, RemoteError> {
    if reply.spins.len() != n {
        return Err(RemoteError::Malformed(format!(
            "expected {n} spins, got {}",
            reply.spins.len()
        )));
    }
    let spins = reply
        .spins
        .iter()
        .map(|&s| match s {
            1 => Ok(1i8),
            -1 => Ok(-1i8),
            other => Err(RemoteError::Malformed(format!("spin value {other}"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    SpinConfig::new(spins).map_err(|e| RemoteError::Malformed(e.to_string()))
}
