//! HTTP facade over a twinmat workspace.
//!
//! All bodies are JSON. Exact rationals travel as
//! `{"value": "<decimal>", "rational": "p/q"}`. Errors use [`ApiError`] with
//! the status fixed by [`STATUS_TABLE`].

mod error;

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{middleware, Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use tokio::net::TcpListener;
use tokio::sync::{oneshot, Mutex};
use tokio::task::JoinHandle;
use tower_http::services::ServeDir;

use twinmat_core::analysis::{compare, what_if, ComparisonReport, Overrides, WhatIfDelta};
use twinmat_core::gatekeeper::{evaluate_gates, gate_report, GateChecklist, GateVerdict};
use twinmat_core::schema::{MaturityModel, ModelRef, BUILTIN_MODEL_ID, BUILTIN_MODEL_VERSION};
use twinmat_core::scorer::{score_assessment, Assessment, RoundingPolicy, ScoreReport};
use twinmat_core::store::{AssessmentFilter, HistoryEntry, Workspace};
use twinmat_core::Error;

pub use error::{status_for, ApiError, Failure, STATUS_TABLE};

type ApiResult<T> = std::result::Result<T, Failure>;

#[derive(Clone)]
pub struct AppState {
    workspace: Arc<Workspace>,
    // serializes the read-modify-append sequences; the store itself is the
    // single writer on disk
    writes: Arc<Mutex<()>>,
}

impl AppState {
    pub fn new(workspace: Workspace) -> Self {
        Self {
            workspace: Arc::new(workspace),
            writes: Arc::new(Mutex::new(())),
        }
    }

    pub fn workspace(&self) -> &Workspace {
        &self.workspace
    }
}

#[derive(Debug, Clone, Default)]
pub struct ServiceConfig {
    /// Directory of a built UI bundle served under `/`.
    pub static_dir: Option<PathBuf>,
}

pub fn router(state: AppState) -> Router {
    router_with(state, &ServiceConfig::default())
}

pub fn router_with(state: AppState, config: &ServiceConfig) -> Router {
    let api = Router::new()
        .route("/models", get(list_models))
        .route("/models/{id}/{version}", get(get_model))
        .route(
            "/assessments",
            post(create_assessment).get(list_assessments),
        )
        .route("/assessments/{id}", get(get_assessment))
        .route("/assessments/{id}/score", post(score))
        .route("/assessments/{id}/history", get(history))
        .route("/gate", post(gate))
        .route("/whatif", post(whatif))
        .route("/compare", get(compare_ids))
        .fallback(api_fallback);

    let mut app = Router::new()
        .nest("/api/v1", api)
        .route("/healthz", get(healthz));
    if let Some(dir) = &config.static_dir {
        app = app.fallback_service(ServeDir::new(dir));
    }
    app.layer(middleware::from_fn(error::attach_path))
        .with_state(state)
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        source: std::io::Error,
    },
    #[error(transparent)]
    Workspace(#[from] Error),
}

/// A running server. Dropping the handle does not stop it; call
/// [`ServiceHandle::shutdown`].
pub struct ServiceHandle {
    local_addr: SocketAddr,
    stop: Option<oneshot::Sender<()>>,
    task: JoinHandle<std::io::Result<()>>,
}

impl ServiceHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.local_addr
    }

    /// Stop accepting connections and wait for in-flight requests, and so
    /// for their writes, to finish.
    pub async fn shutdown(mut self) -> std::io::Result<()> {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        self.task.await.map_err(std::io::Error::other)?
    }

    /// Run until the server exits on its own (it normally does not).
    pub async fn wait(self) -> std::io::Result<()> {
        let _keep = self.stop;
        self.task.await.map_err(std::io::Error::other)?
    }
}

/// Open `root` as the single writer and serve it on `addr`.
pub async fn serve_dir(
    root: impl Into<PathBuf>,
    addr: SocketAddr,
    config: ServiceConfig,
) -> Result<ServiceHandle, ServeError> {
    let workspace = Workspace::open_writer(root)?;
    serve(workspace, addr, config).await
}

pub async fn serve(
    workspace: Workspace,
    addr: SocketAddr,
    config: ServiceConfig,
) -> Result<ServiceHandle, ServeError> {
    if !workspace.is_writer() {
        return Err(
            Error::LockHeld(format!("{} is open read-only", workspace.root().display())).into(),
        );
    }
    let listener = TcpListener::bind(addr)
        .await
        .map_err(|source| ServeError::Bind { addr, source })?;
    let local_addr = listener
        .local_addr()
        .map_err(|source| ServeError::Bind { addr, source })?;
    let app = router_with(AppState::new(workspace), &config);
    let (stop, stopped) = oneshot::channel::<()>();
    let task = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = stopped.await;
            })
            .await
    });
    Ok(ServiceHandle {
        local_addr,
        stop: Some(stop),
        task,
    })
}

fn parse_body<T: serde::de::DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| Failure::from(Error::from(e)))
}

fn parse_rounding(value: Option<&str>) -> ApiResult<RoundingPolicy> {
    match value {
        None | Some("exact") => Ok(RoundingPolicy::Exact),
        Some("display2dp") => Ok(RoundingPolicy::Display2dp),
        Some(other) => Err(Failure::bad_request(format!(
            "rounding must be `exact` or `display2dp`, got `{other}`"
        ))),
    }
}

async fn api_fallback() -> Failure {
    Failure::not_found("no such endpoint")
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub models: usize,
}

async fn healthz(State(s): State<AppState>) -> Json<Health> {
    Json(Health {
        status: "ok".into(),
        models: s.workspace.models().len(),
    })
}

async fn list_models(State(s): State<AppState>) -> Json<Vec<MaturityModel>> {
    Json(s.workspace.models())
}

async fn get_model(
    State(s): State<AppState>,
    Path((id, version)): Path<(String, String)>,
) -> ApiResult<Json<MaturityModel>> {
    Ok(Json(s.workspace.model(&ModelRef { id, version })?))
}

/// Stored assessment body. `id` is ignored; `timestamp` defaults to now and
/// `model_ref` to the builtin model.
async fn create_assessment(
    State(s): State<AppState>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<Assessment>)> {
    let mut doc: Value = parse_body(&body)?;
    let obj = doc
        .as_object_mut()
        .ok_or_else(|| Failure::bad_request("assessment must be a JSON object"))?;
    obj.remove("id");
    obj.entry("timestamp")
        .or_insert_with(|| serde_json::to_value(s.workspace.now()).unwrap_or(Value::Null));
    obj.entry("model_ref").or_insert_with(
        || serde_json::json!({ "id": BUILTIN_MODEL_ID, "version": BUILTIN_MODEL_VERSION }),
    );
    let assessment: Assessment =
        serde_json::from_value(doc).map_err(|e| Failure::from(Error::from(e)))?;

    let _guard = s.writes.lock().await;
    let id = s.workspace.put_assessment(&assessment)?;
    Ok((StatusCode::CREATED, Json(s.workspace.get_assessment(&id)?)))
}

#[derive(Debug, Default, Deserialize)]
struct ListQuery {
    model: Option<String>,
    subject: Option<String>,
    rater: Option<String>,
}

async fn list_assessments(
    State(s): State<AppState>,
    Query(q): Query<ListQuery>,
) -> ApiResult<Json<Vec<Assessment>>> {
    let filter = AssessmentFilter {
        model: q.model.as_deref().map(str::parse).transpose()?,
        subject: q.subject,
        rater: q.rater,
    };
    Ok(Json(s.workspace.list_assessments(&filter)?))
}

async fn get_assessment(
    State(s): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Json<Assessment>> {
    Ok(Json(s.workspace.get_assessment(&id)?))
}

#[derive(Debug, Default, Deserialize)]
struct RoundingQuery {
    rounding: Option<String>,
}

/// Score the stored assessment and append the report to its history.
async fn score(
    State(s): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<RoundingQuery>,
) -> ApiResult<Json<ScoreReport>> {
    let policy = parse_rounding(q.rounding.as_deref())?;
    let _guard = s.writes.lock().await;
    let a = s.workspace.get_assessment(&id)?;
    let model = s.workspace.model(&a.model_ref)?;
    let report = score_assessment(&a, &model, policy)?;
    s.workspace.append_history(&id, &report)?;
    Ok(Json(report))
}

async fn history(
    State(s): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Json<Vec<HistoryEntry>>> {
    Ok(Json(s.workspace.read_history(&id)?))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateRequest {
    #[serde(default)]
    pub model_ref: Option<ModelRef>,
    pub answers: BTreeMap<String, bool>,
    #[serde(default)]
    pub notes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateResponse {
    pub verdict: GateVerdict,
    pub report: String,
}

fn builtin_ref() -> ModelRef {
    ModelRef {
        id: BUILTIN_MODEL_ID.into(),
        version: BUILTIN_MODEL_VERSION.into(),
    }
}

/// Evaluate a checklist. A refusal is a normal 200 answer here; only
/// scoring treats it as an error.
async fn gate(State(s): State<AppState>, body: Bytes) -> ApiResult<Json<GateResponse>> {
    let req: GateRequest = parse_body(&body)?;
    let model = s
        .workspace
        .model(&req.model_ref.unwrap_or_else(builtin_ref))?;
    let checklist = GateChecklist {
        answers: req.answers,
        notes: req.notes,
    };
    let verdict = evaluate_gates(&checklist, &model)?;
    let report = gate_report(&verdict, &checklist, &model)?;
    Ok(Json(GateResponse { verdict, report }))
}

/// Either a stored assessment id or an inline assessment, plus overrides.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WhatIfRequest {
    #[serde(default)]
    pub assessment_id: Option<String>,
    #[serde(default)]
    pub assessment: Option<Assessment>,
    #[serde(default)]
    pub overrides: Overrides,
}

async fn whatif(State(s): State<AppState>, body: Bytes) -> ApiResult<Json<WhatIfDelta>> {
    let req: WhatIfRequest = parse_body(&body)?;
    let base = match (req.assessment_id, req.assessment) {
        (Some(id), None) => s.workspace.get_assessment(&id)?,
        (None, Some(a)) => a,
        _ => {
            return Err(Failure::bad_request(
                "give exactly one of `assessment_id` and `assessment`",
            ))
        }
    };
    let model = s.workspace.model(&base.model_ref)?;
    Ok(Json(what_if(&base, &req.overrides, &model)?))
}

#[derive(Debug, Default, Deserialize)]
struct CompareQuery {
    ids: Option<String>,
}

async fn compare_ids(
    State(s): State<AppState>,
    Query(q): Query<CompareQuery>,
) -> ApiResult<Json<ComparisonReport>> {
    let ids: Vec<&str> = q
        .ids
        .as_deref()
        .unwrap_or("")
        .split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .collect();
    if ids.is_empty() {
        return Err(Failure::bad_request(
            "`ids` must list at least one assessment",
        ));
    }
    let mut portfolio = Vec::with_capacity(ids.len());
    for id in ids {
        let a = s.workspace.get_assessment(id)?;
        let model = s.workspace.model(&a.model_ref)?;
        let r = score_assessment(&a, &model, RoundingPolicy::Exact)?;
        portfolio.push((a, r));
    }
    Ok(Json(compare(&portfolio)?))
}
