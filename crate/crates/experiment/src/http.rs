//! JSON-over-HTTP API. Handlers hand each command to the blocking pool, since
//! model calls inside a command are synchronous.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use humility_core::assets::CONSENT_TEXT;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::engine::FeedbackChoice;
use crate::service::ExperimentService;
use crate::survey::SurveyResponse;
use crate::ExperimentError;

pub const IDEMPOTENCY_HEADER: &str = "idempotency-key";

type Svc = Arc<ExperimentService>;

pub struct ApiError(ExperimentError);

impl From<ExperimentError> for ApiError {
    fn from(e: ExperimentError) -> Self {
        ApiError(e)
    }
}

pub fn status_for(e: &ExperimentError) -> StatusCode {
    match e {
        ExperimentError::NotFound(_) => StatusCode::NOT_FOUND,
        ExperimentError::Validation(_) => StatusCode::UNPROCESSABLE_ENTITY,
        ExperimentError::IllegalTransition { .. }
        | ExperimentError::MustResolveFeedback { .. }
        | ExperimentError::IllegalState(_) => StatusCode::CONFLICT,
        ExperimentError::Classify(_) => StatusCode::SERVICE_UNAVAILABLE,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = status_for(&self.0);
        if status.is_server_error() {
            tracing::error!(error = %self.0, "request failed");
        }
        (status, Json(self.0.body())).into_response()
    }
}

async fn blocking<T, F>(svc: Svc, f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce(&ExperimentService) -> Result<T, ExperimentError> + Send + 'static,
{
    tokio::task::spawn_blocking(move || f(&svc))
        .await
        .map_err(|e| ApiError(ExperimentError::IllegalState(format!("worker failed: {e}"))))?
        .map_err(ApiError)
}

#[derive(Debug, Deserialize)]
struct EnrollBody {
    external_id: String,
}

#[derive(Debug, Deserialize)]
struct CommentBody {
    text: String,
    #[serde(default)]
    request_key: Option<String>,
}

#[derive(Debug, Deserialize)]
struct ResolutionBody {
    #[serde(flatten)]
    choice: FeedbackChoice,
    #[serde(default)]
    request_key: Option<String>,
}

#[derive(Debug, Serialize)]
struct ExportBody {
    participants: String,
    comments: String,
    surveys: String,
}

fn request_key(body: Option<String>, headers: &HeaderMap) -> Option<String> {
    body.or_else(|| headers.get(IDEMPOTENCY_HEADER).and_then(|v| v.to_str().ok()).map(str::to_string))
        .filter(|k| !k.is_empty())
}

async fn enroll(State(svc): State<Svc>, Json(body): Json<EnrollBody>) -> Result<Response, ApiError> {
    let reply = blocking(svc, move |s| s.enroll(&body.external_id)).await?;
    let status = if reply.created { StatusCode::CREATED } else { StatusCode::OK };
    Ok((status, Json(reply)).into_response())
}

async fn consent(State(svc): State<Svc>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let phase = blocking(svc, move |s| s.consent(&id)).await?;
    Ok(Json(json!({ "phase": phase })).into_response())
}

async fn pre_survey(
    State(svc): State<Svc>,
    Path(id): Path<String>,
    Json(body): Json<SurveyResponse>,
) -> Result<Response, ApiError> {
    Ok(Json(blocking(svc, move |s| s.submit_pre_survey(&id, body)).await?).into_response())
}

async fn feed(State(svc): State<Svc>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(Json(blocking(svc, move |s| s.feed(&id)).await?).into_response())
}

async fn comment(
    State(svc): State<Svc>,
    Path((id, thread)): Path<(String, String)>,
    headers: HeaderMap,
    Json(body): Json<CommentBody>,
) -> Result<Response, ApiError> {
    let key = request_key(body.request_key, &headers);
    Ok(Json(blocking(svc, move |s| s.submit_comment(&id, &thread, &body.text, key)).await?).into_response())
}

async fn resolution(
    State(svc): State<Svc>,
    Path(id): Path<String>,
    headers: HeaderMap,
    Json(body): Json<ResolutionBody>,
) -> Result<Response, ApiError> {
    let key = request_key(body.request_key, &headers);
    Ok(Json(blocking(svc, move |s| s.resolve_feedback(&id, body.choice, key)).await?).into_response())
}

async fn advance(State(svc): State<Svc>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let phase = blocking(svc, move |s| s.advance(&id)).await?;
    Ok(Json(json!({ "phase": phase })).into_response())
}

async fn post_survey(
    State(svc): State<Svc>,
    Path(id): Path<String>,
    Json(body): Json<SurveyResponse>,
) -> Result<Response, ApiError> {
    let token = blocking(svc, move |s| s.submit_post_survey(&id, body)).await?;
    Ok(Json(json!({ "phase": "complete", "completion_token": token })).into_response())
}

async fn abandon(State(svc): State<Svc>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let phase = blocking(svc, move |s| s.abandon(&id)).await?;
    Ok(Json(json!({ "phase": phase })).into_response())
}

async fn session(State(svc): State<Svc>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(Json(blocking(svc, move |s| s.session(&id)).await?).into_response())
}

async fn export(State(svc): State<Svc>) -> Result<Response, ApiError> {
    let body = blocking(svc, |s| {
        let [p, c, v] = s.export().to_csv_bytes()?;
        let text = |b: Vec<u8>| String::from_utf8(b).map_err(|e| ExperimentError::Store(e.to_string()));
        Ok(ExportBody { participants: text(p)?, comments: text(c)?, surveys: text(v)? })
    })
    .await?;
    Ok(Json(body).into_response())
}

async fn consent_text() -> &'static str {
    CONSENT_TEXT
}

async fn healthz() -> &'static str {
    "ok"
}

pub fn router(service: Svc) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/consent", get(consent_text))
        .route("/sessions", post(enroll))
        .route("/sessions/{id}", get(session))
        .route("/sessions/{id}/consent", post(consent))
        .route("/sessions/{id}/pre-survey", post(pre_survey))
        .route("/sessions/{id}/feed", get(feed))
        .route("/sessions/{id}/threads/{thread}/comments", post(comment))
        .route("/sessions/{id}/feedback/resolution", post(resolution))
        .route("/sessions/{id}/advance", post(advance))
        .route("/sessions/{id}/post-survey", post(post_survey))
        .route("/sessions/{id}/abandon", post(abandon))
        .route("/admin/export", get(export))
        .with_state(service)
}

/// Serves the API on `addr` until ctrl-c.
pub async fn serve(service: Svc, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "experiment service listening");
    axum::serve(listener, router(service))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
