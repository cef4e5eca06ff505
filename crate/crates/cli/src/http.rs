//! JSON HTTP API over a shared concept base.
//!
//! Every handler takes the one lock on the base, so mutations are applied one
//! at a time. When the state has a file path, the base is saved after each
//! mutation.

use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use conceptbase::{fill_slots, ConceptBase, Error, TreeKey};
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::RwLock;
use tower_http::cors::CorsLayer;

use crate::Stats;

#[derive(Clone)]
pub struct AppState {
    pub base: Arc<RwLock<ConceptBase>>,
    pub path: Option<PathBuf>,
}

impl AppState {
    pub fn new(base: ConceptBase, path: Option<PathBuf>) -> Self {
        AppState {
            base: Arc::new(RwLock::new(base)),
            path,
        }
    }

    fn persist(&self, base: &ConceptBase) -> Result<(), ApiError> {
        if let Some(path) = &self.path {
            base.save(path)?;
        }
        Ok(())
    }
}

pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let mut body = json!({ "error": e.to_string() });
        if let Error::Parse { position, .. } = &e {
            body["position"] = json!(position);
        }
        ApiError {
            status: status_for(&e),
            body,
        }
    }
}

pub fn status_for(error: &Error) -> StatusCode {
    match error {
        Error::Parse { .. } | Error::RejectedTerm { .. } | Error::EmptySequence | Error::SelfLink(_) => {
            StatusCode::BAD_REQUEST
        }
        Error::KeyNotFound(_)
        | Error::NodeNotFound { .. }
        | Error::DescriptorNotFound(_)
        | Error::UnknownResult(_)
        | Error::NoSuchSolution { .. }
        | Error::UnknownGlobal(_) => StatusCode::NOT_FOUND,
        Error::ResultSettled(_) | Error::StaleResult { .. } => StatusCode::CONFLICT,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult = Result<Json<Value>, ApiError>;

fn to_value(value: impl serde::Serialize) -> Value {
    serde_json::to_value(value).expect("response serializes")
}

#[derive(Deserialize)]
struct IngestRequest {
    text: String,
}

#[derive(Deserialize)]
struct QueryRequest {
    query: String,
}

#[derive(Deserialize)]
struct ApproveRequest {
    solution_index: usize,
}

async fn ingest(State(state): State<AppState>, Json(req): Json<IngestRequest>) -> ApiResult {
    let mut base = state.base.write().await;
    let report = base.ingest_text(&req.text)?;
    state.persist(&base)?;
    Ok(Json(to_value(report)))
}

async fn query(State(state): State<AppState>, Json(req): Json<QueryRequest>) -> ApiResult {
    let mut base = state.base.write().await;
    let result = base.execute_query(&req.query)?;
    state.persist(&base)?;
    let filled: Vec<_> = result.solutions.iter().map(|s| fill_slots(&result.query, s)).collect();
    Ok(Json(json!({
        "result_id": result.id,
        "query": result.query.to_string(),
        "solutions": result.solutions,
        "filled": filled,
        "sources": result.sources,
    })))
}

async fn get_result(State(state): State<AppState>, Path(id): Path<u64>) -> ApiResult {
    let base = state.base.read().await;
    let result = base.result(id).ok_or(Error::UnknownResult(id))?;
    Ok(Json(to_value(result)))
}

async fn approve(State(state): State<AppState>, Path(id): Path<u64>, Json(req): Json<ApproveRequest>) -> ApiResult {
    let mut base = state.base.write().await;
    let report = base.approve_result(id, req.solution_index)?;
    state.persist(&base)?;
    Ok(Json(to_value(report)))
}

async fn reject(State(state): State<AppState>, Path(id): Path<u64>) -> ApiResult {
    let mut base = state.base.write().await;
    base.reject_result(id)?;
    state.persist(&base)?;
    Ok(Json(json!({ "result_id": id, "status": "rejected" })))
}

async fn list_trees(State(state): State<AppState>) -> ApiResult {
    let base = state.base.read().await;
    let trees: Vec<Value> = base
        .trees()
        .map(|t| {
            json!({
                "key": t.key,
                "base": t.base.lemma,
                "pos": t.base.pos,
                "count": t.base.count,
                "nodes": t.base.node_count(),
            })
        })
        .collect();
    Ok(Json(Value::Array(trees)))
}

/// The tree plus every descriptor link touching one of its descriptors.
async fn tree_detail(State(state): State<AppState>, Path(key): Path<String>) -> ApiResult {
    let base = state.base.read().await;
    let key: TreeKey = key.parse().map_err(|_| ApiError {
        status: StatusCode::NOT_FOUND,
        body: json!({ "error": format!("unknown tree key {key}") }),
    })?;
    let tree = base.tree(key).ok_or(Error::KeyNotFound(key))?;
    let index = base.descriptor_index();
    let end = |id| {
        let loc = &index[&id];
        json!({ "id": id, "word": loc.word, "key": loc.key, "path": loc.path })
    };
    let links: Vec<Value> = base
        .descriptor_links()
        .filter(|l| {
            index.get(&l.from_id).is_some_and(|d| d.key == key) || index.get(&l.to_id).is_some_and(|d| d.key == key)
        })
        .map(|l| {
            json!({
                "from": end(l.from_id),
                "to": end(l.to_id),
                "level": l.state.level,
                "strength": l.state.strength,
            })
        })
        .collect();
    Ok(Json(json!({ "tree": tree, "descriptor_links": links })))
}

async fn list_globals(State(state): State<AppState>) -> ApiResult {
    let base = state.base.read().await;
    Ok(Json(to_value(base.global_nodes().collect::<Vec<_>>())))
}

async fn trigger(State(state): State<AppState>, Path(id): Path<u64>) -> ApiResult {
    let base = state.base.read().await;
    let trees = base.trigger(id)?;
    Ok(Json(json!({ "global_id": id, "trees": trees })))
}

async fn maintain(State(state): State<AppState>) -> ApiResult {
    let mut base = state.base.write().await;
    let report = base.maintain()?;
    state.persist(&base)?;
    Ok(Json(to_value(report)))
}

async fn stats(State(state): State<AppState>) -> ApiResult {
    let base = state.base.read().await;
    Ok(Json(to_value(Stats::of(&base))))
}

async fn validate(State(state): State<AppState>) -> ApiResult {
    let base = state.base.read().await;
    Ok(Json(to_value(base.validate())))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/ingest", post(ingest))
        .route("/query", post(query))
        .route("/results/{id}", get(get_result))
        .route("/results/{id}/approve", post(approve))
        .route("/results/{id}/reject", post(reject))
        .route("/trees", get(list_trees))
        .route("/trees/{key}", get(tree_detail))
        .route("/globals", get(list_globals))
        .route("/globals/{id}/trigger", get(trigger))
        .route("/maintain", post(maintain))
        .route("/stats", get(stats))
        .route("/validate", get(validate))
        .layer(CorsLayer::permissive())
        .with_state(state)
}
