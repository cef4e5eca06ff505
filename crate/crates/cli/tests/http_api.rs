use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use conceptbase::ConceptBase;
use conceptbase_cli::http::{router, AppState};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, value)
}

fn app() -> (Router, AppState) {
    let state = AppState::new(ConceptBase::default(), None);
    (router(state.clone()), state)
}

async fn assert_valid(app: &Router) {
    let (status, report) = call(app, "GET", "/validate", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(report, json!([]));
}

#[tokio::test]
async fn jack_end_to_end() {
    let (app, _) = app();
    let (status, report) = call(
        &app,
        "POST",
        "/ingest",
        Some(json!({ "text": "Jack wore a white shirt and blue trousers." })),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(report["concepts"], 4);
    assert_eq!(report["descriptors"], 3);
    assert_valid(&app).await;

    let (status, result) = call(
        &app,
        "POST",
        "/query",
        Some(json!({ "query": "[shirt:white] AND [trousers:?]" })),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let id = result["result_id"].as_u64().unwrap();
    assert_eq!(result["solutions"][0]["score"], 6.0);
    assert_eq!(result["filled"][0][1]["descriptor"], "blue");
    assert_eq!(result["filled"][0][1]["descriptor_suggested"], true);

    let approve = format!("/results/{id}/approve");
    let (status, approval) = call(&app, "POST", &approve, Some(json!({ "solution_index": 0 }))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(approval["descriptor_links"].as_array().unwrap().len(), 1);
    assert_valid(&app).await;

    let (status, again) = call(&app, "POST", &approve, Some(json!({ "solution_index": 0 }))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert!(again["error"].as_str().unwrap().contains("settled"));

    let (_, trees) = call(&app, "GET", "/trees", None).await;
    assert_eq!(trees[0]["key"], "T1");
    assert_eq!(trees[0]["base"], "jack");
    let (status, detail) = call(&app, "GET", "/trees/T1", None).await;
    assert_eq!(status, StatusCode::OK);
    let link = &detail["descriptor_links"][0];
    let mut words = [
        link["from"]["word"].as_str().unwrap(),
        link["to"]["word"].as_str().unwrap(),
    ];
    words.sort();
    assert_eq!(words, ["blue", "white"]);
    assert_eq!(link["strength"], 1);
    assert_eq!(link["level"], 1);

    let (_, reverse) = call(
        &app,
        "POST",
        "/query",
        Some(json!({ "query": "[shirt:white] AND [?:blue]" })),
    )
    .await;
    assert_eq!(reverse["sources"][1], "linked_descriptors");
    assert_eq!(reverse["filled"][0][1]["concept"], "trousers");
}

#[tokio::test]
async fn error_statuses() {
    let (app, _) = app();
    call(&app, "POST", "/ingest", Some(json!({ "text": "cat drank milk" }))).await;

    let (status, body) = call(&app, "POST", "/query", Some(json!({ "query": "[cat:" }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(body["position"].is_u64());

    assert_eq!(call(&app, "GET", "/trees/T99", None).await.0, StatusCode::NOT_FOUND);
    assert_eq!(
        call(&app, "GET", "/trees/nonsense", None).await.0,
        StatusCode::NOT_FOUND
    );
    assert_eq!(call(&app, "GET", "/results/999", None).await.0, StatusCode::NOT_FOUND);
    assert_eq!(
        call(&app, "GET", "/globals/999/trigger", None).await.0,
        StatusCode::NOT_FOUND
    );
    let (status, _) = call(
        &app,
        "POST",
        "/results/999/approve",
        Some(json!({ "solution_index": 0 })),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(
        call(&app, "POST", "/results/999/reject", None).await.0,
        StatusCode::NOT_FOUND
    );

    let (_, result) = call(&app, "POST", "/query", Some(json!({ "query": "[cat]" }))).await;
    let id = result["result_id"].as_u64().unwrap();
    let (status, _) = call(
        &app,
        "POST",
        &format!("/results/{id}/approve"),
        Some(json!({ "solution_index": 7 })),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(
        call(&app, "POST", &format!("/results/{id}/reject"), None).await.0,
        StatusCode::OK
    );
    assert_eq!(
        call(&app, "POST", &format!("/results/{id}/reject"), None).await.0,
        StatusCode::CONFLICT
    );
}

#[tokio::test]
async fn stale_result_conflicts() {
    let (app, _) = app();
    call(
        &app,
        "POST",
        "/ingest",
        Some(json!({ "text": "Jack wore a white shirt." })),
    )
    .await;
    let (_, result) = call(&app, "POST", "/query", Some(json!({ "query": "[shirt:white]" }))).await;
    let id = result["result_id"].as_u64().unwrap();
    call(
        &app,
        "POST",
        "/ingest",
        Some(json!({ "text": "wore shirt. wore shirt." })),
    )
    .await;
    let (status, _) = call(
        &app,
        "POST",
        &format!("/results/{id}/approve"),
        Some(json!({ "solution_index": 0 })),
    )
    .await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_valid(&app).await;
}

#[tokio::test]
async fn globals_trigger_and_maintenance() {
    let (app, state) = app();
    call(
        &app,
        "POST",
        "/ingest",
        Some(json!({ "text": "cat drank milk. dog ate bread. boy ran quickly" })),
    )
    .await;
    let mut ids = Vec::new();
    for q in ["[cat] AND [dog]", "[dog] AND [boy]"] {
        let (_, r) = call(&app, "POST", "/query", Some(json!({ "query": q }))).await;
        let id = r["result_id"].as_u64().unwrap();
        let (_, a) = call(
            &app,
            "POST",
            &format!("/results/{id}/approve"),
            Some(json!({ "solution_index": 0 })),
        )
        .await;
        ids.push(a["global_id"].as_u64().unwrap());
    }
    let (_, globals) = call(&app, "GET", "/globals", None).await;
    assert_eq!(globals.as_array().unwrap().len(), 2);
    let (status, t) = call(&app, "GET", &format!("/globals/{}/trigger", ids[0]), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(t["trees"], json!(["T1", "T2", "T3"]));

    for _ in 0..3 {
        let (status, report) = call(&app, "POST", "/maintain", None).await;
        assert_eq!(status, StatusCode::OK);
        assert!(report["decay"]["cycle"].is_u64());
        assert_valid(&app).await;
    }
    let (_, stats) = call(&app, "GET", "/stats", None).await;
    assert_eq!(stats["maintenance_cycle"], 3);
    assert_eq!(stats["trees"], state.base.read().await.tree_count());
}

#[tokio::test]
async fn mutations_are_persisted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("api.cbase.json");
    let state = AppState::new(ConceptBase::default(), Some(path.clone()));
    let app = router(state.clone());
    call(&app, "POST", "/ingest", Some(json!({ "text": "cat drank milk" }))).await;
    let saved = ConceptBase::load(&path).unwrap();
    assert_eq!(saved, *state.base.read().await);
}

#[tokio::test]
async fn cors_headers_are_sent() {
    let (app, _) = app();
    let req = Request::builder()
        .uri("/stats")
        .header("origin", "http://localhost:5173")
        .body(Body::empty())
        .unwrap();
    let resp = app.oneshot(req).await.unwrap();
    assert!(resp.headers().contains_key("access-control-allow-origin"));
}
