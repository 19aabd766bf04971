use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use lyapdl_cli::server::{router, AppState};
use serde_json::{json, Value};
use tower::ServiceExt;

const WORKED: &str = include_str!("../../../problems/worked.prob");

async fn call(app: &Router, method: &str, uri: &str, body: impl Into<Body>, json_body: bool) -> (StatusCode, Value, String) {
    let mut req = Request::builder().method(method).uri(uri);
    if json_body {
        req = req.header("content-type", "application/json");
    }
    let res = app.clone().oneshot(req.body(body.into()).unwrap()).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    let text = String::from_utf8_lossy(&bytes).into_owned();
    let v = serde_json::from_str(&text).unwrap_or(Value::Null);
    (status, v, text)
}

async fn session(app: &Router, part: &str) -> String {
    let (st, v, _) = call(app, "POST", &format!("/sessions?part={part}"), WORKED, false).await;
    assert_eq!(st, StatusCode::CREATED);
    v["id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn create_and_fetch_tree() {
    let app = router(Arc::new(AppState::default()));
    let id = session(&app, "full").await;
    let (st, v, _) = call(&app, "GET", &format!("/sessions/{id}/tree"), Body::empty(), false).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(v["format"], 1);
    assert_eq!(v["open_goals"], json!([0]));
    let (st, _, _) = call(&app, "GET", "/sessions/nope/tree", Body::empty(), false).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    let (st, v, _) = call(&app, "POST", "/sessions", "params:\n m = \n", false).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    assert!(v["error"].as_str().unwrap().contains("line"));
}

#[tokio::test]
async fn apply_reports_new_goals_and_conflicts() {
    let app = router(Arc::new(AppState::default()));
    let id = session(&app, "2").await;
    let (st, v, _) = call(&app, "GET", &format!("/sessions/{id}/goals/0/applicable"), Body::empty(), false).await;
    assert_eq!(st, StatusCode::OK);
    assert!(!v["rules"].as_array().unwrap().is_empty());

    let apply = format!("/sessions/{id}/goals/0/apply");
    let body = json!({ "rule": "ForallL(1, 1)" }).to_string();
    let (st, v, text) = call(&app, "POST", &apply, body.clone(), true).await;
    assert_eq!(st, StatusCode::OK, "{text}");
    assert_eq!(v["new_goals"], json!([1]));
    let (st, _, _) = call(&app, "POST", &apply, body, true).await;
    assert_eq!(st, StatusCode::CONFLICT);

    let body = json!({ "rule": {"rule": "AndR", "args": [0]} }).to_string();
    let (st, _, _) = call(&app, "POST", &format!("/sessions/{id}/goals/1/apply"), body, true).await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
    let body = json!({ "rule": "CloseById()" }).to_string();
    let (st, _, _) = call(&app, "POST", &format!("/sessions/{id}/goals/99/apply"), body, true).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    let body = json!({ "rule": "CloseById()", "target": 3 }).to_string();
    let (st, _, _) = call(&app, "POST", &format!("/sessions/{id}/goals/1/apply"), body, true).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn replay_completes_and_reports_failing_step() {
    let prob = lyapdl::proofs::parse_problem(WORKED).unwrap();
    let run = lyapdl::proofs::run_part(&prob, lyapdl::proofs::Part::Part3).unwrap();
    let script = lyapdl::kernel::print_script(&run.script.steps);

    let app = router(Arc::new(AppState::default()));
    let id = session(&app, "3").await;
    let (st, v, text) = call(&app, "POST", &format!("/sessions/{id}/replay"), script.clone(), false).await;
    assert_eq!(st, StatusCode::OK, "{text}");
    assert_eq!(v["open_goals"].as_array().unwrap().len(), 1);
    let (_, _, back) = call(&app, "GET", &format!("/sessions/{id}/script"), Body::empty(), false).await;
    assert_eq!(back, script);

    // a second replay hits goals that already have rules applied
    let (st, v, _) = call(&app, "POST", &format!("/sessions/{id}/replay"), script, false).await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["step"], 1);
}

#[tokio::test]
async fn sessions_survive_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(Arc::new(AppState::with_persistence(dir.path().to_path_buf()).unwrap()));
    let id = session(&app, "2").await;
    let body = json!({ "rule": "ForallL(1, 1)", "reconstructed": true }).to_string();
    let (st, _, _) = call(&app, "POST", &format!("/sessions/{id}/goals/0/apply"), body, true).await;
    assert_eq!(st, StatusCode::OK);
    let (_, before, _) = call(&app, "GET", &format!("/sessions/{id}/tree"), Body::empty(), false).await;

    let app = router(Arc::new(AppState::with_persistence(dir.path().to_path_buf()).unwrap()));
    let (st, after, _) = call(&app, "GET", &format!("/sessions/{id}/tree"), Body::empty(), false).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(before, after);
    assert_eq!(after["nodes"][0]["reconstructed"], true);
}
