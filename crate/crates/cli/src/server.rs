//! HTTP API over proof sessions. A session holds one problem and one live
//! proof tree; every mutation goes through the kernel.
//!
//! | method | path | body |
//! |---|---|---|
//! | POST | `/sessions?part=full` | problem file text |
//! | GET | `/sessions/:id/tree` | |
//! | GET | `/sessions/:id/script` | |
//! | GET | `/sessions/:id/goals/:gid/applicable` | |
//! | POST | `/sessions/:id/goals/:gid/apply` | `{"rule": ..., "reconstructed": false}` |
//! | POST | `/sessions/:id/replay` | script text |

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use lyapdl::kernel::{parse_rule, parse_script, print_script, GoalId, KernelError, ProofTree, Rule, RuleApplication};
use lyapdl::proofs::{parse_problem, Part};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
    pub part: String,
    pub problem: String,
    pub tree: ProofTree,
}

#[derive(Default)]
pub struct AppState {
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
    persist: Option<PathBuf>,
}

impl AppState {
    /// Loads every `*.json` snapshot in `dir`, creating it if needed.
    pub fn with_persistence(dir: PathBuf) -> anyhow::Result<AppState> {
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut sessions = HashMap::new();
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let text = fs::read_to_string(&path)?;
            let s: Session =
                serde_json::from_str(&text).with_context(|| format!("reading {}", path.display()))?;
            sessions.insert(s.id.clone(), Arc::new(Mutex::new(s)));
        }
        Ok(AppState {
            sessions: Mutex::new(sessions),
            persist: Some(dir),
        })
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .lock()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no session {id}")))
    }

    fn save(&self, s: &Session) -> Result<(), ApiError> {
        let Some(dir) = &self.persist else {
            return Ok(());
        };
        write_snapshot(dir, s)
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, format!("{e:#}")))
    }
}

fn write_snapshot(dir: &Path, s: &Session) -> anyhow::Result<()> {
    let tmp = dir.join(format!("{}.json.tmp", s.id));
    fs::write(&tmp, serde_json::to_vec(s)?)?;
    fs::rename(&tmp, dir.join(format!("{}.json", s.id)))?;
    Ok(())
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, error: String) -> ApiError {
        ApiError {
            status,
            body: json!({ "error": error }),
        }
    }

    fn kernel(e: KernelError) -> ApiError {
        let status = match e {
            KernelError::StaleGoal(_) => StatusCode::CONFLICT,
            KernelError::UnknownGoal(_) => StatusCode::NOT_FOUND,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        ApiError::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/:id/tree", get(get_tree))
        .route("/sessions/:id/script", get(get_script))
        .route("/sessions/:id/goals/:gid/applicable", get(applicable))
        .route("/sessions/:id/goals/:gid/apply", post(apply))
        .route("/sessions/:id/replay", post(replay))
        .with_state(state)
}

pub fn serve(port: u16, persist: Option<PathBuf>) -> anyhow::Result<()> {
    let state = match persist {
        Some(dir) => AppState::with_persistence(dir)?,
        None => AppState::default(),
    };
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(("127.0.0.1", port))
            .await
            .with_context(|| format!("binding port {port}"))?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, router(Arc::new(state))).await?;
        Ok(())
    })
}

#[derive(Deserialize)]
struct CreateQuery {
    part: Option<String>,
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    Query(q): Query<CreateQuery>,
    body: String,
) -> ApiResult<(StatusCode, Json<Value>)> {
    let bad = |e: String| ApiError::new(StatusCode::BAD_REQUEST, e);
    let part: Part = q.part.as_deref().unwrap_or("full").parse().map_err(bad)?;
    let prob = parse_problem(&body).map_err(|e| bad(e.to_string()))?;
    let session = Session {
        id: uuid::Uuid::new_v4().to_string(),
        created_at: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        part: part.to_string(),
        problem: body,
        tree: part.fresh_tree(&prob),
    };
    state.save(&session)?;
    let id = session.id.clone();
    state
        .sessions
        .lock()
        .expect("session map lock")
        .insert(id.clone(), Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(json!({ "id": id }))))
}

async fn get_tree(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    let s = state.session(&id)?;
    let s = s.lock().expect("session lock");
    Ok(Json(serde_json::to_value(s.tree.view()).expect("tree view serializes")))
}

async fn get_script(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<String> {
    let s = state.session(&id)?;
    let s = s.lock().expect("session lock");
    Ok(print_script(&s.tree.script()))
}

async fn applicable(
    State(state): State<Arc<AppState>>,
    UrlPath((id, gid)): UrlPath<(String, GoalId)>,
) -> ApiResult<Json<Value>> {
    let s = state.session(&id)?;
    let s = s.lock().expect("session lock");
    let rules = s.tree.applicable_rules(gid).map_err(ApiError::kernel)?;
    Ok(Json(json!({ "goal": gid, "rules": rules })))
}

/// A rule either as its JSON encoding or as script text like `AndR(0)`.
#[derive(Deserialize)]
#[serde(untagged)]
enum RuleSpec {
    Text(String),
    Json(Rule),
}

#[derive(Deserialize)]
struct ApplyBody {
    rule: RuleSpec,
    #[serde(default)]
    reconstructed: bool,
    target: Option<GoalId>,
}

async fn apply(
    State(state): State<Arc<AppState>>,
    UrlPath((id, gid)): UrlPath<(String, GoalId)>,
    Json(body): Json<ApplyBody>,
) -> ApiResult<Json<Value>> {
    if body.target.is_some_and(|t| t != gid) {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            format!("body target {:?} differs from goal {gid} in the path", body.target),
        ));
    }
    let s = state.session(&id)?;
    let mut s = s.lock().expect("session lock");
    let rule = match body.rule {
        RuleSpec::Json(r) => r,
        RuleSpec::Text(t) => parse_rule(&t, &s.tree.decls())
            .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?,
    };
    let new_goals = s
        .tree
        .apply(RuleApplication {
            rule,
            target: gid,
            reconstructed: body.reconstructed,
        })
        .map_err(ApiError::kernel)?;
    state.save(&s)?;
    let status = s.tree.status();
    Ok(Json(json!({
        "new_goals": new_goals,
        "open_goals": status.open_goals,
        "complete": status.complete,
    })))
}

async fn replay(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: String,
) -> ApiResult<Json<Value>> {
    let s = state.session(&id)?;
    let mut s = s.lock().expect("session lock");
    let steps = parse_script(&body, &s.tree.decls())
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?;
    let result = s.tree.replay(&steps);
    // steps before a failure stay applied, so the snapshot is written either way
    state.save(&s)?;
    if let Err(e) = result {
        return Err(ApiError {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            body: json!({ "error": e.to_string(), "step": e.step, "goal": e.goal }),
        });
    }
    let status = s.tree.status();
    Ok(Json(json!({
        "applied": steps.len(),
        "open_goals": status.open_goals,
        "complete": status.complete,
    })))
}
