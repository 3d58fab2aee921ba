use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use sls_core::strategy::strategy_s_action;
use sls_core::wire::{ActionJson, ActorActionJson, StateJson, TransitionJson};
use sls_core::Color;

use crate::analysis::{analysis, AnalysisView};
use crate::session::{engine_policy, Session, SessionError};
use crate::{store, Config};

pub struct AppState {
    pub config: Config,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
}

impl AppState {
    pub fn new(config: Config) -> Self {
        AppState {
            config,
            sessions: RwLock::new(HashMap::new()),
        }
    }

    pub fn insert(&self, session: Session) {
        let id = session.id.clone();
        self.sessions
            .write()
            .expect("session map")
            .insert(id, Arc::new(Mutex::new(session)));
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("session map").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .expect("session map")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no session {id:?}")))
    }

    fn persist(&self, session: &Session) {
        if let Some(dir) = &self.config.state_dir {
            if let Err(e) = store::save(dir, session) {
                tracing::error!(id = %session.id, error = %e, "snapshot write failed");
            }
        }
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, message)
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let status = match e {
            SessionError::Illegal(_) => StatusCode::CONFLICT,
            SessionError::Engine(_) | SessionError::Integrity(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
            SessionError::PolicyNotAllowed(_) | SessionError::Wire(_) => StatusCode::BAD_REQUEST,
        };
        ApiError::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(serde_json::json!({ "error": self.message })),
        )
            .into_response()
    }
}

#[derive(Serialize)]
pub struct SessionView {
    pub id: String,
    pub human: Color,
    pub engine: String,
    pub state: StateJson,
    pub winner: Option<Color>,
    pub to_act: Option<Color>,
    pub legal_actions: Vec<ActorActionJson>,
    pub analysis: Option<AnalysisView>,
    pub history_len: usize,
    pub created_at: u64,
    pub updated_at: u64,
}

#[derive(Serialize)]
struct ViewWithTransitions {
    #[serde(flatten)]
    view: SessionView,
    transitions: Vec<TransitionJson>,
}

fn view(s: &Session, config: &Config) -> SessionView {
    SessionView {
        id: s.id.clone(),
        human: s.human,
        engine: s.engine.to_string(),
        state: (&s.state).into(),
        winner: s.winner(),
        to_act: if s.winner().is_some() {
            None
        } else {
            sls_core::acting_player(&s.state)
        },
        legal_actions: s
            .human_actions()
            .into_iter()
            .map(|(actor, a)| ActorActionJson {
                actor,
                action: a.into(),
            })
            .collect(),
        analysis: analysis(&s.state, config.solve_limits),
        history_len: s.history.len(),
        created_at: s.created_at,
        updated_at: s.updated_at,
    }
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed body: {e}")))
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
}

#[derive(Deserialize)]
struct CreateRequest {
    #[serde(alias = "initial")]
    state: StateJson,
    human: Color,
    #[serde(default = "default_engine")]
    engine: String,
}

fn default_engine() -> String {
    "s".into()
}

async fn create_session(
    State(app): State<Arc<AppState>>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let req: CreateRequest = parse_body(&body)?;
    let initial = req
        .state
        .to_state()
        .map_err(|e| ApiError::bad_request(format!("invalid state: {e}")))?;
    let engine = engine_policy(&req.engine)?;
    let app2 = app.clone();
    let out = blocking(move || {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let (session, moves) = Session::start(id, initial, req.human, engine, now())?;
        app2.persist(&session);
        let body = ViewWithTransitions {
            view: view(&session, &app2.config),
            transitions: moves.iter().map(TransitionJson::from).collect(),
        };
        app2.insert(session);
        Ok(body)
    })
    .await?;
    Ok((StatusCode::CREATED, Json(out)).into_response())
}

async fn get_session(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let session = app.get(&id)?;
    let app2 = app.clone();
    let v =
        blocking(move || Ok(view(&session.lock().expect("session lock"), &app2.config))).await?;
    Ok(Json(v).into_response())
}

#[derive(Deserialize)]
struct ActionRequest {
    action: ActionJson,
}

async fn post_action(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let session = app.get(&id)?;
    // Accept either {"action": {...}} or a bare action object.
    let action = match parse_body::<ActionRequest>(&body) {
        Ok(r) => r.action,
        Err(_) => parse_body::<ActionJson>(&body)?,
    };
    let action = action
        .to_action()
        .map_err(|e| ApiError::bad_request(e.to_string()))?;
    let app2 = app.clone();
    let out = blocking(move || {
        let mut s = session.lock().expect("session lock");
        let moves = s.apply_human(action, now())?;
        app2.persist(&s);
        Ok(ViewWithTransitions {
            view: view(&s, &app2.config),
            transitions: moves.iter().map(TransitionJson::from).collect(),
        })
    })
    .await?;
    Ok(Json(out).into_response())
}

#[derive(Serialize)]
struct Hint {
    actor: Color,
    action: ActionJson,
    source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'static str>,
}

async fn get_hint(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let session = app.get(&id)?;
    let hint = blocking(move || {
        let s = session.lock().expect("session lock");
        if !s.human_to_act() {
            return Err(ApiError::new(
                StatusCode::CONFLICT,
                "no decision is pending for the human player",
            ));
        }
        let source = if s.state.hand(s.state.active).guards > 0 {
            "strategy S"
        } else {
            "fallback"
        };
        let (actor, action) = strategy_s_action(&s.state)
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
        let losing = sls_core::predicted_winner(&s.state).is_ok_and(|w| w != s.human);
        let note = losing.then_some("no winning line from here");
        Ok(Hint {
            actor,
            action: action.into(),
            source,
            note,
        })
    })
    .await?;
    Ok(Json(hint).into_response())
}

async fn get_analyze(
    State(app): State<Arc<AppState>>,
    Query(q): Query<HashMap<String, String>>,
) -> Result<Response, ApiError> {
    let text = q
        .get("state")
        .ok_or_else(|| ApiError::bad_request("missing `state` query parameter"))?;
    let state: StateJson = serde_json::from_str(text)
        .map_err(|e| ApiError::bad_request(format!("malformed state: {e}")))?;
    let state = state
        .to_state()
        .map_err(|e| ApiError::bad_request(format!("invalid state: {e}")))?;
    let limits = app.config.solve_limits;
    let report = blocking(move || {
        analysis(&state, limits).ok_or_else(|| {
            ApiError::bad_request("analysis needs an undecided state with alternating piles")
        })
    })
    .await?;
    Ok(Json(report).into_response())
}

pub fn router(app: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/actions", post(post_action))
        .route("/sessions/{id}/hint", get(get_hint))
        .route("/analyze", get(get_analyze))
        .with_state(app)
}
