//! HTTP/JSON service: play sessions against an engine policy, hints and
//! position analysis.
//!
//! Environment: `SLS_PORT` (default 8080), `SLS_STATE_DIR` (snapshots,
//! disabled when unset), `SLS_SOLVE_MAX_CHIPS` (default 8).

pub mod analysis;
pub mod api;
pub mod session;
pub mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

pub use analysis::{analysis, AnalysisView, SolveLimits, PREDICATE_ONLY, SOLVER_VERIFIED};
pub use api::{router, AppState};
pub use session::{Session, SessionError, SessionFile};

#[derive(Clone, Debug)]
pub struct Config {
    pub port: u16,
    pub state_dir: Option<PathBuf>,
    pub solve_limits: SolveLimits,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            port: 8080,
            state_dir: None,
            solve_limits: SolveLimits::default(),
        }
    }
}

impl Config {
    pub fn from_env() -> Result<Config, String> {
        let mut c = Config::default();
        if let Ok(p) = std::env::var("SLS_PORT") {
            c.port = p
                .parse()
                .map_err(|_| format!("SLS_PORT: not a port number: {p:?}"))?;
        }
        if let Ok(d) = std::env::var("SLS_STATE_DIR") {
            if !d.is_empty() {
                c.state_dir = Some(PathBuf::from(d));
            }
        }
        if let Ok(n) = std::env::var("SLS_SOLVE_MAX_CHIPS") {
            c.solve_limits.max_chips = n
                .parse()
                .map_err(|_| format!("SLS_SOLVE_MAX_CHIPS: not a count: {n:?}"))?;
        }
        Ok(c)
    }
}

/// Builds the shared state, restoring snapshots when a state dir is set.
pub fn load(config: Config) -> Arc<AppState> {
    let app = AppState::new(config);
    if let Some(dir) = &app.config.state_dir {
        let (sessions, skipped) = store::restore(dir);
        tracing::info!(restored = sessions.len(), skipped = skipped.len(), dir = %dir.display(), "sessions restored");
        for s in sessions {
            app.insert(s);
        }
    }
    Arc::new(app)
}

pub async fn serve(config: Config) -> std::io::Result<()> {
    let addr = SocketAddr::from(([0, 0, 0, 0], config.port));
    let app = load(config);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, router(app)).await
}

/// Runs the service on a fresh multi-threaded runtime until it fails.
pub fn serve_blocking(config: Config) -> std::io::Result<()> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?
        .block_on(serve(config))
}
