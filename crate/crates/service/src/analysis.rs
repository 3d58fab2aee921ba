use serde::Serialize;

use sls_core::{analyze, canonicalize, BoardSummary, BoardType, Color, GameState, Solver};

pub const SOLVER_VERIFIED: &str = "solver-verified";
pub const PREDICATE_ONLY: &str = "predicate (proved optimal)";

/// Positions up to these limits are also solved exhaustively on analysis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolveLimits {
    pub max_chips: usize,
    pub max_piles: usize,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits {
            max_chips: 8,
            max_piles: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AnalysisView {
    pub key: String,
    pub summary: BoardSummary,
    pub board_type: BoardType,
    /// Predicate verdict for the active player.
    pub active_wins: bool,
    pub predicted_winner: Color,
    pub nu: i64,
    pub mu: i64,
    pub solver_winner: Option<Color>,
    pub provenance: &'static str,
}

/// Analysis of a decision-point state; `None` mid-capture or once the game
/// is over, where the board summary is undefined.
pub fn analysis(state: &GameState, limits: SolveLimits) -> Option<AnalysisView> {
    if state.winner.is_some() {
        return None;
    }
    let report = analyze(state).ok()?;
    let fits = state.total_chips() <= limits.max_chips && state.board.k() <= limits.max_piles;
    let solver_winner = if fits {
        Solver::new().winner(state).ok()
    } else {
        None
    };
    Some(AnalysisView {
        key: canonicalize(state).to_string(),
        summary: report.summary,
        board_type: report.board_type,
        active_wins: report.active_wins,
        predicted_winner: report.predicted_winner,
        nu: report.nu,
        mu: report.mu,
        solver_winner,
        provenance: if solver_winner.is_some() {
            SOLVER_VERIFIED
        } else {
            PREDICATE_ONLY
        },
    })
}
