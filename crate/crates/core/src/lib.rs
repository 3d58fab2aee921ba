//! Two-player, two-color So Long Sucker endgames.
//!
//! * [`model`]: chips, piles, hands and game states.
//! * [`rules`]: legal actions and transitions.
//! * [`strategy`]: strategy S, the guardless fallback and baseline policies.
//! * [`classifier`]: board summary, board types, the winning predicate and the
//!   induction measures.
//! * [`solver`]: exhaustive memoized search, the oracle for everything above.
//! * [`verifier`]: sweeps that compare the predicate and strategy S with the solver.

pub mod classifier;
pub mod model;
pub mod notation;
pub mod playout;
pub mod rules;
pub mod solver;
pub mod strategy;
pub mod verifier;
pub mod wire;

pub use classifier::{
    analyze, classify, mu, nu, predicted_winner, summarize_board, winning_predicate,
    AnalysisReport, BoardSummary, BoardType,
};
pub use model::{pile_count, total_potential, Board, Color, GameState, Hand, Phase, Pile};
pub use playout::{playout, Playout, PlayoutError};
pub use rules::{
    acting_player, apply_action, is_terminal, legal_actions, next_active_player, start_round,
    Action, RuleViolation, TransitionRecord,
};
pub use solver::{
    canonicalize, enumerate_states, solve, solve_with_policy, Bounds, CanonicalKey, SolveError,
    SolveResult, Solver,
};
pub use strategy::{
    capture_discard_choice, fallback_policy, strategy_s_action, strategy_s_round, PolicySpec,
};
