//! Runs two policies against each other until someone is eliminated.

use thiserror::Error;

use crate::model::{Color, GameState};
use crate::notation::format_board;
use crate::rules::{self, Action, RuleViolation, TransitionRecord};
use crate::strategy::{DecisionContext, PolicySpec, StrategyError};

/// Transitions allowed before a playout is declared runaway. The termination
/// potential bounds real games far below this.
const MAX_TRANSITIONS: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum PlayoutError {
    #[error("the starting state is already decided; {0} has won")]
    AlreadyOver(Color),
    #[error("{policy} policy for {player} failed at step {step} on board {board}: {source}")]
    Policy {
        player: Color,
        policy: String,
        step: usize,
        board: String,
        source: StrategyError,
    },
    #[error("{policy} policy for {player} chose illegal {action} at step {step} on board {board}: {violation}")]
    Illegal {
        player: Color,
        policy: String,
        step: usize,
        board: String,
        action: Action,
        violation: RuleViolation,
    },
    #[error("playout exceeded {0} transitions")]
    Runaway(usize),
}

#[derive(Clone, Debug)]
pub struct Playout {
    pub winner: Color,
    pub transitions: Vec<TransitionRecord>,
}

/// Plays `blue` against `red` from `state`; identical inputs give identical games.
pub fn playout(
    state: &GameState,
    blue: &PolicySpec,
    red: &PolicySpec,
    seed: u64,
) -> Result<Playout, PlayoutError> {
    if let Some(w) = rules::is_terminal(state) {
        return Err(PlayoutError::AlreadyOver(w));
    }
    let mut current = rules::start_round(state);
    let mut transitions = Vec::new();
    let mut own = [0usize; 2];
    while rules::is_terminal(&current).is_none() {
        let step = transitions.len();
        if step >= MAX_TRANSITIONS {
            return Err(PlayoutError::Runaway(MAX_TRANSITIONS));
        }
        let player = rules::acting_player(&current).expect("non-terminal");
        let policy = if player == Color::Blue { blue } else { red };
        let ctx = DecisionContext {
            ply: seed.wrapping_mul(0x0000_0100_0000_01B3) ^ step as u64,
            own_decisions: own[player.index()],
        };
        let (actor, action) =
            policy
                .decide(&current, ctx)
                .map_err(|source| PlayoutError::Policy {
                    player,
                    policy: policy.to_string(),
                    step,
                    board: format_board(&current.board),
                    source,
                })?;
        let record = rules::apply_action(&current, actor, action).map_err(|violation| {
            PlayoutError::Illegal {
                player,
                policy: policy.to_string(),
                step,
                board: format_board(&current.board),
                action,
                violation,
            }
        })?;
        own[player.index()] += 1;
        current = record.state.clone();
        transitions.push(record);
    }
    let winner = rules::is_terminal(&current).expect("loop exits on terminal");
    Ok(Playout {
        winner,
        transitions,
    })
}
