//! A game between one human and one engine policy, with its full history.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use sls_core::rules::{self, Action, RuleViolation, TransitionRecord};
use sls_core::strategy::{DecisionContext, PolicySpec, StrategyError};
use sls_core::wire::{ActorActionJson, StateJson, WireError};
use sls_core::{Color, GameState};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("{0}")]
    Illegal(#[from] RuleViolation),
    #[error("engine policy failed: {0}")]
    Engine(#[from] StrategyError),
    #[error("engine policy {0:?} is not allowed here")]
    PolicyNotAllowed(String),
    #[error("invalid state: {0}")]
    Wire(#[from] WireError),
    #[error("integrity error: {0}")]
    Integrity(String),
}

#[derive(Clone, Debug)]
pub struct Session {
    pub id: String,
    pub human: Color,
    pub engine: PolicySpec,
    pub initial: GameState,
    pub state: GameState,
    pub history: Vec<TransitionRecord>,
    pub created_at: u64,
    pub updated_at: u64,
}

/// Policies a client may request for the engine. Scripts name server-side
/// files and are refused.
pub fn engine_policy(spec: &str) -> Result<PolicySpec, SessionError> {
    if spec.trim().starts_with("scripted") {
        return Err(SessionError::PolicyNotAllowed(spec.to_string()));
    }
    Ok(PolicySpec::parse(spec)?)
}

impl Session {
    /// Starts a session and plays the engine's opening decisions.
    pub fn start(
        id: String,
        initial: GameState,
        human: Color,
        engine: PolicySpec,
        now: u64,
    ) -> Result<(Session, Vec<TransitionRecord>), SessionError> {
        let state = rules::start_round(&initial);
        let mut s = Session {
            id,
            human,
            engine,
            initial,
            state,
            history: Vec::new(),
            created_at: now,
            updated_at: now,
        };
        let moves = s.run_engine()?;
        Ok((s, moves))
    }

    pub fn winner(&self) -> Option<Color> {
        rules::is_terminal(&self.state)
    }

    pub fn engine_color(&self) -> Color {
        self.human.opponent()
    }

    /// True when the human has a decision to make.
    pub fn human_to_act(&self) -> bool {
        self.winner().is_none() && rules::acting_player(&self.state) == Some(self.human)
    }

    pub fn human_actions(&self) -> Vec<(Color, Action)> {
        if !self.human_to_act() {
            return Vec::new();
        }
        rules::legal_actions(&self.state)
            .map(|v| v.into_iter().filter(|(a, _)| *a == self.human).collect())
            .unwrap_or_default()
    }

    /// Applies the human's action, then every engine decision up to the
    /// human's next decision or the end of the game.
    pub fn apply_human(
        &mut self,
        action: Action,
        now: u64,
    ) -> Result<Vec<TransitionRecord>, SessionError> {
        if let Some(w) = self.winner() {
            return Err(RuleViolation::GameOver(w).into());
        }
        let rec = rules::apply_action(&self.state, self.human, action)?;
        self.state = rec.state.clone();
        self.history.push(rec.clone());
        let mut out = vec![rec];
        out.extend(self.run_engine()?);
        self.updated_at = now;
        Ok(out)
    }

    fn run_engine(&mut self) -> Result<Vec<TransitionRecord>, SessionError> {
        let mut out = Vec::new();
        let engine = self.engine_color();
        while self.winner().is_none() && rules::acting_player(&self.state) == Some(engine) {
            let ctx = DecisionContext {
                ply: self.history.len() as u64,
                own_decisions: self.history.iter().filter(|t| t.actor == engine).count(),
            };
            let (actor, action) = self.engine.decide(&self.state, ctx)?;
            let rec = rules::apply_action(&self.state, actor, action)?;
            self.state = rec.state.clone();
            self.history.push(rec.clone());
            out.push(rec);
        }
        Ok(out)
    }

    pub fn to_file(&self) -> SessionFile {
        SessionFile {
            version: 1,
            id: self.id.clone(),
            human: self.human,
            engine: self.engine.to_string(),
            initial: (&self.initial).into(),
            history: self
                .history
                .iter()
                .map(|t| ActorActionJson {
                    actor: t.actor,
                    action: t.action.into(),
                })
                .collect(),
            state: (&self.state).into(),
            created_at: self.created_at,
            updated_at: self.updated_at,
        }
    }

    /// Rebuilds a session by replaying its history through the rules engine;
    /// the result must match the recorded state exactly.
    pub fn from_file(file: &SessionFile) -> Result<Session, SessionError> {
        let engine = engine_policy(&file.engine)?;
        let initial = file.initial.to_state()?;
        let recorded = file.state.to_state()?;
        let mut state = rules::start_round(&initial);
        let mut history = Vec::with_capacity(file.history.len());
        for (i, step) in file.history.iter().enumerate() {
            let action = step.action.to_action()?;
            let rec = rules::apply_action(&state, step.actor, action).map_err(|v| {
                SessionError::Integrity(format!("history step {i} ({action}) is illegal: {v}"))
            })?;
            state = rec.state.clone();
            history.push(rec);
        }
        if state != recorded {
            return Err(SessionError::Integrity(
                "replayed history does not reproduce the recorded state".into(),
            ));
        }
        Ok(Session {
            id: file.id.clone(),
            human: file.human,
            engine,
            initial,
            state,
            history,
            created_at: file.created_at,
            updated_at: file.updated_at,
        })
    }
}

/// On-disk form of a session, one JSON file per session.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionFile {
    pub version: u32,
    pub id: String,
    pub human: Color,
    pub engine: String,
    pub initial: StateJson,
    pub history: Vec<ActorActionJson>,
    pub state: StateJson,
    pub created_at: u64,
    pub updated_at: u64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use sls_core::notation::parse_board;
    use sls_core::Hand;

    fn state(board: &str, blue: (u32, u32), red: (u32, u32), active: Color) -> GameState {
        GameState::new(
            parse_board(board).unwrap(),
            Hand::new(blue.0, blue.1),
            Hand::new(red.0, red.1),
            active,
        )
    }

    #[test]
    fn engine_plays_out_a_won_position() {
        let (s, moves) = Session::start(
            "a".into(),
            state("_,_", (1, 0), (0, 0), Color::Blue),
            Color::Red,
            PolicySpec::StrategyS,
            0,
        )
        .unwrap();
        assert_eq!(s.winner(), Some(Color::Blue));
        assert_eq!(moves.len(), 1);
        assert!(s.human_actions().is_empty());
    }

    #[test]
    fn replay_roundtrip() {
        let (mut s, _) = Session::start(
            "b".into(),
            state("_,rb,b", (2, 1), (2, 1), Color::Blue),
            Color::Blue,
            PolicySpec::UniformRandom(3),
            0,
        )
        .unwrap();
        while s.human_to_act() {
            let (_, a) = s.human_actions()[0];
            s.apply_human(a, 1).unwrap();
        }
        let back = Session::from_file(&s.to_file()).unwrap();
        assert_eq!(back.state, s.state);
        assert_eq!(back.history, s.history);
    }

    #[test]
    fn mutated_history_is_rejected() {
        let (mut s, _) = Session::start(
            "c".into(),
            state("_,_", (2, 0), (2, 0), Color::Blue),
            Color::Blue,
            PolicySpec::StrategyS,
            0,
        )
        .unwrap();
        s.apply_human(
            Action::Place {
                pile: 0,
                color: Color::Blue,
            },
            1,
        )
        .unwrap();
        let mut f = s.to_file();
        f.history[0].action.pile = Some(1);
        assert!(matches!(
            Session::from_file(&f),
            Err(SessionError::Integrity(_))
        ));
    }

    #[test]
    fn scripted_engine_refused() {
        assert!(matches!(
            engine_policy("scripted:/etc/passwd"),
            Err(SessionError::PolicyNotAllowed(_))
        ));
        assert!(engine_policy("random:4").is_ok());
    }
}
