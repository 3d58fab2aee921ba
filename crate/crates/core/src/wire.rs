//! JSON encodings of states, actions and transitions shared by the CLI and
//! the HTTP service.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Board, Color, GameState, Hand, ModelError, Phase};
use crate::notation::{format_pile, parse_board, NotationError};
use crate::rules::{Action, TransitionRecord};

#[derive(Debug, Error)]
pub enum WireError {
    #[error("pile {index}: {source}")]
    Pile { index: usize, source: NotationError },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("action {kind:?} is missing field `{field}`")]
    MissingField { kind: String, field: &'static str },
    #[error("unknown action type {0:?}")]
    UnknownAction(String),
}

/// `{"board": [...], "blue": {...}, "red": {...}, "active": "b", "phase": {...}, "winner": null}`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateJson {
    pub board: Vec<String>,
    pub blue: Hand,
    pub red: Hand,
    pub active: Color,
    #[serde(default = "turn_start")]
    pub phase: Phase,
    #[serde(default)]
    pub winner: Option<Color>,
}

fn turn_start() -> Phase {
    Phase::TurnStart
}

impl From<&GameState> for StateJson {
    fn from(s: &GameState) -> Self {
        StateJson {
            board: s.board.piles().iter().map(format_pile).collect(),
            blue: s.blue,
            red: s.red,
            active: s.active,
            phase: s.phase,
            winner: s.winner,
        }
    }
}

impl StateJson {
    pub fn to_state(&self) -> Result<GameState, WireError> {
        let mut piles = Vec::with_capacity(self.board.len());
        for (index, text) in self.board.iter().enumerate() {
            if text.contains(',') {
                return Err(WireError::Pile {
                    index,
                    source: NotationError::BadChip {
                        column: text.find(',').unwrap(),
                        found: ',',
                    },
                });
            }
            let b = parse_board(text).map_err(|source| WireError::Pile { index, source })?;
            piles.push(b.piles()[0].clone());
        }
        let board = Board::new(piles)?;
        Ok(GameState::with_phase(
            board,
            self.blue,
            self.red,
            self.active,
            self.phase,
            self.winner,
        )?)
    }
}

/// `{"type": "place", "pile": 0, "color": "b"}` and friends.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionJson {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pile: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<Color>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub donate: Option<bool>,
}

impl From<Action> for ActionJson {
    fn from(a: Action) -> Self {
        let mut j = ActionJson {
            kind: String::new(),
            pile: None,
            color: None,
            donate: None,
        };
        match a {
            Action::Place { pile, color } => {
                j.kind = "place".into();
                j.pile = Some(pile);
                j.color = Some(color);
            }
            Action::CaptureDiscard(c) => {
                j.kind = "capture_discard".into();
                j.color = Some(c);
            }
            Action::DiscardPrisoner => j.kind = "discard_prisoner".into(),
            Action::DonatePrisoner => j.kind = "donate_prisoner".into(),
            Action::RescueDecision { donate } => {
                j.kind = "rescue".into();
                j.donate = Some(donate);
            }
        }
        j
    }
}

impl ActionJson {
    pub fn to_action(&self) -> Result<Action, WireError> {
        let missing = |field| WireError::MissingField {
            kind: self.kind.clone(),
            field,
        };
        Ok(match self.kind.as_str() {
            "place" => Action::Place {
                pile: self.pile.ok_or_else(|| missing("pile"))?,
                color: self.color.ok_or_else(|| missing("color"))?,
            },
            "capture_discard" => {
                Action::CaptureDiscard(self.color.ok_or_else(|| missing("color"))?)
            }
            "discard_prisoner" => Action::DiscardPrisoner,
            "donate_prisoner" => Action::DonatePrisoner,
            "rescue" => Action::RescueDecision {
                donate: self.donate.ok_or_else(|| missing("donate"))?,
            },
            other => return Err(WireError::UnknownAction(other.to_string())),
        })
    }
}

/// A legal action together with the player who takes it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActorActionJson {
    pub actor: Color,
    pub action: ActionJson,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionJson {
    pub actor: Color,
    pub action: ActionJson,
    pub state: StateJson,
    pub capture: bool,
    pub round_ended: bool,
    pub discarded: Option<Color>,
    pub eliminated: Option<Color>,
}

impl From<&TransitionRecord> for TransitionJson {
    fn from(t: &TransitionRecord) -> Self {
        TransitionJson {
            actor: t.actor,
            action: t.action.into(),
            state: (&t.state).into(),
            capture: t.capture,
            round_ended: t.round_ended,
            discarded: t.discarded,
            eliminated: t.eliminated,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::notation::parse_board;
    use proptest::prelude::*;

    #[test]
    fn state_schema_field_names() {
        let s = GameState::new(
            parse_board("_,rb").unwrap(),
            Hand::new(1, 0),
            Hand::new(0, 2),
            Color::Red,
        );
        let v = serde_json::to_value(StateJson::from(&s)).unwrap();
        assert_eq!(
            v,
            serde_json::json!({
                "board": ["_", "rb"],
                "blue": {"guards": 1, "prisoners": 0},
                "red": {"guards": 0, "prisoners": 2},
                "active": "r",
                "phase": {"kind": "turn_start"},
                "winner": null
            })
        );
    }

    #[test]
    fn capture_phase_encoding() {
        let p = Phase::AwaitCaptureDiscard {
            pile: 1,
            color: Color::Blue,
        };
        assert_eq!(
            serde_json::to_value(p).unwrap(),
            serde_json::json!({"kind": "await_capture_discard", "pile": 1, "color": "b"})
        );
    }

    #[test]
    fn action_schema() {
        let j: ActionJson =
            serde_json::from_str(r#"{"type":"place","pile":2,"color":"r"}"#).unwrap();
        assert_eq!(
            j.to_action().unwrap(),
            Action::Place {
                pile: 2,
                color: Color::Red
            }
        );
        let j: ActionJson = serde_json::from_str(r#"{"type":"rescue","donate":false}"#).unwrap();
        assert_eq!(
            j.to_action().unwrap(),
            Action::RescueDecision { donate: false }
        );
        let j: ActionJson = serde_json::from_str(r#"{"type":"place","pile":2}"#).unwrap();
        assert!(matches!(
            j.to_action(),
            Err(WireError::MissingField { field: "color", .. })
        ));
        let j: ActionJson = serde_json::from_str(r#"{"type":"pass"}"#).unwrap();
        assert!(matches!(j.to_action(), Err(WireError::UnknownAction(_))));
        assert_eq!(
            serde_json::to_string(&ActionJson::from(Action::DiscardPrisoner)).unwrap(),
            r#"{"type":"discard_prisoner"}"#
        );
    }

    #[test]
    fn bad_pile_text_rejected() {
        let j = StateJson {
            board: vec!["_".into(), "rx".into()],
            blue: Hand::EMPTY,
            red: Hand::EMPTY,
            active: Color::Blue,
            phase: Phase::TurnStart,
            winner: None,
        };
        assert!(matches!(
            j.to_state(),
            Err(WireError::Pile { index: 1, .. })
        ));
    }

    fn arb_action() -> impl Strategy<Value = Action> {
        let color = prop_oneof![Just(Color::Blue), Just(Color::Red)];
        prop_oneof![
            (0usize..16, color.clone()).prop_map(|(pile, color)| Action::Place { pile, color }),
            color.prop_map(Action::CaptureDiscard),
            Just(Action::DiscardPrisoner),
            Just(Action::DonatePrisoner),
            any::<bool>().prop_map(|donate| Action::RescueDecision { donate }),
        ]
    }

    proptest! {
        #[test]
        fn action_json_roundtrip(a in arb_action()) {
            let text = serde_json::to_string(&ActionJson::from(a)).unwrap();
            let back: ActionJson = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back.to_action().unwrap(), a);
        }

        #[test]
        fn state_json_roundtrip(
            piles in proptest::collection::vec((0usize..6, any::<bool>()), 1..6),
            bg in 0u32..5, bp in 0u32..5, rg in 0u32..5, rp in 0u32..5, red in any::<bool>(),
        ) {
            let piles = piles.into_iter().map(|(len, top)| {
                crate::model::Pile::alternating(if top { Color::Red } else { Color::Blue }, len)
            }).collect();
            let s = GameState::new(
                Board::new(piles).unwrap(),
                Hand::new(bg, bp),
                Hand::new(rg, rp),
                if red { Color::Red } else { Color::Blue },
            );
            let text = serde_json::to_string(&StateJson::from(&s)).unwrap();
            let back: StateJson = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back.to_state().unwrap(), s);
        }
    }
}
