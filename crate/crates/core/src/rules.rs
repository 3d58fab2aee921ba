//! Legal actions and state transitions for the two-player, two-color game.
//!
//! Decisions are serialized into one acting player per state:
//! * at a decision point the active player places, discards or donates;
//! * after a placement that leaves two equal chips on top, the owner of that
//!   color chooses which chip of the pile goes to the dead box;
//! * when the active player has nothing to place, the opponent decides whether
//!   to donate a prisoner. With no prisoner to give the decline is automatic.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Color, GameState, Phase, Pile};

/// One atomic decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    Place { pile: usize, color: Color },
    CaptureDiscard(Color),
    DiscardPrisoner,
    DonatePrisoner,
    RescueDecision { donate: bool },
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Place { pile, color } => write!(f, "place {} on pile {}", color.letter(), pile),
            Action::CaptureDiscard(c) => write!(f, "capture, discarding {}", c.letter()),
            Action::DiscardPrisoner => f.write_str("discard prisoner"),
            Action::DonatePrisoner => f.write_str("donate prisoner"),
            Action::RescueDecision { donate: true } => f.write_str("rescue: donate"),
            Action::RescueDecision { donate: false } => f.write_str("rescue: decline"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleViolation {
    #[error("the game is over; {0} has won")]
    GameOver(Color),
    #[error("{got} cannot act now; waiting on {expected}")]
    WrongActor { expected: Color, got: Color },
    #[error("{action} is not available in phase {phase:?}")]
    WrongPhase { action: Action, phase: Phase },
    #[error("pile {0} does not exist")]
    NoSuchPile(usize),
    #[error("{player} holds no {color} chip")]
    NotHeld { player: Color, color: Color },
    #[error("{0} holds no prisoner")]
    NoPrisoner(Color),
    #[error("the captured pile holds no {0} chip")]
    ColorNotInPile(Color),
    #[error("the played pile is awaiting a capture; the capturing player moves next")]
    CaptureContext,
    #[error("no placement has been made on this pile")]
    NothingPlaced,
}

/// Result of applying one action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionRecord {
    pub actor: Color,
    pub action: Action,
    pub state: GameState,
    /// The placement left two equal chips on top of the played pile.
    pub capture: bool,
    /// The active player changed or someone was eliminated.
    pub round_ended: bool,
    /// Chip color sent to the dead box by this transition, if any.
    pub discarded: Option<Color>,
    /// Player eliminated by this transition (including an automatic decline).
    pub eliminated: Option<Color>,
}

/// Player who must decide in `state`, or `None` when the game is over.
pub fn acting_player(state: &GameState) -> Option<Color> {
    if is_terminal(state).is_some() {
        return None;
    }
    Some(match state.phase {
        Phase::AwaitCaptureDiscard { color, .. } => color,
        Phase::AwaitRescueDonation => state.active.opponent(),
        Phase::TurnStart | Phase::InRound => {
            if state.hand(state.active).is_empty() {
                state.active.opponent()
            } else {
                state.active
            }
        }
    })
}

/// Winner if the game is decided. A chipless active player facing an opponent
/// without prisoners is already lost: declining is the only option.
pub fn is_terminal(state: &GameState) -> Option<Color> {
    if state.winner.is_some() {
        return state.winner;
    }
    let awaiting_rescue = state.phase == Phase::AwaitRescueDonation
        || (state.phase.is_decision_point() && state.hand(state.active).is_empty());
    if awaiting_rescue && state.hand(state.active.opponent()).prisoners == 0 {
        return Some(state.active.opponent());
    }
    None
}

/// Every `(actor, action)` pair available in `state`, in a fixed order.
pub fn legal_actions(state: &GameState) -> Result<Vec<(Color, Action)>, RuleViolation> {
    if let Some(w) = is_terminal(state) {
        return Err(RuleViolation::GameOver(w));
    }
    let mut out = Vec::new();
    match state.phase {
        Phase::AwaitCaptureDiscard { pile, color } => {
            let p = &state.board.piles()[pile];
            for c in Color::ALL {
                if p.count(c) > 0 {
                    out.push((color, Action::CaptureDiscard(c)));
                }
            }
        }
        Phase::AwaitRescueDonation => push_rescue(state, &mut out),
        Phase::TurnStart | Phase::InRound => {
            let me = state.active;
            let hand = state.hand(me);
            if hand.is_empty() {
                push_rescue(state, &mut out);
            } else {
                for pile in 0..state.board.k() {
                    for color in Color::ALL {
                        if hand.of_color(me, color) > 0 {
                            out.push((me, Action::Place { pile, color }));
                        }
                    }
                }
                if hand.prisoners > 0 {
                    out.push((me, Action::DiscardPrisoner));
                    out.push((me, Action::DonatePrisoner));
                }
            }
        }
    }
    debug_assert!(!out.is_empty());
    Ok(out)
}

fn push_rescue(state: &GameState, out: &mut Vec<(Color, Action)>) {
    let donor = state.active.opponent();
    if state.hand(donor).prisoners > 0 {
        out.push((donor, Action::RescueDecision { donate: true }));
    }
    out.push((donor, Action::RescueDecision { donate: false }));
}

/// Next Player Rule after a placement that did not cause a capture.
///
/// With both colors in the played pile, the move goes to the player whose
/// topmost chip in the pile sits lowest; otherwise it goes to the player
/// whose color is absent from the pile.
pub fn next_active_player(pile_after: &Pile) -> Result<Color, RuleViolation> {
    if pile_after.is_empty() {
        return Err(RuleViolation::NothingPlaced);
    }
    if pile_after.top_pair_matches() {
        return Err(RuleViolation::CaptureContext);
    }
    let chips = pile_after.chips();
    let highest = |c: Color| chips.iter().rposition(|&x| x == c);
    match (highest(Color::Blue), highest(Color::Red)) {
        (Some(b), Some(r)) => Ok(if b < r { Color::Blue } else { Color::Red }),
        (Some(_), None) => Ok(Color::Red),
        (None, Some(_)) => Ok(Color::Blue),
        (None, None) => unreachable!("non-empty pile"),
    }
}

/// Resolves the automatic parts of reaching a decision point: a chipless
/// active player either waits on a rescue or, when the opponent holds no
/// prisoner, is eliminated on the spot.
pub fn start_round(state: &GameState) -> GameState {
    let mut next = state.clone();
    settle(&mut next);
    next
}

/// Returns the player eliminated by settling, if any.
fn settle(state: &mut GameState) -> Option<Color> {
    if state.winner.is_some() || !state.phase.is_decision_point() {
        return None;
    }
    let me = state.active;
    if !state.hand(me).is_empty() {
        return None;
    }
    if state.hand(me.opponent()).prisoners > 0 {
        state.phase = Phase::AwaitRescueDonation;
        None
    } else {
        state.winner = Some(me.opponent());
        state.phase = Phase::TurnStart;
        Some(me)
    }
}

fn hands_over(state: &mut GameState, previous_active: Color, next: Color) {
    state.active = next;
    state.phase = if next == previous_active {
        Phase::InRound
    } else {
        Phase::TurnStart
    };
}

/// Applies `action` by `actor`, or explains why it is illegal.
pub fn apply_action(
    state: &GameState,
    actor: Color,
    action: Action,
) -> Result<TransitionRecord, RuleViolation> {
    if let Some(w) = is_terminal(state) {
        return Err(RuleViolation::GameOver(w));
    }
    let expected = acting_player(state).expect("non-terminal state has an actor");
    if actor != expected {
        return Err(RuleViolation::WrongActor {
            expected,
            got: actor,
        });
    }
    let before_active = state.active;
    let mut next = state.clone();
    let mut capture = false;
    let mut discarded = None;
    let mut eliminated = None;
    let rescue_pending = matches!(state.phase, Phase::AwaitRescueDonation)
        || (state.phase.is_decision_point() && state.hand(state.active).is_empty());

    match action {
        Action::Place { pile, color } => {
            if rescue_pending || !state.phase.is_decision_point() {
                return Err(RuleViolation::WrongPhase {
                    action,
                    phase: state.phase,
                });
            }
            if pile >= state.board.k() {
                return Err(RuleViolation::NoSuchPile(pile));
            }
            let held = next.hand_mut(actor).of_color_mut(actor, color);
            if *held == 0 {
                return Err(RuleViolation::NotHeld {
                    player: actor,
                    color,
                });
            }
            *held -= 1;
            let played = next.board.pile_mut(pile);
            played.push(color);
            if played.top_pair_matches() {
                capture = true;
                next.phase = Phase::AwaitCaptureDiscard { pile, color };
            } else {
                let to = next_active_player(played).expect("no capture pending");
                hands_over(&mut next, before_active, to);
                eliminated = settle(&mut next);
            }
        }
        Action::CaptureDiscard(chosen) => {
            let Phase::AwaitCaptureDiscard {
                pile,
                color: capturer,
            } = state.phase
            else {
                return Err(RuleViolation::WrongPhase {
                    action,
                    phase: state.phase,
                });
            };
            let rest = next
                .board
                .pile_mut(pile)
                .take_all_but(chosen)
                .ok_or(RuleViolation::ColorNotInPile(chosen))?;
            let hand = next.hand_mut(capturer);
            for c in rest {
                *hand.of_color_mut(capturer, c) += 1;
            }
            discarded = Some(chosen);
            hands_over(&mut next, before_active, capturer);
            eliminated = settle(&mut next);
        }
        Action::DiscardPrisoner | Action::DonatePrisoner => {
            if rescue_pending || !state.phase.is_decision_point() {
                return Err(RuleViolation::WrongPhase {
                    action,
                    phase: state.phase,
                });
            }
            let hand = next.hand_mut(actor);
            if hand.prisoners == 0 {
                return Err(RuleViolation::NoPrisoner(actor));
            }
            hand.prisoners -= 1;
            if action == Action::DonatePrisoner {
                next.hand_mut(actor.opponent()).guards += 1;
            } else {
                discarded = Some(actor.opponent());
            }
            eliminated = settle(&mut next);
        }
        Action::RescueDecision { donate } => {
            if !rescue_pending {
                return Err(RuleViolation::WrongPhase {
                    action,
                    phase: state.phase,
                });
            }
            if donate {
                let hand = next.hand_mut(actor);
                if hand.prisoners == 0 {
                    return Err(RuleViolation::NoPrisoner(actor));
                }
                hand.prisoners -= 1;
                next.hand_mut(actor.opponent()).guards += 1;
                next.phase = Phase::TurnStart;
            } else {
                next.winner = Some(actor);
                next.phase = Phase::TurnStart;
                eliminated = Some(actor.opponent());
            }
        }
    }

    let round_ended = next.active != before_active || eliminated.is_some();
    Ok(TransitionRecord {
        actor,
        action,
        state: next,
        capture,
        round_ended,
        discarded,
        eliminated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Board, Hand};
    use crate::notation::parse_board;
    use Color::*;

    fn state(board: &str, blue: (u32, u32), red: (u32, u32), active: Color) -> GameState {
        GameState::new(
            parse_board(board).unwrap(),
            Hand::new(blue.0, blue.1),
            Hand::new(red.0, red.1),
            active,
        )
    }

    fn place(pile: usize, color: Color) -> Action {
        Action::Place { pile, color }
    }

    #[test]
    fn actions_on_single_empty_pile() {
        let s = state("_", (1, 1), (0, 0), Blue);
        let got = legal_actions(&s).unwrap();
        assert_eq!(
            got,
            vec![
                (Blue, place(0, Blue)),
                (Blue, place(0, Red)),
                (Blue, Action::DiscardPrisoner),
                (Blue, Action::DonatePrisoner),
            ]
        );
    }

    #[test]
    fn chipless_active_player_waits_on_rescue() {
        // Red holds two blue prisoners and one red guard.
        let s = state("_", (0, 0), (1, 2), Blue);
        let got = legal_actions(&s).unwrap();
        assert_eq!(
            got,
            vec![
                (Red, Action::RescueDecision { donate: true }),
                (Red, Action::RescueDecision { donate: false }),
            ]
        );
    }

    #[test]
    fn capture_discard_choices() {
        let board = Board::new(vec![Pile::from_chips(vec![Red, Blue, Blue])]).unwrap();
        let s = GameState::with_phase(
            board,
            Hand::new(1, 0),
            Hand::new(1, 0),
            Blue,
            Phase::AwaitCaptureDiscard {
                pile: 0,
                color: Blue,
            },
            None,
        )
        .unwrap();
        assert_eq!(
            legal_actions(&s).unwrap(),
            vec![
                (Blue, Action::CaptureDiscard(Blue)),
                (Blue, Action::CaptureDiscard(Red))
            ]
        );
    }

    #[test]
    fn capture_by_placer_nets_a_guard() {
        let s = state("rb", (1, 0), (1, 0), Blue);
        let t = apply_action(&s, Blue, place(0, Blue)).unwrap();
        assert!(t.capture);
        assert_eq!(
            t.state.phase,
            Phase::AwaitCaptureDiscard {
                pile: 0,
                color: Blue
            }
        );
        assert_eq!(t.state.board.pile(0).unwrap().chips(), &[Red, Blue, Blue]);
        let t = apply_action(&t.state, Blue, Action::CaptureDiscard(Red)).unwrap();
        assert_eq!(t.state.blue, Hand::new(2, 0));
        assert!(t.state.board.pile(0).unwrap().is_empty());
        assert_eq!(t.state.active, Blue);
        assert_eq!(t.discarded, Some(Red));
        assert!(!t.round_ended);
    }

    #[test]
    fn own_chip_on_empty_pile_passes_the_turn() {
        let s = state("_,_", (1, 0), (1, 0), Blue);
        let t = apply_action(&s, Blue, place(0, Blue)).unwrap();
        assert!(!t.capture);
        assert_eq!(t.state.active, Red);
        assert_eq!(t.state.phase, Phase::TurnStart);
        assert!(t.round_ended);
    }

    #[test]
    fn opponent_chip_on_empty_pile_keeps_the_turn() {
        let s = state("_,_", (1, 1), (1, 0), Blue);
        let t = apply_action(&s, Blue, place(0, Red)).unwrap();
        assert_eq!(t.state.active, Blue);
        assert_eq!(t.state.phase, Phase::InRound);
        assert!(!t.round_ended);
    }

    #[test]
    fn next_player_rule_cases() {
        // r placed on a b-topped pile by Blue: Blue's top chip is lowest.
        assert_eq!(
            next_active_player(&Pile::from_chips(vec![Blue, Red])).unwrap(),
            Blue
        );
        // b placed on an r-topped pile.
        assert_eq!(
            next_active_player(&Pile::from_chips(vec![Red, Blue])).unwrap(),
            Red
        );
        // single chip: the absent color moves.
        assert_eq!(
            next_active_player(&Pile::from_chips(vec![Blue])).unwrap(),
            Red
        );
        assert_eq!(
            next_active_player(&Pile::from_chips(vec![Red, Red])),
            Err(RuleViolation::CaptureContext)
        );
        assert_eq!(
            next_active_player(&Pile::empty()),
            Err(RuleViolation::NothingPlaced)
        );
    }

    #[test]
    fn opponent_color_on_opponent_pile_hands_capture_to_opponent() {
        let s = state("r", (0, 1), (1, 0), Blue);
        let t = apply_action(&s, Blue, place(0, Red)).unwrap();
        assert_eq!(
            t.state.phase,
            Phase::AwaitCaptureDiscard {
                pile: 0,
                color: Red
            }
        );
        assert_eq!(acting_player(&t.state), Some(Red));
        let t = apply_action(&t.state, Red, Action::CaptureDiscard(Red)).unwrap();
        assert_eq!(t.state.active, Red);
        assert_eq!(t.state.phase, Phase::TurnStart);
        assert_eq!(t.state.red, Hand::new(2, 0));
        assert!(t.round_ended);
    }

    #[test]
    fn rescue_and_elimination() {
        let s = state("_", (0, 0), (0, 1), Blue);
        let t = apply_action(&s, Red, Action::RescueDecision { donate: false }).unwrap();
        assert_eq!(is_terminal(&t.state), Some(Red));
        assert_eq!(t.eliminated, Some(Blue));

        let t = apply_action(&s, Red, Action::RescueDecision { donate: true }).unwrap();
        assert_eq!(t.state.blue, Hand::new(1, 0));
        assert_eq!(t.state.red, Hand::new(0, 0));
        assert_eq!(t.state.phase, Phase::TurnStart);
        assert_eq!(is_terminal(&t.state), None);
    }

    #[test]
    fn terminal_detection() {
        assert_eq!(is_terminal(&state("_,_", (1, 0), (1, 0), Blue)), None);
        // Red to move with nothing; Blue holds no prisoner to give.
        let s = state("_", (0, 0), (0, 0), Red);
        assert_eq!(is_terminal(&s), Some(Blue));
        assert!(matches!(
            legal_actions(&s),
            Err(RuleViolation::GameOver(Blue))
        ));
    }

    #[test]
    fn start_round_examples() {
        let s = start_round(&state("_", (2, 0), (0, 0), Blue));
        assert_eq!(s.phase, Phase::TurnStart);
        assert_eq!(s.winner, None);

        // One blue chip in Red's hand is a prisoner Red may donate.
        let s = start_round(&state("_", (0, 0), (0, 1), Blue));
        assert_eq!(s.phase, Phase::AwaitRescueDonation);

        // Red holds only guards.
        let s = start_round(&state("_", (0, 0), (3, 0), Blue));
        assert_eq!(s.winner, Some(Red));
    }

    #[test]
    fn illegal_actions_are_rejected_without_change() {
        let s = state("_", (1, 0), (1, 0), Blue);
        assert_eq!(
            apply_action(&s, Blue, place(0, Red)),
            Err(RuleViolation::NotHeld {
                player: Blue,
                color: Red
            })
        );
        assert_eq!(
            apply_action(&s, Red, place(0, Red)),
            Err(RuleViolation::WrongActor {
                expected: Blue,
                got: Red
            })
        );
        assert_eq!(
            apply_action(&s, Blue, place(3, Blue)),
            Err(RuleViolation::NoSuchPile(3))
        );
        assert_eq!(
            apply_action(&s, Blue, Action::DiscardPrisoner),
            Err(RuleViolation::NoPrisoner(Blue))
        );
        assert!(matches!(
            apply_action(&s, Blue, Action::CaptureDiscard(Blue)),
            Err(RuleViolation::WrongPhase { .. })
        ));
    }

    #[test]
    fn discarding_last_chip_faces_elimination() {
        let s = state("_", (0, 1), (0, 1), Blue);
        let t = apply_action(&s, Blue, Action::DiscardPrisoner).unwrap();
        assert_eq!(t.state.phase, Phase::AwaitRescueDonation);
        let s = state("_", (0, 1), (1, 0), Blue);
        let t = apply_action(&s, Blue, Action::DiscardPrisoner).unwrap();
        assert_eq!(t.state.winner, Some(Red));
        assert_eq!(t.eliminated, Some(Blue));
    }

    #[test]
    fn donation_moves_a_prisoner_as_a_guard() {
        let s = state("_", (1, 2), (0, 0), Blue);
        let t = apply_action(&s, Blue, Action::DonatePrisoner).unwrap();
        assert_eq!(t.state.blue, Hand::new(1, 1));
        assert_eq!(t.state.red, Hand::new(1, 0));
        assert_eq!(t.discarded, None);
    }
}
