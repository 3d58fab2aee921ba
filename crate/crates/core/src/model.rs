//! Chips, piles, hands, board and the full game state.
//!
//! Only the two-color endgame is modelled: every chip is either blue or red and
//! the only players left are Blue and Red. Values are immutable once built;
//! the rules engine produces new states rather than mutating old ones.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Chip color, which doubles as the identity of the player owning that color.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Color {
    #[serde(rename = "b")]
    Blue,
    #[serde(rename = "r")]
    Red,
}

impl Color {
    pub const ALL: [Color; 2] = [Color::Blue, Color::Red];

    #[inline]
    pub fn opponent(self) -> Color {
        match self {
            Color::Blue => Color::Red,
            Color::Red => Color::Blue,
        }
    }

    /// Single-letter form used by the board notation (`b` / `r`).
    #[inline]
    pub fn letter(self) -> char {
        match self {
            Color::Blue => 'b',
            Color::Red => 'r',
        }
    }

    pub fn from_letter(c: char) -> Option<Color> {
        match c {
            'b' | 'B' => Some(Color::Blue),
            'r' | 'R' => Some(Color::Red),
            _ => None,
        }
    }

    #[inline]
    pub(crate) fn index(self) -> usize {
        match self {
            Color::Blue => 0,
            Color::Red => 1,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Color::Blue => "Blue",
            Color::Red => "Red",
        })
    }
}

/// A stack of chips, stored bottom to top.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pile {
    chips: Vec<Color>,
}

impl Pile {
    pub fn empty() -> Pile {
        Pile { chips: Vec::new() }
    }

    pub fn from_chips(chips: Vec<Color>) -> Pile {
        Pile { chips }
    }

    /// The alternating pile of the given length whose top chip is `top`.
    pub fn alternating(top: Color, len: usize) -> Pile {
        let chips = (0..len)
            .map(|i| {
                if (len - 1 - i).is_multiple_of(2) {
                    top
                } else {
                    top.opponent()
                }
            })
            .collect();
        Pile { chips }
    }

    pub fn chips(&self) -> &[Color] {
        &self.chips
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.chips.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.chips.is_empty()
    }

    #[inline]
    pub fn top(&self) -> Option<Color> {
        self.chips.last().copied()
    }

    pub fn is_singleton(&self) -> bool {
        self.chips.len() == 1
    }

    pub fn is_long(&self) -> bool {
        self.chips.len() >= 2
    }

    /// Number of chips of `color` in the pile.
    pub fn count(&self, color: Color) -> usize {
        self.chips.iter().filter(|&&c| c == color).count()
    }

    /// True when no two consecutive chips share a color.
    pub fn is_alternating(&self) -> bool {
        self.chips.windows(2).all(|w| w[0] != w[1])
    }

    /// True when the top two chips share a color, i.e. a capture is pending.
    pub fn top_pair_matches(&self) -> bool {
        let n = self.chips.len();
        n >= 2 && self.chips[n - 1] == self.chips[n - 2]
    }

    pub(crate) fn push(&mut self, color: Color) {
        self.chips.push(color);
    }

    /// Removes one chip of `color` (the topmost one) and returns the rest, emptying the pile.
    pub(crate) fn take_all_but(&mut self, color: Color) -> Option<Vec<Color>> {
        let pos = self.chips.iter().rposition(|&c| c == color)?;
        let mut chips = std::mem::take(&mut self.chips);
        chips.remove(pos);
        Some(chips)
    }
}

/// Number of chips of `color` in `pile`.
pub fn pile_count(pile: &Pile, color: Color) -> usize {
    pile.count(color)
}

/// Chips held by one player. Guards are chips of the player's own color,
/// prisoners are chips of the opponent's color.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Hand {
    pub guards: u32,
    pub prisoners: u32,
}

impl Hand {
    pub const EMPTY: Hand = Hand {
        guards: 0,
        prisoners: 0,
    };

    pub fn new(guards: u32, prisoners: u32) -> Hand {
        Hand { guards, prisoners }
    }

    #[inline]
    pub fn total(&self) -> u32 {
        self.guards + self.prisoners
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    /// Chips of `color` held by the player whose own color is `owner`.
    #[inline]
    pub fn of_color(&self, owner: Color, color: Color) -> u32 {
        if owner == color {
            self.guards
        } else {
            self.prisoners
        }
    }

    pub(crate) fn of_color_mut(&mut self, owner: Color, color: Color) -> &mut u32 {
        if owner == color {
            &mut self.guards
        } else {
            &mut self.prisoners
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("a board needs at least one pile")]
    NoPiles,
    #[error("phase {phase:?} is inconsistent with the board: {reason}")]
    BadPhase { phase: Phase, reason: String },
    #[error("winner {0} recorded on a state that still has a pending decision")]
    WinnerWithPendingPhase(Color),
}

/// The `k` piles on the table. `k` never changes during a game.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Board {
    piles: Vec<Pile>,
}

impl Board {
    pub fn new(piles: Vec<Pile>) -> Result<Board, ModelError> {
        if piles.is_empty() {
            return Err(ModelError::NoPiles);
        }
        Ok(Board { piles })
    }

    pub fn empty(k: usize) -> Result<Board, ModelError> {
        Board::new(vec![Pile::empty(); k])
    }

    pub fn piles(&self) -> &[Pile] {
        &self.piles
    }

    pub fn pile(&self, index: usize) -> Option<&Pile> {
        self.piles.get(index)
    }

    pub(crate) fn pile_mut(&mut self, index: usize) -> &mut Pile {
        &mut self.piles[index]
    }

    /// Number of piles, `k`.
    pub fn k(&self) -> usize {
        self.piles.len()
    }

    pub fn chip_count(&self) -> usize {
        self.piles.iter().map(Pile::len).sum()
    }

    pub fn is_alternating(&self) -> bool {
        self.piles.iter().all(Pile::is_alternating)
    }

    /// Same board with every chip recolored to the other color.
    pub fn color_swapped(&self) -> Board {
        Board {
            piles: self
                .piles
                .iter()
                .map(|p| Pile::from_chips(p.chips.iter().map(|c| c.opponent()).collect()))
                .collect(),
        }
    }
}

/// Which decision the game is waiting on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Phase {
    /// A new round has just started for the active player.
    TurnStart,
    /// The active player keeps the move inside their current round.
    InRound,
    /// The owner of `color` must pick which chip of pile `pile` goes to the dead box.
    AwaitCaptureDiscard { pile: usize, color: Color },
    /// The active player cannot place; the opponent decides whether to donate.
    AwaitRescueDonation,
}

impl Phase {
    /// Turn start or in-round: the active player is about to act.
    pub fn is_decision_point(&self) -> bool {
        matches!(self, Phase::TurnStart | Phase::InRound)
    }
}

/// Complete position: board, both hands, the active player and the pending decision.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GameState {
    pub board: Board,
    pub blue: Hand,
    pub red: Hand,
    pub active: Color,
    pub phase: Phase,
    pub winner: Option<Color>,
}

impl GameState {
    /// A fresh position at the start of `active`'s round.
    pub fn new(board: Board, blue: Hand, red: Hand, active: Color) -> GameState {
        GameState {
            board,
            blue,
            red,
            active,
            phase: Phase::TurnStart,
            winner: None,
        }
    }

    /// Builds a state in an arbitrary phase, checking that the phase fits the board.
    pub fn with_phase(
        board: Board,
        blue: Hand,
        red: Hand,
        active: Color,
        phase: Phase,
        winner: Option<Color>,
    ) -> Result<GameState, ModelError> {
        let state = GameState {
            board,
            blue,
            red,
            active,
            phase,
            winner,
        };
        state.validate()?;
        Ok(state)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match self.phase {
            Phase::AwaitCaptureDiscard { pile, color } => {
                let ok = self
                    .board
                    .pile(pile)
                    .map(|p| p.top_pair_matches() && p.top() == Some(color))
                    .unwrap_or(false);
                if !ok {
                    return Err(ModelError::BadPhase {
                        phase: self.phase,
                        reason: format!("pile {pile} does not end in two {color} chips"),
                    });
                }
            }
            Phase::AwaitRescueDonation => {
                if !self.hand(self.active).is_empty() {
                    return Err(ModelError::BadPhase {
                        phase: self.phase,
                        reason: "the active player still holds chips".into(),
                    });
                }
            }
            Phase::TurnStart | Phase::InRound => {}
        }
        if let Some(w) = self.winner {
            if !self.phase.is_decision_point() {
                return Err(ModelError::WinnerWithPendingPhase(w));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn hand(&self, player: Color) -> &Hand {
        match player {
            Color::Blue => &self.blue,
            Color::Red => &self.red,
        }
    }

    #[inline]
    pub(crate) fn hand_mut(&mut self, player: Color) -> &mut Hand {
        match player {
            Color::Blue => &mut self.blue,
            Color::Red => &mut self.red,
        }
    }

    /// Color-major counts `(m_b, m_r, n_b, n_r)`: chips of each color held by Blue, then by Red.
    pub fn color_counts(&self) -> (u32, u32, u32, u32) {
        (
            self.blue.guards,
            self.blue.prisoners,
            self.red.prisoners,
            self.red.guards,
        )
    }

    pub fn total_chips(&self) -> usize {
        self.board.chip_count() + (self.blue.total() + self.red.total()) as usize
    }

    /// At a round boundary every pile alternates and no decision other than the
    /// active player's own is pending.
    pub fn is_round_boundary(&self) -> bool {
        self.phase == Phase::TurnStart && self.board.is_alternating()
    }

    /// The mirror position: colors of all chips swapped and the players' roles exchanged.
    pub fn color_swapped(&self) -> GameState {
        let phase = match self.phase {
            Phase::AwaitCaptureDiscard { pile, color } => Phase::AwaitCaptureDiscard {
                pile,
                color: color.opponent(),
            },
            other => other,
        };
        GameState {
            board: self.board.color_swapped(),
            blue: self.red,
            red: self.blue,
            active: self.active.opponent(),
            phase,
            winner: self.winner.map(Color::opponent),
        }
    }
}

/// Lexicographic termination measure: (all chips, chips in hands, prisoners in hands).
pub fn total_potential(state: &GameState) -> (u64, u64, u64) {
    let hands = (state.blue.total() + state.red.total()) as u64;
    let prisoners = (state.blue.prisoners + state.red.prisoners) as u64;
    (state.board.chip_count() as u64 + hands, hands, prisoners)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Color::*;

    #[test]
    fn opponent_is_an_involution() {
        for c in Color::ALL {
            assert_ne!(c.opponent(), c);
            assert_eq!(c.opponent().opponent(), c);
        }
    }

    #[test]
    fn pile_count_examples() {
        let p = Pile::from_chips(vec![Blue, Red, Blue]);
        assert_eq!(pile_count(&p, Blue), 2);
        assert_eq!(pile_count(&Pile::empty(), Red), 0);
        let r5 = Pile::alternating(Red, 5);
        assert!(r5.is_alternating());
        assert_eq!(r5.top(), Some(Red));
        assert_eq!(pile_count(&r5, Red), 3);
        assert_eq!(pile_count(&r5, Red) + pile_count(&r5, Blue), r5.len());
    }

    #[test]
    fn alternating_pile_reconstruction() {
        assert_eq!(Pile::alternating(Red, 3).chips(), &[Red, Blue, Red]);
        assert_eq!(Pile::alternating(Blue, 2).chips(), &[Red, Blue]);
        assert!(Pile::alternating(Blue, 0).is_empty());
    }

    #[test]
    fn zero_piles_rejected() {
        assert_eq!(Board::new(vec![]), Err(ModelError::NoPiles));
        assert_eq!(Board::empty(0), Err(ModelError::NoPiles));
    }

    #[test]
    fn potential_examples() {
        let s = GameState::new(
            Board::empty(1).unwrap(),
            Hand::new(1, 0),
            Hand::new(1, 0),
            Blue,
        );
        assert_eq!(total_potential(&s), (2, 2, 0));

        let board = Board::new(vec![Pile::from_chips(vec![Blue, Red])]).unwrap();
        let s = GameState::new(board, Hand::EMPTY, Hand::EMPTY, Blue);
        assert_eq!(total_potential(&s), (2, 0, 0));

        // Blue = (m_b 1, m_r 2), Red = (n_b 3, n_r 0)
        let board = Board::new(vec![Pile::from_chips(vec![Red])]).unwrap();
        let s = GameState::new(board, Hand::new(1, 2), Hand::new(0, 3), Blue);
        assert_eq!(total_potential(&s), (7, 6, 5));
    }

    #[test]
    fn capture_phase_must_match_board() {
        let board = Board::new(vec![Pile::from_chips(vec![Red, Blue])]).unwrap();
        let bad = GameState::with_phase(
            board,
            Hand::EMPTY,
            Hand::EMPTY,
            Blue,
            Phase::AwaitCaptureDiscard {
                pile: 0,
                color: Blue,
            },
            None,
        );
        assert!(matches!(bad, Err(ModelError::BadPhase { .. })));
    }

    #[test]
    fn color_swap_roundtrip() {
        let board = Board::new(vec![Pile::alternating(Red, 3), Pile::empty()]).unwrap();
        let s = GameState::new(board, Hand::new(2, 1), Hand::new(0, 3), Red);
        let w = s.color_swapped();
        assert_eq!(w.active, Blue);
        assert_eq!(w.blue, Hand::new(0, 3));
        assert_eq!(w.board.pile(0).unwrap().top(), Some(Blue));
        assert_eq!(w.color_swapped(), s);
    }
}
