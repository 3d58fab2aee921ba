//! Board summary, board taxonomy, the closed-form winning predicate and the
//! two induction measures used as diagnostics.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Board, Color, GameState};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("pile {0} does not alternate colors; resolve pending captures first")]
    NotAlternating(usize),
}

/// Counts of empty piles and singletons, plus the lengths of the long piles,
/// each list sorted in descending order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoardSummary {
    pub k_e: usize,
    pub k_r: usize,
    pub k_b: usize,
    pub long_r: Vec<usize>,
    pub long_b: Vec<usize>,
}

impl BoardSummary {
    /// Number of long red-topped piles.
    pub fn ell(&self) -> usize {
        self.long_r.len()
    }

    /// Number of long blue-topped piles.
    pub fn h(&self) -> usize {
        self.long_b.len()
    }

    pub fn k(&self) -> usize {
        self.k_e + self.k_r + self.k_b + self.ell() + self.h()
    }

    /// Blue chips in all long blue-topped piles.
    pub fn long_b_blue_chips(&self) -> usize {
        self.long_b.iter().map(|&n| top_color_count(n)).sum()
    }

    /// Red chips in all long red-topped piles.
    pub fn long_r_red_chips(&self) -> usize {
        self.long_r.iter().map(|&n| top_color_count(n)).sum()
    }

    /// Red chips in the longest red-topped pile (0 when there is none).
    pub fn max_long_r_red_chips(&self) -> usize {
        self.long_r
            .iter()
            .map(|&n| top_color_count(n))
            .max()
            .unwrap_or(0)
    }

    /// Same board with colors exchanged.
    pub fn color_swapped(&self) -> BoardSummary {
        BoardSummary {
            k_e: self.k_e,
            k_r: self.k_b,
            k_b: self.k_r,
            long_r: self.long_b.clone(),
            long_b: self.long_r.clone(),
        }
    }
}

/// Chips of the top color in an alternating pile of length `len`.
#[inline]
pub fn top_color_count(len: usize) -> usize {
    len.div_ceil(2)
}

pub fn summarize_board(board: &Board) -> Result<BoardSummary, ClassifyError> {
    let mut s = BoardSummary::default();
    for (i, pile) in board.piles().iter().enumerate() {
        if !pile.is_alternating() {
            return Err(ClassifyError::NotAlternating(i));
        }
        match (pile.top(), pile.len()) {
            (None, _) => s.k_e += 1,
            (Some(Color::Red), 1) => s.k_r += 1,
            (Some(Color::Blue), 1) => s.k_b += 1,
            (Some(Color::Red), n) => s.long_r.push(n),
            (Some(Color::Blue), n) => s.long_b.push(n),
        }
    }
    s.long_r.sort_unstable_by(|a, b| b.cmp(a));
    s.long_b.sort_unstable_by(|a, b| b.cmp(a));
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoardType {
    TypeI,
    GeneralizedTypeI,
    TypeII,
    GeneralizedTypeII,
    General,
}

impl BoardType {
    pub const ALL: [BoardType; 5] = [
        BoardType::TypeI,
        BoardType::GeneralizedTypeI,
        BoardType::TypeII,
        BoardType::GeneralizedTypeII,
        BoardType::General,
    ];

    /// Whether a board of type `self` also belongs to the wider class `class`.
    pub fn within(self, class: BoardType) -> bool {
        use BoardType::*;
        match class {
            TypeI => self == TypeI,
            GeneralizedTypeI => matches!(self, TypeI | GeneralizedTypeI),
            TypeII => self == TypeII,
            GeneralizedTypeII => matches!(self, TypeII | GeneralizedTypeII),
            General => true,
        }
    }
}

impl fmt::Display for BoardType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoardType::TypeI => "type I",
            BoardType::GeneralizedTypeI => "generalized type I",
            BoardType::TypeII => "type II",
            BoardType::GeneralizedTypeII => "generalized type II",
            BoardType::General => "general",
        })
    }
}

/// Most specific board class.
pub fn classify(summary: &BoardSummary) -> BoardType {
    match (summary.ell(), summary.h()) {
        (0 | 1, 0) => BoardType::TypeI,
        (_, 0) => BoardType::GeneralizedTypeI,
        (1, 1) => BoardType::TypeII,
        (1, _) => BoardType::GeneralizedTypeII,
        _ => BoardType::General,
    }
}

/// Whether Blue, active at the start of their turn, can force a win.
///
/// `m_b` counts Blue's blue chips and `n_r` Red's red chips; the other hand
/// counts have no influence on the outcome.
pub fn winning_predicate(summary: &BoardSummary, m_b: u32, n_r: u32) -> bool {
    if m_b == 0 {
        return false;
    }
    if n_r == 0 {
        return true;
    }
    let blue_side = m_b as usize + summary.long_b_blue_chips();
    let red_side = n_r as usize + summary.long_r_red_chips() - summary.max_long_r_red_chips();
    blue_side > red_side
}

/// Predicate for whichever player is active, answered by mirroring colors
/// when Red is to move. Returns the predicted winner.
pub fn predicted_winner(state: &GameState) -> Result<Color, ClassifyError> {
    let normalized = if state.active == Color::Blue {
        state.clone()
    } else {
        state.color_swapped()
    };
    let summary = summarize_board(&normalized.board)?;
    let active_wins = winning_predicate(&summary, normalized.blue.guards, normalized.red.guards);
    Ok(if active_wins {
        state.active
    } else {
        state.active.opponent()
    })
}

/// Red's-holdings measure over the long red-topped piles.
pub fn nu(long_r: &[usize], n_b: u32, n_r: u32) -> i64 {
    let sum: i64 = long_r.iter().map(|&n| n as i64 - 1).sum();
    let max = long_r.iter().map(|&n| n as i64 - 1).max().unwrap_or(0);
    n_b as i64 + n_r as i64 + sum - max - 1
}

/// Blue's-holdings measure over the long blue-topped piles.
pub fn mu(long_b: &[usize], m_b: u32, m_r: u32) -> i64 {
    let sum: i64 = long_b.iter().map(|&n| n as i64 - 1).sum();
    m_b as i64 + m_r as i64 + sum - 1
}

/// Analysis of a position from the active player's point of view.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub summary: BoardSummary,
    pub board_type: BoardType,
    /// Predicate verdict for the active player.
    pub active_wins: bool,
    pub predicted_winner: Color,
    pub nu: i64,
    pub mu: i64,
}

/// Summary, class, predicate verdict and both measures. The board type and
/// measures are reported in the active player's frame (colors mirrored when
/// Red is active), matching the predicate.
pub fn analyze(state: &GameState) -> Result<AnalysisReport, ClassifyError> {
    let normalized = if state.active == Color::Blue {
        state.clone()
    } else {
        state.color_swapped()
    };
    let summary = summarize_board(&normalized.board)?;
    let (m_b, m_r, n_b, n_r) = normalized.color_counts();
    let active_wins = winning_predicate(&summary, m_b, n_r);
    Ok(AnalysisReport {
        board_type: classify(&summary),
        active_wins,
        predicted_winner: if active_wins {
            state.active
        } else {
            state.active.opponent()
        },
        nu: nu(&summary.long_r, n_b, n_r),
        mu: mu(&summary.long_b, m_b, m_r),
        summary,
    })
}
