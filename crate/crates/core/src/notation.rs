//! Board text notation: piles separated by `,`, `_` for an empty pile,
//! otherwise the pile's colors bottom to top, e.g. `_,r,b,rbr`.

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{Board, Color, Hand, Pile};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NotationError {
    // `column` fields are 0-based byte offsets; messages count from 1.
    #[error("column {}: unexpected character {found:?} (expected `b`, `r` or `_`)", .column + 1)]
    BadChip { column: usize, found: char },
    #[error("column {}: empty pile entry (use `_` for an empty pile)", .column + 1)]
    MissingPile { column: usize },
    #[error("column {}: `_` must stand alone", .column + 1)]
    MixedEmpty { column: usize },
    #[error("board must contain at least one pile")]
    NoPiles,
    #[error("hand {input:?}: expected `guards,prisoners` with non-negative integers")]
    BadHand { input: String },
    #[error("color {input:?}: expected `b` or `r`")]
    BadColor { input: String },
}

/// Parses a single pile; `offset` is the pile's column in the full board text.
fn parse_pile(text: &str, offset: usize) -> Result<Pile, NotationError> {
    let trimmed_start = text.len() - text.trim_start().len();
    let body = text.trim();
    let column = offset + trimmed_start;
    if body.is_empty() {
        return Err(NotationError::MissingPile { column: offset });
    }
    if body == "_" {
        return Ok(Pile::empty());
    }
    let mut chips = Vec::with_capacity(body.len());
    for (i, ch) in body.char_indices() {
        match ch {
            '_' => return Err(NotationError::MixedEmpty { column: column + i }),
            _ => match Color::from_letter(ch) {
                Some(c) => chips.push(c),
                None => {
                    return Err(NotationError::BadChip {
                        column: column + i,
                        found: ch,
                    })
                }
            },
        }
    }
    Ok(Pile::from_chips(chips))
}

pub fn parse_board(text: &str) -> Result<Board, NotationError> {
    if text.trim().is_empty() {
        return Err(NotationError::NoPiles);
    }
    let mut piles = Vec::new();
    let mut offset = 0;
    for part in text.split(',') {
        piles.push(parse_pile(part, offset)?);
        offset += part.len() + 1;
    }
    Board::new(piles).map_err(|_| NotationError::NoPiles)
}

pub fn format_pile(pile: &Pile) -> String {
    if pile.is_empty() {
        "_".to_string()
    } else {
        pile.chips().iter().map(|c| c.letter()).collect()
    }
}

pub fn format_board(board: &Board) -> String {
    let mut out = String::new();
    for (i, p) in board.piles().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{}", format_pile(p));
    }
    out
}

/// Parses `guards,prisoners`.
pub fn parse_hand(text: &str) -> Result<Hand, NotationError> {
    let bad = || NotationError::BadHand {
        input: text.to_string(),
    };
    let (g, p) = text.split_once(',').ok_or_else(bad)?;
    let guards = g.trim().parse::<u32>().map_err(|_| bad())?;
    let prisoners = p.trim().parse::<u32>().map_err(|_| bad())?;
    Ok(Hand::new(guards, prisoners))
}

pub fn format_hand(hand: &Hand) -> String {
    format!("{},{}", hand.guards, hand.prisoners)
}

pub fn parse_color(text: &str) -> Result<Color, NotationError> {
    let t = text.trim();
    match t.to_ascii_lowercase().as_str() {
        "b" | "blue" => Ok(Color::Blue),
        "r" | "red" => Ok(Color::Red),
        _ => Err(NotationError::BadColor {
            input: t.to_string(),
        }),
    }
}
