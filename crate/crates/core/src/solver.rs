//! Exhaustive win/loss search with memoization on a canonical state key.
//!
//! Outcomes are binary, so the search is a plain AND/OR evaluation: the
//! acting player wins iff some action leads to a position they win. The
//! state graph is acyclic (every transition lowers the termination
//! potential), so no depth limit is needed.
//!
//! Piles are interchangeable and, at decision points, alternate in color, so
//! a pile is fully described by its top color and length. The canonical key
//! is the sorted multiset of those pairs plus hands, active player and the
//! pending decision. Turn start and in-round decision points share a key:
//! their legal actions and values coincide.

use std::fmt;
use std::hash::{BuildHasher, Hash};

use dashmap::DashMap;
use rustc_hash::{FxBuildHasher, FxHashMap};
use thiserror::Error;

use crate::model::{Color, GameState, Hand, Phase, Pile};
use crate::notation::format_pile;
use crate::rules::{self, Action, RuleViolation};
use crate::strategy::{self, DecisionContext, PolicySpec, StrategyError};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("state exceeds solver capacity: {0}")]
    Capacity(String),
    #[error("pile {0} does not alternate outside a pending capture")]
    NotCanonical(usize),
    #[error("the game is already over; {0} has won")]
    AlreadyOver(Color),
    #[error(transparent)]
    Rule(#[from] RuleViolation),
    #[error("policy failed: {0}")]
    Policy(#[from] StrategyError),
}

/// Decision pending in a canonical key.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KeyPhase {
    Decision,
    CaptureDiscard { pile: Pile, capturer: Color },
    Rescue,
}

/// Position up to pile re-indexing.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey {
    /// Non-empty piles (excluding one pending capture), sorted.
    pub piles: Vec<Pile>,
    pub empty_piles: usize,
    pub blue: (u32, u32),
    pub red: (u32, u32),
    pub active: Color,
    pub phase: KeyPhase,
}

pub fn canonicalize(state: &GameState) -> CanonicalKey {
    let pending = match state.phase {
        Phase::AwaitCaptureDiscard { pile, .. } => Some(pile),
        _ => None,
    };
    let mut piles = Vec::new();
    let mut empty_piles = 0;
    for (i, p) in state.board.piles().iter().enumerate() {
        if Some(i) == pending {
            continue;
        }
        if p.is_empty() {
            empty_piles += 1;
        } else {
            piles.push(p.clone());
        }
    }
    piles.sort();
    let phase = match state.phase {
        Phase::AwaitCaptureDiscard { pile, color } => KeyPhase::CaptureDiscard {
            pile: state.board.piles()[pile].clone(),
            capturer: color,
        },
        Phase::AwaitRescueDonation => KeyPhase::Rescue,
        Phase::TurnStart | Phase::InRound => {
            if state.hand(state.active).is_empty() {
                KeyPhase::Rescue
            } else {
                KeyPhase::Decision
            }
        }
    };
    CanonicalKey {
        piles,
        empty_piles,
        blue: (state.blue.guards, state.blue.prisoners),
        red: (state.red.guards, state.red.prisoners),
        active: state.active,
        phase,
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.piles.iter().map(format_pile).collect();
        parts.extend(std::iter::repeat_n("_".to_string(), self.empty_piles));
        write!(
            f,
            "{} B={},{} R={},{} active={}",
            parts.join(","),
            self.blue.0,
            self.blue.1,
            self.red.0,
            self.red.1,
            self.active.letter()
        )?;
        match &self.phase {
            KeyPhase::Decision => Ok(()),
            KeyPhase::CaptureDiscard { pile, capturer } => {
                write!(f, " capture={}:{}", capturer.letter(), format_pile(pile))
            }
            KeyPhase::Rescue => f.write_str(" rescue"),
        }
    }
}

const MAX_PILES: usize = 8;
const MAX_PILE_LEN: usize = 127;
const MAX_HAND: u32 = 255;

fn pile_byte(pile: &Pile) -> u8 {
    match pile.top() {
        None => 0,
        Some(top) => ((pile.len() as u8) << 1) | (top == Color::Red) as u8,
    }
}

/// Compact form of [`canonicalize`] used as the memo key.
///
/// Layout: bits 0..64 sorted pile bytes, 64..96 the four hand counts, 96
/// active player, 97..99 phase, 99..107 pending pile, 107..111 pile count.
pub fn packed_key(state: &GameState) -> Result<u128, SolveError> {
    let k = state.board.k();
    if k > MAX_PILES {
        return Err(SolveError::Capacity(format!("{k} piles (max {MAX_PILES})")));
    }
    let pending = match state.phase {
        Phase::AwaitCaptureDiscard { pile, .. } => Some(pile),
        _ => None,
    };
    let mut bytes = [0u8; MAX_PILES];
    let mut n = 0;
    let mut pending_byte = 0u8;
    for (i, p) in state.board.piles().iter().enumerate() {
        if p.len() > MAX_PILE_LEN {
            return Err(SolveError::Capacity(format!("pile of length {}", p.len())));
        }
        if Some(i) == pending {
            let below = &p.chips()[..p.len() - 1];
            if !below.windows(2).all(|w| w[0] != w[1]) {
                return Err(SolveError::NotCanonical(i));
            }
            pending_byte = pile_byte(p);
            continue;
        }
        if !p.is_alternating() {
            return Err(SolveError::NotCanonical(i));
        }
        bytes[n] = pile_byte(p);
        n += 1;
    }
    bytes[..n].sort_unstable_by(|a, b| b.cmp(a));
    let hands = [
        state.blue.guards,
        state.blue.prisoners,
        state.red.guards,
        state.red.prisoners,
    ];
    if hands.iter().any(|&h| h > MAX_HAND) {
        return Err(SolveError::Capacity(format!("hand count above {MAX_HAND}")));
    }
    let mut key = u64::from_le_bytes(bytes) as u128;
    for (i, h) in hands.iter().enumerate() {
        key |= (*h as u128) << (64 + 8 * i);
    }
    key |= ((state.active == Color::Red) as u128) << 96;
    let phase_code: u128 = match state.phase {
        Phase::AwaitCaptureDiscard { .. } => 1,
        Phase::AwaitRescueDonation => 2,
        _ if state.hand(state.active).is_empty() => 2,
        _ => 0,
    };
    key |= phase_code << 97;
    key |= (pending_byte as u128) << 99;
    key |= (k as u128) << 107;
    Ok(key)
}

/// Winner under optimal play, with the line that realizes it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveResult {
    pub winner: Color,
    pub principal_variation: Vec<(Color, Action)>,
    pub nodes_expanded: u64,
    pub memo_hits: u64,
}

/// Storage for solved values; `true` means Blue wins.
pub trait MemoTable {
    fn lookup(&self, key: u128) -> Option<bool>;
    fn store(&mut self, key: u128, blue_wins: bool);
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Single-threaded memo.
#[derive(Default)]
pub struct LocalMemo(FxHashMap<u128, bool>);

impl MemoTable for LocalMemo {
    fn lookup(&self, key: u128) -> Option<bool> {
        self.0.get(&key).copied()
    }
    fn store(&mut self, key: u128, blue_wins: bool) {
        self.0.insert(key, blue_wins);
    }
    fn len(&self) -> usize {
        self.0.len()
    }
}

/// Memo shared between worker threads. Values per key are unique, so
/// concurrent inserts of the same key are idempotent.
pub type SharedTable = DashMap<u128, bool, FxBuildHasher>;

pub fn shared_table() -> SharedTable {
    DashMap::with_hasher(FxBuildHasher)
}

pub struct SharedMemo<'a>(pub &'a SharedTable);

impl MemoTable for SharedMemo<'_> {
    fn lookup(&self, key: u128) -> Option<bool> {
        self.0.get(&key).map(|v| *v)
    }
    fn store(&mut self, key: u128, blue_wins: bool) {
        self.0.insert(key, blue_wins);
    }
    fn len(&self) -> usize {
        self.0.len()
    }
}

/// Memo that never remembers anything; used to cross-check memoization.
#[derive(Default)]
pub struct NoMemo;

impl MemoTable for NoMemo {
    fn lookup(&self, _: u128) -> Option<bool> {
        None
    }
    fn store(&mut self, _: u128, _: bool) {}
    fn len(&self) -> usize {
        0
    }
}

/// Search engine. One side may be pinned to a policy; the other side (or
/// both, when nothing is pinned) plays optimally.
pub struct Solver<M: MemoTable = LocalMemo> {
    memo: M,
    fixed: Option<(Color, PolicySpec)>,
    nodes: u64,
    hits: u64,
}

impl Solver<LocalMemo> {
    pub fn new() -> Self {
        Solver::with_memo(LocalMemo::default())
    }
}

impl Default for Solver<LocalMemo> {
    fn default() -> Self {
        Solver::new()
    }
}

impl<M: MemoTable> Solver<M> {
    pub fn with_memo(memo: M) -> Self {
        Solver {
            memo,
            fixed: None,
            nodes: 0,
            hits: 0,
        }
    }

    /// Pins `color` to `policy`. A memo must not be shared between solvers
    /// with different pinned policies.
    pub fn pinned(memo: M, color: Color, policy: PolicySpec) -> Self {
        Solver {
            memo,
            fixed: Some((color, policy)),
            nodes: 0,
            hits: 0,
        }
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    pub fn nodes_expanded(&self) -> u64 {
        self.nodes
    }

    pub fn memo_hits(&self) -> u64 {
        self.hits
    }

    /// Winner only, without reconstructing a line.
    pub fn winner(&mut self, state: &GameState) -> Result<Color, SolveError> {
        self.value(state, 0)
    }

    /// Decided positions report their winner with an empty line.
    pub fn solve(&mut self, state: &GameState) -> Result<SolveResult, SolveError> {
        if let Some(winner) = rules::is_terminal(state) {
            return Ok(SolveResult {
                winner,
                principal_variation: Vec::new(),
                nodes_expanded: 0,
                memo_hits: 0,
            });
        }
        let nodes0 = self.nodes;
        let hits0 = self.hits;
        let winner = self.value(state, 0)?;
        let nodes_expanded = self.nodes - nodes0;
        let memo_hits = self.hits - hits0;
        let principal_variation = self.principal_variation(state, winner)?;
        Ok(SolveResult {
            winner,
            principal_variation,
            nodes_expanded,
            memo_hits,
        })
    }

    /// Optimal action for the acting player: a winning one when it exists.
    pub fn best_action(&mut self, state: &GameState) -> Result<(Color, Action), SolveError> {
        let actor = rules::acting_player(state)
            .ok_or_else(|| SolveError::AlreadyOver(rules::is_terminal(state).unwrap()))?;
        let actions = ordered_actions(state)?;
        for &(a, action) in &actions {
            let child = rules::apply_action(state, a, action)?.state;
            if self.value(&child, 0)? == actor {
                return Ok((a, action));
            }
        }
        Ok(actions[0])
    }

    fn pinned_decision(
        &self,
        state: &GameState,
        key: u128,
        own: usize,
    ) -> Result<Option<(Color, Action)>, SolveError> {
        let Some((color, policy)) = &self.fixed else {
            return Ok(None);
        };
        if rules::acting_player(state) != Some(*color) {
            return Ok(None);
        }
        let ctx = DecisionContext {
            ply: hash_key(key),
            own_decisions: own,
        };
        Ok(Some(policy.decide(state, ctx)?))
    }

    fn memo_key(&self, state: &GameState, own: usize) -> Result<u128, SolveError> {
        let mut key = packed_key(state)?;
        if matches!(self.fixed, Some((_, PolicySpec::Scripted(_)))) {
            key |= (own.min(0xFFFF) as u128) << 112;
        }
        Ok(key)
    }

    fn value(&mut self, state: &GameState, own: usize) -> Result<Color, SolveError> {
        if let Some(w) = rules::is_terminal(state) {
            return Ok(w);
        }
        let key = self.memo_key(state, own)?;
        if let Some(blue) = self.memo.lookup(key) {
            self.hits += 1;
            return Ok(if blue { Color::Blue } else { Color::Red });
        }
        self.nodes += 1;
        let actor = rules::acting_player(state).expect("non-terminal");
        let winner = if let Some((a, action)) = self.pinned_decision(state, key, own)? {
            let child = rules::apply_action(state, a, action)?.state;
            self.value(&child, own + 1)?
        } else {
            let mut winner = actor.opponent();
            for (a, action) in ordered_actions(state)? {
                let child = rules::apply_action(state, a, action)?.state;
                if self.value(&child, own)? == actor {
                    winner = actor;
                    break;
                }
            }
            winner
        };
        self.memo.store(key, winner == Color::Blue);
        Ok(winner)
    }

    fn principal_variation(
        &mut self,
        root: &GameState,
        winner: Color,
    ) -> Result<Vec<(Color, Action)>, SolveError> {
        let mut line = Vec::new();
        let mut state = root.clone();
        let mut own = 0;
        while rules::is_terminal(&state).is_none() {
            let key = self.memo_key(&state, own)?;
            let step = if let Some(step) = self.pinned_decision(&state, key, own)? {
                own += 1;
                step
            } else {
                let actor = rules::acting_player(&state).expect("non-terminal");
                let actions = ordered_actions(&state)?;
                let mut chosen = actions[0];
                if actor == winner {
                    for &(a, action) in &actions {
                        let child = rules::apply_action(&state, a, action)?.state;
                        if self.value(&child, own)? == winner {
                            chosen = (a, action);
                            break;
                        }
                    }
                }
                chosen
            };
            state = rules::apply_action(&state, step.0, step.1)?.state;
            line.push(step);
        }
        Ok(line)
    }
}

fn hash_key(key: u128) -> u64 {
    
    
    FxBuildHasher.hash_one(key)
}

/// Legal actions with duplicates under pile symmetry removed and strategy
/// S's choice tried first.
pub fn ordered_actions(state: &GameState) -> Result<Vec<(Color, Action)>, SolveError> {
    let legal = rules::legal_actions(state)?;
    let piles = state.board.piles();
    let mut out: Vec<(Color, Action)> = Vec::with_capacity(legal.len());
    for (actor, action) in legal {
        if let Action::Place { pile, .. } = action {
            if piles[..pile].iter().any(|p| p == &piles[pile]) {
                continue;
            }
        }
        out.push((actor, action));
    }
    if let Ok(preferred) = strategy::strategy_s_action(state) {
        if let Some(pos) = out.iter().position(|&p| p == preferred) {
            out[..=pos].rotate_right(1);
        }
    }
    Ok(out)
}

/// Exact winner under optimal play.
pub fn solve(state: &GameState) -> Result<SolveResult, SolveError> {
    Solver::new().solve(state)
}

/// Winner when `fixed.0` follows `fixed.1` and the other side plays optimally.
pub fn solve_with_policy(
    state: &GameState,
    fixed: (Color, PolicySpec),
) -> Result<SolveResult, SolveError> {
    Solver::pinned(LocalMemo::default(), fixed.0, fixed.1).solve(state)
}

/// Limits for [`enumerate_states`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub piles: usize,
    pub max_pile_len: usize,
    /// Upper bound on guards + prisoners for each player.
    pub max_hand: u32,
}

impl Bounds {
    pub fn new(piles: usize, max_pile_len: usize, max_hand: u32) -> Self {
        Bounds {
            piles,
            max_pile_len,
            max_hand,
        }
    }

    /// Closed-form count of the states [`enumerate_states`] yields.
    pub fn state_count(&self) -> u128 {
        let kinds = 1 + 2 * self.max_pile_len as u128;
        let boards = binomial(kinds + self.piles as u128 - 1, self.piles as u128);
        let h = self.max_hand as u128;
        let hands = (h + 1) * (h + 2) / 2;
        boards * hands * hands * 2
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n.saturating_sub(k));
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Every round-boundary state within `bounds`, one per canonical key:
/// boards are multisets of alternating piles, hands range over all
/// guard/prisoner splits up to the per-player total, both players may be active.
pub fn enumerate_states(bounds: Bounds) -> impl Iterator<Item = GameState> {
    let mut kinds = vec![Pile::empty()];
    for len in 1..=bounds.max_pile_len {
        kinds.push(Pile::alternating(Color::Blue, len));
        kinds.push(Pile::alternating(Color::Red, len));
    }
    let hands: Vec<Hand> = (0..=bounds.max_hand)
        .flat_map(|g| (0..=bounds.max_hand - g).map(move |p| Hand::new(g, p)))
        .collect();
    multisets(kinds.len(), bounds.piles)
        .into_iter()
        .flat_map(move |combo| {
            let piles: Vec<Pile> = combo.iter().map(|&i| kinds[i].clone()).collect();
            let board = crate::model::Board::new(piles).expect("k >= 1 checked by caller");
            let hands = hands.clone();
            let hands2 = hands.clone();
            hands.into_iter().flat_map(move |blue| {
                let board = board.clone();
                hands2.clone().into_iter().flat_map(move |red| {
                    let board = board.clone();
                    Color::ALL
                        .into_iter()
                        .map(move |active| GameState::new(board.clone(), blue, red, active))
                })
            })
        })
}

/// Non-decreasing index sequences of length `k` over `0..n`.
fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, k, i, cur, out);
            cur.pop();
        }
    }
    rec(n, k, 0, &mut cur, &mut out);
    out
}
