//! Strategy S, a fallback for guardless players, and the baseline policies
//! used for playouts, policy-constrained solving and live play.
//!
//! Strategy S, for the active player X with at least one guard:
//! 1. capture every pile topped by X's color (longest first), discarding an
//!    opponent chip from the captured pile when it holds one;
//! 2. discard every prisoner;
//! 3. place a guard on the longest opponent-topped pile, or on an empty pile
//!    when there is none. This hands the move to the opponent.
//!
//! S never donates. When it is asked to decide a rescue it declines, and when
//! it captures a pile during the opponent's round it uses the step 1 discard rule.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{Color, GameState, Phase, Pile};
use crate::rules::{self, Action, RuleViolation};
use crate::solver::Solver;

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("{0} holds no guard, so strategy S is undefined; use the fallback policy")]
    NoGuard(Color),
    #[error("{0} holds no chip; the rules engine handles the elimination")]
    EmptyHand(Color),
    #[error("{0} is not the active player at a decision point")]
    NotAtDecisionPoint(Color),
    #[error(transparent)]
    Rule(#[from] RuleViolation),
    #[error("policy spec {0:?} not understood (expected s, random:<seed>, adversarial or scripted:<file>)")]
    BadSpec(String),
    #[error("reading script {path}: {message}")]
    Script { path: String, message: String },
    #[error("solver: {0}")]
    Solver(String),
}

/// Discard choice for a pile captured by `own`: an opponent chip when there is one.
pub fn capture_discard_choice(pile: &Pile, own: Color) -> Color {
    if pile.count(own.opponent()) >= 1 {
        own.opponent()
    } else {
        own
    }
}

/// Longest pile topped by `top`; ties go to the lowest index.
fn longest_topped(state: &GameState, top: Color) -> Option<usize> {
    let mut best: Option<(usize, usize)> = None;
    for (i, p) in state.board.piles().iter().enumerate() {
        if p.top() == Some(top) && best.is_none_or(|(_, len)| p.len() > len) {
            best = Some((i, p.len()));
        }
    }
    best.map(|(i, _)| i)
}

fn shortest_topped(state: &GameState, top: Color) -> Option<usize> {
    let mut best: Option<(usize, usize)> = None;
    for (i, p) in state.board.piles().iter().enumerate() {
        if p.top() == Some(top) && best.is_none_or(|(_, len)| p.len() < len) {
            best = Some((i, p.len()));
        }
    }
    best.map(|(i, _)| i)
}

fn first_empty(state: &GameState) -> Option<usize> {
    state.board.piles().iter().position(Pile::is_empty)
}

/// The single next action strategy S takes for the active player `me`, who
/// must hold at least one guard.
fn strategy_s_step(state: &GameState, me: Color) -> Action {
    if let Some(pile) = longest_topped(state, me) {
        return Action::Place { pile, color: me };
    }
    if state.hand(me).prisoners > 0 {
        return Action::DiscardPrisoner;
    }
    let pile = longest_topped(state, me.opponent())
        .or_else(|| first_empty(state))
        .expect("after step 1 every pile is empty or opponent-topped");
    Action::Place { pile, color: me }
}

/// Deterministic losing-side play for a player with prisoners but no guard:
/// a prisoner goes on an empty pile, else on the shortest opponent-topped
/// pile, else on the shortest own-topped pile. Never donates.
pub fn fallback_policy(state: &GameState) -> Result<Action, StrategyError> {
    let me = state.active;
    if !state.phase.is_decision_point() {
        return Err(StrategyError::NotAtDecisionPoint(me));
    }
    let hand = state.hand(me);
    if hand.is_empty() {
        return Err(StrategyError::EmptyHand(me));
    }
    if hand.guards > 0 {
        return Ok(strategy_s_step(state, me));
    }
    let pile = first_empty(state)
        .or_else(|| shortest_topped(state, me.opponent()))
        .or_else(|| shortest_topped(state, me))
        .expect("a non-empty board has a topped pile");
    Ok(Action::Place {
        pile,
        color: me.opponent(),
    })
}

/// Strategy S's decision for whichever player acts in `state`, falling back to
/// [`fallback_policy`] when the active player has no guard.
pub fn strategy_s_action(state: &GameState) -> Result<(Color, Action), StrategyError> {
    let actor = rules::acting_player(state).ok_or_else(|| {
        RuleViolation::GameOver(rules::is_terminal(state).expect("terminal state has a winner"))
    })?;
    let action = match state.phase {
        Phase::AwaitCaptureDiscard { pile, color } => {
            Action::CaptureDiscard(capture_discard_choice(&state.board.piles()[pile], color))
        }
        _ if actor != state.active => Action::RescueDecision { donate: false },
        _ => fallback_policy(state)?,
    };
    Ok((actor, action))
}

/// The full round strategy S plays from a round boundary.
pub fn strategy_s_round(state: &GameState) -> Result<Vec<Action>, StrategyError> {
    let me = state.active;
    if !state.phase.is_decision_point() || rules::acting_player(state) != Some(me) {
        return Err(StrategyError::NotAtDecisionPoint(me));
    }
    if state.hand(me).guards == 0 {
        return Err(StrategyError::NoGuard(me));
    }
    let mut actions = Vec::new();
    let mut current = state.clone();
    loop {
        let (actor, action) = strategy_s_action(&current)?;
        let rec = rules::apply_action(&current, actor, action)?;
        actions.push(action);
        current = rec.state;
        if current.winner.is_some() || current.active != me {
            break;
        }
    }
    Ok(actions)
}

/// Extra information a policy may use for reproducible choices.
#[derive(Clone, Copy, Debug, Default)]
pub struct DecisionContext {
    /// Transitions made so far in the game (or a state hash inside the solver).
    pub ply: u64,
    /// Decisions this policy has already made.
    pub own_decisions: usize,
}

/// A move-selection rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolicySpec {
    StrategyS,
    UniformRandom(u64),
    /// Optimal play found by exhaustive search.
    Adversarial,
    /// Replays the listed actions in order; once the script is exhausted or
    /// its next action is illegal, plays strategy S.
    Scripted(Vec<Action>),
}

impl PolicySpec {
    pub fn decide(
        &self,
        state: &GameState,
        ctx: DecisionContext,
    ) -> Result<(Color, Action), StrategyError> {
        match self {
            PolicySpec::StrategyS => strategy_s_action(state),
            PolicySpec::UniformRandom(seed) => {
                let legal = rules::legal_actions(state)?;
                let mut rng = ChaCha8Rng::seed_from_u64(mix(*seed, ctx.ply));
                Ok(*legal
                    .choose(&mut rng)
                    .expect("non-terminal state has actions"))
            }
            PolicySpec::Adversarial => {
                let mut solver = Solver::new();
                solver
                    .best_action(state)
                    .map_err(|e| StrategyError::Solver(e.to_string()))
            }
            PolicySpec::Scripted(script) => {
                if let Some(&action) = script.get(ctx.own_decisions) {
                    let legal = rules::legal_actions(state)?;
                    if let Some(&pair) = legal.iter().find(|(_, a)| *a == action) {
                        return Ok(pair);
                    }
                }
                strategy_s_action(state)
            }
        }
    }

    /// Parses `s`, `random:<seed>`, `adversarial` or `scripted:<file>`; script
    /// files hold one JSON action per line.
    pub fn parse(spec: &str) -> Result<PolicySpec, StrategyError> {
        let spec = spec.trim();
        match spec {
            "s" | "S" | "strategy-s" => return Ok(PolicySpec::StrategyS),
            "adversarial" => return Ok(PolicySpec::Adversarial),
            _ => {}
        }
        if let Some(seed) = spec.strip_prefix("random:") {
            return seed
                .parse()
                .map(PolicySpec::UniformRandom)
                .map_err(|_| StrategyError::BadSpec(spec.to_string()));
        }
        if spec == "random" {
            return Ok(PolicySpec::UniformRandom(0));
        }
        if let Some(path) = spec.strip_prefix("scripted:") {
            return read_script(Path::new(path)).map(PolicySpec::Scripted);
        }
        Err(StrategyError::BadSpec(spec.to_string()))
    }
}

impl FromStr for PolicySpec {
    type Err = StrategyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicySpec::parse(s)
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::StrategyS => f.write_str("s"),
            PolicySpec::UniformRandom(seed) => write!(f, "random:{seed}"),
            PolicySpec::Adversarial => f.write_str("adversarial"),
            PolicySpec::Scripted(a) => write!(f, "scripted({} actions)", a.len()),
        }
    }
}

fn read_script(path: &Path) -> Result<Vec<Action>, StrategyError> {
    let err = |message: String| StrategyError::Script {
        path: path.display().to_string(),
        message,
    };
    let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, line)| {
            serde_json::from_str::<crate::wire::ActionJson>(line)
                .map_err(|e| err(format!("line {}: {e}", n + 1)))
                .and_then(|a| {
                    a.to_action()
                        .map_err(|e| err(format!("line {}: {e}", n + 1)))
                })
        })
        .collect()
}

fn mix(seed: u64, ply: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ ply.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
