//! Sweeps that compare the closed-form characterization and strategy S with
//! the exhaustive solver, plus rule-level property suites over seeded playouts.
//!
//! Disagreements are collected, never asserted: a failed sweep reports every
//! offending canonical key.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::classifier::{classify, mu, nu, summarize_board, BoardSummary, BoardType};
use crate::model::{total_potential, Board, Color, GameState, Hand, Phase, Pile};
use crate::playout::{playout, PlayoutError};
use crate::rules::{self, Action};
use crate::solver::{
    canonicalize, enumerate_states, shared_table, Bounds, LocalMemo, MemoTable, SharedMemo,
    SharedTable, SolveError, Solver,
};
use crate::strategy::PolicySpec;

/// Seed used by the playout suites unless another one is requested.
pub const DEFAULT_SEED: u64 = 0x5150_6C73;
pub const DEFAULT_PLAYOUTS: usize = 10_000;
pub const DEFAULT_TRACES: usize = 1_000;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("invalid bounds: {0}")]
    BadBounds(String),
    #[error("unknown theorem id {0:?}")]
    UnknownTheorem(String),
    #[error("solver gave up after {completed} of {total} states: {source}")]
    Solve {
        completed: u64,
        total: u64,
        source: SolveError,
    },
    #[error("playout failed: {0}")]
    Playout(#[from] PlayoutError),
    #[error("no start state within the bounds satisfies the hypotheses of {0}")]
    NoStartStates(TheoremId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TheoremId {
    T3_5,
    T3_10,
    T4_7,
    T4_12,
    Final,
    T2_1,
    T2_2,
    P2_3,
    P2_4,
    P3_7,
    P4_11,
}

impl TheoremId {
    pub const ALL: [TheoremId; 11] = [
        TheoremId::T3_5,
        TheoremId::T3_10,
        TheoremId::T4_7,
        TheoremId::T4_12,
        TheoremId::Final,
        TheoremId::T2_1,
        TheoremId::T2_2,
        TheoremId::P2_3,
        TheoremId::P2_4,
        TheoremId::P3_7,
        TheoremId::P4_11,
    ];

    /// Board class a characterization theorem is restricted to.
    pub fn board_class(self) -> Option<BoardType> {
        match self {
            TheoremId::T3_5 => Some(BoardType::TypeI),
            TheoremId::T3_10 => Some(BoardType::GeneralizedTypeI),
            TheoremId::T4_7 => Some(BoardType::TypeII),
            TheoremId::T4_12 => Some(BoardType::GeneralizedTypeII),
            TheoremId::Final => Some(BoardType::General),
            _ => None,
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TheoremId::T3_5 => "T3.5",
            TheoremId::T3_10 => "T3.10",
            TheoremId::T4_7 => "T4.7",
            TheoremId::T4_12 => "T4.12",
            TheoremId::Final => "Final",
            TheoremId::T2_1 => "T2.1",
            TheoremId::T2_2 => "T2.2",
            TheoremId::P2_3 => "P2.3",
            TheoremId::P2_4 => "P2.4",
            TheoremId::P3_7 => "P3.7",
            TheoremId::P4_11 => "P4.11",
        })
    }
}

impl Serialize for TheoremId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for TheoremId {
    type Err = VerifyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TheoremId::ALL
            .into_iter()
            .find(|id| id.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| VerifyError::UnknownTheorem(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub workers: usize,
    /// Also pin the predicted winner to strategy S and re-solve.
    pub check_strategy: bool,
    /// Keep one record per checked state in the report.
    pub keep_records: bool,
    pub seed: u64,
    pub playouts: usize,
    pub traces: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            workers: 1,
            check_strategy: true,
            keep_records: false,
            seed: DEFAULT_SEED,
            playouts: DEFAULT_PLAYOUTS,
            traces: DEFAULT_TRACES,
        }
    }
}

/// One line of the machine-readable sweep stream.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepRecord {
    pub key: String,
    pub predicate: Color,
    pub solver: Color,
    pub agree: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Disagreement {
    pub key: String,
    pub expected: String,
    pub observed: String,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub checked: u64,
    pub agreements: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub check: TheoremId,
    pub bounds: (usize, usize, u32),
    pub states_enumerated: u64,
    pub states_checked: u64,
    pub agreements: u64,
    pub disagreements: Vec<Disagreement>,
    pub per_type: BTreeMap<BoardType, Tally>,
    /// Strategy S pinned to the predicted winner.
    pub strategy: Option<Tally>,
    pub strategy_failures: Vec<Disagreement>,
    /// Named sub-checks of the property suites with their violation counts.
    pub properties: BTreeMap<String, Tally>,
    pub seed: Option<u64>,
    #[serde(rename = "wall_time_secs", serialize_with = "as_secs")]
    pub wall_time: Duration,
    #[serde(skip)]
    pub records: Vec<SweepRecord>,
}

fn as_secs<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

impl SweepReport {
    fn new(check: TheoremId, bounds: Bounds) -> Self {
        SweepReport {
            check,
            bounds: (bounds.piles, bounds.max_pile_len, bounds.max_hand),
            states_enumerated: 0,
            states_checked: 0,
            agreements: 0,
            disagreements: Vec::new(),
            per_type: BTreeMap::new(),
            strategy: None,
            strategy_failures: Vec::new(),
            properties: BTreeMap::new(),
            seed: None,
            wall_time: Duration::ZERO,
            records: Vec::new(),
        }
    }

    pub fn is_clean(&self) -> bool {
        self.disagreements.is_empty()
            && self.strategy_failures.is_empty()
            && self.agreements + self.disagreements.len() as u64 == self.states_checked
    }

    fn property(&mut self, name: &str, ok: bool, detail: impl FnOnce() -> Disagreement) {
        let t = self.properties.entry(name.to_string()).or_default();
        t.checked += 1;
        self.states_checked += 1;
        if ok {
            t.agreements += 1;
            self.agreements += 1;
        } else if self.disagreements.len() < 1000 {
            self.disagreements.push(detail());
        } else {
            // Keep the count exact even when the list is capped.
            self.disagreements.push(Disagreement {
                key: "(further violations elided)".into(),
                expected: name.into(),
                observed: String::new(),
            });
        }
    }

    /// Line-delimited JSON records followed by a summary line.
    pub fn to_records(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        let mut summary = serde_json::to_value(self).expect("report serializes");
        summary["clean"] = serde_json::Value::Bool(self.is_clean());
        out.push_str(&summary.to_string());
        out.push('\n');
        out
    }
}

impl fmt::Display for SweepReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (k, len, hand) = self.bounds;
        writeln!(
            f,
            "check {}  bounds: piles={k} max-pile-len={len} max-hand={hand}",
            self.check
        )?;
        writeln!(
            f,
            "  states enumerated {}  checked {}  agreements {}  disagreements {}",
            self.states_enumerated,
            self.states_checked,
            self.agreements,
            self.disagreements.len()
        )?;
        for (ty, t) in &self.per_type {
            writeln!(
                f,
                "  {:<20} {:>8} checked {:>8} agree",
                ty.to_string(),
                t.checked,
                t.agreements
            )?;
        }
        if let Some(s) = &self.strategy {
            writeln!(
                f,
                "  strategy S pinned to predicted winner: {} checked, {} failures",
                s.checked,
                self.strategy_failures.len()
            )?;
        }
        for (name, t) in &self.properties {
            writeln!(
                f,
                "  {:<32} {:>8} checked {:>8} hold",
                name, t.checked, t.agreements
            )?;
        }
        if let Some(seed) = self.seed {
            writeln!(f, "  seed {seed}")?;
        }
        for d in self
            .disagreements
            .iter()
            .chain(&self.strategy_failures)
            .take(20)
        {
            writeln!(
                f,
                "  MISMATCH {}: expected {}, observed {}",
                d.key, d.expected, d.observed
            )?;
        }
        writeln!(f, "  wall time {:.2?}", self.wall_time)?;
        write!(
            f,
            "  result: {}",
            if self.is_clean() { "PASS" } else { "FAIL" }
        )
    }
}

fn validate(bounds: Bounds) -> Result<(), VerifyError> {
    if bounds.piles == 0 {
        return Err(VerifyError::BadBounds(
            "at least one pile is required".into(),
        ));
    }
    if bounds.piles > 8 {
        return Err(VerifyError::BadBounds(
            "at most 8 piles are supported".into(),
        ));
    }
    Ok(())
}

/// Blue-frame view of a round-boundary state: the mirrored state when Red is active.
fn blue_frame(state: &GameState) -> GameState {
    if state.active == Color::Blue {
        state.clone()
    } else {
        state.color_swapped()
    }
}

/// The theorem-specific statement of who wins, for a Blue-active board in
/// the theorem's class. Each is written out as stated for its class, not
/// derived from the general predicate.
fn theorem_statement(id: TheoremId, s: &BoardSummary, m_b: u32, n_r: u32) -> bool {
    let m_b = m_b as usize;
    let n_r = n_r as usize;
    let beta_b: usize = s.long_b.iter().map(|&n| n.div_ceil(2)).sum();
    let rho_r: Vec<usize> = s.long_r.iter().map(|&n| n.div_ceil(2)).collect();
    let rho_sum: usize = rho_r.iter().sum();
    let rho_max = rho_r.iter().copied().max().unwrap_or(0);
    match id {
        TheoremId::T3_5 => m_b > n_r,
        TheoremId::T3_10 => m_b > 0 && (n_r == 0 || m_b > n_r + rho_sum - rho_max),
        TheoremId::T4_7 => m_b > 0 && m_b + beta_b > n_r,
        TheoremId::T4_12 => m_b > 0 && m_b + beta_b > n_r,
        TheoremId::Final => m_b > 0 && (n_r == 0 || m_b + beta_b > n_r + rho_sum - rho_max),
        _ => unreachable!("not a characterization theorem"),
    }
}

struct Outcome {
    index: usize,
    key: String,
    board_type: BoardType,
    predicted: Color,
    solved: Color,
    pinned: Option<Color>,
}

fn check_state<A: MemoTable, B: MemoTable, C: MemoTable>(
    id: TheoremId,
    index: usize,
    state: &GameState,
    free: &mut Solver<A>,
    pinned_blue: &mut Solver<B>,
    pinned_red: &mut Solver<C>,
    check_strategy: bool,
) -> Result<Option<Outcome>, SolveError> {
    let frame = blue_frame(state);
    let summary = summarize_board(&frame.board).expect("enumerated piles alternate");
    let board_type = classify(&summary);
    let class = id.board_class().expect("characterization theorem");
    if !board_type.within(class) {
        return Ok(None);
    }
    let active_wins = theorem_statement(id, &summary, frame.blue.guards, frame.red.guards);
    let predicted = if active_wins {
        state.active
    } else {
        state.active.opponent()
    };
    let solved = free.winner(state)?;
    let pinned = if check_strategy {
        Some(match predicted {
            Color::Blue => pinned_blue.winner(state)?,
            Color::Red => pinned_red.winner(state)?,
        })
    } else {
        None
    };
    Ok(Some(Outcome {
        index,
        key: canonicalize(state).to_string(),
        board_type,
        predicted,
        solved,
        pinned,
    }))
}

/// Oracle equivalence (and optionally strategy optimality) for one of the
/// characterization theorems, over every enumerated state in its class.
fn characterization_sweep(
    id: TheoremId,
    bounds: Bounds,
    opts: &VerifyOptions,
) -> Result<SweepReport, VerifyError> {
    validate(bounds)?;
    let started = Instant::now();
    let states: Vec<GameState> = enumerate_states(bounds).collect();
    let total = states.len() as u64;
    let outcomes: Vec<Result<Option<Outcome>, (usize, SolveError)>> = if opts.workers <= 1 {
        let mut free = Solver::new();
        let mut pb = Solver::pinned(LocalMemo::default(), Color::Blue, PolicySpec::StrategyS);
        let mut pr = Solver::pinned(LocalMemo::default(), Color::Red, PolicySpec::StrategyS);
        let mut out = Vec::with_capacity(states.len());
        for (i, s) in states.iter().enumerate() {
            let r = check_state(id, i, s, &mut free, &mut pb, &mut pr, opts.check_strategy);
            let failed = r.is_err();
            out.push(r.map_err(|e| (i, e)));
            if failed {
                break;
            }
        }
        out
    } else {
        let free: SharedTable = shared_table();
        let blue: SharedTable = shared_table();
        let red: SharedTable = shared_table();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .map_err(|e| {
                VerifyError::BadBounds(format!("cannot start {} workers: {e}", opts.workers))
            })?;
        pool.install(|| {
            states
                .par_iter()
                .enumerate()
                .map(|(i, s)| {
                    let mut f = Solver::with_memo(SharedMemo(&free));
                    let mut pb =
                        Solver::pinned(SharedMemo(&blue), Color::Blue, PolicySpec::StrategyS);
                    let mut pr =
                        Solver::pinned(SharedMemo(&red), Color::Red, PolicySpec::StrategyS);
                    check_state(id, i, s, &mut f, &mut pb, &mut pr, opts.check_strategy)
                        .map_err(|e| (i, e))
                })
                .collect()
        })
    };

    let mut report = SweepReport::new(id, bounds);
    report.states_enumerated = total;
    if opts.check_strategy {
        report.strategy = Some(Tally::default());
    }
    for r in outcomes {
        let o = match r {
            Ok(Some(o)) => o,
            Ok(None) => continue,
            Err((completed, source)) => {
                return Err(VerifyError::Solve {
                    completed: completed as u64,
                    total,
                    source,
                })
            }
        };
        debug_assert!(o.index < states.len());
        report.states_checked += 1;
        let agree = o.predicted == o.solved;
        let tally = report.per_type.entry(o.board_type).or_default();
        tally.checked += 1;
        if agree {
            tally.agreements += 1;
            report.agreements += 1;
        } else {
            report.disagreements.push(Disagreement {
                key: o.key.clone(),
                expected: format!("{} wins (predicate)", o.predicted),
                observed: format!("{} wins (solver)", o.solved),
            });
        }
        if let (Some(pinned), Some(st)) = (o.pinned, report.strategy.as_mut()) {
            st.checked += 1;
            if pinned == o.predicted {
                st.agreements += 1;
            } else {
                report.strategy_failures.push(Disagreement {
                    key: o.key.clone(),
                    expected: format!("{} wins playing S", o.predicted),
                    observed: format!("{pinned} wins"),
                });
            }
        }
        if opts.keep_records {
            report.records.push(SweepRecord {
                key: o.key,
                predicate: o.predicted,
                solver: o.solved,
                agree,
            });
        }
    }
    report.wall_time = started.elapsed();
    Ok(report)
}

/// Oracle equivalence for the general characterization plus strategy-S
/// optimality, over every round-boundary state within `bounds`.
pub fn verify_characterization(
    bounds: Bounds,
    opts: &VerifyOptions,
) -> Result<SweepReport, VerifyError> {
    characterization_sweep(TheoremId::Final, bounds, opts)
}

pub fn verify_theorem(
    id: TheoremId,
    bounds: Bounds,
    opts: &VerifyOptions,
) -> Result<SweepReport, VerifyError> {
    validate(bounds)?;
    match id {
        TheoremId::T3_5 | TheoremId::T3_10 | TheoremId::T4_7 | TheoremId::T4_12 => {
            characterization_sweep(
                id,
                bounds,
                &VerifyOptions {
                    check_strategy: false,
                    ..*opts
                },
            )
        }
        TheoremId::Final => characterization_sweep(id, bounds, opts),
        TheoremId::T2_1 | TheoremId::T2_2 => Ok(next_player_table(id, bounds)),
        TheoremId::P2_3 | TheoremId::P2_4 => invariant_suite(id, bounds, opts),
        TheoremId::P3_7 | TheoremId::P4_11 => measure_traces(id, bounds, opts),
    }
}

/// How a placement relates the placed chip, the mover and the pile top.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PlacementCase {
    OpponentChipOnEmpty,
    OpponentChipOnOwnPile,
    OwnChipOnOwnPile,
    OwnChipOnEmpty,
    OwnChipOnOpponentPile,
    OpponentChipOnOpponentPile,
}

impl PlacementCase {
    pub fn of(mover: Color, placed: Color, top: Option<Color>) -> PlacementCase {
        let own = placed == mover;
        match (own, top) {
            (false, None) => PlacementCase::OpponentChipOnEmpty,
            (false, Some(t)) if t == mover => PlacementCase::OpponentChipOnOwnPile,
            (true, Some(t)) if t == mover => PlacementCase::OwnChipOnOwnPile,
            (true, None) => PlacementCase::OwnChipOnEmpty,
            (true, Some(_)) => PlacementCase::OwnChipOnOpponentPile,
            (false, Some(_)) => PlacementCase::OpponentChipOnOpponentPile,
        }
    }

    /// The mover keeps the move in the first three cases and loses it in the other three.
    pub fn mover_keeps_turn(self) -> bool {
        matches!(
            self,
            PlacementCase::OpponentChipOnEmpty
                | PlacementCase::OpponentChipOnOwnPile
                | PlacementCase::OwnChipOnOwnPile
        )
    }

    fn theorem(self) -> TheoremId {
        if self.mover_keeps_turn() {
            TheoremId::T2_1
        } else {
            TheoremId::T2_2
        }
    }
}

/// Representative piles up to `max_len`: empty plus alternating piles of
/// both tops.
fn representative_piles(max_len: usize) -> Vec<Pile> {
    let mut v = vec![Pile::empty()];
    for len in 1..=max_len.max(3) {
        v.push(Pile::alternating(Color::Blue, len));
        v.push(Pile::alternating(Color::Red, len));
    }
    v
}

/// Plays every placement kind on every representative pile through the
/// rules engine (resolving captures with each discard choice) and compares
/// the next active player with the six-row table.
pub fn next_player_table(id: TheoremId, bounds: Bounds) -> SweepReport {
    let started = Instant::now();
    let mut report = SweepReport::new(id, bounds);
    let only = match id {
        TheoremId::T2_1 | TheoremId::T2_2 => Some(id),
        _ => None,
    };
    for mover in Color::ALL {
        for placed in Color::ALL {
            for pile in representative_piles(bounds.max_pile_len) {
                let case = PlacementCase::of(mover, placed, pile.top());
                if only.is_some_and(|t| t != case.theorem()) {
                    continue;
                }
                report.states_enumerated += 1;
                let board = Board::new(vec![pile.clone(), Pile::empty()]).expect("two piles");
                let hand = Hand::new(2, 2);
                let state = GameState::new(board, hand, hand, mover);
                let placed_rec = rules::apply_action(
                    &state,
                    mover,
                    Action::Place {
                        pile: 0,
                        color: placed,
                    },
                )
                .expect("placement is legal");
                let mut ends = Vec::new();
                if placed_rec.capture {
                    for (actor, a) in
                        rules::legal_actions(&placed_rec.state).expect("capture pending")
                    {
                        ends.push(
                            rules::apply_action(&placed_rec.state, actor, a)
                                .expect("legal")
                                .state,
                        );
                    }
                } else {
                    ends.push(placed_rec.state.clone());
                }
                let capture_expected = pile.top() == Some(placed);
                let expected = if case.mover_keeps_turn() {
                    mover
                } else {
                    mover.opponent()
                };
                for end in ends {
                    let ok = end.active == expected && placed_rec.capture == capture_expected;
                    let label = format!("{case:?}");
                    report.property(&label, ok, || Disagreement {
                        key: format!(
                            "{} places {} on {}",
                            mover,
                            placed.letter(),
                            crate::notation::format_pile(&pile)
                        ),
                        expected: format!("{expected} active"),
                        observed: format!("{} active", end.active),
                    });
                }
            }
        }
    }
    report.wall_time = started.elapsed();
    report
}

fn sample_starts(bounds: Bounds, rng: &mut ChaCha8Rng, n: usize) -> Vec<GameState> {
    let mut all: Vec<GameState> = enumerate_states(bounds)
        .filter(|s| rules::is_terminal(s).is_none())
        .collect();
    all.shuffle(rng);
    all.into_iter().cycle().take(n).collect()
}

/// Rule invariants over seeded random playouts: pile alternation at
/// decision points, guard non-decrease across self-captures, strict decrease
/// of the termination potential, chip conservation, guards discarded only
/// by their owner's capture, and the capture trigger.
fn invariant_suite(
    id: TheoremId,
    bounds: Bounds,
    opts: &VerifyOptions,
) -> Result<SweepReport, VerifyError> {
    let started = Instant::now();
    let mut report = SweepReport::new(id, bounds);
    report.seed = Some(opts.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let starts = sample_starts(bounds, &mut rng, opts.playouts);
    report.states_enumerated = starts.len() as u64;
    for (i, start) in starts.iter().enumerate() {
        // Mix random and strategy S players so both drive the suite.
        let (blue, red) = match i % 4 {
            0 => (
                PolicySpec::StrategyS,
                PolicySpec::UniformRandom(opts.seed ^ i as u64),
            ),
            1 => (
                PolicySpec::UniformRandom(opts.seed ^ i as u64),
                PolicySpec::StrategyS,
            ),
            _ => (
                PolicySpec::UniformRandom(opts.seed ^ (2 * i) as u64),
                PolicySpec::UniformRandom(opts.seed ^ (2 * i + 1) as u64),
            ),
        };
        let game = playout(start, &blue, &red, opts.seed.wrapping_add(i as u64))?;
        let key = canonicalize(start).to_string();
        let mut prev = rules::start_round(start);
        // Guard count of the mover before a placement of their own color on their own pile.
        let mut pending_self_capture: Option<(Color, u32)> = None;
        for t in &game.transitions {
            let next = &t.state;
            match id {
                TheoremId::P2_3 => {
                    if next.phase.is_decision_point() || next.phase == Phase::AwaitRescueDonation {
                        report.property(
                            "round-boundary piles alternate",
                            next.board.is_alternating(),
                            || Disagreement {
                                key: key.clone(),
                                expected: "alternating piles".into(),
                                observed: crate::notation::format_board(&next.board),
                            },
                        );
                    }
                    if t.capture {
                        let ok =
                            next.board
                                .piles()
                                .iter()
                                .enumerate()
                                .all(|(j, p)| match next.phase {
                                    Phase::AwaitCaptureDiscard { pile, .. } if pile == j => true,
                                    _ => p.is_alternating(),
                                });
                        report.property("only the played pile breaks alternation", ok, || {
                            Disagreement {
                                key: key.clone(),
                                expected: "other piles alternating".into(),
                                observed: crate::notation::format_board(&next.board),
                            }
                        });
                    }
                    if let Action::CaptureDiscard(_) = t.action {
                        report.property(
                            "alternation restored after capture",
                            next.board.is_alternating(),
                            || Disagreement {
                                key: key.clone(),
                                expected: "alternating piles".into(),
                                observed: crate::notation::format_board(&next.board),
                            },
                        );
                    }
                }
                TheoremId::P2_4 => {
                    if let Action::Place { pile, color } = t.action {
                        let top_before = prev.board.piles()[pile].top();
                        if color == t.actor && top_before == Some(color) {
                            pending_self_capture = Some((t.actor, prev.hand(t.actor).guards));
                        }
                    }
                    if let (Action::CaptureDiscard(_), Some((who, before))) =
                        (t.action, pending_self_capture)
                    {
                        let after = next.hand(who).guards;
                        report.property(
                            "guards do not decrease over a self-capture",
                            after >= before,
                            || Disagreement {
                                key: key.clone(),
                                expected: format!("{who} guards >= {before}"),
                                observed: format!("{after}"),
                            },
                        );
                        pending_self_capture = None;
                    }
                }
                _ => unreachable!(),
            }
            let (p0, p1) = (total_potential(&prev), total_potential(next));
            report.property(
                "termination potential decreases",
                p1 < p0 || next.winner.is_some(),
                || Disagreement {
                    key: key.clone(),
                    expected: format!("potential below {p0:?}"),
                    observed: format!("{p1:?} after {}", t.action),
                },
            );
            let discarded = t.discarded.is_some() as usize;
            report.property(
                "chips conserved modulo discards",
                prev.total_chips() == next.total_chips() + discarded,
                || Disagreement {
                    key: key.clone(),
                    expected: format!("{} chips", prev.total_chips()),
                    observed: format!("{} + {discarded} discarded", next.total_chips()),
                },
            );
            if t.discarded == Some(t.actor) {
                report.property(
                    "guards discarded only by capture",
                    matches!(t.action, Action::CaptureDiscard(_)),
                    || Disagreement {
                        key: key.clone(),
                        expected: "capture discard".into(),
                        observed: t.action.to_string(),
                    },
                );
            }
            if let Action::Place { pile, .. } = t.action {
                let trigger = next.board.piles()[pile].top_pair_matches();
                report.property("capture iff equal top pair", trigger == t.capture, || {
                    Disagreement {
                        key: key.clone(),
                        expected: format!("capture={trigger}"),
                        observed: format!("capture={}", t.capture),
                    }
                });
            }
            prev = next.clone();
        }
    }
    report.wall_time = started.elapsed();
    Ok(report)
}

/// Hypotheses for the nu induction: Blue active, no long blue-topped pile,
/// both players hold their own color, and Blue's margin inequality holds.
fn nu_hypotheses(s: &GameState) -> Option<(BoardSummary, i64)> {
    if s.active != Color::Blue || s.winner.is_some() {
        return None;
    }
    let summary = summarize_board(&s.board).ok()?;
    let (m_b, _, n_b, n_r) = s.color_counts();
    let ok = summary.h() == 0
        && m_b > 0
        && n_r > 0
        && m_b as usize
            > n_r as usize + summary.long_r_red_chips() - summary.max_long_r_red_chips();
    ok.then(|| {
        let v = nu(&summary.long_r, n_b, n_r);
        (summary, v)
    })
}

/// Hypotheses for the mu induction: Blue active, exactly one long red-topped
/// pile and at least one long blue-topped pile, and Red's margin holds.
fn mu_hypotheses(s: &GameState) -> Option<(BoardSummary, i64)> {
    if s.active != Color::Blue || s.winner.is_some() {
        return None;
    }
    let summary = summarize_board(&s.board).ok()?;
    let (m_b, m_r, _, n_r) = s.color_counts();
    let ok = summary.ell() == 1
        && summary.h() >= 1
        && m_b > 0
        && m_b as usize + summary.long_b_blue_chips() <= n_r as usize;
    ok.then(|| {
        let v = mu(&summary.long_b, m_b, m_r);
        (summary, v)
    })
}

/// States at which an induction measure is compared. For nu this is Blue's
/// position once strategy S has made its captures and discards, just before
/// the placement that ends Blue's round; for mu it is every Blue round start.
fn checkpoints(
    id: TheoremId,
    start: &GameState,
    transitions: &[rules::TransitionRecord],
) -> Vec<GameState> {
    let mut out = Vec::new();
    if id == TheoremId::P4_11 {
        out.push(start.clone());
        for t in transitions {
            if t.round_ended && t.state.active == Color::Blue && t.state.winner.is_none() {
                out.push(t.state.clone());
            }
        }
        return out;
    }
    let mut prev = rules::start_round(start);
    for t in transitions {
        if t.actor == Color::Blue && t.round_ended && matches!(t.action, Action::Place { .. }) {
            out.push(prev.clone());
        }
        prev = t.state.clone();
    }
    out
}

/// Traces from states meeting an induction's hypotheses: strategy S for the
/// winning side, seeded random play for the other. At consecutive Blue
/// round starts that both meet the hypotheses the measure must strictly
/// drop; once the hypotheses lapse the state must be one the induction hands
/// off (no long blue-topped pile and Red out of red chips for nu; a
/// non-type-II board or a guardless Blue for mu). The game must end with the
/// strategy S side winning.
fn measure_traces(
    id: TheoremId,
    bounds: Bounds,
    opts: &VerifyOptions,
) -> Result<SweepReport, VerifyError> {
    let started = Instant::now();
    let mut report = SweepReport::new(id, bounds);
    report.seed = Some(opts.seed);
    let hyp: fn(&GameState) -> Option<(BoardSummary, i64)> = if id == TheoremId::P3_7 {
        nu_hypotheses
    } else {
        mu_hypotheses
    };
    let starts: Vec<GameState> = enumerate_states(bounds)
        .filter(|s| hyp(s).is_some())
        .collect();
    if starts.is_empty() {
        return Err(VerifyError::NoStartStates(id));
    }
    report.states_enumerated = starts.len() as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut order: Vec<usize> = (0..starts.len()).collect();
    order.shuffle(&mut rng);
    let (s_side, measure_name) = if id == TheoremId::P3_7 {
        (Color::Blue, "nu")
    } else {
        (Color::Red, "mu")
    };
    for i in 0..opts.traces.max(starts.len().min(opts.traces)) {
        let start = &starts[order[i % order.len()]];
        let random = PolicySpec::UniformRandom(opts.seed ^ (i as u64).wrapping_mul(0x9E37_79B9));
        let (blue, red) = if s_side == Color::Blue {
            (PolicySpec::StrategyS, random)
        } else {
            (random, PolicySpec::StrategyS)
        };
        let game = playout(start, &blue, &red, opts.seed.wrapping_add(i as u64))?;
        let key = canonicalize(start).to_string();
        let round_starts = checkpoints(id, start, &game.transitions);
        if let Some(first) = round_starts.first() {
            report.property(
                "hypotheses hold at the first checkpoint",
                hyp(first).is_some(),
                || Disagreement {
                    key: key.clone(),
                    expected: "hypotheses".into(),
                    observed: canonicalize(first).to_string(),
                },
            );
        }
        for pair in round_starts.windows(2) {
            let Some((_, before)) = hyp(&pair[0]) else {
                break;
            };
            match hyp(&pair[1]) {
                Some((_, after)) => {
                    report.property(
                        &format!("{measure_name} strictly decreases"),
                        after < before,
                        || Disagreement {
                            key: key.clone(),
                            expected: format!("{measure_name} below {before}"),
                            observed: format!("{after}"),
                        },
                    );
                }
                None => {
                    let next = &pair[1];
                    let handed_off = match summarize_board(&next.board) {
                        Err(_) => false,
                        Ok(s) if id == TheoremId::P3_7 => {
                            s.h() == 0 && next.blue.guards > 0 && next.red.guards == 0
                        }
                        Ok(s) => !(s.ell() == 1 && s.h() >= 1) || next.blue.guards == 0,
                    };
                    report.property(
                        "hypotheses lapse only into a handed-off case",
                        handed_off,
                        || Disagreement {
                            key: key.clone(),
                            expected: "handed-off state".into(),
                            observed: canonicalize(next).to_string(),
                        },
                    );
                    break;
                }
            }
        }
        report.property("strategy S side wins", game.winner == s_side, || {
            Disagreement {
                key: key.clone(),
                expected: format!("{s_side} wins"),
                observed: format!("{} wins", game.winner),
            }
        });
    }
    report.wall_time = started.elapsed();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::winning_predicate;

    fn quick() -> VerifyOptions {
        VerifyOptions {
            playouts: 200,
            traces: 100,
            ..VerifyOptions::default()
        }
    }

    #[test]
    fn theorem_ids_parse() {
        for id in TheoremId::ALL {
            assert_eq!(id.to_string().parse::<TheoremId>().unwrap(), id);
        }
        assert!(matches!(
            "T9.9".parse::<TheoremId>(),
            Err(VerifyError::UnknownTheorem(_))
        ));
    }

    #[test]
    fn zero_piles_rejected() {
        let r = verify_characterization(Bounds::new(0, 1, 1), &VerifyOptions::default());
        assert!(matches!(r, Err(VerifyError::BadBounds(_))));
    }

    #[test]
    fn base_case_sweep_is_clean() {
        let r = verify_characterization(Bounds::new(1, 0, 1), &VerifyOptions::default()).unwrap();
        assert_eq!(r.states_enumerated, 18);
        assert_eq!(r.states_checked, 18);
        assert!(r.is_clean(), "{r}");
    }

    #[test]
    fn small_sweep_is_clean() {
        let r = verify_characterization(Bounds::new(2, 2, 2), &VerifyOptions::default()).unwrap();
        assert_eq!(
            r.states_enumerated as u128,
            Bounds::new(2, 2, 2).state_count()
        );
        assert!(r.is_clean(), "{r}");
    }

    #[test]
    fn parallel_sweep_matches_sequential() {
        let b = Bounds::new(2, 2, 2);
        let opts = VerifyOptions {
            keep_records: true,
            ..VerifyOptions::default()
        };
        let seq = verify_characterization(b, &opts).unwrap();
        let par = verify_characterization(b, &VerifyOptions { workers: 3, ..opts }).unwrap();
        assert_eq!(seq.records, par.records);
    }

    #[test]
    fn reductions_agree_with_general_predicate() {
        // Symbolic agreement of each class statement with the general predicate.
        let bounds = Bounds::new(3, 4, 3);
        for s in enumerate_states(bounds) {
            let summary = summarize_board(&s.board).unwrap();
            let ty = classify(&summary);
            for id in [
                TheoremId::T3_5,
                TheoremId::T3_10,
                TheoremId::T4_7,
                TheoremId::T4_12,
                TheoremId::Final,
            ] {
                if ty.within(id.board_class().unwrap()) {
                    assert_eq!(
                        theorem_statement(id, &summary, s.blue.guards, s.red.guards),
                        winning_predicate(&summary, s.blue.guards, s.red.guards),
                        "{id} on {summary:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn next_player_table_is_complete() {
        let r = next_player_table(TheoremId::T2_1, Bounds::new(1, 3, 0));
        assert!(r.is_clean(), "{r}");
        assert_eq!(r.properties.len(), 3);
        let r = next_player_table(TheoremId::T2_2, Bounds::new(1, 3, 0));
        assert!(r.is_clean(), "{r}");
        assert_eq!(r.properties.len(), 3);
    }

    #[test]
    fn placement_case_classification() {
        use Color::*;
        assert_eq!(
            PlacementCase::of(Blue, Red, None),
            PlacementCase::OpponentChipOnEmpty
        );
        assert_eq!(
            PlacementCase::of(Blue, Red, Some(Blue)),
            PlacementCase::OpponentChipOnOwnPile
        );
        assert_eq!(
            PlacementCase::of(Blue, Blue, Some(Blue)),
            PlacementCase::OwnChipOnOwnPile
        );
        assert_eq!(
            PlacementCase::of(Blue, Blue, None),
            PlacementCase::OwnChipOnEmpty
        );
        assert_eq!(
            PlacementCase::of(Blue, Blue, Some(Red)),
            PlacementCase::OwnChipOnOpponentPile
        );
        assert_eq!(
            PlacementCase::of(Blue, Red, Some(Red)),
            PlacementCase::OpponentChipOnOpponentPile
        );
    }

    #[test]
    fn invariant_suites_small() {
        for id in [TheoremId::P2_3, TheoremId::P2_4] {
            let r = verify_theorem(id, Bounds::new(3, 3, 3), &quick()).unwrap();
            assert!(r.is_clean(), "{r}");
            assert!(r.states_checked > 0);
        }
    }

    #[test]
    fn measure_traces_small() {
        for id in [TheoremId::P3_7, TheoremId::P4_11] {
            let r = verify_theorem(id, Bounds::new(3, 4, 3), &quick()).unwrap();
            assert!(r.is_clean(), "{r}");
        }
    }

    #[test]
    fn report_text_mentions_result() {
        let r = verify_characterization(Bounds::new(1, 1, 1), &VerifyOptions::default()).unwrap();
        let text = r.to_string();
        assert!(text.contains("result: PASS"));
        let recs = verify_characterization(
            Bounds::new(1, 1, 1),
            &VerifyOptions {
                keep_records: true,
                ..VerifyOptions::default()
            },
        )
        .unwrap()
        .to_records();
        assert_eq!(recs.lines().count() as u64, r.states_checked + 1);
    }
}
