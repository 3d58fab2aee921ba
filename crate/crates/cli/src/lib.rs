//! `sls`: evaluate, solve, verify and play two-color endgames from the
//! command line.
//!
//! Exit status: 0 ok, 2 input error, 3 verification failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sls_core::notation::{format_board, format_hand, parse_board, parse_color, parse_hand};
use sls_core::verifier::{
    verify_theorem, TheoremId, VerifyOptions, DEFAULT_PLAYOUTS, DEFAULT_SEED, DEFAULT_TRACES,
};
use sls_core::wire::{ActionJson, StateJson, TransitionJson};
use sls_core::{analyze, canonicalize, playout, Bounds, GameState, PolicySpec, Solver};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

const HAND_HELP: &str = "Hands are `guards,prisoners`: Blue's `--blue g,p` is (m_b, m_r) and \
Red's `--red g,p` is (n_r, n_b) in color-major terms. Boards list piles bottom to top, \
e.g. `_,r,b,rbr`.";

#[derive(Parser, Debug)]
#[command(name = "sls", version, about = "Two-player, two-color So Long Sucker endgames", after_help = HAND_HELP)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Board summary, board type, predicate verdict and both measures.
    Eval {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Exhaustive solve with a principal variation.
    Solve {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Compare the characterization and strategy S with the solver.
    Verify(VerifyArgs),
    /// Play two policies against each other and stream the transitions.
    Play {
        #[command(flatten)]
        state: StateArgs,
        /// Policy for Blue: s, random:<seed>, adversarial or scripted:<file>.
        #[arg(long, default_value = "s")]
        blue_policy: String,
        /// Policy for Red.
        #[arg(long, default_value = "s")]
        red_policy: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Start the HTTP service.
    Serve {
        #[arg(long, env = "SLS_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "SLS_STATE_DIR")]
        state_dir: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Records,
}

#[derive(Args, Debug)]
struct StateArgs {
    /// Piles separated by `,`, each bottom to top; `_` is an empty pile.
    #[arg(long)]
    board: String,
    /// Blue's hand as guards,prisoners.
    #[arg(long)]
    blue: String,
    /// Red's hand as guards,prisoners.
    #[arg(long)]
    red: String,
    /// Player to move: b or r.
    #[arg(long, default_value = "b")]
    active: String,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Final, T3.5, T3.10, T4.7, T4.12, T2.1, T2.2, P2.3, P2.4, P3.7, P4.11 or all.
    #[arg(long, default_value = "Final")]
    theorem: String,
    #[arg(long, default_value_t = 3)]
    piles: usize,
    #[arg(long, default_value_t = 4)]
    max_pile_len: usize,
    #[arg(long, default_value_t = 3)]
    max_hand: u32,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_PLAYOUTS)]
    playouts: usize,
    #[arg(long, default_value_t = DEFAULT_TRACES)]
    traces: usize,
    /// Skip re-solving with strategy S pinned to the predicted winner.
    #[arg(long)]
    no_strategy: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

struct Input(String);

impl StateArgs {
    fn parse(&self) -> Result<GameState, Input> {
        let board = parse_board(&self.board)
            .map_err(|e| Input(format!("--board {:?}: {e}", self.board)))?;
        let blue = parse_hand(&self.blue).map_err(|e| Input(format!("--blue: {e}")))?;
        let red = parse_hand(&self.red).map_err(|e| Input(format!("--red: {e}")))?;
        let active = parse_color(&self.active).map_err(|e| Input(format!("--active: {e}")))?;
        let state = GameState::new(board, blue, red, active);
        if !state.board.is_alternating() {
            return Err(Input(format!(
                "--board {:?}: piles must alternate colors at the start of a turn",
                self.board
            )));
        }
        Ok(state)
    }
}

/// Flags that reproduce `state`; parsing them gives back an equal state.
pub fn state_flags(state: &GameState) -> String {
    format!(
        "--board {} --blue {} --red {} --active {}",
        format_board(&state.board),
        format_hand(&state.blue),
        format_hand(&state.red),
        state.active.letter()
    )
}

fn json_line(out: &mut dyn Write, v: &impl serde::Serialize) -> std::io::Result<()> {
    writeln!(out, "{}", serde_json::to_string(v).expect("serializable"))
}

/// Runs one command line; output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(Failure::Input(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INPUT
        }
        Err(Failure::Other(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_FAILURE
        }
    }
}

enum Failure {
    Input(String),
    Other(String),
}

impl From<Input> for Failure {
    fn from(i: Input) -> Self {
        Failure::Input(i.0)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    match cmd {
        Command::Eval { state, format } => {
            let s = state.parse()?;
            let report = analyze(&s).map_err(|e| Failure::Input(e.to_string()))?;
            match format {
                Format::Records => json_line(
                    out,
                    &serde_json::json!({ "state": StateJson::from(&s), "analysis": report }),
                )?,
                Format::Text => {
                    let sm = &report.summary;
                    writeln!(out, "state: {}", state_flags(&s))?;
                    writeln!(
                        out,
                        "summary (active player's frame): k_e={} k_r={} k_b={} ell={} h={} long_r={:?} long_b={:?}",
                        sm.k_e, sm.k_r, sm.k_b, sm.ell(), sm.h(), sm.long_r, sm.long_b
                    )?;
                    writeln!(out, "board type: {}", report.board_type)?;
                    writeln!(
                        out,
                        "predicate: {} for the active player ({}); predicted winner {}",
                        report.active_wins, s.active, report.predicted_winner
                    )?;
                    writeln!(out, "nu: {}", report.nu)?;
                    writeln!(out, "mu: {}", report.mu)?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Solve { state, format } => {
            let s = state.parse()?;
            let mut solver = Solver::new();
            let result = solver
                .solve(&s)
                .map_err(|e| Failure::Input(e.to_string()))?;
            match format {
                Format::Records => json_line(
                    out,
                    &serde_json::json!({
                        "key": canonicalize(&s).to_string(),
                        "winner": result.winner,
                        "principal_variation": result.principal_variation.iter()
                            .map(|(actor, a)| serde_json::json!({"actor": actor, "action": ActionJson::from(*a)}))
                            .collect::<Vec<_>>(),
                        "nodes_expanded": result.nodes_expanded,
                        "memo_hits": result.memo_hits,
                    }),
                )?,
                Format::Text => {
                    writeln!(out, "state: {}", state_flags(&s))?;
                    writeln!(out, "winner: {}", result.winner)?;
                    writeln!(out, "principal variation:")?;
                    for (i, (actor, a)) in result.principal_variation.iter().enumerate() {
                        writeln!(out, "  {:>3}. {actor}: {a}", i + 1)?;
                    }
                    writeln!(
                        out,
                        "nodes expanded: {}  memo hits: {}",
                        result.nodes_expanded, result.memo_hits
                    )?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Verify(v) => verify(v, out),
        Command::Play {
            state,
            blue_policy,
            red_policy,
            seed,
            format,
        } => {
            let s = state.parse()?;
            let blue = PolicySpec::parse(&blue_policy)
                .map_err(|e| Failure::Input(format!("--blue-policy: {e}")))?;
            let red = PolicySpec::parse(&red_policy)
                .map_err(|e| Failure::Input(format!("--red-policy: {e}")))?;
            let game = playout(&s, &blue, &red, seed).map_err(|e| match e {
                sls_core::PlayoutError::AlreadyOver(_) => Failure::Input(e.to_string()),
                other => Failure::Other(other.to_string()),
            })?;
            if format == Format::Text {
                writeln!(out, "start: {}", state_flags(&s))?;
            }
            for (i, t) in game.transitions.iter().enumerate() {
                match format {
                    Format::Records => json_line(out, &TransitionJson::from(t))?,
                    Format::Text => {
                        let mut line = format!(
                            "{:>4}. {}: {}  -> {}  B={} R={}",
                            i + 1,
                            t.actor,
                            t.action,
                            format_board(&t.state.board),
                            format_hand(&t.state.blue),
                            format_hand(&t.state.red)
                        );
                        if t.capture {
                            line.push_str("  capture");
                        }
                        if let Some(c) = t.eliminated {
                            line.push_str(&format!("  {c} eliminated"));
                        } else if t.round_ended {
                            line.push_str(&format!("  next: {}", t.state.active));
                        }
                        writeln!(out, "{line}")?;
                    }
                }
            }
            match format {
                Format::Records => json_line(out, &serde_json::json!({ "winner": game.winner }))?,
                Format::Text => writeln!(out, "winner: {}", game.winner)?,
            }
            Ok(EXIT_OK)
        }
        Command::Serve { port, state_dir } => {
            let _ = tracing_subscriber::fmt()
                .with_env_filter(
                    tracing_subscriber::EnvFilter::try_from_default_env()
                        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
                )
                .with_writer(std::io::stderr)
                .try_init();
            let mut config = sls_service::Config::from_env().map_err(Failure::Input)?;
            config.port = port;
            config.state_dir = state_dir;
            writeln!(err, "listening on port {port}")?;
            sls_service::serve_blocking(config)?;
            Ok(EXIT_OK)
        }
    }
}

fn verify(v: VerifyArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let ids: Vec<TheoremId> = if v.theorem.eq_ignore_ascii_case("all") {
        TheoremId::ALL.to_vec()
    } else {
        vec![v
            .theorem
            .parse()
            .map_err(|e: sls_core::verifier::VerifyError| Failure::Input(e.to_string()))?]
    };
    let bounds = Bounds::new(v.piles, v.max_pile_len, v.max_hand);
    let opts = VerifyOptions {
        workers: v.workers.max(1),
        check_strategy: !v.no_strategy,
        keep_records: v.format == Format::Records,
        seed: v.seed,
        playouts: v.playouts,
        traces: v.traces,
    };
    let mut clean = true;
    for id in ids {
        let report = verify_theorem(id, bounds, &opts).map_err(|e| match e {
            sls_core::verifier::VerifyError::BadBounds(_)
            | sls_core::verifier::VerifyError::UnknownTheorem(_) => Failure::Input(e.to_string()),
            other => Failure::Other(other.to_string()),
        })?;
        clean &= report.is_clean();
        match v.format {
            Format::Records => write!(out, "{}", report.to_records())?,
            Format::Text => writeln!(out, "{report}")?,
        }
    }
    Ok(if clean { EXIT_OK } else { EXIT_VERIFY })
}
