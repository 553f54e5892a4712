//! Command-line front end.
//!
//! ```text
//! mts <app> [options] [input-file | -]
//! ```
//!
//! Without `--workers` the run is standalone: one budgeted search from the
//! root in this process, with unexplored nodes marked in the output. With
//! `--workers N` (or any of `-freq -hist -checkp -stop -restart`) a master
//! drives `N` workers on the chosen backend.

use std::fmt;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::str::FromStr;

use log::info;
use thiserror::Error;

use crate::app::spantree::SpanTrees;
use crate::app::topsort::TopSorts;
use crate::app::{AppError, AppKind, Application};
use crate::engine::Budget;
use crate::options::{check_tables, AppArgs, OptionError, OptionSpec, FRAMEWORK_OPTIONS};
use crate::scheduler::{run_master, Checkpoint, Params, RunContext, Start};
use crate::transport::deterministic::Deterministic;
use crate::transport::process::{serve, Processes};
use crate::transport::threads::Threads;
use crate::transport::wire::{read_frame, WireError};
use crate::transport::{Message, Transport, DEFAULT_INFLIGHT_CAP};
use crate::worker::{run_standalone, Worker};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_ABORT: i32 = 2;
pub const EXIT_STOPPED: i32 = 3;

/// Name of the hidden subcommand run by worker processes.
pub const WORKER_COMMAND: &str = "worker";

pub const USAGE: &str = "\
usage: mts <topsort|spantree> [options] [input-file | -]

framework options:
  -maxd N       depth limit for jobs when few are queued (default 2)
  -maxnodes N   node limit per job (default 5000)
  -scale N      node limit multiplier when many jobs are queued (default 40)
  -lmin N       queue size per worker below which depth is limited (default 1)
  -lmax N       queue size per worker above which budgets scale (default 3)
  -maxbuf N     output buffer size in bytes (default 1048576)
  -freq FILE    write each job's node count, one per line
  -hist FILE    write periodic scheduler samples
  -checkp FILE  write a checkpoint when the run stops early
  -stop FILE    stop (and checkpoint) once FILE exists
  -restart FILE resume from a checkpoint

application options:
  -countonly    print only the final count
  -prune 0|1    0: do not return leaves as jobs; 1: also follow single-child paths

execution:
  --workers N   run a master with N workers (default: standalone)
  --backend B   threads (default), process or deterministic
  --seed S      scheduling seed for the deterministic backend (default 0)
  -h, --help    show this message
";

#[derive(Debug, Error)]
pub enum UsageError {
    #[error("{0}")]
    Option(#[from] OptionError),
    #[error(transparent)]
    App(#[from] AppError),
    #[error("missing application name")]
    MissingApp,
    #[error("unexpected argument {0:?}")]
    Unexpected(String),
    #[error("{0}")]
    Other(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Threads,
    Process,
    Deterministic,
}

impl FromStr for Backend {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "threads" => Ok(Backend::Threads),
            "process" => Ok(Backend::Process),
            "deterministic" => Ok(Backend::Deterministic),
            _ => Err(()),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Threads => "threads",
            Backend::Process => "process",
            Backend::Deterministic => "deterministic",
        })
    }
}

/// Numeric framework options that appeared on the command line.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Given {
    pub maxd: bool,
    pub maxnodes: bool,
    pub scale: bool,
    pub lmin: bool,
    pub lmax: bool,
    pub maxbuf: bool,
}

#[derive(Debug, Clone)]
pub struct Config {
    pub app: AppKind,
    pub params: Params,
    pub given: Given,
    pub app_args: AppArgs,
    /// `None` reads standard input.
    pub input: Option<PathBuf>,
    pub workers: Option<usize>,
    pub backend: Backend,
    pub seed: u64,
}

impl Config {
    /// Whether a master/worker run is requested.
    pub fn parallel(&self) -> bool {
        let p = &self.params;
        self.workers.is_some()
            || p.freq_path.is_some()
            || p.hist_path.is_some()
            || p.checkp_path.is_some()
            || p.stop_path.is_some()
            || p.restart_path.is_some()
    }
}

#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    Run(Config),
    Worker,
    Help,
}

fn positive(option: &str, value: &str) -> Result<u64, OptionError> {
    match value.parse::<u64>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(OptionError::InvalidValue {
            option: option.to_string(),
            value: value.to_string(),
            reason: "expected a positive integer".into(),
        }),
    }
}

/// Parses the arguments after the program name.
pub fn parse_args<S: AsRef<str>>(argv: &[S]) -> Result<Command, UsageError> {
    let argv: Vec<&str> = argv.iter().map(AsRef::as_ref).collect();
    let Some(&first) = argv.first() else {
        return Err(UsageError::MissingApp);
    };
    match first {
        "-h" | "--help" => return Ok(Command::Help),
        WORKER_COMMAND => return Ok(Command::Worker),
        _ => {}
    }
    let app = AppKind::from_name(first)?;
    let app_table = app.options();
    check_tables(&[&FRAMEWORK_OPTIONS, app_table])?;

    let mut params = Params::default();
    let mut given = Given::default();
    let mut app_tokens: Vec<&str> = Vec::new();
    let mut input = None;
    let mut workers = None;
    let mut backend = Backend::Threads;
    let mut seed = 0;

    let mut it = argv[1..].iter().copied();
    while let Some(tok) = it.next() {
        let mut value = |name: &str| it.next().ok_or_else(|| OptionError::MissingValue(name.to_string()));
        match tok {
            "-h" | "--help" => return Ok(Command::Help),
            "--workers" => {
                let v = value(tok)?;
                workers = Some(positive(tok, v)? as usize);
            }
            "--backend" => {
                let v = value(tok)?;
                backend = v.parse().map_err(|_| OptionError::InvalidValue {
                    option: tok.into(),
                    value: v.into(),
                    reason: "expected threads, process or deterministic".into(),
                })?;
            }
            "--seed" => {
                let v = value(tok)?;
                seed = v.parse().map_err(|_| OptionError::InvalidValue {
                    option: tok.into(),
                    value: v.into(),
                    reason: "expected an unsigned integer".into(),
                })?;
            }
            "-maxd" => {
                params.max_depth = Some(positive(tok, value(tok)?)?);
                given.maxd = true;
            }
            "-maxnodes" => {
                params.max_nodes = positive(tok, value(tok)?)?;
                given.maxnodes = true;
            }
            "-scale" => {
                params.scale = positive(tok, value(tok)?)?;
                given.scale = true;
            }
            "-lmin" => {
                params.lmin = positive(tok, value(tok)?)?;
                given.lmin = true;
            }
            "-lmax" => {
                params.lmax = positive(tok, value(tok)?)?;
                given.lmax = true;
            }
            "-maxbuf" => {
                params.maxbuf = positive(tok, value(tok)?)? as usize;
                given.maxbuf = true;
            }
            "-freq" => params.freq_path = Some(value(tok)?.into()),
            "-hist" => params.hist_path = Some(value(tok)?.into()),
            "-checkp" => params.checkp_path = Some(value(tok)?.into()),
            "-stop" => params.stop_path = Some(value(tok)?.into()),
            "-restart" => params.restart_path = Some(value(tok)?.into()),
            _ => {
                if let Some(spec) = app_table.iter().find(|s| s.name == tok) {
                    app_tokens.push(tok);
                    if spec.arity == 1 {
                        app_tokens.push(value(tok)?);
                    }
                } else if tok.starts_with('-') && tok != "-" {
                    return Err(OptionError::Unknown(tok.to_string()).into());
                } else if input.is_some() {
                    return Err(UsageError::Unexpected(tok.to_string()));
                } else {
                    input = Some(tok);
                }
            }
        }
    }
    if let Err(e) = params.validate() {
        return Err(UsageError::Other(e.to_string()));
    }
    let app_args = AppArgs::parse(&app_tokens, app_table)?;
    Ok(Command::Run(Config {
        app,
        params,
        given,
        app_args,
        input: input.filter(|&p| p != "-").map(PathBuf::from),
        workers,
        backend,
        seed,
    }))
}

/// Result of one command-line invocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Report {
    pub code: i32,
    /// Nodes output so far, root included, when the run got that far.
    pub total_nodes: Option<u64>,
}

impl Report {
    fn code(code: i32) -> Self {
        Report {
            code,
            total_nodes: None,
        }
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with<S: AsRef<str>>(argv: &[S], stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    run_command(argv, stdin, out, err).code
}

/// Like [`main_with`], also reporting the node total.
pub fn run_command<S: AsRef<str>>(
    argv: &[S],
    stdin: &mut dyn Read,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Report {
    let cmd = match parse_args(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "mts: {e}\n\n{USAGE}");
            return Report::code(EXIT_USAGE);
        }
    };
    match cmd {
        Command::Help => {
            let _ = out.write_all(USAGE.as_bytes());
            Report::code(EXIT_OK)
        }
        Command::Worker => {
            let _ = writeln!(err, "mts: the worker command is started by the process backend");
            Report::code(EXIT_USAGE)
        }
        Command::Run(cfg) => match cfg.app {
            AppKind::Topsort => run_app::<TopSorts>(cfg, stdin, out, err),
            AppKind::Spantree => run_app::<SpanTrees>(cfg, stdin, out, err),
        },
    }
}

fn read_input(cfg: &Config, stdin: &mut dyn Read) -> Result<Vec<u8>, String> {
    let mut buf = Vec::new();
    match &cfg.input {
        Some(p) => {
            buf = std::fs::read(p).map_err(|e| format!("cannot read input {}: {e}", p.display()))?;
        }
        None => {
            stdin
                .read_to_end(&mut buf)
                .map_err(|e| format!("cannot read standard input: {e}"))?;
        }
    }
    Ok(buf)
}

fn run_app<A: Application>(mut cfg: Config, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> Report {
    macro_rules! fail {
        ($code:expr, $($arg:tt)*) => {{
            let _ = writeln!(err, "mts: {}", format!($($arg)*));
            return Report::code($code);
        }};
    }

    let mut start = Start::Fresh;
    let (input, app_args) = match cfg.params.restart_path.clone() {
        Some(path) => {
            let ck = match Checkpoint::read(&path) {
                Ok(c) => c,
                Err(e) => fail!(EXIT_USAGE, "cannot restart from {}: {e}", path.display()),
            };
            if ck.app != A::NAME {
                fail!(
                    EXIT_USAGE,
                    "checkpoint {} is for application {}, not {}",
                    path.display(),
                    ck.app,
                    A::NAME
                );
            }
            if cfg.input.is_some() {
                fail!(EXIT_USAGE, "an input file cannot be combined with -restart");
            }
            merge_params(&mut cfg.params, &ck.params, cfg.given);
            let args = if cfg.app_args.to_tokens().is_empty() {
                match AppArgs::parse(&ck.args, A::OPTIONS) {
                    Ok(a) => a,
                    Err(e) => fail!(EXIT_USAGE, "checkpoint {}: {e}", path.display()),
                }
            } else {
                cfg.app_args.clone()
            };
            let input = ck.input.clone();
            start = Start::Restart(ck);
            (input, args)
        }
        None => match read_input(&cfg, stdin) {
            Ok(i) => (i, cfg.app_args.clone()),
            Err(e) => fail!(EXIT_USAGE, "{e}"),
        },
    };
    let text = match std::str::from_utf8(&input) {
        Ok(t) => t,
        Err(_) => fail!(EXIT_USAGE, "input is not valid UTF-8"),
    };
    let app = match A::init(text, &app_args) {
        Ok(a) => a,
        Err(e) => fail!(EXIT_USAGE, "{e}"),
    };

    if !cfg.parallel() {
        let g = cfg.given;
        let budget = Budget::new(
            cfg.params.max_depth.filter(|_| g.maxd),
            g.maxnodes.then_some(cfg.params.max_nodes),
        )
        .expect("validated parameters");
        return match run_standalone(&app, budget, cfg.params.maxbuf, out, err) {
            Ok(s) => {
                info!("{} nodes, {} unexplored", s.total_nodes, s.unexplored);
                Report {
                    code: if s.clean_stop { EXIT_STOPPED } else { EXIT_OK },
                    total_nodes: Some(s.total_nodes),
                }
            }
            Err(e) => fail!(EXIT_ABORT, "{e}"),
        };
    }

    let workers = cfg.workers.unwrap_or(1);
    let ctx = RunContext {
        app: A::NAME.to_string(),
        args: app_args.to_tokens(),
        input: input.clone(),
    };
    let mut apps = Vec::with_capacity(workers);
    if cfg.backend != Backend::Process {
        for _ in 0..workers {
            match A::init(text, &app_args) {
                Ok(a) => apps.push(a),
                Err(e) => fail!(EXIT_USAGE, "{e}"),
            }
        }
    }
    let mut transport: Box<dyn Transport> = match cfg.backend {
        Backend::Threads => Box::new(Threads::spawn(apps, cfg.params.maxbuf, DEFAULT_INFLIGHT_CAP)),
        Backend::Deterministic => Box::new(Deterministic::new(apps, cfg.params.maxbuf, cfg.seed)),
        Backend::Process => {
            let exe = match std::env::current_exe() {
                Ok(p) => p,
                Err(e) => fail!(EXIT_ABORT, "cannot locate own executable: {e}"),
            };
            let init = Message::Init {
                app: A::NAME.to_string(),
                args: ctx.args.clone(),
                input: input.clone(),
                maxbuf: cfg.params.maxbuf,
            };
            match Processes::spawn(&exe, &[WORKER_COMMAND], workers, &init, DEFAULT_INFLIGHT_CAP) {
                Ok(p) => Box::new(p),
                Err(e) => fail!(EXIT_ABORT, "{e}"),
            }
        }
    };
    info!("{} workers on the {} backend", workers, cfg.backend);
    match run_master(&app, &cfg.params, start, &ctx, transport.as_mut(), out, err) {
        Ok(s) => {
            info!(
                "{} nodes in total, {} this run, {} jobs",
                s.total_nodes, s.nodes_this_run, s.jobs
            );
            if s.checkpoint_written {
                if let Some(p) = &cfg.params.checkp_path {
                    let _ = writeln!(
                        err,
                        "mts: stopped after {} nodes; checkpoint written to {}",
                        s.total_nodes,
                        p.display()
                    );
                }
            }
            Report {
                code: s.outcome.exit_code(),
                total_nodes: Some(s.total_nodes),
            }
        }
        Err(e) => fail!(EXIT_ABORT, "{e}"),
    }
}

/// Numeric parameters on the command line win over the checkpoint's.
fn merge_params(p: &mut Params, saved: &Params, given: Given) {
    if !given.maxd {
        p.max_depth = saved.max_depth;
    }
    if !given.maxnodes {
        p.max_nodes = saved.max_nodes;
    }
    if !given.scale {
        p.scale = saved.scale;
    }
    if !given.lmin {
        p.lmin = saved.lmin;
    }
    if !given.lmax {
        p.lmax = saved.lmax;
    }
    if !given.maxbuf {
        p.maxbuf = saved.maxbuf;
    }
}

#[derive(Debug, Error)]
pub enum WorkerError {
    #[error(transparent)]
    Wire(#[from] WireError),
    #[error("expected an Init message first, got {0}")]
    NoInit(&'static str),
    #[error("master closed the connection before Init")]
    Closed,
    #[error(transparent)]
    App(#[from] AppError),
    #[error("input is not valid UTF-8")]
    Utf8,
}

/// Body of the hidden `worker` subcommand: reads `Init`, builds the
/// application, then serves jobs until told to exit.
pub fn serve_worker(mut input: impl Read, output: impl Write) -> Result<(), WorkerError> {
    let msg = read_frame(&mut input)?.ok_or(WorkerError::Closed)?;
    let Message::Init {
        app,
        args,
        input: blob,
        maxbuf,
    } = msg
    else {
        return Err(WorkerError::NoInit(msg.kind()));
    };
    let text = std::str::from_utf8(&blob).map_err(|_| WorkerError::Utf8)?;
    fn go<A: Application>(
        text: &str,
        args: &[String],
        maxbuf: usize,
        input: impl Read,
        output: impl Write,
    ) -> Result<(), WorkerError> {
        let args = AppArgs::parse(args, A::OPTIONS).map_err(AppError::from)?;
        let app = A::init(text, &args)?;
        serve(Worker::new(app, maxbuf), input, output)?;
        Ok(())
    }
    match AppKind::from_name(&app)? {
        AppKind::Topsort => go::<TopSorts>(text, &args, maxbuf, input, output),
        AppKind::Spantree => go::<SpanTrees>(text, &args, maxbuf, input, output),
    }
}

/// All option names the command line accepts for `app`.
pub fn option_names(app: AppKind) -> Vec<&'static str> {
    FRAMEWORK_OPTIONS
        .iter()
        .chain(app.options())
        .map(|s: &OptionSpec| s.name)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(args: &[&str]) -> Config {
        match parse_args(args).unwrap() {
            Command::Run(c) => c,
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn framework_values() {
        let c = cfg(&["topsort", "-maxd", "2", "-maxnodes", "5000"]);
        assert_eq!(c.params.max_depth, Some(2));
        assert_eq!(c.params.max_nodes, 5000);
        assert!(c.given.maxd && c.given.maxnodes && !c.given.scale);
        assert!(!c.parallel());
    }

    #[test]
    fn zero_is_rejected_with_the_token() {
        let e = parse_args(&["topsort", "-maxnodes", "0"]).unwrap_err();
        assert!(
            e.to_string().contains("-maxnodes") && e.to_string().contains("\"0\""),
            "{e}"
        );
        assert!(parse_args(&["topsort", "-lmin", "-3"]).is_err());
        assert!(parse_args(&["topsort", "--workers", "0"]).is_err());
    }

    #[test]
    fn flags_consume_nothing() {
        let c = cfg(&["spantree", "-countonly", "in.txt"]);
        assert!(c.app_args.flag("-countonly"));
        assert_eq!(c.input, Some(PathBuf::from("in.txt")));
    }

    #[test]
    fn errors_name_the_token() {
        let e = parse_args(&["topsort", "-bogus"]).unwrap_err();
        assert_eq!(e.to_string(), "unknown option -bogus");
        let e = parse_args(&["topsort", "-maxd"]).unwrap_err();
        assert_eq!(e.to_string(), "option -maxd requires a parameter");
        let e = parse_args(&["topsort", "a", "b"]).unwrap_err();
        assert!(e.to_string().contains("\"b\""));
        assert!(parse_args(&["lrs"]).is_err());
        assert!(matches!(parse_args::<&str>(&[]), Err(UsageError::MissingApp)));
        let e = parse_args(&["topsort", "-lmin", "5"]).unwrap_err();
        assert!(e.to_string().contains("lmin"));
    }

    #[test]
    fn order_independent() {
        let a = cfg(&[
            "topsort",
            "-maxd",
            "3",
            "-prune",
            "1",
            "--workers",
            "4",
            "-scale",
            "7",
            "x",
        ]);
        let b = cfg(&[
            "topsort",
            "x",
            "-scale",
            "7",
            "--workers",
            "4",
            "-prune",
            "1",
            "-maxd",
            "3",
        ]);
        assert_eq!(a.params, b.params);
        assert_eq!(a.given, b.given);
        assert_eq!(a.app_args, b.app_args);
        assert_eq!((a.input, a.workers), (b.input, b.workers));
    }

    #[test]
    fn eleven_framework_and_two_app_options() {
        let names = option_names(AppKind::Topsort);
        assert_eq!(names.len(), 13);
        for n in ["-maxd", "-restart", "-countonly", "-prune"] {
            assert!(names.contains(&n));
        }
    }

    #[test]
    fn stdin_dash_and_parallel_implied() {
        let c = cfg(&["topsort", "-", "-freq", "f"]);
        assert_eq!(c.input, None);
        assert!(c.parallel());
    }

    #[test]
    fn restart_parameters_merge() {
        let mut p = Params {
            max_nodes: 7,
            ..Params::default()
        };
        let saved = Params {
            max_nodes: 13,
            scale: 9,
            ..Params::default()
        };
        merge_params(
            &mut p,
            &saved,
            Given {
                maxnodes: true,
                ..Given::default()
            },
        );
        assert_eq!((p.max_nodes, p.scale), (7, 9));
    }
}
