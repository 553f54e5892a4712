//! Applications: enumeration problems packaged for the scheduler.

pub mod spantree;
pub mod topsort;

use thiserror::Error;

use crate::engine::{PruneMode, SearchProblem};
use crate::node::NodeRecord;
use crate::options::{AppArgs, OptionError, OptionSpec};
use crate::output::Output;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AppError {
    #[error("no input found")]
    NoInput,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("malformed node record: {0}")]
    Decode(String),
    #[error(transparent)]
    Option(#[from] OptionError),
    #[error("unknown application {0:?}")]
    Unknown(String),
}

/// A search problem the framework can drive end to end: it is built from a
/// text input blob, converts its nodes to and from [`NodeRecord`], and prints
/// them.
pub trait Application: SearchProblem + Sized + Send + 'static {
    /// Identifier used on the command line and in checkpoints.
    const NAME: &'static str;

    /// Options this application accepts, in addition to the framework ones.
    const OPTIONS: &'static [OptionSpec];

    /// Builds the problem from the input blob. Called once per process.
    fn init(input: &str, args: &AppArgs) -> Result<Self, AppError>;

    fn encode(&self, v: &Self::Node) -> NodeRecord;

    fn decode(&self, record: &NodeRecord) -> Result<Self::Node, AppError>;

    /// Prints one node. Called for the root (depth 0) and for every node the
    /// traversal emits.
    fn put_output(&self, v: &Self::Node, depth: u64, unexplored: bool, out: &mut Output<'_>);

    fn prune(&self) -> PruneMode {
        PruneMode::Off
    }

    /// Final line printed after a complete run, given the total node count
    /// (root included).
    fn summary(&self, _total: u64) -> Option<String> {
        None
    }
}

/// The bundled applications.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AppKind {
    Topsort,
    Spantree,
}

impl AppKind {
    pub fn from_name(name: &str) -> Result<Self, AppError> {
        match name {
            topsort::TopSorts::NAME => Ok(AppKind::Topsort),
            spantree::SpanTrees::NAME => Ok(AppKind::Spantree),
            other => Err(AppError::Unknown(other.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AppKind::Topsort => topsort::TopSorts::NAME,
            AppKind::Spantree => spantree::SpanTrees::NAME,
        }
    }

    pub fn options(self) -> &'static [OptionSpec] {
        match self {
            AppKind::Topsort => topsort::TopSorts::OPTIONS,
            AppKind::Spantree => spantree::SpanTrees::OPTIONS,
        }
    }
}

/// `-countonly` and `-prune`, shared by the bundled applications.
pub const COMMON_OPTIONS: &[OptionSpec] = &[OptionSpec::flag("-countonly"), OptionSpec::value("-prune")];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CommonOptions {
    pub countonly: bool,
    pub prune: PruneMode,
}

impl CommonOptions {
    pub fn from_args(args: &AppArgs) -> Result<Self, AppError> {
        let prune = match args.value("-prune") {
            None => PruneMode::Off,
            Some(v) => {
                v.parse::<i64>()
                    .ok()
                    .and_then(PruneMode::from_level)
                    .ok_or_else(|| OptionError::InvalidValue {
                        option: "-prune".into(),
                        value: v.into(),
                        reason: "expected 0 (leaves) or 1 (paths)".into(),
                    })?
            }
        };
        Ok(CommonOptions {
            countonly: args.flag("-countonly"),
            prune,
        })
    }
}

/// Whitespace-separated integer reader for the input formats.
pub(crate) struct Tokens<'a> {
    it: std::str::SplitWhitespace<'a>,
}

impl<'a> Tokens<'a> {
    pub(crate) fn new(input: &'a str) -> Self {
        Tokens {
            it: input.split_whitespace(),
        }
    }

    pub(crate) fn next(&mut self, what: &str) -> Result<i64, AppError> {
        let tok = self
            .it
            .next()
            .ok_or_else(|| AppError::Parse(format!("unexpected end of input reading {what}")))?;
        tok.parse()
            .map_err(|_| AppError::Parse(format!("expected an integer for {what}, found {tok:?}")))
    }

    pub(crate) fn expect_end(&mut self) -> Result<(), AppError> {
        match self.it.next() {
            None => Ok(()),
            Some(tok) => Err(AppError::Parse(format!("unexpected trailing token {tok:?}"))),
        }
    }
}

/// Reads the `n m` header and `m` pairs shared by both input formats.
pub(crate) fn read_pairs(input: &str) -> Result<(i64, Vec<(i64, i64)>), AppError> {
    if input.split_whitespace().next().is_none() {
        return Err(AppError::NoInput);
    }
    let mut t = Tokens::new(input);
    let n = t.next("n")?;
    let m = t.next("m")?;
    if n < 1 {
        return Err(AppError::Invalid(format!("n must be at least 1, got {n}")));
    }
    if m < 0 {
        return Err(AppError::Invalid(format!("m must be nonnegative, got {m}")));
    }
    let mut pairs = Vec::with_capacity(m.min(1 << 16) as usize);
    for k in 1..=m {
        let i = t.next(&format!("pair {k}"))?;
        let j = t.next(&format!("pair {k}"))?;
        pairs.push((i, j));
    }
    t.expect_end()?;
    Ok((n, pairs))
}

/// Writes `" a b c d=<depth>"`, plus the unexplored marker in standalone
/// mode, and a newline.
pub(crate) fn write_labels(labels: impl IntoIterator<Item = u32>, depth: u64, unexplored: bool, out: &mut Output<'_>) {
    use std::fmt::Write;
    let mut line = String::new();
    for l in labels {
        let _ = write!(line, " {l}");
    }
    let _ = write!(line, " d={depth}");
    if unexplored && !out.is_parallel() {
        line.push_str(" *unexplored");
    }
    line.push('\n');
    out.write_bytes(line.as_bytes());
}

pub(crate) fn decode_labels(record: &NodeRecord, len: usize, max: usize) -> Result<Vec<u32>, AppError> {
    if record.vlong.len() != len {
        return Err(AppError::Decode(format!(
            "expected {len} words, found {}",
            record.vlong.len()
        )));
    }
    record
        .vlong
        .iter()
        .map(|&x| {
            if x >= 1 && x as usize <= max {
                Ok(x as u32)
            } else {
                Err(AppError::Decode(format!("label {x} out of range 1..={max}")))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn common_options() {
        let args = AppArgs::parse(&["-countonly", "-prune", "0"], COMMON_OPTIONS).unwrap();
        assert_eq!(
            CommonOptions::from_args(&args).unwrap(),
            CommonOptions {
                countonly: true,
                prune: PruneMode::Leaves
            }
        );
        let args = AppArgs::parse(&["-prune", "7"], COMMON_OPTIONS).unwrap();
        assert!(CommonOptions::from_args(&args).is_err());
    }

    #[test]
    fn header_reading() {
        assert_eq!(read_pairs(""), Err(AppError::NoInput));
        assert_eq!(read_pairs("  \n "), Err(AppError::NoInput));
        assert_eq!(read_pairs("3 1  1 2").unwrap(), (3, vec![(1, 2)]));
        assert!(matches!(read_pairs("3 2 1 2"), Err(AppError::Parse(_))));
        assert!(matches!(read_pairs("3 0 9"), Err(AppError::Parse(_))));
        assert!(matches!(read_pairs("x"), Err(AppError::Parse(_))));
        assert!(matches!(read_pairs("0 0"), Err(AppError::Invalid(_))));
    }

    #[test]
    fn app_names() {
        assert_eq!(AppKind::from_name("topsort").unwrap(), AppKind::Topsort);
        assert_eq!(AppKind::from_name("spantree").unwrap().name(), "spantree");
        assert!(AppKind::from_name("lrs").is_err());
    }
}
