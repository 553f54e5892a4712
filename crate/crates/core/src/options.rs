//! Option tables shared by the framework and applications.

use std::collections::HashSet;

use thiserror::Error;

/// A command-line option and the number of parameters it takes (0 or 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OptionSpec {
    pub name: &'static str,
    pub arity: u8,
}

impl OptionSpec {
    pub const fn flag(name: &'static str) -> Self {
        OptionSpec { name, arity: 0 }
    }
    pub const fn value(name: &'static str) -> Self {
        OptionSpec { name, arity: 1 }
    }
}

/// Options understood by the scheduler itself.
pub const FRAMEWORK_OPTIONS: [OptionSpec; 11] = [
    OptionSpec::value("-maxd"),
    OptionSpec::value("-maxnodes"),
    OptionSpec::value("-scale"),
    OptionSpec::value("-lmin"),
    OptionSpec::value("-lmax"),
    OptionSpec::value("-maxbuf"),
    OptionSpec::value("-freq"),
    OptionSpec::value("-hist"),
    OptionSpec::value("-checkp"),
    OptionSpec::value("-stop"),
    OptionSpec::value("-restart"),
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OptionError {
    #[error("option {0} is defined more than once")]
    Collision(String),
    #[error("unknown option {0}")]
    Unknown(String),
    #[error("option {0} requires a parameter")]
    MissingValue(String),
    #[error("invalid value {value:?} for option {option}: {reason}")]
    InvalidValue {
        option: String,
        value: String,
        reason: String,
    },
}

/// Rejects tables in which some option name appears twice.
pub fn check_tables(tables: &[&[OptionSpec]]) -> Result<(), OptionError> {
    let mut seen = HashSet::new();
    for spec in tables.iter().flat_map(|t| t.iter()) {
        if !seen.insert(spec.name) {
            return Err(OptionError::Collision(spec.name.to_string()));
        }
    }
    Ok(())
}

/// Application options as parsed from the command line, kept in their raw
/// token form so they can be forwarded to workers and checkpoints verbatim.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AppArgs {
    entries: Vec<(String, Option<String>)>,
}

impl AppArgs {
    /// Parses `tokens` against `table`. Every token must be a known option.
    pub fn parse<S: AsRef<str>>(tokens: &[S], table: &[OptionSpec]) -> Result<Self, OptionError> {
        let mut entries = Vec::new();
        let mut it = tokens.iter().map(AsRef::as_ref);
        while let Some(tok) = it.next() {
            let spec = table
                .iter()
                .find(|s| s.name == tok)
                .ok_or_else(|| OptionError::Unknown(tok.to_string()))?;
            let value = if spec.arity == 1 {
                Some(
                    it.next()
                        .ok_or_else(|| OptionError::MissingValue(tok.to_string()))?
                        .to_string(),
                )
            } else {
                None
            };
            entries.push((tok.to_string(), value));
        }
        Ok(AppArgs { entries })
    }

    pub fn push(&mut self, name: &str, value: Option<&str>) {
        self.entries.push((name.to_string(), value.map(str::to_string)));
    }

    pub fn flag(&self, name: &str) -> bool {
        self.entries.iter().any(|(n, _)| n == name)
    }

    /// Value of the last occurrence of `name`.
    pub fn value(&self, name: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .and_then(|(_, v)| v.as_deref())
    }

    /// Back to a flat token list.
    pub fn to_tokens(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (n, v) in &self.entries {
            out.push(n.clone());
            out.extend(v.iter().cloned());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const APP: [OptionSpec; 2] = [OptionSpec::flag("-countonly"), OptionSpec::value("-prune")];

    #[test]
    fn framework_table_has_eleven_unique_options() {
        assert_eq!(FRAMEWORK_OPTIONS.len(), 11);
        check_tables(&[&FRAMEWORK_OPTIONS, &APP]).unwrap();
    }

    #[test]
    fn collision_is_reported() {
        let bad = [OptionSpec::value("-maxd")];
        assert_eq!(
            check_tables(&[&FRAMEWORK_OPTIONS, &bad]),
            Err(OptionError::Collision("-maxd".into()))
        );
    }

    #[test]
    fn flags_take_no_parameter() {
        let a = AppArgs::parse(&["-countonly", "-prune", "1"], &APP).unwrap();
        assert!(a.flag("-countonly"));
        assert_eq!(a.value("-prune"), Some("1"));
        assert_eq!(a.to_tokens(), vec!["-countonly", "-prune", "1"]);
    }

    #[test]
    fn parse_errors() {
        assert_eq!(
            AppArgs::parse(&["-prune"], &APP),
            Err(OptionError::MissingValue("-prune".into()))
        );
        assert_eq!(
            AppArgs::parse(&["-bogus"], &APP),
            Err(OptionError::Unknown("-bogus".into()))
        );
    }
}
