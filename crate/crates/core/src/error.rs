use thiserror::Error;

use crate::config::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {}", format_violations(.0))]
    Config(Vec<Violation>),

    #[error("config parse error on line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("invalid LFSR spec: {0}")]
    InvalidLfsr(String),

    #[error("received stream too short: {len} bits, need more than {needed}")]
    TooShort { len: usize, needed: usize },

    #[error("samples_per_ui {samples_per_ui} is not divisible by {phases} phases")]
    IndivisiblePhases { samples_per_ui: usize, phases: usize },

    #[error("invalid search bracket: {0}")]
    InvalidBracket(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid report input: {0}")]
    Report(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}
