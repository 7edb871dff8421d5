use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("signal length {0} is not a power of two >= 8")]
    Length(usize),

    #[error("malformed decomposition: {0}")]
    Structure(String),

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("no coalescence after {doublings} doublings (horizon {horizon}, |U|-|L| gap {gap})")]
    NoCoalescence {
        doublings: u32,
        horizon: f64,
        gap: usize,
    },

    #[error("coupling invariant violated: {0}")]
    Invariant(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("i/o: {0}")]
    Io(String),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// Short machine-readable tag used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Length(_) => "length",
            Error::Structure(_) => "structure",
            Error::UnknownName { .. } => "unknown_name",
            Error::InvalidParams(_) => "invalid_params",
            Error::Degenerate(_) => "degenerate",
            Error::NoCoalescence { .. } => "no_coalescence",
            Error::Invariant(_) => "invariant",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::Io(_) => "io",
            Error::Config(_) => "config",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
