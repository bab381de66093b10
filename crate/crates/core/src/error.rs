use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("invalid parameters for `{name}`: {reason}")]
    InvalidParams { name: String, reason: String },
    #[error("symbol not dissipative: a({at}) = {value}")]
    NotDissipative { at: String, value: f64 },
    #[error("normalization violated: {0}")]
    Normalization(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("oracle refused: {0}")]
    OracleRefused(String),
    #[error("multiplier envelope does not decay: {0}")]
    NonDecaying(String),
    #[error("quadrature failure: {0}")]
    Quadrature(String),
    #[error("extrapolation failed: {0}")]
    Extrapolation(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
