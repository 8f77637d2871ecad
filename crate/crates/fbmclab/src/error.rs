//! Error type shared by all modules.

use thiserror::Error;

/// Everything that can go wrong when building or running a scenario.
#[derive(Debug, Error)]
pub enum FbmcError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("config parse error at {path}:{line}: {msg}")]
    ConfigParse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("bit count {got} is not a multiple of {needed} for {order} mapping")]
    BitLength {
        got: usize,
        needed: usize,
        order: &'static str,
    },

    #[error("truncation cut_front={cut_front} + cut_rear={cut_rear} exceeds K-1={max}")]
    TruncationTooDeep {
        cut_front: usize,
        cut_rear: usize,
        max: usize,
    },

    #[error("ZF equalizer: channel matrix singular at subcarrier {subcarrier}")]
    SingularChannel { subcarrier: usize },

    #[error("compensation matrix ill-conditioned at symbol {symbol} ({branch} branch): cond = {cond:.3e}")]
    IllConditioned {
        symbol: usize,
        branch: &'static str,
        cond: f64,
    },

    #[error("compensation ordering violation: symbol {needed} ({branch} branch) must be compensated before symbol {requested}")]
    OrderingViolation {
        needed: usize,
        requested: usize,
        branch: &'static str,
    },

    #[error("unknown truncation case '{0}' (expected use_it_all | one_front_and_end | one_front | one_end | same_length)")]
    UnknownCase(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Format(String),
}
