use thiserror::Error;

/// Errors raised by the channel math, the distribution algebra and the
/// scenario pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("`{name}` is out of its domain: {value}")]
    Domain { name: &'static str, value: f64 },

    #[error("blocklength {m} is not reachable at any SNR (infimum is {infimum})")]
    Infeasible { m: f64, infimum: f64 },

    #[error("distribution grids differ ({left} vs {right} symbols)")]
    GridMismatch { left: usize, right: usize },

    #[error("probability mass drifted by {drift:e}")]
    MassDrift { drift: f64 },

    #[error("CSI overhead of {overhead} symbols does not fit in a {frame}-symbol frame")]
    OverheadExceedsFrame { overhead: f64, frame: u64 },

    #[error("{0}")]
    Config(String),

    #[error("root finder failed: {0}")]
    Root(String),

    #[error("no relay candidates given")]
    NoCandidates,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, value: f64) -> Error {
    Error::Domain { name, value }
}
