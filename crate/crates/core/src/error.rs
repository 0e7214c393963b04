use thiserror::Error;

/// Errors raised by the numerics, the simulator and the verification layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("quadrature did not converge: estimate {value:e} with error {error:e} ({context})")]
    QuadratureFailure {
        value: f64,
        error: f64,
        context: &'static str,
    },

    #[error("resolvent density is infinite at r = 0 when d >= alpha")]
    SingularArgument,

    #[error("Green function requires a transient process (d > alpha), got d = {dim}, alpha = {alpha}")]
    NotTransient { dim: usize, alpha: f64 },

    #[error("branching is not supercritical: mean offspring m = {0} <= 1")]
    SubcriticalBranching(f64),

    #[error("root not bracketed in [{lo:e}, {hi:e}]")]
    RootNotBracketed { lo: f64, hi: f64 },

    #[error("parameter outside supported domain: {0}")]
    DomainError(String),

    #[error("population exceeded cap of {cap} particles at t = {time}")]
    PopulationOverflow { cap: usize, time: f64 },

    #[error("no surviving replicas to condition on")]
    EmptyConditioningSet,

    #[error("no exceedance events observed for {0}")]
    ZeroEventCount(String),

    #[error("empty sample")]
    EmptySample,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
