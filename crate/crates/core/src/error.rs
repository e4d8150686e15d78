use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("observation x={x} has zero probability")]
    ZeroMassEvent { x: usize },

    #[error("degenerate Y-marginal p={p}; require 0 < p < 1")]
    DegenerateMarginal { p: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("vertex {vertex} has Y-marginal off by {deviation:e} from the prior")]
    MarginalMismatch { vertex: usize, deviation: f64 },

    #[error("credal set would have {count} vertices, cap is {cap}")]
    SizeOverflow { count: u128, cap: u128 },

    #[error("every vertex gives observation x={x} zero probability")]
    EverywhereZeroMass { x: usize },

    #[error("empty list of distributions")]
    EmptyList,

    #[error("invalid loss: {0}")]
    InvalidLoss(String),

    #[error("operation needs an observation-independent loss")]
    ObservationDependentLoss,

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("integration oracle only supports M = 2, got M = {m}")]
    OracleOutOfDomain { m: usize },

    #[error("enumeration needs {terms} terms, cap is {cap}")]
    EnumerationTooLarge { terms: u128, cap: u128 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("scenario `{scenario}`: {source}")]
    Scenario {
        scenario: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Whether the failure came from the LP solver or certification rather than bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NumericalFailure(_) => true,
            Error::Scenario { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
