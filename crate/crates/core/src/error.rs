use thiserror::Error;

/// Errors produced by the projection engine and its kernels.
#[derive(Debug, Error)]
pub enum Error {
    /// Two objects that must live on the same grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(&'static str),

    /// A vector does not have the length its grid requires.
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// Empty input where at least one element is required.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// Invalid grid description.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// Invalid measure weights or density values.
    #[error("invalid values: {0}")]
    InvalidValues(String),

    /// Invalid engine or solver option.
    #[error("invalid option: {0}")]
    InvalidOption(String),

    /// A probability measure was required but the total mass is off.
    #[error("measure is not normalized (total mass = {mass})")]
    NotNormalized { mass: f64 },

    /// Mathematically undefined input (e.g. zero total mass).
    #[error("domain error: {0}")]
    Domain(&'static str),

    /// An infinite integrand met a node carrying positive mass.
    #[error("infinite integrand at node {node} carrying positive mass")]
    InfiniteIntegrand { node: usize },

    /// A non-finite value appeared in a computation that should stay finite.
    #[error("non-finite value: {0}")]
    NonFinite(&'static str),

    /// The adjustment step met a zero correction factor under positive mass.
    #[error("correction factor vanishes at node {node} where the previous iterate has mass")]
    ConventionViolation { node: usize },

    /// A marginal target is not absolutely continuous w.r.t. the current marginal.
    #[error("projection undefined: target has mass at axis node {node} where the measure has none")]
    ProjectionUndefined { node: usize },

    /// The tilt needed to reach the constraint exceeds the configured cap.
    #[error("infeasible direction: no tilt with |alpha| <= {alpha_cap} reaches the constraint")]
    InfeasibleDirection { alpha_cap: f64 },

    /// A precondition of an operation does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A projection step failed inside the cyclic engine.
    #[error("step (n={cycle}, i={index}) failed: {source}")]
    Step {
        cycle: usize,
        index: usize,
        #[source]
        source: Box<Error>,
    },

    /// The brute-force oracle could not certify its answer.
    #[error("oracle failure: KKT residual {residual:e} above threshold")]
    OracleFailure { residual: f64 },
}

impl Error {
    /// True for errors caused by malformed input rather than numerics.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::GridMismatch(_)
            | Error::LengthMismatch { .. }
            | Error::EmptyInput(_)
            | Error::InvalidGrid(_)
            | Error::InvalidValues(_)
            | Error::InvalidOption(_)
            | Error::NotNormalized { .. }
            | Error::ProjectionUndefined { .. }
            | Error::Precondition(_) => true,
            Error::Step { source, .. } => source.is_input_error(),
            _ => false,
        }
    }

    pub(crate) fn at_step(self, cycle: usize, index: usize) -> Self {
        Error::Step {
            cycle,
            index,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
