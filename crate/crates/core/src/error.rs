use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit count must be at least 1")]
    ZeroQubits,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("excitation index {m} out of range for {n} qubits")]
    ExcitationOutOfRange { n: usize, m: usize },

    #[error("{what} = {value} outside allowed range {range}")]
    RangeViolation {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error(
        "no rotation angle reaches overlap {required:.6} for N={n}, m={m} in {steps} steps \
         (best achievable {achievable:.6}); increase the step count"
    )]
    ExistenceViolated {
        n: usize,
        m: usize,
        steps: usize,
        achievable: f64,
        required: f64,
    },

    #[error("modified phase needs at least {min_steps} steps, got {steps}")]
    StepsBelowMinimum { steps: usize, min_steps: usize },

    #[error("closed-form mismatch fidelity available for k = 1..4 only, got {0}")]
    UnsupportedSteps(usize),

    #[error("seed Dicke state m={m} has zero overlap with the GHZ state; try m={fallback}")]
    ParityInfeasible { m: usize, fallback: usize },

    #[error("no Dicke seed overlaps the cat state for N={n}")]
    NoAdmissibleSeed { n: usize },

    #[error("quadrature did not converge: change {achieved:.3e} at {nodes} nodes")]
    QuadratureNonConvergence { achieved: f64, nodes: usize },

    #[error("heralded state has zero trace (total photon loss)")]
    TotalLoss,

    #[error("invalid cavity parameters: {0}")]
    InvalidParams(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
