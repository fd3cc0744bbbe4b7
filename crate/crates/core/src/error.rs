use thiserror::Error;

/// Failures raised by the spectral toolkit.
///
/// Numerical payloads are carried as `f64` regardless of the scalar type the
/// computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("interaction constraint alpha*beta - gamma*delta = -1 violated (defect {defect:e})")]
    ConstraintViolation { defect: f64 },

    #[error("interaction with beta = 0, gamma = {gamma}, delta = {delta} falls outside the delta / intermediate / delta-prime classes")]
    UnclassifiableInteraction { gamma: f64, delta: f64 },

    #[error("sampling grid cannot separate band edges in [{lo}, {hi}]")]
    BracketingFailure { lo: f64, hi: f64 },

    #[error("spectrum bottom is not a band edge: ||D(E0)| - 1| = {defect:e}")]
    DegenerateEdge { defect: f64 },

    #[error("integrator failed to meet tolerance at r = {position}")]
    StepFailure { position: f64 },

    #[error("state vectors sit at different positions ({left} vs {right})")]
    PositionMismatch { left: f64, right: f64 },

    #[error("boundary solution vanishes identically at r = {position}")]
    DegenerateEndpoint { position: f64 },

    #[error("no contracting Floquet direction at energy {energy} (band energy with vanishing imaginary part)")]
    NonDecayingStart { energy: f64 },

    #[error("Floquet solution vanishes at shell r = {radius}")]
    BasisZero { radius: f64 },

    #[error("found {found} of {wanted} eigenvalues below E0 with r_max = {r_max}")]
    FewerThanRequested {
        found: usize,
        wanted: usize,
        r_max: f64,
        eigenvalues: Vec<f64>,
    },

    #[error("grid step does not place shells midway between nodes (cell/step = {ratio})")]
    GridMisaligned { ratio: f64 },

    #[error("eigenvalue iteration did not converge: {0}")]
    ConvergenceFailure(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = SpectralError> = std::result::Result<T, E>;
