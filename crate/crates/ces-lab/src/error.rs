use thiserror::Error;

/// Crate-wide error type. Every fallible operation returns one of these;
/// numerical tolerances that gate a variant are stated at the construction site.
#[derive(Debug, Error)]
pub enum Error {
    #[error("state of {num_modes} modes at cutoff {cutoff} needs {required} amplitudes, budget is {budget}")]
    Budget {
        num_modes: usize,
        cutoff: usize,
        required: u128,
        budget: usize,
    },

    #[error("mode index {mode} out of range for {num_modes} modes")]
    ModeOutOfRange { mode: usize, num_modes: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("series failed to converge: {0}")]
    Convergence(String),

    #[error("weight direction {index} is degenerate (vanishing sine product in the cascade)")]
    DegenerateDirection { index: usize },

    #[error("linear system for displacements is singular or ill-conditioned: residual {residual:.3e}")]
    SingularSystem { residual: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("state is not pure enough for a closed-form overlap: |det(2V) - 1| = {deviation:.3e}")]
    Impure { deviation: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
