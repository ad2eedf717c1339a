use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// The highest retained transmon level moved by more than the tolerance
    /// when the charge basis was enlarged.
    #[error(
        "charge cutoff {cutoff} too small: level {level} moved by {shift:.3e} GHz when the cutoff grew by 5"
    )]
    CutoffTooSmall { cutoff: usize, level: usize, shift: f64 },

    #[error("Fock cutoff {n_fock} exceeds the stable Laguerre recurrence range (max {max})")]
    FockCutoffOverflow { n_fock: usize, max: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("eigensolver failed on a {dim}x{dim} matrix (max |H| = {max_abs:.3e}, hermiticity defect {defect:.3e})")]
    EigenSolver { dim: usize, max_abs: f64, defect: f64 },

    /// A second-order denominator fell below the resonance threshold. This is a
    /// multiphoton resonance between the two quoted dressed states.
    #[error(
        "near-resonant denominator {denominator:.3e} GHz between |{}_t,{}_r> and |{}_t,{}_r>",
        state.0, state.1, partner.0, partner.1
    )]
    NearResonance {
        state: (usize, usize),
        partner: (usize, usize),
        denominator: f64,
    },

    #[error("state {level} is not bound: action {action:.6} >= separatrix area 16")]
    UnboundState { level: usize, action: f64 },

    #[error("stochastic step renormalized the state by {correction:.3} (limit 0.1) at t = {time:.4} ns; reduce dt")]
    NormDivergence { correction: f64, time: f64 },

    #[error("root search failed: {0}")]
    RootNotFound(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
