use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    Lattice(String),
    #[error("invalid species: {0}")]
    Species(String),
    #[error("mode space has {0} modes; sparse states support at most 128")]
    TooManyModes(usize),
    #[error("operator product needs a contraction on mode {0}; only normal-ordered products are supported")]
    Contraction(usize),
    #[error("exponential did not converge after {terms} terms (residual norm {residual:.3e})")]
    NonConvergence { terms: usize, residual: f64 },
    #[error("quadrature did not converge (residual estimate {residual:.3e})")]
    Quadrature { residual: f64 },
    #[error("packet for {species} is not resolved: {reason}")]
    Unresolved { species: String, reason: String },
    #[error("scenario audit failed, condition {condition}: {detail}")]
    Audit { condition: &'static str, detail: String },
    #[error("dense regime exceeded: {0}")]
    TooLarge(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
