use thiserror::Error;

/// Errors raised by the solvers.
///
/// Variants map one-to-one onto the CLI exit-code classes: `Domain`, `Pole`
/// and `Validity` are input problems, `Invariant` flags a malformed model,
/// the remainder are numerical failures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("pole: {family} degree {degree} at omega = {omega} (dispersion denominator vanishes)")]
    Pole { family: String, degree: u32, omega: f64 },

    #[error("validity: {0}")]
    Validity(String),

    #[error("model invariant `{name}` violated: {detail}")]
    Invariant { name: String, detail: String },

    #[error("infeasible model parameters: {0}")]
    InfeasibleKnobs(String),

    #[error("singular pencil: {0}")]
    SingularPencil(String),

    #[error("positivity failure: {0}")]
    Positivity(String),

    #[error("assembly failure: {0}")]
    Assembly(String),

    #[error("linear algebra failure: {0}")]
    LinAlg(String),
}

pub type Result<T> = std::result::Result<T, Error>;
