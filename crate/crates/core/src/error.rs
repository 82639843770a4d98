use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("constraint violated: {0}")]
    ConstraintViolation(String),

    #[error("no feasible parameters: {0}")]
    Infeasible(String),

    #[error("{0} does not lie in the interior of any plateau")]
    NotOnPlateau(f64),

    #[error("gradient too small for a tangent frame (|dr| = {0:e})")]
    DegenerateGradient(f64),

    #[error("analytic disc leaves the domain at zeta = {0}")]
    DiscExits(String),

    #[error("point lies outside the domain")]
    OutsideDomain,

    #[error("Gram matrix is numerically singular (condition number {0:e})")]
    SingularGram(f64),

    #[error("boundary point is not strictly pseudoconvex (tangential eigenvalue {0:e})")]
    NotStrictlyPseudoconvex(f64),

    #[error("witness {index} is non-negative ({value:e}) at a domain sample")]
    NonNegativeWitness { index: usize, value: f64 },

    #[error("growth target unreachable at level {level}: best |f(z)| = {achieved:e}, target {target:e}")]
    GrowthTargetUnreachable {
        level: usize,
        achieved: f64,
        target: f64,
    },

    #[error("value {0} outside the domain of the transform")]
    DomainError(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cache entry {0} failed its integrity check")]
    CacheCorruption(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
