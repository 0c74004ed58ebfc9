use thiserror::Error;

/// Errors raised while building or evaluating ensembles, maps and generators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    Model(String),

    #[error("quadrature did not converge (residual estimate {residual:e})")]
    Quadrature { residual: f64 },

    #[error("t = {t} lies inside a pole window (denominator {denominator:e})")]
    PoleProximity { t: f64, denominator: f64 },

    #[error("dynamical map is singular at t = {t} (det = {det:e})")]
    SingularMap { t: f64, det: f64 },

    #[error("symmetry precondition violated: {0}")]
    Symmetry(String),

    #[error("integration failed at t = {t}: step size underflow")]
    Integration { t: f64 },

    #[error("table error: {0}")]
    Table(String),
}

pub type Result<T> = std::result::Result<T, Error>;
