use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("effective mode volume is zero (a_eff * radius = 0)")]
    ZeroVolume,

    #[error("empty frequency range or too few samples: {0}")]
    EmptyRange(String),

    #[error("all pump weights are zero")]
    AllZero,

    #[error(
        "root polishing did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("resolvent (i*omega - M) is singular at omega = {omega}")]
    SingularResolvent { omega: f64 },

    #[error("fluctuation generator is not Hurwitz (max Re eigenvalue {max_re:e})")]
    UnstableState { max_re: f64 },

    #[error("symmetrized quadrature covariance is not symmetric (residual {residual:e})")]
    NotSymmetric { residual: f64 },

    #[error("no feasible pump point: {0}")]
    NoFeasiblePoint(String),

    #[error("integration produced a non-finite value at t = {t}")]
    NonFinite { t: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("config validation failed:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Config problems exit with status 2, everything else with 1.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Parse(_) | Error::Validation(_))
    }
}
