use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("on interaction zero-crossing: chi_bar = 0")]
    ZeroCrossing,
    #[error("singular point: {0}")]
    Singular(String),
    #[error("singular configuration: V_eff has a pole at r = xi (sign(chi_bar*C6) = +1)")]
    SingularConfiguration,
    #[error("on-shell singularity; supply eta>0")]
    OnShell,
    #[error("bound-state search requires gamma=0")]
    RequiresLossless,
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("quadrature failure: {0}")]
    Quadrature(String),
    #[error("unitarity violation: |S| - 1 = {0:e}")]
    Unitarity(f64),
    #[error("divergent coupling: a1D = 0")]
    DivergentCoupling,
    #[error("{0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
