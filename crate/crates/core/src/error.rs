use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty domain: no lattice point at scale N={n} satisfies the interior rule")]
    EmptyDomain { n: u32 },
    #[error("invalid domain spec: {0}")]
    InvalidSpec(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("domain too large for dense Green: |D_N|={n} exceeds cap {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("solver did not converge: residual {residual:e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("Cholesky factorization failed")]
    Cholesky,
    #[error("unsupported shape for {0}")]
    UnsupportedShape(&'static str),
    #[error("diagonal divergence: the continuum Green function is infinite at x = y")]
    Diagonal,
    #[error("point {0:?} is not in D_N")]
    OutsideDomain([i64; 2]),
    #[error("step cap of {0} exceeded")]
    StepCap(u64),
    #[error("unknown check `{0}`")]
    UnknownCheck(String),
    #[error("malformed input: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
