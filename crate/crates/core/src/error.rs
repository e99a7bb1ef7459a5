use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("grid size {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("grid size {0} is below the minimum of 16")]
    GridTooSmall(usize),
    #[error("cutoff margin violated: need R + 8h <= L (R={r}, h={h}, L={l})")]
    MarginViolated { r: f64, h: f64, l: f64 },
    #[error("invalid grid extent: L={l}, R={r}")]
    BadExtent { l: f64, r: f64 },
    #[error("tau must exceed 1, got {0}")]
    TauTooLow(f64),
    #[error("Nyquist guard violated: 8*tau*L*h = {value:.4} > pi")]
    Nyquist { value: f64 },
    #[error("bump under-resolved: tau^-1/2 = {radius:.3e} < h = {h:.3e}")]
    BumpUnderResolved { radius: f64, h: f64 },
    #[error("exponent hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("series not contracting at tau={tau}: ratio {ratio:.3}")]
    TauTooSmall { tau: f64, ratio: f64 },
    #[error("order ({k},{l}) out of range (max {max})")]
    OrderOutOfRange { k: usize, l: usize, max: usize },
    #[error("near-singular Dirichlet system: {0}")]
    NearSingular(String),
    #[error("size mismatch: {0}")]
    Mismatch(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}
