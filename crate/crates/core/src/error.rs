use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: side n = {0} (need n >= 2)")]
    InvalidLattice(usize),
    #[error("invalid network parameters: {0}")]
    InvalidNetwork(String),
    #[error("stub matching failed after {0} restarts")]
    MatchingExhausted(usize),
    #[error("invalid threshold {0} (must lie in [0, 1])")]
    InvalidThreshold(f64),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(&'static str),
    #[error("dimension {requested} out of range 1..={max}")]
    Dimension { requested: usize, max: usize },
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("barcode has no finite bar to calibrate against")]
    Calibration,
    #[error("incomparable diagrams: {0} vs {1} infinite bars")]
    IncomparableDiagrams(usize, usize),
    #[error("unsupported geometric degree {0}: no closed form, derive the threshold per degree")]
    UnsupportedDegree(usize),
    #[error("bifurcation parameters out of range: {0}")]
    Bifurcation(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
