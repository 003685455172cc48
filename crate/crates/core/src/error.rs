use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite value in field at flat index {0}")]
    NonFinite(usize),
    #[error("nonzero spatial mean {mean:e} on slice {slice}; set project_mean to subtract it")]
    MeanMode { slice: usize, mean: f64 },
    #[error("negative duration {0}")]
    NegativeDuration(f64),
    #[error("exponent constraint violated: {0}")]
    Exponent(String),
    #[error("invalid sampling plan: {0}")]
    Plan(String),
    #[error("invalid rescale factor {0}: must be 2^-j so the field stays on the grid")]
    OffGridScale(f64),
    #[error("invalid Riesz order {0}: must lie in (0, 5)")]
    RieszOrder(f64),
    #[error("cutoff derivative {0} exceeds the supported order (time 1, space 3)")]
    CutoffOrder(String),
    #[error("invalid cylinder geometry: {0}")]
    Geometry(String),
    #[error("field is not solenoidal: max |div| = {max_div:e} exceeds {tolerance:e} ({name})")]
    NotSolenoidal {
        name: String,
        max_div: f64,
        tolerance: f64,
    },
    #[error("step size too large: CFL number {cfl:.3} exceeds {limit:.3} at t = {t}")]
    StepSize { cfl: f64, limit: f64, t: f64 },
    #[error("solution diverged (non-finite state) at t = {0}")]
    Divergence(f64),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("pipeline stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("format error: {0}")]
    Format(String),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn at_stage(self, stage: &str) -> Error {
        Error::Stage {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }
}
