use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite sample in {what} at flat index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("field is identically zero; super-level sets are undefined")]
    ZeroField,

    #[error("radius {radius} must lie in (0, {limit})")]
    RadiusOutOfRange { radius: f64, limit: f64 },

    #[error("scale overflow: criterion bound {bound} leaves no admissible scale below L/2 = {half_box}")]
    ScaleOverflow { bound: f64, half_box: f64 },

    #[error("hypothesis violated: delta = {delta} must exceed 1/(1+lambda) = {threshold}")]
    LemmaHypothesis { delta: f64, threshold: f64 },

    #[error("blow-up or instability at step {step} (t = {t})")]
    BlowUp { step: usize, t: f64 },

    #[error("window overflow: admissible window [{lo}, {hi}] lies beyond trajectory end {t_end}")]
    WindowOverflow { lo: f64, hi: f64, t_end: f64 },

    #[error("power-law fit needs at least {needed} usable rows, got {got}")]
    TooFewRows { needed: usize, got: usize },

    #[error("degenerate fit: all diffusion scales are equal")]
    DegenerateFit,

    #[error("snapshot format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
