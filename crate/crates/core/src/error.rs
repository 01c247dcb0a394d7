use thiserror::Error;

/// Errors surfaced by every layer of the engine and harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("inverted element: det(F) = {det:e}")]
    InvertedElement { det: f64 },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("particle {index} left the simulation domain at {position:?}")]
    OutOfDomain { index: usize, position: [f64; 3] },

    #[error("numerical divergence at step {step}: {detail}")]
    Divergence { step: usize, detail: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("degenerate object: {0}")]
    DegenerateObject(String),

    #[error("planning error: {0}")]
    Planning(String),

    #[error("unsupported source style {0:?}; style transfer expects a Normal trajectory")]
    UnsupportedSourceStyle(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("no safe velocity: predicted force {force:.3} N at v = {v_min} m/s exceeds {f_max} N")]
    NoSafeVelocity { v_min: f64, force: f64, f_max: f64 },

    #[error("underspecified instruction: neither cut style nor cut state given")]
    Underspecified,

    #[error("no instruction template covers {0}")]
    Coverage(String),

    #[error("cannot parse instruction at bytes {start}..{end}: {token:?}")]
    Parse {
        start: usize,
        end: usize,
        token: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
