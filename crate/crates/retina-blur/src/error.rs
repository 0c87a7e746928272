use thiserror::Error;

/// Errors produced by the library.
///
/// `Domain` covers bad values fed to a mathematical operation (out-of-field
/// coordinates, non-finite inputs, mismatched shapes). `Config` covers
/// parameter combinations that cannot produce a valid pipeline (degenerate
/// quantization, viewing distance past the last bin).
#[derive(Debug, Error)]
pub enum Error {
    #[error("coordinate ({x}, {y}) outside visual field {width}x{height}")]
    OutOfField {
        x: i64,
        y: i64,
        width: u32,
        height: u32,
    },

    #[error("{what}: expected a finite value, got {value}")]
    NonFinite { what: &'static str, value: f64 },

    #[error("{what}: {details}")]
    Domain { what: &'static str, details: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("heatmap mass exhausted after {obtained} of {requested} fixation points")]
    HeatmapExhausted { obtained: usize, requested: usize },
}

impl Error {
    pub(crate) fn domain(what: &'static str, details: impl Into<String>) -> Self {
        Error::Domain {
            what,
            details: details.into(),
        }
    }

    pub(crate) fn config(details: impl Into<String>) -> Self {
        Error::Config(details.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
