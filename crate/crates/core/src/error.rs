use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid needs an odd number of samples per axis, got {0}")]
    EvenSamples(usize),

    #[error("config line {line}: {message}")]
    ConfigSyntax { line: usize, message: String },

    #[error("config line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("config line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },

    #[error("config is missing required key `{0}`")]
    MissingKey(&'static str),

    #[error("config key `{key}`: cannot parse `{value}`")]
    BadValue { key: String, value: String },

    #[error("kernel grid of {samples}x{samples} exceeds the configured cap of {cap} samples per axis")]
    KernelTooLarge { samples: usize, cap: usize },

    #[error("{angular} angular samples cannot resolve harmonics up to |m| = {m_max} (need at least {required})")]
    TooFewAngularSamples {
        angular: usize,
        m_max: usize,
        required: usize,
    },

    #[error("spiral spectrum truncated at |m| = {m_max} leaves mass {mass:.3e} outside the window")]
    Truncation { mass: f64, m_max: usize },

    #[error("image has zero total intensity")]
    ZeroMass,

    #[error("mode functions live on different grids")]
    GridMismatch,

    #[error("overlap magnitude {0} exceeds 1")]
    OverlapOutOfRange(f64),

    #[error("no finite decay half-width: {0}")]
    NoDecayExtent(String),

    #[error("singular value decomposition failed: {0}")]
    Svd(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by user input (configuration, flags, grid
    /// settings) rather than by a numerical diagnostic.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::EvenSamples(_)
                | Error::ConfigSyntax { .. }
                | Error::UnknownKey { .. }
                | Error::DuplicateKey { .. }
                | Error::MissingKey(_)
                | Error::BadValue { .. }
                | Error::KernelTooLarge { .. }
                | Error::TooFewAngularSamples { .. }
                | Error::NoDecayExtent(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
