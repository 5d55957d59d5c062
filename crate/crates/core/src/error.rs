use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// `|K|` lies outside the annulus allowed by the two cone radii.
    #[error("|K| = {k} keV outside the annulus [{k_min}, {k_max}] keV")]
    OutOfSupport { k: f64, k_min: f64, k_max: f64 },

    /// Kinematically closed channel.
    #[error("no kinematic solution: total energy {energy} keV below threshold {threshold} keV")]
    NoSolution { energy: f64, threshold: f64 },

    /// A Mandelstam variable is too close to the photon pole.
    #[error("amplitude singularity: |{name}| = {value:e} keV^2 below t_min")]
    Singularity { name: &'static str, value: f64 },

    /// Unsmeared evaluation exactly on the annulus edge, where the Jacobian diverges.
    #[error("annulus edge: triangle area {area:e} keV^2 below the edge threshold")]
    EdgeSingular { area: f64 },

    #[error("quadrature did not converge: {0}")]
    Tolerance(String),

    #[error("rejection envelope violated at K = ({kx}, {ky}) keV: density {value:e} > envelope {envelope:e}")]
    Envelope {
        kx: f64,
        ky: f64,
        value: f64,
        envelope: f64,
    },

    #[error("internal consistency: {0}")]
    Inconsistent(String),

    #[error("fringe contrast undefined: {0}")]
    UndefinedContrast(String),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit status: 1 configuration, 3 I/O, 2 any numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 1,
            Error::Io { .. } => 3,
            _ => 2,
        }
    }
}
