use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("not phase-matchable: {0}")]
    NotPhaseMatchable(String),

    #[error("medium file line {line}: {msg}")]
    Medium { line: usize, msg: String },

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("invalid parameter: {0}")]
    Invalid(String),

    #[error(
        "oracle did not converge with {panels} z-panels per slab: \
         fine = {fine_re:e}{fine_im:+e}i, coarse = {coarse_re:e}{coarse_im:+e}i"
    )]
    OracleConvergence {
        panels: usize,
        fine_re: f64,
        fine_im: f64,
        coarse_re: f64,
        coarse_im: f64,
    },

    #[error("SVD did not converge after {iterations} iterations on a {rows}x{cols} matrix")]
    Svd {
        iterations: usize,
        rows: usize,
        cols: usize,
    },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("scenario `{scenario}`: {source}")]
    Scenario {
        scenario: String,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Process exit classes used by the command-line front end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitClass {
    Config = 2,
    Numeric = 3,
    Io = 4,
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub(crate) fn in_scenario(self, scenario: &str) -> Self {
        Error::Scenario {
            scenario: scenario.to_string(),
            source: Box::new(self),
        }
    }

    pub fn exit_class(&self) -> ExitClass {
        match self {
            Error::Config { .. } | Error::Medium { .. } | Error::Invalid(_) => ExitClass::Config,
            Error::Domain(_)
            | Error::NotPhaseMatchable(_)
            | Error::OracleConvergence { .. }
            | Error::Svd { .. }
            | Error::Fit(_) => ExitClass::Numeric,
            Error::Io { .. } => ExitClass::Io,
            Error::Scenario { source, .. } => source.exit_class(),
        }
    }
}
