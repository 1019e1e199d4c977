use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("qubit {qubit} out of range for {n}-qubit state")]
    QubitRange { qubit: usize, n: usize },

    #[error("forced outcome {outcome} on qubit {qubit} has probability {prob:.3e}")]
    ZeroProbability { qubit: usize, outcome: u8, prob: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A kernel mean inside a logarithm was not positive.
    #[error("estimator failure: mean K4 = {mean_k4:.6e}, mean K2 = {mean_k2:.6e} (too few shots?)")]
    Estimator { mean_k4: f64, mean_k2: f64 },

    #[error("resource limit: {0}")]
    Limit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn limit(msg: impl Into<String>) -> Self {
        Error::Limit(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_)
            | Error::Parse { .. }
            | Error::QubitRange { .. }
            | Error::ZeroProbability { .. }
            | Error::Io(_) => 2,
            Error::Numerical(_) | Error::Estimator { .. } => 3,
            Error::Limit(_) => 4,
        }
    }
}
