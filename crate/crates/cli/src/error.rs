use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
}

impl From<gss4d::fiberlink::FiberError> for CliError {
    fn from(e: gss4d::fiberlink::FiberError) -> Self {
        use gss4d::fiberlink::FiberError;
        match e {
            FiberError::InvalidConfig(m) => CliError::Config(m),
            FiberError::Constellation(c) => CliError::Config(c.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<gss4d::constellation::ConstellationError> for CliError {
    fn from(e: gss4d::constellation::ConstellationError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<gss4d::optimizer::OptimizerError> for CliError {
    fn from(e: gss4d::optimizer::OptimizerError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<gss4d::fec::FecError> for CliError {
    fn from(e: gss4d::fec::FecError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<gss4d::airmetrics::AirError> for CliError {
    fn from(e: gss4d::airmetrics::AirError) -> Self {
        CliError::Numerical(e.to_string())
    }
}
