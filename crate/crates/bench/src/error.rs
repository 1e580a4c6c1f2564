use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Engine(#[from] fusegrb::Error),
    #[error("run {run}: {source}")]
    Run {
        run: usize,
        #[source]
        source: fusegrb::Error,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
}
