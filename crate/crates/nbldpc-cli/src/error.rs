use nbldpc::code_model::CodeError;
use nbldpc::oracle::OracleError;
use nbldpc::sim::SimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{0} self-test check(s) failed")]
    SelftestFailed(usize),
}

impl CliError {
    /// 1 usage or configuration, 2 input/output, 3 self-test failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Code(CodeError::Io { .. }) => 2,
            CliError::Sim(SimError::Io(_) | SimError::Csv(_)) => 2,
            CliError::SelftestFailed(_) => 3,
            _ => 1,
        }
    }
}
