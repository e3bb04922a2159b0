use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("model exceeds micro guard rails: {binaries} binaries (max {max_binaries}), {vars} vars (max {max_vars})")]
    SizeGuard { binaries: usize, vars: usize, max_binaries: usize, max_vars: usize },
    #[error("model has nonlinear terms; the MILP path requires a linear model")]
    NonlinearModel,
    #[error("not all binaries are fixed: `{0}`")]
    UnfixedBinary(String),
    #[error("simplex failure: {0}")]
    Simplex(String),
    #[error("LP subproblem failed at SLP iterate {iteration}: {message}")]
    SlpSubproblem { iteration: usize, message: String },
    #[error("external solver failed: {message}\n--- captured output ---\n{output}")]
    Backend { message: String, output: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Mps(#[from] model_ir::MpsError),
    #[error(transparent)]
    SolFile(#[from] model_ir::SolFileError),
}

impl From<crate::simplex::SimplexError> for SolverError {
    fn from(e: crate::simplex::SimplexError) -> Self {
        SolverError::Simplex(e.to_string())
    }
}
