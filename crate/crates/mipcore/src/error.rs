use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("variable {0} has no name")]
    UnnamedVariable(usize),
    #[error("constraint {0} has no name")]
    UnnamedConstraint(usize),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("row `{row}` references undeclared variable {var}")]
    UnknownVariable { row: String, var: usize },
    #[error("non-finite coefficient in `{0}`")]
    NonFinite(String),
}

#[derive(Debug, Error)]
pub enum MpsError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unsupported section {section}")]
    UnsupportedSection { line: usize, section: String },
    #[error("line {line}: unsupported bound `{kind}` on column `{column}`")]
    UnsupportedBound { line: usize, kind: String, column: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
