use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("restriction is singular: {0}")]
    SingularRestriction(String),
    #[error("invalid dual parameter: {0}")]
    InvalidDualParam(String),
    #[error("block {index} has rank {rank}, expected at most 1")]
    RankError { index: usize, rank: usize },
    #[error("not a frame: {0}")]
    NotAFrame(String),
    #[error("not a frame sequence: {0}")]
    NotAFrameSequence(String),
    #[error("degenerate Gavruta dual: {0}")]
    DegenerateGavrutaDual(String),
    #[error("hypotheses not satisfied: {0}")]
    NotApplicable(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = FrameError> = std::result::Result<T, E>;
