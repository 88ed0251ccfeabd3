use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("non-finite sample {value} at node {node} (x = {x})")]
    Sampling { node: usize, x: f64, value: f64 },

    #[error("integration overflow after node {last_valid} (x = {x})")]
    Integration { last_valid: usize, x: f64 },

    #[error("seed changes sign near node {node} (x = {x})")]
    NodalSeed { node: usize, x: f64 },

    #[error("function is not a solution at energy {energy}: residual {residual:e} > tolerance {tol:e}")]
    NotASolution { energy: f64, residual: f64, tol: f64 },

    #[error("chain step {step}: intermediate transformation function vanishes")]
    DegenerateChain { step: usize },

    #[error("Wronskian of the seed pair vanishes at node {node} (x = {x})")]
    DegeneratePair { node: usize, x: f64 },

    #[error("kernel denominator {value:e} is not positive at node {node} (x = {x})")]
    SingularDenominator { node: usize, x: f64, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
