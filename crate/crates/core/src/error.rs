use thiserror::Error;

use crate::expr::ExprError;
use crate::linalg::LinalgError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("diffusion coefficient b = {value} at node {node} (z = {z}) is not above epsilon = {epsilon}")]
    Positivity {
        node: usize,
        z: f64,
        value: f64,
        epsilon: f64,
    },
    #[error("non-finite {what} at node {node}")]
    NonFinite { what: &'static str, node: usize },
    #[error("{what} limited to order {cap}, got {requested}")]
    SizeCap {
        what: &'static str,
        requested: usize,
        cap: usize,
    },
    #[error("time level {level}: {source}")]
    TimeLevel { level: usize, source: LinalgError },
    #[error("invalid constant-coefficient problem: {0}")]
    ConstantCase(String),
    #[error("Gershgorin discs of XXᵀ reach zero (min g - s = {gap:e}); the bound is unavailable")]
    DiscGap { gap: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
