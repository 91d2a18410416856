use std::fmt;

use crate::tensor::Point;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("non-conforming mesh: edge ({0}, {1}) is shared by {2} triangles")]
    NonConforming(usize, usize, usize),
    #[error("degenerate triangle {0} (signed area {1:e})")]
    DegenerateTriangle(usize, f64),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{0}")]
    Cordes(CordesViolation),
    #[error("linear solve failed: {0}")]
    LinearSolve(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Worst sample found while checking the Cordes condition.
#[derive(Debug, Clone)]
pub struct CordesViolation {
    pub epsilon: f64,
    pub point: Point,
    pub control: String,
}

impl fmt::Display for CordesViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Cordes condition violated: epsilon = {:e} at ({}, {}) for control {}",
            self.epsilon, self.point[0], self.point[1], self.control
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
