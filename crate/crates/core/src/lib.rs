//! C^0 interior penalty discretisation of Hamilton–Jacobi–Bellman equations
//! in nondivergence form satisfying the Cordes condition, with Howard
//! policy iteration, a residual a posteriori estimator, newest-vertex
//! bisection adaptivity and a Monge–Ampère reformulation.

pub mod adapt;
pub mod config;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod fem;
pub mod mesh;
pub mod monge_ampere;
pub mod problem;
pub mod quadrature;
pub mod scheme;
pub mod solver;
pub mod tensor;

pub use error::{Error, Result};
pub use fem::{BoundaryProjection, DiscreteFunction, FeSpace};
pub use mesh::Mesh;
pub use problem::{Control, ControlProblem, ExactSolution, SchemeParams};
pub use tensor::{Point, Sym2};
