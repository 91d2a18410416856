//! Continuous Lagrange finite element spaces.

pub mod basis;
pub mod function;
pub mod space;

pub use basis::{eval_basis, physical_derivatives, AffineMap, BasisValues, LagrangeBasis};
pub use function::{boundary_datum, l2_project, l2_project_boundary, BoundaryProjection, DiscreteFunction, PointEval};
pub use space::FeSpace;
