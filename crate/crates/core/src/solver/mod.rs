//! Discrete energy minimization shared by the cell and defect solvers.

pub mod laplace;
pub mod mesh;
pub mod optim;

pub use laplace::LaplacePreconditioner;
pub use mesh::{AxisKind, Element, Mesh, FIXED};
pub use optim::{minimize, Objective, OptimOptions, OptimResult};
