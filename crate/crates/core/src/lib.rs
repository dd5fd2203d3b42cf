//! Numerical homogenization of the p-Laplace equation
//! `-div a(x/eps) grad u |grad u|^{p-2} = f` with a coefficient of the form
//! `a = a_per + a_defect`, where `a_per` is periodic and the defect vanishes at infinity.
//!
//! The crate is organised by task:
//!
//! * [`coeffs`]: coefficient model, catalog and assumption checks.
//! * [`ineq`]: the algebraic inequalities behind the analysis, as randomized batteries.
//! * [`oned`]: the exact one-dimensional pipeline (flux constant, correctors, remainders).
//! * [`cell`]: periodic cell problems in d = 1, 2 and the homogenized operator.
//! * [`defect`]: the non-periodic corrector on a truncated domain.
//! * [`homog`]: the cell-averaging operator, two-scale fields and convergence studies.
//! * [`cli`]: configuration, orchestration and tabular output.

pub mod cell;
pub mod cli;
pub mod coeffs;
pub mod defect;
pub mod error;
pub mod homog;
pub mod ineq;
pub mod num;
pub mod oned;
pub mod quad;
pub mod root;
pub mod solver;

pub use error::{Error, Result};
