//! Numerical toolkit for cooperative nonlocal dispersal systems.
//!
//! The library discretizes integro-differential operators of the form
//!
//! ```text
//! B_i[phi](x) = d_i \int_Omega J_i(x,y) phi_i(y) dy + sum_k b_ik(x) phi_k(x)
//! ```
//!
//! on a 1-D interval, computes principal eigenpairs and Collatz-Wielandt
//! bounds, and brackets the generalized principal eigenvalue between the
//! principal eigenvalues of monotone lower/upper control operators obtained
//! by diagonal perturbation of the coefficient matrix field. On top of the
//! spectral machinery it ships explicit time stepping with comparison
//! diagnostics, monotone equilibrium iteration from ordered upper/lower
//! solutions, and a catalog of ecological/epidemiological models whose
//! persistence-vs-extinction threshold is decided by the sign of the
//! bracketed eigenvalue.

pub mod control;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod expr;
pub mod field;
pub mod grid;
pub mod kernel;
pub mod models;
pub mod operator;
pub mod spectral;
pub mod state;

pub use error::CoreError;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CoreError>;
