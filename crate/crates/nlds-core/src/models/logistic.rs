//! Scalar logistic-type models and the linear scalar model.

use crate::grid::SpatialGrid;
use crate::kernel::{BoundaryMode, KernelSpec};
use crate::operator::ComponentDispersal;
use crate::state::State;

use super::{ModelSpec, SubhomogeneityClass};

/// Logistic growth `f(x, u) = u (a(x) - u)` with carrying field `a > 0`.
pub fn logistic(
    grid: &SpatialGrid,
    a: &[f64],
    kernel: KernelSpec,
    boundary: BoundaryMode,
) -> ModelSpec {
    assert_eq!(a.len(), grid.len(), "carrying field length");
    assert!(a.iter().all(|&v| v > 0.0), "carrying field must be positive");
    let ones = vec![1.0; a.len()];
    logistic_type_named("logistic", grid, a, &ones, kernel, boundary)
}

/// Generalized logistic `f(x, u) = a(x) u - c(x) u^2` with `c > 0`.
///
/// The total-population equations of the epidemic models reduce to this
/// form, with `a` already carrying any death-rate correction.
pub fn logistic_type(
    grid: &SpatialGrid,
    a: &[f64],
    c: &[f64],
    kernel: KernelSpec,
    boundary: BoundaryMode,
) -> ModelSpec {
    logistic_type_named("logistic_type", grid, a, c, kernel, boundary)
}

fn logistic_type_named(
    name: &str,
    grid: &SpatialGrid,
    a: &[f64],
    c: &[f64],
    kernel: KernelSpec,
    boundary: BoundaryMode,
) -> ModelSpec {
    assert_eq!(a.len(), grid.len());
    assert_eq!(c.len(), grid.len());
    assert!(c.iter().all(|&v| v > 0.0), "quadratic loss must be positive");
    let a_vec = a.to_vec();
    let c_vec = c.to_vec();
    let a_jac = a_vec.clone();
    let c_jac = c_vec.clone();
    // Upper solution: above a/c the reaction is negative, and for symmetric
    // kernels the dispersal of a constant is nonpositive in the weak spots;
    // 1.5x the max keeps a margin.
    let cap = a
        .iter()
        .zip(c)
        .map(|(&av, &cv)| av / cv)
        .fold(0.0_f64, f64::max);
    let canonical_upper = State::constant(1, grid.len(), 1.5 * cap.max(1e-6));
    ModelSpec::custom(
        name,
        vec![ComponentDispersal::new(kernel, boundary)],
        move |node, u, out| {
            out[0] = a_vec[node] * u[0] - c_vec[node] * u[0] * u[0];
        },
        move |node, u, out| {
            out[(0, 0)] = a_jac[node] - 2.0 * c_jac[node] * u[0];
        },
        SubhomogeneityClass::Strict,
        true,
        canonical_upper,
    )
}

/// Linear scalar reaction `f(x, u) = b(x) u`; subhomogeneous with equality,
/// so it sits in the `Sub` class.
pub fn linear_scalar(
    grid: &SpatialGrid,
    b: &[f64],
    kernel: KernelSpec,
    boundary: BoundaryMode,
) -> ModelSpec {
    assert_eq!(b.len(), grid.len());
    let b_vec = b.to_vec();
    let b_jac = b_vec.clone();
    ModelSpec::custom(
        "linear",
        vec![ComponentDispersal::new(kernel, boundary)],
        move |node, u, out| {
            out[0] = b_vec[node] * u[0];
        },
        move |node, _u, out| {
            out[(0, 0)] = b_jac[node];
        },
        SubhomogeneityClass::Sub,
        true,
        State::constant(1, grid.len(), 1.0),
    )
}
