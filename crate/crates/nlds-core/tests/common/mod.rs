//! Shared fixtures for the integration suites.

use nalgebra::DMatrix;
use nlds_core::grid::{build_grid, SpatialGrid};
use nlds_core::kernel::{BoundaryMode, KernelSpec};
use nlds_core::models::WnvParams;
use nlds_core::operator::ComponentDispersal;

pub fn unit_grid(resolution: usize) -> SpatialGrid {
    build_grid((0.0, 1.0), resolution).expect("unit grid")
}

pub fn neumann_gaussian(d: f64, width: f64) -> ComponentDispersal {
    ComponentDispersal::new(
        KernelSpec::gaussian(width).expect("width"),
        BoundaryMode::neumann(d),
    )
}

pub fn mat2(a: f64, b: f64, c: f64, d: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[a, b, c, d])
}

/// Constant-coefficient epidemic fixture with unit birth/crowding rates and
/// transmission `ell` in both directions.
pub fn wnv_unit_fixture(grid: &SpatialGrid, ell: f64) -> WnvParams {
    WnvParams::constant(
        grid,
        1.0,
        1.0,
        0.0,
        0.0,
        1.0,
        1.0,
        ell,
        ell,
        neumann_gaussian(1.0, 0.08),
        neumann_gaussian(1.0, 0.08),
    )
}
