//! May-Nowak infection model with a source term.
//!
//! Healthy cells are supplied at rate `phi(x)` and lost to infection on
//! contact with virus; the infection threshold is read off the 2x2
//! linearization of the `(v, w)` subsystem at the infection-free state
//! `(Z, 0, 0)`, where `Z` solves the linear source equation.

use nalgebra::DMatrix;

use crate::field::MatrixField;
use crate::grid::SpatialGrid;
use crate::models::{DiscretizedModel, ModelSpec, SubhomogeneityClass};
use crate::operator::{ComponentDispersal, DiscreteOperator};
use crate::state::State;
use crate::{CoreError, Result};

/// Node-wise coefficients: decay rates `a1, a2`, infection rate `b`, virus
/// production `gamma`, source `phi`.
#[derive(Debug, Clone)]
pub struct MayNowakParams {
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
    pub b: Vec<f64>,
    pub gamma: Vec<f64>,
    pub phi: Vec<f64>,
    /// Dispersal of cells (healthy and infected share it).
    pub cells: ComponentDispersal,
    /// Dispersal of virus particles.
    pub virus: ComponentDispersal,
}

impl MayNowakParams {
    pub fn validate(&self, grid: &SpatialGrid) -> Result<()> {
        let m = grid.len();
        for (name, v) in [
            ("a1", &self.a1),
            ("a2", &self.a2),
            ("b", &self.b),
            ("gamma", &self.gamma),
            ("phi", &self.phi),
        ] {
            if v.len() != m {
                return Err(CoreError::DimensionMismatch {
                    expected: m,
                    got: v.len(),
                    context: format!("may_nowak coefficient `{name}`"),
                });
            }
            if v.iter().any(|&t| t <= 0.0) {
                return Err(CoreError::InvalidArgument(format!(
                    "may_nowak coefficient `{name}` must be positive"
                )));
            }
        }
        Ok(())
    }
}

/// The 3-component model `(u, v, w)`: healthy cells, infected cells, virus.
///
/// The source `phi` makes the reaction nonzero at the origin and the `-b u w`
/// loss breaks cooperativity, so the model is simulation-only; thresholds
/// come from [`may_nowak_infection_field`].
pub fn may_nowak(grid: &SpatialGrid, params: &MayNowakParams) -> Result<ModelSpec> {
    params.validate(grid)?;
    let p = params.clone();
    let p_jac = params.clone();
    let m = grid.len();
    // Healthy cells are capped by sup phi / inf a1; infected and virus by
    // the chained production rates.
    let u_cap = params
        .phi
        .iter()
        .zip(&params.a1)
        .map(|(&s, &a)| s / a)
        .fold(0.0_f64, f64::max);
    let w_cap = params
        .gamma
        .iter()
        .zip(&params.a2)
        .map(|(&g, &a)| g / a)
        .fold(0.0_f64, f64::max)
        * u_cap;
    let mut canonical_upper = State::zeros(3, m);
    for node in 0..m {
        canonical_upper[(0, node)] = 1.5 * u_cap;
        canonical_upper[(1, node)] = 1.5 * u_cap;
        canonical_upper[(2, node)] = 1.5 * w_cap.max(u_cap);
    }
    Ok(ModelSpec::custom(
        "may_nowak",
        vec![
            params.cells.clone(),
            params.cells.clone(),
            params.virus.clone(),
        ],
        move |node, state, out| {
            let (u, v, w) = (state[0], state[1], state[2]);
            out[0] = -p.a1[node] * u - p.b[node] * u * w + p.phi[node];
            out[1] = -p.a1[node] * v + p.b[node] * u * w;
            out[2] = -p.a2[node] * w + p.gamma[node] * v;
        },
        move |node, state, out| {
            let (u, w) = (state[0], state[2]);
            out.fill(0.0);
            out[(0, 0)] = -p_jac.a1[node] - p_jac.b[node] * w;
            out[(0, 2)] = -p_jac.b[node] * u;
            out[(1, 0)] = p_jac.b[node] * w;
            out[(1, 1)] = -p_jac.a1[node];
            out[(1, 2)] = p_jac.b[node] * u;
            out[(2, 1)] = p_jac.gamma[node];
            out[(2, 2)] = -p_jac.a2[node];
        },
        SubhomogeneityClass::None,
        false,
        canonical_upper,
    ))
}

/// Solves the linear source equation for the infection-free healthy-cell
/// density `Z`: dispersal of `Z` minus `a1 Z` plus `phi` vanishes.
pub fn may_nowak_source_equilibrium(
    grid: &SpatialGrid,
    params: &MayNowakParams,
) -> Result<State> {
    params.validate(grid)?;
    let m = grid.len();
    let field = MatrixField::scalar(&params.a1.iter().map(|&a| -a).collect::<Vec<_>>());
    let comps = [params.cells.clone()];
    let full = crate::operator::subtract_boundary_weights(grid, &comps, &field)?;
    let op = DiscreteOperator::from_b_field(grid, &comps, &full)?;
    // Solve A z = -phi.
    let rhs = nalgebra::DVector::from_iterator(m, params.phi.iter().map(|&s| -s));
    let z = op
        .matrix()
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| CoreError::EigensolverFailure("singular source equation".into()))?;
    let state = State::from_vector(1, m, z)?;
    if state.min() <= 0.0 {
        return Err(CoreError::InvalidArgument(
            "source equation produced a nonpositive solution".into(),
        ));
    }
    Ok(state)
}

/// Coefficient field of the infection subsystem `(v, w)` linearized at
/// `(Z, 0, 0)`, boundary weights included; its squeeze decides persistence.
pub fn may_nowak_infection_field(
    grid: &SpatialGrid,
    params: &MayNowakParams,
    z: &State,
) -> Result<MatrixField> {
    params.validate(grid)?;
    let spec = may_nowak(grid, params)?;
    let disc = DiscretizedModel::new(spec, grid.clone())?;
    let samples = (0..grid.len())
        .map(|node| {
            DMatrix::from_row_slice(
                2,
                2,
                &[
                    -params.a1[node] - disc.boundary_weights(1)[node],
                    params.b[node] * z[(0, node)],
                    params.gamma[node],
                    -params.a2[node] - disc.boundary_weights(2)[node],
                ],
            )
        })
        .collect();
    MatrixField::from_samples(samples)
}
