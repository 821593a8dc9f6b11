//! West Nile virus model: full 4-component system, reduction to the
//! infected pair, and the pointwise algebraic quadratic.
//!
//! The full system is not cooperative, but the totals `H = H_u + H_i` and
//! `V = V_u + V_i` satisfy scalar logistic-type equations. Once their
//! positive equilibria are known, the infected pair `(H_i, V_i)` obeys a
//! 2-component system that is cooperative on the order interval below
//! `(H, V)`; clamping the transmission factors makes it cooperative
//! everywhere without changing solutions below the totals.

use crate::equilibrium::{canonical_lower_solution, monotone_iterate, OrderedPair};
use crate::field::MatrixField;
use crate::grid::SpatialGrid;
use crate::models::{logistic_type, DiscretizedModel, ModelSpec, SubhomogeneityClass};
use crate::operator::ComponentDispersal;
use crate::state::State;
use crate::{CoreError, Result};

/// Node-wise coefficients of the 4-component system.
#[derive(Debug, Clone)]
pub struct WnvParams {
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
    pub mu1: Vec<f64>,
    pub mu2: Vec<f64>,
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    pub ell1: Vec<f64>,
    pub ell2: Vec<f64>,
    /// Dispersal of both bird components.
    pub host: ComponentDispersal,
    /// Dispersal of both mosquito components.
    pub vector: ComponentDispersal,
}

impl WnvParams {
    /// Constant-coefficient parameters.
    #[allow(clippy::too_many_arguments)]
    pub fn constant(
        grid: &SpatialGrid,
        a1: f64,
        a2: f64,
        mu1: f64,
        mu2: f64,
        c1: f64,
        c2: f64,
        ell1: f64,
        ell2: f64,
        host: ComponentDispersal,
        vector: ComponentDispersal,
    ) -> Self {
        let m = grid.len();
        WnvParams {
            a1: vec![a1; m],
            a2: vec![a2; m],
            mu1: vec![mu1; m],
            mu2: vec![mu2; m],
            c1: vec![c1; m],
            c2: vec![c2; m],
            ell1: vec![ell1; m],
            ell2: vec![ell2; m],
            host,
            vector,
        }
    }

    pub fn validate(&self, grid: &SpatialGrid) -> Result<()> {
        let m = grid.len();
        for (name, v) in [
            ("a1", &self.a1),
            ("a2", &self.a2),
            ("mu1", &self.mu1),
            ("mu2", &self.mu2),
            ("c1", &self.c1),
            ("c2", &self.c2),
            ("ell1", &self.ell1),
            ("ell2", &self.ell2),
        ] {
            if v.len() != m {
                return Err(CoreError::DimensionMismatch {
                    expected: m,
                    got: v.len(),
                    context: format!("wnv coefficient `{name}`"),
                });
            }
        }
        for node in 0..m {
            if self.a1[node] <= 0.0 || self.a2[node] <= 0.0 {
                return Err(CoreError::InvalidArgument(format!(
                    "birth rates must be positive (node {node})"
                )));
            }
            if self.c1[node] <= 0.0 || self.c2[node] <= 0.0 {
                return Err(CoreError::InvalidArgument(format!(
                    "crowding rates must be positive (node {node})"
                )));
            }
            if self.mu1[node] < 0.0
                || self.mu2[node] < 0.0
                || self.ell1[node] < 0.0
                || self.ell2[node] < 0.0
            {
                return Err(CoreError::InvalidArgument(format!(
                    "death and transmission rates must be nonnegative (node {node})"
                )));
            }
        }
        if !(0..m).any(|node| self.ell1[node] > 0.0 && self.ell2[node] > 0.0) {
            return Err(CoreError::InvalidArgument(
                "transmission requires a node where both ell1 and ell2 are positive".into(),
            ));
        }
        Ok(())
    }

    /// Growth coefficient of the total-population equation for component
    /// pair `k` (1 = birds, 2 = mosquitoes): `a_k - mu_k`; the boundary
    /// weight enters through the dispersal, not here.
    fn total_growth(&self, k: usize) -> Vec<f64> {
        let (a, mu) = if k == 1 {
            (&self.a1, &self.mu1)
        } else {
            (&self.a2, &self.mu2)
        };
        a.iter().zip(mu).map(|(&av, &mv)| av - mv).collect()
    }

    /// Scalar logistic-type model for the total population of pair `k`.
    pub fn total_model(&self, grid: &SpatialGrid, k: usize) -> ModelSpec {
        let growth = self.total_growth(k);
        let (c, disp) = if k == 1 {
            (&self.c1, &self.host)
        } else {
            (&self.c2, &self.vector)
        };
        let mut spec = logistic_type(grid, &growth, c, disp.kernel.clone(), disp.boundary);
        spec.name = format!("wnv_total_{k}");
        spec
    }
}

/// The full 4-component model `(H_u, H_i, V_u, V_i)`.
///
/// Not cooperative: susceptible components lose mass to infection at a rate
/// proportional to the infected ones. It is integrated directly; all
/// cooperative-theory diagnostics run on the reduced pair instead.
pub fn wnv_full(grid: &SpatialGrid, params: &WnvParams) -> Result<ModelSpec> {
    params.validate(grid)?;
    let p = params.clone();
    let p_jac = params.clone();
    let m = grid.len();
    let cap1 = cap_total(&params.a1, &params.mu1, &params.c1);
    let cap2 = cap_total(&params.a2, &params.mu2, &params.c2);
    let mut canonical_upper = State::zeros(4, m);
    for node in 0..m {
        canonical_upper[(0, node)] = cap1;
        canonical_upper[(1, node)] = cap1;
        canonical_upper[(2, node)] = cap2;
        canonical_upper[(3, node)] = cap2;
    }
    Ok(ModelSpec::custom(
        "wnv",
        vec![
            params.host.clone(),
            params.host.clone(),
            params.vector.clone(),
            params.vector.clone(),
        ],
        move |node, u, out| {
            let (hu, hi, vu, vi) = (u[0], u[1], u[2], u[3]);
            let h = hu + hi;
            let v = vu + vi;
            out[0] = p.a1[node] * h - p.mu1[node] * hu - p.c1[node] * h * hu
                - p.ell1[node] * hu * vi;
            out[1] = p.ell1[node] * hu * vi - p.mu1[node] * hi - p.c1[node] * h * hi;
            out[2] = p.a2[node] * v - p.mu2[node] * vu - p.c2[node] * v * vu
                - p.ell2[node] * hi * vu;
            out[3] = p.ell2[node] * hi * vu - p.mu2[node] * vi - p.c2[node] * v * vi;
        },
        move |node, u, out| {
            let (hu, hi, vu, vi) = (u[0], u[1], u[2], u[3]);
            let (a1, mu1, c1, l1) = (
                p_jac.a1[node],
                p_jac.mu1[node],
                p_jac.c1[node],
                p_jac.ell1[node],
            );
            let (a2, mu2, c2, l2) = (
                p_jac.a2[node],
                p_jac.mu2[node],
                p_jac.c2[node],
                p_jac.ell2[node],
            );
            out.fill(0.0);
            out[(0, 0)] = a1 - mu1 - c1 * (2.0 * hu + hi) - l1 * vi;
            out[(0, 1)] = a1 - c1 * hu;
            out[(0, 3)] = -l1 * hu;
            out[(1, 0)] = l1 * vi - c1 * hi;
            out[(1, 1)] = -mu1 - c1 * (hu + 2.0 * hi);
            out[(1, 3)] = l1 * hu;
            out[(2, 1)] = -l2 * vu;
            out[(2, 2)] = a2 - mu2 - c2 * (2.0 * vu + vi) - l2 * hi;
            out[(2, 3)] = a2 - c2 * vu;
            out[(3, 1)] = l2 * vu;
            out[(3, 2)] = l2 * hi - c2 * vi;
            out[(3, 3)] = -mu2 - c2 * (vu + 2.0 * vi);
        },
        SubhomogeneityClass::None,
        false,
        canonical_upper,
    ))
}

fn cap_total(a: &[f64], mu: &[f64], c: &[f64]) -> f64 {
    a.iter()
        .zip(mu)
        .zip(c)
        .map(|((&av, &mv), &cv)| ((av - mv).max(0.0)) / cv)
        .fold(0.0_f64, f64::max)
        .max(1e-6)
        * 1.5
}

/// Positive equilibria `H`, `V` of the total-population equations, found by
/// monotone iteration from the canonical bracket.
pub fn wnv_equilibrium_fields(
    grid: &SpatialGrid,
    params: &WnvParams,
    tol: f64,
) -> Result<(State, State)> {
    params.validate(grid)?;
    let mut out = Vec::with_capacity(2);
    for k in [1, 2] {
        let disc = DiscretizedModel::new(params.total_model(grid, k), grid.clone())?;
        let lower = canonical_lower_solution(&disc).ok_or_else(|| {
            CoreError::IterationFailure(format!(
                "total population {k} admits no positive lower solution; its threshold \
                 eigenvalue is not positive"
            ))
        })?;
        let pair = OrderedPair::new(&disc, lower, disc.spec.canonical_upper.clone(), 1e-8)?;
        let eq = monotone_iterate(&disc, &pair, 20_000, tol)?;
        out.push(eq.u);
    }
    let v = out.pop().expect("two equilibria");
    let h = out.pop().expect("two equilibria");
    Ok((h, v))
}

/// Output of the reduction: the infected-pair models and the linearization
/// field that drives the squeeze.
#[derive(Debug, Clone)]
pub struct WnvReduction {
    /// Infected-pair model with raw transmission factors; cooperative only
    /// below `(H, V)`.
    pub plain: ModelSpec,
    /// Clamped transmission factors `(H - U)^+`, cooperative on the whole
    /// positive cone and equal to `plain` below the totals.
    pub truncated: ModelSpec,
    /// Full coefficient field of the linearization at zero (boundary
    /// weights on the diagonal), ready for the squeeze.
    pub linearization: MatrixField,
    pub host_total: State,
    pub vector_total: State,
}

/// Reduces the system to the infected pair `(H_i, V_i)` around positive
/// total-population equilibria `H`, `V`.
pub fn wnv_reduce(
    grid: &SpatialGrid,
    params: &WnvParams,
    host_total: &State,
    vector_total: &State,
    tol: f64,
) -> Result<WnvReduction> {
    params.validate(grid)?;
    for (k, total) in [(1, host_total), (2, vector_total)] {
        if total.components() != 1 || total.nodes() != grid.len() {
            return Err(CoreError::DimensionMismatch {
                expected: grid.len(),
                got: total.nodes(),
                context: format!("total population {k}"),
            });
        }
        if total.min() <= 0.0 {
            return Err(CoreError::InvalidArgument(format!(
                "total population {k} must be strictly positive"
            )));
        }
        let disc = DiscretizedModel::new(params.total_model(grid, k), grid.clone())?;
        let res = disc.rhs(total).sup_norm();
        if res > tol {
            return Err(CoreError::InvalidArgument(format!(
                "total population {k} is not an equilibrium: residual {res:.3e} > {tol:.3e}"
            )));
        }
    }

    let m = grid.len();
    let h: Vec<f64> = host_total.component(0).to_vec();
    let v: Vec<f64> = vector_total.component(0).to_vec();
    let dispersal = vec![params.host.clone(), params.vector.clone()];
    let canonical_upper = {
        let mut s = State::zeros(2, m);
        for node in 0..m {
            s[(0, node)] = h[node];
            s[(1, node)] = v[node];
        }
        s
    };

    let make = |clamped: bool| -> ModelSpec {
        let p = params.clone();
        let p_jac = params.clone();
        let (h_r, v_r) = (h.clone(), v.clone());
        let (h_j, v_j) = (h.clone(), v.clone());
        ModelSpec::custom(
            if clamped { "wnv_reduced_truncated" } else { "wnv_reduced" },
            dispersal.clone(),
            move |node, u, out| {
                let (hi, vi) = (u[0], u[1]);
                let gap_h = if clamped {
                    (h_r[node] - hi).max(0.0)
                } else {
                    h_r[node] - hi
                };
                let gap_v = if clamped {
                    (v_r[node] - vi).max(0.0)
                } else {
                    v_r[node] - vi
                };
                out[0] = -(p.mu1[node] + p.c1[node] * h_r[node]) * hi
                    + p.ell1[node] * gap_h * vi;
                out[1] = -(p.mu2[node] + p.c2[node] * v_r[node]) * vi
                    + p.ell2[node] * gap_v * hi;
            },
            move |node, u, out| {
                let (hi, vi) = (u[0], u[1]);
                let active_h = !clamped || hi < h_j[node];
                let active_v = !clamped || vi < v_j[node];
                let gap_h = if active_h { h_j[node] - hi } else { 0.0 };
                let gap_v = if active_v { v_j[node] - vi } else { 0.0 };
                out[(0, 0)] = -(p_jac.mu1[node] + p_jac.c1[node] * h_j[node])
                    - if active_h { p_jac.ell1[node] * vi } else { 0.0 };
                out[(0, 1)] = p_jac.ell1[node] * gap_h;
                out[(1, 0)] = p_jac.ell2[node] * gap_v;
                out[(1, 1)] = -(p_jac.mu2[node] + p_jac.c2[node] * v_j[node])
                    - if active_v { p_jac.ell2[node] * hi } else { 0.0 };
            },
            if clamped {
                SubhomogeneityClass::Sub
            } else {
                SubhomogeneityClass::Strong
            },
            clamped,
            canonical_upper.clone(),
        )
    };

    let plain = make(false);
    let truncated = make(true);
    let linearization = DiscretizedModel::new(truncated.clone(), grid.clone())?.linearize_at_zero();
    Ok(WnvReduction {
        plain,
        truncated,
        linearization,
        host_total: host_total.clone(),
        vector_total: vector_total.clone(),
    })
}

/// Unique positive root of the pointwise algebraic system
///
/// ```text
/// h1 - r1 v1 + p1 (q1 - v1) v2 = 0
/// h2 - r2 v2 + p2 (q2 - v2) v1 = 0
/// ```
///
/// obtained from the quadratic
/// `p2 (r1 + p1 q2) v1^2 + (r1 r2 + p1 h2 - p1 p2 q1 q2 - p2 h1) v1
///  - (r2 h1 + p1 q1 h2) = 0`,
/// or `None` when no positive solution exists. The branch `v1 = q1` forces
/// `v2 = (h2 + p2 q1 q2) / (r2 + p2 q1)` from the second equation.
#[allow(clippy::too_many_arguments)]
pub fn wnv_pointwise_quadratic(
    h1: f64,
    h2: f64,
    r1: f64,
    r2: f64,
    p1: f64,
    p2: f64,
    q1: f64,
    q2: f64,
) -> Result<Option<(f64, f64)>> {
    if h1 < 0.0 || h2 < 0.0 {
        return Err(CoreError::InvalidArgument(
            "frozen dispersal terms must be nonnegative".into(),
        ));
    }
    if r1 <= 0.0 || r2 <= 0.0 || p1 <= 0.0 || p2 <= 0.0 || q1 <= 0.0 || q2 <= 0.0 {
        return Err(CoreError::InvalidArgument(
            "decay, transmission and capacity coefficients must be positive".into(),
        ));
    }
    let a = p2 * (r1 + p1 * q2);
    let b = r1 * r2 + p1 * h2 - p1 * p2 * q1 * q2 - p2 * h1;
    let c = -(r2 * h1 + p1 * q1 * h2);

    let v1 = if c < 0.0 {
        // One sign change: exactly one positive root. Pick the stable
        // quadratic branch.
        let disc = (b * b - 4.0 * a * c).sqrt();
        if b <= 0.0 {
            (-b + disc) / (2.0 * a)
        } else {
            -2.0 * c / (b + disc)
        }
    } else {
        // c == 0 (h1 = h2 = 0): roots are 0 and -b/a.
        if b < 0.0 {
            -b / a
        } else {
            return Ok(None);
        }
    };
    if !(v1 > 0.0) {
        return Ok(None);
    }
    let v2 = if (v1 - q1).abs() <= 1e-12 * (1.0 + q1) {
        (h2 + p2 * q1 * q2) / (r2 + p2 * q1)
    } else {
        (r1 * v1 - h1) / (p1 * (q1 - v1))
    };
    if v2 > 0.0 {
        Ok(Some((v1, v2)))
    } else {
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use crate::kernel::{BoundaryMode, KernelSpec};

    fn unit_fixture(grid: &SpatialGrid, ell: f64) -> WnvParams {
        let k = KernelSpec::gaussian(0.08).unwrap();
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
            ComponentDispersal::new(k.clone(), BoundaryMode::neumann(1.0)),
            ComponentDispersal::new(k, BoundaryMode::neumann(1.0)),
        )
    }

    #[test]
    fn full_model_reaction_vanishes_at_zero() {
        let grid = build_grid((0.0, 1.0), 8).unwrap();
        let spec = wnv_full(&grid, &unit_fixture(&grid, 2.0)).unwrap();
        let mut out = [1.0; 4];
        spec.reaction_at(3, &[0.0; 4], &mut out);
        assert_eq!(out, [0.0; 4]);
    }

    #[test]
    fn full_model_jacobian_matches_fd() {
        let grid = build_grid((0.0, 1.0), 6).unwrap();
        let spec = wnv_full(&grid, &unit_fixture(&grid, 2.0)).unwrap();
        let disc =
            crate::models::DiscretizedModel::new(spec, grid).unwrap();
        let mismatch = disc.jacobian_fd_mismatch(&[
            vec![0.0, 0.0, 0.0, 0.0],
            vec![0.5, 0.1, 0.6, 0.2],
            vec![1.2, 0.8, 0.3, 0.9],
        ]);
        assert!(mismatch < 1e-6, "mismatch {mismatch}");
    }

    #[test]
    fn constant_totals_solve_the_scalar_equations() {
        let grid = build_grid((0.0, 1.0), 30).unwrap();
        let params = unit_fixture(&grid, 2.0);
        let (h, v) = wnv_equilibrium_fields(&grid, &params, 1e-10).unwrap();
        // Constant Neumann-symmetric fixture: H = V = (a - mu)/c = 1.
        for node in 0..30 {
            assert!((h[(0, node)] - 1.0).abs() < 1e-7, "H at {node}");
            assert!((v[(0, node)] - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn reduction_linearization_is_the_2x2_closed_form() {
        let grid = build_grid((0.0, 1.0), 24).unwrap();
        let params = unit_fixture(&grid, 2.0);
        let (h, v) = wnv_equilibrium_fields(&grid, &params, 1e-9).unwrap();
        let red = wnv_reduce(&grid, &params, &h, &v, 1e-7).unwrap();
        // On constants the multiplication part is [[-1, 2], [2, -1]] before
        // boundary weights; the diagonal additionally carries -d*.
        let disc = DiscretizedModel::new(red.truncated.clone(), grid.clone()).unwrap();
        for node in [0, 12, 23] {
            let b = red.linearization.at(node);
            let dstar0 = disc.boundary_weights(0)[node];
            let dstar1 = disc.boundary_weights(1)[node];
            assert!((b[(0, 0)] + 1.0 + dstar0).abs() < 1e-7);
            assert!((b[(0, 1)] - 2.0).abs() < 1e-7);
            assert!((b[(1, 0)] - 2.0).abs() < 1e-7);
            assert!((b[(1, 1)] + 1.0 + dstar1).abs() < 1e-7);
        }
    }

    #[test]
    fn truncation_only_matters_above_the_totals() {
        let grid = build_grid((0.0, 1.0), 10).unwrap();
        let params = unit_fixture(&grid, 2.0);
        let (h, v) = wnv_equilibrium_fields(&grid, &params, 1e-9).unwrap();
        let red = wnv_reduce(&grid, &params, &h, &v, 1e-7).unwrap();
        let mut below = [0.0; 2];
        let mut below_t = [0.0; 2];
        red.plain.reaction_at(4, &[0.3, 0.3], &mut below);
        red.truncated.reaction_at(4, &[0.3, 0.3], &mut below_t);
        assert_eq!(below, below_t);

        // Above H the clamp kills the transmission gain.
        let mut above_t = [0.0; 2];
        red.truncated.reaction_at(4, &[1.5, 0.3], &mut above_t);
        let expected = -(params.mu1[4] + params.c1[4] * h[(0, 4)]) * 1.5;
        assert!((above_t[0] - expected).abs() < 1e-9);
    }

    #[test]
    fn reduce_rejects_non_equilibrium_totals() {
        let grid = build_grid((0.0, 1.0), 10).unwrap();
        let params = unit_fixture(&grid, 2.0);
        let bogus = State::constant(1, 10, 0.37);
        assert!(wnv_reduce(&grid, &params, &bogus, &bogus, 1e-8).is_err());
    }

    #[test]
    fn pointwise_quadratic_unit_case() {
        // h = 0, r = p = 1, q = 2: v1 = 1, v2 = 1 solves both equations.
        let got = wnv_pointwise_quadratic(0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 2.0, 2.0)
            .unwrap()
            .expect("positive root");
        assert!((got.0 - 1.0).abs() < 1e-14);
        assert!((got.1 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pointwise_quadratic_subthreshold_has_no_root() {
        // q1 q2 p1 p2 < r1 r2 with no forcing: only the zero solution.
        let got =
            wnv_pointwise_quadratic(0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.5, 0.5).unwrap();
        assert!(got.is_none());
    }

    #[test]
    fn pointwise_quadratic_rejects_bad_signs() {
        assert!(wnv_pointwise_quadratic(-0.1, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(wnv_pointwise_quadratic(0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn pointwise_quadratic_v1_equals_q1_branch() {
        // Choosing h1 = r1 q1 puts the root exactly at q1.
        let (r1, q1) = (1.3, 0.8);
        let got = wnv_pointwise_quadratic(r1 * q1, 0.5, r1, 1.0, 1.0, 1.0, q1, 2.0)
            .unwrap()
            .expect("root");
        assert!((got.0 - q1).abs() < 1e-10);
        let v2_expected = (0.5 + 1.0 * q1 * 2.0) / (1.0 + 1.0 * q1);
        assert!((got.1 - v2_expected).abs() < 1e-10);
        // Residuals of the original system vanish.
        let (v1, v2) = got;
        let res1 = r1 * q1 - r1 * v1 + 1.0 * (q1 - v1) * v2;
        let res2 = 0.5 - 1.0 * v2 + 1.0 * (2.0 - v2) * v1;
        assert!(res1.abs() < 1e-10 && res2.abs() < 1e-10);
    }
}
