//! Catalog of nonlinear cooperative systems and their grid discretizations.
//!
//! A [`ModelSpec`] couples per-component dispersal data with a node-wise
//! reaction `f(x, u)` and its Jacobian. Everything downstream (time
//! stepping, equilibrium iteration, linearization for the spectral squeeze)
//! works through the [`DiscretizedModel`] built from a spec and a grid.

mod benthic;
mod capasso;
mod logistic;
mod may_nowak;
mod wnv;

pub use benthic::{benthic_drift, BenthicParams};
pub use capasso::{capasso_maddalena, CapassoParams, SaturatingGain};
pub use logistic::{linear_scalar, logistic, logistic_type};
pub use may_nowak::{
    may_nowak, may_nowak_infection_field, may_nowak_source_equilibrium, MayNowakParams,
};
pub use wnv::{
    wnv_equilibrium_fields, wnv_full, wnv_pointwise_quadratic, wnv_reduce, WnvParams,
    WnvReduction,
};

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::field::MatrixField;
use crate::grid::SpatialGrid;
use crate::kernel::{boundary_weights, column_mass, kernel_matrix};
use crate::operator::ComponentDispersal;
use crate::state::State;
use crate::{CoreError, Result};

/// Empirical subhomogeneity class of a reaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SubhomogeneityClass {
    /// Some sample violates `f(x, du) >= d f(x, u)`.
    None,
    /// `f(x, du) >= d f(x, u)` with equality allowed (linear reactions).
    Sub,
    /// `f(x, du) > d f(x, u)` in the vector order (some component strict).
    Strict,
    /// Every component strictly dominates.
    Strong,
}

impl std::fmt::Display for SubhomogeneityClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SubhomogeneityClass::None => "none",
            SubhomogeneityClass::Sub => "sub",
            SubhomogeneityClass::Strict => "strict",
            SubhomogeneityClass::Strong => "strong",
        };
        f.write_str(s)
    }
}

type ReactionFn = dyn Fn(usize, &[f64], &mut [f64]) + Send + Sync;
type JacobianFn = dyn Fn(usize, &[f64], &mut DMatrix<f64>) + Send + Sync;

/// A named nonlinear system bound to a grid.
#[derive(Clone)]
pub struct ModelSpec {
    pub name: String,
    pub n: usize,
    pub dispersal: Vec<ComponentDispersal>,
    /// Declared class used by diagnostics; verified empirically by the
    /// subhomogeneity check.
    pub subhomogeneity: SubhomogeneityClass,
    /// False for systems (like the full epidemic model) whose reaction has
    /// negative off-diagonal partials somewhere on the positive cone; such
    /// models are integrated but excluded from cooperative-only machinery.
    pub cooperative: bool,
    /// Constant-in-time upper solution used to seed monotone iteration.
    pub canonical_upper: State,
    reaction: Arc<ReactionFn>,
    jacobian: Arc<JacobianFn>,
}

impl std::fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModelSpec")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("subhomogeneity", &self.subhomogeneity)
            .field("cooperative", &self.cooperative)
            .finish()
    }
}

impl ModelSpec {
    /// Assembles a custom model from closures.
    pub fn custom(
        name: impl Into<String>,
        dispersal: Vec<ComponentDispersal>,
        reaction: impl Fn(usize, &[f64], &mut [f64]) + Send + Sync + 'static,
        jacobian: impl Fn(usize, &[f64], &mut DMatrix<f64>) + Send + Sync + 'static,
        subhomogeneity: SubhomogeneityClass,
        cooperative: bool,
        canonical_upper: State,
    ) -> Self {
        let n = dispersal.len();
        ModelSpec {
            name: name.into(),
            n,
            dispersal,
            subhomogeneity,
            cooperative,
            canonical_upper,
            reaction: Arc::new(reaction),
            jacobian: Arc::new(jacobian),
        }
    }

    /// Component indices with zero dispersal rate.
    pub fn degenerate_set(&self) -> Vec<usize> {
        self.dispersal
            .iter()
            .enumerate()
            .filter(|(_, c)| c.boundary.is_degenerate())
            .map(|(i, _)| i)
            .collect()
    }

    /// Reaction value at one node.
    pub fn reaction_at(&self, node: usize, u: &[f64], out: &mut [f64]) {
        (self.reaction)(node, u, out)
    }

    /// Jacobian of the reaction at one node.
    pub fn jacobian_at(&self, node: usize, u: &[f64], out: &mut DMatrix<f64>) {
        (self.jacobian)(node, u, out)
    }

    /// Centered finite-difference Jacobian, the oracle for analytic ones.
    pub fn fd_jacobian_at(&self, node: usize, u: &[f64], step: f64) -> DMatrix<f64> {
        let n = self.n;
        let mut out = DMatrix::zeros(n, n);
        let mut up = u.to_vec();
        let mut dn = u.to_vec();
        let mut fp = vec![0.0; n];
        let mut fm = vec![0.0; n];
        for k in 0..n {
            let h = step * (1.0 + u[k].abs());
            up[k] = u[k] + h;
            dn[k] = u[k] - h;
            self.reaction_at(node, &up, &mut fp);
            self.reaction_at(node, &dn, &mut fm);
            for i in 0..n {
                out[(i, k)] = (fp[i] - fm[i]) / (2.0 * h);
            }
            up[k] = u[k];
            dn[k] = u[k];
        }
        out
    }
}

/// A model bound to a grid with its kernel matrices and boundary weights
/// precomputed.
pub struct DiscretizedModel {
    pub spec: ModelSpec,
    pub grid: SpatialGrid,
    /// Weighted kernel matrix `d_i K_i W` per component; `None` for
    /// degenerate components.
    kernels: Vec<Option<DMatrix<f64>>>,
    /// Boundary weights `d*_i(x_m)` per component.
    dstar: Vec<Vec<f64>>,
    /// `max_m` column mass per component (1 for degenerate ones).
    max_column_mass: Vec<f64>,
}

impl DiscretizedModel {
    pub fn new(spec: ModelSpec, grid: SpatialGrid) -> Result<Self> {
        let mut kernels = Vec::with_capacity(spec.n);
        let mut dstar = Vec::with_capacity(spec.n);
        let mut max_column_mass = Vec::with_capacity(spec.n);
        for comp in &spec.dispersal {
            if comp.boundary.is_degenerate() {
                kernels.push(None);
                dstar.push(vec![0.0; grid.len()]);
                max_column_mass.push(1.0);
            } else {
                let mut k = kernel_matrix(&comp.kernel, &grid)?;
                for r in 0..grid.len() {
                    for c in 0..grid.len() {
                        k[(r, c)] *= comp.boundary.d * grid.weights[c];
                    }
                }
                kernels.push(Some(k));
                dstar.push(boundary_weights(&comp.boundary, &comp.kernel, &grid)?);
                let cm = grid
                    .nodes
                    .iter()
                    .map(|&x| column_mass(&comp.kernel, &grid, x).unwrap_or(1.0))
                    .fold(0.0, f64::max);
                max_column_mass.push(cm);
            }
        }
        Ok(DiscretizedModel {
            spec,
            grid,
            kernels,
            dstar,
            max_column_mass,
        })
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn nodes(&self) -> usize {
        self.grid.len()
    }

    pub fn boundary_weights(&self, component: usize) -> &[f64] {
        &self.dstar[component]
    }

    /// Dispersal part `d_i K_i u_i - d*_i u_i` of the right-hand side.
    pub fn dispersal_apply(&self, u: &State, out: &mut State) {
        let m = self.nodes();
        for i in 0..self.n() {
            let ui = u.component(i);
            let oi = out.component_mut(i);
            match &self.kernels[i] {
                Some(k) => {
                    for r in 0..m {
                        let mut acc = 0.0;
                        for c in 0..m {
                            acc += k[(r, c)] * ui[c];
                        }
                        oi[r] = acc - self.dstar[i][r] * ui[r];
                    }
                }
                None => oi.fill(0.0),
            }
        }
    }

    /// Reaction part of the right-hand side.
    pub fn reaction_apply(&self, u: &State, out: &mut State) {
        let n = self.n();
        let m = self.nodes();
        let mut u_node = vec![0.0; n];
        let mut f_node = vec![0.0; n];
        for node in 0..m {
            u.at_node(node, &mut u_node);
            self.spec.reaction_at(node, &u_node, &mut f_node);
            for i in 0..n {
                out[(i, node)] = f_node[i];
            }
        }
    }

    /// Full right-hand side: dispersal plus reaction. At an equilibrium
    /// this is the residual.
    pub fn rhs(&self, u: &State) -> State {
        let mut disp = State::zeros(self.n(), self.nodes());
        self.dispersal_apply(u, &mut disp);
        let mut reac = State::zeros(self.n(), self.nodes());
        self.reaction_apply(u, &mut reac);
        let mut out = disp;
        out.as_vector_mut().axpy(1.0, reac.as_vector(), 1.0);
        out
    }

    /// Coefficient field of the linearization at zero: off-diagonals are
    /// the reaction partials, diagonals additionally absorb the boundary
    /// weight.
    pub fn linearize_at_zero(&self) -> MatrixField {
        let n = self.n();
        let zeros = vec![0.0; n];
        let samples = (0..self.nodes())
            .map(|node| {
                let mut b = DMatrix::zeros(n, n);
                self.spec.jacobian_at(node, &zeros, &mut b);
                for i in 0..n {
                    b[(i, i)] -= self.dstar[i][node];
                }
                b
            })
            .collect();
        MatrixField::from_samples(samples).expect("nonempty grid")
    }

    /// Sup-norm bound on the reaction Jacobian sampled per node at a few
    /// states inside `[0, cap]`. An estimate, not a certificate.
    pub fn lipschitz_estimate(&self, cap: &State) -> f64 {
        let n = self.n();
        let mut jac = DMatrix::zeros(n, n);
        let mut bound = 0.0_f64;
        let mut u_node = vec![0.0; n];
        let mut cap_node = vec![0.0; n];
        for node in 0..self.nodes() {
            cap.at_node(node, &mut cap_node);
            for scale in [0.0, 0.5, 1.0] {
                for i in 0..n {
                    u_node[i] = cap_node[i] * scale;
                }
                self.spec.jacobian_at(node, &u_node, &mut jac);
                for i in 0..n {
                    let row: f64 = (0..n).map(|k| jac[(i, k)].abs()).sum();
                    bound = bound.max(row);
                }
            }
        }
        bound
    }

    /// Largest stable explicit step: `0.9 / L` with `L` the dispersal
    /// plus reaction Lipschitz estimate over `[0, cap]`.
    pub fn stability_dt(&self, cap: &State) -> f64 {
        let mut l = 0.0_f64;
        for (i, comp) in self.spec.dispersal.iter().enumerate() {
            l = l.max(comp.boundary.d * (1.0 + self.max_column_mass[i]));
        }
        l += self.lipschitz_estimate(cap);
        if l <= 0.0 {
            1.0
        } else {
            0.9 / l
        }
    }

    /// State-independent envelope for step-size checks: the canonical upper
    /// solution joined with the given state.
    pub fn cap_with(&self, u0: &State) -> State {
        let mut cap = self.spec.canonical_upper.clone();
        for i in 0..self.n() {
            for m in 0..self.nodes() {
                if u0[(i, m)] > cap[(i, m)] {
                    cap[(i, m)] = u0[(i, m)];
                }
            }
        }
        cap
    }

    /// Verifies the Jacobian against centered finite differences on the
    /// given states; returns the worst relative mismatch.
    pub fn jacobian_fd_mismatch(&self, states: &[Vec<f64>]) -> f64 {
        let n = self.n();
        let mut jac = DMatrix::zeros(n, n);
        let mut worst = 0.0_f64;
        for u in states {
            for node in [0, self.nodes() / 2, self.nodes() - 1] {
                self.spec.jacobian_at(node, u, &mut jac);
                let fd = self.spec.fd_jacobian_at(node, u, 1e-6);
                for i in 0..n {
                    for k in 0..n {
                        let scale = 1.0 + jac[(i, k)].abs();
                        worst = worst.max((jac[(i, k)] - fd[(i, k)]).abs() / scale);
                    }
                }
            }
        }
        worst
    }
}

/// Samples scalar node data from a function of `x`.
pub fn sample_coefficient(grid: &SpatialGrid, f: impl Fn(f64) -> f64) -> Vec<f64> {
    grid.sample(f)
}

/// Validates that node data matches the grid length.
pub fn check_coefficient_len(grid: &SpatialGrid, data: &[f64], name: &str) -> Result<()> {
    if data.len() != grid.len() {
        return Err(CoreError::DimensionMismatch {
            expected: grid.len(),
            got: data.len(),
            context: format!("coefficient `{name}`"),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use crate::kernel::{BoundaryMode, KernelSpec};

    #[test]
    fn linearize_at_zero_logistic_dirichlet_cancels() {
        // a = 1 with unit Dirichlet weight: diagonal of the linearization
        // vanishes.
        let grid = build_grid((0.0, 1.0), 10).unwrap();
        let spec = logistic(
            &grid,
            &vec![1.0; 10],
            KernelSpec::gaussian(0.1).unwrap(),
            BoundaryMode::dirichlet(1.0),
        );
        let disc = DiscretizedModel::new(spec, grid).unwrap();
        let field = disc.linearize_at_zero();
        for m in 0..10 {
            assert!(field.at(m)[(0, 0)].abs() < 1e-14);
        }
    }

    #[test]
    fn fd_jacobian_agrees_for_logistic() {
        let grid = build_grid((0.0, 1.0), 8).unwrap();
        let a = grid.sample(|x| 1.0 + x);
        let spec = logistic(
            &grid,
            &a,
            KernelSpec::gaussian(0.1).unwrap(),
            BoundaryMode::neumann(1.0),
        );
        let disc = DiscretizedModel::new(spec, grid).unwrap();
        let mismatch = disc.jacobian_fd_mismatch(&[vec![0.0], vec![0.4], vec![1.7]]);
        assert!(mismatch < 1e-6, "mismatch {mismatch}");
    }
}
