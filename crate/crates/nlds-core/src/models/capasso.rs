//! Capasso-Maddalena bacteria/infective-population model.
//!
//! Two cooperative components: infective agents `u` fed by the infected
//! population `v` through `gamma_12`, and `v` driven by a saturating gain
//! `G(x, u)` whose ratio `G/z` strictly decreases, which caps growth and
//! makes the reaction strictly subhomogeneous.

use std::sync::Arc;

use crate::grid::SpatialGrid;
use crate::models::{ModelSpec, SubhomogeneityClass};
use crate::operator::ComponentDispersal;
use crate::state::State;
use crate::{CoreError, Result};

/// Node-wise coefficients of the system.
#[derive(Debug, Clone)]
pub struct CapassoParams {
    pub gamma11: Vec<f64>,
    pub gamma12: Vec<f64>,
    pub gamma22: Vec<f64>,
    pub agents: ComponentDispersal,
    pub infectives: ComponentDispersal,
}

impl CapassoParams {
    pub fn validate(&self, grid: &SpatialGrid) -> Result<()> {
        let m = grid.len();
        for (name, v) in [
            ("gamma11", &self.gamma11),
            ("gamma12", &self.gamma12),
            ("gamma22", &self.gamma22),
        ] {
            if v.len() != m {
                return Err(CoreError::DimensionMismatch {
                    expected: m,
                    got: v.len(),
                    context: format!("capasso coefficient `{name}`"),
                });
            }
            if v.iter().any(|&t| t <= 0.0) {
                return Err(CoreError::InvalidArgument(format!(
                    "capasso coefficient `{name}` must be positive"
                )));
            }
        }
        Ok(())
    }
}

/// Infection gain `G(x, u)` and its partial in `u`.
pub trait InfectionGain: Send + Sync {
    fn value(&self, node: usize, u: f64) -> f64;
    fn slope(&self, node: usize, u: f64) -> f64;
    /// `lim_{z->inf} G(x,z)/z`, sampled at a large argument; used by the
    /// saturation check and the upper-solution search.
    fn asymptotic_ratio(&self, node: usize) -> f64 {
        let z = 1e6;
        self.value(node, z) / z
    }
}

/// The Michaelis-Menten style gain `G(x, u) = kappa(x) u / (1 + u)`.
#[derive(Debug, Clone)]
pub struct SaturatingGain {
    pub kappa: Vec<f64>,
}

impl InfectionGain for SaturatingGain {
    fn value(&self, node: usize, u: f64) -> f64 {
        self.kappa[node] * u / (1.0 + u)
    }

    fn slope(&self, node: usize, u: f64) -> f64 {
        let d = 1.0 + u;
        self.kappa[node] / (d * d)
    }
}

/// Builds the 2-component cooperative model. The gain must satisfy the
/// sampled saturation condition: its asymptotic ratio stays below
/// `min(gamma11) min(gamma22) / max(gamma12)`; that bound also yields the
/// canonical upper solution `(C, min(gamma11)/max(gamma12) C)`.
pub fn capasso_maddalena(
    grid: &SpatialGrid,
    params: &CapassoParams,
    gain: Arc<dyn InfectionGain>,
) -> Result<ModelSpec> {
    params.validate(grid)?;
    let m = grid.len();
    let min_g11 = params.gamma11.iter().cloned().fold(f64::INFINITY, f64::min);
    let min_g22 = params.gamma22.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_g12 = params.gamma12.iter().cloned().fold(0.0_f64, f64::max);
    let bound = min_g11 * min_g22 / max_g12;
    for node in 0..m {
        let ratio = gain.asymptotic_ratio(node);
        if ratio >= bound {
            return Err(CoreError::InvalidArgument(format!(
                "gain ratio {ratio:.3e} at node {node} does not satisfy the sampled \
                 saturation bound {bound:.3e}"
            )));
        }
        if gain.value(node, 0.0).abs() > 0.0 {
            return Err(CoreError::InvalidArgument(format!(
                "gain must vanish at zero (node {node})"
            )));
        }
    }
    // Grow C until the second component's upper-solution inequality holds
    // with the ratio mu = min g11 / max g12.
    let mu = min_g11 / max_g12;
    let mut c_cap = 1.0;
    let mut ok = false;
    for _ in 0..80 {
        ok = (0..m).all(|node| {
            gain.value(node, c_cap) <= params.gamma22[node] * mu * c_cap
        });
        if ok {
            break;
        }
        c_cap *= 2.0;
    }
    if !ok {
        return Err(CoreError::InvalidArgument(
            "no constant upper solution found despite the saturation bound".into(),
        ));
    }
    let mut canonical_upper = State::zeros(2, m);
    for node in 0..m {
        canonical_upper[(0, node)] = c_cap;
        canonical_upper[(1, node)] = mu * c_cap;
    }

    let p = params.clone();
    let p_jac = params.clone();
    let gain_jac = Arc::clone(&gain);
    Ok(ModelSpec::custom(
        "capasso_maddalena",
        vec![params.agents.clone(), params.infectives.clone()],
        move |node, u, out| {
            out[0] = -p.gamma11[node] * u[0] + p.gamma12[node] * u[1];
            out[1] = -p.gamma22[node] * u[1] + gain.value(node, u[0]);
        },
        move |node, u, out| {
            out[(0, 0)] = -p_jac.gamma11[node];
            out[(0, 1)] = p_jac.gamma12[node];
            out[(1, 0)] = gain_jac.slope(node, u[0]);
            out[(1, 1)] = -p_jac.gamma22[node];
        },
        SubhomogeneityClass::Strict,
        true,
        canonical_upper,
    ))
}
