//! Benthic-drift river population model, the partially degenerate example.
//!
//! The drift component disperses through the kernel; the benthic component
//! has zero dispersal rate, so its operator row is purely local. Transfer
//! rates couple the zones: settling `sigma` moves drift mass to the bed,
//! release `mu` moves it back, scaled by the cross-sectional area ratio.

use crate::grid::SpatialGrid;
use crate::kernel::BoundaryMode;
use crate::models::{ModelSpec, SubhomogeneityClass};
use crate::operator::ComponentDispersal;
use crate::state::State;
use crate::{CoreError, Result};

/// Node-wise coefficients; growth is logistic-type `g(x, v) = r(x)(1 - v)`.
#[derive(Debug, Clone)]
pub struct BenthicParams {
    /// Benthic per-capita growth at zero density.
    pub r: Vec<f64>,
    /// Drift mortality.
    pub m_d: Vec<f64>,
    /// Benthic mortality.
    pub m_b: Vec<f64>,
    /// Settling rate (drift to bed).
    pub sigma: f64,
    /// Release rate (bed to drift).
    pub mu: f64,
    /// Cross-sectional areas of the drift and benthic zones.
    pub area_drift: Vec<f64>,
    pub area_benthic: Vec<f64>,
    /// Dispersal of the drift component.
    pub drift: ComponentDispersal,
}

impl BenthicParams {
    pub fn validate(&self, grid: &SpatialGrid) -> Result<()> {
        let m = grid.len();
        for (name, v) in [
            ("r", &self.r),
            ("m_d", &self.m_d),
            ("m_b", &self.m_b),
            ("area_drift", &self.area_drift),
            ("area_benthic", &self.area_benthic),
        ] {
            if v.len() != m {
                return Err(CoreError::DimensionMismatch {
                    expected: m,
                    got: v.len(),
                    context: format!("benthic coefficient `{name}`"),
                });
            }
        }
        let positive = |name: &str, v: &[f64]| -> Result<()> {
            if v.iter().any(|&t| t <= 0.0) {
                Err(CoreError::InvalidArgument(format!(
                    "benthic coefficient `{name}` must be positive"
                )))
            } else {
                Ok(())
            }
        };
        positive("m_d", &self.m_d)?;
        positive("m_b", &self.m_b)?;
        positive("area_drift", &self.area_drift)?;
        positive("area_benthic", &self.area_benthic)?;
        if self.sigma < 0.0 || self.mu < 0.0 {
            return Err(CoreError::InvalidArgument(
                "transfer rates must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Builds the 2-component model with degenerate benthic dispersal.
pub fn benthic_drift(grid: &SpatialGrid, params: &BenthicParams) -> Result<ModelSpec> {
    params.validate(grid)?;
    let m = grid.len();
    let p = params.clone();
    let p_jac = params.clone();
    // Benthic densities are capped by the zero of g - m_b - mu; drift by the
    // transferred release. Generous constants work for step-size estimates.
    let v_cap = 1.5;
    let u_cap = (0..m)
        .map(|node| {
            params.area_benthic[node] / params.area_drift[node] * params.mu * v_cap
                / params.m_d[node].max(1e-9)
        })
        .fold(1.0_f64, f64::max);
    let mut canonical_upper = State::zeros(2, m);
    for node in 0..m {
        canonical_upper[(0, node)] = u_cap;
        canonical_upper[(1, node)] = v_cap;
    }
    // Degenerate benthic component: zero dispersal rate, same kernel data.
    let benthic_disp = ComponentDispersal::new(
        params.drift.kernel.clone(),
        BoundaryMode {
            kind: params.drift.boundary.kind,
            d: 0.0,
        },
    );
    Ok(ModelSpec::custom(
        "benthic_drift",
        vec![params.drift.clone(), benthic_disp],
        move |node, state, out| {
            let (u, v) = (state[0], state[1]);
            let ratio_bd = p.area_benthic[node] / p.area_drift[node];
            let ratio_db = p.area_drift[node] / p.area_benthic[node];
            out[0] = -(p.m_d[node] + p.sigma) * u + ratio_bd * p.mu * v;
            out[1] = p.r[node] * (1.0 - v) * v - p.m_b[node] * v + ratio_db * p.sigma * u
                - p.mu * v;
        },
        move |node, state, out| {
            let v = state[1];
            let ratio_bd = p_jac.area_benthic[node] / p_jac.area_drift[node];
            let ratio_db = p_jac.area_drift[node] / p_jac.area_benthic[node];
            out[(0, 0)] = -(p_jac.m_d[node] + p_jac.sigma);
            out[(0, 1)] = ratio_bd * p_jac.mu;
            out[(1, 0)] = ratio_db * p_jac.sigma;
            out[(1, 1)] = p_jac.r[node] * (1.0 - 2.0 * v) - p_jac.m_b[node] - p_jac.mu;
        },
        SubhomogeneityClass::Strict,
        true,
        canonical_upper,
    ))
}
