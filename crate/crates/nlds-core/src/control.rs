//! Lower and upper control fields bracketing a coefficient field.
//!
//! Only diagonals are perturbed, so both controls keep the off-diagonal
//! (cooperative, irreducible) structure of the original field. On the set
//! where `s(B(x))` sits within `eps` of its maximum `eta`, the perturbation
//! flattens the spectral bound exactly; elsewhere it shifts by a constant.
//! The two controls differ by `3 eps I` at every node, so their operator
//! eigenvalues bracket the generalized principal eigenvalue with a certified
//! gap of `3 eps`.

use crate::field::{MatrixField, SpectralBoundField};
use crate::{CoreError, Result};

/// The `eps`-indexed pair of control fields with their mask.
#[derive(Debug, Clone)]
pub struct ControlPair {
    pub eps: f64,
    pub eta: f64,
    /// `mask[m]` is true when `s(B(x_m)) >= eta - eps`.
    pub omega_eps_mask: Vec<bool>,
    pub lower_field: MatrixField,
    pub upper_field: MatrixField,
}

/// Node mask of the near-maximum set `{x : s(B(x)) >= eta - eps}`.
///
/// Ties are included, matching the closedness of the set.
pub fn omega_eps(sb: &SpectralBoundField, eps: f64) -> Result<Vec<bool>> {
    check_eps(eps)?;
    Ok(sb.values.iter().map(|&s| s >= sb.eta - eps).collect())
}

/// Lower control: `B + (eta - 2 eps - s(B)) I` on the mask, `B - eps I` off
/// it. Its spectral bound equals `eta - 2 eps` on the mask and stays
/// strictly below off it; the diagonal drops by at least `eps` everywhere.
pub fn lower_control(field: &MatrixField, sb: &SpectralBoundField, eps: f64) -> Result<MatrixField> {
    check_eps(eps)?;
    check_lengths(field, sb)?;
    let mask = omega_eps(sb, eps)?;
    Ok(field.shift_diagonal(|m| {
        if mask[m] {
            sb.eta - 2.0 * eps - sb.values[m]
        } else {
            -eps
        }
    }))
}

/// Upper control: `B + (eps + eta - s(B)) I` on the mask, `B + 2 eps I` off
/// it. Its spectral bound equals `eta + eps` on the mask; the diagonal rises
/// by at least `eps` everywhere.
pub fn upper_control(field: &MatrixField, sb: &SpectralBoundField, eps: f64) -> Result<MatrixField> {
    check_eps(eps)?;
    check_lengths(field, sb)?;
    let mask = omega_eps(sb, eps)?;
    Ok(field.shift_diagonal(|m| {
        if mask[m] {
            eps + sb.eta - sb.values[m]
        } else {
            2.0 * eps
        }
    }))
}

/// Builds both controls at once.
pub fn build_controls(
    field: &MatrixField,
    sb: &SpectralBoundField,
    eps: f64,
) -> Result<ControlPair> {
    Ok(ControlPair {
        eps,
        eta: sb.eta,
        omega_eps_mask: omega_eps(sb, eps)?,
        lower_field: lower_control(field, sb, eps)?,
        upper_field: upper_control(field, sb, eps)?,
    })
}

/// Geometric default schedule `eps_k = eps0 * 2^-k`, `k = 0..=levels-1`.
pub fn geometric_schedule(eps0: f64, levels: usize) -> Vec<f64> {
    (0..levels).map(|k| eps0 * 0.5_f64.powi(k as i32)).collect()
}

/// The default schedule: `0.1 * 2^-k` for `k = 0..=10`.
pub fn default_schedule() -> Vec<f64> {
    geometric_schedule(0.1, 11)
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(CoreError::InvalidArgument(format!(
            "eps must be positive, got {eps}"
        )))
    }
}

fn check_lengths(field: &MatrixField, sb: &SpectralBoundField) -> Result<()> {
    if field.len() != sb.values.len() {
        return Err(CoreError::DimensionMismatch {
            expected: field.len(),
            got: sb.values.len(),
            context: "spectral bound samples vs field".into(),
        });
    }
    Ok(())
}
