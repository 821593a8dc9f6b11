//! Dense assembly of the nonlocal dispersal operator.
//!
//! Component-major block layout: the `(i, k)` block of the `(nM) x (nM)`
//! matrix couples component `k` into component `i`. Diagonal blocks carry
//! the weighted kernel matrix `d_i K_i` (omitted for degenerate components)
//! plus a diagonal multiplication part; off-diagonal blocks are purely
//! diagonal multiplications.

use nalgebra::{DMatrix, DVector};

use crate::field::MatrixField;
use crate::grid::SpatialGrid;
use crate::kernel::{boundary_weights, kernel_matrix, BoundaryMode, KernelSpec};
use crate::state::State;
use crate::{CoreError, Result};

/// Kernel and boundary data for one component.
#[derive(Debug, Clone)]
pub struct ComponentDispersal {
    pub kernel: KernelSpec,
    pub boundary: BoundaryMode,
}

impl ComponentDispersal {
    pub fn new(kernel: KernelSpec, boundary: BoundaryMode) -> Self {
        ComponentDispersal { kernel, boundary }
    }
}

/// Assembled dense discretization of the operator.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    n: usize,
    m: usize,
    matrix: DMatrix<f64>,
    degenerate: Vec<usize>,
    /// Cached shift making `A + cI` entrywise nonnegative.
    shift: f64,
}

impl DiscreteOperator {
    /// Assembles `d_i K_i - diag(d*_i) + diag-blocks(reaction)`.
    ///
    /// `reaction` holds the multiplication coefficients before boundary
    /// weights are applied; the boundary weight of each non-degenerate
    /// component is subtracted from its diagonal here.
    pub fn assemble(
        grid: &SpatialGrid,
        comps: &[ComponentDispersal],
        reaction: &MatrixField,
    ) -> Result<DiscreteOperator> {
        let full = subtract_boundary_weights(grid, comps, reaction)?;
        Self::from_b_field(grid, comps, &full)
    }

    /// Assembles `d_i K_i + diag-blocks(field)` where `field` already
    /// carries the boundary weight on its diagonal (the linearized
    /// coefficient field). Control fields go through here.
    pub fn from_b_field(
        grid: &SpatialGrid,
        comps: &[ComponentDispersal],
        field: &MatrixField,
    ) -> Result<DiscreteOperator> {
        let n = comps.len();
        let m = grid.len();
        if field.n() != n {
            return Err(CoreError::DimensionMismatch {
                expected: n,
                got: field.n(),
                context: "field components vs dispersal components".into(),
            });
        }
        if field.len() != m {
            return Err(CoreError::DimensionMismatch {
                expected: m,
                got: field.len(),
                context: "field nodes vs grid".into(),
            });
        }
        for (i, comp) in comps.iter().enumerate() {
            if comp.boundary.d < 0.0 {
                return Err(CoreError::InvalidArgument(format!(
                    "component {i}: negative dispersal rate {}",
                    comp.boundary.d
                )));
            }
        }

        let mut matrix = DMatrix::zeros(n * m, n * m);
        let mut degenerate = Vec::new();
        for (i, comp) in comps.iter().enumerate() {
            if comp.boundary.is_degenerate() {
                degenerate.push(i);
            } else {
                let kmat = kernel_matrix(&comp.kernel, grid)?;
                let d = comp.boundary.d;
                for r in 0..m {
                    for c in 0..m {
                        matrix[(i * m + r, i * m + c)] = d * kmat[(r, c)] * grid.weights[c];
                    }
                }
            }
        }
        for node in 0..m {
            let b = field.at(node);
            for i in 0..n {
                for k in 0..n {
                    matrix[(i * m + node, k * m + node)] += b[(i, k)];
                }
            }
        }
        let shift = 1.0 + (0..n * m)
            .map(|r| matrix[(r, r)].abs())
            .fold(0.0, f64::max);
        Ok(DiscreteOperator {
            n,
            m,
            matrix,
            degenerate,
            shift,
        })
    }

    pub fn components(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.n * self.m
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn degenerate_set(&self) -> &[usize] {
        &self.degenerate
    }

    /// Cached `c` with `A + cI >= 0` entrywise, valid for cooperative
    /// multiplication fields.
    pub fn nonneg_shift(&self) -> f64 {
        self.shift
    }

    pub fn apply(&self, state: &State) -> State {
        let out = &self.matrix * state.as_vector();
        State::from_vector(self.n, self.m, out).expect("shape preserved")
    }

    pub fn apply_vec(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.matrix * v
    }

    /// Smallest off-diagonal entry; cooperativity of the discretization
    /// means this is `>= 0` up to roundoff.
    pub fn min_off_diagonal(&self) -> f64 {
        let dim = self.dim();
        let mut min = f64::INFINITY;
        for r in 0..dim {
            for c in 0..dim {
                if r != c {
                    min = min.min(self.matrix[(r, c)]);
                }
            }
        }
        min
    }
}

/// Subtracts each component's boundary weight from the diagonal of the
/// reaction field, producing the full coefficient field of the operator.
pub fn subtract_boundary_weights(
    grid: &SpatialGrid,
    comps: &[ComponentDispersal],
    reaction: &MatrixField,
) -> Result<MatrixField> {
    let n = comps.len();
    if reaction.n() != n {
        return Err(CoreError::DimensionMismatch {
            expected: n,
            got: reaction.n(),
            context: "reaction field components".into(),
        });
    }
    let mut dstar = Vec::with_capacity(n);
    for comp in comps {
        dstar.push(boundary_weights(&comp.boundary, &comp.kernel, grid)?);
    }
    Ok(reaction.map(|m, b| {
        let mut out = b.clone();
        for (i, w) in dstar.iter().enumerate() {
            out[(i, i)] -= w[m];
        }
        out
    }))
}
