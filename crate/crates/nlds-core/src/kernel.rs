//! Dispersal kernels and boundary weights.
//!
//! Analytic families are normalized over the whole line, not over the
//! domain, so row masses over a bounded interval drop below one near the
//! boundary. That mass loss is what a Dirichlet-type weight turns into
//! genuine decay; nothing here renormalizes it away.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::DMatrix;

use crate::grid::{quad_integrate, SpatialGrid};
use crate::{CoreError, Result};

/// Dispersal kernel `J(x, y)`.
#[derive(Debug, Clone)]
pub enum KernelSpec {
    /// `exp(-(x-y)^2 / (2 w^2)) / (w sqrt(2 pi))`.
    Gaussian { width: f64 },
    /// Hat profile `(w - |x-y|) / w^2` supported on `|x-y| <= w`.
    Tent { width: f64 },
    /// Constant `1 / (2 w)` on `|x-y| <= w`.
    UniformWindow { width: f64 },
    /// Dense node matrix `values[m][j] = J(x_m, x_j)` for externally
    /// supplied data; `symmetric` records whether the table is symmetric.
    Tabulated {
        values: DMatrix<f64>,
        symmetric: bool,
    },
}

impl KernelSpec {
    pub fn gaussian(width: f64) -> Result<Self> {
        check_width(width)?;
        Ok(KernelSpec::Gaussian { width })
    }

    pub fn tent(width: f64) -> Result<Self> {
        check_width(width)?;
        Ok(KernelSpec::Tent { width })
    }

    pub fn uniform_window(width: f64) -> Result<Self> {
        check_width(width)?;
        Ok(KernelSpec::UniformWindow { width })
    }

    /// Wraps a dense node table, verifying nonnegativity and the positive
    /// diagonal required by the strong maximum principle.
    pub fn tabulated(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() != values.ncols() {
            return Err(CoreError::InvalidKernel(format!(
                "tabulated kernel must be square, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        for m in 0..values.nrows() {
            for j in 0..values.ncols() {
                if values[(m, j)] < 0.0 {
                    return Err(CoreError::InvalidKernel(format!(
                        "negative entry {:.3e} at ({m},{j})",
                        values[(m, j)]
                    )));
                }
            }
            if values[(m, m)] <= 0.0 {
                return Err(CoreError::InvalidKernel(format!(
                    "diagonal must be positive, J(x_{m},x_{m}) = {:.3e}",
                    values[(m, m)]
                )));
            }
        }
        let symmetric = (0..values.nrows()).all(|m| {
            (0..m).all(|j| (values[(m, j)] - values[(j, m)]).abs() <= 1e-14)
        });
        Ok(KernelSpec::Tabulated { values, symmetric })
    }

    /// Loads a tabulated kernel from CSV with header `x,y,value`, row-major
    /// over the grid's node set.
    pub fn from_csv(path: impl AsRef<Path>, grid: &SpatialGrid) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        let m = grid.len();
        let mut values = DMatrix::zeros(m, m);
        let mut count = 0usize;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if lineno == 0 && line.starts_with("x,") {
                continue; // header
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(CoreError::InvalidKernel(format!(
                    "line {}: expected `x,y,value`, got `{line}`",
                    lineno + 1
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.trim().parse().map_err(|_| {
                    CoreError::InvalidKernel(format!("line {}: bad number `{s}`", lineno + 1))
                })
            };
            let (x, y, v) = (parse(fields[0])?, parse(fields[1])?, parse(fields[2])?);
            let row = count / m;
            let col = count % m;
            if row >= m {
                return Err(CoreError::InvalidKernel(format!(
                    "more than {} rows of data",
                    m * m
                )));
            }
            let tol = grid.spacing() * 1e-6;
            if (x - grid.nodes[row]).abs() > tol || (y - grid.nodes[col]).abs() > tol {
                return Err(CoreError::InvalidKernel(format!(
                    "line {}: node ({x},{y}) does not match grid node ({},{})",
                    lineno + 1,
                    grid.nodes[row],
                    grid.nodes[col]
                )));
            }
            values[(row, col)] = v;
            count += 1;
        }
        if count != m * m {
            return Err(CoreError::DimensionMismatch {
                expected: m * m,
                got: count,
                context: "tabulated kernel rows".into(),
            });
        }
        Self::tabulated(values)
    }

    /// True when `J(x,y) = J(y,x)` by construction.
    pub fn is_symmetric(&self) -> bool {
        match self {
            KernelSpec::Tabulated { symmetric, .. } => *symmetric,
            _ => true,
        }
    }
}

fn check_width(width: f64) -> Result<()> {
    if width > 0.0 && width.is_finite() {
        Ok(())
    } else {
        Err(CoreError::InvalidKernel(format!(
            "width must be positive, got {width}"
        )))
    }
}

/// Pointwise kernel density for the closed-form families.
///
/// Tabulated kernels carry values on node pairs only; evaluate them through
/// [`kernel_matrix`].
///
/// # Panics
///
/// Panics when called on a tabulated kernel.
pub fn eval_kernel(spec: &KernelSpec, x: f64, y: f64) -> f64 {
    match spec {
        KernelSpec::Gaussian { width } => {
            let z = (x - y) / width;
            (-0.5 * z * z).exp() / (width * (2.0 * PI).sqrt())
        }
        KernelSpec::Tent { width } => {
            let r = (x - y).abs();
            if r >= *width {
                0.0
            } else {
                (width - r) / (width * width)
            }
        }
        KernelSpec::UniformWindow { width } => {
            if (x - y).abs() <= *width {
                0.5 / width
            } else {
                0.0
            }
        }
        KernelSpec::Tabulated { .. } => {
            panic!("tabulated kernels are defined on grid nodes; use kernel_matrix")
        }
    }
}

/// Dense node matrix `J(x_m, x_j)`, unweighted.
pub fn kernel_matrix(spec: &KernelSpec, grid: &SpatialGrid) -> Result<DMatrix<f64>> {
    let m = grid.len();
    match spec {
        KernelSpec::Tabulated { values, .. } => {
            if values.nrows() != m {
                return Err(CoreError::DimensionMismatch {
                    expected: m,
                    got: values.nrows(),
                    context: "tabulated kernel vs grid".into(),
                });
            }
            Ok(values.clone())
        }
        _ => {
            let mut out = DMatrix::zeros(m, m);
            for r in 0..m {
                for c in 0..m {
                    out[(r, c)] = eval_kernel(spec, grid.nodes[r], grid.nodes[c]);
                }
            }
            Ok(out)
        }
    }
}

/// Column mass `j(x) = \int_Omega J(y, x) dy` at a grid node.
pub fn column_mass(spec: &KernelSpec, grid: &SpatialGrid, x: f64) -> Result<f64> {
    let col: Vec<f64> = match spec {
        KernelSpec::Tabulated { values, .. } => {
            let idx = nearest_node(grid, x)?;
            (0..grid.len()).map(|r| values[(r, idx)]).collect()
        }
        _ => grid.nodes.iter().map(|&y| eval_kernel(spec, y, x)).collect(),
    };
    quad_integrate(grid, &col)
}

fn nearest_node(grid: &SpatialGrid, x: f64) -> Result<usize> {
    let tol = grid.spacing() * 1e-6;
    grid.nodes
        .iter()
        .position(|&n| (n - x).abs() <= tol)
        .ok_or_else(|| CoreError::InvalidArgument(format!("{x} is not a grid node")))
}

/// Boundary condition for one component, carrying its dispersal rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryKind {
    Dirichlet,
    Neumann,
}

/// A component's boundary mode together with its dispersal rate `d >= 0`;
/// `d = 0` marks a degenerate (non-dispersing) component.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryMode {
    pub kind: BoundaryKind,
    pub d: f64,
}

impl BoundaryMode {
    pub fn dirichlet(d: f64) -> Self {
        BoundaryMode {
            kind: BoundaryKind::Dirichlet,
            d,
        }
    }

    pub fn neumann(d: f64) -> Self {
        BoundaryMode {
            kind: BoundaryKind::Neumann,
            d,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.d == 0.0
    }
}

/// Boundary weight `d*(x)`: the Dirichlet mode uses the constant rate, the
/// Neumann mode scales it by the column mass; degenerate components get 0.
pub fn boundary_weight(
    mode: &BoundaryMode,
    spec: &KernelSpec,
    grid: &SpatialGrid,
    x: f64,
) -> Result<f64> {
    if mode.is_degenerate() {
        return Ok(0.0);
    }
    match mode.kind {
        BoundaryKind::Dirichlet => Ok(mode.d),
        BoundaryKind::Neumann => Ok(mode.d * column_mass(spec, grid, x)?),
    }
}

/// Boundary weights at every node.
pub fn boundary_weights(
    mode: &BoundaryMode,
    spec: &KernelSpec,
    grid: &SpatialGrid,
) -> Result<Vec<f64>> {
    grid.nodes
        .iter()
        .map(|&x| boundary_weight(mode, spec, grid, x))
        .collect()
}
