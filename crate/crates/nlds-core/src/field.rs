//! Coefficient matrix fields `B(x)` and their spectral-bound samples.
//!
//! Cooperative matrices (nonnegative off-diagonals) have a real spectral
//! bound `s(B)` attained with a nonnegative eigenvector; shifting by
//! `c = 1 + max |b_ii|` turns the bound into the Perron root of an
//! entrywise-nonnegative matrix, which power iteration brackets from both
//! sides through its Rayleigh-type quotients.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::grid::{quad_integrate, SpatialGrid};
use crate::{CoreError, Result};

/// Entries with magnitude below this are treated as structural zeros when
/// testing irreducibility.
pub const ZERO_PATTERN_TOL: f64 = 1e-14;

/// Power-iteration tolerance on the quotient spread.
const PF_TOL: f64 = 1e-12;
const PF_MAX_ITER: usize = 100_000;

/// A node-indexed field of `n x n` real matrices.
#[derive(Debug, Clone)]
pub struct MatrixField {
    n: usize,
    samples: Vec<DMatrix<f64>>,
}

impl MatrixField {
    /// Samples a matrix-valued function over the grid nodes.
    pub fn from_fn(grid: &SpatialGrid, n: usize, eval: impl Fn(f64) -> DMatrix<f64>) -> Self {
        let samples = grid
            .nodes
            .iter()
            .map(|&x| {
                let b = eval(x);
                assert_eq!(b.nrows(), n, "matrix field evaluator returned wrong size");
                assert_eq!(b.ncols(), n, "matrix field evaluator returned wrong size");
                b
            })
            .collect();
        MatrixField { n, samples }
    }

    /// A field that is the same matrix at every node.
    pub fn constant(matrix: DMatrix<f64>, nodes: usize) -> Self {
        let n = matrix.nrows();
        assert_eq!(n, matrix.ncols());
        MatrixField {
            n,
            samples: vec![matrix; nodes],
        }
    }

    pub fn from_samples(samples: Vec<DMatrix<f64>>) -> Result<Self> {
        let n = samples
            .first()
            .map(|b| b.nrows())
            .ok_or_else(|| CoreError::InvalidArgument("empty matrix field".into()))?;
        for b in &samples {
            if b.nrows() != n || b.ncols() != n {
                return Err(CoreError::DimensionMismatch {
                    expected: n,
                    got: b.nrows(),
                    context: "matrix field sample".into(),
                });
            }
        }
        Ok(MatrixField { n, samples })
    }

    /// Scalar (1x1) field from node samples.
    pub fn scalar(values: &[f64]) -> Self {
        MatrixField {
            n: 1,
            samples: values
                .iter()
                .map(|&v| DMatrix::from_element(1, 1, v))
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn at(&self, node: usize) -> &DMatrix<f64> {
        &self.samples[node]
    }

    pub fn samples(&self) -> &[DMatrix<f64>] {
        &self.samples
    }

    /// Applies an entrywise transformation at every node.
    pub fn map(&self, f: impl Fn(usize, &DMatrix<f64>) -> DMatrix<f64>) -> MatrixField {
        MatrixField {
            n: self.n,
            samples: self
                .samples
                .iter()
                .enumerate()
                .map(|(m, b)| f(m, b))
                .collect(),
        }
    }

    /// Adds `shift(m)` to the diagonal at every node.
    pub fn shift_diagonal(&self, shift: impl Fn(usize) -> f64) -> MatrixField {
        self.map(|m, b| {
            let mut out = b.clone();
            let s = shift(m);
            for i in 0..self.n {
                out[(i, i)] += s;
            }
            out
        })
    }

    /// True when every node sample is cooperative.
    pub fn is_cooperative(&self) -> bool {
        self.samples.iter().all(|b| check_cooperative(b))
    }

    /// First node whose sample violates cooperativity, with the offending
    /// entry, if any.
    pub fn cooperativity_violation(&self) -> Option<(usize, usize, usize, f64)> {
        for (m, b) in self.samples.iter().enumerate() {
            for i in 0..self.n {
                for k in 0..self.n {
                    if i != k && b[(i, k)] < 0.0 {
                        return Some((m, i, k, b[(i, k)]));
                    }
                }
            }
        }
        None
    }

    /// Max entrywise variation between adjacent nodes divided by spacing.
    /// Recorded as a continuity proxy, never enforced.
    pub fn lipschitz_estimate(&self, grid: &SpatialGrid) -> f64 {
        let h = grid.spacing();
        self.samples
            .windows(2)
            .map(|w| {
                let mut d = 0.0_f64;
                for i in 0..self.n {
                    for k in 0..self.n {
                        d = d.max((w[1][(i, k)] - w[0][(i, k)]).abs());
                    }
                }
                d / h
            })
            .fold(0.0, f64::max)
    }
}

/// True iff every off-diagonal entry is nonnegative.
pub fn check_cooperative(matrix: &DMatrix<f64>) -> bool {
    let n = matrix.nrows();
    for i in 0..n {
        for k in 0..n {
            if i != k && matrix[(i, k)] < 0.0 {
                return false;
            }
        }
    }
    true
}

/// True iff the directed graph of the off-diagonal nonzero pattern is
/// strongly connected; `n = 1` counts as irreducible.
pub fn check_irreducible(matrix: &DMatrix<f64>) -> bool {
    let n = matrix.nrows();
    if n == 1 {
        return true;
    }
    let edge = |i: usize, k: usize| i != k && matrix[(i, k)].abs() > ZERO_PATTERN_TOL;
    let reaches_all = |transpose: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for k in 0..n {
                let connected = if transpose { edge(k, i) } else { edge(i, k) };
                if connected && !seen[k] {
                    seen[k] = true;
                    stack.push(k);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reaches_all(false) && reaches_all(true)
}

/// Spectral bound `s(B)` of a cooperative matrix: the largest real part of
/// its eigenvalues, computed as `rho(B + cI) - c` with the shift making
/// `B + cI` entrywise nonnegative.
pub fn spectral_bound(matrix: &DMatrix<f64>) -> Result<f64> {
    spectral_bound_with_vector(matrix).map(|(s, _)| s)
}

/// Spectral bound together with a nonnegative eigenvector (sup-norm 1).
pub fn spectral_bound_with_vector(matrix: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    let n = matrix.nrows();
    if n != matrix.ncols() {
        return Err(CoreError::DimensionMismatch {
            expected: n,
            got: matrix.ncols(),
            context: "spectral_bound".into(),
        });
    }
    for i in 0..n {
        for k in 0..n {
            if i != k && matrix[(i, k)] < 0.0 {
                return Err(CoreError::NotCooperative {
                    row: i,
                    col: k,
                    value: matrix[(i, k)],
                });
            }
        }
    }
    if n == 1 {
        return Ok((matrix[(0, 0)], DVector::from_element(1, 1.0)));
    }
    let c = 1.0 + (0..n).map(|i| matrix[(i, i)].abs()).fold(0.0, f64::max);
    let shifted = {
        let mut s = matrix.clone();
        for i in 0..n {
            s[(i, i)] += c;
        }
        s
    };
    match perron_root(&shifted, PF_TOL, PF_MAX_ITER) {
        Some((rho, v)) => Ok((rho - c, v)),
        None => {
            // Reducible matrices can stall power iteration; fall back to a
            // dense eigensolve and recover a nonnegative vector by a few
            // shifted inverse iterations.
            let s = dense_max_real_part(matrix)?;
            let v = inverse_iteration_vector(matrix, s).unwrap_or_else(|| uniform_vector(n));
            Ok((s, v))
        }
    }
}

/// Perron root and vector of an entrywise-nonnegative matrix via power
/// iteration, converged when the Collatz-Wielandt quotient spread of the
/// iterate drops below `tol`. Returns `None` when the spread stalls, which
/// happens for reducible patterns.
pub(crate) fn perron_root(
    matrix: &DMatrix<f64>,
    tol: f64,
    max_iter: usize,
) -> Option<(f64, DVector<f64>)> {
    perron_root_counted(matrix, tol, max_iter, None).map(|(rho, v, _)| (rho, v))
}

pub(crate) fn perron_root_counted(
    matrix: &DMatrix<f64>,
    tol: f64,
    max_iter: usize,
    warm_start: Option<&DVector<f64>>,
) -> Option<(f64, DVector<f64>, usize)> {
    let n = matrix.nrows();
    let mut x = match warm_start {
        Some(v) if v.len() == n && v.iter().all(|&t| t > 0.0) => v / v.amax(),
        _ => uniform_vector(n),
    };
    let mut last_spread = f64::INFINITY;
    let mut stalled = 0usize;
    for iter in 0..max_iter {
        let y = matrix * &x;
        let mut upper = f64::NEG_INFINITY;
        let mut lower = f64::INFINITY;
        for i in 0..n {
            if x[i] <= 0.0 {
                // Quotients need a strictly positive iterate; reducible
                // patterns can drive entries to zero.
                return None;
            }
            let q = y[i] / x[i];
            upper = upper.max(q);
            lower = lower.min(q);
        }
        let spread = upper - lower;
        let scale = upper.abs().max(1.0);
        if spread <= tol * scale {
            let rho = 0.5 * (upper + lower);
            let norm = y.amax();
            return Some((rho, y / norm, iter + 1));
        }
        // Track stagnation of the bracket; 64 iterations without meaningful
        // progress means the dominant eigenvector has nonzero quotient
        // spread in the limit (non-primitive or reducible case).
        if spread >= last_spread * (1.0 - 1e-12) {
            stalled += 1;
            if stalled > 4096 {
                return None;
            }
        } else {
            stalled = 0;
        }
        last_spread = spread;
        let norm = y.amax();
        if norm == 0.0 || !norm.is_finite() {
            return None;
        }
        x = y / norm;
    }
    None
}

fn uniform_vector(n: usize) -> DVector<f64> {
    DVector::from_element(n, 1.0)
}

/// Max real part over a dense eigensolve; the oracle path.
pub fn dense_max_real_part(matrix: &DMatrix<f64>) -> Result<f64> {
    let eigs = matrix.clone().complex_eigenvalues();
    eigs.iter()
        .map(|z| z.re)
        .fold(None, |acc: Option<f64>, re| {
            Some(acc.map_or(re, |a| a.max(re)))
        })
        .ok_or_else(|| CoreError::EigensolverFailure("empty spectrum".into()))
}

fn inverse_iteration_vector(matrix: &DMatrix<f64>, lambda: f64) -> Option<DVector<f64>> {
    let n = matrix.nrows();
    let mut shifted = matrix.clone();
    // Small offset keeps the shifted matrix invertible.
    let offset = 1e-10 * (1.0 + lambda.abs());
    for i in 0..n {
        shifted[(i, i)] -= lambda + offset;
    }
    let lu = shifted.lu();
    let mut v = uniform_vector(n);
    for _ in 0..50 {
        let next = lu.solve(&v)?;
        let norm = next.amax();
        if norm == 0.0 || !norm.is_finite() {
            return None;
        }
        v = next / norm;
    }
    // A spectral-bound eigenvector of a cooperative matrix can be taken
    // nonnegative; fix the sign and clamp roundoff.
    let flip = if v.sum() < 0.0 { -1.0 } else { 1.0 };
    Some(v.map(|t| (flip * t).max(0.0)))
}

/// Spectral-bound samples of a field with their maximum.
#[derive(Debug, Clone)]
pub struct SpectralBoundField {
    /// `s(B(x_m))` per node.
    pub values: Vec<f64>,
    /// `eta = max_m s(B(x_m))`.
    pub eta: f64,
    /// Node attaining the maximum.
    pub argmax: usize,
    /// Number of nodes whose sample is irreducible. Condition (B) needs at
    /// least one; zero is reported, not fatal, since the witness point may
    /// sit between nodes.
    pub irreducible_nodes: usize,
}

/// Samples `s(B(x_m))` at every node and records `eta` and its arg-max.
///
/// Fails if any node violates cooperativity.
pub fn sample_field(field: &MatrixField) -> Result<SpectralBoundField> {
    if let Some((m, i, k, v)) = field.cooperativity_violation() {
        return Err(CoreError::InvalidArgument(format!(
            "field is not cooperative at node {m}: entry ({i},{k}) = {v:.3e}"
        )));
    }
    let values: Vec<f64> = field
        .samples
        .par_iter()
        .map(|b| spectral_bound(b).expect("cooperativity checked above"))
        .collect();
    let (argmax, eta) = values
        .iter()
        .enumerate()
        .fold((0usize, f64::NEG_INFINITY), |(am, best), (m, &v)| {
            if v > best {
                (m, v)
            } else {
                (am, best)
            }
        });
    let irreducible_nodes = field
        .samples
        .iter()
        .filter(|b| check_irreducible(b))
        .count();
    Ok(SpectralBoundField {
        values,
        eta,
        argmax,
        irreducible_nodes,
    })
}

/// Regularized, capped quadrature of `1 / (eta - s(B(x)))`.
///
/// A curve of these values across grid refinements that grows without bound
/// suggests the non-integrability condition under which the uncontrolled
/// operator already has a principal eigenvalue. Heuristic output only; it
/// never gates the squeeze.
pub fn l1_divergence_indicator(
    sb: &SpectralBoundField,
    grid: &SpatialGrid,
    delta_reg: f64,
    cap: f64,
) -> Result<f64> {
    let samples: Vec<f64> = sb
        .values
        .iter()
        .map(|&s| (1.0 / (sb.eta - s + delta_reg)).min(cap))
        .collect();
    quad_integrate(grid, &samples)
}

/// Default regularization for [`l1_divergence_indicator`].
pub const DIVERGENCE_DELTA_REG: f64 = 1e-12;
/// Default integrand cap for [`l1_divergence_indicator`].
pub const DIVERGENCE_CAP: f64 = 1e6;
