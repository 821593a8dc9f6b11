//! Midpoint quadrature grids on a bounded interval.
//!
//! Every integral over the domain is realized as a weighted sum over the
//! grid nodes, so refinement of the grid refines all operators built on it.

use crate::{CoreError, Result};

/// Quadrature discretization of a closed interval.
///
/// Composite midpoint rule: nodes sit strictly inside the interval, which
/// keeps kernel evaluation away from the endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    /// Spatial dimension; the core supports 1-D intervals only.
    pub dimension: usize,
    /// Interval endpoints `(a, b)` with `a < b`.
    pub bounds: (f64, f64),
    /// Strictly increasing quadrature nodes in `(a, b)`.
    pub nodes: Vec<f64>,
    /// Positive quadrature weights, one per node; they sum to `b - a`.
    pub weights: Vec<f64>,
}

impl SpatialGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Uniform spacing of the midpoint rule.
    pub fn spacing(&self) -> f64 {
        (self.bounds.1 - self.bounds.0) / self.len() as f64
    }

    /// Length of the interval.
    pub fn measure(&self) -> f64 {
        self.bounds.1 - self.bounds.0
    }

    /// Samples a scalar function at every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }
}

/// Builds the composite-midpoint grid with `resolution` nodes on `bounds`.
pub fn build_grid(bounds: (f64, f64), resolution: usize) -> Result<SpatialGrid> {
    let (a, b) = bounds;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(CoreError::InvalidGrid(format!(
            "degenerate interval ({a}, {b})"
        )));
    }
    if resolution < 2 {
        return Err(CoreError::InvalidGrid(format!(
            "resolution must be at least 2, got {resolution}"
        )));
    }
    let h = (b - a) / resolution as f64;
    let nodes = (0..resolution)
        .map(|m| a + (m as f64 + 0.5) * h)
        .collect();
    Ok(SpatialGrid {
        dimension: 1,
        bounds,
        nodes,
        weights: vec![h; resolution],
    })
}

/// Weighted sum realizing `\int_Omega g(y) dy` for node samples of `g`.
pub fn quad_integrate(grid: &SpatialGrid, samples: &[f64]) -> Result<f64> {
    if samples.len() != grid.len() {
        return Err(CoreError::DimensionMismatch {
            expected: grid.len(),
            got: samples.len(),
            context: "quad_integrate samples".into(),
        });
    }
    Ok(grid
        .weights
        .iter()
        .zip(samples)
        .map(|(w, s)| w * s)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn midpoint_nodes_and_weights() {
        let g = build_grid((0.0, 1.0), 4).unwrap();
        assert_eq!(g.nodes, vec![0.125, 0.375, 0.625, 0.875]);
        assert!(g.weights.iter().all(|&w| w == 0.25));
    }

    #[test]
    fn weights_sum_to_measure() {
        let g = build_grid((0.0, 2.0), 2).unwrap();
        let total: f64 = g.weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-12 * 2.0);
    }

    #[test]
    fn rejects_single_node_and_degenerate_interval() {
        assert!(build_grid((0.0, 1.0), 1).is_err());
        assert!(build_grid((1.0, 1.0), 8).is_err());
        assert!(build_grid((2.0, 1.0), 8).is_err());
    }

    #[test]
    fn integrates_constants_exactly() {
        let g = build_grid((0.0, 1.0), 10).unwrap();
        let ones = vec![1.0; g.len()];
        assert!((quad_integrate(&g, &ones).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn integrates_identity_and_sine() {
        // Oracles: antiderivatives x^2/2 and (1 - cos(pi x))/pi.
        let g = build_grid((0.0, 1.0), 100).unwrap();
        let xs = g.sample(|x| x);
        assert!((quad_integrate(&g, &xs).unwrap() - 0.5).abs() < 1e-4);

        let g = build_grid((0.0, 1.0), 200).unwrap();
        let s = g.sample(|x| (PI * x).sin());
        assert!((quad_integrate(&g, &s).unwrap() - 2.0 / PI).abs() < 1e-4);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let g = build_grid((0.0, 1.0), 10).unwrap();
        assert!(quad_integrate(&g, &[1.0; 9]).is_err());
    }

    #[test]
    fn refinement_error_ratio_is_quadratic() {
        // Midpoint rule is O(h^2); successive errors shrink by ~4.
        let exact = 2.0 / PI;
        let mut errs = Vec::new();
        for m in [50, 100, 200] {
            let g = build_grid((0.0, 1.0), m).unwrap();
            let s = g.sample(|x| (PI * x).sin());
            errs.push((quad_integrate(&g, &s).unwrap() - exact).abs());
        }
        for pair in errs.windows(2) {
            let ratio = pair[0] / pair[1];
            assert!((3.3..4.7).contains(&ratio), "ratio {ratio}");
        }
    }
}
