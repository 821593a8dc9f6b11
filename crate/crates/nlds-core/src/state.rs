//! Component-major state vectors over a grid.

use nalgebra::DVector;

use crate::{CoreError, Result};

/// An `n x M` field stored component-major: entry `(i, m)` of component `i`
/// at node `m` lives at flat index `i * M + m`, matching the block layout of
/// the assembled operators.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    n: usize,
    m: usize,
    data: DVector<f64>,
}

impl State {
    pub fn zeros(n: usize, m: usize) -> Self {
        State {
            n,
            m,
            data: DVector::zeros(n * m),
        }
    }

    pub fn constant(n: usize, m: usize, value: f64) -> Self {
        State {
            n,
            m,
            data: DVector::from_element(n * m, value),
        }
    }

    /// Builds a state with one constant value per component.
    pub fn from_component_constants(m: usize, values: &[f64]) -> Self {
        let n = values.len();
        let mut s = State::zeros(n, m);
        for (i, &v) in values.iter().enumerate() {
            s.component_mut(i).fill(v);
        }
        s
    }

    pub fn from_vector(n: usize, m: usize, data: DVector<f64>) -> Result<Self> {
        if data.len() != n * m {
            return Err(CoreError::DimensionMismatch {
                expected: n * m,
                got: data.len(),
                context: "state vector".into(),
            });
        }
        Ok(State { n, m, data })
    }

    /// Samples one closure per component over the grid nodes.
    pub fn from_fns(nodes: &[f64], fns: &[&dyn Fn(f64) -> f64]) -> Self {
        let n = fns.len();
        let m = nodes.len();
        let mut s = State::zeros(n, m);
        for (i, f) in fns.iter().enumerate() {
            for (j, &x) in nodes.iter().enumerate() {
                s[(i, j)] = f(x);
            }
        }
        s
    }

    pub fn components(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> usize {
        self.m
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.data
    }

    pub fn as_vector_mut(&mut self) -> &mut DVector<f64> {
        &mut self.data
    }

    pub fn component(&self, i: usize) -> &[f64] {
        &self.data.as_slice()[i * self.m..(i + 1) * self.m]
    }

    pub fn component_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data.as_mut_slice()[i * self.m..(i + 1) * self.m]
    }

    /// Gathers the state at one node across all components.
    pub fn at_node(&self, node: usize, out: &mut [f64]) {
        for i in 0..self.n {
            out[i] = self.data[i * self.m + node];
        }
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |a, &v| a.max(v.abs()))
    }

    /// `max |self - other|`.
    pub fn sup_distance(&self, other: &State) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .fold(0.0_f64, |a, (&u, &v)| a.max((u - v).abs()))
    }

    /// Entrywise `self <= other + slack`.
    pub fn le_within(&self, other: &State, slack: f64) -> bool {
        self.data
            .iter()
            .zip(other.data.iter())
            .all(|(&u, &v)| u <= v + slack)
    }

    pub fn scale(&self, factor: f64) -> State {
        State {
            n: self.n,
            m: self.m,
            data: &self.data * factor,
        }
    }

    pub fn is_nonnegative(&self, slack: f64) -> bool {
        self.data.iter().all(|&v| v >= -slack)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }
}

impl std::ops::Index<(usize, usize)> for State {
    type Output = f64;

    fn index(&self, (i, m): (usize, usize)) -> &f64 {
        &self.data[i * self.m + m]
    }
}

impl std::ops::IndexMut<(usize, usize)> for State {
    fn index_mut(&mut self, (i, m): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.m + m]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_component_major() {
        let mut s = State::zeros(2, 3);
        s[(1, 2)] = 7.0;
        assert_eq!(s.as_vector()[5], 7.0);
        assert_eq!(s.component(1), &[0.0, 0.0, 7.0]);
    }

    #[test]
    fn node_gather() {
        let s = State::from_component_constants(4, &[1.0, 2.0, 3.0]);
        let mut u = [0.0; 3];
        s.at_node(2, &mut u);
        assert_eq!(u, [1.0, 2.0, 3.0]);
    }

    #[test]
    fn ordering_with_slack() {
        let a = State::constant(1, 4, 1.0);
        let b = State::constant(1, 4, 1.0 - 1e-12);
        assert!(a.le_within(&b, 1e-10));
        assert!(!a.le_within(&b, 1e-14));
    }
}
