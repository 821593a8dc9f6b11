//! Equilibria by monotone iteration from ordered upper/lower solutions,
//! plus the strong-maximum-principle, subhomogeneity, uniqueness and
//! pointwise-continuity diagnostics.
//!
//! The iteration map `U + residual(U) / kappa` is order-preserving once
//! `kappa` dominates the boundary weights and the reaction Jacobian on the
//! order interval, so the lower iterates climb, the upper iterates fall,
//! and both converge onto equilibria inside the bracket.

use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::field::MatrixField;
use crate::models::{DiscretizedModel, SubhomogeneityClass};
use crate::spectral::principal_eig;
use crate::state::State;
use crate::{CoreError, Result};

/// Entries below this are "identically zero" for the dichotomy check.
pub const POS_TOL: f64 = 1e-10;

/// Validated ordered pair of discrete lower/upper solutions.
#[derive(Debug, Clone)]
pub struct OrderedPair {
    pub lower: State,
    pub upper: State,
}

impl OrderedPair {
    /// Checks `0 << lower <= upper`, `residual(lower) >= -tol` and
    /// `residual(upper) <= tol` componentwise.
    pub fn new(disc: &DiscretizedModel, lower: State, upper: State, tol: f64) -> Result<Self> {
        if lower.min() <= 0.0 {
            return Err(CoreError::InvalidArgument(
                "lower solution must be strictly positive".into(),
            ));
        }
        if !lower.le_within(&upper, 0.0) {
            return Err(CoreError::InvalidArgument(
                "lower solution must not exceed the upper solution".into(),
            ));
        }
        let r_lo = disc.rhs(&lower);
        if r_lo.as_vector().iter().any(|&v| v < -tol) {
            return Err(CoreError::InvalidArgument(format!(
                "not a lower solution: residual reaches {:.3e}",
                r_lo.as_vector().iter().cloned().fold(0.0, f64::min)
            )));
        }
        let r_hi = disc.rhs(&upper);
        if r_hi.as_vector().iter().any(|&v| v > tol) {
            return Err(CoreError::InvalidArgument(format!(
                "not an upper solution: residual reaches {:.3e}",
                r_hi.as_vector().iter().cloned().fold(0.0, f64::max)
            )));
        }
        Ok(OrderedPair { lower, upper })
    }
}

/// Converged equilibrium with iteration diagnostics.
#[derive(Debug, Clone)]
pub struct EquilibriumResult {
    pub u: State,
    pub residual: f64,
    pub iterations_lower: usize,
    pub iterations_upper: usize,
    pub bracket_gap: f64,
}

/// Equilibrium residual: the right-hand side of the stationary problem.
pub fn residual(disc: &DiscretizedModel, u: &State) -> State {
    disc.rhs(u)
}

/// Runs the two-sided Picard iteration from the ordered pair until both
/// residuals and the bracket gap drop below `tol`.
pub fn monotone_iterate(
    disc: &DiscretizedModel,
    pair: &OrderedPair,
    max_iter: usize,
    tol: f64,
) -> Result<EquilibriumResult> {
    let mut kappa = iteration_stiffness(disc, &pair.upper);
    let order_slack = 1e-12 * (1.0 + pair.upper.sup_norm());
    'retry: for attempt in 0..4 {
        let mut lower = pair.lower.clone();
        let mut upper = pair.upper.clone();
        let mut iterations_lower = 0;
        let mut iterations_upper = 0;
        for _ in 0..max_iter {
            let r_lo = disc.rhs(&lower);
            let r_hi = disc.rhs(&upper);
            let res_lo = r_lo.sup_norm();
            let res_hi = r_hi.sup_norm();
            let gap = lower.sup_distance(&upper);
            if res_lo < tol && res_hi < tol && gap < tol {
                return Ok(EquilibriumResult {
                    residual: res_lo,
                    u: lower,
                    iterations_lower,
                    iterations_upper,
                    bracket_gap: gap,
                });
            }
            let mut next_lower = lower.clone();
            next_lower
                .as_vector_mut()
                .axpy(1.0 / kappa, r_lo.as_vector(), 1.0);
            let mut next_upper = upper.clone();
            next_upper
                .as_vector_mut()
                .axpy(1.0 / kappa, r_hi.as_vector(), 1.0);
            iterations_lower += 1;
            iterations_upper += 1;
            // Monotone bracketing: lower climbs, upper falls, order holds.
            let ok = lower.le_within(&next_lower, order_slack)
                && next_upper.le_within(&upper, order_slack)
                && next_lower.le_within(&next_upper, order_slack);
            if !ok {
                if attempt < 3 {
                    kappa *= 2.0;
                    continue 'retry;
                }
                return Err(CoreError::IterationFailure(
                    "bracket order violated; iteration stiffness underestimated".into(),
                ));
            }
            lower = next_lower;
            upper = next_upper;
        }
        return Err(CoreError::IterationFailure(format!(
            "no convergence within {max_iter} iterations (tol {tol:.1e})"
        )));
    }
    unreachable!("retry loop returns")
}

/// Stiffness estimate dominating the one-sided Lipschitz constant of the
/// residual map on `[0, upper]`.
fn iteration_stiffness(disc: &DiscretizedModel, upper: &State) -> f64 {
    let mut disp = 0.0_f64;
    for comp in &disc.spec.dispersal {
        disp = disp.max(comp.boundary.d * 2.0);
    }
    1.1 * (disc.lipschitz_estimate(upper) + disp).max(1e-6)
}

/// Outcome of the positivity dichotomy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MaxPrincipleVerdict {
    AllZero,
    AllPositive,
    /// Components that are neither uniformly positive nor identically zero,
    /// or zero components coexisting with positive ones.
    Violation(Vec<usize>),
}

impl std::fmt::Display for MaxPrincipleVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MaxPrincipleVerdict::AllZero => f.write_str("all_zero"),
            MaxPrincipleVerdict::AllPositive => f.write_str("all_positive"),
            MaxPrincipleVerdict::Violation(comps) => write!(f, "violation{comps:?}"),
        }
    }
}

/// Numerical witness of the strong-maximum-principle dichotomy: under an
/// irreducible cooperative linearization every nonnegative equilibrium is
/// identically zero or uniformly positive in all components.
pub fn strong_max_principle_check(
    linearization: &MatrixField,
    u: &State,
    pos_tol: f64,
) -> Result<MaxPrincipleVerdict> {
    if let Some((m, i, k, v)) = linearization.cooperativity_violation() {
        return Err(CoreError::InvalidArgument(format!(
            "linearization not cooperative at node {m}: ({i},{k}) = {v:.3e}"
        )));
    }
    let n = u.components();
    let mut zero = Vec::new();
    let mut positive = Vec::new();
    let mut mixed = Vec::new();
    for i in 0..n {
        let comp = u.component(i);
        let min = comp.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = comp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if max < pos_tol {
            zero.push(i);
        } else if min > pos_tol {
            positive.push(i);
        } else {
            mixed.push(i);
        }
    }
    if !mixed.is_empty() {
        return Ok(MaxPrincipleVerdict::Violation(mixed));
    }
    if zero.len() == n {
        return Ok(MaxPrincipleVerdict::AllZero);
    }
    if positive.len() == n {
        return Ok(MaxPrincipleVerdict::AllPositive);
    }
    Ok(MaxPrincipleVerdict::Violation(zero))
}

/// One sample's subhomogeneity classification and the aggregate report.
#[derive(Debug, Clone)]
pub struct SubhomogeneityReport {
    pub samples: usize,
    pub violated: usize,
    pub sub: usize,
    pub strict: usize,
    pub strong: usize,
    /// Weakest class observed over all samples.
    pub observed: SubhomogeneityClass,
    /// Whether the observed class is at least the model's declared one.
    pub satisfies_declared: bool,
}

/// Classifies `f(x, delta u)` against `delta f(x, u)` on explicit samples.
pub fn subhomogeneity_check(
    disc: &DiscretizedModel,
    samples: &[(usize, Vec<f64>, f64)],
) -> SubhomogeneityReport {
    let n = disc.n();
    let mut f_u = vec![0.0; n];
    let mut f_du = vec![0.0; n];
    let mut report = SubhomogeneityReport {
        samples: samples.len(),
        violated: 0,
        sub: 0,
        strict: 0,
        strong: 0,
        observed: SubhomogeneityClass::Strong,
        satisfies_declared: false,
    };
    for (node, u, delta) in samples {
        assert!(u.iter().all(|&v| v > 0.0), "sample must be strictly positive");
        assert!((0.0..1.0).contains(delta) && *delta > 0.0);
        disc.spec.reaction_at(*node, u, &mut f_u);
        let du: Vec<f64> = u.iter().map(|&v| v * delta).collect();
        disc.spec.reaction_at(*node, &du, &mut f_du);
        let mut any_strict = false;
        let mut all_strict = true;
        let mut violated = false;
        for i in 0..n {
            let diff = f_du[i] - delta * f_u[i];
            let tol = 1e-12 * (1.0 + f_du[i].abs() + (delta * f_u[i]).abs());
            if diff < -tol {
                violated = true;
            } else if diff > tol {
                any_strict = true;
            } else {
                all_strict = false;
            }
        }
        let class = if violated {
            report.violated += 1;
            SubhomogeneityClass::None
        } else if all_strict {
            report.strong += 1;
            SubhomogeneityClass::Strong
        } else if any_strict {
            report.strict += 1;
            SubhomogeneityClass::Strict
        } else {
            report.sub += 1;
            SubhomogeneityClass::Sub
        };
        report.observed = report.observed.min(class);
    }
    report.satisfies_declared = report.observed >= disc.spec.subhomogeneity;
    report
}

/// Random-sample variant of the subhomogeneity check.
pub fn random_subhomogeneity_check(
    disc: &DiscretizedModel,
    count: usize,
    seed: u64,
) -> SubhomogeneityReport {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = disc.n();
    let m = disc.nodes();
    let samples: Vec<(usize, Vec<f64>, f64)> = (0..count)
        .map(|_| {
            let node = rng.random_range(0..m);
            let u: Vec<f64> = (0..n)
                .map(|_| 10f64.powf(rng.random_range(-2.0..1.0)))
                .collect();
            let delta = rng.random_range(0.05..0.95);
            (node, u, delta)
        })
        .collect();
    subhomogeneity_check(disc, &samples)
}

/// Result of running the monotone iteration from several brackets.
#[derive(Debug)]
pub struct UniquenessReport {
    pub equilibria: Vec<State>,
    pub max_pairwise_distance: f64,
    pub pass: bool,
    /// Seeds rejected at the ordered-pair precondition with the reason.
    pub rejected: Vec<(usize, String)>,
}

/// Iterates from every seed bracket and measures the spread of the limits.
/// `pass` requires the spread below `10 * tol`.
pub fn uniqueness_probe(
    disc: &DiscretizedModel,
    seeds: Vec<(State, State)>,
    max_iter: usize,
    tol: f64,
) -> UniquenessReport {
    let mut equilibria = Vec::new();
    let mut rejected = Vec::new();
    for (idx, (lower, upper)) in seeds.into_iter().enumerate() {
        match OrderedPair::new(disc, lower, upper, 10.0 * tol) {
            Ok(pair) => match monotone_iterate(disc, &pair, max_iter, tol) {
                Ok(eq) => equilibria.push(eq.u),
                Err(e) => rejected.push((idx, e.to_string())),
            },
            Err(e) => rejected.push((idx, e.to_string())),
        }
    }
    let mut max_pairwise = 0.0_f64;
    for i in 0..equilibria.len() {
        for j in 0..i {
            max_pairwise = max_pairwise.max(equilibria[i].sup_distance(&equilibria[j]));
        }
    }
    UniquenessReport {
        pass: !equilibria.is_empty() && max_pairwise < 10.0 * tol,
        equilibria,
        max_pairwise_distance: max_pairwise,
        rejected,
    }
}

/// Root structure of the frozen pointwise algebraic system at one node.
#[derive(Debug, Clone, PartialEq)]
pub enum ContinuityVerdict {
    UniqueRoot(Vec<f64>),
    MultipleRoots(Vec<Vec<f64>>),
    NoPositiveRoot,
}

/// Freezes the nonlocal term of `u` at `node` and solves the resulting
/// `n`-dimensional algebraic system by damped Newton from random positive
/// starts, reporting the count of distinct positive roots. A unique root is
/// the pointwise witness for continuity of the equilibrium there.
pub fn pointwise_continuity_probe(
    disc: &DiscretizedModel,
    u: &State,
    node: usize,
    starts: usize,
    seed: u64,
) -> Result<ContinuityVerdict> {
    let n = disc.n();
    let starts = starts.max(20);
    // Frozen dispersal inflow at this node.
    let mut disp = State::zeros(n, disc.nodes());
    disc.dispersal_apply(u, &mut disp);
    let mut h = vec![0.0; n];
    let mut u_node = vec![0.0; n];
    u.at_node(node, &mut u_node);
    for i in 0..n {
        // dispersal_apply already subtracted d* u; add it back to isolate
        // the pure kernel inflow.
        h[i] = disp[(i, node)] + disc.boundary_weights(i)[node] * u_node[i];
    }
    let dstar: Vec<f64> = (0..n).map(|i| disc.boundary_weights(i)[node]).collect();
    let scale = 1.0 + u_node.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));

    let eval = |v: &[f64], out: &mut Vec<f64>| {
        disc.spec.reaction_at(node, v, out.as_mut_slice());
        for i in 0..n {
            out[i] += h[i] - dstar[i] * v[i];
        }
    };

    let mut rng = StdRng::seed_from_u64(seed);
    let mut roots: Vec<Vec<f64>> = Vec::new();
    let mut converged_any = false;
    let mut jac = DMatrix::zeros(n, n);
    for _ in 0..starts {
        let mut v: Vec<f64> = (0..n)
            .map(|_| scale * 10f64.powf(rng.random_range(-3.0..1.0)))
            .collect();
        let mut f = vec![0.0; n];
        let mut ok = false;
        for _ in 0..200 {
            eval(&v, &mut f);
            let norm = f.iter().fold(0.0_f64, |a, &t| a.max(t.abs()));
            if norm < 1e-12 * scale.max(1.0) {
                ok = true;
                break;
            }
            disc.spec.jacobian_at(node, &v, &mut jac);
            let mut j = jac.clone();
            for i in 0..n {
                j[(i, i)] -= dstar[i];
            }
            let rhs = nalgebra::DVector::from_iterator(n, f.iter().map(|&t| -t));
            let Some(step) = j.lu().solve(&rhs) else {
                break;
            };
            // Backtracking damping.
            let mut alpha = 1.0;
            let mut accepted = false;
            let mut trial = vec![0.0; n];
            let mut f_trial = vec![0.0; n];
            for _ in 0..40 {
                for i in 0..n {
                    trial[i] = v[i] + alpha * step[i];
                }
                eval(&trial, &mut f_trial);
                let new_norm = f_trial.iter().fold(0.0_f64, |a, &t| a.max(t.abs()));
                if new_norm < norm * (1.0 - 0.25 * alpha) {
                    v.copy_from_slice(&trial);
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if !ok {
            continue;
        }
        converged_any = true;
        if v.iter().all(|&t| t > 1e-9 * scale) {
            let is_new = roots.iter().all(|r| {
                r.iter()
                    .zip(&v)
                    .fold(0.0_f64, |a, (&x, &y)| a.max((x - y).abs()))
                    > 1e-6 * (1.0 + scale)
            });
            if is_new {
                roots.push(v.clone());
            }
        }
    }
    if !converged_any {
        return Err(CoreError::IterationFailure(format!(
            "Newton diverged from all {starts} starts at node {node}"
        )));
    }
    Ok(match roots.len() {
        0 => ContinuityVerdict::NoPositiveRoot,
        1 => ContinuityVerdict::UniqueRoot(roots.pop().expect("one root")),
        _ => ContinuityVerdict::MultipleRoots(roots),
    })
}

/// Canonical lower-solution builder: a small multiple of the principal
/// eigenfunction of the lower control operator, halved until the residual
/// is nonnegative. Returns `None` when no control level has a positive
/// eigenvalue or sixty halvings never produce a lower solution, which is
/// exactly what happens when the bracketed eigenvalue is negative.
pub fn canonical_lower_solution(disc: &DiscretizedModel) -> Option<State> {
    use crate::control::{default_schedule, lower_control};
    use crate::field::sample_field;
    use crate::operator::DiscreteOperator;

    let field = disc.linearize_at_zero();
    let sb = sample_field(&field).ok()?;
    let mut candidate = None;
    for eps in default_schedule() {
        let lo_field = lower_control(&field, &sb, eps).ok()?;
        let op = DiscreteOperator::from_b_field(&disc.grid, &disc.spec.dispersal, &lo_field).ok()?;
        let eig = principal_eig(&op).ok()?;
        if eig.lambda > 1e-12 && eig.strongly_positive {
            candidate = Some(eig.eigenfunction);
            break;
        }
    }
    let phi = candidate?;
    let mut rho = 1.0;
    for _ in 0..60 {
        let trial = phi.scale(rho);
        let res = disc.rhs(&trial);
        let min = res.as_vector().iter().cloned().fold(f64::INFINITY, f64::min);
        if min >= -1e-13 * (1.0 + rho) {
            return Some(trial);
        }
        rho *= 0.5;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use crate::kernel::{BoundaryMode, KernelSpec};
    use crate::models::{linear_scalar, logistic, DiscretizedModel, ModelSpec};
    use crate::operator::ComponentDispersal;

    fn logistic_fixture(m: usize) -> DiscretizedModel {
        let grid = build_grid((0.0, 1.0), m).unwrap();
        let spec = logistic(
            &grid,
            &vec![1.0; m],
            KernelSpec::gaussian(0.05).unwrap(),
            BoundaryMode::neumann(1.0),
        );
        DiscretizedModel::new(spec, grid).unwrap()
    }

    #[test]
    fn monotone_iteration_finds_carrying_capacity() {
        let disc = logistic_fixture(30);
        let pair = OrderedPair::new(
            &disc,
            State::constant(1, 30, 0.1),
            State::constant(1, 30, 5.0),
            1e-8,
        )
        .unwrap();
        let eq = monotone_iterate(&disc, &pair, 10_000, 1e-9).unwrap();
        let want = State::constant(1, 30, 1.0);
        assert!(eq.u.sup_distance(&want) < 1e-8, "gap {}", eq.u.sup_distance(&want));
        assert!(eq.residual < 1e-9);
        assert!(eq.bracket_gap < 1e-9);
    }

    #[test]
    fn inverted_bracket_is_rejected() {
        let disc = logistic_fixture(10);
        let err = OrderedPair::new(
            &disc,
            State::constant(1, 10, 5.0),
            State::constant(1, 10, 0.1),
            1e-8,
        );
        assert!(err.is_err());
    }

    #[test]
    fn non_lower_solution_is_rejected() {
        let disc = logistic_fixture(10);
        // Constant above the carrying capacity has negative residual.
        let err = OrderedPair::new(
            &disc,
            State::constant(1, 10, 2.0),
            State::constant(1, 10, 5.0),
            1e-8,
        );
        assert!(err.is_err());
    }

    #[test]
    fn dichotomy_verdicts() {
        let field = MatrixField::constant(
            DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0]),
            8,
        );
        let zero = State::zeros(2, 8);
        assert_eq!(
            strong_max_principle_check(&field, &zero, POS_TOL).unwrap(),
            MaxPrincipleVerdict::AllZero
        );
        let pos = State::constant(2, 8, 0.7);
        assert_eq!(
            strong_max_principle_check(&field, &pos, POS_TOL).unwrap(),
            MaxPrincipleVerdict::AllPositive
        );
        // One zero component against one positive violates the dichotomy.
        let mut mixed = State::zeros(2, 8);
        mixed.component_mut(0).fill(1.0);
        let verdict = strong_max_principle_check(&field, &mixed, POS_TOL).unwrap();
        assert_eq!(verdict, MaxPrincipleVerdict::Violation(vec![1]));
    }

    #[test]
    fn subhomogeneity_classes_of_catalog_reactions() {
        // Logistic: strictly (indeed strongly, being scalar) subhomogeneous.
        let disc = logistic_fixture(6);
        let report = random_subhomogeneity_check(&disc, 500, 7);
        assert!(report.satisfies_declared);
        assert_eq!(report.violated, 0);
        assert!(report.observed >= SubhomogeneityClass::Strict);

        // Linear: equality everywhere.
        let grid = build_grid((0.0, 1.0), 6).unwrap();
        let spec = linear_scalar(
            &grid,
            &vec![-0.5; 6],
            KernelSpec::gaussian(0.1).unwrap(),
            BoundaryMode::neumann(1.0),
        );
        let disc = DiscretizedModel::new(spec, grid.clone()).unwrap();
        let report = random_subhomogeneity_check(&disc, 500, 7);
        assert_eq!(report.observed, SubhomogeneityClass::Sub);
        assert!(report.satisfies_declared);

        // Superhomogeneous u^2 violates.
        let spec = ModelSpec::custom(
            "square",
            vec![ComponentDispersal::new(
                KernelSpec::gaussian(0.1).unwrap(),
                BoundaryMode::neumann(1.0),
            )],
            |_, u, out| out[0] = u[0] * u[0],
            |_, u, out| out[(0, 0)] = 2.0 * u[0],
            SubhomogeneityClass::Strict,
            true,
            State::constant(1, 6, 1.0),
        );
        let disc = DiscretizedModel::new(spec, grid).unwrap();
        let report = random_subhomogeneity_check(&disc, 200, 3);
        assert_eq!(report.observed, SubhomogeneityClass::None);
        assert!(!report.satisfies_declared);
    }

    #[test]
    fn uniqueness_probe_logistic_brackets_agree() {
        let disc = logistic_fixture(25);
        let seeds = vec![
            (State::constant(1, 25, 0.1), State::constant(1, 25, 5.0)),
            (State::constant(1, 25, 0.5), State::constant(1, 25, 2.0)),
            (State::constant(1, 25, 0.9), State::constant(1, 25, 1.2)),
        ];
        let report = uniqueness_probe(&disc, seeds, 10_000, 1e-8);
        assert!(report.rejected.is_empty(), "{:?}", report.rejected);
        assert_eq!(report.equilibria.len(), 3);
        assert!(report.pass, "spread {}", report.max_pairwise_distance);
    }

    #[test]
    fn pointwise_probe_logistic_unique_root() {
        let disc = logistic_fixture(20);
        let pair = OrderedPair::new(
            &disc,
            State::constant(1, 20, 0.1),
            State::constant(1, 20, 5.0),
            1e-8,
        )
        .unwrap();
        let eq = monotone_iterate(&disc, &pair, 10_000, 1e-10).unwrap();
        for node in [0, 10, 19] {
            match pointwise_continuity_probe(&disc, &eq.u, node, 25, 11).unwrap() {
                ContinuityVerdict::UniqueRoot(v) => {
                    assert!((v[0] - eq.u[(0, node)]).abs() < 1e-6);
                }
                other => panic!("expected unique root, got {other:?}"),
            }
        }
    }

    #[test]
    fn pointwise_probe_flags_constructed_multiple_roots() {
        // Reaction chosen so the frozen system is -(v-1)(v-2)(v-3) = 0 with
        // zero inflow: three positive roots.
        let grid = build_grid((0.0, 1.0), 8).unwrap();
        let spec = ModelSpec::custom(
            "cubic",
            vec![ComponentDispersal::new(
                KernelSpec::gaussian(0.1).unwrap(),
                BoundaryMode::neumann(0.0),
            )],
            |_, u, out| {
                let v = u[0];
                out[0] = -(v - 1.0) * (v - 2.0) * (v - 3.0);
            },
            |_, u, out| {
                let v = u[0];
                out[(0, 0)] = -((v - 2.0) * (v - 3.0) + (v - 1.0) * (v - 3.0)
                    + (v - 1.0) * (v - 2.0));
            },
            SubhomogeneityClass::None,
            true,
            State::constant(1, 8, 4.0),
        );
        let disc = DiscretizedModel::new(spec, grid).unwrap();
        let u = State::constant(1, 8, 1.0);
        match pointwise_continuity_probe(&disc, &u, 3, 60, 5).unwrap() {
            ContinuityVerdict::MultipleRoots(roots) => {
                assert!(roots.len() >= 2, "found {roots:?}");
            }
            other => panic!("expected multiple roots, got {other:?}"),
        }
    }

    #[test]
    fn canonical_lower_solution_exists_iff_threshold_positive() {
        // Supercritical logistic: a builder succeeds.
        let disc = logistic_fixture(20);
        let lower = canonical_lower_solution(&disc).expect("positive threshold");
        assert!(lower.min() > 0.0);
        let res = disc.rhs(&lower);
        assert!(res.as_vector().iter().all(|&v| v >= -1e-12));

        // Subcritical linear decay: no valid lower solution exists.
        let grid = build_grid((0.0, 1.0), 20).unwrap();
        let spec = linear_scalar(
            &grid,
            &vec![-0.5; 20],
            KernelSpec::gaussian(0.05).unwrap(),
            BoundaryMode::neumann(1.0),
        );
        let disc = DiscretizedModel::new(spec, grid).unwrap();
        assert!(canonical_lower_solution(&disc).is_none());
    }

    #[test]
    fn equilibrium_is_a_fixed_point_of_the_flow() {
        let disc = logistic_fixture(20);
        let pair = OrderedPair::new(
            &disc,
            State::constant(1, 20, 0.1),
            State::constant(1, 20, 5.0),
            1e-8,
        )
        .unwrap();
        let eq = monotone_iterate(&disc, &pair, 10_000, 1e-10).unwrap();
        let traj = crate::dynamics::integrate(&disc, &eq.u, 10.0, 0.05, 20).unwrap();
        assert!(traj.terminal().sup_distance(&eq.u) < 1e-9);
    }
}
