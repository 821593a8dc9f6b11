//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its measured margin. Tolerances are pinned here.

mod common;

use common::{mat2, neumann_gaussian, unit_grid, wnv_unit_fixture};
use nlds_core::control::default_schedule;
use nlds_core::dynamics::{classify, integrate, Regime};
use nlds_core::equilibrium::{
    monotone_iterate, strong_max_principle_check, uniqueness_probe, MaxPrincipleVerdict,
    OrderedPair, POS_TOL,
};
use nlds_core::field::{dense_max_real_part, sample_field, MatrixField};
use nlds_core::models::{
    benthic_drift, capasso_maddalena, linear_scalar, logistic, wnv_equilibrium_fields, wnv_full,
    wnv_pointwise_quadratic, wnv_reduce, BenthicParams, CapassoParams, DiscretizedModel,
    SaturatingGain,
};
use nlds_core::operator::{subtract_boundary_weights, ComponentDispersal, DiscreteOperator};
use nlds_core::spectral::{collatz_wielandt, principal_eig, squeeze};
use nlds_core::state::State;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;

const TOL_3EPS: f64 = 1e-7;
const TOL_INTERVAL_WIDTH_SLACK: f64 = 1e-7;
const TOL_CW_EIGEN: f64 = 1e-8;
const TOL_LOGISTIC_TERMINAL: f64 = 1e-6;
const TOL_LOGISTIC_EQUILIBRIUM: f64 = 1e-8;
const TOL_LOGISTIC_BRACKET_SPREAD: f64 = 1e-7;
const TOL_DECAY_RATE_ABS: f64 = 0.02;
const TOL_DECAY_RATE_VS_PRED: f64 = 0.05;
const TOL_WNV_TERMINAL: f64 = 1e-4;
const TOL_QUADRATIC_ORACLE: f64 = 1e-10;
const TOL_ORACLE_EQUIV: f64 = 1e-9;
const TOL_WNV_SUM_STEP: f64 = 1e-10;

/// The heterogeneous 2x2 reaction field of the spectral criteria.
fn sine_field(grid: &nlds_core::grid::SpatialGrid) -> MatrixField {
    MatrixField::from_fn(grid, 2, |x| mat2((PI * x).sin(), 1.0, 1.0, 0.0))
}

#[test]
fn criterion_01_three_eps_identity() {
    let grid = unit_grid(200);
    let comps = vec![neumann_gaussian(1.0, 0.05), neumann_gaussian(1.0, 0.05)];
    let full = subtract_boundary_weights(&grid, &comps, &sine_field(&grid)).unwrap();
    let schedule = default_schedule();
    let report = squeeze(&grid, &comps, &full, &schedule).unwrap();
    let mut worst = 0.0_f64;
    for (k, &eps) in schedule.iter().enumerate() {
        let gap = report.upper_eigs[k] - report.lower_eigs[k];
        worst = worst.max((gap - 3.0 * eps).abs());
    }
    assert!(worst <= TOL_3EPS, "3eps defect {worst:.3e}");
    println!("criterion 01 three-eps identity: PASS (worst defect {worst:.3e})");
}

#[test]
fn criterion_02_squeeze_monotone_and_contains_constant_bound() {
    // Heterogeneous field: monotone sequences, final width <= 3 eps_min.
    let grid = unit_grid(200);
    let comps = vec![neumann_gaussian(1.0, 0.05), neumann_gaussian(1.0, 0.05)];
    let full = subtract_boundary_weights(&grid, &comps, &sine_field(&grid)).unwrap();
    let schedule = default_schedule();
    let report = squeeze(&grid, &comps, &full, &schedule).unwrap();
    for k in 1..schedule.len() {
        assert!(
            report.lower_eigs[k] >= report.lower_eigs[k - 1] - 1e-10,
            "lower not nondecreasing at level {k}"
        );
        assert!(
            report.upper_eigs[k] <= report.upper_eigs[k - 1] + 1e-10,
            "upper not nonincreasing at level {k}"
        );
    }
    let width = report.interval_width();
    let eps_min = schedule.last().copied().unwrap();
    assert!(width <= 3.0 * eps_min + TOL_INTERVAL_WIDTH_SLACK, "width {width:.3e}");

    // Constant fixture: the certified interval brackets s(B0) = 3.
    let grid = unit_grid(100);
    let comps = vec![neumann_gaussian(1.0, 0.05), neumann_gaussian(0.5, 0.05)];
    let b0 = MatrixField::constant(mat2(1.0, 2.0, 3.0, 0.0), 100);
    let full = subtract_boundary_weights(&grid, &comps, &b0).unwrap();
    let report = squeeze(&grid, &comps, &full, &schedule).unwrap();
    let (lo, hi) = report.certified_interval;
    assert!(lo <= 3.0 + 1e-9 && 3.0 <= hi + 1e-9, "interval [{lo}, {hi}]");
    println!(
        "criterion 02 squeeze monotone+convergence: PASS (final width {width:.3e}, \
         constant interval [{lo:.9}, {hi:.9}])"
    );
}

#[test]
fn criterion_03_collatz_wielandt_sandwich() {
    let schedule = default_schedule();
    let mut rng = StdRng::seed_from_u64(2024);
    for (label, grid_m, comps, reaction) in [
        (
            "sine-2x2",
            200usize,
            vec![neumann_gaussian(1.0, 0.05), neumann_gaussian(1.0, 0.05)],
            sine_field(&unit_grid(200)),
        ),
        (
            "constant-2x2",
            100,
            vec![neumann_gaussian(1.0, 0.05), neumann_gaussian(0.5, 0.05)],
            MatrixField::constant(mat2(1.0, 2.0, 3.0, 0.0), 100),
        ),
    ] {
        let grid = unit_grid(grid_m);
        let full = subtract_boundary_weights(&grid, &comps, &reaction).unwrap();
        let op = DiscreteOperator::from_b_field(&grid, &comps, &full).unwrap();
        let eig = principal_eig(&op).unwrap();
        let report = squeeze(&grid, &comps, &full, &schedule).unwrap();
        let (lo, hi) = report.certified_interval;
        for _ in 0..100 {
            let mut phi = State::zeros(2, grid_m);
            for i in 0..2 {
                for m in 0..grid_m {
                    phi[(i, m)] = rng.random_range(0.05..1.0);
                }
            }
            let (qmin, qmax) = collatz_wielandt(&op, &phi).unwrap();
            // Every Collatz-Wielandt bracket intersects the certified
            // interval, and both contain lambda_p.
            assert!(qmin <= hi + 1e-9, "{label}: qmin {qmin} above interval {hi}");
            assert!(lo <= qmax + 1e-9, "{label}: interval {lo} above qmax {qmax}");
            assert!(qmin <= eig.lambda + 1e-9 && eig.lambda <= qmax + 1e-9, "{label}");
        }
        let (emin, emax) = collatz_wielandt(&op, &eig.eigenfunction).unwrap();
        assert!((emin - eig.lambda).abs() <= TOL_CW_EIGEN, "{label}: {emin}");
        assert!((emax - eig.lambda).abs() <= TOL_CW_EIGEN, "{label}: {emax}");
    }
    println!("criterion 03 Collatz-Wielandt sandwich: PASS (100 random tests x 2 fixtures)");
}

#[test]
fn criterion_04_threshold_supercritical_logistic() {
    let grid = unit_grid(100);
    let spec = logistic(
        &grid,
        &vec![1.0; 100],
        nlds_core::kernel::KernelSpec::gaussian(0.05).unwrap(),
        nlds_core::kernel::BoundaryMode::neumann(1.0),
    );
    let disc = DiscretizedModel::new(spec, grid).unwrap();
    let traj = integrate(&disc, &State::constant(1, 100, 0.1), 50.0, 0.05, 20).unwrap();
    let eq_state = State::constant(1, 100, 1.0);
    let terminal_gap = traj.terminal().sup_distance(&eq_state);
    assert!(terminal_gap < TOL_LOGISTIC_TERMINAL, "terminal gap {terminal_gap:.3e}");
    assert_eq!(traj.clip_events, 0);
    let verdict = classify(&traj, Some(&eq_state), TOL_LOGISTIC_TERMINAL);
    assert_eq!(verdict.verdict, Regime::ConvergesPositive);

    let pair = OrderedPair::new(
        &disc,
        State::constant(1, 100, 0.1),
        State::constant(1, 100, 5.0),
        1e-8,
    )
    .unwrap();
    let eq = monotone_iterate(&disc, &pair, 50_000, 1e-9).unwrap();
    let eq_gap = eq.u.sup_distance(&eq_state);
    assert!(eq_gap < TOL_LOGISTIC_EQUILIBRIUM, "equilibrium gap {eq_gap:.3e}");

    let seeds = vec![
        (State::constant(1, 100, 0.1), State::constant(1, 100, 5.0)),
        (State::constant(1, 100, 0.5), State::constant(1, 100, 2.0)),
        (State::constant(1, 100, 0.9), State::constant(1, 100, 1.2)),
    ];
    let report = uniqueness_probe(&disc, seeds, 50_000, 1e-8);
    assert!(report.rejected.is_empty(), "{:?}", report.rejected);
    assert!(
        report.max_pairwise_distance < TOL_LOGISTIC_BRACKET_SPREAD,
        "bracket spread {:.3e}",
        report.max_pairwise_distance
    );
    println!(
        "criterion 04 supercritical logistic: PASS (terminal {terminal_gap:.3e}, \
         equilibrium {eq_gap:.3e}, bracket spread {:.3e})",
        report.max_pairwise_distance
    );
}

#[test]
fn criterion_05_threshold_subcritical_decay_rate() {
    let grid = unit_grid(80);
    let spec = linear_scalar(
        &grid,
        &vec![-0.5; 80],
        nlds_core::kernel::KernelSpec::gaussian(0.05).unwrap(),
        nlds_core::kernel::BoundaryMode::neumann(1.0),
    );
    let disc = DiscretizedModel::new(spec, grid.clone()).unwrap();
    let traj = integrate(&disc, &State::constant(1, 80, 1.0), 10.0, 0.001, 100).unwrap();
    let verdict = classify(&traj, None, 1e-2);
    assert_eq!(verdict.verdict, Regime::DecaysToZero);
    let rate = verdict.decay_rate.expect("decay rate fitted");
    assert!((rate - 0.5).abs() <= TOL_DECAY_RATE_ABS, "rate {rate}");

    let field = disc.linearize_at_zero();
    let report = squeeze(&grid, &disc.spec.dispersal, &field, &default_schedule()).unwrap();
    let sigma_pred = -report.certified_interval.1 / 2.0;
    assert!(sigma_pred > 0.0);
    assert!(
        rate >= sigma_pred - TOL_DECAY_RATE_VS_PRED,
        "rate {rate} below sigma_pred {sigma_pred} - 0.05"
    );
    println!(
        "criterion 05 subcritical decay: PASS (rate {rate:.4}, sigma_pred {sigma_pred:.4})"
    );
}

#[test]
fn criterion_06_wnv_endemic_regime() {
    let grid = unit_grid(60);
    let params = wnv_unit_fixture(&grid, 2.0);
    let spec = wnv_full(&grid, &params).unwrap();
    let disc = DiscretizedModel::new(spec, grid.clone()).unwrap();
    let u0 = State::from_component_constants(60, &[0.6, 0.1, 0.6, 0.1]);
    let cap = disc.cap_with(&u0);
    let dt = 0.5 * disc.stability_dt(&cap);
    let traj = integrate(&disc, &u0, 100.0, dt, 50).unwrap();
    let endemic = State::constant(4, 60, 0.5);
    let gap = traj.terminal().sup_distance(&endemic);
    assert!(gap < TOL_WNV_TERMINAL, "endemic gap {gap:.3e}");

    let (h, v) = wnv_equilibrium_fields(&grid, &params, 1e-10).unwrap();
    let red = wnv_reduce(&grid, &params, &h, &v, 1e-7).unwrap();
    let report = squeeze(
        &grid,
        &red.truncated.dispersal,
        &red.linearization,
        &default_schedule(),
    )
    .unwrap();
    let (lo, hi) = report.certified_interval;
    assert!(lo > 0.0, "interval not strictly positive: [{lo}, {hi}]");
    assert!(lo <= 1.0 + 1e-7 && 1.0 <= hi + 1e-7, "interval misses 1: [{lo}, {hi}]");
    println!(
        "criterion 06 WNV endemic: PASS (terminal gap {gap:.3e}, interval [{lo:.6}, {hi:.6}])"
    );
}

#[test]
fn criterion_07_wnv_disease_free_regime() {
    let grid = unit_grid(60);
    let params = wnv_unit_fixture(&grid, 0.4);
    let spec = wnv_full(&grid, &params).unwrap();
    let disc = DiscretizedModel::new(spec, grid.clone()).unwrap();
    let u0 = State::from_component_constants(60, &[0.6, 0.1, 0.6, 0.1]);
    let cap = disc.cap_with(&u0);
    let dt = 0.5 * disc.stability_dt(&cap);
    let traj = integrate(&disc, &u0, 100.0, dt, 50).unwrap();
    let disease_free = State::from_component_constants(60, &[1.0, 0.0, 1.0, 0.0]);
    let gap = traj.terminal().sup_distance(&disease_free);
    assert!(gap < TOL_WNV_TERMINAL, "disease-free gap {gap:.3e}");

    let (h, v) = wnv_equilibrium_fields(&grid, &params, 1e-10).unwrap();
    let red = wnv_reduce(&grid, &params, &h, &v, 1e-7).unwrap();
    let report = squeeze(
        &grid,
        &red.truncated.dispersal,
        &red.linearization,
        &default_schedule(),
    )
    .unwrap();
    let (lo, hi) = report.certified_interval;
    assert!(hi < 0.0, "interval not strictly negative: [{lo}, {hi}]");
    println!(
        "criterion 07 WNV disease-free: PASS (terminal gap {gap:.3e}, interval [{lo:.6}, {hi:.6}])"
    );
}

#[test]
fn criterion_08_pointwise_quadratic_vs_bisection() {
    let mut rng = StdRng::seed_from_u64(88);
    let mut checked = 0usize;
    for _ in 0..10_000 {
        let h1 = if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..2.0) };
        let h2 = if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..2.0) };
        let r1 = rng.random_range(0.05..3.0);
        let r2 = rng.random_range(0.05..3.0);
        let p1 = rng.random_range(0.05..3.0);
        let p2 = rng.random_range(0.05..3.0);
        let q1 = rng.random_range(0.05..3.0);
        let q2 = rng.random_range(0.05..3.0);
        let got = wnv_pointwise_quadratic(h1, h2, r1, r2, p1, p2, q1, q2).unwrap();

        // Independent oracle: bisection on the reduced quadratic.
        let a = p2 * (r1 + p1 * q2);
        let b = r1 * r2 + p1 * h2 - p1 * p2 * q1 * q2 - p2 * h1;
        let c = -(r2 * h1 + p1 * q1 * h2);
        let quad = |v: f64| (a * v + b) * v + c;
        // Positive roots of the quadratic: Descartes on (a > 0, c <= 0)
        // allows at most one.
        let mut oracle_root = None;
        if c < 0.0 || (c == 0.0 && b < 0.0) {
            let mut lo = 0.0;
            let mut hi = 1.0;
            while quad(hi) <= 0.0 {
                hi *= 2.0;
                assert!(hi < 1e12, "no sign change found");
            }
            if c == 0.0 {
                // Root v = 0 is not the one we want; start just above it.
                lo = 1e-300;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if quad(mid) <= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            oracle_root = Some(0.5 * (lo + hi));
        }

        match (got, oracle_root) {
            (Some((v1, v2)), Some(oracle)) => {
                assert!(
                    (v1 - oracle).abs() <= TOL_QUADRATIC_ORACLE * (1.0 + oracle.abs()),
                    "closed form {v1} vs bisection {oracle}"
                );
                // The pair solves the original system.
                let res1 = h1 - r1 * v1 + p1 * (q1 - v1) * v2;
                let res2 = h2 - r2 * v2 + p2 * (q2 - v2) * v1;
                assert!(res1.abs() < 1e-8 && res2.abs() < 1e-8, "system residuals");
                checked += 1;
            }
            (None, Some(oracle)) => {
                // Closed form rejected the root: the back-substituted v2
                // must have been nonpositive.
                let v2 = if (oracle - q1).abs() <= 1e-12 * (1.0 + q1) {
                    (h2 + p2 * q1 * q2) / (r2 + p2 * q1)
                } else {
                    (r1 * oracle - h1) / (p1 * (q1 - oracle))
                };
                assert!(v2 <= 1e-9, "closed form dropped a valid root (v2 = {v2})");
            }
            (Some(_), None) => panic!("closed form invented a root"),
            (None, None) => {}
        }

        // Root count never exceeds one: scan for sign changes.
        let mut changes = 0;
        let mut prev = quad(1e-9);
        for k in 1..200 {
            let v = 1e-9 + k as f64 * 0.05;
            let cur = quad(v);
            if prev <= 0.0 && cur > 0.0 || prev > 0.0 && cur <= 0.0 {
                changes += 1;
            }
            prev = cur;
        }
        assert!(changes <= 1, "multiple positive roots of the quadratic");
    }
    assert!(checked > 1_000, "too few positive-root cases: {checked}");
    println!("criterion 08 pointwise quadratic: PASS ({checked} positive-root cases of 10000)");
}

#[test]
fn criterion_09_strong_max_principle_dichotomy() {
    let grid = unit_grid(60);
    let mut verdicts = Vec::new();

    // Logistic equilibrium.
    let spec = logistic(
        &grid,
        &vec![1.0; 60],
        nlds_core::kernel::KernelSpec::gaussian(0.05).unwrap(),
        nlds_core::kernel::BoundaryMode::neumann(1.0),
    );
    let disc = DiscretizedModel::new(spec, grid.clone()).unwrap();
    let pair = OrderedPair::new(
        &disc,
        State::constant(1, 60, 0.1),
        State::constant(1, 60, 5.0),
        1e-8,
    )
    .unwrap();
    let eq = monotone_iterate(&disc, &pair, 50_000, 1e-9).unwrap();
    verdicts.push((
        "logistic",
        strong_max_principle_check(&disc.linearize_at_zero(), &eq.u, POS_TOL).unwrap(),
    ));

    // WNV reduced equilibrium.
    let params = wnv_unit_fixture(&grid, 2.0);
    let (h, v) = wnv_equilibrium_fields(&grid, &params, 1e-10).unwrap();
    let red = wnv_reduce(&grid, &params, &h, &v, 1e-7).unwrap();
    let rdisc = DiscretizedModel::new(red.truncated.clone(), grid.clone()).unwrap();
    let lower = nlds_core::equilibrium::canonical_lower_solution(&rdisc).unwrap();
    let pair = OrderedPair::new(&rdisc, lower, rdisc.spec.canonical_upper.clone(), 1e-7).unwrap();
    let eq = monotone_iterate(&rdisc, &pair, 50_000, 1e-9).unwrap();
    verdicts.push((
        "wnv_reduced",
        strong_max_principle_check(&red.linearization, &eq.u, POS_TOL).unwrap(),
    ));

    // Capasso-Maddalena equilibrium.
    let cparams = CapassoParams {
        gamma11: vec![1.0; 60],
        gamma12: vec![1.0; 60],
        gamma22: vec![1.0; 60],
        agents: neumann_gaussian(1.0, 0.08),
        infectives: neumann_gaussian(0.6, 0.08),
    };
    let gain = std::sync::Arc::new(SaturatingGain { kappa: vec![2.0; 60] });
    let cspec = capasso_maddalena(&grid, &cparams, gain).unwrap();
    let cdisc = DiscretizedModel::new(cspec, grid.clone()).unwrap();
    let lower = nlds_core::equilibrium::canonical_lower_solution(&cdisc).unwrap();
    let pair = OrderedPair::new(&cdisc, lower, cdisc.spec.canonical_upper.clone(), 1e-7).unwrap();
    let eq = monotone_iterate(&cdisc, &pair, 50_000, 1e-9).unwrap();
    verdicts.push((
        "capasso",
        strong_max_principle_check(&cdisc.linearize_at_zero(), &eq.u, POS_TOL).unwrap(),
    ));

    // Benthic-drift equilibrium (partially degenerate).
    let bparams = BenthicParams {
        r: vec![1.2; 60],
        m_d: vec![0.4; 60],
        m_b: vec![0.3; 60],
        sigma: 0.6,
        mu: 0.5,
        area_drift: vec![1.0; 60],
        area_benthic: vec![2.0; 60],
        drift: neumann_gaussian(0.8, 0.08),
    };
    let bspec = benthic_drift(&grid, &bparams).unwrap();
    let bdisc = DiscretizedModel::new(bspec, grid.clone()).unwrap();
    let lower = nlds_core::equilibrium::canonical_lower_solution(&bdisc).unwrap();
    let pair = OrderedPair::new(&bdisc, lower, bdisc.spec.canonical_upper.clone(), 1e-7).unwrap();
    let eq = monotone_iterate(&bdisc, &pair, 50_000, 1e-9).unwrap();
    verdicts.push((
        "benthic",
        strong_max_principle_check(&bdisc.linearize_at_zero(), &eq.u, POS_TOL).unwrap(),
    ));

    for (name, verdict) in &verdicts {
        assert!(
            matches!(verdict, MaxPrincipleVerdict::AllPositive),
            "{name}: {verdict:?}"
        );
    }

    // Zero state classifies as all_zero.
    let z = strong_max_principle_check(&disc.linearize_at_zero(), &State::zeros(1, 60), POS_TOL)
        .unwrap();
    assert!(matches!(z, MaxPrincipleVerdict::AllZero));

    // Constructed mixed counterexample is flagged.
    let field = MatrixField::constant(mat2(-1.0, 1.0, 1.0, -1.0), 60);
    let mut mixed = State::zeros(2, 60);
    mixed.component_mut(0).fill(1.0);
    let flagged = strong_max_principle_check(&field, &mixed, POS_TOL).unwrap();
    assert!(matches!(flagged, MaxPrincipleVerdict::Violation(_)), "{flagged:?}");
    println!(
        "criterion 09 strong maximum principle: PASS ({} catalog equilibria all_positive, \
         counterexample flagged)",
        verdicts.len()
    );
}

#[test]
fn criterion_10_power_iteration_vs_dense_oracle() {
    let mut cases: Vec<(String, DiscreteOperator)> = Vec::new();

    // Scalar logistic linearization, nM = 100.
    let grid = unit_grid(100);
    let spec = logistic(
        &grid,
        &vec![1.0; 100],
        nlds_core::kernel::KernelSpec::gaussian(0.05).unwrap(),
        nlds_core::kernel::BoundaryMode::neumann(1.0),
    );
    let disc = DiscretizedModel::new(spec, grid.clone()).unwrap();
    cases.push((
        "logistic nM=100".into(),
        DiscreteOperator::from_b_field(&grid, &disc.spec.dispersal, &disc.linearize_at_zero())
            .unwrap(),
    ));

    // Heterogeneous 2x2 field, nM = 400.
    let grid = unit_grid(200);
    let comps = vec![neumann_gaussian(1.0, 0.05), neumann_gaussian(1.0, 0.05)];
    let full = subtract_boundary_weights(&grid, &comps, &sine_field(&grid)).unwrap();
    cases.push((
        "sine nM=400".into(),
        DiscreteOperator::from_b_field(&grid, &comps, &full).unwrap(),
    ));

    // WNV reduced linearization, nM = 120.
    let grid = unit_grid(60);
    let params = wnv_unit_fixture(&grid, 2.0);
    let (h, v) = wnv_equilibrium_fields(&grid, &params, 1e-10).unwrap();
    let red = wnv_reduce(&grid, &params, &h, &v, 1e-7).unwrap();
    cases.push((
        "wnv nM=120".into(),
        DiscreteOperator::from_b_field(&grid, &red.truncated.dispersal, &red.linearization)
            .unwrap(),
    ));

    // Partially degenerate benthic-drift linearization, nM = 120.
    let bparams = BenthicParams {
        r: vec![1.2; 60],
        m_d: vec![0.4; 60],
        m_b: vec![0.3; 60],
        sigma: 0.6,
        mu: 0.5,
        area_drift: vec![1.0; 60],
        area_benthic: vec![2.0; 60],
        drift: neumann_gaussian(0.8, 0.08),
    };
    let bspec = benthic_drift(&grid, &bparams).unwrap();
    let bdisc = DiscretizedModel::new(bspec, grid.clone()).unwrap();
    let op = DiscreteOperator::from_b_field(
        &grid,
        &bdisc.spec.dispersal,
        &bdisc.linearize_at_zero(),
    )
    .unwrap();
    assert_eq!(op.degenerate_set(), &[1]);
    cases.push(("benthic nM=120 (degenerate)".into(), op));

    // Dirichlet decay fixture, nM = 80.
    let grid = unit_grid(80);
    let comps = vec![ComponentDispersal::new(
        nlds_core::kernel::KernelSpec::gaussian(0.05).unwrap(),
        nlds_core::kernel::BoundaryMode::dirichlet(1.0),
    )];
    let full =
        subtract_boundary_weights(&grid, &comps, &MatrixField::scalar(&vec![0.0; 80])).unwrap();
    cases.push((
        "dirichlet nM=80".into(),
        DiscreteOperator::from_b_field(&grid, &comps, &full).unwrap(),
    ));

    let mut worst = 0.0_f64;
    for (name, op) in &cases {
        assert!(op.dim() <= 600, "{name}: oracle class is nM <= 600");
        let eig = principal_eig(op).unwrap();
        let dense = dense_max_real_part(op.matrix()).unwrap();
        let diff = (eig.lambda - dense).abs();
        assert!(
            diff <= TOL_ORACLE_EQUIV * (1.0 + dense.abs()),
            "{name}: power {} vs dense {dense}",
            eig.lambda
        );
        worst = worst.max(diff);
    }
    println!(
        "criterion 10 oracle equivalence: PASS ({} fixtures, worst diff {worst:.3e})",
        cases.len()
    );
}

#[test]
fn criterion_11_wnv_sum_identity() {
    let grid = unit_grid(60);
    let params = wnv_unit_fixture(&grid, 2.0);
    let spec = wnv_full(&grid, &params).unwrap();
    let disc = DiscretizedModel::new(spec, grid.clone()).unwrap();
    let u0 = State::from_component_constants(60, &[0.6, 0.1, 0.6, 0.1]);
    let dt = 0.02;
    let four = integrate(&disc, &u0, 20.0, dt, 1).unwrap();

    // Directly simulated scalar logistic total with identical stepping.
    let total_spec = params.total_model(&grid, 1);
    let total_disc = DiscretizedModel::new(total_spec, grid.clone()).unwrap();
    let h0 = State::constant(1, 60, 0.7);
    let scalar = integrate(&total_disc, &h0, 20.0, dt, 1).unwrap();

    assert_eq!(four.states.len(), scalar.states.len());
    let mut worst = 0.0_f64;
    for (s4, s1) in four.states.iter().zip(&scalar.states) {
        for m in 0..60 {
            let sum = s4[(0, m)] + s4[(1, m)];
            worst = worst.max((sum - s1[(0, m)]).abs());
        }
    }
    assert!(worst <= TOL_WNV_SUM_STEP, "per-step sum defect {worst:.3e}");
    println!("criterion 11 WNV sum identity: PASS (worst per-step defect {worst:.3e})");
}
