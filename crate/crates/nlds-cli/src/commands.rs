//! The five CLI verbs.

use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use nlds_core::dynamics::{classify, integrate, Regime};
use nlds_core::equilibrium::{
    canonical_lower_solution, monotone_iterate, pointwise_continuity_probe,
    random_subhomogeneity_check, strong_max_principle_check, uniqueness_probe, ContinuityVerdict,
    OrderedPair, POS_TOL,
};
use nlds_core::field::{
    l1_divergence_indicator, sample_field, DIVERGENCE_CAP, DIVERGENCE_DELTA_REG,
};
use nlds_core::operator::DiscreteOperator;
use nlds_core::spectral::{
    essential_spectrum, existence_gap_test, principal_eig, resolvent_radius_test, squeeze,
    GapVerdict, IntervalSign, SqueezeReport, GAP_TOL,
};
use nlds_core::state::State;

use crate::config::Config;
use crate::report::{fmt, Reporter};
use crate::scenario::{build, initial_state, schedule, Scenario};

/// Numerical failures map to exit code 3, coherence failures to 4.
#[derive(Debug)]
pub struct CoherenceFailure(pub String);

impl std::fmt::Display for CoherenceFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "coherence FAIL: {}", self.0)
    }
}

impl std::error::Error for CoherenceFailure {}

fn equilibrium_tol(cfg: &Config) -> f64 {
    cfg.get_f64_or("equilibrium", "tol", 1e-9).unwrap_or(1e-9)
}

/// `eig`: principal eigenpair, essential spectrum, existence tests.
pub fn cmd_eig(cfg: &Config, reporter: &Reporter) -> Result<()> {
    let scenario = build(cfg, equilibrium_tol(cfg))?;
    let op = DiscreteOperator::from_b_field(
        &scenario.grid,
        &scenario.threshold_comps,
        &scenario.threshold_field,
    )?;
    let eig = principal_eig(&op).context("principal eigenpair")?;
    let sb = sample_field(&scenario.threshold_field)?;
    let gap_tol = cfg.get_f64_or("spectral", "gap_tol", GAP_TOL)?;
    let verdict = existence_gap_test(eig.lambda, &sb, gap_tol);
    let lambda0 = sb.eta + (1.0_f64).max(0.1 * sb.eta.abs());
    let radius = resolvent_radius_test(
        &scenario.grid,
        &scenario.threshold_comps,
        &scenario.threshold_field,
        &sb,
        lambda0,
    )?;
    let indicator = l1_divergence_indicator(
        &sb,
        &scenario.grid,
        DIVERGENCE_DELTA_REG,
        DIVERGENCE_CAP,
    )?;

    let mut body = String::new();
    let _ = writeln!(body, "# degenerate_components={:?}", op.degenerate_set());
    if sb.irreducible_nodes == 0 {
        let _ = writeln!(
            body,
            "# warning: no irreducible node found; the coupling witness may sit between nodes"
        );
    }
    let _ = writeln!(
        body,
        "lambda,residual,iterations,strongly_positive,eta,eta_node,gap_verdict,\
         resolvent_lambda0,resolvent_radius,l1_divergence_indicator"
    );
    let _ = writeln!(
        body,
        "{},{},{},{},{},{},{},{},{},{}",
        fmt(eig.lambda),
        fmt(eig.residual),
        eig.iterations,
        eig.strongly_positive,
        fmt(sb.eta),
        sb.argmax,
        match verdict {
            GapVerdict::Exists => "exists",
            GapVerdict::NotExists => "not_exists",
            GapVerdict::Marginal => "marginal",
        },
        fmt(lambda0),
        fmt(radius),
        fmt(indicator),
    );
    let path = reporter.write("eig.csv", &body)?;
    println!("wrote {}", path.display());

    let mut ess = String::from("node_index,x,re,im\n");
    for p in essential_spectrum(&scenario.threshold_field) {
        let _ = writeln!(
            ess,
            "{},{},{},{}",
            p.node,
            fmt(scenario.grid.nodes[p.node]),
            fmt(p.value.re),
            fmt(p.value.im)
        );
    }
    let path = reporter.write("ess_spectrum.csv", &ess)?;
    println!("wrote {}", path.display());
    println!(
        "lambda_p = {:.12e}  eta = {:.12e}  verdict = {verdict:?}",
        eig.lambda, sb.eta
    );
    finish_consumed(cfg, scenario.consumed, &["spectral", "output"])?;
    Ok(())
}

/// `squeeze`: the control-operator bracket over the epsilon schedule.
pub fn cmd_squeeze(cfg: &Config, reporter: &Reporter) -> Result<()> {
    let scenario = build(cfg, equilibrium_tol(cfg))?;
    let mut consumed = scenario.consumed.clone();
    let sched = schedule(cfg, &mut consumed)?;
    let report = squeeze(
        &scenario.grid,
        &scenario.threshold_comps,
        &scenario.threshold_field,
        &sched,
    )?;
    let path = reporter.write("squeeze.csv", &squeeze_csv(&report))?;
    println!("wrote {}", path.display());
    println!(
        "certified interval [{:.12e}, {:.12e}], estimate {:.12e}",
        report.certified_interval.0, report.certified_interval.1, report.lambda_estimate
    );
    finish_consumed(cfg, consumed, &["output"])?;
    Ok(())
}

pub fn squeeze_csv(report: &SqueezeReport) -> String {
    let mut body = String::from("eps,lambda_lower,lambda_upper,gap,iters_lower,iters_upper\n");
    for k in 0..report.schedule.len() {
        let _ = writeln!(
            body,
            "{},{},{},{},{},{}",
            fmt(report.schedule[k]),
            fmt(report.lower_eigs[k]),
            fmt(report.upper_eigs[k]),
            fmt(report.upper_eigs[k] - report.lower_eigs[k]),
            report.iters_lower[k],
            report.iters_upper[k],
        );
    }
    body
}

/// `simulate`: integrate, classify, and cross-check against the squeeze.
pub fn cmd_simulate(cfg: &Config, reporter: &Reporter, seed: u64) -> Result<()> {
    let scenario = build(cfg, equilibrium_tol(cfg))?;
    let mut consumed = scenario.consumed.clone();
    let sched = schedule(cfg, &mut consumed)?;
    let u0 = initial_state(cfg, &scenario, &mut consumed)?;
    for key in ["t_end", "dt", "stride", "tol"] {
        consumed.push(("dynamics".into(), key.into()));
    }
    let t_end = cfg.get_f64_or("dynamics", "t_end", 50.0)?;
    let stride = cfg.get_usize_or("dynamics", "stride", 10)?;
    let tol = cfg.get_f64_or("dynamics", "tol", 1e-6)?;
    let cap = scenario.disc.cap_with(&u0);
    let auto_dt = 0.5 * scenario.disc.stability_dt(&cap);
    let dt = match cfg.get_f64_or("dynamics", "dt", 0.0)? {
        v if v > 0.0 => v,
        _ => auto_dt,
    };

    let traj = integrate(&scenario.disc, &u0, t_end, dt, stride)?;
    let squeeze_report = squeeze(
        &scenario.grid,
        &scenario.threshold_comps,
        &scenario.threshold_field,
        &sched,
    )?;
    let sign = squeeze_report.interval_sign();

    // Observed regime: the infected sub-state decides extinction questions;
    // the full state decides persistence against a computed equilibrium.
    let observable = substate(&traj.states, &scenario.infected_components);
    let observable_traj = nlds_core::dynamics::Trajectory {
        model_id: traj.model_id.clone(),
        dt: traj.dt,
        times: traj.times.clone(),
        states: observable,
        clip_events: traj.clip_events,
        roundoff_clamps: traj.roundoff_clamps,
    };
    let equilibrium = persistent_equilibrium(cfg, &scenario, seed)?;
    let mut full_verdict = classify(&traj, equilibrium.as_ref(), tol);
    let infected_verdict = classify(&observable_traj, None, tol);
    if equilibrium.is_none()
        && full_verdict.verdict == Regime::Undetermined
        && nlds_core::dynamics::stabilized(&traj, tol, 3)
        && observable_traj.terminal().min() > tol
    {
        // No equilibrium to compare against (non-cooperative model without
        // a reduction); a stabilized, strictly positive infected state is
        // the persistence witness.
        full_verdict.verdict = Regime::ConvergesPositive;
    }

    let (predicted, observed, coherent) = match sign {
        IntervalSign::Positive => {
            let obs = full_verdict.verdict;
            (Regime::ConvergesPositive, obs, obs == Regime::ConvergesPositive)
        }
        IntervalSign::Negative => {
            let obs = infected_verdict.verdict;
            (Regime::DecaysToZero, obs, obs == Regime::DecaysToZero)
        }
        IntervalSign::Straddling => (Regime::Undetermined, full_verdict.verdict, true),
    };

    // Trajectory export.
    let mut body = String::from("t,component,node_index,x,value\n");
    for (ti, t) in traj.times.iter().enumerate() {
        let state = &traj.states[ti];
        for i in 0..state.components() {
            for m in 0..state.nodes() {
                let _ = writeln!(
                    body,
                    "{},{},{},{},{}",
                    fmt(*t),
                    i,
                    m,
                    fmt(scenario.grid.nodes[m]),
                    fmt(state[(i, m)])
                );
            }
        }
    }
    let path = reporter.write("trajectory.csv", &body)?;
    println!("wrote {}", path.display());

    let mut verdict = String::new();
    let _ = writeln!(verdict, "lambda_lower = {}", fmt(squeeze_report.certified_interval.0));
    let _ = writeln!(verdict, "lambda_upper = {}", fmt(squeeze_report.certified_interval.1));
    let _ = writeln!(verdict, "lambda_estimate = {}", fmt(squeeze_report.lambda_estimate));
    let _ = writeln!(
        verdict,
        "predicted_regime = {}",
        match sign {
            IntervalSign::Positive => "converges_positive".to_string(),
            IntervalSign::Negative => "decays_to_zero".to_string(),
            IntervalSign::Straddling => "critical: prediction suspended".to_string(),
        }
    );
    let _ = writeln!(verdict, "observed_regime = {observed}");
    let _ = writeln!(verdict, "terminal_residual = {}", fmt(full_verdict.terminal_residual));
    if matches!(sign, IntervalSign::Negative) {
        if let Some(rate) = infected_verdict.decay_rate.or(full_verdict.decay_rate) {
            let _ = writeln!(verdict, "decay_rate = {}", fmt(rate));
        }
        // Guaranteed decay exponent from the upper control operator.
        let sigma_pred = -squeeze_report.certified_interval.1 / 2.0;
        let _ = writeln!(verdict, "sigma_pred = {}", fmt(sigma_pred));
    }
    let _ = writeln!(verdict, "clip_events = {}", traj.clip_events);
    let _ = writeln!(
        verdict,
        "coherence = {}",
        if matches!(sign, IntervalSign::Straddling) {
            "SUSPENDED"
        } else if coherent {
            "PASS"
        } else {
            "FAIL"
        }
    );
    let path = reporter.write("verdict.txt", &verdict)?;
    println!("wrote {}", path.display());
    print!("{verdict}");

    finish_consumed(cfg, consumed, &["equilibrium", "output"])?;
    if !matches!(sign, IntervalSign::Straddling) && !coherent {
        bail!(CoherenceFailure(format!(
            "predicted {predicted:?} but observed {observed:?}"
        )));
    }
    Ok(())
}

fn substate(states: &[State], comps: &[usize]) -> Vec<State> {
    states
        .iter()
        .map(|s| {
            let mut out = State::zeros(comps.len(), s.nodes());
            for (row, &i) in comps.iter().enumerate() {
                out.component_mut(row).copy_from_slice(s.component(i));
            }
            out
        })
        .collect()
}

/// Computes the expected persistent-regime state when the pipeline can:
/// for the epidemic reduction it assembles the 4-component equilibrium, for
/// cooperative models it runs monotone iteration from the canonical pair.
fn persistent_equilibrium(cfg: &Config, scenario: &Scenario, _seed: u64) -> Result<Option<State>> {
    let tol = equilibrium_tol(cfg);
    let max_iter = cfg.get_usize_or("equilibrium", "max_iter", 50_000)?;
    if let Some(red) = &scenario.wnv {
        let disc =
            nlds_core::models::DiscretizedModel::new(red.truncated.clone(), scenario.grid.clone())?;
        let Some(lower) = canonical_lower_solution(&disc) else {
            return Ok(None);
        };
        let pair = match OrderedPair::new(&disc, lower, disc.spec.canonical_upper.clone(), 1e-7) {
            Ok(p) => p,
            Err(_) => return Ok(None),
        };
        let eq = monotone_iterate(&disc, &pair, max_iter, tol)?;
        let m = scenario.grid.len();
        let mut full = State::zeros(4, m);
        for node in 0..m {
            let hi = eq.u[(0, node)];
            let vi = eq.u[(1, node)];
            full[(0, node)] = red.host_total[(0, node)] - hi;
            full[(1, node)] = hi;
            full[(2, node)] = red.vector_total[(0, node)] - vi;
            full[(3, node)] = vi;
        }
        return Ok(Some(full));
    }
    if !scenario.disc.spec.cooperative {
        return Ok(None);
    }
    let Some(lower) = canonical_lower_solution(&scenario.disc) else {
        return Ok(None);
    };
    let upper = scenario.disc.spec.canonical_upper.clone();
    let pair = match OrderedPair::new(&scenario.disc, lower, upper, 1e-7) {
        Ok(p) => p,
        Err(_) => return Ok(None),
    };
    let eq = monotone_iterate(&scenario.disc, &pair, max_iter, tol)?;
    Ok(Some(eq.u))
}

/// `equilibrium`: monotone iteration plus the positivity, subhomogeneity,
/// uniqueness and pointwise-continuity probes.
pub fn cmd_equilibrium(cfg: &Config, reporter: &Reporter, seed: u64) -> Result<()> {
    let scenario = build(cfg, equilibrium_tol(cfg))?;
    let mut consumed = scenario.consumed.clone();
    for key in ["tol", "max_iter", "lower", "upper"] {
        consumed.push(("equilibrium".into(), key.into()));
    }
    let tol = equilibrium_tol(cfg);
    let max_iter = cfg.get_usize_or("equilibrium", "max_iter", 50_000)?;

    // The cooperative system the iteration runs on: the reduced pair for
    // the epidemic model, the model itself otherwise.
    let disc = if let Some(red) = &scenario.wnv {
        nlds_core::models::DiscretizedModel::new(red.truncated.clone(), scenario.grid.clone())?
    } else if scenario.disc.spec.cooperative {
        nlds_core::models::DiscretizedModel::new(scenario.disc.spec.clone(), scenario.grid.clone())?
    } else {
        bail!(
            "model `{}` is not cooperative; equilibria are only computed for its reduction",
            scenario.disc.spec.name
        );
    };

    let lower = if cfg.has("equilibrium", "lower") {
        state_from_exprs(cfg, "equilibrium", "lower", &disc)?
    } else {
        canonical_lower_solution(&disc).ok_or_else(|| {
            anyhow::anyhow!(
                "no canonical lower solution: the threshold eigenvalue is not positive, \
                 so no positive equilibrium is expected"
            )
        })?
    };
    let upper = if cfg.has("equilibrium", "upper") {
        state_from_exprs(cfg, "equilibrium", "upper", &disc)?
    } else {
        disc.spec.canonical_upper.clone()
    };
    let pair = OrderedPair::new(&disc, lower, upper, 10.0 * tol)
        .context("canonical bracket is not an ordered pair")?;
    let eq = monotone_iterate(&disc, &pair, max_iter, tol)?;

    let mut body = String::from("component,node_index,x,value\n");
    for i in 0..eq.u.components() {
        for m in 0..eq.u.nodes() {
            let _ = writeln!(
                body,
                "{},{},{},{}",
                i,
                m,
                fmt(scenario.grid.nodes[m]),
                fmt(eq.u[(i, m)])
            );
        }
    }
    let path = reporter.write("equilibrium.csv", &body)?;
    println!("wrote {}", path.display());

    // Probes.
    let linearization = disc.linearize_at_zero();
    let mp = strong_max_principle_check(&linearization, &eq.u, POS_TOL)?;
    let sub = random_subhomogeneity_check(&disc, 10_000, seed);
    let scale = 1.0 + eq.u.sup_norm();
    let seeds = vec![
        (pair.lower.clone(), pair.upper.clone()),
        (pair.lower.scale(0.5), pair.upper.scale(1.5)),
        (pair.lower.scale(0.25), pair.upper.scale(2.0)),
    ];
    let uniq = uniqueness_probe(&disc, seeds, max_iter, tol);
    let m = scenario.grid.len();
    let probe_nodes = [0, m / 2, m - 1];
    let mut continuity = Vec::new();
    for &node in &probe_nodes {
        let verdict = pointwise_continuity_probe(&disc, &eq.u, node, 20, seed ^ node as u64)?;
        continuity.push((node, verdict));
    }

    let mut report = String::new();
    let _ = writeln!(report, "residual = {}", fmt(eq.residual));
    let _ = writeln!(report, "bracket_gap = {}", fmt(eq.bracket_gap));
    let _ = writeln!(report, "iterations_lower = {}", eq.iterations_lower);
    let _ = writeln!(report, "iterations_upper = {}", eq.iterations_upper);
    let _ = writeln!(report, "min_value = {}", fmt(eq.u.min()));
    let _ = writeln!(report, "max_value = {}", fmt(eq.u.max()));
    let _ = writeln!(report, "strong_max_principle = {mp}");
    let _ = writeln!(report, "subhomogeneity_declared = {}", disc.spec.subhomogeneity);
    let _ = writeln!(report, "subhomogeneity_observed = {}", sub.observed);
    let _ = writeln!(report, "subhomogeneity_satisfied = {}", sub.satisfies_declared);
    let _ = writeln!(
        report,
        "subhomogeneity_counts = violated:{} sub:{} strict:{} strong:{}",
        sub.violated, sub.sub, sub.strict, sub.strong
    );
    let _ = writeln!(report, "uniqueness_pass = {}", uniq.pass);
    let _ = writeln!(
        report,
        "uniqueness_spread = {}",
        fmt(uniq.max_pairwise_distance)
    );
    let _ = writeln!(report, "uniqueness_rejected_seeds = {}", uniq.rejected.len());
    for (node, verdict) in &continuity {
        let tag = match verdict {
            ContinuityVerdict::UniqueRoot(_) => "unique_root".to_string(),
            ContinuityVerdict::MultipleRoots(r) => format!("multiple_roots({})", r.len()),
            ContinuityVerdict::NoPositiveRoot => "no_positive_root".to_string(),
        };
        let _ = writeln!(report, "pointwise_continuity_node_{node} = {tag}");
    }
    let _ = writeln!(report, "probe_scale = {}", fmt(scale));
    let path = reporter.write("equilibrium_report.txt", &report)?;
    println!("wrote {}", path.display());
    print!("{report}");
    finish_consumed(cfg, consumed, &["spectral", "dynamics", "output"])?;
    Ok(())
}

fn state_from_exprs(
    cfg: &Config,
    section: &str,
    key: &str,
    disc: &nlds_core::models::DiscretizedModel,
) -> Result<State> {
    let exprs = cfg.get_expr_list(section, key)?;
    let n = disc.n();
    let exprs = if exprs.len() == 1 {
        vec![exprs[0].clone(); n]
    } else if exprs.len() == n {
        exprs
    } else {
        bail!("`{section}.{key}` needs 1 or {n} expressions");
    };
    let mut s = State::zeros(n, disc.nodes());
    for (i, e) in exprs.iter().enumerate() {
        for (m, &x) in disc.grid.nodes.iter().enumerate() {
            s[(i, m)] = e.eval(x);
        }
    }
    Ok(s)
}

/// `sweep`: re-run the squeeze across a parameter range.
pub fn cmd_sweep(cfg: &Config, reporter: &Reporter) -> Result<()> {
    let keys_raw = cfg.get_str("sweep", "keys").or_else(|_| cfg.get_str("sweep", "key"))?;
    let from = cfg.get_f64("sweep", "from")?;
    let to = cfg.get_f64("sweep", "to")?;
    let points = cfg.get_usize("sweep", "points")?;
    if points == 0 {
        bail!("{}: sweep.points must be at least 1 (empty range)", cfg.path);
    }
    let keys: Vec<(String, String)> = keys_raw
        .split(',')
        .map(|item| {
            let item = item.trim();
            item.split_once('.')
                .map(|(s, k)| (s.to_string(), k.to_string()))
                .ok_or_else(|| anyhow::anyhow!("sweep key `{item}` must look like section.key"))
        })
        .collect::<Result<_>>()?;

    let mut body = String::from("value,lambda_lower,lambda_upper,gap,sign\n");
    for idx in 0..points {
        let value = if points == 1 {
            from
        } else {
            from + (to - from) * idx as f64 / (points - 1) as f64
        };
        let mut varied = cfg.clone();
        for (section, key) in &keys {
            varied.set(section, key, format!("{value}"));
        }
        let scenario = build(&varied, equilibrium_tol(&varied))?;
        let mut consumed = scenario.consumed;
        let sched = schedule(&varied, &mut consumed)?;
        let report = squeeze(
            &scenario.grid,
            &scenario.threshold_comps,
            &scenario.threshold_field,
            &sched,
        )?;
        let sign = match report.interval_sign() {
            IntervalSign::Positive => "positive",
            IntervalSign::Negative => "negative",
            IntervalSign::Straddling => "straddling",
        };
        let _ = writeln!(
            body,
            "{},{},{},{},{}",
            fmt(value),
            fmt(report.certified_interval.0),
            fmt(report.certified_interval.1),
            fmt(report.interval_width()),
            sign
        );
    }
    let path = reporter.write("sweep.csv", &body)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Marks whole sections as consumed and rejects leftovers.
fn finish_consumed(
    cfg: &Config,
    mut consumed: Vec<(String, String)>,
    free_sections: &[&str],
) -> Result<()> {
    for section in cfg.sections() {
        if free_sections.contains(&section)
            || ["sweep", "dynamics", "spectral", "equilibrium", "output"].contains(&section)
        {
            // Sections owned by other commands are not errors here.
            let section = section.to_string();
            for key in known_keys(&section) {
                consumed.push((section.clone(), key.to_string()));
            }
        }
    }
    cfg.check_consumed(&consumed)
}

fn known_keys(section: &str) -> &'static [&'static str] {
    match section {
        "spectral" => &["eps0", "levels", "gap_tol"],
        "dynamics" => &["t_end", "dt", "stride", "tol", "u0"],
        "equilibrium" => &["tol", "max_iter", "lower", "upper"],
        "sweep" => &["key", "keys", "from", "to", "points"],
        "output" => &["dir"],
        _ => &[],
    }
}
