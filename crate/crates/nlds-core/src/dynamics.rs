//! Explicit time stepping of the initial value problem with order and
//! positivity diagnostics.
//!
//! Forward Euler under the step bound `dt <= 0.9 / L`, with `L` the
//! dispersal norm plus the reaction Lipschitz estimate, keeps the update
//! map order-preserving on cooperative models: ordered initial data stay
//! ordered, and nonnegative data stay nonnegative up to roundoff.

use crate::models::DiscretizedModel;
use crate::state::State;
use crate::{CoreError, Result};

/// Tolerance below which a negative value counts as roundoff rather than a
/// genuine positivity violation.
pub const POSITIVITY_SLACK: f64 = 1e-12;

/// Recorded trajectory of one integration run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub model_id: String,
    pub dt: f64,
    /// Recording times, starting at 0.
    pub times: Vec<f64>,
    pub states: Vec<State>,
    /// Clamps of values below `-POSITIVITY_SLACK`: genuine positivity
    /// violations of the scheme. Fixture runs must report zero.
    pub clip_events: usize,
    /// Clamps of tiny negative roundoff in `[-POSITIVITY_SLACK, 0)`.
    pub roundoff_clamps: usize,
}

impl Trajectory {
    pub fn terminal(&self) -> &State {
        self.states.last().expect("trajectory records at least u0")
    }
}

/// Integrates the model forward to `t_end`, recording every `stride` steps
/// (and always the final state).
///
/// Fails when the initial state is negative or identically zero, or when
/// `dt` exceeds the stability bound for this model and initial state.
pub fn integrate(
    disc: &DiscretizedModel,
    u0: &State,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<Trajectory> {
    if u0.components() != disc.n() || u0.nodes() != disc.nodes() {
        return Err(CoreError::DimensionMismatch {
            expected: disc.n() * disc.nodes(),
            got: u0.components() * u0.nodes(),
            context: "initial state".into(),
        });
    }
    if !u0.is_nonnegative(0.0) {
        return Err(CoreError::IntegrationFailure(
            "initial state has negative entries".into(),
        ));
    }
    if u0.is_zero() {
        return Err(CoreError::IntegrationFailure(
            "initial state is identically zero".into(),
        ));
    }
    if !(dt > 0.0) || !(t_end > 0.0) {
        return Err(CoreError::IntegrationFailure(format!(
            "need positive dt and horizon, got dt={dt}, t_end={t_end}"
        )));
    }
    let cap = disc.cap_with(u0);
    let dt_max = disc.stability_dt(&cap);
    if dt > dt_max {
        return Err(CoreError::IntegrationFailure(format!(
            "dt={dt} exceeds the stability bound {dt_max:.6}"
        )));
    }
    let stride = stride.max(1);
    let steps = (t_end / dt).ceil() as usize;
    let mut u = u0.clone();
    let mut disp = State::zeros(disc.n(), disc.nodes());
    let mut reac = State::zeros(disc.n(), disc.nodes());
    let mut times = vec![0.0];
    let mut states = vec![u.clone()];
    let mut clip_events = 0usize;
    let mut roundoff_clamps = 0usize;
    for step in 1..=steps {
        disc.dispersal_apply(&u, &mut disp);
        disc.reaction_apply(&u, &mut reac);
        {
            let uv = u.as_vector_mut();
            uv.axpy(dt, disp.as_vector(), 1.0);
            uv.axpy(dt, reac.as_vector(), 1.0);
            for v in uv.iter_mut() {
                if *v < 0.0 {
                    if *v < -POSITIVITY_SLACK {
                        clip_events += 1;
                    } else {
                        roundoff_clamps += 1;
                    }
                    *v = 0.0;
                }
            }
        }
        if step % stride == 0 || step == steps {
            times.push(step as f64 * dt);
            states.push(u.clone());
        }
    }
    Ok(Trajectory {
        model_id: disc.spec.name.clone(),
        dt,
        times,
        states,
        clip_events,
        roundoff_clamps,
    })
}

/// Entrywise ordering of two trajectories of the same discretization:
/// true iff `a <= b` (within slack `1e-10`) at every recorded time.
pub fn comparison_check(a: &Trajectory, b: &Trajectory) -> Result<bool> {
    if a.model_id != b.model_id
        || a.dt != b.dt
        || a.times.len() != b.times.len()
        || a.states[0].components() != b.states[0].components()
        || a.states[0].nodes() != b.states[0].nodes()
    {
        return Err(CoreError::InvalidArgument(
            "comparison requires matching model, step and recording layout".into(),
        ));
    }
    Ok(a.states
        .iter()
        .zip(&b.states)
        .all(|(sa, sb)| sa.le_within(sb, 1e-10)))
}

/// Long-time verdict of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    ConvergesPositive,
    DecaysToZero,
    Undetermined,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::ConvergesPositive => "converges_positive",
            Regime::DecaysToZero => "decays_to_zero",
            Regime::Undetermined => "undetermined",
        };
        f.write_str(s)
    }
}

/// Classification result with its supporting metrics.
#[derive(Debug, Clone)]
pub struct RegimeVerdict {
    pub verdict: Regime,
    /// Distance to the supplied equilibrium, or the last recorded step
    /// change when no equilibrium is given.
    pub terminal_residual: f64,
    /// Exponential rate fitted to the sup-norm tail when decaying.
    pub decay_rate: Option<f64>,
}

/// Classifies the long-time behavior of a trajectory.
///
/// `converges_positive` needs a supplied equilibrium within `tol` and a
/// strictly positive terminal state; `decays_to_zero` needs the terminal
/// sup-norm below `tol`. Everything else, including too-short horizons, is
/// `undetermined`.
pub fn classify(traj: &Trajectory, equilibrium: Option<&State>, tol: f64) -> RegimeVerdict {
    let last = traj.terminal();
    let last_step_change = traj
        .states
        .len()
        .checked_sub(2)
        .map(|i| traj.states[i].sup_distance(last))
        .unwrap_or(f64::INFINITY);
    if let Some(eq) = equilibrium {
        let dist = last.sup_distance(eq);
        if dist < tol && last.min() > tol {
            return RegimeVerdict {
                verdict: Regime::ConvergesPositive,
                terminal_residual: dist,
                decay_rate: None,
            };
        }
    }
    if last.sup_norm() < tol {
        return RegimeVerdict {
            verdict: Regime::DecaysToZero,
            terminal_residual: last.sup_norm(),
            decay_rate: fit_decay_rate(traj),
        };
    }
    RegimeVerdict {
        verdict: Regime::Undetermined,
        terminal_residual: equilibrium
            .map(|eq| last.sup_distance(eq))
            .unwrap_or(last_step_change),
        decay_rate: fit_decay_rate(traj),
    }
}

/// True when the last `checkpoints` recorded steps each changed by less
/// than `tol` in sup-norm.
pub fn stabilized(traj: &Trajectory, tol: f64, checkpoints: usize) -> bool {
    let n = traj.states.len();
    if n < checkpoints + 1 {
        return false;
    }
    (n - checkpoints..n).all(|i| traj.states[i - 1].sup_distance(&traj.states[i]) < tol)
}

/// Least-squares slope of `ln |u|_inf` over the last half of the recorded
/// trajectory; `Some(rate)` with `rate > 0` means decay like `exp(-rate t)`.
pub fn fit_decay_rate(traj: &Trajectory) -> Option<f64> {
    let n = traj.states.len();
    if n < 4 {
        return None;
    }
    let start = n / 2;
    let mut pts = Vec::with_capacity(n - start);
    for i in start..n {
        let norm = traj.states[i].sup_norm();
        if norm <= 0.0 {
            break;
        }
        pts.push((traj.times[i], norm.ln()));
    }
    if pts.len() < 3 {
        return None;
    }
    let len = pts.len() as f64;
    let (st, sy): (f64, f64) = pts.iter().fold((0.0, 0.0), |(a, b), (t, y)| (a + t, b + y));
    let (mt, my) = (st / len, sy / len);
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, y) in &pts {
        num += (t - mt) * (y - my);
        den += (t - mt) * (t - mt);
    }
    if den == 0.0 {
        return None;
    }
    Some(-num / den)
}
