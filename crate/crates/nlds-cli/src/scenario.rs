//! Builds grids, models and threshold fields from a scenario config.
//!
//! Each model documents its `[model]` keys next to its builder. The
//! threshold field is the cooperative coefficient field whose squeeze
//! decides persistence: the linearization at zero for cooperative models,
//! the reduced infected-pair linearization for the epidemic systems.

use std::sync::Arc;

use anyhow::{bail, Context, Result};
use nlds_core::expr::Expr;
use nlds_core::field::MatrixField;
use nlds_core::grid::{build_grid, SpatialGrid};
use nlds_core::kernel::{BoundaryKind, BoundaryMode, KernelSpec};
use nlds_core::models::{
    benthic_drift, capasso_maddalena, linear_scalar, logistic, may_nowak,
    may_nowak_infection_field, may_nowak_source_equilibrium, wnv_equilibrium_fields, wnv_full,
    wnv_reduce, BenthicParams, CapassoParams, DiscretizedModel, MayNowakParams, SaturatingGain,
    WnvParams, WnvReduction,
};
use nlds_core::operator::ComponentDispersal;
use nlds_core::state::State;

use crate::config::Config;

/// Everything a command needs about one scenario.
pub struct Scenario {
    pub grid: SpatialGrid,
    /// Discretization of the full model (the one that is integrated).
    pub disc: DiscretizedModel,
    /// Components carrying the threshold field.
    pub threshold_comps: Vec<ComponentDispersal>,
    /// Cooperative coefficient field whose squeeze decides persistence.
    pub threshold_field: MatrixField,
    /// Indices of the components that die out in the extinction regime
    /// (all components for single-population models, the infected ones for
    /// the epidemic systems).
    pub infected_components: Vec<usize>,
    /// Keys consumed while building; used to reject unknown config keys.
    pub consumed: Vec<(String, String)>,
    /// WNV reduction data, kept for the equilibrium command.
    pub wnv: Option<WnvReduction>,
}

struct Reader<'a> {
    cfg: &'a Config,
    consumed: Vec<(String, String)>,
}

impl<'a> Reader<'a> {
    fn new(cfg: &'a Config) -> Self {
        Reader {
            cfg,
            consumed: Vec::new(),
        }
    }

    fn mark(&mut self, section: &str, key: &str) {
        self.consumed.push((section.to_string(), key.to_string()));
    }

    fn f64(&mut self, section: &str, key: &str) -> Result<f64> {
        self.mark(section, key);
        self.cfg.get_f64(section, key)
    }

    fn usize(&mut self, section: &str, key: &str) -> Result<usize> {
        self.mark(section, key);
        self.cfg.get_usize(section, key)
    }

    fn str_or(&mut self, section: &str, key: &str, default: &str) -> String {
        self.mark(section, key);
        self.cfg.get_str_or(section, key, default)
    }

    fn str_req(&mut self, section: &str, key: &str) -> Result<String> {
        self.mark(section, key);
        self.cfg.get_str(section, key)
    }

    fn samples(&mut self, grid: &SpatialGrid, section: &str, key: &str) -> Result<Vec<f64>> {
        self.mark(section, key);
        let expr = self.cfg.get_expr(section, key)?;
        Ok(grid.sample(|x| expr.eval(x)))
    }

    fn samples_or(
        &mut self,
        grid: &SpatialGrid,
        section: &str,
        key: &str,
        default: f64,
    ) -> Result<Vec<f64>> {
        if self.cfg.has(section, key) {
            self.samples(grid, section, key)
        } else {
            self.mark(section, key);
            Ok(vec![default; grid.len()])
        }
    }

    /// Kernel + boundary for suffix `sfx` (empty for scalar models):
    /// keys `kernel`, `width`, `kernel_file`, `boundary`, `d`.
    fn dispersal(&mut self, grid: &SpatialGrid, sfx: &str) -> Result<ComponentDispersal> {
        let d = self.f64("model", &format!("d{sfx}"))?;
        let kind = match self.str_or("model", &format!("boundary{sfx}"), "neumann").as_str() {
            "dirichlet" => BoundaryKind::Dirichlet,
            "neumann" => BoundaryKind::Neumann,
            other => bail!("{}: unknown boundary `{other}`", self.cfg.path),
        };
        let family = self.str_or("model", &format!("kernel{sfx}"), "gaussian");
        let kernel = match family.as_str() {
            "gaussian" => KernelSpec::gaussian(self.f64("model", &format!("width{sfx}"))?)?,
            "tent" => KernelSpec::tent(self.f64("model", &format!("width{sfx}"))?)?,
            "uniform" => KernelSpec::uniform_window(self.f64("model", &format!("width{sfx}"))?)?,
            "tabulated" => {
                let path = self.str_req("model", &format!("kernel_file{sfx}"))?;
                KernelSpec::from_csv(&path, grid)
                    .with_context(|| format!("loading tabulated kernel {path}"))?
            }
            other => bail!("{}: unknown kernel family `{other}`", self.cfg.path),
        };
        Ok(ComponentDispersal::new(kernel, BoundaryMode { kind, d }))
    }
}

/// Reads `[grid]` and `[model]`, builds the model and its threshold field.
pub fn build(cfg: &Config, equilibrium_tol: f64) -> Result<Scenario> {
    let mut r = Reader::new(cfg);
    let a = r.f64("grid", "a")?;
    let b = r.f64("grid", "b")?;
    let resolution = r.usize("grid", "resolution")?;
    let grid = build_grid((a, b), resolution)?;

    let name = r.str_req("model", "name")?;
    let scenario = match name.as_str() {
        // Keys: a (expression), d, kernel, width | kernel_file, boundary.
        "logistic" => {
            let af = r.samples(&grid, "model", "a")?;
            let disp = r.dispersal(&grid, "")?;
            let spec = logistic(&grid, &af, disp.kernel.clone(), disp.boundary);
            let disc = DiscretizedModel::new(spec, grid.clone())?;
            let field = disc.linearize_at_zero();
            Scenario {
                threshold_comps: disc.spec.dispersal.clone(),
                threshold_field: field,
                infected_components: vec![0],
                consumed: Vec::new(),
                wnv: None,
                grid,
                disc,
            }
        }
        // Keys: b (expression), d, kernel, width | kernel_file, boundary.
        "linear" => {
            let bf = r.samples(&grid, "model", "b")?;
            let disp = r.dispersal(&grid, "")?;
            let spec = linear_scalar(&grid, &bf, disp.kernel.clone(), disp.boundary);
            let disc = DiscretizedModel::new(spec, grid.clone())?;
            let field = disc.linearize_at_zero();
            Scenario {
                threshold_comps: disc.spec.dispersal.clone(),
                threshold_field: field,
                infected_components: vec![0],
                consumed: Vec::new(),
                wnv: None,
                grid,
                disc,
            }
        }
        // Keys: a1,a2,mu1,mu2,c1,c2,ell1,ell2 (expressions), d1,d2,
        // kernel1/width1/boundary1, kernel2/width2/boundary2.
        "wnv" => {
            let params = WnvParams {
                a1: r.samples(&grid, "model", "a1")?,
                a2: r.samples(&grid, "model", "a2")?,
                mu1: r.samples_or(&grid, "model", "mu1", 0.0)?,
                mu2: r.samples_or(&grid, "model", "mu2", 0.0)?,
                c1: r.samples(&grid, "model", "c1")?,
                c2: r.samples(&grid, "model", "c2")?,
                ell1: r.samples(&grid, "model", "ell1")?,
                ell2: r.samples(&grid, "model", "ell2")?,
                host: r.dispersal(&grid, "1")?,
                vector: r.dispersal(&grid, "2")?,
            };
            let spec = wnv_full(&grid, &params)?;
            let disc = DiscretizedModel::new(spec, grid.clone())?;
            let (h, v) = wnv_equilibrium_fields(&grid, &params, equilibrium_tol)
                .context("total-population equilibria (both thresholds must be positive)")?;
            let reduction = wnv_reduce(&grid, &params, &h, &v, 1e-6)?;
            let threshold_comps = reduction.truncated.dispersal.clone();
            let threshold_field = reduction.linearization.clone();
            Scenario {
                grid,
                disc,
                threshold_comps,
                threshold_field,
                infected_components: vec![1, 3],
                consumed: Vec::new(),
                wnv: Some(reduction),
            }
        }
        // Keys: a1,a2,b,gamma,phi (expressions), d1 (cells), d2 (virus),
        // kernels per suffix.
        "may_nowak" => {
            let params = MayNowakParams {
                a1: r.samples(&grid, "model", "a1")?,
                a2: r.samples(&grid, "model", "a2")?,
                b: r.samples(&grid, "model", "b")?,
                gamma: r.samples(&grid, "model", "gamma")?,
                phi: r.samples(&grid, "model", "phi")?,
                cells: r.dispersal(&grid, "1")?,
                virus: r.dispersal(&grid, "2")?,
            };
            let spec = may_nowak(&grid, &params)?;
            let disc = DiscretizedModel::new(spec, grid.clone())?;
            let z = may_nowak_source_equilibrium(&grid, &params)?;
            let field = may_nowak_infection_field(&grid, &params, &z)?;
            let comps = vec![params.cells.clone(), params.virus.clone()];
            Scenario {
                grid,
                disc,
                threshold_comps: comps,
                threshold_field: field,
                infected_components: vec![1, 2],
                consumed: Vec::new(),
                wnv: None,
            }
        }
        // Keys: gamma11, gamma12, gamma22, kappa (expressions), d1, d2,
        // kernels per suffix. Gain is kappa u / (1 + u).
        "capasso_maddalena" => {
            let params = CapassoParams {
                gamma11: r.samples(&grid, "model", "gamma11")?,
                gamma12: r.samples(&grid, "model", "gamma12")?,
                gamma22: r.samples(&grid, "model", "gamma22")?,
                agents: r.dispersal(&grid, "1")?,
                infectives: r.dispersal(&grid, "2")?,
            };
            let kappa = r.samples(&grid, "model", "kappa")?;
            let gain = Arc::new(SaturatingGain { kappa });
            let spec = capasso_maddalena(&grid, &params, gain)?;
            let disc = DiscretizedModel::new(spec, grid.clone())?;
            let field = disc.linearize_at_zero();
            Scenario {
                threshold_comps: disc.spec.dispersal.clone(),
                threshold_field: field,
                infected_components: vec![0, 1],
                consumed: Vec::new(),
                wnv: None,
                grid,
                disc,
            }
        }
        // Keys: r, m_d, m_b, area_drift, area_benthic (expressions),
        // sigma, mu (reals), d, kernel/width/boundary for the drift zone.
        "benthic_drift" => {
            let params = BenthicParams {
                r: r.samples(&grid, "model", "r")?,
                m_d: r.samples(&grid, "model", "m_d")?,
                m_b: r.samples(&grid, "model", "m_b")?,
                sigma: r.f64("model", "sigma")?,
                mu: r.f64("model", "mu")?,
                area_drift: r.samples_or(&grid, "model", "area_drift", 1.0)?,
                area_benthic: r.samples_or(&grid, "model", "area_benthic", 1.0)?,
                drift: r.dispersal(&grid, "")?,
            };
            let spec = benthic_drift(&grid, &params)?;
            let disc = DiscretizedModel::new(spec, grid.clone())?;
            let field = disc.linearize_at_zero();
            Scenario {
                threshold_comps: disc.spec.dispersal.clone(),
                threshold_field: field,
                infected_components: vec![0, 1],
                consumed: Vec::new(),
                wnv: None,
                grid,
                disc,
            }
        }
        other => bail!(
            "{}: unknown model `{other}` (expected logistic, linear, wnv, may_nowak, \
             capasso_maddalena or benthic_drift)",
            cfg.path
        ),
    };
    let mut scenario = scenario;
    scenario.consumed = r.consumed;
    Ok(scenario)
}

/// Reads the epsilon schedule from `[spectral]`.
pub fn schedule(cfg: &Config, consumed: &mut Vec<(String, String)>) -> Result<Vec<f64>> {
    consumed.push(("spectral".into(), "eps0".into()));
    consumed.push(("spectral".into(), "levels".into()));
    let eps0 = cfg.get_f64_or("spectral", "eps0", 0.1)?;
    let levels = cfg.get_usize_or("spectral", "levels", 11)?;
    if !(eps0 > 0.0) || levels == 0 {
        bail!("{}: spectral schedule needs eps0 > 0 and levels >= 1", cfg.path);
    }
    Ok(nlds_core::control::geometric_schedule(eps0, levels))
}

/// Builds the initial state from `[dynamics] u0`: one expression per
/// component, or a single expression broadcast to all of them.
pub fn initial_state(
    cfg: &Config,
    scenario: &Scenario,
    consumed: &mut Vec<(String, String)>,
) -> Result<State> {
    consumed.push(("dynamics".into(), "u0".into()));
    let exprs = cfg.get_expr_list("dynamics", "u0")?;
    let n = scenario.disc.n();
    let exprs: Vec<Expr> = if exprs.len() == 1 {
        vec![exprs[0].clone(); n]
    } else if exprs.len() == n {
        exprs
    } else {
        bail!(
            "{}: dynamics.u0 needs 1 or {n} expressions, got {}",
            cfg.path,
            exprs.len()
        );
    };
    let mut u0 = State::zeros(n, scenario.grid.len());
    for (i, e) in exprs.iter().enumerate() {
        for (m, &x) in scenario.grid.nodes.iter().enumerate() {
            u0[(i, m)] = e.eval(x);
        }
    }
    Ok(u0)
}
