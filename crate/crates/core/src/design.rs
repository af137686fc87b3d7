//! Solving two-look designs: critical values together with either the
//! sample size (power fixed) or the power (sample size fixed), and grid
//! scans over interim timing and efficacy spending.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{information, BoundarySet, EfficacyModel, LookSchedule, OperatingCharacteristics, SpendingPlan};
use crate::mvn::{norm_cdf, norm_quantile, norm_sf};
use crate::oc::{alpha_components, beta_components, evaluate, Design};
use crate::solver::{multiroot, RootProblem};
use crate::spending::{spend_alpha, spend_beta, targets, SpendTargets};

/// Which quantity is held fixed while the critical values are solved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Power is fixed; solve for the per-arm sample size.
    SolveN { power: f64 },
    /// Per-arm sample size is fixed; solve for the power.
    SolvePower { n: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub model: EfficacyModel,
    /// `beta_total` is ignored: it follows from the mode.
    pub plan: SpendingPlan,
    pub psi: f64,
    pub mode: Mode,
}

impl DesignSpec {
    pub fn validate(&self) -> Result<()> {
        let probe = match self.mode {
            Mode::SolveN { power } => {
                if !(power > 0.0 && power < 1.0) {
                    return Err(Error::Domain(format!("power must lie in (0, 1), got {power}")));
                }
                self.plan.with_beta(1.0 - power)
            }
            Mode::SolvePower { n } => {
                if !(n > 0.0 && n.is_finite()) {
                    return Err(Error::Domain(format!("sample size must be positive, got {n}")));
                }
                self.plan.with_beta(0.5)
            }
        };
        probe.validate()?;
        if !(self.psi > 0.0 && self.psi < 1.0) {
            return Err(Error::Domain(format!("interim fraction must lie in (0, 1), got {}", self.psi)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolvedDesign {
    pub design: Design,
    pub oc: OperatingCharacteristics,
    pub spend: SpendTargets,
    pub converged: bool,
    pub residual_norm: f64,
    pub iterations: usize,
}

impl SolvedDesign {
    pub fn boundaries(&self) -> BoundarySet {
        self.design.boundaries
    }

    pub fn schedule(&self) -> &LookSchedule {
        &self.design.schedule
    }

    pub fn total_n(&self) -> f64 {
        self.design.schedule.total()
    }

    /// Nominal one-sided p-value boundary at the interim, `1 - Φ(c12)`.
    pub fn interim_p_boundary(&self) -> f64 {
        norm_sf(self.design.boundaries.c12)
    }
}

/// Fixed-sample per-arm size `(z_{1-α} + z_{1-β})² (p_t q_t + p_c q_c) / θ²`.
pub fn single_stage_n(model: &EfficacyModel, alpha: f64, beta: f64) -> f64 {
    let z = norm_quantile(1.0 - alpha) + norm_quantile(1.0 - beta);
    z * z * model.unit_variance() / model.theta().powi(2)
}

const RESTART_SCALES: [f64; 4] = [1.0, 0.8, 1.25, 1.6];

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn expit(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

struct Unknowns {
    boundaries: BoundarySet,
    total_n: f64,
    beta: f64,
}

fn decode(spec: &DesignSpec, x: &[f64]) -> Unknowns {
    let c11 = x[0];
    let c12 = c11 + x[1].exp();
    let c2 = x[2];
    let (total_n, beta) = match spec.mode {
        Mode::SolveN { power } => (x[3].exp(), 1.0 - power),
        Mode::SolvePower { n } => (n, expit(x[3])),
    };
    Unknowns {
        boundaries: BoundarySet { c11, c12, c2 },
        total_n,
        beta,
    }
}

fn assemble(spec: &DesignSpec, u: &Unknowns) -> Result<Design> {
    let plan = spec.plan.with_beta(u.beta);
    plan.validate()?;
    Ok(Design {
        model: spec.model,
        schedule: LookSchedule::two_stage(spec.psi, u.total_n)?,
        boundaries: BoundarySet::new(u.boundaries.c11, u.boundaries.c12, u.boundaries.c2)?,
        plan,
    })
}

/// Realised minus target spend for each of the four error events.
fn spend_residual(design: &Design) -> Result<(Vec<f64>, SpendTargets)> {
    let t = targets(&design.model, &design.schedule, &design.plan)?;
    let (a1, a2) = alpha_components(design)?;
    let (b1, b2) = beta_components(design)?;
    Ok((vec![a1 - t.a[0], a2 - t.a[1], b1 - t.b[0], b2 - t.b[1]], t))
}

fn start_point(spec: &DesignSpec, scale: f64) -> Vec<f64> {
    let m = &spec.model;
    let alpha = spec.plan.alpha_total;
    let (total_n, beta) = match spec.mode {
        Mode::SolveN { power } => (1.1 * single_stage_n(m, alpha, 1.0 - power) * scale, 1.0 - power),
        Mode::SolvePower { n } => {
            let drift = m.theta() * (n * scale / m.unit_variance()).sqrt();
            (n, norm_cdf(norm_quantile(1.0 - alpha) - drift).clamp(1e-4, 0.95))
        }
    };
    let plan = spec.plan.with_beta(beta);
    let c2 = norm_quantile(1.0 - alpha);
    let c12 = norm_quantile(1.0 - spend_alpha(spec.psi, &plan).unwrap_or(alpha));
    let interim_info = information(m, spec.psi * total_n).unwrap_or(1.0);
    let mut c11 = norm_quantile(spend_beta(spec.psi, &plan).unwrap_or(beta)) + m.theta() * interim_info.sqrt();
    if !(c11 < c12 - 0.05) {
        c11 = c12 - 0.5;
    }
    let last = match spec.mode {
        Mode::SolveN { .. } => total_n.ln(),
        Mode::SolvePower { .. } => logit(beta),
    };
    vec![c11, (c12 - c11).ln(), c2, last]
}

fn finish(spec: &DesignSpec, x: &[f64], converged: bool, residual_norm: f64, iterations: usize) -> Result<SolvedDesign> {
    let design = assemble(spec, &decode(spec, x))?;
    let (_, spend) = spend_residual(&design)?;
    let oc = evaluate(&design)?;
    Ok(SolvedDesign {
        design,
        oc,
        spend,
        converged,
        residual_norm,
        iterations,
    })
}

/// Best attempt over all restarts; the returned design carries a
/// `converged` flag instead of failing when no start reaches tolerance.
pub fn solve_design_best(spec: &DesignSpec) -> Result<SolvedDesign> {
    spec.validate()?;
    if let Mode::SolveN { power } = spec.mode {
        if spec.model.theta() <= 0.0 {
            return Err(Error::Infeasible(format!(
                "no sample size reaches power {power} when theta = {} <= 0",
                spec.model.theta()
            )));
        }
        if power <= spec.plan.alpha_total {
            return Err(Error::Infeasible(format!(
                "power {power} does not exceed alpha {}",
                spec.plan.alpha_total
            )));
        }
    }

    let residual = |x: &[f64]| -> Vec<f64> {
        assemble(spec, &decode(spec, x))
            .and_then(|d| spend_residual(&d))
            .map(|(r, _)| r)
            .unwrap_or_else(|_| vec![f64::NAN; 4])
    };

    let mut best: Option<(Vec<f64>, f64, usize)> = None;
    let mut last_err = None;
    for scale in RESTART_SCALES {
        let problem = RootProblem::new(&residual, start_point(spec, scale));
        match multiroot(&problem) {
            Ok(sol) => return finish(spec, &sol.x, true, sol.residual_norm, sol.iterations),
            Err(Error::NonConvergence {
                iterations,
                residual_norm,
                best: x,
            }) => {
                if best.as_ref().is_none_or(|b| residual_norm < b.1) {
                    best = Some((x, residual_norm, iterations));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match (best, last_err) {
        (Some((x, norm, iters)), _) => finish(spec, &x, false, norm, iters),
        (None, Some(e)) => Err(e),
        (None, None) => unreachable!("at least one restart ran"),
    }
}

/// Solve the four spend-matching equations for `spec`.
pub fn solve_design(spec: &DesignSpec) -> Result<SolvedDesign> {
    let solved = solve_design_best(spec)?;
    if !solved.converged {
        return Err(Error::NonConvergence {
            iterations: solved.iterations,
            residual_norm: solved.residual_norm,
            best: vec![
                solved.design.boundaries.c11,
                solved.design.boundaries.c12,
                solved.design.boundaries.c2,
                solved.total_n(),
            ],
        });
    }
    Ok(solved)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub psi_grid: Vec<f64>,
    pub rho_e_grid: Vec<f64>,
    pub constraint: Mode,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.psi_grid.is_empty() || self.rho_e_grid.is_empty() {
            return Err(Error::Domain("grid axes must be non-empty".into()));
        }
        if let Some(p) = self.psi_grid.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
            return Err(Error::Domain(format!("interim fraction {p} outside (0, 1)")));
        }
        if let Some(r) = self.rho_e_grid.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(Error::Domain(format!("spending exponent {r} must be positive")));
        }
        Ok(())
    }

    fn points(&self) -> Vec<(f64, f64)> {
        let mut psi = self.psi_grid.clone();
        let mut rho = self.rho_e_grid.clone();
        psi.sort_by(f64::total_cmp);
        rho.sort_by(f64::total_cmp);
        psi.iter().flat_map(|&p| rho.iter().map(move |&r| (p, r))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub psi: f64,
    pub rho_e: f64,
    /// Best attempt at this point; absent only when evaluation itself failed.
    pub solved: Option<SolvedDesign>,
    pub error: Option<String>,
}

impl GridRow {
    pub fn converged(&self) -> bool {
        self.solved.as_ref().is_some_and(|s| s.converged)
    }
}

/// One solved design per grid point, rows in `(psi, rho_e)` order. Points
/// are solved in parallel on the current rayon pool.
pub fn grid_scan(grid: &GridSpec, base: &DesignSpec) -> Result<Vec<GridRow>> {
    grid.validate()?;
    Ok(grid
        .points()
        .into_par_iter()
        .map(|(psi, rho_e)| {
            let spec = DesignSpec {
                psi,
                plan: base.plan.with_rho_e(rho_e),
                mode: grid.constraint,
                ..base.clone()
            };
            match solve_design_best(&spec) {
                Ok(s) => {
                    let error = (!s.converged).then(|| format!("no convergence (residual {:e})", s.residual_norm));
                    GridRow {
                        psi,
                        rho_e,
                        solved: Some(s),
                        error,
                    }
                }
                Err(e) => GridRow {
                    psi,
                    rho_e,
                    solved: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect())
}

/// Minimum acceptable operating characteristics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Targets {
    pub power: f64,
    pub omega1: f64,
    pub d1: f64,
}

impl Targets {
    /// Slack applied to every comparison so designs solved exactly at a
    /// target are not rejected by rounding.
    pub const SLACK: f64 = 1e-7;

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.power) || !(0.0..=1.0).contains(&self.omega1) {
            return Err(Error::Domain("power and crossing targets must lie in [0, 1]".into()));
        }
        if !(-1.0..=1.0).contains(&self.d1) {
            return Err(Error::Domain("minimum-difference target must lie in [-1, 1]".into()));
        }
        Ok(())
    }

    pub fn met_by(&self, oc: &OperatingCharacteristics) -> bool {
        oc.power >= self.power - Self::SLACK && oc.omega1 >= self.omega1 - Self::SLACK && oc.d1 >= self.d1 - Self::SLACK
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSearch {
    pub feasible: Vec<GridRow>,
    pub recommended: Option<GridRow>,
}

/// Keep converged rows meeting `targets`; recommend the smallest N (power
/// fixed) or the largest power (N fixed). Earlier rows win ties, which with
/// grid ordering means smaller psi and then smaller rho_e.
pub fn select_feasible(rows: &[GridRow], targets: &Targets, constraint: Mode) -> TargetSearch {
    let feasible: Vec<GridRow> = rows
        .iter()
        .filter(|r| r.converged() && r.solved.as_ref().is_some_and(|s| targets.met_by(&s.oc)))
        .cloned()
        .collect();
    let score = |r: &GridRow| {
        let s = r.solved.as_ref().expect("feasible rows are solved");
        match constraint {
            Mode::SolveN { .. } => s.total_n(),
            Mode::SolvePower { .. } => -s.oc.power,
        }
    };
    let mut recommended: Option<&GridRow> = None;
    for r in &feasible {
        if recommended.is_none_or(|best| score(r) < score(best)) {
            recommended = Some(r);
        }
    }
    let recommended = recommended.cloned();
    TargetSearch { feasible, recommended }
}

pub fn meet_targets(targets: &Targets, base: &DesignSpec, grid: &GridSpec) -> Result<TargetSearch> {
    targets.validate()?;
    let rows = grid_scan(grid, base)?;
    Ok(select_feasible(&rows, targets, grid.constraint))
}
