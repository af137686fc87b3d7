//! Patient-level trial simulation used as an independent check on the
//! analytic operating characteristics.
//!
//! All randomness comes from ChaCha8 (`rand_chacha`). Trial `i` of a run
//! with seed `s` draws exclusively from stream `i` of the generator keyed
//! by `s`, so results do not depend on thread count or scheduling.

use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BoundarySet, EfficacyModel, LookSchedule, OperatingCharacteristics};
use crate::mvn::McEstimate;
use crate::oc::Design;

/// Standardised statistic `(p̂_t - p̂_c - delta) / se` from observed counts;
/// `None` while either arm still has zero sample variance.
fn observed_z(x_t: u64, x_c: u64, n: u64, delta: f64) -> Option<f64> {
    if x_t == 0 || x_t == n || x_c == 0 || x_c == n {
        return None;
    }
    let nf = n as f64;
    let (a, b) = (x_t as f64 / nf, x_c as f64 / nf);
    Some((a - b - delta) / ((a * (1.0 - a) + b * (1.0 - b)) / nf).sqrt())
}

/// Same statistic but total: degenerate variance maps to a signed infinity
/// (or zero), which the decision rules classify unambiguously.
fn decision_z(x_t: u64, x_c: u64, n: u64, delta: f64) -> f64 {
    if let Some(z) = observed_z(x_t, x_c, n, delta) {
        return z;
    }
    let nf = n as f64;
    let diff = x_t as f64 / nf - x_c as f64 / nf - delta;
    let var = {
        let (a, b) = (x_t as f64 / nf, x_c as f64 / nf);
        a * (1.0 - a) + b * (1.0 - b)
    };
    if var > 0.0 {
        diff / (var / nf).sqrt()
    } else if diff > 0.0 {
        f64::INFINITY
    } else if diff < 0.0 {
        f64::NEG_INFINITY
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRun {
    pub seed: u64,
    pub model: EfficacyModel,
    pub max_n: usize,
    /// Statistic after each accumulated patient pair; `None` during burn-in.
    pub z_path: Vec<Option<f64>>,
}

/// One patient pair per step: a Bernoulli(p_t) and a Bernoulli(p_c) draw.
pub fn simulate_trajectory(model: &EfficacyModel, max_n: usize, seed: u64) -> Result<TrajectoryRun> {
    if max_n < 2 {
        return Err(Error::Domain(format!("trajectory needs at least 2 steps, got {max_n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let treat = Bernoulli::new(model.p_t()).map_err(|e| Error::Domain(e.to_string()))?;
    let ctrl = Bernoulli::new(model.p_c()).map_err(|e| Error::Domain(e.to_string()))?;
    let (mut x_t, mut x_c) = (0u64, 0u64);
    let z_path = (1..=max_n as u64)
        .map(|n| {
            x_t += u64::from(treat.sample(&mut rng));
            x_c += u64::from(ctrl.sample(&mut rng));
            observed_z(x_t, x_c, n, model.delta())
        })
        .collect();
    Ok(TrajectoryRun {
        seed,
        model: *model,
        max_n,
        z_path,
    })
}

/// Write trajectories as CSV. Metadata (`# key=value`) lines come first,
/// then the `step,z1,…` header, then one row per step. Missing values are
/// written as `NA`.
pub fn write_trajectories_csv<W: Write>(
    out: &mut W,
    runs: &[TrajectoryRun],
    max_n: usize,
    metadata: &[(String, String)],
) -> io::Result<()> {
    for (k, v) in metadata {
        writeln!(out, "# {k}={v}")?;
    }
    write!(out, "step")?;
    for i in 1..=runs.len() {
        write!(out, ",z{i}")?;
    }
    writeln!(out)?;
    if runs.is_empty() {
        return Ok(());
    }
    for step in 0..max_n {
        write!(out, "{}", step + 1)?;
        for run in runs {
            match run.z_path.get(step).copied().flatten() {
                Some(z) => write!(out, ",{z}")?,
                None => write!(out, ",NA")?,
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Trial outcome counts; each trial lands in exactly one class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionCounts {
    pub interim_efficacy: u64,
    pub interim_futility: u64,
    pub final_success: u64,
    pub final_failure: u64,
}

impl DecisionCounts {
    pub fn total(&self) -> u64 {
        self.interim_efficacy + self.interim_futility + self.final_success + self.final_failure
    }

    fn add(&mut self, o: &Self) {
        self.interim_efficacy += o.interim_efficacy;
        self.interim_futility += o.interim_futility;
        self.final_success += o.final_success;
        self.final_failure += o.final_failure;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalOc {
    pub n_trials: u64,
    pub seed: u64,
    /// Integer per-arm sizes actually simulated.
    pub n1: u64,
    pub n_total: u64,
    pub h0: DecisionCounts,
    pub h1: DecisionCounts,
    pub alpha1: McEstimate,
    pub alpha2: McEstimate,
    pub alpha: McEstimate,
    pub beta1: McEstimate,
    pub beta2: McEstimate,
    pub beta: McEstimate,
    pub omega1: McEstimate,
    pub omega2: McEstimate,
    pub power: McEstimate,
    /// Sample correlation of (Z1, Z2) under H1.
    pub corr_z1_z2: Estimate,
    /// Per-arm expected sample size under H1, futility stops counted.
    pub ess_h1: Estimate,
}

#[derive(Default, Clone, Copy)]
struct Block {
    h0: DecisionCounts,
    h1: DecisionCounts,
    /// H0 trials with Z1 < c12 and Z2 > c2, ignoring the futility bound.
    h0_late_nonbinding: u64,
    s1: f64,
    s2: f64,
    s11: f64,
    s22: f64,
    s12: f64,
    paired: u64,
}

fn classify(z1: f64, z2: f64, b: &BoundarySet, counts: &mut DecisionCounts) {
    if z1 > b.c12 {
        counts.interim_efficacy += 1;
    } else if z1 < b.c11 {
        counts.interim_futility += 1;
    } else if z2 > b.c2 {
        counts.final_success += 1;
    } else {
        counts.final_failure += 1;
    }
}

struct Arm {
    stage1: Binomial,
    stage2: Binomial,
}

impl Arm {
    fn new(p: f64, n1: u64, n_total: u64) -> Result<Self> {
        let mk = |n, p| Binomial::new(n, p).map_err(|e| Error::Domain(e.to_string()));
        Ok(Self {
            stage1: mk(n1, p)?,
            stage2: mk(n_total - n1, p)?,
        })
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> (u64, u64) {
        let first = self.stage1.sample(rng);
        (first, first + self.stage2.sample(rng))
    }
}

const TRIAL_BLOCK: u64 = 1 << 14;

/// Integer-size copy of `design` matching what the simulator runs.
pub fn integer_design(design: &Design) -> Result<Design> {
    let n_total = design.schedule.total().round();
    let n1 = design.schedule.n(0).round();
    Ok(Design {
        schedule: LookSchedule::new(vec![n1, n_total])?,
        ..design.clone()
    })
}

/// Simulate `n_trials` complete trials under H1 and under the null boundary
/// (`p_t = p_c + delta`) and tabulate the decision rule of `design`.
pub fn estimate_oc(design: &Design, n_trials: u64, seed: u64) -> Result<EmpiricalOc> {
    if n_trials == 0 {
        return Err(Error::Domain("need at least one simulated trial".into()));
    }
    if design.schedule.looks() != 2 {
        return Err(Error::UnsupportedDimension(design.schedule.looks()));
    }
    let rounded = integer_design(design)?;
    let n1 = rounded.schedule.n(0) as u64;
    let n_total = rounded.schedule.total() as u64;
    if n1 == 0 || n_total <= n1 {
        return Err(Error::Domain(format!("simulated sizes n1={n1}, N={n_total} are not increasing")));
    }
    let model = &design.model;
    let null = model
        .null_boundary()
        .map_err(|_| Error::Domain(format!("null treatment rate p_c + delta = {} outside (0, 1)", model.p_c() + model.delta())))?;
    let delta = model.delta();
    let alt_t = Arm::new(model.p_t(), n1, n_total)?;
    let null_t = Arm::new(null.p_t(), n1, n_total)?;
    let ctrl = Arm::new(model.p_c(), n1, n_total)?;
    let bounds = design.boundaries;

    let blocks: Vec<Block> = (0..n_trials.div_ceil(TRIAL_BLOCK))
        .into_par_iter()
        .map(|blk| {
            let mut acc = Block::default();
            let start = blk * TRIAL_BLOCK;
            for trial in start..(start + TRIAL_BLOCK).min(n_trials) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(trial);

                let (t1, t2) = alt_t.draw(&mut rng);
                let (c1, c2) = ctrl.draw(&mut rng);
                let z1 = decision_z(t1, c1, n1, delta);
                let z2 = decision_z(t2, c2, n_total, delta);
                classify(z1, z2, &bounds, &mut acc.h1);
                if z1.is_finite() && z2.is_finite() {
                    acc.s1 += z1;
                    acc.s2 += z2;
                    acc.s11 += z1 * z1;
                    acc.s22 += z2 * z2;
                    acc.s12 += z1 * z2;
                    acc.paired += 1;
                }

                let (t1, t2) = null_t.draw(&mut rng);
                let (c1, c2) = ctrl.draw(&mut rng);
                let z1 = decision_z(t1, c1, n1, delta);
                let z2 = decision_z(t2, c2, n_total, delta);
                classify(z1, z2, &bounds, &mut acc.h0);
                if z1 <= bounds.c12 && z2 > bounds.c2 {
                    acc.h0_late_nonbinding += 1;
                }
            }
            acc
        })
        .collect();

    // combine in block order so floating-point sums are reproducible
    let mut tot = Block::default();
    for b in &blocks {
        tot.h0.add(&b.h0);
        tot.h1.add(&b.h1);
        tot.h0_late_nonbinding += b.h0_late_nonbinding;
        tot.s1 += b.s1;
        tot.s2 += b.s2;
        tot.s11 += b.s11;
        tot.s22 += b.s22;
        tot.s12 += b.s12;
        tot.paired += b.paired;
    }

    let est = |hits| McEstimate::from_counts(hits, n_trials);
    let late_h0 = if design.plan.futility_binding {
        tot.h0.final_success
    } else {
        tot.h0_late_nonbinding
    };
    let corr = {
        let n = tot.paired as f64;
        let (m1, m2) = (tot.s1 / n, tot.s2 / n);
        let cov = tot.s12 / n - m1 * m2;
        let r = cov / ((tot.s11 / n - m1 * m1) * (tot.s22 / n - m2 * m2)).sqrt();
        Estimate {
            value: r,
            se: (1.0 - r * r) / n.sqrt(),
        }
    };
    let stop = est(tot.h1.interim_efficacy + tot.h1.interim_futility);
    let span = (n_total - n1) as f64;
    Ok(EmpiricalOc {
        n_trials,
        seed,
        n1,
        n_total,
        h0: tot.h0,
        h1: tot.h1,
        alpha1: est(tot.h0.interim_efficacy),
        alpha2: est(late_h0),
        alpha: est(tot.h0.interim_efficacy + late_h0),
        beta1: est(tot.h1.interim_futility),
        beta2: est(tot.h1.final_failure),
        beta: est(tot.h1.interim_futility + tot.h1.final_failure),
        omega1: est(tot.h1.interim_efficacy),
        omega2: est(tot.h1.final_success),
        power: est(tot.h1.interim_efficacy + tot.h1.final_success),
        corr_z1_z2: corr,
        ess_h1: Estimate {
            value: n_total as f64 - span * stop.p,
            se: span * stop.se,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub name: String,
    pub empirical: f64,
    pub se: f64,
    pub analytic: f64,
    /// Distance in standard errors.
    pub z: f64,
    pub pass: bool,
}

/// Compare simulated against analytic characteristics at `tolerance`
/// standard errors. `analytic` should be evaluated on
/// [`integer_design`] so both sides describe the same trial.
pub fn compare(empirical: &EmpiricalOc, analytic: &OperatingCharacteristics, tolerance: f64) -> Vec<Comparison> {
    let expected_corr = (empirical.n1 as f64 / empirical.n_total as f64).sqrt();
    let ess_analytic = analytic.ess_h1;
    let mut rows: Vec<(&str, f64, f64, f64)> = vec![
        ("alpha1", empirical.alpha1.p, empirical.alpha1.se, analytic.alpha1),
        ("alpha", empirical.alpha.p, empirical.alpha.se, analytic.alpha1 + analytic.alpha2),
        ("beta", empirical.beta.p, empirical.beta.se, analytic.beta1 + analytic.beta2),
        ("omega1", empirical.omega1.p, empirical.omega1.se, analytic.omega1),
        ("omega2", empirical.omega2.p, empirical.omega2.se, analytic.omega2),
    ];
    rows.push(("corr_z1_z2", empirical.corr_z1_z2.value, empirical.corr_z1_z2.se, expected_corr));
    rows.push(("ess_h1", empirical.ess_h1.value, empirical.ess_h1.se, ess_analytic));
    rows.into_iter()
        .map(|(name, e, se, a)| {
            let z = if se > 0.0 {
                (e - a).abs() / se
            } else if e == a {
                0.0
            } else {
                f64::INFINITY
            };
            Comparison {
                name: name.to_string(),
                empirical: e,
                se,
                analytic: a,
                z,
                pass: z <= tolerance,
            }
        })
        .collect()
}
