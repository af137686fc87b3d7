//! Report documents and their human-readable rendering.

use std::fmt::Write as _;

use gsd_core::sim::{Comparison, EmpiricalOc};
use gsd_core::{BoundarySet, OperatingCharacteristics, SolvedDesign};
use serde::{Deserialize, Serialize};

use crate::config::Config;

/// Six significant digits without exponent notation for ordinary magnitudes.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-5..=9).contains(&mag) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub config: Config,
    pub mode: String,
    pub converged: bool,
    pub residual_norm: f64,
    pub iterations: usize,
    pub boundaries: BoundarySet,
    pub n1: f64,
    pub n: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n1_ceil: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_ceil: Option<u64>,
    pub beta: f64,
    pub interim_p_boundary: f64,
    pub spend_alpha: Vec<f64>,
    pub spend_beta: Vec<f64>,
    pub oc: OperatingCharacteristics,
    /// How the expected sample size treats futility crossings.
    pub ess_convention: String,
}

impl DesignReport {
    pub fn new(config: &Config, mode: &str, solved: &SolvedDesign, ceil: bool) -> Self {
        let n1 = solved.schedule().n(0);
        let n = solved.total_n();
        Self {
            config: config.clone(),
            mode: mode.to_string(),
            converged: solved.converged,
            residual_norm: solved.residual_norm,
            iterations: solved.iterations,
            boundaries: solved.boundaries(),
            n1,
            n,
            n1_ceil: ceil.then(|| n1.ceil() as u64),
            n_ceil: ceil.then(|| n.ceil() as u64),
            beta: solved.design.plan.beta_total,
            interim_p_boundary: solved.interim_p_boundary(),
            spend_alpha: solved.spend.a.clone(),
            spend_beta: solved.spend.b.clone(),
            oc: solved.oc,
            ess_convention: "futility stops counted".into(),
        }
    }

    pub fn human(&self) -> String {
        let mut s = String::new();
        let b = &self.boundaries;
        let oc = &self.oc;
        let _ = writeln!(s, "mode               {}", self.mode);
        let _ = writeln!(
            s,
            "converged          {} (residual {:.3e}, {} iterations)",
            self.converged, self.residual_norm, self.iterations
        );
        let _ = writeln!(s, "c11 (futility)     {}", sig6(b.c11));
        let _ = writeln!(s, "c12 (efficacy)     {}", sig6(b.c12));
        let _ = writeln!(s, "c2  (final)        {}", sig6(b.c2));
        let _ = writeln!(s, "n1 per arm         {}", sig6(self.n1));
        let _ = writeln!(s, "N per arm          {}", sig6(self.n));
        if let (Some(a), Some(b)) = (self.n1_ceil, self.n_ceil) {
            let _ = writeln!(s, "n1, N (ceiling)    {a}, {b}");
        }
        let _ = writeln!(s, "power              {}", sig6(oc.power));
        let _ = writeln!(s, "interim p boundary {}", sig6(self.interim_p_boundary));
        let _ = writeln!(s, "alpha1, alpha2     {}, {}", sig6(oc.alpha1), sig6(oc.alpha2));
        let _ = writeln!(s, "beta1, beta2       {}, {}", sig6(oc.beta1), sig6(oc.beta2));
        let _ = writeln!(s, "omega1, omega2     {}, {}", sig6(oc.omega1), sig6(oc.omega2));
        let _ = writeln!(s, "d1, d2             {}, {}", sig6(oc.d1), sig6(oc.d2));
        let _ = writeln!(
            s,
            "futility crossing  H0 {}, H1 {}",
            sig6(oc.futility_h0),
            sig6(oc.futility_h1)
        );
        let _ = writeln!(s, "ESS under H1       {} ({})", sig6(oc.ess_h1), self.ess_convention);
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub config: Config,
    /// Critical values used in the simulated trials.
    pub boundaries: BoundarySet,
    /// Critical values of the solved design the analytic values come from.
    pub reference_boundaries: BoundarySet,
    pub tolerance_se: f64,
    pub empirical: EmpiricalOc,
    pub analytic: OperatingCharacteristics,
    pub comparisons: Vec<Comparison>,
}

impl SimulationReport {
    pub fn all_pass(&self) -> bool {
        self.comparisons.iter().all(|c| c.pass)
    }

    pub fn human(&self) -> String {
        let mut s = String::new();
        let e = &self.empirical;
        let _ = writeln!(
            s,
            "simulated {} trials (seed {}), n1={}, N={}",
            e.n_trials, e.seed, e.n1, e.n_total
        );
        let b = &self.boundaries;
        let _ = writeln!(s, "boundaries c11 {}, c12 {}, c2 {}", sig6(b.c11), sig6(b.c12), sig6(b.c2));
        if self.boundaries != self.reference_boundaries {
            let r = &self.reference_boundaries;
            let _ = writeln!(s, "reference  c11 {}, c12 {}, c2 {}", sig6(r.c11), sig6(r.c12), sig6(r.c2));
        }
        let _ = writeln!(
            s,
            "H1 decisions: interim efficacy {}, interim futility {}, final success {}, final failure {}",
            e.h1.interim_efficacy, e.h1.interim_futility, e.h1.final_success, e.h1.final_failure
        );
        let _ = writeln!(
            s,
            "H0 decisions: interim efficacy {}, interim futility {}, final success {}, final failure {}",
            e.h0.interim_efficacy, e.h0.interim_futility, e.h0.final_success, e.h0.final_failure
        );
        let _ = writeln!(s, "{:<12} {:>12} {:>12} {:>12} {:>8}  result", "quantity", "empirical", "se", "analytic", "z");
        for c in &self.comparisons {
            let _ = writeln!(
                s,
                "{:<12} {:>12} {:>12} {:>12} {:>8}  {}",
                c.name,
                sig6(c.empirical),
                sig6(c.se),
                sig6(c.analytic),
                format!("{:.2}", c.z),
                if c.pass { "PASS" } else { "FAIL" }
            );
        }
        let verdict = if self.all_pass() { "all comparisons pass" } else { "some comparisons FAIL" };
        let _ = writeln!(s, "{verdict} at {} SE", self.tolerance_se);
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn abs(name: &str, value: f64, reference: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            reference,
            tolerance,
            pass: (value - reference).abs() <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config: Config,
    pub design: DesignReport,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn human(&self) -> String {
        let mut s = self.design.human();
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{} {:<28} value {} reference {} tolerance {:.3e}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                sig6(c.value),
                sig6(c.reference),
                c.tolerance
            );
        }
        s
    }
}
