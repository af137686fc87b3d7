//! Domain types shared by every part of the engine, plus the elementary
//! quantities of the Wald statistic for a difference of two proportions
//! with a non-inferiority margin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Assumed responder rates in the two arms and the non-inferiority margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficacyModel {
    p_t: f64,
    p_c: f64,
    delta: f64,
}

impl EfficacyModel {
    pub fn new(p_t: f64, p_c: f64, delta: f64) -> Result<Self> {
        let open_unit = |p: f64| p > 0.0 && p < 1.0;
        if !open_unit(p_t) || !open_unit(p_c) {
            return Err(Error::Domain(format!(
                "responder rates must lie strictly inside (0, 1), got p_t={p_t}, p_c={p_c}"
            )));
        }
        if !(delta > -1.0 && delta < 1.0) {
            return Err(Error::Domain(format!("margin must lie in (-1, 1), got {delta}")));
        }
        Ok(Self { p_t, p_c, delta })
    }

    pub fn p_t(&self) -> f64 {
        self.p_t
    }

    pub fn p_c(&self) -> f64 {
        self.p_c
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Natural estimator `p_t - p_c - delta`; positive under the alternative.
    pub fn theta(&self) -> f64 {
        self.p_t - self.p_c - self.delta
    }

    /// Per-patient-pair variance `p_t q_t + p_c q_c`.
    pub fn unit_variance(&self) -> f64 {
        self.p_t * (1.0 - self.p_t) + self.p_c * (1.0 - self.p_c)
    }

    /// The least favourable null configuration: treatment rate moved to
    /// `p_c + delta` so that `theta == 0`.
    pub fn null_boundary(&self) -> Result<Self> {
        Self::new(self.p_c + self.delta, self.p_c, self.delta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hypothesis {
    H0,
    H1,
}

/// Per-arm sample sizes at each look. Real valued; rounding is a
/// presentation concern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LookSchedule {
    n: Vec<f64>,
}

impl LookSchedule {
    pub fn new(n: Vec<f64>) -> Result<Self> {
        if n.is_empty() {
            return Err(Error::Domain("schedule needs at least one look".into()));
        }
        if n.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::Domain(format!("sample sizes must be positive and finite: {n:?}")));
        }
        if n.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain(format!("sample sizes must be strictly increasing: {n:?}")));
        }
        Ok(Self { n })
    }

    /// Single interim at `psi * total` followed by the final look at `total`.
    pub fn two_stage(psi: f64, total: f64) -> Result<Self> {
        if !(psi > 0.0 && psi < 1.0) {
            return Err(Error::Domain(format!("interim fraction must lie in (0, 1), got {psi}")));
        }
        Self::new(vec![psi * total, total])
    }

    pub fn looks(&self) -> usize {
        self.n.len()
    }

    pub fn sizes(&self) -> &[f64] {
        &self.n
    }

    pub fn n(&self, k: usize) -> f64 {
        self.n[k]
    }

    pub fn total(&self) -> f64 {
        *self.n.last().expect("non-empty schedule")
    }

    pub fn fraction(&self, k: usize) -> f64 {
        self.n[k] / self.total()
    }
}

/// Total error rates, the two spending exponents and the futility flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpendingPlan {
    pub alpha_total: f64,
    pub beta_total: f64,
    pub rho_e: f64,
    pub rho_f: f64,
    pub futility_binding: bool,
}

impl SpendingPlan {
    pub fn new(alpha_total: f64, beta_total: f64, rho_e: f64, rho_f: f64, futility_binding: bool) -> Result<Self> {
        let plan = Self {
            alpha_total,
            beta_total,
            rho_e,
            rho_f,
            futility_binding,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |v: f64| v > 0.0 && v < 1.0;
        if !prob(self.alpha_total) {
            return Err(Error::Domain(format!("alpha must lie in (0, 1), got {}", self.alpha_total)));
        }
        if !prob(self.beta_total) {
            return Err(Error::Domain(format!("beta must lie in (0, 1), got {}", self.beta_total)));
        }
        if !(self.rho_e > 0.0 && self.rho_e.is_finite()) || !(self.rho_f > 0.0 && self.rho_f.is_finite()) {
            return Err(Error::Domain(format!(
                "spending exponents must be positive, got rho_e={}, rho_f={}",
                self.rho_e, self.rho_f
            )));
        }
        Ok(())
    }

    pub fn with_beta(self, beta_total: f64) -> Self {
        Self { beta_total, ..self }
    }

    pub fn with_rho_e(self, rho_e: f64) -> Self {
        Self { rho_e, ..self }
    }
}

/// Critical values of a design with one interim look.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySet {
    /// Interim futility.
    pub c11: f64,
    /// Interim efficacy.
    pub c12: f64,
    /// Final.
    pub c2: f64,
}

impl BoundarySet {
    pub fn new(c11: f64, c12: f64, c2: f64) -> Result<Self> {
        if c11.is_nan() || c12.is_nan() || c2.is_nan() {
            return Err(Error::Domain("critical values must not be NaN".into()));
        }
        if c12 <= c11 {
            return Err(Error::Domain(format!(
                "efficacy bound must exceed futility bound, got c11={c11}, c12={c12}"
            )));
        }
        Ok(Self { c11, c12, c2 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingCharacteristics {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub d1: f64,
    pub d2: f64,
    pub power: f64,
    /// Expected per-arm sample size under H1, futility stops counted as stops.
    pub ess_h1: f64,
    /// P(Z1 < c11 | H0).
    pub futility_h0: f64,
    /// P(Z1 < c11 | H1); equals `beta1`.
    pub futility_h1: f64,
}

/// Information `(p_t q_t / n + p_c q_c / n)^-1` at per-arm size `n`.
pub fn information(model: &EfficacyModel, n: f64) -> Result<f64> {
    if !(n > 0.0) {
        return Err(Error::Domain(format!("sample size must be positive, got {n}")));
    }
    Ok(n / model.unit_variance())
}

/// Mean of the standardised statistic at per-arm size `n`. Under H0 the mean
/// sits on the null boundary (zero); information is always evaluated at the
/// assumed rates.
pub fn mean_z(model: &EfficacyModel, n: f64, hypothesis: Hypothesis) -> Result<f64> {
    let info = information(model, n)?;
    Ok(match hypothesis {
        Hypothesis::H0 => 0.0,
        Hypothesis::H1 => model.theta() * info.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn case_study() -> EfficacyModel {
        EfficacyModel::new(0.58, 0.6, -0.1).unwrap()
    }

    #[test]
    fn information_matches_direct_arithmetic() {
        let even = EfficacyModel::new(0.5, 0.5, 0.0).unwrap();
        assert_relative_eq!(information(&even, 100.0).unwrap(), 200.0, epsilon = 1e-12);

        let m = case_study();
        let direct = 1.0 / ((0.58 * 0.42 + 0.6 * 0.4) / 498.96);
        assert_relative_eq!(information(&m, 498.96).unwrap(), direct, epsilon = 1e-9);
        assert!((direct - 1031.7).abs() < 0.1);
        let direct_n = 1.0 / ((0.58 * 0.42 + 0.6 * 0.4) / 831.6);
        assert!((information(&m, 831.6).unwrap() - direct_n).abs() < 1e-9);
        assert!((direct_n - 1719.5).abs() < 0.2);
    }

    #[test]
    fn non_positive_n_is_rejected() {
        let m = case_study();
        assert!(matches!(information(&m, 0.0), Err(Error::Domain(_))));
        assert!(matches!(information(&m, -3.0), Err(Error::Domain(_))));
        assert!(mean_z(&m, 0.0, Hypothesis::H1).is_err());
    }

    #[test]
    fn mean_under_each_hypothesis() {
        let m = case_study();
        assert_eq!(mean_z(&m, 498.96, Hypothesis::H0).unwrap(), 0.0);
        let h1 = mean_z(&m, 498.96, Hypothesis::H1).unwrap();
        assert!((h1 - 2.57).abs() < 0.005, "{h1}");

        let null_alt = EfficacyModel::new(0.5, 0.6, -0.1).unwrap();
        assert!(null_alt.theta().abs() < 1e-15);
        assert!(mean_z(&null_alt, 300.0, Hypothesis::H1).unwrap().abs() < 1e-12);
    }

    #[test]
    fn degenerate_rates_rejected() {
        assert!(EfficacyModel::new(1.0, 0.6, -0.1).is_err());
        assert!(EfficacyModel::new(0.5, 0.0, -0.1).is_err());
        assert!(EfficacyModel::new(0.5, 0.5, 1.0).is_err());
    }

    #[test]
    fn schedule_validation() {
        assert!(LookSchedule::new(vec![]).is_err());
        assert!(LookSchedule::new(vec![100.0, 100.0]).is_err());
        assert!(LookSchedule::new(vec![-1.0, 100.0]).is_err());
        let s = LookSchedule::two_stage(0.6, 831.6).unwrap();
        assert_eq!(s.looks(), 2);
        assert_relative_eq!(s.fraction(0), 0.6, epsilon = 1e-15);
        assert_eq!(s.fraction(1), 1.0);
    }

    #[test]
    fn boundary_and_plan_validation() {
        assert!(BoundarySet::new(1.0, 1.0, 2.0).is_err());
        assert!(BoundarySet::new(f64::NEG_INFINITY, f64::INFINITY, 2.0).is_ok());
        assert!(SpendingPlan::new(0.0, 0.1, 2.0, 3.0, false).is_err());
        assert!(SpendingPlan::new(0.025, 1.0, 2.0, 3.0, false).is_err());
        assert!(SpendingPlan::new(0.025, 0.1, 0.0, 3.0, false).is_err());
    }

    proptest::proptest! {
        #[test]
        fn information_is_linear_in_n(p_t in 0.01f64..0.99, p_c in 0.01f64..0.99, n in 1.0f64..1e4, a in 0.01f64..100.0) {
            let m = EfficacyModel::new(p_t, p_c, 0.0).unwrap();
            let lhs = information(&m, a * n).unwrap();
            let rhs = a * information(&m, n).unwrap();
            proptest::prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs);
        }

        #[test]
        fn h1_mean_monotone_in_n(p_t in 0.05f64..0.95, p_c in 0.05f64..0.95, delta in -0.3f64..0.3, n in 1.0f64..1e4) {
            let m = EfficacyModel::new(p_t, p_c, delta).unwrap();
            let a = mean_z(&m, n, Hypothesis::H1).unwrap();
            let b = mean_z(&m, n * 1.5, Hypothesis::H1).unwrap();
            if m.theta() > 1e-12 {
                proptest::prop_assert!(b > a);
            } else if m.theta() < -1e-12 {
                proptest::prop_assert!(b < a);
            }
        }
    }
}
