//! Power-family error spending: cumulative spend `t^rho * total` at
//! information fraction `t`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{information, EfficacyModel, LookSchedule, SpendingPlan};

/// Per-look type I (`a`) and type II (`b`) spends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpendTargets {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

fn check_fraction(t: f64) -> Result<()> {
    if t > 0.0 && t <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("information fraction must lie in (0, 1], got {t}")))
    }
}

pub fn spend_alpha(t: f64, plan: &SpendingPlan) -> Result<f64> {
    check_fraction(t)?;
    Ok(if t == 1.0 { plan.alpha_total } else { t.powf(plan.rho_e) * plan.alpha_total })
}

pub fn spend_beta(t: f64, plan: &SpendingPlan) -> Result<f64> {
    check_fraction(t)?;
    Ok(if t == 1.0 { plan.beta_total } else { t.powf(plan.rho_f) * plan.beta_total })
}

/// Incremental spends at every look of `schedule`. The information fraction
/// is taken from the information ratio rather than from sample sizes.
pub fn targets(model: &EfficacyModel, schedule: &LookSchedule, plan: &SpendingPlan) -> Result<SpendTargets> {
    let k = schedule.looks();
    let info_max = information(model, schedule.total())?;
    let mut a = Vec::with_capacity(k);
    let mut b = Vec::with_capacity(k);
    let (mut prev_a, mut prev_b) = (0.0, 0.0);
    for i in 0..k {
        let (fa, fb) = if i + 1 == k {
            (plan.alpha_total, plan.beta_total)
        } else {
            let t = information(model, schedule.n(i))? / info_max;
            (spend_alpha(t, plan)?, spend_beta(t, plan)?)
        };
        a.push(fa - prev_a);
        b.push(fb - prev_b);
        prev_a = fa;
        prev_b = fb;
    }
    Ok(SpendTargets { a, b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn plan(rho_e: f64, rho_f: f64) -> SpendingPlan {
        SpendingPlan::new(0.025, 0.1, rho_e, rho_f, false).unwrap()
    }

    fn model() -> EfficacyModel {
        EfficacyModel::new(0.58, 0.6, -0.1).unwrap()
    }

    #[test]
    fn quoted_spends() {
        assert_abs_diff_eq!(spend_alpha(0.6, &plan(2.0, 3.0)).unwrap(), 0.009, epsilon = 1e-15);
        assert_abs_diff_eq!(spend_alpha(0.6, &plan(1.0, 3.0)).unwrap(), 0.015, epsilon = 1e-15);
        assert_eq!(spend_alpha(1.0, &plan(7.3, 3.0)).unwrap(), 0.025);
        assert_eq!(spend_beta(1.0, &plan(2.0, 3.0)).unwrap(), 0.1);
        assert_abs_diff_eq!(spend_beta(0.6, &plan(2.0, 3.0)).unwrap(), 0.0216, epsilon = 1e-15);
        assert!(spend_beta(1e-9, &plan(2.0, 3.0)).unwrap() < 1e-25);
    }

    #[test]
    fn fraction_outside_unit_interval() {
        assert!(spend_alpha(0.0, &plan(2.0, 3.0)).is_err());
        assert!(spend_alpha(1.01, &plan(2.0, 3.0)).is_err());
        assert!(spend_beta(-0.5, &plan(2.0, 3.0)).is_err());
    }

    #[test]
    fn two_stage_targets() {
        let s = LookSchedule::two_stage(0.6, 831.6).unwrap();
        let t = targets(&model(), &s, &plan(2.0, 3.0)).unwrap();
        assert_abs_diff_eq!(t.a[0], 0.009, epsilon = 1e-15);
        assert_abs_diff_eq!(t.a[1], 0.016, epsilon = 1e-15);

        let s = LookSchedule::two_stage(0.5, 831.6).unwrap();
        let t = targets(&model(), &s, &plan(1.0, 3.0)).unwrap();
        assert_abs_diff_eq!(t.a[0], 0.0125, epsilon = 1e-15);
        assert_abs_diff_eq!(t.a[1], 0.0125, epsilon = 1e-15);

        let single = targets(&model(), &LookSchedule::new(vec![500.0]).unwrap(), &plan(2.0, 3.0)).unwrap();
        assert_eq!(single.a, vec![0.025]);
        assert_eq!(single.b, vec![0.1]);
    }

    proptest::proptest! {
        #[test]
        fn spends_telescope(alpha in 1e-4f64..0.5, beta in 1e-3f64..0.5, rho_e in 0.1f64..10.0, rho_f in 0.1f64..10.0,
                            mut n in proptest::collection::vec(1.0f64..5000.0, 1..6)) {
            n.sort_by(f64::total_cmp);
            n.dedup();
            let sched = LookSchedule::new(n).unwrap();
            let p = SpendingPlan::new(alpha, beta, rho_e, rho_f, false).unwrap();
            let t = targets(&model(), &sched, &p).unwrap();
            proptest::prop_assert!((t.a.iter().sum::<f64>() - alpha).abs() <= 1e-14);
            proptest::prop_assert!((t.b.iter().sum::<f64>() - beta).abs() <= 1e-14);
            proptest::prop_assert!(t.a.iter().chain(&t.b).all(|&v| v >= 0.0));
        }

        #[test]
        fn larger_exponent_spends_less_early(t in 0.01f64..0.99, rho in 0.1f64..8.0, bump in 0.01f64..3.0) {
            let lo = spend_alpha(t, &plan(rho, 3.0)).unwrap();
            let hi = spend_alpha(t, &plan(rho + bump, 3.0)).unwrap();
            proptest::prop_assert!(hi < lo);
        }

        #[test]
        fn extra_look_keeps_totals(psi in 0.1f64..0.9, extra in 0.05f64..0.95) {
            let total = 800.0;
            let base = LookSchedule::two_stage(psi, total).unwrap();
            let mut n = vec![psi * total, extra * total, total];
            n.sort_by(f64::total_cmp);
            proptest::prop_assume!(n.windows(2).all(|w| w[1] > w[0] + 1e-9));
            let three = LookSchedule::new(n).unwrap();
            let p = plan(2.0, 3.0);
            let a2: f64 = targets(&model(), &base, &p).unwrap().a.iter().sum();
            let a3: f64 = targets(&model(), &three, &p).unwrap().a.iter().sum();
            proptest::prop_assert!((a2 - a3).abs() <= 1e-15);
        }
    }
}
