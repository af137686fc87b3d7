//! Realised operating characteristics of a fully specified two-look design.
//!
//! Every quantity is recomputed from the critical values; the spending
//! exponents in the plan are never consulted here, only the futility flag.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    information, BoundarySet, EfficacyModel, Hypothesis, LookSchedule, OperatingCharacteristics, SpendingPlan,
};
use crate::mvn::{joint_law, rect_prob, JointLaw, Rectangle};

const INF: f64 = f64::INFINITY;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub model: EfficacyModel,
    pub schedule: LookSchedule,
    pub boundaries: BoundarySet,
    pub plan: SpendingPlan,
}

/// Whether an interim futility crossing counts as a stop when computing the
/// expected sample size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FutilityStops {
    #[default]
    Counted,
    Ignored,
}

impl Design {
    fn law(&self, hypothesis: Hypothesis) -> Result<JointLaw> {
        if self.schedule.looks() != 2 {
            return Err(Error::UnsupportedDimension(self.schedule.looks()));
        }
        joint_law(&self.model, &self.schedule, hypothesis)
    }
}

/// `P(lo1 < Z1 < hi1, lo2 < Z2 < hi2)`, zero when either interval is empty.
fn band(law: &JointLaw, lo1: f64, hi1: f64, lo2: f64, hi2: f64) -> Result<f64> {
    if lo1 >= hi1 || lo2 >= hi2 {
        return Ok(0.0);
    }
    rect_prob(law, &Rectangle::new(vec![lo1, lo2], vec![hi1, hi2])?)
}

/// Type I error at the interim and at the final look. With binding futility
/// the final-look event additionally requires `Z1 > c11`.
pub fn alpha_components(design: &Design) -> Result<(f64, f64)> {
    let law = design.law(Hypothesis::H0)?;
    let BoundarySet { c11, c12, c2 } = design.boundaries;
    let a1 = band(&law, c12, INF, -INF, INF)?;
    // The non-binding strip is the binding one plus the part below c11, so
    // the ordering between the two holds exactly in floating point.
    let mut a2 = band(&law, c11, c12, c2, INF)?;
    if !design.plan.futility_binding {
        a2 += band(&law, -INF, c11, c2, INF)?;
    }
    Ok((a1, a2))
}

/// Type II error at the interim (futility crossing) and at the final look.
pub fn beta_components(design: &Design) -> Result<(f64, f64)> {
    let law = design.law(Hypothesis::H1)?;
    let BoundarySet { c11, c12, c2 } = design.boundaries;
    Ok((band(&law, -INF, c11, -INF, INF)?, band(&law, c11, c12, -INF, c2)?))
}

/// Efficacy crossing probabilities under H1.
pub fn crossing(design: &Design) -> Result<(f64, f64)> {
    let law = design.law(Hypothesis::H1)?;
    let BoundarySet { c11, c12, c2 } = design.boundaries;
    Ok((band(&law, c12, INF, -INF, INF)?, band(&law, c11, c12, c2, INF)?))
}

/// Interim futility crossing `P(Z1 < c11 | H)` under H0 and under H1.
pub fn futility_crossing(design: &Design) -> Result<(f64, f64)> {
    let c11 = design.boundaries.c11;
    let h0 = band(&design.law(Hypothesis::H0)?, -INF, c11, -INF, INF)?;
    let h1 = band(&design.law(Hypothesis::H1)?, -INF, c11, -INF, INF)?;
    Ok((h0, h1))
}

/// Smallest observed `p_t - p_c` that lands in the rejection region at each
/// look: `delta + c / sqrt(I)`.
pub fn min_difference(design: &Design) -> Result<(f64, f64)> {
    if design.schedule.looks() != 2 {
        return Err(Error::UnsupportedDimension(design.schedule.looks()));
    }
    let m = &design.model;
    let i1 = information(m, design.schedule.n(0))?;
    let i2 = information(m, design.schedule.n(1))?;
    Ok((
        m.delta() + design.boundaries.c12 / i1.sqrt(),
        m.delta() + design.boundaries.c2 / i2.sqrt(),
    ))
}

/// Probability of stopping at the interim under `hypothesis`.
pub fn stop_probability(design: &Design, hypothesis: Hypothesis, futility: FutilityStops) -> Result<f64> {
    let law = design.law(hypothesis)?;
    let BoundarySet { c11, c12, .. } = design.boundaries;
    let efficacy = band(&law, c12, INF, -INF, INF)?;
    let fut = match futility {
        FutilityStops::Counted => band(&law, -INF, c11, -INF, INF)?,
        FutilityStops::Ignored => 0.0,
    };
    Ok(efficacy + fut)
}

/// `n1 * P(stop) + N * (1 - P(stop))`.
pub fn ess_from_stop(n1: f64, total: f64, p_stop: f64) -> f64 {
    n1 * p_stop + total * (1.0 - p_stop)
}

pub fn expected_sample_size(design: &Design, hypothesis: Hypothesis, futility: FutilityStops) -> Result<f64> {
    let p = stop_probability(design, hypothesis, futility)?;
    Ok(ess_from_stop(design.schedule.n(0), design.schedule.total(), p))
}

/// Full evaluation in one pass.
pub fn evaluate(design: &Design) -> Result<OperatingCharacteristics> {
    let (alpha1, alpha2) = alpha_components(design)?;
    let (beta1, beta2) = beta_components(design)?;
    let (omega1, omega2) = crossing(design)?;
    let (d1, d2) = min_difference(design)?;
    let (futility_h0, futility_h1) = futility_crossing(design)?;
    let ess_h1 = expected_sample_size(design, Hypothesis::H1, FutilityStops::Counted)?;
    Ok(OperatingCharacteristics {
        alpha1,
        alpha2,
        beta1,
        beta2,
        omega1,
        omega2,
        d1,
        d2,
        power: omega1 + omega2,
        ess_h1,
        futility_h0,
        futility_h1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mvn::{mc_rect_prob, norm_sf};
    use approx::assert_abs_diff_eq;

    pub(crate) fn golden(boundaries: BoundarySet, binding: bool) -> Design {
        Design {
            model: EfficacyModel::new(0.58, 0.6, -0.1).unwrap(),
            schedule: LookSchedule::two_stage(0.6, 831.6).unwrap(),
            boundaries,
            plan: SpendingPlan::new(0.025, 0.1, 2.0, 3.0, binding).unwrap(),
        }
    }

    fn quoted() -> BoundarySet {
        BoundarySet::new(0.548, 2.366, 2.04).unwrap()
    }

    #[test]
    fn quoted_design_spends() {
        let d = golden(quoted(), false);
        let (a1, a2) = alpha_components(&d).unwrap();
        assert!((a1 - 0.009).abs() < 2e-5, "{a1}");
        assert!((a1 + a2 - 0.025).abs() < 2e-4, "{}", a1 + a2);
        let (b1, b2) = beta_components(&d).unwrap();
        assert!((b1 + b2 - 0.10).abs() < 1e-3, "{}", b1 + b2);
        let (w1, _) = crossing(&d).unwrap();
        assert!((w1 - 0.58).abs() < 0.005);
        let (d1, _) = min_difference(&d).unwrap();
        assert!((d1 - -0.026).abs() < 0.001, "{d1}");
    }

    #[test]
    fn no_interim_efficacy_stop() {
        let d = golden(BoundarySet::new(0.5, INF, 1.96).unwrap(), false);
        let (a1, a2) = alpha_components(&d).unwrap();
        assert_eq!(a1, 0.0);
        assert_abs_diff_eq!(a2, norm_sf(1.96), epsilon = 1e-12);
        assert_eq!(crossing(&d).unwrap().0, 0.0);
    }

    #[test]
    fn vacuous_futility_bound() {
        let b = BoundarySet::new(-INF, 2.366, 2.04).unwrap();
        let nb = alpha_components(&golden(b, false)).unwrap();
        let bi = alpha_components(&golden(b, true)).unwrap();
        assert_eq!(nb, bi);
        assert_eq!(beta_components(&golden(b, false)).unwrap().0, 0.0);
    }

    #[test]
    fn collapsing_continuation_region() {
        let d = golden(BoundarySet::new(2.366 - 1e-9, 2.366, 2.04).unwrap(), false);
        let (_, b2) = beta_components(&d).unwrap();
        assert!(b2 < 1e-8);
    }

    #[test]
    fn zero_effect_crossing_equals_alpha() {
        let mut d = golden(quoted(), false);
        d.model = EfficacyModel::new(0.5, 0.6, -0.1).unwrap();
        let (a1, _) = alpha_components(&d).unwrap();
        let (w1, _) = crossing(&d).unwrap();
        assert_abs_diff_eq!(a1, w1, epsilon = 1e-14);
    }

    #[test]
    fn zero_efficacy_bound_gives_margin() {
        let d = golden(BoundarySet::new(-1.0, 0.0, 2.0).unwrap(), false);
        assert_eq!(min_difference(&d).unwrap().0, -0.1);
    }

    #[test]
    fn min_difference_shrinks_to_margin() {
        let mut d = golden(quoted(), false);
        d.schedule = LookSchedule::two_stage(0.6, 1e9).unwrap();
        let (d1, d2) = min_difference(&d).unwrap();
        assert!((d1 + 0.1).abs() < 1e-3 && (d2 + 0.1).abs() < 1e-3);
    }

    #[test]
    fn expected_sample_size_limits() {
        assert_eq!(ess_from_stop(500.0, 800.0, 0.0), 800.0);
        assert_eq!(ess_from_stop(500.0, 800.0, 1.0), 500.0);
        let d = golden(quoted(), false);
        let with = expected_sample_size(&d, Hypothesis::H1, FutilityStops::Counted).unwrap();
        let without = expected_sample_size(&d, Hypothesis::H1, FutilityStops::Ignored).unwrap();
        assert!(with < without && without < 831.6);
    }

    #[test]
    fn three_looks_rejected() {
        let mut d = golden(quoted(), false);
        d.schedule = LookSchedule::new(vec![100.0, 200.0, 300.0]).unwrap();
        assert_eq!(evaluate(&d), Err(Error::UnsupportedDimension(3)));
    }

    #[test]
    fn events_agree_with_monte_carlo_law() {
        let d = golden(quoted(), false);
        let oc = evaluate(&d).unwrap();
        let h1 = d.law(Hypothesis::H1).unwrap();
        let BoundarySet { c11, c12, c2 } = d.boundaries;
        let cases = [
            (oc.omega1, vec![c12, -INF], vec![INF, INF]),
            (oc.omega2, vec![c11, c2], vec![c12, INF]),
            (oc.beta2, vec![c11, -INF], vec![c12, c2]),
        ];
        for (i, (exact, lo, hi)) in cases.into_iter().enumerate() {
            let mc = mc_rect_prob(&h1, &Rectangle::new(lo, hi).unwrap(), 400_000, 7 + i as u64).unwrap();
            assert!(mc.z_score(exact) < 4.0, "case {i}: {} vs {exact}", mc.p);
        }
    }

    proptest::proptest! {
        #[test]
        fn decision_partition_sums_to_one(c11 in -2.0f64..1.5, gap in 0.05f64..3.0, c2 in 0.5f64..3.5,
                                          psi in 0.1f64..0.9, n in 50.0f64..3000.0, binding: bool) {
            let d = Design {
                model: EfficacyModel::new(0.58, 0.6, -0.1).unwrap(),
                schedule: LookSchedule::two_stage(psi, n).unwrap(),
                boundaries: BoundarySet::new(c11, c11 + gap, c2).unwrap(),
                plan: SpendingPlan::new(0.025, 0.1, 2.0, 3.0, binding).unwrap(),
            };
            let oc = evaluate(&d).unwrap();
            proptest::prop_assert!((oc.omega1 + oc.omega2 + oc.beta1 + oc.beta2 - 1.0).abs() < 1e-10);
            proptest::prop_assert!((oc.power - (1.0 - oc.beta1 - oc.beta2)).abs() < 1e-10);
        }

        #[test]
        fn binding_never_exceeds_non_binding(c11 in -2.0f64..1.5, gap in 0.05f64..3.0, c2 in 0.5f64..3.5, psi in 0.1f64..0.9) {
            let b = BoundarySet::new(c11, c11 + gap, c2).unwrap();
            let mut nb = golden(b, false);
            nb.schedule = LookSchedule::two_stage(psi, 831.6).unwrap();
            let mut bi = nb.clone();
            bi.plan.futility_binding = true;
            let a_nb = alpha_components(&nb).unwrap().1;
            let a_bi = alpha_components(&bi).unwrap().1;
            proptest::prop_assert!(a_nb >= a_bi, "{a_nb} < {a_bi}");
        }
    }
}
