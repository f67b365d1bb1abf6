//! Scalar Werner-state fidelity algebra.
//!
//! A two-qubit Werner state is fully described by one number. We carry it
//! either as the fidelity `F ∈ [1/4, 1]` with the Bell state or as the
//! Werner parameter `w = (4F − 1)/3 ∈ [0, 1]`. Memory decoherence and
//! entanglement swapping are both multiplicative on `w`, so the simulator
//! keeps `w` internally and converts to fidelity only at the edges.

use std::fmt;
use std::ops::Mul;

use crate::error::{Error, Result};

/// Fidelity of the maximally mixed two-qubit state.
pub const MIXED_FIDELITY: f64 = 0.25;

/// Slack used for inclusive threshold comparisons on products of exponentials.
pub const THRESHOLD_SLACK: f64 = 1e-12;

/// Decay constant, in steps, used to convert between cutoff and threshold.
pub const DEFAULT_TAU_STEPS: f64 = 100.0;

/// Memory coherence time of 100 ms expressed in 106 µs steps.
pub const DEFAULT_MEMORY_TAU_STEPS: f64 = 100_000.0 / 106.0;

/// Fidelity with the target Bell state, in `[1/4, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Fidelity(f64);

impl Fidelity {
    pub const PERFECT: Fidelity = Fidelity(1.0);
    pub const MIXED: Fidelity = Fidelity(MIXED_FIDELITY);

    pub fn new(value: f64) -> Result<Self> {
        if !(MIXED_FIDELITY..=1.0).contains(&value) {
            return Err(Error::Domain(format!("fidelity {value} outside [0.25, 1]")));
        }
        Ok(Fidelity(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn to_werner(self) -> WernerParameter {
        fidelity_to_werner(self)
    }
}

impl fmt::Display for Fidelity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Weight of the Bell-state component of a Werner state, in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct WernerParameter(f64);

impl WernerParameter {
    pub const ONE: WernerParameter = WernerParameter(1.0);
    pub const ZERO: WernerParameter = WernerParameter(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::Domain(format!(
                "werner parameter {value} outside [0, 1]"
            )));
        }
        Ok(WernerParameter(value))
    }

    /// `e^{-units/τ}`: the parameter after `units` applications of the
    /// per-step depolarizing factor.
    pub fn from_noise_units(units: u32, model: &DecayModel) -> Self {
        WernerParameter((-(units as f64) / model.tau_steps).exp())
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn to_fidelity(self) -> Fidelity {
        werner_to_fidelity(self)
    }
}

impl Mul for WernerParameter {
    type Output = WernerParameter;

    /// Swap composition: the Werner parameters of the two consumed links multiply.
    fn mul(self, rhs: WernerParameter) -> WernerParameter {
        WernerParameter(self.0 * rhs.0)
    }
}

/// Exponential memory decoherence with time constant `τ` measured in steps.
///
/// Freshly created links start at unit fidelity and receive one
/// application of the per-step channel, so a link of age `a` has Werner
/// parameter `e^{-(a+1)/τ}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayModel {
    tau_steps: f64,
}

impl DecayModel {
    pub fn new(tau_steps: f64) -> Result<Self> {
        if tau_steps <= 0.0 || !tau_steps.is_finite() {
            return Err(Error::Domain(format!(
                "decoherence constant must be positive and finite, got {tau_steps}"
            )));
        }
        Ok(DecayModel { tau_steps })
    }

    pub fn tau_steps(&self) -> f64 {
        self.tau_steps
    }

    /// Initial fidelity before creation noise.
    pub fn f0(&self) -> Fidelity {
        Fidelity::PERFECT
    }

    /// Per-step multiplicative factor on the Werner parameter, `e^{-1/τ}`.
    /// Equivalently the depolarizing probability is `1 − e^{-1/τ}`.
    pub fn step_factor(&self) -> f64 {
        (-1.0 / self.tau_steps).exp()
    }
}

pub fn fidelity_to_werner(f: Fidelity) -> WernerParameter {
    // clamp guards the last ulp at F = 1/4
    WernerParameter(((4.0 * f.0 - 1.0) / 3.0).clamp(0.0, 1.0))
}

pub fn werner_to_fidelity(w: WernerParameter) -> Fidelity {
    Fidelity((MIXED_FIDELITY + 0.75 * w.0).clamp(MIXED_FIDELITY, 1.0))
}

/// Fidelity of an unused link `age` steps after creation.
pub fn fidelity_at_age(age: u32, model: &DecayModel) -> Fidelity {
    let w0 = fidelity_to_werner(model.f0()).0;
    werner_to_fidelity(WernerParameter(
        w0 * (-((age as f64) + 1.0) / model.tau_steps).exp(),
    ))
}

/// One step of memory decoherence.
pub fn decay_step(w: WernerParameter, model: &DecayModel) -> WernerParameter {
    WernerParameter(w.0 * model.step_factor())
}

/// Fidelity of the link produced by swapping two Werner links.
pub fn swap_fidelity(f1: Fidelity, f2: Fidelity) -> Fidelity {
    werner_to_fidelity(fidelity_to_werner(f1) * fidelity_to_werner(f2))
}

/// Both links wait `t_w` steps in memory, then are swapped.
pub fn wait_then_swap(f01: Fidelity, f02: Fidelity, t_w: u32, model: &DecayModel) -> Fidelity {
    let w = fidelity_to_werner(f01).0
        * fidelity_to_werner(f02).0
        * (-2.0 * t_w as f64 / model.tau_steps).exp();
    werner_to_fidelity(WernerParameter(w))
}

/// The links are swapped at once and the product link waits `t_w` steps.
pub fn swap_then_wait(f01: Fidelity, f02: Fidelity, t_w: u32, model: &DecayModel) -> Fidelity {
    let w = fidelity_to_werner(f01).0
        * fidelity_to_werner(f02).0
        * (-(t_w as f64) / model.tau_steps).exp();
    werner_to_fidelity(WernerParameter(w))
}

/// Real-valued cutoff age at which an unused link reaches `f_th`.
///
/// Inverse of [`fidelity_at_age`]: `T = −τ ln((4F_th − 1)/(4F_0 − 1)) − 1`.
pub fn cutoff_time(f_th: Fidelity, model: &DecayModel) -> Result<f64> {
    if f_th.0 <= MIXED_FIDELITY {
        return Err(Error::Domain(
            "threshold at 1/4 never discards: cutoff is infinite".into(),
        ));
    }
    let fresh = fidelity_at_age(0, model);
    if f_th.0 > fresh.0 + THRESHOLD_SLACK {
        return Err(Error::InfeasibleThreshold {
            threshold: f_th.0,
            fresh: fresh.0,
        });
    }
    let ratio = (4.0 * f_th.0 - 1.0) / (4.0 * model.f0().0 - 1.0);
    Ok((-model.tau_steps * ratio.ln() - 1.0).max(0.0))
}

/// Integer cutoff derived from a threshold. Floors, so the derived cutoff
/// never admits a link older than the threshold allows.
pub fn cutoff_steps(f_th: Fidelity, model: &DecayModel) -> Result<u32> {
    let t = cutoff_time(f_th, model)?;
    // absorb round-off when f_th was itself produced by fidelity_at_age
    Ok((t + 1e-9).floor() as u32)
}

/// Inclusive threshold test shared by the engine and the oracle.
pub fn meets_threshold(w: WernerParameter, f_th: Fidelity) -> bool {
    werner_to_fidelity(w).0 >= f_th.0 - THRESHOLD_SLACK
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn tau100() -> DecayModel {
        DecayModel::new(100.0).unwrap()
    }

    fn f(v: f64) -> Fidelity {
        Fidelity::new(v).unwrap()
    }

    #[test]
    fn werner_conversion_examples() {
        assert_eq!(fidelity_to_werner(f(1.0)).value(), 1.0);
        assert_eq!(fidelity_to_werner(f(0.25)).value(), 0.0);
        assert_abs_diff_eq!(fidelity_to_werner(f(0.9)).value(), 0.866667, epsilon = 1e-6);

        let w = |v| WernerParameter::new(v).unwrap();
        assert_eq!(werner_to_fidelity(w(0.0)).value(), 0.25);
        assert_eq!(werner_to_fidelity(w(1.0)).value(), 1.0);
        assert_abs_diff_eq!(werner_to_fidelity(w(0.866667)).value(), 0.9, epsilon = 1e-6);
    }

    #[test]
    fn out_of_range_inputs_are_domain_errors() {
        assert!(matches!(Fidelity::new(0.2), Err(Error::Domain(_))));
        assert!(matches!(Fidelity::new(1.01), Err(Error::Domain(_))));
        assert!(matches!(Fidelity::new(f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(WernerParameter::new(-0.1), Err(Error::Domain(_))));
        assert!(matches!(WernerParameter::new(1.5), Err(Error::Domain(_))));
        assert!(DecayModel::new(0.0).is_err());
        assert!(DecayModel::new(-3.0).is_err());
    }

    #[test]
    fn age_table_matches_reported_thresholds() {
        let m = tau100();
        assert_abs_diff_eq!(fidelity_at_age(5, &m).value(), 0.956323, epsilon = 1e-6);
        assert_abs_diff_eq!(fidelity_at_age(10, &m).value(), 0.921876, epsilon = 1e-6);
        assert_abs_diff_eq!(fidelity_at_age(20, &m).value(), 0.857938, epsilon = 1e-6);
    }

    #[test]
    fn decay_step_composes_to_age_formula() {
        let m = tau100();
        let w1 = decay_step(WernerParameter::ONE, &m);
        assert_abs_diff_eq!(w1.value(), 0.990050, epsilon = 1e-6);
        assert_eq!(decay_step(WernerParameter::ZERO, &m).value(), 0.0);

        let mut w = w1;
        for _ in 0..5 {
            w = decay_step(w, &m);
        }
        assert_abs_diff_eq!(w.value(), 0.941765, epsilon = 1e-6);
        assert_abs_diff_eq!(w.to_fidelity().value(), 0.956323, epsilon = 1e-6);
        assert_abs_diff_eq!(
            w.to_fidelity().value(),
            fidelity_at_age(5, &m).value(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn swap_examples() {
        assert_eq!(swap_fidelity(f(1.0), f(1.0)).value(), 1.0);
        assert_eq!(swap_fidelity(f(0.7), f(0.25)).value(), 0.25);
        assert_abs_diff_eq!(
            swap_fidelity(f(0.9), f(0.9)).value(),
            0.813333,
            epsilon = 1e-6
        );
    }

    #[test]
    fn wait_and_swap_examples() {
        let m = tau100();
        assert_eq!(wait_then_swap(f(1.0), f(1.0), 0, &m).value(), 1.0);
        assert_abs_diff_eq!(
            wait_then_swap(f(1.0), f(1.0), 100, &m).value(),
            0.351501,
            epsilon = 1e-6
        );
        assert_eq!(wait_then_swap(f(0.25), f(0.8), 37, &m).value(), 0.25);

        assert_eq!(swap_then_wait(f(1.0), f(1.0), 0, &m).value(), 1.0);
        assert_abs_diff_eq!(
            swap_then_wait(f(1.0), f(1.0), 100, &m).value(),
            0.525909,
            epsilon = 1e-6
        );
        assert_eq!(swap_then_wait(f(0.25), f(0.25), 50, &m).value(), 0.25);
    }

    #[test]
    fn cutoff_examples() {
        let m = tau100();
        assert_abs_diff_eq!(cutoff_time(f(0.956323), &m).unwrap(), 5.0, epsilon = 1e-3);
        assert_abs_diff_eq!(cutoff_time(f(0.921876), &m).unwrap(), 10.0, epsilon = 1e-3);
        assert_abs_diff_eq!(
            cutoff_time(fidelity_at_age(0, &m), &m).unwrap(),
            0.0,
            epsilon = 1e-9
        );
        assert_eq!(cutoff_steps(fidelity_at_age(10, &m), &m).unwrap(), 10);
        assert_eq!(cutoff_steps(f(0.8), &m).unwrap(), 30);
        assert_eq!(cutoff_steps(f(0.95), &m).unwrap(), 5);
    }

    #[test]
    fn cutoff_errors() {
        let m = tau100();
        assert!(matches!(cutoff_time(f(0.25), &m), Err(Error::Domain(_))));
        assert!(matches!(
            cutoff_time(f(0.999), &m),
            Err(Error::InfeasibleThreshold { .. })
        ));
    }

    #[test]
    fn decay_to_mixed_in_the_limit() {
        let m = tau100();
        assert_abs_diff_eq!(fidelity_at_age(100_000, &m).value(), 0.25, epsilon = 1e-12);
    }

    fn fid() -> impl Strategy<Value = f64> {
        0.25f64..=1.0
    }

    proptest! {
        #[test]
        fn round_trip(v in fid()) {
            let back = werner_to_fidelity(fidelity_to_werner(f(v))).value();
            prop_assert!((back - v).abs() <= 1e-12);
        }

        #[test]
        fn monotone_decay(age in 0u32..5_000, tau in 1.0f64..2_000.0) {
            let m = DecayModel::new(tau).unwrap();
            let now = fidelity_at_age(age, &m).value();
            let next = fidelity_at_age(age + 1, &m).value();
            prop_assert!(next <= now);
            prop_assert!(next >= 0.25);
            // strict while the exponent is still representable
            if now > 0.25 + 1e-9 {
                prop_assert!(next < now);
            }
        }

        #[test]
        fn swap_contracts_and_commutes(a in fid(), b in fid()) {
            let s = swap_fidelity(f(a), f(b)).value();
            prop_assert!(s <= a.min(b) + 1e-15);
            prop_assert_eq!(s, swap_fidelity(f(b), f(a)).value());
        }

        #[test]
        fn waiting_before_the_swap_never_helps(
            a in fid(), b in fid(), t_w in 0u32..1_000, tau in 1.0f64..1_000.0
        ) {
            let m = DecayModel::new(tau).unwrap();
            let ws = wait_then_swap(f(a), f(b), t_w, &m).value();
            let sw = swap_then_wait(f(a), f(b), t_w, &m).value();
            prop_assert!(ws <= sw);
            let product = fidelity_to_werner(f(a)).value() * fidelity_to_werner(f(b)).value();
            if t_w == 0 || product == 0.0 {
                prop_assert_eq!(ws, sw);
            }
        }

        #[test]
        fn cutoff_inverts_age(f_th in 0.3f64..0.99, tau in 5.0f64..500.0) {
            let m = DecayModel::new(tau).unwrap();
            if let Ok(t) = cutoff_time(f(f_th), &m) {
                if t >= 1.0 {
                    let floor = t.floor() as u32;
                    prop_assert!(fidelity_at_age(floor + 1, &m).value() <= f_th + 1e-12);
                    prop_assert!(f_th <= fidelity_at_age(floor, &m).value() + 1e-12);
                }
            }
        }

        #[test]
        fn decay_composition_matches_closed_form(t_w in 0u32..400, tau in 10.0f64..1_000.0) {
            let m = DecayModel::new(tau).unwrap();
            let fresh = fidelity_at_age(0, &m);
            let mut w1 = fresh.to_werner();
            let mut w2 = fresh.to_werner();
            for _ in 0..t_w {
                w1 = decay_step(w1, &m);
                w2 = decay_step(w2, &m);
            }
            let composed = swap_fidelity(w1.to_fidelity(), w2.to_fidelity()).value();
            let closed = wait_then_swap(fresh, fresh, t_w, &m).value();
            prop_assert!((composed - closed).abs() <= 1e-12);
        }
    }
}
