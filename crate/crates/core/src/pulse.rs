//! Pulse sequences, their error-perturbed propagators and time cost.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::su2::{self, Unitary2};

/// Closure tolerance on `1 − F` at zero error.
pub const CLOSURE_TOL: f64 = 1e-12;

/// One rotation `(θ)_φ` about an in-plane axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub theta: f64,
    pub phase: f64,
}

impl Pulse {
    pub const fn new(theta: f64, phase: f64) -> Self {
        Pulse { theta, phase }
    }

    pub const fn pi(phase: f64) -> Self {
        Pulse { theta: PI, phase }
    }

    pub fn propagator(&self, err: ErrorPoint) -> Unitary2 {
        su2::perturbed_rotation(self.theta, self.phase, err.epsilon, err.f)
    }
}

/// Systematic error coordinates: pulse-strength fraction `epsilon` and
/// off-resonance fraction `f`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorPoint {
    pub epsilon: f64,
    pub f: f64,
}

impl ErrorPoint {
    pub const ZERO: ErrorPoint = ErrorPoint {
        epsilon: 0.0,
        f: 0.0,
    };

    pub const fn new(epsilon: f64, f: f64) -> Self {
        ErrorPoint { epsilon, f }
    }
}

/// An ordered pulse list targeting `Z(target_phi)`.
///
/// Pulses are stored first-applied-first, so the propagator is
/// `P_n ⋯ P_2 P_1`. Phases are kept unreduced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub label: String,
    pub target_phi: f64,
    pub pulses: Vec<Pulse>,
}

impl PulseSequence {
    /// Builds a sequence without checking closure; see [`PulseSequence::validate`].
    pub fn new(label: impl Into<String>, target_phi: f64, pulses: Vec<Pulse>) -> Self {
        PulseSequence {
            label: label.into(),
            target_phi,
            pulses,
        }
    }

    /// A train of π pulses with the given lab-frame phases.
    pub fn from_pi_phases(label: impl Into<String>, target_phi: f64, phases: &[f64]) -> Self {
        PulseSequence::new(
            label,
            target_phi,
            phases.iter().map(|&p| Pulse::pi(p)).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    pub fn phases(&self) -> Vec<f64> {
        self.pulses.iter().map(|p| p.phase).collect()
    }

    /// True when every pulse is a π rotation (to within 1e-12).
    pub fn is_all_pi(&self) -> bool {
        self.pulses.iter().all(|p| (p.theta - PI).abs() <= 1e-12)
    }

    /// Checks structure and that the error-free propagator equals
    /// `Z(target_phi)` up to global phase.
    pub fn validate(&self) -> Result<()> {
        if self.pulses.is_empty() {
            return Err(Error::EmptySequence);
        }
        if !self.target_phi.is_finite() {
            return Err(Error::NonFinite("target_phi"));
        }
        for (index, p) in self.pulses.iter().enumerate() {
            if !p.theta.is_finite() || !p.phase.is_finite() {
                return Err(Error::NonFinite("pulse"));
            }
            if p.theta < 0.0 {
                return Err(Error::NegativeAngle {
                    index,
                    theta: p.theta,
                });
            }
        }
        let infid = self.infidelity(ErrorPoint::ZERO);
        if infid > CLOSURE_TOL {
            return Err(Error::NotClosed {
                target_phi: self.target_phi,
                fidelity: self.fidelity(ErrorPoint::ZERO),
            });
        }
        Ok(())
    }

    pub fn propagate(&self, err: ErrorPoint) -> Unitary2 {
        self.pulses
            .iter()
            .fold(Unitary2::IDENTITY, |acc, p| p.propagator(err) * acc)
    }

    pub fn target(&self) -> Unitary2 {
        su2::ideal_z(self.target_phi)
    }

    pub fn fidelity(&self, err: ErrorPoint) -> f64 {
        su2::fidelity(&self.target(), &self.propagate(err))
    }

    /// `1 − F`, accurate far below double-precision epsilon.
    pub fn infidelity(&self, err: ErrorPoint) -> f64 {
        su2::infidelity(&self.target(), &self.propagate(err))
    }

    /// Duration in units of a π pulse: `Σ|θ|/π`.
    pub fn time_cost(&self) -> f64 {
        self.pulses.iter().map(|p| p.theta.abs() / PI).sum()
    }

    /// Same sequence with every phase shifted by `delta`.
    pub fn offset_phases(&self, delta: f64) -> PulseSequence {
        PulseSequence {
            label: self.label.clone(),
            target_phi: self.target_phi,
            pulses: self
                .pulses
                .iter()
                .map(|p| Pulse::new(p.theta, p.phase + delta))
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<PulseSequence> {
        serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sequence serialization cannot fail")
    }
}

pub fn propagate(seq: &PulseSequence, err: ErrorPoint) -> Unitary2 {
    seq.propagate(err)
}

pub fn sequence_fidelity(seq: &PulseSequence, err: ErrorPoint) -> f64 {
    seq.fidelity(err)
}

pub fn time_cost(seq: &PulseSequence) -> f64 {
    seq.time_cost()
}

pub fn offset_phases(seq: &PulseSequence, delta: f64) -> PulseSequence {
    seq.offset_phases(delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn baseline(phi: f64) -> PulseSequence {
        PulseSequence::from_pi_phases("baseline", phi, &[-phi / 2.0, 0.0])
    }

    #[test]
    fn baseline_closes() {
        for phi in [PI, PI / 2.0, PI / 4.0, 0.3] {
            let seq = baseline(phi);
            seq.validate().unwrap();
            assert!((seq.fidelity(ErrorPoint::ZERO) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn product_order_is_first_applied_rightmost() {
        let seq = PulseSequence::new(
            "pair",
            0.0,
            vec![Pulse::new(0.4, 0.1), Pulse::new(1.3, 2.0)],
        );
        let expected = su2::rotation(1.3, 2.0) * su2::rotation(0.4, 0.1);
        assert!(seq.propagate(ErrorPoint::ZERO).max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn baseline_joint_error_point() {
        let f = baseline(PI / 4.0).fidelity(ErrorPoint::new(-1.0, -0.87));
        assert!(f > 0.999, "{f}");
    }

    #[test]
    fn baseline_small_pse() {
        let eps = 1e-3;
        let infid = baseline(PI).infidelity(ErrorPoint::new(eps, 0.0));
        let expected = PI * PI / 4.0 * eps * eps;
        assert!((infid / expected - 1.0).abs() < 0.01);
    }

    #[test]
    fn validation_rejects_bad_sequences() {
        assert_eq!(
            PulseSequence::new("e", PI, vec![]).validate(),
            Err(Error::EmptySequence)
        );
        let neg = PulseSequence::new("n", 0.0, vec![Pulse::new(-1.0, 0.0)]);
        assert!(matches!(
            neg.validate(),
            Err(Error::NegativeAngle { index: 0, .. })
        ));
        let open = PulseSequence::from_pi_phases("o", PI, &[0.0, 0.3]);
        assert!(matches!(open.validate(), Err(Error::NotClosed { .. })));
        let nan = PulseSequence::from_pi_phases("x", PI, &[f64::NAN, 0.0]);
        assert!(matches!(nan.validate(), Err(Error::NonFinite(_))));
    }

    #[test]
    fn time_cost_counts_pi_units() {
        assert_eq!(baseline(1.0).time_cost(), 2.0);
        let mixed = PulseSequence::new(
            "m",
            0.0,
            vec![Pulse::new(PI / 3.0, 0.0), Pulse::new(2.0 * PI, 1.0)],
        );
        assert!((mixed.time_cost() - 7.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_offset_is_identity() {
        let seq = baseline(0.7);
        assert_eq!(seq.offset_phases(0.0), seq);
    }

    #[test]
    fn json_round_trip() {
        let seq = baseline(PI / 3.0);
        let back = PulseSequence::from_json(&seq.to_json()).unwrap();
        assert_eq!(back, seq);
        assert!(matches!(PulseSequence::from_json("{"), Err(Error::Json(_))));
    }

    proptest! {
        #[test]
        fn offset_preserves_fidelity(
            phases in prop::collection::vec(-7.0f64..7.0, 1..12),
            phi in -4.0f64..4.0,
            delta in -10.0f64..10.0,
            eps in -1.0f64..1.0,
            f in -1.0f64..1.0,
        ) {
            let seq = PulseSequence::from_pi_phases("r", phi, &phases);
            let err = ErrorPoint::new(eps, f);
            let a = seq.fidelity(err);
            let b = seq.offset_phases(delta).fidelity(err);
            prop_assert!((a - b).abs() <= 1e-12);
        }

        #[test]
        fn propagator_stays_unitary(
            pulses in prop::collection::vec((0.0f64..7.0, -7.0f64..7.0), 1..=16),
            eps in -1.0f64..1.0,
            f in -1.0f64..1.0,
        ) {
            let seq = PulseSequence::new(
                "r",
                0.0,
                pulses.into_iter().map(|(t, p)| Pulse::new(t, p)).collect(),
            );
            let u = seq.propagate(ErrorPoint::new(eps, f));
            prop_assert!(u.is_unitary(1e-12));
            let fid = seq.fidelity(ErrorPoint::new(eps, f));
            prop_assert!((0.0..=1.0).contains(&fid));
        }
    }
}
