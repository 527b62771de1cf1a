//! Toggling-frame phase transforms and the algebraic cancellation
//! conditions for π-pulse trains.
//!
//! In the toggling frame the first-order error of each π pulse is a planar
//! unit vector at angle `φ'_j`. Indices below are 1-based in the docs and
//! 0-based in code, so "odd j" is an even slice index.

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::Serialize;

use crate::error::{Error, Result};

/// Default tolerance for condition residuals.
pub const DEFAULT_TOL: f64 = 1e-9;

fn check_even(values: &[f64]) -> Result<()> {
    if !values.len().is_multiple_of(2) {
        return Err(Error::OddLength(values.len()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("phase list"));
    }
    Ok(())
}

/// `(−1)^{j+1}` for the 0-based slice index `i = j − 1`.
#[inline]
fn alternating(i: usize) -> f64 {
    if i.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Lab-frame phases of a π-pulse train, first-applied-first.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseList(Vec<f64>);

/// Toggling-frame phases.
#[derive(Debug, Clone, PartialEq)]
pub struct TogglingPhaseList(Vec<f64>);

macro_rules! phase_list_impl {
    ($name:ident) => {
        impl $name {
            /// Rejects odd lengths and non-finite entries.
            pub fn new(values: Vec<f64>) -> Result<Self> {
                check_even(&values)?;
                Ok($name(values))
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }

            pub fn into_vec(self) -> Vec<f64> {
                self.0
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }
        }

        impl TryFrom<Vec<f64>> for $name {
            type Error = Error;

            fn try_from(values: Vec<f64>) -> Result<Self> {
                $name::new(values)
            }
        }
    };
}

phase_list_impl!(PhaseList);
phase_list_impl!(TogglingPhaseList);

/// `φ'_j = (−1)^{j+1} φ_j + Σ_{k<j} (−1)^{k+1} 2φ_k`.
pub fn to_toggling(phases: &PhaseList) -> TogglingPhaseList {
    let mut acc = 0.0;
    let out = phases
        .0
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let s = alternating(i);
            let t = s * p + acc;
            acc += 2.0 * s * p;
            t
        })
        .collect();
    TogglingPhaseList(out)
}

/// Inverse of [`to_toggling`], by forward recursion.
pub fn from_toggling(toggling: &TogglingPhaseList) -> PhaseList {
    let mut acc = 0.0;
    let out = toggling
        .0
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let s = alternating(i);
            let p = s * (t - acc);
            acc += 2.0 * s * p;
            p
        })
        .collect();
    PhaseList(out)
}

/// `φ''_j = φ'_j + (−1)^{j+1} π/2`; the ORE conditions live on these.
pub fn modified_phases(toggling: &TogglingPhaseList) -> TogglingPhaseList {
    shift_alternating(toggling, FRAC_PI_2)
}

/// Inverse of [`modified_phases`].
pub fn unmodified_phases(modified: &TogglingPhaseList) -> TogglingPhaseList {
    shift_alternating(modified, -FRAC_PI_2)
}

fn shift_alternating(list: &TogglingPhaseList, amount: f64) -> TogglingPhaseList {
    TogglingPhaseList(
        list.0
            .iter()
            .enumerate()
            .map(|(i, &t)| t + alternating(i) * amount)
            .collect(),
    )
}

/// Distance on the circle between two angles, in `[0, π]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Residual of the vanishing vector sum: `max(|Σcos|, |Σsin|)`.
fn vector_sum_residual(phases: &[f64]) -> f64 {
    let (c, s) = phases
        .iter()
        .fold((0.0, 0.0), |(c, s), &p| (c + p.cos(), s + p.sin()));
    c.abs().max(s.abs())
}

/// `|Σ_j Σ_{k<j} sin(φ_j − φ_k)|`.
fn pairwise_sine_residual(phases: &[f64]) -> f64 {
    let mut total = 0.0;
    for (j, &pj) in phases.iter().enumerate() {
        for &pk in &phases[..j] {
            total += (pj - pk).sin();
        }
    }
    total.abs()
}

/// Residuals of the closure and the first- and second-order conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionReport {
    pub tolerance: f64,
    /// Circular distance of `2Σ(φ'_{2j} − φ'_{2j−1})` from `−Φ`.
    pub closure: f64,
    /// First-order PSE: vanishing vector sum of `φ'`.
    pub pse_first: f64,
    /// Second-order PSE: pairwise sine sum of `φ'`.
    pub pse_second: f64,
    /// First-order ORE: vanishing vector sum of `φ''`.
    pub ore_first: f64,
    /// Second-order ORE: pairwise sine sum of `φ''`.
    pub ore_second: f64,
}

impl ConditionReport {
    pub fn closure_passes(&self) -> bool {
        self.closure <= self.tolerance
    }

    /// Highest PSE order (0..=2) whose conditions all hold.
    pub fn pse_order(&self) -> u32 {
        let tol = self.tolerance;
        match (self.pse_first <= tol, self.pse_second <= tol) {
            (true, true) => 2,
            (true, false) => 1,
            _ => 0,
        }
    }

    /// Highest ORE order (0..=2) whose conditions all hold. Order two also
    /// needs the first-order PSE condition.
    pub fn ore_order(&self) -> u32 {
        let tol = self.tolerance;
        if self.ore_first > tol {
            0
        } else if self.ore_second <= tol && self.pse_first <= tol {
            2
        } else {
            1
        }
    }

    /// Closure holds and PSE/ORE are corrected to at least the given orders
    /// (capped at 2, the highest order checked algebraically).
    pub fn satisfies(&self, pse: u32, ore: u32) -> bool {
        self.closure_passes() && self.pse_order() >= pse.min(2) && self.ore_order() >= ore.min(2)
    }
}

/// Evaluates the cancellation conditions for a toggling-frame phase list
/// targeting `Z(phi)`.
pub fn check_conditions(
    toggling: &TogglingPhaseList,
    phi: f64,
    tol: f64,
) -> Result<ConditionReport> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if !phi.is_finite() {
        return Err(Error::NonFinite("target angle"));
    }
    let t = toggling.as_slice();
    let twice_diff: f64 = 2.0 * t.chunks_exact(2).map(|c| c[1] - c[0]).sum::<f64>();
    let modified = modified_phases(toggling);
    Ok(ConditionReport {
        tolerance: tol,
        closure: circular_distance(twice_diff, -phi),
        pse_first: vector_sum_residual(t),
        pse_second: pairwise_sine_residual(t),
        ore_first: vector_sum_residual(modified.as_slice()),
        ore_second: pairwise_sine_residual(modified.as_slice()),
    })
}

/// Wraps an angle into `[0, 2π)` for display.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn tog(v: &[f64]) -> TogglingPhaseList {
        TogglingPhaseList::new(v.to_vec()).unwrap()
    }

    fn lab(v: &[f64]) -> PhaseList {
        PhaseList::new(v.to_vec()).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn odd_lengths_rejected() {
        assert_eq!(PhaseList::new(vec![1.0]), Err(Error::OddLength(1)));
        assert_eq!(
            TogglingPhaseList::new(vec![1.0, 2.0, 3.0]),
            Err(Error::OddLength(3))
        );
    }

    #[test]
    fn equal_pair_is_fixed_point() {
        let x = 0.83;
        assert!(close(to_toggling(&lab(&[x, x])).as_slice(), &[x, x], 1e-15));
    }

    #[test]
    fn baseline_toggling_phases() {
        for phi in [PI, PI / 2.0, 0.3] {
            let t = to_toggling(&lab(&[-phi / 2.0, 0.0]));
            assert!(close(t.as_slice(), &[-phi / 2.0, -phi], 1e-15));
        }
    }

    #[test]
    fn rhombus_lab_and_toggling_forms_agree() {
        for phi in [PI, PI / 2.0, PI / 4.0] {
            let lab_phases = [
                (-3.0 * phi + 4.0 * PI) / 8.0,
                (-phi + 4.0 * PI) / 8.0,
                (phi + 12.0 * PI) / 8.0,
                (3.0 * phi + 12.0 * PI) / 8.0,
            ];
            let toggling = [
                (-3.0 * phi + 4.0 * PI) / 8.0,
                (-5.0 * phi + 4.0 * PI) / 8.0,
                (-3.0 * phi + 12.0 * PI) / 8.0,
                (-5.0 * phi + 12.0 * PI) / 8.0,
            ];
            let got = to_toggling(&lab(&lab_phases));
            let tol = 1e-12;
            assert!(got
                .as_slice()
                .iter()
                .zip(&toggling)
                .all(|(a, b)| circular_distance(*a, *b) < tol));
            assert!(close(from_toggling(&got).as_slice(), &lab_phases, tol));

            let report = check_conditions(&tog(&toggling), phi, 1e-12).unwrap();
            assert!(report.closure <= 1e-12);
            assert!(report.pse_first <= 1e-12);
            assert!(report.ore_first <= 1e-12);
            assert!(report.pse_second > 1e-3);
            assert_eq!((report.pse_order(), report.ore_order()), (1, 1));
        }
    }

    #[test]
    fn modified_phases_shift_and_undo() {
        let zero = tog(&[0.0, 0.0]);
        let m = modified_phases(&zero);
        assert!(close(m.as_slice(), &[FRAC_PI_2, -FRAC_PI_2], 0.0));
        let twice = modified_phases(&m);
        assert!(!close(twice.as_slice(), zero.as_slice(), 1e-3));
        assert!(close(
            unmodified_phases(&m).as_slice(),
            zero.as_slice(),
            0.0
        ));
    }

    #[test]
    fn modified_rhombus_is_still_a_rhombus() {
        let phi = PI / 2.0;
        let t = tog(&[
            (-3.0 * phi + 4.0 * PI) / 8.0,
            (-5.0 * phi + 4.0 * PI) / 8.0,
            (-3.0 * phi + 12.0 * PI) / 8.0,
            (-5.0 * phi + 12.0 * PI) / 8.0,
        ]);
        let m = modified_phases(&t);
        let m = m.as_slice();
        assert!((circular_distance(m[0], m[2]) - PI).abs() < 1e-12);
        assert!((circular_distance(m[1], m[3]) - PI).abs() < 1e-12);
    }

    #[test]
    fn baseline_fails_first_order_with_unit_residual() {
        let report = check_conditions(&tog(&[-PI / 2.0, -PI]), PI, DEFAULT_TOL).unwrap();
        assert!(report.closure_passes());
        assert!((report.pse_first - 1.0).abs() < 1e-12);
        assert_eq!(report.pse_order(), 0);
        assert!(!report.satisfies(1, 0));
        assert!(report.satisfies(0, 0));
    }

    #[test]
    fn simultaneous_second_order_hexagons() {
        for phi in [PI, PI / 2.0, PI / 4.0] {
            let u = 2.0 * PI / 3.0;
            let toggling: Vec<f64> = (0..3)
                .flat_map(|m| {
                    let m = m as f64;
                    [m * u, -phi / 6.0 - m * u]
                })
                .collect();
            let report = check_conditions(&tog(&toggling), phi, 1e-12).unwrap();
            for r in [
                report.closure,
                report.pse_first,
                report.pse_second,
                report.ore_first,
                report.ore_second,
            ] {
                assert!(r <= 1e-12, "{report:?}");
            }
        }
    }

    #[test]
    fn closure_is_modular() {
        let phi = 0.4;
        let shifted = tog(&[0.0, -phi / 2.0 + PI]);
        assert!(check_conditions(&shifted, phi, 1e-12)
            .unwrap()
            .closure_passes());
        let broken = tog(&[0.0, -phi / 2.0 + 0.1]);
        assert!(!check_conditions(&broken, phi, 1e-9)
            .unwrap()
            .closure_passes());
    }

    #[test]
    fn tolerance_must_be_positive() {
        assert!(check_conditions(&tog(&[0.0, 0.0]), 0.0, 0.0).is_err());
    }

    #[test]
    fn normalization_range() {
        assert_eq!(normalize_angle(-1e-300), 0.0);
        assert!((normalize_angle(-PI / 2.0) - 1.5 * PI).abs() < 1e-15);
        assert!((normalize_angle(5.0 * PI) - PI).abs() < 1e-14);
    }

    fn even_list() -> impl Strategy<Value = Vec<f64>> {
        (1usize..=8).prop_flat_map(|half| prop::collection::vec(-10.0f64..10.0, 2 * half))
    }

    proptest! {
        #[test]
        fn round_trip(v in even_list()) {
            let p = lab(&v);
            let back = from_toggling(&to_toggling(&p));
            prop_assert!(close(back.as_slice(), &v, 1e-12));
            let t = tog(&v);
            let again = to_toggling(&from_toggling(&t));
            prop_assert!(close(again.as_slice(), &v, 1e-12));
        }

        #[test]
        fn full_turn_on_one_phase_leaves_residuals(v in even_list(), idx in 0usize..16, phi in -4.0f64..4.0) {
            let idx = idx % v.len();
            let mut w = v.clone();
            w[idx] += TAU;
            let a = check_conditions(&to_toggling(&lab(&v)), phi, 1.0).unwrap();
            let b = check_conditions(&to_toggling(&lab(&w)), phi, 1.0).unwrap();
            prop_assert!((a.closure - b.closure).abs() <= 1e-9);
            prop_assert!((a.pse_first - b.pse_first).abs() <= 1e-12);
            prop_assert!((a.pse_second - b.pse_second).abs() <= 1e-12);
            prop_assert!((a.ore_first - b.ore_first).abs() <= 1e-12);
            prop_assert!((a.ore_second - b.ore_second).abs() <= 1e-12);
        }

        #[test]
        fn constant_offset_leaves_pairwise_sums(v in even_list(), delta in -10.0f64..10.0) {
            let shifted: Vec<f64> = v.iter().map(|x| x + delta).collect();
            let a = check_conditions(&tog(&v), 0.0, 1.0).unwrap();
            let b = check_conditions(&tog(&shifted), 0.0, 1.0).unwrap();
            prop_assert!((a.pse_second - b.pse_second).abs() <= 1e-12);
            prop_assert!((a.ore_second - b.ore_second).abs() <= 1e-12);
        }
    }
}
