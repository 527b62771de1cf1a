mod support;

use std::f64::consts::PI;

use proptest::prelude::*;
use zpulse::analysis::{classify, CorrectedOrder};
use zpulse::catalog::{build, claimed_orders, BuildParams, FamilyId};
use zpulse::{fidelity, perturbed_rotation, ErrorPoint};

use support::{explicit_rotation, matmul, max_diff, product, series_pulse, z_fidelity};

fn targets(family: FamilyId) -> Vec<f64> {
    if family.requires_half_turn() {
        vec![PI]
    } else {
        vec![PI, PI / 2.0, PI / 4.0]
    }
}

#[test]
fn rhombus_matches_hand_product_under_strength_error() {
    let eps = 0.2;
    let seq = build(FamilyId::S4_111, PI, &BuildParams::default()).unwrap();
    let phases = [PI / 8.0, 3.0 * PI / 8.0, 13.0 * PI / 8.0, 15.0 * PI / 8.0];
    let mut hand = explicit_rotation(PI * (1.0 + eps), phases[0]);
    for &p in &phases[1..] {
        hand = matmul(&explicit_rotation(PI * (1.0 + eps), p), &hand);
    }
    let got = seq.propagate(ErrorPoint::new(eps, 0.0)).entries();
    assert!(max_diff(&got, &hand) <= 1e-12);
}

#[test]
fn catalog_propagators_match_series_products() {
    let points = [
        (0.0, 0.0),
        (0.1, -0.05),
        (-0.3, 0.2),
        (0.7, 0.9),
        (-1.0, -0.87),
    ];
    for family in FamilyId::buildable() {
        for phi in targets(family) {
            let seq = build(family, phi, &BuildParams::default()).unwrap();
            let pulses: Vec<(f64, f64)> = seq.pulses.iter().map(|p| (p.theta, p.phase)).collect();
            for (eps, f) in points {
                let oracle = product(&pulses, |t, p| series_pulse(t, p, eps, f));
                let got = seq.propagate(ErrorPoint::new(eps, f));
                assert!(
                    max_diff(&got.entries(), &oracle) <= 1e-10,
                    "{family} {phi} ({eps}, {f})"
                );
                let fid = seq.fidelity(ErrorPoint::new(eps, f));
                assert!((fid - z_fidelity(phi, &oracle)).abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn classified_orders_meet_claims() {
    for family in FamilyId::buildable() {
        let params = BuildParams::default();
        let (pse, ore) = claimed_orders(family, &params).unwrap();
        for phi in targets(family) {
            let seq = build(family, phi, &params).unwrap();
            let class = classify(&seq).unwrap();
            assert_eq!(
                class.i,
                CorrectedOrder::Finite(pse as i32),
                "{family} at {phi}"
            );
            assert_eq!(
                class.j,
                CorrectedOrder::Finite(ore as i32),
                "{family} at {phi}"
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn fidelity_is_left_invariant(
        a in (0.0f64..7.0, -4.0f64..4.0, -1.0f64..1.0, -1.0f64..1.0),
        b in (0.0f64..7.0, -4.0f64..4.0, -1.0f64..1.0, -1.0f64..1.0),
        w in (0.0f64..7.0, -4.0f64..4.0),
    ) {
        let u = perturbed_rotation(a.0, a.1, a.2, a.3);
        let v = perturbed_rotation(b.0, b.1, b.2, b.3);
        let left = perturbed_rotation(w.0, w.1, 0.0, 0.0);
        let lhs = fidelity(&(left * u), &(left * v));
        prop_assert!((lhs - fidelity(&u, &v)).abs() <= 1e-12);
    }

    #[test]
    fn same_axis_rotations_compose(
        t1 in 0.0f64..7.0,
        t2 in 0.0f64..7.0,
        phase in -4.0f64..4.0,
        eps in -1.0f64..1.0,
        f in -1.0f64..1.0,
    ) {
        let joined = perturbed_rotation(t1 + t2, phase, eps, f);
        let split = perturbed_rotation(t2, phase, eps, f) * perturbed_rotation(t1, phase, eps, f);
        prop_assert!(joined.max_abs_diff(&split) <= 1e-12);
    }
}
