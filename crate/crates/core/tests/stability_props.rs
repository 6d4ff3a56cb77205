mod common;

use common::*;
use proptest::prelude::*;
use seasonal_graze::params::{validate, Species};
use seasonal_graze::scalar::scalar_classify;
use seasonal_graze::stability::{classify, condition_ratios, exponents, multipliers, thresholds, Region};
use seasonal_graze::{ModelParameters, Schedule};

fn params() -> impl Strategy<Value = ModelParameters> {
    (0.05..1.5f64, 0.05..1.5f64, 0.5..2.0f64, 0.0..2.0f64, 0.0..2.0f64, 0.05..2.0f64, 0.05..2.0f64)
        .prop_map(|(d1, d2, r, b1, b2, c1, c2)| ModelParameters { d1, d2, r, b1, b2, c1, c2 })
}

fn schedule() -> impl Strategy<Value = Schedule> {
    (0.0..1.0f64, 0.0..1.0f64).prop_map(|(a, b)| {
        let tau1 = a * PERIOD;
        Schedule::new(tau1, tau1 + b * (PERIOD - tau1), PERIOD)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    // A long dry season leaves no grazing onset late enough for persistence.
    #[test]
    fn dry_threshold_orders_grazing_threshold(p in params(), s in schedule()) {
        let th = thresholds(&p, &s);
        if (s.tau1 - th.tau1_star).abs() > 1e-9 {
            prop_assert_eq!(s.tau1 < th.tau1_star, th.tau2_star < s.period);
        }
        if (s.tau1 - th.tau1_star2).abs() > 1e-9 {
            prop_assert_eq!(s.tau1 < th.tau1_star2, th.tau2_star2 < s.period);
        }
    }

    #[test]
    fn exponent_sign_is_threshold_order(p in params(), s in schedule()) {
        let e = exponents(&p, &s);
        let th = thresholds(&p, &s);
        if e.u_gain.abs() > 1e-9 {
            prop_assert_eq!(e.u_gain > 0.0, s.tau2 > th.tau2_star);
        }
        if e.v_gain.abs() > 1e-9 {
            prop_assert_eq!(e.v_gain > 0.0, s.tau2 > th.tau2_star2);
        }
    }

    #[test]
    fn multipliers_are_consistent(p in params(), s in schedule()) {
        let m = multipliers(&p, &s);
        prop_assert!(rel_close(m.lambda1 * m.lambda5, 1.0, 1e-12));
        prop_assert!(rel_close(m.lambda3 * m.lambda6, 1.0, 1e-12));
        for l in [m.lambda1, m.lambda2, m.lambda3, m.lambda4, m.lambda5, m.lambda6] {
            prop_assert!(l > 0.0 && l.is_finite());
        }
    }

    #[test]
    fn classification_agrees_with_single_species(p in params(), s in schedule()) {
        let c = classify(&p, &s);
        let u = scalar_classify(&p, &s, Species::U).persists();
        let v = scalar_classify(&p, &s, Species::V).persists();
        match c.region {
            Region::Collapse => prop_assert!(!u && !v),
            Region::UWins => prop_assert!(u && !v),
            Region::VWins => prop_assert!(!u && v),
            Region::Boundary => {}
            _ => prop_assert!(u && v),
        }
        match c.region {
            Region::Coexist => prop_assert!(p.b1 * p.b2 < 1.0),
            Region::Bistable => prop_assert!(c.multipliers.lambda2 < 1.0 && c.multipliers.lambda4 < 1.0),
            _ => {}
        }
    }

    // With both species persisting the invasion signs reduce to the ratio
    // window whenever tau2 lies past both grazing thresholds.
    #[test]
    fn ratio_window_matches_invasion_signs(p in params(), s in schedule()) {
        let th = thresholds(&p, &s);
        let c = classify(&p, &s);
        let m = c.multipliers;
        if s.tau2 <= th.tau2_star.max(th.tau2_star2) + 1e-6
            || p.b1 < 1e-6
            || m.lambda2.ln().abs() < 1e-9
            || m.lambda4.ln().abs() < 1e-9
        {
            return Ok(());
        }
        let w = condition_ratios(&p, &s).unwrap();
        prop_assert_eq!(m.lambda2 > 1.0, w.ratio > w.lower);
        prop_assert_eq!(m.lambda4 > 1.0, w.ratio < w.upper);
    }

    #[test]
    fn every_valid_input_gets_a_label(p in params(), s in schedule()) {
        prop_assume!(validate(&p, &s).is_valid());
        let c = classify(&p, &s);
        prop_assert!(Region::ALL.contains(&c.region));
        prop_assert!(!c.notes.is_empty());
    }
}

#[test]
fn reference_regions() {
    for e in collapse_examples() {
        assert_eq!(classify(&e.params, &e.schedule).region, Region::Collapse, "{}", e.name);
    }
    assert_eq!(classify(&u_wins().params, &u_wins().schedule).region, Region::UWins);
    assert_eq!(classify(&v_wins().params, &v_wins().schedule).region, Region::VWins);
    assert_eq!(classify(&coexist().params, &coexist().schedule).region, Region::Coexist);
    assert_eq!(classify(&bistable().params, &bistable().schedule).region, Region::Bistable);
}

#[test]
fn grazing_onset_at_threshold_is_boundary() {
    let e = u_wins();
    let th = thresholds(&e.params, &e.schedule);
    let s = Schedule { tau2: th.tau2_star2, ..e.schedule };
    assert_eq!(classify(&e.params, &s).region, Region::Boundary);
}

#[test]
fn region_labels_serialize_by_name() {
    let text = serde_json::to_string(&Region::ALL).unwrap();
    assert_eq!(
        text,
        r#"["I_Collapse","II_UWins","III_VWins","IV_Coexist","V_ULAS_Unresolved","VI_VLAS_Unresolved","VII_Bistable","Boundary"]"#
    );
}
