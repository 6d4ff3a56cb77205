mod common;

use common::*;
use proptest::prelude::*;
use seasonal_graze::params::Species;
use seasonal_graze::scalar::{
    fixed_point, iterate_sequence, period_map, phase_map, scalar_classify, season_phases, MobiusGrowthMap, PhaseKind,
    ScalarLabel, ScalarPhase, FIXED_POINT_TOL,
};
use seasonal_graze::{ModelParameters, Schedule};

fn map() -> impl Strategy<Value = MobiusGrowthMap> {
    (0.01..20.0f64, 0.0..20.0f64).prop_map(|(p, q)| MobiusGrowthMap::new(p, q))
}

fn params() -> impl Strategy<Value = ModelParameters> {
    (0.05..1.5f64, 0.05..1.5f64, 0.5..2.0f64, 0.05..2.0f64, 0.05..2.0f64)
        .prop_map(|(d1, d2, r, c1, c2)| ModelParameters { d1, d2, r, b1: 0.3, b2: 0.3, c1, c2 })
}

fn schedule() -> impl Strategy<Value = Schedule> {
    (0.05..0.95f64, 0.0..1.0f64).prop_map(|(a, b)| {
        let tau1 = a * PERIOD;
        Schedule::new(tau1, tau1 + b * (PERIOD - tau1), PERIOD)
    })
}

fn species() -> impl Strategy<Value = Species> {
    prop_oneof![Just(Species::U), Just(Species::V)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn composition_law(a in map(), b in map(), xs in proptest::collection::vec(0.0..10.0f64, 10)) {
        let composed = a.then(&b);
        for x in xs {
            let direct = b.apply(a.apply(x));
            prop_assert!(rel_close(composed.apply(x), direct, 1e-12) || (composed.apply(x) - direct).abs() < 1e-300,
                "{} vs {}", composed.apply(x), direct);
        }
    }

    #[test]
    fn derivative_at_zero_matches_thresholds(p in params(), s in schedule()) {
        let (gu, gv) = gain_from_thresholds(&p, &s);
        let h = period_map(&p, &s, Species::U);
        let k = period_map(&p, &s, Species::V);
        prop_assert!(rel_close(h.derivative(0.0), gu.exp(), 1e-10));
        prop_assert!(rel_close(k.derivative(0.0), gv.exp(), 1e-10));
    }

    #[test]
    fn fixed_point_residual(p in params(), s in schedule(), sp in species()) {
        let h = period_map(&p, &s, sp);
        if let Some(x0) = fixed_point(&h).unwrap() {
            prop_assert!(x0 > 0.0);
            prop_assert!((h.apply(x0) - x0).abs() <= FIXED_POINT_TOL * x0.max(1.0));
        }
    }

    // Below the fixed point iterates rise towards it, above it they fall,
    // and without one they fall to zero.
    #[test]
    fn monotone_trichotomy(p in params(), s in schedule(), sp in species(), x in 1e-3..5.0f64) {
        let regime = scalar_classify(&p, &s, sp);
        let seq = iterate_sequence(&period_map(&p, &s, sp), x, 40);
        let slack = 1e-14;
        match regime.fixed_point {
            Some(x0) if x < x0 => {
                prop_assert!(seq.windows(2).all(|w| w[1] >= w[0] * (1.0 - slack) && w[1] <= x0 * (1.0 + slack)));
            }
            Some(x0) => {
                prop_assert!(seq.windows(2).all(|w| w[1] <= w[0] * (1.0 + slack) && w[1] >= x0 * (1.0 - slack)));
            }
            None => {
                prop_assert_eq!(regime.label, ScalarLabel::Extinct);
                prop_assert!(seq.windows(2).all(|w| w[1] <= w[0] && w[1] >= 0.0));
            }
        }
    }

    #[test]
    fn season_map_shrinks_large_values(p in params(), s in schedule(), sp in species()) {
        let h = period_map(&p, &s, sp);
        for x in [1.0, 2.0, 10.0] {
            prop_assert!(h.apply(x) < x, "H({x}) = {}", h.apply(x));
        }
    }

    #[test]
    fn closed_form_matches_direct_integration(p in params(), s in schedule(), x in 0.01..3.0f64) {
        let h = period_map(&p, &s, Species::U);
        let ode = scalar_season_ode(p.d1, 1.0, p.c1, &s, x, 2000);
        prop_assert!((h.apply(x) - ode).abs() < 1e-8, "{} vs {}", h.apply(x), ode);
        let k = period_map(&p, &s, Species::V);
        let ode = scalar_season_ode(p.d2, p.r, p.c2, &s, x, 2000);
        prop_assert!((k.apply(x) - ode).abs() < 1e-8, "{} vs {}", k.apply(x), ode);
    }

    #[test]
    fn single_phase_maps_match_integration(r in 0.1..3.0f64, c in 0.0..3.0f64, dt in 0.0..5.0f64, x in 0.01..3.0f64) {
        let phase = ScalarPhase::new(PhaseKind::LogisticHarvest { r, c }, dt);
        let ode = rk4_scalar(|y| phase.rate(y), x, dt, 20_000);
        prop_assert!((phase_map(&phase).apply(x) - ode).abs() < 1e-9);
    }
}

#[test]
fn harvest_equal_to_growth_uses_linear_inverse() {
    let phase = ScalarPhase::new(PhaseKind::LogisticHarvest { r: 0.7, c: 0.7 }, 3.0);
    let m = phase_map(&phase);
    assert_eq!(m.p, 1.0);
    assert!((m.q - 0.7 * 3.0).abs() < 1e-15);
    let ode = rk4_scalar(|y| phase.rate(y), 0.8, 3.0, 20_000);
    assert!((m.apply(0.8) - ode).abs() < 1e-10);
    // just off the singular rate the general formula agrees
    let near = phase_map(&ScalarPhase::new(PhaseKind::LogisticHarvest { r: 0.7, c: 0.7 + 1e-9 }, 3.0));
    assert!((near.apply(0.8) - m.apply(0.8)).abs() < 1e-8);
}

#[test]
fn example_fixed_point_is_iteration_limit() {
    let e = u_wins();
    let h = period_map(&e.params, &e.schedule, Species::U);
    let x0 = fixed_point(&h).unwrap().unwrap();
    let last = *iterate_sequence(&h, 0.5, 200).last().unwrap();
    assert!((last - x0).abs() < 1e-12);
    // the v-only season map has no positive fixed point here
    assert_eq!(scalar_classify(&e.params, &e.schedule, Species::V).label, ScalarLabel::Extinct);
}

#[test]
fn season_phases_have_schedule_lengths() {
    let e = coexist();
    let phases = season_phases(&e.params, &e.schedule, Species::V);
    let lengths: Vec<f64> = phases.iter().map(|p| p.duration).collect();
    assert_eq!(lengths, vec![4.0, 3.0, 3.0]);
}
