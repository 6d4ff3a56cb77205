#![allow(dead_code)]

use rand::Rng;
use seasonal_graze::{ModelParameters, Schedule};

pub const PERIOD: f64 = 10.0;

pub struct Example {
    pub name: &'static str,
    pub params: ModelParameters,
    pub schedule: Schedule,
}

#[allow(clippy::too_many_arguments)]
fn ex(name: &'static str, d1: f64, d2: f64, b: f64, c1: f64, c2: f64, tau1: f64, tau2: f64) -> Example {
    Example {
        name,
        params: ModelParameters { d1, d2, r: 1.0, b1: b, b2: b, c1, c2 },
        schedule: Schedule::new(tau1, tau2, PERIOD),
    }
}

pub fn collapse_even() -> Example {
    ex("collapse-even", 0.5, 0.5, 0.2, 0.4, 0.4, 7.0, 8.0)
}
pub fn collapse_v_hardy() -> Example {
    ex("collapse-v-hardy", 0.5, 0.3, 0.2, 0.4, 0.8, 7.0, 8.0)
}
pub fn collapse_v_frail() -> Example {
    ex("collapse-v-frail", 0.5, 0.7, 0.2, 0.4, 0.6, 6.0, 7.0)
}
pub fn collapse_early_graze() -> Example {
    ex("collapse-early-graze", 0.5, 0.5, 0.2, 0.4, 0.6, 6.0, 7.0)
}
pub fn u_wins() -> Example {
    ex("u-wins", 0.1, 0.5, 0.2, 0.4, 0.6, 6.0, 8.0)
}
pub fn v_wins() -> Example {
    ex("v-wins", 0.5, 0.1, 0.2, 0.6, 0.4, 6.0, 8.0)
}
pub fn coexist() -> Example {
    ex("coexist", 0.5, 0.1, 0.2, 0.6, 0.6, 4.0, 7.0)
}
pub fn bistable() -> Example {
    ex("bistable", 0.5, 0.1, 2.0, 0.6, 0.6, 4.0, 7.0)
}

pub fn collapse_examples() -> [Example; 4] {
    [collapse_even(), collapse_v_hardy(), collapse_v_frail(), collapse_early_graze()]
}

/// Parameter regimes for the region maps. Panels (a)-(d): dry-season
/// ordering of the two species and which one is grazed beyond its growth
/// rate. `b` sets both competition coefficients.
pub fn regime_panel(panel: char, b: f64) -> ModelParameters {
    let (d1, d2, c1, c2) = match panel {
        // u tolerates less drought; c1 < 1, c2 > r
        'a' => (0.5, 0.1, 0.6, 1.5),
        // u tolerates less drought; c1 > 1, c2 < r
        'b' => (0.5, 0.1, 1.5, 0.6),
        // v tolerates less drought; c1 < 1, c2 > r
        'c' => (0.1, 0.5, 0.6, 1.5),
        // v tolerates less drought; c1 > 1, c2 < r
        'd' => (0.1, 0.5, 1.5, 0.6),
        _ => panic!("unknown panel {panel}"),
    };
    ModelParameters { d1, d2, r: 1.0, b1: b, b2: b, c1, c2 }
}

pub const PANELS: [char; 4] = ['a', 'b', 'c', 'd'];
pub const WEAK: f64 = 0.2;
pub const STRONG: f64 = 2.0;

/// A random valid parameter set with `T = 10`, all rates in ranges that keep
/// the season maps well conditioned.
pub fn random_params<R: Rng>(rng: &mut R) -> ModelParameters {
    ModelParameters {
        d1: rng.gen_range(0.05..1.5),
        d2: rng.gen_range(0.05..1.5),
        r: rng.gen_range(0.5..2.0),
        b1: rng.gen_range(0.0..2.0),
        b2: rng.gen_range(0.0..2.0),
        c1: rng.gen_range(0.05..2.0),
        c2: rng.gen_range(0.05..2.0),
    }
}

/// A random admissible schedule on `[0, 10]` with a non-empty dry season.
pub fn random_schedule<R: Rng>(rng: &mut R) -> Schedule {
    let tau1 = rng.gen_range(0.1..6.0);
    let tau2 = rng.gen_range(tau1..PERIOD);
    Schedule::new(tau1, tau2, PERIOD)
}

/// Classical RK4 on a scalar ODE, `n` equal steps.
pub fn rk4_scalar(f: impl Fn(f64) -> f64, mut x: f64, duration: f64, n: usize) -> f64 {
    if duration <= 0.0 {
        return x;
    }
    let h = duration / n as f64;
    for _ in 0..n {
        let k1 = f(x);
        let k2 = f(x + 0.5 * h * k1);
        let k3 = f(x + 0.5 * h * k2);
        let k4 = f(x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    x
}

/// One season of the decoupled `u` equation by direct integration:
/// decay at `d`, logistic growth at `r`, then logistic growth with
/// harvesting `c`.
pub fn scalar_season_ode(d: f64, r: f64, c: f64, s: &Schedule, x: f64, steps_per_unit: usize) -> f64 {
    let n = |len: f64| ((len * steps_per_unit as f64).ceil() as usize).max(1);
    let x = rk4_scalar(|y| -d * y, x, s.tau1, n(s.tau1));
    let x = rk4_scalar(|y| r * y * (1.0 - y), x, s.tau2 - s.tau1, n(s.tau2 - s.tau1));
    rk4_scalar(|y| r * y * (1.0 - y) - c * y, x, s.period - s.tau2, n(s.period - s.tau2))
}

/// `ln` of the per-season gain at zero, written from the threshold times
/// rather than the phase rates.
pub fn gain_from_thresholds(p: &ModelParameters, s: &Schedule) -> (f64, f64) {
    let t = s.period;
    let tau2_star = ((p.d1 + 1.0) * s.tau1 + (p.c1 - 1.0) * t) / p.c1;
    let tau2_star2 = ((p.d2 + p.r) * s.tau1 + (p.c2 - p.r) * t) / p.c2;
    (p.c1 * (s.tau2 - tau2_star), p.c2 * (s.tau2 - tau2_star2))
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
