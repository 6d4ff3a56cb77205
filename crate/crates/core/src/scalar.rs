//! Exact one-species dynamics.
//!
//! Each phase flow of the scalar subsystems (dry decay, logistic growth,
//! logistic growth under grazing) sends `x` to `p x / (q x + 1)` for some
//! `p > 0`, `q >= 0`. That family is closed under composition, so the period
//! map of a whole season is again of this form and its positive fixed point
//! is `(p - 1) / q` whenever `p > 1`.

use crate::params::{ModelParameters, Schedule, Species};
use serde::Serialize;
use thiserror::Error;

/// Relative guard below which `r - c` is treated as zero in the grazing phase.
pub const SINGULAR_RATE_GUARD: f64 = 1e-12;
/// Residual target for fixed-point iteration.
pub const FIXED_POINT_TOL: f64 = 1e-12;
/// Iteration cap for fixed-point iteration.
pub const MAX_ITERATIONS: usize = 100_000;
/// Log-gains within this distance of zero are flagged as degenerate.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScalarError {
    #[error("malformed growth map (p = {p}, q = {q}): unbounded growth has no positive fixed point")]
    MalformedMap { p: f64, q: f64 },
}

/// The map `x -> p x / (q x + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MobiusGrowthMap {
    pub p: f64,
    pub q: f64,
}

impl MobiusGrowthMap {
    pub const IDENTITY: Self = Self { p: 1.0, q: 0.0 };

    pub fn new(p: f64, q: f64) -> Self {
        debug_assert!(p > 0.0 && q >= 0.0, "p = {p}, q = {q}");
        Self { p, q }
    }

    pub fn apply(&self, x: f64) -> f64 {
        self.p * x / (self.q * x + 1.0)
    }

    /// `next ∘ self`: apply `self` first, then `next`.
    pub fn then(&self, next: &Self) -> Self {
        Self {
            p: next.p * self.p,
            q: next.q * self.p + self.q,
        }
    }

    /// Derivative of the map at an arbitrary point.
    pub fn derivative(&self, x: f64) -> f64 {
        let denom = self.q * x + 1.0;
        self.p / (denom * denom)
    }
}

/// Vector field of a single scalar phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseKind {
    /// `x' = -d x`
    Decay { d: f64 },
    /// `x' = r x (1 - x)`
    Logistic { r: f64 },
    /// `x' = r x (1 - x) - c x`
    LogisticHarvest { r: f64, c: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarPhase {
    pub kind: PhaseKind,
    pub duration: f64,
}

impl ScalarPhase {
    pub fn new(kind: PhaseKind, duration: f64) -> Self {
        Self { kind, duration }
    }

    /// Right-hand side of the phase ODE.
    pub fn rate(&self, x: f64) -> f64 {
        match self.kind {
            PhaseKind::Decay { d } => -d * x,
            PhaseKind::Logistic { r } => r * x * (1.0 - x),
            PhaseKind::LogisticHarvest { r, c } => r * x * (1.0 - x) - c * x,
        }
    }
}

/// Closed-form flow of one phase over its duration.
pub fn phase_map(phase: &ScalarPhase) -> MobiusGrowthMap {
    let dt = phase.duration;
    match phase.kind {
        PhaseKind::Decay { d } => MobiusGrowthMap::new((-d * dt).exp(), 0.0),
        PhaseKind::Logistic { r } => logistic_flow(r, r, dt),
        PhaseKind::LogisticHarvest { r, c } => {
            let net = r - c;
            if net.abs() < SINGULAR_RATE_GUARD * r.abs().max(c.abs()) {
                // 1/x grows linearly at rate r
                MobiusGrowthMap::new(1.0, r * dt)
            } else {
                logistic_flow(net, r, dt)
            }
        }
    }
}

// Bernoulli solution of x' = net x - crowding x^2.
fn logistic_flow(net: f64, crowding: f64, dt: f64) -> MobiusGrowthMap {
    let growth = (net * dt).exp_m1();
    MobiusGrowthMap::new(growth + 1.0, crowding * growth / net)
}

/// The three phases of one season for the chosen species.
pub fn season_phases(params: &ModelParameters, schedule: &Schedule, species: Species) -> [ScalarPhase; 3] {
    let [dry, growth, grazing] = schedule.durations();
    let (d, r, c) = match species {
        Species::U => (params.d1, 1.0, params.c1),
        Species::V => (params.d2, params.r, params.c2),
    };
    [
        ScalarPhase::new(PhaseKind::Decay { d }, dry),
        ScalarPhase::new(PhaseKind::Logistic { r }, growth),
        ScalarPhase::new(PhaseKind::LogisticHarvest { r, c }, grazing),
    ]
}

/// Period map `H` (species U) or `K` (species V) of the decoupled subsystem.
pub fn period_map(params: &ModelParameters, schedule: &Schedule, species: Species) -> MobiusGrowthMap {
    season_phases(params, schedule, species)
        .iter()
        .fold(MobiusGrowthMap::IDENTITY, |acc, phase| acc.then(&phase_map(phase)))
}

/// `lim_{x -> 0} H(x) / x`, i.e. the derivative of the map at zero.
pub fn map_limit_ratio(map: &MobiusGrowthMap) -> f64 {
    map.p
}

/// Logarithm of the gain at zero of the season map, written as a sum of the
/// per-phase linear rates. Equals `c1 (tau2 - tau2*)` for U and
/// `c2 (tau2 - tau2**)` for V without dividing by the grazing intensity.
pub fn log_gain(params: &ModelParameters, schedule: &Schedule, species: Species) -> f64 {
    let [dry, growth, grazing] = schedule.durations();
    match species {
        Species::U => -params.d1 * dry + growth + (1.0 - params.c1) * grazing,
        Species::V => -params.d2 * dry + params.r * growth + (params.r - params.c2) * grazing,
    }
}

/// Unique positive solution of `H(x) = x`, if any.
pub fn fixed_point(map: &MobiusGrowthMap) -> Result<Option<f64>, ScalarError> {
    if map.p <= 1.0 {
        return Ok(None);
    }
    if map.q <= 0.0 {
        return Err(ScalarError::MalformedMap { p: map.p, q: map.q });
    }
    Ok(Some((map.p - 1.0) / map.q))
}

/// `H_0(x), H_1(x), ..., H_n(x)`.
pub fn iterate_sequence(map: &MobiusGrowthMap, x: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut current = x;
    out.push(current);
    for _ in 0..n {
        current = map.apply(current);
        out.push(current);
    }
    out
}

/// Iterates `map` from `x` until successive values agree to
/// [`FIXED_POINT_TOL`]. Returns the limit and the number of steps taken, or
/// `None` if the cap is hit.
pub fn iterate_to_fixed_point(map: &MobiusGrowthMap, x: f64, max_iter: usize) -> Option<(f64, usize)> {
    let mut current = x;
    for k in 1..=max_iter {
        let next = map.apply(current);
        if (next - current).abs() < FIXED_POINT_TOL * next.abs().max(1.0) {
            return Some((next, k));
        }
        current = next;
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScalarLabel {
    Extinct,
    PersistentPeriodic,
}

/// Long-run behaviour of one species in isolation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalarRegime {
    pub label: ScalarLabel,
    /// Initial value of the positive periodic solution.
    pub fixed_point: Option<f64>,
    /// Derivative of the season map at zero.
    pub multiplier_at_zero: f64,
    /// Set when the gain at zero equals one to within [`BOUNDARY_TOL`].
    pub degenerate: bool,
}

impl ScalarRegime {
    pub fn persists(&self) -> bool {
        self.label == ScalarLabel::PersistentPeriodic
    }
}

pub fn scalar_classify(params: &ModelParameters, schedule: &Schedule, species: Species) -> ScalarRegime {
    let map = period_map(params, schedule, species);
    let exponent = log_gain(params, schedule, species);
    let degenerate = exponent.abs() <= BOUNDARY_TOL;
    if degenerate || exponent < 0.0 {
        return ScalarRegime {
            label: ScalarLabel::Extinct,
            fixed_point: None,
            multiplier_at_zero: map.p,
            degenerate,
        };
    }
    // exponent > 0 and a non-degenerate season always has q > 0
    let fixed = fixed_point(&map).ok().flatten();
    ScalarRegime {
        label: if fixed.is_some() { ScalarLabel::PersistentPeriodic } else { ScalarLabel::Extinct },
        fixed_point: fixed,
        multiplier_at_zero: map.p,
        degenerate: fixed.is_none(),
    }
}
