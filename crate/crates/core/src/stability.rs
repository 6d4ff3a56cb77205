//! Closed-form thresholds, Floquet multipliers of the trivial and
//! semi-trivial periodic solutions, and the resulting regime classification.
//!
//! Everything here is driven by two affine quantities,
//!
//! ```text
//! g_u = (1 - c1)(T - tau2) + (tau2 - tau1) - d1 tau1 = c1 (tau2 - tau2*)
//! g_v = (r - c2)(T - tau2) + r (tau2 - tau1) - d2 tau1 = c2 (tau2 - tau2**)
//! ```
//!
//! the log-gains at zero of the two scalar season maps. The multipliers are
//! exponentials of `±g_u`, `±g_v` and of the invasion exponents
//! `g_v - r b2 g_u` (v invading `(u*, 0)`) and `g_u - (b1 / r) g_v`
//! (u invading `(0, v*)`). The classifier works on the signs of those
//! exponents, which are meaningful for every schedule; the ratio form of the
//! invasion criteria flips sign across `tau2 = tau2*` and is only reported.

use crate::params::{ModelParameters, Schedule, Species};
use crate::scalar::{self, ScalarRegime};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Exponents within this distance of zero are treated as exactly zero.
pub const EXPONENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    /// Critical dry-season length for `u`: `T / (d1 + 1)`.
    pub tau1_star: f64,
    /// Critical dry-season length for `v`: `r T / (d2 + r)`.
    pub tau1_star2: f64,
    /// Critical grazing onset for `u`.
    pub tau2_star: f64,
    /// Critical grazing onset for `v`.
    pub tau2_star2: f64,
}

pub fn thresholds(params: &ModelParameters, schedule: &Schedule) -> Thresholds {
    let ModelParameters { d1, d2, r, c1, c2, .. } = *params;
    let Schedule { tau1, period: t, .. } = *schedule;
    Thresholds {
        tau1_star: t / (d1 + 1.0),
        tau1_star2: r * t / (d2 + r),
        // rearranged from ((d + r) tau1 + (c - r) T) / c; this order keeps
        // exactly representable answers exact
        tau2_star: t + ((d1 + 1.0) * tau1 - t) / c1,
        tau2_star2: t + ((d2 + r) * tau1 - r * t) / c2,
    }
}

/// Logarithms of the Floquet multipliers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Exponents {
    /// `ln λ5 = c1 (tau2 - tau2*)`: growth of `u` near `E0`.
    pub u_gain: f64,
    /// `ln λ6 = c2 (tau2 - tau2**)`: growth of `v` near `E0`.
    pub v_gain: f64,
    /// `ln λ2`: invasion of `(u*, 0)` by `v`.
    pub v_invades_u: f64,
    /// `ln λ4`: invasion of `(0, v*)` by `u`.
    pub u_invades_v: f64,
}

pub fn exponents(params: &ModelParameters, schedule: &Schedule) -> Exponents {
    let u_gain = scalar::log_gain(params, schedule, Species::U);
    let v_gain = scalar::log_gain(params, schedule, Species::V);
    Exponents {
        u_gain,
        v_gain,
        v_invades_u: v_gain - params.r * params.b2 * u_gain,
        u_invades_v: u_gain - params.b1 / params.r * v_gain,
    }
}

/// Floquet multipliers: `λ1, λ2` at `(x0, 0)`, `λ3, λ4` at `(0, y0)` and
/// `λ5, λ6` at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Multipliers {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub lambda4: f64,
    pub lambda5: f64,
    pub lambda6: f64,
}

pub fn multipliers(params: &ModelParameters, schedule: &Schedule) -> Multipliers {
    multipliers_from(&exponents(params, schedule))
}

fn multipliers_from(e: &Exponents) -> Multipliers {
    let lambda5 = e.u_gain.exp();
    let lambda6 = e.v_gain.exp();
    Multipliers {
        lambda1: 1.0 / lambda5,
        lambda2: e.v_invades_u.exp(),
        lambda3: 1.0 / lambda6,
        lambda4: e.u_invades_v.exp(),
        lambda5,
        lambda6,
    }
}

/// Region labels of the competition dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Region {
    /// Both species die out.
    #[serde(rename = "I_Collapse")]
    Collapse,
    /// `(u*, 0)` attracts every interior orbit.
    #[serde(rename = "II_UWins")]
    UWins,
    /// `(0, v*)` attracts every interior orbit.
    #[serde(rename = "III_VWins")]
    VWins,
    /// A positive periodic solution attracts every interior orbit.
    #[serde(rename = "IV_Coexist")]
    Coexist,
    /// `(u*, 0)` is linearly stable, `(0, v*)` is not; global dynamics open.
    #[serde(rename = "V_ULAS_Unresolved")]
    UStableUnresolved,
    /// `(0, v*)` is linearly stable, `(u*, 0)` is not; global dynamics open.
    #[serde(rename = "VI_VLAS_Unresolved")]
    VStableUnresolved,
    /// Both semi-trivial solutions are linearly stable.
    #[serde(rename = "VII_Bistable")]
    Bistable,
    /// A deciding exponent vanishes.
    #[serde(rename = "Boundary")]
    Boundary,
}

impl Region {
    pub const ALL: [Region; 8] = [
        Region::Collapse,
        Region::UWins,
        Region::VWins,
        Region::Coexist,
        Region::UStableUnresolved,
        Region::VStableUnresolved,
        Region::Bistable,
        Region::Boundary,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Region::Collapse => "I_Collapse",
            Region::UWins => "II_UWins",
            Region::VWins => "III_VWins",
            Region::Coexist => "IV_Coexist",
            Region::UStableUnresolved => "V_ULAS_Unresolved",
            Region::VStableUnresolved => "VI_VLAS_Unresolved",
            Region::Bistable => "VII_Bistable",
            Region::Boundary => "Boundary",
        }
    }

    /// Roman-numeral code 1..=7, and 8 for [`Region::Boundary`].
    pub fn code(self) -> u8 {
        match self {
            Region::Collapse => 1,
            Region::UWins => 2,
            Region::VWins => 3,
            Region::Coexist => 4,
            Region::UStableUnresolved => 5,
            Region::VStableUnresolved => 6,
            Region::Bistable => 7,
            Region::Boundary => 8,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeClassification {
    pub region: Region,
    pub thresholds: Thresholds,
    pub multipliers: Multipliers,
    pub notes: String,
}

/// Classifies the long-run dynamics from the signs of the exponents.
pub fn classify(params: &ModelParameters, schedule: &Schedule) -> RegimeClassification {
    let th = thresholds(params, schedule);
    let e = exponents(params, schedule);
    let u = scalar::scalar_classify(params, schedule, Species::U);
    let v = scalar::scalar_classify(params, schedule, Species::V);
    let (region, mut notes) = decide(params, &e, &u, &v);

    if schedule.tau2 <= th.tau2_star.max(th.tau2_star2) && condition_ratios(params, schedule).is_ok() {
        notes.push_str(" tau2 <= max(tau2*, tau2**): the ratio form of the invasion criteria does not apply.");
    }

    RegimeClassification { region, thresholds: th, multipliers: multipliers_from(&e), notes }
}

fn decide(params: &ModelParameters, e: &Exponents, u: &ScalarRegime, v: &ScalarRegime) -> (Region, String) {
    let zero = |x: f64| x.abs() <= EXPONENT_TOL;
    if zero(e.u_gain) || zero(e.v_gain) {
        let which = if zero(e.u_gain) { "tau2 = tau2* (u at its persistence threshold)" } else { "tau2 = tau2** (v at its persistence threshold)" };
        return (Region::Boundary, format!("{which}."));
    }
    match (u.persists(), v.persists()) {
        (false, false) => (
            Region::Collapse,
            "Neither species persists alone; the trivial solution E0 is GAS.".to_string(),
        ),
        (true, false) => (
            Region::UWins,
            "u persists and tau2 < tau2**: (u*, 0) is GAS in the open quadrant.".to_string(),
        ),
        (false, true) => (
            Region::VWins,
            "v persists and tau2 < tau2*: (0, v*) is GAS in the open quadrant.".to_string(),
        ),
        (true, true) => {
            if zero(e.v_invades_u) || zero(e.u_invades_v) {
                return (
                    Region::Boundary,
                    "An invasion exponent vanishes: a semi-trivial solution is neutrally stable.".to_string(),
                );
            }
            let u_stable = e.v_invades_u < 0.0;
            let v_stable = e.u_invades_v < 0.0;
            match (u_stable, v_stable) {
                (false, false) if params.b1 * params.b2 < 1.0 => (
                    Region::Coexist,
                    "Both semi-trivial solutions are unstable under weak competition: a unique positive periodic solution is GAS.".to_string(),
                ),
                (false, false) => (
                    // unreachable for b1 b2 >= 1; both invasion exponents positive forces b1 b2 < 1
                    Region::Boundary,
                    "Both semi-trivial solutions are unstable but b1 b2 >= 1.".to_string(),
                ),
                (true, true) => (
                    Region::Bistable,
                    "Both semi-trivial solutions are linearly stable: bistability.".to_string(),
                ),
                (true, false) => (
                    Region::UStableUnresolved,
                    "(u*, 0) is LAS and (0, v*) is unstable; global convergence is not established.".to_string(),
                ),
                (false, true) => (
                    Region::VStableUnresolved,
                    "(0, v*) is LAS and (u*, 0) is unstable; global convergence is not established.".to_string(),
                ),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StabilityError {
    #[error("tau2 equals tau2* ({tau2}); the invasion ratio is undefined")]
    UndefinedRatio { tau2: f64 },
}

/// Both sides and the middle term of the weak-competition window
/// `r b2 c1 / c2 < (tau2 - tau2**) / (tau2 - tau2*) < r c1 / (b1 c2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionRatios {
    pub lower: f64,
    pub ratio: f64,
    pub upper: f64,
}

pub fn condition_ratios(params: &ModelParameters, schedule: &Schedule) -> Result<ConditionRatios, StabilityError> {
    let th = thresholds(params, schedule);
    let tau2 = schedule.tau2;
    let gap = tau2 - th.tau2_star;
    if gap.abs() <= EXPONENT_TOL * tau2.abs().max(1.0) {
        return Err(StabilityError::UndefinedRatio { tau2 });
    }
    let ModelParameters { r, b1, b2, c1, c2, .. } = *params;
    Ok(ConditionRatios {
        lower: r * b2 * c1 / c2,
        ratio: (tau2 - th.tau2_star2) / gap,
        upper: r * c1 / (b1 * c2),
    })
}
