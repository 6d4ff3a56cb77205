//! Raw and nondimensional parameter sets for the seasonal competition model,
//! the rescaling between them, and validation.
//!
//! The dimensional model uses rates `r1, r2`, capacities `K1, K2`, raw
//! competition coefficients, dry-season mortalities and grazing intensities
//! `q1E1, q2E2`. Rescaling uses `u -> u/K1`, `v -> v/K2`, `t -> r1 t`, which
//! turns every rate into a multiple of `r1` and every phase time into `r1 tau`.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Which of the two competing species a scalar quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Species {
    U,
    V,
}

impl fmt::Display for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Species::U => f.write_str("u"),
            Species::V => f.write_str("v"),
        }
    }
}

/// Dimensional parameters as they appear before rescaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParameters {
    pub r1: f64,
    pub r2: f64,
    #[serde(rename = "K1")]
    pub k1: f64,
    #[serde(rename = "K2")]
    pub k2: f64,
    pub b1_raw: f64,
    pub b2_raw: f64,
    pub d1_raw: f64,
    pub d2_raw: f64,
    #[serde(rename = "q1E1")]
    pub q1e1: f64,
    #[serde(rename = "q2E2")]
    pub q2e2: f64,
    pub tau1_raw: f64,
    pub tau2_raw: f64,
    #[serde(rename = "T_raw")]
    pub period_raw: f64,
}

/// Nondimensional rates of the rescaled three-phase system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParameters {
    /// Dry-season decay rate of `u`.
    pub d1: f64,
    /// Dry-season decay rate of `v`.
    pub d2: f64,
    /// Growth-rate ratio `r2 / r1`.
    pub r: f64,
    /// Effect of `v` on `u`.
    pub b1: f64,
    /// Effect of `u` on `v`.
    pub b2: f64,
    /// Grazing intensity on `u`.
    pub c1: f64,
    /// Grazing intensity on `v`.
    pub c2: f64,
}

/// Phase boundaries of one season: dry on `[0, tau1]`, ungrazed growth on
/// `(tau1, tau2]`, grazed growth on `(tau2, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub tau1: f64,
    pub tau2: f64,
    #[serde(rename = "T")]
    pub period: f64,
}

impl Schedule {
    pub fn new(tau1: f64, tau2: f64, period: f64) -> Self {
        Self { tau1, tau2, period }
    }

    pub fn dry_length(&self) -> f64 {
        self.tau1
    }

    pub fn growth_length(&self) -> f64 {
        self.tau2 - self.tau1
    }

    pub fn grazing_length(&self) -> f64 {
        self.period - self.tau2
    }

    /// Durations of the three phases in order.
    pub fn durations(&self) -> [f64; 3] {
        [self.dry_length(), self.growth_length(), self.grazing_length()]
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("invalid raw parameters: {}", .0.join("; "))]
    InvalidRaw(Vec<String>),
}

/// Maps dimensional parameters onto the nondimensional system.
///
/// `c2` is `q2E2 / r1`, the reading consistent with grazing entering the `v`
/// equation as `-c2 v` on the rescaled clock.
pub fn rescale(raw: &RawParameters) -> Result<(ModelParameters, Schedule), ParamError> {
    let problems = raw_violations(raw);
    if !problems.is_empty() {
        return Err(ParamError::InvalidRaw(problems));
    }
    let params = ModelParameters {
        d1: raw.d1_raw / raw.r1,
        d2: raw.d2_raw / raw.r1,
        r: raw.r2 / raw.r1,
        b1: raw.b1_raw * raw.k2,
        b2: raw.b2_raw * raw.k1,
        c1: raw.q1e1 / raw.r1,
        c2: raw.q2e2 / raw.r1,
    };
    let schedule = Schedule {
        tau1: raw.r1 * raw.tau1_raw,
        tau2: raw.r1 * raw.tau2_raw,
        period: raw.r1 * raw.period_raw,
    };
    Ok((params, schedule))
}

/// Inverse of [`rescale`] given the reference scales `r1, K1, K2` that the
/// nondimensional set forgets.
pub fn unrescale(
    params: &ModelParameters,
    schedule: &Schedule,
    r1: f64,
    k1: f64,
    k2: f64,
) -> RawParameters {
    RawParameters {
        r1,
        r2: params.r * r1,
        k1,
        k2,
        b1_raw: params.b1 / k2,
        b2_raw: params.b2 / k1,
        d1_raw: params.d1 * r1,
        d2_raw: params.d2 * r1,
        q1e1: params.c1 * r1,
        q2e2: params.c2 * r1,
        tau1_raw: schedule.tau1 / r1,
        tau2_raw: schedule.tau2 / r1,
        period_raw: schedule.period / r1,
    }
}

fn raw_violations(raw: &RawParameters) -> Vec<String> {
    let mut out = Vec::new();
    let positive = [
        ("r1", raw.r1),
        ("r2", raw.r2),
        ("K1", raw.k1),
        ("K2", raw.k2),
        ("d1_raw", raw.d1_raw),
        ("d2_raw", raw.d2_raw),
        ("q1E1", raw.q1e1),
        ("q2E2", raw.q2e2),
        ("T_raw", raw.period_raw),
    ];
    for (name, value) in positive {
        if !(value > 0.0 && value.is_finite()) {
            out.push(format!("{name} > 0 required"));
        }
    }
    for (name, value) in [("b1_raw", raw.b1_raw), ("b2_raw", raw.b2_raw)] {
        if !(value >= 0.0 && value.is_finite()) {
            out.push(format!("{name} ≥ 0 required"));
        }
    }
    if !(raw.tau1_raw >= 0.0) {
        out.push("tau1_raw ≥ 0 required".to_string());
    }
    if !(raw.tau2_raw >= raw.tau1_raw) {
        out.push("tau2_raw ≥ tau1_raw required".to_string());
    }
    if !(raw.period_raw >= raw.tau2_raw) {
        out.push("T_raw ≥ tau2_raw required".to_string());
    }
    out
}

/// Outcome of [`validate`]: hard violations and soft warnings.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    /// True when no invariant is violated. Warnings do not count.
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty() && self.warnings.is_empty()
    }
}

pub fn validate(params: &ModelParameters, schedule: &Schedule) -> ValidationReport {
    let mut report = ValidationReport::default();
    let positive = [
        ("d1", params.d1),
        ("d2", params.d2),
        ("r", params.r),
        ("c1", params.c1),
        ("c2", params.c2),
    ];
    for (name, value) in positive {
        if !(value > 0.0 && value.is_finite()) {
            report.violations.push(format!("{name} > 0 required"));
        }
    }
    // zero competition is the decoupled case
    for (name, value) in [("b1", params.b1), ("b2", params.b2)] {
        if !(value >= 0.0 && value.is_finite()) {
            report.violations.push(format!("{name} ≥ 0 required"));
        }
    }

    let Schedule { tau1, tau2, period } = *schedule;
    if !(period > 0.0 && period.is_finite()) {
        report.violations.push("T > 0 required".to_string());
    }
    if !(tau1 >= 0.0 && tau1.is_finite()) {
        report.violations.push("tau1 ≥ 0 required".to_string());
    }
    if !(tau2 >= tau1) {
        report.violations.push("tau2 ≥ tau1 required".to_string());
    }
    if !(period >= tau2) {
        report.violations.push("T ≥ tau2 required".to_string());
    }
    if report.violations.is_empty() {
        if tau1 == tau2 {
            report.warnings.push("ungrazed growth phase empty".to_string());
        }
        if tau2 == period {
            report.warnings.push("grazing phase empty".to_string());
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coexist_case() -> (ModelParameters, Schedule) {
        (
            ModelParameters { d1: 0.5, d2: 0.1, r: 1.0, b1: 0.2, b2: 0.2, c1: 0.6, c2: 0.6 },
            Schedule::new(4.0, 7.0, 10.0),
        )
    }

    fn unit_raw() -> RawParameters {
        RawParameters {
            r1: 1.0,
            r2: 1.3,
            k1: 1.0,
            k2: 1.0,
            b1_raw: 0.2,
            b2_raw: 0.4,
            d1_raw: 0.5,
            d2_raw: 0.1,
            q1e1: 0.6,
            q2e2: 0.7,
            tau1_raw: 4.0,
            tau2_raw: 7.0,
            period_raw: 10.0,
        }
    }

    #[test]
    fn identity_rescaling() {
        let raw = unit_raw();
        let (p, s) = rescale(&raw).unwrap();
        assert_eq!(
            p,
            ModelParameters { d1: 0.5, d2: 0.1, r: 1.3, b1: 0.2, b2: 0.4, c1: 0.6, c2: 0.7 }
        );
        assert_eq!(s, Schedule::new(4.0, 7.0, 10.0));
    }

    #[test]
    fn time_rescaling() {
        let raw = RawParameters { r1: 2.0, tau1_raw: 3.0, tau2_raw: 4.0, d1_raw: 0.5, ..unit_raw() };
        let (p, s) = rescale(&raw).unwrap();
        assert_eq!(s.tau1, 6.0);
        assert_eq!(p.d1, 0.25);
        assert_eq!(s.period, 20.0);
    }

    #[test]
    fn hand_substituted_raw_set() {
        // r1=0.5, r2=0.75, K1=2, K2=4, b1=0.05, b2=0.1, d1=0.2, d2=0.1,
        // q1E1=0.3, q2E2=0.4, tau=(2,3,5) substituted by hand:
        // r=1.5, b1=0.2, b2=0.2, d1=0.4, d2=0.2, c1=0.6, c2=0.8, tau=(1,1.5,2.5)
        let raw = RawParameters {
            r1: 0.5,
            r2: 0.75,
            k1: 2.0,
            k2: 4.0,
            b1_raw: 0.05,
            b2_raw: 0.1,
            d1_raw: 0.2,
            d2_raw: 0.1,
            q1e1: 0.3,
            q2e2: 0.4,
            tau1_raw: 2.0,
            tau2_raw: 3.0,
            period_raw: 5.0,
        };
        let (p, s) = rescale(&raw).unwrap();
        let expect = [1.5, 0.2, 0.2, 0.4, 0.2, 0.6, 0.8];
        let got = [p.r, p.b1, p.b2, p.d1, p.d2, p.c1, p.c2];
        for (g, e) in got.iter().zip(expect) {
            assert!((g - e).abs() < 1e-15, "{got:?}");
        }
        assert_eq!((s.tau1, s.tau2, s.period), (1.0, 1.5, 2.5));

        let back = unrescale(&p, &s, raw.r1, raw.k1, raw.k2);
        assert!((back.b1_raw - raw.b1_raw).abs() < 1e-15);
        assert!((back.q2e2 - raw.q2e2).abs() < 1e-15);
        assert!((back.period_raw - raw.period_raw).abs() < 1e-15);
    }

    #[test]
    fn rescale_rejects_bad_raw() {
        let raw = RawParameters { r1: 0.0, tau2_raw: 3.0, ..unit_raw() };
        let err = rescale(&raw).unwrap_err();
        let ParamError::InvalidRaw(list) = err;
        assert!(list.iter().any(|m| m.contains("r1")));
        assert!(list.iter().any(|m| m.contains("tau2_raw")));
    }

    #[test]
    fn reference_set_is_clean() {
        let (p, s) = coexist_case();
        assert!(validate(&p, &s).is_empty());
    }

    #[test]
    fn schedule_ordering_violation() {
        let (p, _) = coexist_case();
        let report = validate(&p, &Schedule::new(5.0, 4.0, 10.0));
        assert_eq!(report.violations, vec!["tau2 ≥ tau1 required".to_string()]);
    }

    #[test]
    fn degenerate_schedules_warn() {
        let (p, _) = coexist_case();
        let report = validate(&p, &Schedule::new(4.0, 10.0, 10.0));
        assert!(report.is_valid());
        assert_eq!(report.warnings, vec!["grazing phase empty".to_string()]);
        let report = validate(&p, &Schedule::new(4.0, 4.0, 10.0));
        assert_eq!(report.warnings, vec!["ungrazed growth phase empty".to_string()]);
    }

    #[test]
    fn decoupled_competition_allowed() {
        let (mut p, s) = coexist_case();
        p.b1 = 0.0;
        p.b2 = 0.0;
        assert!(validate(&p, &s).is_valid());
    }

    #[test]
    fn json_field_names() {
        let (p, s) = coexist_case();
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("\"T\""));
        let back: ModelParameters = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
        let err = serde_json::from_str::<Schedule>(r#"{"tau1":1,"tau2":2,"T":3,"tau3":4}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("tau3"));
    }
}
