//! Region maps over the `tau1`-`tau2` plane (or the `c1`-`c2` plane).
//!
//! Cells are classified at their centres with the closed-form classifier, in
//! parallel, and collected in index order so the grid never depends on
//! scheduling. All region boundaries are straight lines in either plane
//! because the deciding exponents are affine in `(tau1, tau2)` and in
//! `(c1, c2)`.

use crate::integrator::{IntegrationError, SeasonalSystem, State};
use crate::params::{validate, ModelParameters, Schedule, Species};
use crate::scalar::{self, ScalarLabel};
use crate::stability::{self, Region};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Tau1,
    Tau2,
    C1,
    C2,
}

/// What each cell reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepTarget {
    /// Full two-species classification.
    #[default]
    Competition,
    /// One species in isolation: `I_Collapse` where it dies out, and
    /// `II_UWins` / `III_VWins` where it settles on its periodic solution.
    U,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub axis1: Axis,
    pub axis2: Axis,
    pub range1: [f64; 2],
    pub range2: [f64; 2],
    pub n1: usize,
    pub n2: usize,
}

impl GridSpec {
    /// `n x n` grid over `[0, T]^2` in the schedule plane.
    pub fn schedule_plane(period: f64, n: usize) -> Self {
        Self {
            axis1: Axis::Tau1,
            axis2: Axis::Tau2,
            range1: [0.0, period],
            range2: [0.0, period],
            n1: n,
            n2: n,
        }
    }

    pub fn width1(&self) -> f64 {
        (self.range1[1] - self.range1[0]) / self.n1 as f64
    }

    pub fn width2(&self) -> f64 {
        (self.range2[1] - self.range2[0]) / self.n2 as f64
    }

    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.range1[0] + (i as f64 + 0.5) * self.width1(),
            self.range2[0] + (j as f64 + 0.5) * self.width2(),
        )
    }

    pub fn cell_diagonal(&self) -> f64 {
        self.width1().hypot(self.width2())
    }

    fn plane(&self) -> Result<Plane, SweepError> {
        match (self.axis1, self.axis2) {
            (Axis::Tau1, Axis::Tau2) => Ok(Plane::Schedule),
            (Axis::C1, Axis::C2) => Ok(Plane::Grazing),
            (a, b) => Err(SweepError::UnsupportedAxes(a, b)),
        }
    }

    fn check(&self) -> Result<Plane, SweepError> {
        if self.n1 < 2 || self.n2 < 2 {
            return Err(SweepError::InvalidSpec(format!("grid must be at least 2x2, got {}x{}", self.n1, self.n2)));
        }
        for r in [self.range1, self.range2] {
            if !(r[0].is_finite() && r[1].is_finite() && r[1] > r[0]) {
                return Err(SweepError::InvalidSpec(format!("range [{}, {}] is empty or not finite", r[0], r[1])));
            }
        }
        self.plane()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Plane {
    Schedule,
    Grazing,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("unsupported axis pair ({0:?}, {1:?}); use (tau1, tau2) or (c1, c2)")]
    UnsupportedAxes(Axis, Axis),
    #[error("invalid grid: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CellLabel {
    Region(Region),
    /// The cell centre violates `0 <= tau1 <= tau2 <= T`.
    InvalidSchedule,
    /// The cell centre violates a parameter invariant.
    InvalidParameters,
}

impl CellLabel {
    /// Integer code written to the grid CSV.
    pub fn code(self) -> u8 {
        match self {
            CellLabel::Region(r) => r.code(),
            CellLabel::InvalidSchedule => 0,
            CellLabel::InvalidParameters => 9,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CellLabel::Region(r) => r.label(),
            CellLabel::InvalidSchedule => "InvalidSchedule",
            CellLabel::InvalidParameters => "InvalidParameters",
        }
    }

    pub fn all() -> Vec<CellLabel> {
        let mut out = vec![CellLabel::InvalidSchedule];
        out.extend(Region::ALL.iter().map(|&r| CellLabel::Region(r)));
        out.push(CellLabel::InvalidParameters);
        out
    }
}

/// `a x + b y + c` over the two swept coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffineForm {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl AffineForm {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.a * x + self.b * y + self.c
    }

    fn combine(&self, other: &Self, k: f64) -> Self {
        Self { a: self.a + k * other.a, b: self.b + k * other.b, c: self.c + k * other.c }
    }

    /// Euclidean distance from `(x, y)` to the zero set.
    pub fn distance(&self, x: f64, y: f64) -> f64 {
        let norm = self.a.hypot(self.b);
        if norm == 0.0 {
            f64::INFINITY
        } else {
            self.eval(x, y).abs() / norm
        }
    }
}

/// A straight line `a x + b y + c = 0` and its samples inside the grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryLine {
    pub name: String,
    pub form: AffineForm,
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionGrid {
    pub spec: GridSpec,
    /// Row-major by `axis2` index: cell `(i, j)` is at `j * n1 + i`.
    pub cells: Vec<CellLabel>,
    pub boundary_curves: Vec<BoundaryLine>,
}

impl RegionGrid {
    pub fn get(&self, i: usize, j: usize) -> CellLabel {
        self.cells[j * self.spec.n1 + i]
    }

    pub fn counts(&self) -> BTreeMap<&'static str, usize> {
        let mut out = BTreeMap::new();
        for c in &self.cells {
            *out.entry(c.name()).or_insert(0) += 1;
        }
        out
    }

    pub fn contains(&self, region: Region) -> bool {
        self.cells.contains(&CellLabel::Region(region))
    }

    /// Pairs of horizontally or vertically adjacent cells with different
    /// labels, as `((i, j), (i', j'))`.
    pub fn label_changes(&self) -> Vec<((usize, usize), (usize, usize))> {
        let (n1, n2) = (self.spec.n1, self.spec.n2);
        let mut out = Vec::new();
        for j in 0..n2 {
            for i in 0..n1 {
                if i + 1 < n1 && self.get(i, j) != self.get(i + 1, j) {
                    out.push(((i, j), (i + 1, j)));
                }
                if j + 1 < n2 && self.get(i, j) != self.get(i, j + 1) {
                    out.push(((i, j), (i, j + 1)));
                }
            }
        }
        out
    }

    /// CSV matrix of region codes: one row per `axis2` index, lowest first.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.cells.len() * 2);
        for j in 0..self.spec.n2 {
            let row: Vec<String> = (0..self.spec.n1).map(|i| self.get(i, j).code().to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// JSON sidecar describing the CSV: codes, grid geometry, boundary lines.
    pub fn sidecar(&self, params: &ModelParameters, schedule: &Schedule) -> serde_json::Value {
        let codes: BTreeMap<String, &'static str> =
            CellLabel::all().into_iter().map(|c| (c.code().to_string(), c.name())).collect();
        serde_json::json!({
            "codes": codes,
            "spec": self.spec,
            "layout": "row j holds axis2 cell centre j (ascending); column i holds axis1 cell centre i (ascending)",
            "parameters": params,
            "schedule": schedule,
            "counts": self.counts(),
            "boundary_curves": self.boundary_curves,
        })
    }
}

/// The deciding exponents as affine forms over the swept plane.
fn exponent_forms(params: &ModelParameters, schedule: &Schedule, plane: Plane) -> [(&'static str, AffineForm); 4] {
    let ModelParameters { d1, d2, r, b1, b2, c1, c2 } = *params;
    let Schedule { tau1, tau2, period: t } = *schedule;
    let (gu, gv) = match plane {
        Plane::Schedule => (
            AffineForm { a: -(1.0 + d1), b: c1, c: (1.0 - c1) * t },
            AffineForm { a: -(r + d2), b: c2, c: (r - c2) * t },
        ),
        Plane::Grazing => (
            AffineForm { a: -(t - tau2), b: 0.0, c: t - (1.0 + d1) * tau1 },
            AffineForm { a: 0.0, b: -(t - tau2), c: r * t - (r + d2) * tau1 },
        ),
    };
    [
        ("tau2_star", gu),
        ("tau2_star2", gv),
        ("lambda2_unit", gv.combine(&gu, -r * b2)),
        ("lambda4_unit", gu.combine(&gv, -b1 / r)),
    ]
}

fn admissibility_forms(schedule: &Schedule, plane: Plane) -> Vec<(&'static str, AffineForm)> {
    match plane {
        Plane::Schedule => vec![
            ("tau2_eq_tau1", AffineForm { a: -1.0, b: 1.0, c: 0.0 }),
            ("tau2_eq_T", AffineForm { a: 0.0, b: 1.0, c: -schedule.period }),
            ("tau1_eq_0", AffineForm { a: 1.0, b: 0.0, c: 0.0 }),
        ],
        Plane::Grazing => vec![
            ("c1_eq_0", AffineForm { a: 1.0, b: 0.0, c: 0.0 }),
            ("c2_eq_0", AffineForm { a: 0.0, b: 1.0, c: 0.0 }),
        ],
    }
}

/// Samples the zero set of `form` inside the rectangle, `samples + 1` points
/// along whichever coordinate the line is steeper against.
fn sample_line(form: &AffineForm, range1: [f64; 2], range2: [f64; 2], samples: usize) -> Vec<[f64; 2]> {
    let inside = |lo: f64, hi: f64, z: f64| z >= lo - 1e-12 * (hi - lo) && z <= hi + 1e-12 * (hi - lo);
    let mut out = Vec::new();
    if form.a == 0.0 && form.b == 0.0 {
        return out;
    }
    let n = samples.max(1);
    if form.b.abs() >= form.a.abs() {
        for k in 0..=n {
            let x = range1[0] + (range1[1] - range1[0]) * k as f64 / n as f64;
            let y = -(form.a * x + form.c) / form.b;
            if inside(range2[0], range2[1], y) {
                out.push([x, y]);
            }
        }
    } else {
        for k in 0..=n {
            let y = range2[0] + (range2[1] - range2[0]) * k as f64 / n as f64;
            let x = -(form.b * y + form.c) / form.a;
            if inside(range1[0], range1[1], x) {
                out.push([x, y]);
            }
        }
    }
    out
}

/// Analytic region boundaries in the `tau1`-`tau2` plane: `tau2*(tau1)`,
/// `tau2**(tau1)` and the loci `λ2 = 1`, `λ4 = 1`, sampled over `tau1_range`
/// with `tau2` restricted to `[0, T]`.
pub fn boundary_lines(
    params: &ModelParameters,
    schedule: &Schedule,
    tau1_range: [f64; 2],
    samples: usize,
) -> Vec<BoundaryLine> {
    exponent_forms(params, schedule, Plane::Schedule)
        .into_iter()
        .map(|(name, form)| BoundaryLine {
            name: name.to_string(),
            form,
            points: sample_line(&form, tau1_range, [0.0, schedule.period], samples),
        })
        .collect()
}

/// Every line across which a cell label may change, for the grid's plane.
pub fn analytic_lines(params: &ModelParameters, schedule: &Schedule, spec: &GridSpec) -> Result<Vec<BoundaryLine>, SweepError> {
    let plane = spec.check()?;
    let samples = spec.n1.max(spec.n2);
    let mut forms: Vec<(&'static str, AffineForm)> = exponent_forms(params, schedule, plane).to_vec();
    forms.extend(admissibility_forms(schedule, plane));
    Ok(forms
        .into_iter()
        .map(|(name, form)| BoundaryLine {
            name: name.to_string(),
            form,
            points: sample_line(&form, spec.range1, spec.range2, samples),
        })
        .collect())
}

fn cell_inputs(params: &ModelParameters, schedule: &Schedule, plane: Plane, x: f64, y: f64) -> (ModelParameters, Schedule) {
    match plane {
        Plane::Schedule => (*params, Schedule { tau1: x, tau2: y, ..*schedule }),
        Plane::Grazing => (ModelParameters { c1: x, c2: y, ..*params }, *schedule),
    }
}

fn label_cell(params: &ModelParameters, schedule: &Schedule, target: SweepTarget) -> CellLabel {
    let report = validate(params, schedule);
    if !report.is_valid() {
        let schedule_only = report
            .violations
            .iter()
            .all(|v| v.starts_with("tau") || v.starts_with("T "));
        return if schedule_only { CellLabel::InvalidSchedule } else { CellLabel::InvalidParameters };
    }
    let species = match target {
        SweepTarget::Competition => return CellLabel::Region(stability::classify(params, schedule).region),
        SweepTarget::U => Species::U,
        SweepTarget::V => Species::V,
    };
    let regime = scalar::scalar_classify(params, schedule, species);
    let region = match (regime.label, regime.degenerate) {
        (_, true) => Region::Boundary,
        (ScalarLabel::Extinct, false) => Region::Collapse,
        (ScalarLabel::PersistentPeriodic, false) if species == Species::U => Region::UWins,
        (ScalarLabel::PersistentPeriodic, false) => Region::VWins,
    };
    CellLabel::Region(region)
}

/// Classifies every cell of `spec` with the two swept values overriding
/// `params`/`schedule`.
pub fn sweep_regions(params: &ModelParameters, schedule: &Schedule, spec: &GridSpec) -> Result<RegionGrid, SweepError> {
    sweep_regions_for(params, schedule, spec, SweepTarget::Competition)
}

pub fn sweep_regions_for(
    params: &ModelParameters,
    schedule: &Schedule,
    spec: &GridSpec,
    target: SweepTarget,
) -> Result<RegionGrid, SweepError> {
    let plane = spec.check()?;
    let (n1, n2) = (spec.n1, spec.n2);
    let cells: Vec<CellLabel> = (0..n1 * n2)
        .into_par_iter()
        .map(|k| {
            let (x, y) = spec.center(k % n1, k / n1);
            let (p, s) = cell_inputs(params, schedule, plane, x, y);
            label_cell(&p, &s, target)
        })
        .collect();
    let mut grid = RegionGrid { spec: *spec, cells, boundary_curves: Vec::new() };
    let lines = match target {
        SweepTarget::Competition => analytic_lines(params, schedule, spec)?,
        SweepTarget::U | SweepTarget::V => {
            let keep = if target == SweepTarget::U { "tau2_star" } else { "tau2_star2" };
            analytic_lines(params, schedule, spec)?
                .into_iter()
                .filter(|l| l.name == keep || !l.name.starts_with("tau2_star") && !l.name.starts_with("lambda"))
                .collect()
        }
    };
    grid.boundary_curves = lines
        .into_iter()
        .map(|mut line| {
            line.points.retain(|pt| near_label_change(&grid, pt[0], pt[1]));
            line
        })
        .filter(|line| !line.points.is_empty())
        .collect();
    Ok(grid)
}

// true when the cell containing (x, y) or one of its 8 neighbours carries a
// different label from another cell in that 3x3 block
fn near_label_change(grid: &RegionGrid, x: f64, y: f64) -> bool {
    let spec = &grid.spec;
    let fi = ((x - spec.range1[0]) / spec.width1()).floor();
    let fj = ((y - spec.range2[0]) / spec.width2()).floor();
    let i = (fi.max(0.0) as usize).min(spec.n1 - 1);
    let j = (fj.max(0.0) as usize).min(spec.n2 - 1);
    let first = grid.get(i, j);
    for dj in -1i64..=1 {
        for di in -1i64..=1 {
            let (ii, jj) = (i as i64 + di, j as i64 + dj);
            if ii < 0 || jj < 0 || ii >= spec.n1 as i64 || jj >= spec.n2 as i64 {
                continue;
            }
            if grid.get(ii as usize, jj as usize) != first {
                return true;
            }
        }
    }
    false
}

/// Result of simulating one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRecord {
    pub i: usize,
    pub j: usize,
    pub label: &'static str,
    /// `extinct`, `u_only`, `v_only`, `interior`, `unconverged` or `error`.
    pub outcome: &'static str,
    /// `None` when the label makes no global prediction.
    pub consistent: Option<bool>,
}

/// Period-map iteration budget per audited cell.
pub const AUDIT_MAX_ITER: usize = 5_000;

/// Simulates `k` evenly spaced classified cells from `(0.5, 0.5)` and
/// compares the attractor with the label.
pub fn audit(grid: &RegionGrid, params: &ModelParameters, schedule: &Schedule, k: usize) -> Result<Vec<AuditRecord>, SweepError> {
    let plane = grid.spec.check()?;
    let candidates: Vec<usize> = grid
        .cells
        .iter()
        .enumerate()
        .filter(|(_, c)| matches!(c, CellLabel::Region(_)))
        .map(|(idx, _)| idx)
        .collect();
    if k == 0 || candidates.is_empty() {
        return Ok(Vec::new());
    }
    let picks: Vec<usize> = (0..k.min(candidates.len()))
        .map(|m| candidates[m * candidates.len() / k.min(candidates.len())])
        .collect();
    let n1 = grid.spec.n1;
    Ok(picks
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx % n1, idx / n1);
            let (x, y) = grid.spec.center(i, j);
            let (p, s) = cell_inputs(params, schedule, plane, x, y);
            let label = grid.cells[idx];
            let outcome = match SeasonalSystem::new(p, s).find_periodic_orbit_capped(State::new(0.5, 0.5), AUDIT_MAX_ITER) {
                Ok(None) => "extinct",
                Ok(Some(orbit)) => match (orbit.fixed_point.u > 0.0, orbit.fixed_point.v > 0.0) {
                    (true, true) => "interior",
                    (true, false) => "u_only",
                    (false, true) => "v_only",
                    (false, false) => "extinct",
                },
                Err(IntegrationError::NonConvergence { .. }) => "unconverged",
                Err(_) => "error",
            };
            let expected = match label {
                CellLabel::Region(Region::Collapse) => Some("extinct"),
                CellLabel::Region(Region::UWins) => Some("u_only"),
                CellLabel::Region(Region::VWins) => Some("v_only"),
                CellLabel::Region(Region::Coexist) => Some("interior"),
                _ => None,
            };
            let consistent = match (expected, outcome) {
                (_, "unconverged") => None,
                (Some(e), o) => Some(e == o),
                (None, _) => None,
            };
            AuditRecord { i, j, label: label.name(), outcome, consistent }
        })
        .collect())
}
