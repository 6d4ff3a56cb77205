//! Fixed-step integration of the two-species piecewise system.
//!
//! Within each phase the vector field is smooth and autonomous, and the
//! switching times are known in advance, so every phase is integrated with
//! classical RK4 on a uniform grid whose endpoints are the phase boundaries.
//! The same stepper carries the variational equations for monodromy matrices
//! and the quadrature accumulators used by the periodic-orbit identities.

use crate::format::sig17;
use crate::params::{ModelParameters, Schedule};
use serde::{Deserialize, Serialize};
use std::io::{self, Write};
use thiserror::Error;

/// Sup-norm tolerance between successive period-map returns.
pub const ORBIT_TOL: f64 = 1e-10;
/// Maximum number of period-map iterations in [`find_periodic_orbit`].
pub const ORBIT_MAX_ITER: usize = 100_000;
/// Components below this that are still shrinking are treated as extinct.
pub const EXTINCTION_TOL: f64 = 1e-8;

/// Population densities at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct State {
    pub u: f64,
    pub v: f64,
}

impl State {
    pub const ORIGIN: Self = Self { u: 0.0, v: 0.0 };

    pub fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub fn sup_dist(&self, other: &Self) -> f64 {
        (self.u - other.u).abs().max((self.v - other.v).abs())
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite()
    }
}

/// The three vector fields of a season.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Phase {
    Dry,
    Growth,
    Grazing,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::Dry, Phase::Growth, Phase::Grazing];

    /// 1-based phase index used in diagnostics.
    pub fn index(self) -> usize {
        match self {
            Phase::Dry => 1,
            Phase::Growth => 2,
            Phase::Grazing => 3,
        }
    }

    pub fn from_index(index: usize) -> Option<Self> {
        match index {
            1 => Some(Phase::Dry),
            2 => Some(Phase::Growth),
            3 => Some(Phase::Grazing),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError {
    #[error("non-finite state ({u}, {v}) in phase {phase} at t = {time}")]
    BlowUp { phase: usize, time: f64, u: f64, v: f64 },
    #[error("no convergence after {iterations} period-map iterations; last returns {previous:?} -> {last:?}")]
    NonConvergence { iterations: usize, previous: State, last: State },
    #[error("invalid integration request: {0}")]
    InvalidInput(String),
}

pub fn vector_field(params: &ModelParameters, phase: Phase, s: State) -> State {
    let State { u, v } = s;
    match phase {
        Phase::Dry => State::new(-params.d1 * u, -params.d2 * v),
        Phase::Growth => State::new(
            u * (1.0 - u - params.b1 * v),
            params.r * v * (1.0 - v - params.b2 * u),
        ),
        Phase::Grazing => State::new(
            u * (1.0 - u - params.b1 * v) - params.c1 * u,
            params.r * v * (1.0 - v - params.b2 * u) - params.c2 * v,
        ),
    }
}

/// Jacobian of [`vector_field`], row major.
pub fn jacobian(params: &ModelParameters, phase: Phase, s: State) -> [[f64; 2]; 2] {
    let State { u, v } = s;
    let ModelParameters { d1, d2, r, b1, b2, c1, c2 } = *params;
    match phase {
        Phase::Dry => [[-d1, 0.0], [0.0, -d2]],
        Phase::Growth => [
            [1.0 - 2.0 * u - b1 * v, -b1 * u],
            [-r * b2 * v, r * (1.0 - 2.0 * v - b2 * u)],
        ],
        Phase::Grazing => [
            [1.0 - 2.0 * u - b1 * v - c1, -b1 * u],
            [-r * b2 * v, r * (1.0 - 2.0 * v - b2 * u) - c2],
        ],
    }
}

fn rk4<const N: usize>(f: &impl Fn(&[f64; N]) -> [f64; N], y: &mut [f64; N], h: f64) {
    let k1 = f(y);
    let mut tmp = [0.0; N];
    for i in 0..N {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    let k2 = f(&tmp);
    for i in 0..N {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    let k3 = f(&tmp);
    for i in 0..N {
        tmp[i] = y[i] + h * k3[i];
    }
    let k4 = f(&tmp);
    for i in 0..N {
        y[i] += h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
    }
}

/// Per-phase step counts: `max(min_steps, ceil(duration / (T / divisions)))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepPolicy {
    pub divisions: usize,
    pub min_steps: usize,
}

impl Default for StepPolicy {
    fn default() -> Self {
        Self { divisions: 4096, min_steps: 64 }
    }
}

impl StepPolicy {
    pub fn steps_for(&self, duration: f64, period: f64) -> usize {
        if duration <= 0.0 {
            return 0;
        }
        let h0 = period / self.divisions as f64;
        let n = (duration / h0).ceil() as usize;
        n.max(self.min_steps)
    }

    /// Policy with every step halved.
    pub fn refined(&self) -> Self {
        Self { divisions: self.divisions * 2, min_steps: self.min_steps * 2 }
    }
}

/// Integrates one phase with steps no longer than `max_step`. The actual step
/// is `duration / ceil(duration / max_step)` so the endpoint is hit exactly.
pub fn step_phase(
    state: State,
    params: &ModelParameters,
    phase: Phase,
    duration: f64,
    max_step: f64,
) -> Result<State, IntegrationError> {
    if !(duration >= 0.0) || !(max_step > 0.0) {
        return Err(IntegrationError::InvalidInput(format!(
            "duration {duration} and step {max_step} must be non-negative and positive"
        )));
    }
    let steps = (duration / max_step).ceil() as usize;
    let mut y = [state.u, state.v];
    integrate_phase(params, phase, &mut y, duration, steps, 0.0, |_, _| {})?;
    Ok(State::new(y[0], y[1]))
}

fn integrate_phase(
    params: &ModelParameters,
    phase: Phase,
    y: &mut [f64; 2],
    duration: f64,
    steps: usize,
    t0: f64,
    mut observe: impl FnMut(usize, &[f64; 2]),
) -> Result<(), IntegrationError> {
    if steps == 0 {
        return Ok(());
    }
    let h = duration / steps as f64;
    let f = |s: &[f64; 2]| {
        let d = vector_field(params, phase, State::new(s[0], s[1]));
        [d.u, d.v]
    };
    for k in 1..=steps {
        rk4(&f, y, h);
        if !(y[0].is_finite() && y[1].is_finite()) {
            return Err(IntegrationError::BlowUp {
                phase: phase.index(),
                time: t0 + k as f64 * h,
                u: y[0],
                v: y[1],
            });
        }
        observe(k, y);
    }
    Ok(())
}

/// Jacobian of the period map at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Monodromy {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

/// Eigenvalues of a real 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spectrum {
    /// Ordered by decreasing value.
    Real(f64, f64),
    ComplexPair { re: f64, im: f64 },
}

impl Spectrum {
    pub fn spectral_radius(&self) -> f64 {
        match *self {
            Spectrum::Real(a, b) => a.abs().max(b.abs()),
            Spectrum::ComplexPair { re, im } => re.hypot(im),
        }
    }

    pub fn real(&self) -> Option<(f64, f64)> {
        match *self {
            Spectrum::Real(a, b) => Some((a, b)),
            Spectrum::ComplexPair { .. } => None,
        }
    }
}

impl Monodromy {
    pub const IDENTITY: Self = Self { m11: 1.0, m12: 0.0, m21: 0.0, m22: 1.0 };

    pub fn trace(&self) -> f64 {
        self.m11 + self.m22
    }

    pub fn determinant(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn eigenvalues(&self) -> Spectrum {
        let tr = self.trace();
        let det = self.determinant();
        let half = 0.5 * (self.m11 - self.m22);
        let disc = half * half + self.m12 * self.m21;
        if disc < 0.0 {
            return Spectrum::ComplexPair { re: 0.5 * tr, im: (-disc).sqrt() };
        }
        // larger-magnitude root first, the other from the determinant
        let big = 0.5 * tr + tr.signum() * disc.sqrt();
        if big == 0.0 {
            return Spectrum::Real(0.0, 0.0);
        }
        let small = det / big;
        if big >= small {
            Spectrum::Real(big, small)
        } else {
            Spectrum::Real(small, big)
        }
    }
}

/// Samples of a solution over whole periods.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<(f64, State)>,
    pub schedule: Schedule,
    pub periods: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> State {
        self.samples.last().map(|s| s.1).unwrap_or_default()
    }

    /// States at `t = nT`, `n = 0..=periods`.
    pub fn period_returns(&self) -> Vec<State> {
        let mut out = Vec::with_capacity(self.periods + 1);
        let mut n = 0usize;
        for &(t, s) in &self.samples {
            if t == n as f64 * self.schedule.period {
                out.push(s);
                n += 1;
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,u,v")?;
        for (t, s) in &self.samples {
            writeln!(out, "{},{},{}", sig17(*t), sig17(s.u), sig17(s.v))?;
        }
        Ok(())
    }
}

/// The periodic system with a fixed step policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeasonalSystem {
    pub params: ModelParameters,
    pub schedule: Schedule,
    pub policy: StepPolicy,
}

impl SeasonalSystem {
    pub fn new(params: ModelParameters, schedule: Schedule) -> Self {
        Self { params, schedule, policy: StepPolicy::default() }
    }

    pub fn with_policy(mut self, policy: StepPolicy) -> Self {
        self.policy = policy;
        self
    }

    fn phase_plan(&self) -> [(Phase, f64, f64, usize); 3] {
        let s = &self.schedule;
        let starts = [0.0, s.tau1, s.tau2];
        let durations = s.durations();
        let mut plan = [(Phase::Dry, 0.0, 0.0, 0); 3];
        for (i, phase) in Phase::ALL.into_iter().enumerate() {
            let n = self.policy.steps_for(durations[i], s.period);
            plan[i] = (phase, starts[i], durations[i], n);
        }
        plan
    }

    /// One application of the period map.
    pub fn period_map(&self, state: State) -> Result<State, IntegrationError> {
        let mut y = [state.u, state.v];
        for (phase, start, duration, steps) in self.phase_plan() {
            integrate_phase(&self.params, phase, &mut y, duration, steps, start, |_, _| {})?;
        }
        Ok(State::new(y[0], y[1]))
    }

    /// Integrates `periods` whole periods from `start`, keeping every
    /// `stride`-th step plus every phase boundary.
    pub fn simulate(&self, start: State, periods: usize, stride: usize) -> Result<Trajectory, IntegrationError> {
        let stride = stride.max(1);
        let period = self.schedule.period;
        let plan = self.phase_plan();
        let boundaries = [self.schedule.tau1, self.schedule.tau2, period];
        let mut samples = vec![(0.0, start)];
        let mut y = [start.u, start.v];
        for n in 0..periods {
            let offset = n as f64 * period;
            for (i, &(phase, start_t, duration, steps)) in plan.iter().enumerate() {
                let t0 = offset + start_t;
                let h = if steps > 0 { duration / steps as f64 } else { 0.0 };
                let end = if i == 2 { (n + 1) as f64 * period } else { offset + boundaries[i] };
                integrate_phase(&self.params, phase, &mut y, duration, steps, t0, |k, y| {
                    if k == steps {
                        samples.push((end, State::new(y[0], y[1])));
                    } else if k % stride == 0 {
                        samples.push((t0 + k as f64 * h, State::new(y[0], y[1])));
                    }
                })?;
            }
        }
        Ok(Trajectory { samples, schedule: self.schedule, periods })
    }

    /// Period-map Jacobian from the variational equations `V' = Df(U) V`,
    /// `V(0) = I`, carried continuously across the phase switches.
    pub fn monodromy(&self, omega: State) -> Result<Monodromy, IntegrationError> {
        let mut y = [omega.u, omega.v, 1.0, 0.0, 0.0, 1.0];
        for (phase, start, duration, steps) in self.phase_plan() {
            if steps == 0 {
                continue;
            }
            let params = &self.params;
            let f = |z: &[f64; 6]| {
                let s = State::new(z[0], z[1]);
                let d = vector_field(params, phase, s);
                let j = jacobian(params, phase, s);
                [
                    d.u,
                    d.v,
                    j[0][0] * z[2] + j[0][1] * z[4],
                    j[0][0] * z[3] + j[0][1] * z[5],
                    j[1][0] * z[2] + j[1][1] * z[4],
                    j[1][0] * z[3] + j[1][1] * z[5],
                ]
            };
            let h = duration / steps as f64;
            for k in 1..=steps {
                rk4(&f, &mut y, h);
                if y.iter().any(|x| !x.is_finite()) {
                    return Err(IntegrationError::BlowUp {
                        phase: phase.index(),
                        time: start + k as f64 * h,
                        u: y[0],
                        v: y[1],
                    });
                }
            }
        }
        Ok(Monodromy { m11: y[2], m12: y[3], m21: y[4], m22: y[5] })
    }

    /// Integrals over the growth and grazing phases of `u + b1 v` and of
    /// `r (v + b2 u)` along the solution from `omega`.
    pub fn orbit_integrals(&self, omega: State) -> Result<(f64, f64), IntegrationError> {
        let mut y = [omega.u, omega.v, 0.0, 0.0];
        let ModelParameters { r, b1, b2, .. } = self.params;
        for (phase, start, duration, steps) in self.phase_plan() {
            if steps == 0 {
                continue;
            }
            let params = &self.params;
            let accumulate = if phase == Phase::Dry { 0.0 } else { 1.0 };
            let f = |z: &[f64; 4]| {
                let d = vector_field(params, phase, State::new(z[0], z[1]));
                [
                    d.u,
                    d.v,
                    accumulate * (z[0] + b1 * z[1]),
                    accumulate * r * (z[1] + b2 * z[0]),
                ]
            };
            let h = duration / steps as f64;
            for k in 1..=steps {
                rk4(&f, &mut y, h);
                if y.iter().any(|x| !x.is_finite()) {
                    return Err(IntegrationError::BlowUp {
                        phase: phase.index(),
                        time: start + k as f64 * h,
                        u: y[0],
                        v: y[1],
                    });
                }
            }
        }
        Ok((y[2], y[3]))
    }

    /// Iterates the period map until two returns agree to [`ORBIT_TOL`].
    ///
    /// A component that is below [`EXTINCTION_TOL`] and still shrinking is
    /// set to zero; the axes are invariant so iteration then continues on the
    /// boundary. Returns `None` when both components die out.
    pub fn find_periodic_orbit(&self, start: State) -> Result<Option<PeriodicOrbit>, IntegrationError> {
        self.find_periodic_orbit_capped(start, ORBIT_MAX_ITER)
    }

    pub fn find_periodic_orbit_capped(
        &self,
        start: State,
        max_iter: usize,
    ) -> Result<Option<PeriodicOrbit>, IntegrationError> {
        if !(start.u >= 0.0 && start.v >= 0.0 && start.is_finite()) {
            return Err(IntegrationError::InvalidInput(format!(
                "start ({}, {}) must be non-negative",
                start.u, start.v
            )));
        }
        let mut current = start;
        for k in 1..=max_iter {
            let mut next = self.period_map(current)?;
            let u_dying = next.u < EXTINCTION_TOL && next.u < current.u;
            let v_dying = next.v < EXTINCTION_TOL && next.v < current.v;
            if (u_dying || next.u == 0.0) && (v_dying || next.v == 0.0) {
                return Ok(None);
            }
            if u_dying {
                next.u = 0.0;
            }
            if v_dying {
                next.v = 0.0;
            }
            if next.sup_dist(&current) < ORBIT_TOL {
                let trajectory = self.simulate(next, 1, 1)?;
                return Ok(Some(PeriodicOrbit { fixed_point: next, trajectory, iterations: k }));
            }
            current = next;
        }
        let last = self.period_map(current)?;
        Err(IntegrationError::NonConvergence { iterations: max_iter, previous: current, last })
    }
}

/// A fixed point of the period map with one period of the orbit through it.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbit {
    pub fixed_point: State,
    pub trajectory: Trajectory,
    pub iterations: usize,
}

impl PeriodicOrbit {
    pub fn is_interior(&self) -> bool {
        self.fixed_point.u > 0.0 && self.fixed_point.v > 0.0
    }
}

pub fn period_map_2d(state: State, params: &ModelParameters, schedule: &Schedule) -> Result<State, IntegrationError> {
    SeasonalSystem::new(*params, *schedule).period_map(state)
}

pub fn find_periodic_orbit(
    params: &ModelParameters,
    schedule: &Schedule,
    start: State,
) -> Result<Option<PeriodicOrbit>, IntegrationError> {
    SeasonalSystem::new(*params, *schedule).find_periodic_orbit(start)
}

pub fn monodromy_at(omega: State, params: &ModelParameters, schedule: &Schedule) -> Result<Monodromy, IntegrationError> {
    SeasonalSystem::new(*params, *schedule).monodromy(omega)
}
