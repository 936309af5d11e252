//! Fixed-step RK4 integration of the replicator systems, basin estimation,
//! and vector-field sampling for phase portraits.

use rayon::prelude::*;
use serde::Serialize;

use crate::equilibria::{closed_states, steady_states_open, CaseLabel, SteadyState};
use crate::error::{check_unit, Error, Result};
use crate::model::{closed_field, field, State};
use crate::params::{ensure_closed_admissible, Admissible, ModelParams};

pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_T_MAX: f64 = 2000.0;
pub const MAX_STEPS: u64 = 10_000_000;
/// Sup-norm of the field below which a step counts towards convergence.
pub const REST_TOL: f64 = 1e-10;
/// Consecutive resting steps required to stop early.
pub const REST_STEPS: usize = 10;
/// Distance within which a terminal state is attributed to a steady state.
pub const ATTRIBUTION_RADIUS: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationSettings {
    pub t_max: f64,
    pub dt: f64,
    /// Record every `stride`-th step. The first and last states are always kept.
    pub stride: usize,
}

impl Default for IntegrationSettings {
    fn default() -> Self {
        IntegrationSettings {
            t_max: DEFAULT_T_MAX,
            dt: DEFAULT_DT,
            stride: 1,
        }
    }
}

impl IntegrationSettings {
    pub fn new(t_max: f64, dt: f64) -> Self {
        IntegrationSettings { t_max, dt, stride: 1 }
    }

    fn step_count(&self) -> Result<u64> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Domain { what: "dt", value: self.dt, range: "(0, inf)" });
        }
        if !(self.t_max > self.dt) || !self.t_max.is_finite() {
            return Err(Error::Domain { what: "t_max", value: self.t_max, range: "(dt, inf)" });
        }
        if self.stride == 0 {
            return Err(Error::Domain { what: "stride", value: 0.0, range: "[1, inf)" });
        }
        let steps = (self.t_max / self.dt - 1e-9).ceil();
        if steps > MAX_STEPS as f64 {
            return Err(Error::Budget { steps: steps as u64, cap: MAX_STEPS });
        }
        Ok(steps as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample<S> {
    pub t: f64,
    pub state: S,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory<S> {
    pub samples: Vec<Sample<S>>,
    pub terminal: S,
    pub converged_to: Option<SteadyState>,
    pub steps: u64,
    /// Largest correction applied by the clamp-after-step policy.
    pub max_clamp: f64,
}

/// A fixed-size state vector the integrator can advance.
trait Point: Copy {
    const DIM: usize;
    fn to_array(self) -> [f64; 2];
    fn from_array(a: [f64; 2]) -> Self;
    /// Position in the (p, q) plane, where steady states are located.
    fn locate(self) -> State;
}

impl Point for State {
    const DIM: usize = 2;
    fn to_array(self) -> [f64; 2] {
        [self.p, self.q]
    }
    fn from_array(a: [f64; 2]) -> Self {
        State::unchecked(a[0], a[1])
    }
    fn locate(self) -> State {
        self
    }
}

impl Point for f64 {
    const DIM: usize = 1;
    fn to_array(self) -> [f64; 2] {
        [self, 0.0]
    }
    fn from_array(a: [f64; 2]) -> Self {
        a[0]
    }
    fn locate(self) -> State {
        State::unchecked(0.0, self)
    }
}

fn rk4_step<F: Fn([f64; 2]) -> [f64; 2]>(f: &F, y: [f64; 2], dt: f64) -> [f64; 2] {
    let add = |a: [f64; 2], k: [f64; 2], h: f64| [a[0] + h * k[0], a[1] + h * k[1]];
    let k1 = f(y);
    let k2 = f(add(y, k1, 0.5 * dt));
    let k3 = f(add(y, k2, 0.5 * dt));
    let k4 = f(add(y, k3, dt));
    [
        y[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

fn sup_norm(v: [f64; 2]) -> f64 {
    v[0].abs().max(v[1].abs())
}

fn run<S, F>(rhs: F, initial: S, settings: &IntegrationSettings, states: &[SteadyState]) -> Result<Trajectory<S>>
where
    S: Point,
    F: Fn([f64; 2]) -> [f64; 2],
{
    let steps = settings.step_count()?;
    let mut y = initial.to_array();
    let mut samples = vec![Sample { t: 0.0, state: initial }];
    let mut resting = 0;
    let mut max_clamp: f64 = 0.0;
    let mut taken = 0;
    let mut converged = false;

    for k in 1..=steps {
        let next = rk4_step(&rhs, y, settings.dt);
        let mut clamped = next;
        for (i, c) in clamped.iter_mut().enumerate().take(S::DIM) {
            *c = c.clamp(0.0, 1.0);
            max_clamp = max_clamp.max((next[i] - *c).abs());
        }
        y = clamped;
        taken = k;

        if sup_norm(rhs(y)) < REST_TOL {
            resting += 1;
        } else {
            resting = 0;
        }
        converged = resting >= REST_STEPS;
        if k % settings.stride as u64 == 0 || k == steps || converged {
            samples.push(Sample { t: k as f64 * settings.dt, state: S::from_array(y) });
        }
        if converged {
            break;
        }
    }

    let terminal = S::from_array(y);
    let converged_to = if converged { nearest(states, terminal.locate()) } else { None };
    Ok(Trajectory {
        samples,
        terminal,
        converged_to,
        steps: taken,
        max_clamp,
    })
}

fn nearest(states: &[SteadyState], here: State) -> Option<SteadyState> {
    states
        .iter()
        .filter(|s| s.in_domain)
        .map(|s| (s.state.distance(&here), s))
        .filter(|(d, _)| *d <= ATTRIBUTION_RADIUS)
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, s)| s.clone())
}

/// Integrates the open system from `initial` and attributes the end state to
/// the nearest enumerated steady state.
pub fn integrate(params: &Admissible, initial: State, t_max: f64, dt: f64) -> Result<Trajectory<State>> {
    integrate_with(params, initial, &IntegrationSettings::new(t_max, dt))
}

pub fn integrate_with(
    params: &Admissible,
    initial: State,
    settings: &IntegrationSettings,
) -> Result<Trajectory<State>> {
    let states = steady_states_open(params)?;
    integrate_among(params, initial, settings, &states)
}

fn integrate_among(
    params: &Admissible,
    initial: State,
    settings: &IntegrationSettings,
    states: &[SteadyState],
) -> Result<Trajectory<State>> {
    let initial = State::new(initial.p, initial.q)?;
    let p = *params.params();
    run(
        move |y| {
            let (dp, dq) = field(&p, y[0], y[1]);
            [dp, dq]
        },
        initial,
        settings,
        states,
    )
}

pub fn integrate_closed(params: &ModelParams, q0: f64, t_max: f64, dt: f64) -> Result<Trajectory<f64>> {
    integrate_closed_with(params, q0, &IntegrationSettings::new(t_max, dt))
}

pub fn integrate_closed_with(params: &ModelParams, q0: f64, settings: &IntegrationSettings) -> Result<Trajectory<f64>> {
    ensure_closed_admissible(params)?;
    integrate_closed_ungated(params, q0, settings)
}

/// Closed integration without the admissibility gate, for forced runs.
pub(crate) fn integrate_closed_ungated(
    params: &ModelParams,
    q0: f64,
    settings: &IntegrationSettings,
) -> Result<Trajectory<f64>> {
    params.ensure_finite()?;
    check_unit("q0", q0)?;
    let states = closed_states(params);
    let p = *params;
    run(move |y| [closed_field(&p, y[0]), 0.0], q0, settings, &states)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BasinLabel {
    Undecided,
    #[serde(untagged)]
    Attractor(CaseLabel),
}

impl std::fmt::Display for BasinLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BasinLabel::Attractor(c) => write!(f, "{c}"),
            BasinLabel::Undecided => f.write_str("undecided"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasinCell {
    pub i: usize,
    pub j: usize,
    pub initial: State,
    pub label: BasinLabel,
    pub terminal: State,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasinShare {
    pub label: BasinLabel,
    pub state: Option<State>,
    pub cells: usize,
    /// Fraction of decided cells.
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasinMap {
    pub resolution: [usize; 2],
    pub cells: Vec<BasinCell>,
    pub shares: Vec<BasinShare>,
    pub undecided: usize,
}

impl BasinMap {
    pub fn cell(&self, i: usize, j: usize) -> &BasinCell {
        &self.cells[i * self.resolution[1] + j]
    }

    pub fn labels(&self) -> Vec<BasinLabel> {
        self.shares.iter().map(|s| s.label).collect()
    }
}

/// Integrates from every cell centre of a `resolution x resolution` grid over
/// the open square and records which steady state each start reaches.
///
/// Cells are ordered row-major by `(i, j)` with `p = (i + 0.5) / resolution`.
pub fn basins(params: &Admissible, resolution: usize, t_max: f64, dt: f64) -> Result<BasinMap> {
    if resolution == 0 {
        return Err(Error::Domain { what: "resolution", value: 0.0, range: "[1, inf)" });
    }
    let settings = IntegrationSettings { t_max, dt, stride: usize::MAX };
    settings.step_count()?;
    let states = steady_states_open(params)?;
    let centre = |k: usize| (k as f64 + 0.5) / resolution as f64;

    let cells: Vec<BasinCell> = (0..resolution * resolution)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / resolution, idx % resolution);
            let initial = State::unchecked(centre(i), centre(j));
            let traj = integrate_among(params, initial, &settings, &states)?;
            let label = match &traj.converged_to {
                Some(s) if s.is_stable() => BasinLabel::Attractor(s.case_label),
                _ => BasinLabel::Undecided,
            };
            Ok(BasinCell { i, j, initial, label, terminal: traj.terminal })
        })
        .collect::<Result<_>>()?;

    let undecided = cells.iter().filter(|c| c.label == BasinLabel::Undecided).count();
    let decided = cells.len() - undecided;
    let mut labels: Vec<BasinLabel> = cells
        .iter()
        .map(|c| c.label)
        .filter(|l| *l != BasinLabel::Undecided)
        .collect();
    labels.sort();
    labels.dedup();
    let shares = labels
        .into_iter()
        .map(|label| {
            let n = cells.iter().filter(|c| c.label == label).count();
            let state = states
                .iter()
                .find(|s| BasinLabel::Attractor(s.case_label) == label)
                .map(|s| s.state);
            BasinShare { label, state, cells: n, share: n as f64 / decided as f64 }
        })
        .collect();

    Ok(BasinMap {
        resolution: [resolution, resolution],
        cells,
        shares,
        undecided,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldPoint {
    pub state: State,
    pub rate_p: f64,
    pub rate_q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VectorFieldGrid {
    pub resolution: [usize; 2],
    pub points: Vec<FieldPoint>,
}

/// Node coordinates including both ends; a single node sits at the centre.
fn nodes(count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![0.5],
        n => (0..n).map(|k| k as f64 / (n - 1) as f64).collect(),
    }
}

pub fn vector_field(params: &ModelParams, resolution_p: usize, resolution_q: usize) -> Result<VectorFieldGrid> {
    if resolution_p == 0 || resolution_q == 0 {
        return Err(Error::Domain { what: "resolution", value: 0.0, range: "[1, inf)" });
    }
    let qs = nodes(resolution_q);
    let points = nodes(resolution_p)
        .into_iter()
        .flat_map(|p| qs.iter().map(move |&q| (p, q)))
        .map(|(p, q)| {
            let (rate_p, rate_q) = field(params, p, q);
            FieldPoint { state: State::unchecked(p, q), rate_p, rate_q }
        })
        .collect();
    Ok(VectorFieldGrid { resolution: [resolution_p, resolution_q], points })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFieldPoint {
    pub q: f64,
    pub rate: f64,
}

pub fn vector_field_closed(params: &ModelParams, resolution: usize) -> Result<Vec<ClosedFieldPoint>> {
    if resolution == 0 {
        return Err(Error::Domain { what: "resolution", value: 0.0, range: "[1, inf)" });
    }
    Ok(nodes(resolution)
        .into_iter()
        .map(|q| ClosedFieldPoint { q, rate: closed_field(params, q) })
        .collect())
}

/// Evaluates the open field at explicit points, e.g. for plotting along curves.
pub fn field_at(params: &ModelParams, points: &[State]) -> Result<Vec<FieldPoint>> {
    points
        .iter()
        .map(|s| {
            let s = State::new(s.p, s.q)?;
            let (rate_p, rate_q) = field(params, s.p, s.q);
            Ok(FieldPoint { state: s, rate_p, rate_q })
        })
        .collect()
}
