//! Generic PDMP engine.
//!
//! A process is described by its [`LocalCharacteristics`]: a flow, a jump
//! rate along the flow, a transition kernel and the boundary hitting time of
//! the state space. Inter-jump times are drawn by inverting the cumulative
//! hazard `Λ(x, t) = ∫₀ᵗ λ(φ(x, s)) ds` (closed form when registered,
//! quadrature plus Brent otherwise) or by thinning against a rate bound.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;


#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{finite, PdmpError, Result};
use crate::interval::IntervalSet;
use crate::numerics::{bisect_flip, brent, integrate, rk4_solve, rk4_step};
use crate::rng::RandomStream;

/// Flat real state. Discrete modes ride along as a trailing integer-valued
/// coordinate.
pub type State = Vec<f64>;

pub type StateFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type ClosedFlowFn = Box<dyn Fn(&[f64], f64) -> State + Send + Sync>;
pub type VectorFieldFn = Box<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;
pub type TransitionFn = Box<dyn Fn(&[f64], &mut RandomStream) -> State + Send + Sync>;
pub type TransitionMeasureFn = Box<dyn Fn(&[f64], &IntervalSet) -> f64 + Send + Sync>;
pub type HazardFn = Box<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

pub const DEFAULT_ODE_STEP: f64 = 1e-3;
pub const DEFAULT_MAX_JUMPS: usize = 10_000_000;
pub const DEFAULT_INVERSION_LIMIT: f64 = 1e6;
const HAZARD_TOL: f64 = 1e-10;
const INVERSION_TOL: f64 = 1e-13;
const BOUNDARY_TOL: f64 = 1e-10;
const MAX_THINNING_PROPOSALS: usize = 10_000_000;

pub enum Flow {
    /// `φ(x, t)` in closed form.
    Closed(ClosedFlowFn),
    /// `φ` defined by `dx/dt = rhs(x)`, integrated with fixed-step RK4.
    Ode { rhs: VectorFieldFn, step: f64 },
}

impl Flow {
    pub fn closed(f: impl Fn(&[f64], f64) -> State + Send + Sync + 'static) -> Self {
        Flow::Closed(Box::new(f))
    }

    pub fn ode(rhs: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        Flow::Ode {
            rhs: Box::new(rhs),
            step: DEFAULT_ODE_STEP,
        }
    }
}

pub enum Boundary {
    /// The flow never leaves the state space: `t* ≡ ∞`.
    Never,
    /// `t*(x)` in closed form.
    Exact(StateFn),
    /// State space `M = {x : level(x) > 0}`. The exit time is located by
    /// scanning the flow in steps of `scan_step` up to `scan_limit`, then
    /// bisecting; no sign change within the limit means `t* = ∞`.
    Level {
        level: StateFn,
        scan_step: f64,
        scan_limit: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum JumpSampler {
    /// Registered hazard inversion if present, numeric inversion otherwise.
    #[default]
    Auto,
    /// Quadrature of `Λ` plus root finding, even if a closed form exists.
    Numeric,
    /// Poisson thinning against `rate_bound`.
    Thinning,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    Init,
    Jump,
    BoundaryJump,
    Horizon,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Init => "init",
            EventKind::Jump => "jump",
            EventKind::BoundaryJump => "boundary_jump",
            EventKind::Horizon => "horizon",
        }
    }
}

/// Result of one inter-jump draw.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterJump {
    /// Time to the next jump, `+∞` when the process never jumps again.
    pub time: f64,
    pub hit_boundary: bool,
}

/// Next event found within a time limit.
#[derive(Clone, Debug)]
pub(crate) struct NextEvent {
    pub time: f64,
    pub boundary: bool,
    pub pre_jump: State,
}

pub struct LocalCharacteristics {
    dim: usize,
    flow: Flow,
    jump_rate: StateFn,
    transition: TransitionFn,
    transition_measure: Option<TransitionMeasureFn>,
    boundary: Boundary,
    rate_bound: Option<f64>,
    hazard: Option<HazardFn>,
    hazard_inverse: Option<HazardFn>,
    state_guard: Option<Box<dyn Fn(&[f64]) -> bool + Send + Sync>>,
    sampler: JumpSampler,
    max_jumps: usize,
    inversion_limit: f64,
}

impl LocalCharacteristics {
    /// `dim` counts every coordinate of the flat state, mode included.
    pub fn new(
        dim: usize,
        flow: Flow,
        jump_rate: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        transition: impl Fn(&[f64], &mut RandomStream) -> State + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            flow,
            jump_rate: Box::new(jump_rate),
            transition: Box::new(transition),
            transition_measure: None,
            boundary: Boundary::Never,
            rate_bound: None,
            hazard: None,
            hazard_inverse: None,
            state_guard: None,
            sampler: JumpSampler::Auto,
            max_jumps: DEFAULT_MAX_JUMPS,
            inversion_limit: DEFAULT_INVERSION_LIMIT,
        }
    }

    /// Characteristics whose kernel is `Q(x, ·) = δ_{map(x)}`; registers
    /// both the sampler and the measure `Q(x, A) = 1_A(map(x))` (1-D).
    pub fn with_deterministic_jump(
        dim: usize,
        flow: Flow,
        jump_rate: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        map: impl Fn(&[f64]) -> State + Send + Sync + Clone + 'static,
    ) -> Self {
        let sampler_map = map.clone();
        Self::new(dim, flow, jump_rate, move |x, _| sampler_map(x)).transition_measure(
            move |x, set| {
                if set.contains(map(x)[0]) {
                    1.0
                } else {
                    0.0
                }
            },
        )
    }

    pub fn boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn rate_bound(mut self, bound: f64) -> Self {
        self.rate_bound = Some(bound);
        self
    }

    pub fn hazard(mut self, f: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static) -> Self {
        self.hazard = Some(Box::new(f));
        self
    }

    /// Registers `t = Λ⁻¹(x, e)`: the time at which the cumulative hazard
    /// from `x` reaches `e` (`+∞` if it never does).
    pub fn hazard_inverse(
        mut self,
        f: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.hazard_inverse = Some(Box::new(f));
        self
    }

    pub fn transition_measure(
        mut self,
        f: impl Fn(&[f64], &IntervalSet) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.transition_measure = Some(Box::new(f));
        self
    }

    /// Predicate every simulated state must satisfy; violations abort the
    /// simulation with [`PdmpError::LeftInvariantSet`].
    pub fn state_guard(mut self, f: impl Fn(&[f64]) -> bool + Send + Sync + 'static) -> Self {
        self.state_guard = Some(Box::new(f));
        self
    }

    pub fn sampler(mut self, sampler: JumpSampler) -> Self {
        self.sampler = sampler;
        self
    }

    pub fn max_jumps(mut self, cap: usize) -> Self {
        self.max_jumps = cap;
        self
    }

    /// Horizon beyond which numeric inversion and thinning report "no jump".
    pub fn inversion_limit(mut self, limit: f64) -> Self {
        self.inversion_limit = limit;
        self
    }

    pub fn ode_step(mut self, h: f64) -> Self {
        if let Flow::Ode { step, .. } = &mut self.flow {
            *step = h;
        }
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get_rate_bound(&self) -> Option<f64> {
        self.rate_bound
    }

    pub fn has_closed_form_flow(&self) -> bool {
        matches!(self.flow, Flow::Closed(_))
    }

    pub fn jump_rate(&self, x: &[f64]) -> f64 {
        (self.jump_rate)(x)
    }

    pub fn sample_transition(&self, x: &[f64], stream: &mut RandomStream) -> State {
        (self.transition)(x, stream)
    }

    /// `Q(x, set)` when a transition measure is registered.
    pub fn transition_mass(&self, x: &[f64], set: &IntervalSet) -> Result<f64> {
        if set.is_full() {
            return Ok(1.0);
        }
        match &self.transition_measure {
            Some(q) => Ok(q(x, set)),
            None => Err(PdmpError::MissingTransitionMeasure),
        }
    }

    fn check_state(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(PdmpError::Dimension {
                expected: self.dim,
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(PdmpError::NonFinite("state"));
        }
        Ok(())
    }

    fn check_time(t: f64) -> Result<f64> {
        finite(t, "time")?;
        if t < 0.0 {
            return Err(PdmpError::NegativeTime(t));
        }
        Ok(t)
    }

    pub(crate) fn flow_unchecked(&self, x: &[f64], t: f64) -> State {
        match &self.flow {
            Flow::Closed(f) => f(x, t),
            Flow::Ode { rhs, step } => rk4_solve(rhs, x, t, *step),
        }
    }

    /// `φ(x, t)`, defined for `0 ≤ t ≤ t*(x)`.
    pub fn flow_at(&self, x: &[f64], t: f64) -> Result<State> {
        self.check_state(x)?;
        Self::check_time(t)?;
        let tb = self.boundary_time(x);
        if t > tb + BOUNDARY_TOL {
            return Err(PdmpError::BeyondBoundary { t, boundary: tb });
        }
        Ok(self.flow_unchecked(x, t))
    }

    /// `t*(x) = inf{t > 0 : φ(x, t) ∈ ∂M}`, `+∞` when the flow stays in `M`.
    pub fn boundary_time(&self, x: &[f64]) -> f64 {
        match &self.boundary {
            Boundary::Never => f64::INFINITY,
            Boundary::Exact(f) => f(x),
            Boundary::Level {
                level,
                scan_step,
                scan_limit,
            } => self.scan_boundary(x, level, *scan_step, *scan_limit),
        }
    }

    fn scan_boundary(&self, x: &[f64], level: &StateFn, step: f64, limit: f64) -> f64 {
        let outside = |y: &[f64]| level(y) <= 0.0;
        let mut t = 0.0;
        let mut y = x.to_vec();
        while t < limit {
            let dt = step.min(limit - t);
            let next = self.flow_unchecked(&y, dt);
            if outside(&next) {
                let base = y.clone();
                let offset = t;
                let s = bisect_flip(
                    |s| outside(&self.flow_unchecked(&base, s)),
                    0.0,
                    dt,
                    BOUNDARY_TOL * 0.1,
                );
                return offset + s;
            }
            t += dt;
            y = match self.flow {
                // recompute from x so closed-form flows do not accumulate drift
                Flow::Closed(_) => self.flow_unchecked(x, t),
                Flow::Ode { .. } => next,
            };
        }
        f64::INFINITY
    }

    /// `Λ(x, t) = ∫₀ᵗ λ(φ(x, s)) ds` for `0 ≤ t ≤ t*(x)`.
    pub fn cumulative_hazard(&self, x: &[f64], t: f64) -> Result<f64> {
        self.check_state(x)?;
        Self::check_time(t)?;
        let tb = self.boundary_time(x);
        if t > tb + BOUNDARY_TOL {
            return Err(PdmpError::BeyondBoundary { t, boundary: tb });
        }
        if let Some(h) = &self.hazard {
            return Ok(h(x, t));
        }
        self.hazard_numeric(x, 0.0, t)
    }

    /// Numeric `Λ(x, b) − Λ(x, a)`.
    fn hazard_numeric(&self, x: &[f64], a: f64, b: f64) -> Result<f64> {
        match &self.flow {
            Flow::Closed(f) => integrate(|s| (self.jump_rate)(&f(x, s)), a, b, HAZARD_TOL),
            Flow::Ode { .. } => {
                let start = self.flow_unchecked(x, a);
                let (_, lam) = self.ode_with_hazard(&start, b - a);
                Ok(lam)
            }
        }
    }

    fn augmented_rhs<'a>(&'a self) -> impl Fn(&[f64], &mut [f64]) + 'a {
        let n = self.dim;
        move |z: &[f64], dz: &mut [f64]| {
            if let Flow::Ode { rhs, .. } = &self.flow {
                rhs(&z[..n], &mut dz[..n]);
            }
            dz[n] = (self.jump_rate)(&z[..n]);
        }
    }

    /// Integrates the flow together with the hazard over `[0, t]`.
    fn ode_with_hazard(&self, x: &[f64], t: f64) -> (State, f64) {
        let step = match &self.flow {
            Flow::Ode { step, .. } => *step,
            Flow::Closed(_) => DEFAULT_ODE_STEP,
        };
        let mut z = x.to_vec();
        z.push(0.0);
        let out = rk4_solve(&self.augmented_rhs(), &z, t, step);
        let lam = out[self.dim];
        (out[..self.dim].to_vec(), lam)
    }

    /// Draws the time to the next jump from `x`.
    pub fn sample_inter_jump(&self, x: &[f64], stream: &mut RandomStream) -> Result<InterJump> {
        self.check_state(x)?;
        let ev = self.next_event(x, f64::INFINITY, stream)?;
        Ok(match ev {
            Some(e) => InterJump {
                time: e.time,
                hit_boundary: e.boundary,
            },
            None => InterJump {
                time: f64::INFINITY,
                hit_boundary: false,
            },
        })
    }

    /// Inverts `Λ(x, t) = −ln u` for a given uniform `u ∈ (0, 1)`.
    /// Thinning is not an inversion method, so it is ignored here.
    pub fn inter_jump_from_uniform(&self, x: &[f64], u: f64) -> Result<InterJump> {
        self.check_state(x)?;
        if !(u > 0.0 && u < 1.0) {
            return Err(PdmpError::invalid("uniform draw must lie in (0, 1)"));
        }
        let target = -u.ln();
        let numeric = self.sampler == JumpSampler::Numeric;
        let ev = self.invert(x, target, f64::INFINITY, numeric)?;
        Ok(match ev {
            Some(e) => InterJump {
                time: e.time,
                hit_boundary: e.boundary,
            },
            None => InterJump {
                time: f64::INFINITY,
                hit_boundary: false,
            },
        })
    }

    /// Next jump within `limit` of now, or `None` if nothing happens by then.
    pub(crate) fn next_event(
        &self,
        x: &[f64],
        limit: f64,
        stream: &mut RandomStream,
    ) -> Result<Option<NextEvent>> {
        match self.sampler {
            JumpSampler::Thinning => self.thin(x, limit, stream),
            JumpSampler::Auto => self.invert(x, stream.exp1(), limit, false),
            JumpSampler::Numeric => self.invert(x, stream.exp1(), limit, true),
        }
    }

    fn boundary_event(&self, x: &[f64], tb: f64) -> NextEvent {
        NextEvent {
            time: tb,
            boundary: true,
            pre_jump: self.flow_unchecked(x, tb),
        }
    }

    fn invert(
        &self,
        x: &[f64],
        target: f64,
        limit: f64,
        force_numeric: bool,
    ) -> Result<Option<NextEvent>> {
        let tb = self.boundary_time(x);
        if let (Some(inv), false) = (&self.hazard_inverse, force_numeric) {
            let t = inv(x, target);
            if tb.is_finite() && t >= tb {
                return Ok((tb <= limit).then(|| self.boundary_event(x, tb)));
            }
            if t > limit || !t.is_finite() {
                return Ok(None);
            }
            return Ok(Some(NextEvent {
                time: t,
                boundary: false,
                pre_jump: self.flow_unchecked(x, t),
            }));
        }
        let cap = limit.min(self.inversion_limit);
        let upper = cap.min(tb);
        match &self.flow {
            Flow::Closed(_) => self.invert_quadrature(x, target, upper),
            Flow::Ode { .. } => self.invert_ode(x, target, upper),
        }
        .map(|found| {
            found.or_else(|| (tb <= cap).then(|| self.boundary_event(x, tb)))
        })
    }

    /// Brackets the root of `Λ(x, t) = target` on doubling segments, then
    /// refines it with Brent. `None` if `Λ(x, upper) < target`.
    fn invert_quadrature(&self, x: &[f64], target: f64, upper: f64) -> Result<Option<NextEvent>> {
        let mut a = 0.0;
        let mut lam_a = 0.0;
        while a < upper {
            let b = if a == 0.0 { upper.min(1.0) } else { upper.min(2.0 * a) };
            let seg = self.hazard_numeric(x, a, b)?;
            if lam_a + seg >= target {
                let g = |t: f64| match self.hazard_numeric(x, a, t) {
                    Ok(v) => lam_a + v - target,
                    Err(_) => f64::NAN,
                };
                let t = brent(g, a, b, INVERSION_TOL * b.max(1.0))?;
                return Ok(Some(NextEvent {
                    time: t,
                    boundary: false,
                    pre_jump: self.flow_unchecked(x, t),
                }));
            }
            lam_a += seg;
            a = b;
        }
        Ok(None)
    }

    /// RK4 on the flow augmented with the hazard; the crossing step is
    /// refined by root finding on a partial step.
    fn invert_ode(&self, x: &[f64], target: f64, upper: f64) -> Result<Option<NextEvent>> {
        let h = match &self.flow {
            Flow::Ode { step, .. } => *step,
            Flow::Closed(_) => DEFAULT_ODE_STEP,
        };
        let rhs = self.augmented_rhs();
        let n = self.dim;
        let mut z = x.to_vec();
        z.push(0.0);
        let mut next = vec![0.0; n + 1];
        let mut t = 0.0;
        while t < upper {
            let dt = h.min(upper - t);
            rk4_step(&rhs, &z, dt, &mut next);
            if next[n] >= target {
                let mut probe = vec![0.0; n + 1];
                let tau = brent(
                    |s| {
                        rk4_step(&rhs, &z, s, &mut probe);
                        probe[n] - target
                    },
                    0.0,
                    dt,
                    INVERSION_TOL * (t + dt).max(1.0),
                )?;
                rk4_step(&rhs, &z, tau, &mut probe);
                return Ok(Some(NextEvent {
                    time: t + tau,
                    boundary: false,
                    pre_jump: probe[..n].to_vec(),
                }));
            }
            core::mem::swap(&mut z, &mut next);
            t += dt;
        }
        Ok(None)
    }

    fn thin(&self, x: &[f64], limit: f64, stream: &mut RandomStream) -> Result<Option<NextEvent>> {
        let bound = self.rate_bound.ok_or(PdmpError::MissingRateBound)?;
        let tb = self.boundary_time(x);
        let cap = if limit.is_finite() {
            limit
        } else {
            self.inversion_limit
        };
        let mut t = 0.0;
        let mut y = x.to_vec();
        for _ in 0..MAX_THINNING_PROPOSALS {
            let dt = stream.exponential(bound);
            let proposal = t + dt;
            if proposal >= tb {
                return Ok((tb <= cap).then(|| self.boundary_event(x, tb)));
            }
            if proposal > cap {
                return Ok(None);
            }
            y = match self.flow {
                Flow::Closed(_) => self.flow_unchecked(x, proposal),
                Flow::Ode { .. } => self.flow_unchecked(&y, dt),
            };
            t = proposal;
            let rate = (self.jump_rate)(&y);
            if rate > bound * (1.0 + 1e-9) {
                return Err(PdmpError::RateBoundViolated { rate, bound });
            }
            if stream.uniform() * bound <= rate {
                return Ok(Some(NextEvent {
                    time: t,
                    boundary: false,
                    pre_jump: y,
                }));
            }
        }
        Err(PdmpError::ThinningStalled(MAX_THINNING_PROPOSALS))
    }

    fn guard(&self, x: &[f64], time: f64) -> Result<()> {
        match &self.state_guard {
            Some(g) if !g(x) => Err(PdmpError::LeftInvariantSet { time }),
            _ => Ok(()),
        }
    }

    /// Simulates one path on `[0, horizon]`.
    pub fn simulate(
        &self,
        x0: &[f64],
        horizon: f64,
        stream: &mut RandomStream,
    ) -> Result<Trajectory<'_>> {
        self.check_state(x0)?;
        finite(horizon, "horizon")?;
        if horizon <= 0.0 {
            return Err(PdmpError::invalid("horizon must be positive"));
        }
        let mut traj = Trajectory::empty(self, x0.to_vec(), horizon);
        self.run(&mut traj, horizon, usize::MAX, stream)?;
        Ok(traj)
    }

    /// Simulates until `n_jumps` jumps have occurred; the horizon is set to
    /// the last jump time. Stops early if the process stops jumping within
    /// the inversion limit.
    pub fn simulate_jumps(
        &self,
        x0: &[f64],
        n_jumps: usize,
        stream: &mut RandomStream,
    ) -> Result<Trajectory<'_>> {
        self.check_state(x0)?;
        let mut traj = Trajectory::empty(self, x0.to_vec(), f64::INFINITY);
        self.run(&mut traj, f64::INFINITY, n_jumps, stream)?;
        traj.horizon = match traj.jump_times.last() {
            Some(&t) if traj.jump_times.len() == n_jumps => t,
            Some(&t) => t + self.inversion_limit,
            None => self.inversion_limit,
        };
        Ok(traj)
    }

    fn run(
        &self,
        traj: &mut Trajectory<'_>,
        horizon: f64,
        n_jumps: usize,
        stream: &mut RandomStream,
    ) -> Result<()> {
        self.guard(&traj.initial_state, 0.0)?;
        let mut x = traj.initial_state.clone();
        let mut now = 0.0;
        while traj.jump_times.len() < n_jumps {
            let Some(ev) = self.next_event(&x, horizon - now, stream)? else {
                break;
            };
            let t = now + ev.time;
            if t > horizon {
                break;
            }
            self.guard(&ev.pre_jump, t)?;
            let z = (self.transition)(&ev.pre_jump, stream);
            if z == ev.pre_jump {
                return Err(PdmpError::DegenerateJump { time: t });
            }
            self.guard(&z, t)?;
            if traj.jump_times.len() >= self.max_jumps {
                return Err(PdmpError::Explosion {
                    cap: self.max_jumps,
                });
            }
            traj.jump_times.push(t);
            traj.holding_times.push(ev.time);
            traj.kinds.push(if ev.boundary {
                EventKind::BoundaryJump
            } else {
                EventKind::Jump
            });
            traj.post_jump_states.push(z.clone());
            x = z;
            now = t;
        }
        Ok(())
    }
}

/// A simulated path: jump times `T_k`, post-jump states `Z_k`, and the
/// characteristics needed to rebuild `X(t)` between jumps.
pub struct Trajectory<'c> {
    chars: &'c LocalCharacteristics,
    initial_state: State,
    jump_times: Vec<f64>,
    holding_times: Vec<f64>,
    post_jump_states: Vec<State>,
    kinds: Vec<EventKind>,
    horizon: f64,
}

impl<'c> Trajectory<'c> {
    fn empty(chars: &'c LocalCharacteristics, x0: State, horizon: f64) -> Self {
        Self {
            chars,
            initial_state: x0,
            jump_times: Vec::new(),
            holding_times: Vec::new(),
            post_jump_states: Vec::new(),
            kinds: Vec::new(),
            horizon,
        }
    }

    /// Builds a trajectory from recorded data, e.g. read back from disk.
    pub fn from_parts(
        chars: &'c LocalCharacteristics,
        initial_state: State,
        jump_times: Vec<f64>,
        post_jump_states: Vec<State>,
        horizon: f64,
    ) -> Result<Self> {
        if jump_times.len() != post_jump_states.len() {
            return Err(PdmpError::invalid("jump times and states differ in length"));
        }
        let increasing = jump_times.windows(2).all(|w| w[0] < w[1]);
        if !increasing || jump_times.iter().any(|&t| t <= 0.0 || t > horizon) {
            return Err(PdmpError::invalid("jump times must be increasing in (0, horizon]"));
        }
        let kinds = vec![EventKind::Jump; jump_times.len()];
        let holding_times = jump_times
            .iter()
            .scan(0.0, |prev, &t| {
                let s = t - *prev;
                *prev = t;
                Some(s)
            })
            .collect();
        Ok(Self {
            chars,
            initial_state,
            jump_times,
            holding_times,
            post_jump_states,
            kinds,
            horizon,
        })
    }

    pub fn characteristics(&self) -> &'c LocalCharacteristics {
        self.chars
    }

    pub fn initial_state(&self) -> &[f64] {
        &self.initial_state
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn post_jump_states(&self) -> &[State] {
        &self.post_jump_states
    }

    pub fn kinds(&self) -> &[EventKind] {
        &self.kinds
    }

    /// Inter-jump times `T_k − T_{k−1}` as drawn during simulation.
    pub fn holding_times(&self) -> &[f64] {
        &self.holding_times
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_jumps(&self) -> usize {
        self.jump_times.len()
    }

    /// `X(t) = φ(Z_k, t − T_k)` for the last `T_k ≤ t` (càdlàg).
    pub fn state_at(&self, t: f64) -> Result<State> {
        LocalCharacteristics::check_time(t)?;
        if t > self.horizon {
            return Err(PdmpError::BeyondHorizon {
                t,
                horizon: self.horizon,
            });
        }
        let k = self.jump_times.partition_point(|&s| s <= t);
        Ok(if k == 0 {
            self.chars.flow_unchecked(&self.initial_state, t)
        } else {
            self.chars
                .flow_unchecked(&self.post_jump_states[k - 1], t - self.jump_times[k - 1])
        })
    }

    /// State just before the `k`-th jump (1-based), `φ(Z_{k−1}, S_k)`.
    pub fn pre_jump_state(&self, k: usize) -> State {
        let (from, t0) = if k == 1 {
            (&self.initial_state, 0.0)
        } else {
            (&self.post_jump_states[k - 2], self.jump_times[k - 2])
        };
        self.chars.flow_unchecked(from, self.jump_times[k - 1] - t0)
    }

    /// Init row, every jump, and the state at the horizon.
    pub fn events(&self) -> Vec<(f64, EventKind, State)> {
        let mut out = Vec::with_capacity(self.jump_times.len() + 2);
        out.push((0.0, EventKind::Init, self.initial_state.clone()));
        for ((&t, z), &k) in self
            .jump_times
            .iter()
            .zip(&self.post_jump_states)
            .zip(&self.kinds)
        {
            out.push((t, k, z.clone()));
        }
        if self.horizon.is_finite() {
            let end = self.state_at(self.horizon).expect("horizon is valid");
            out.push((self.horizon, EventKind::Horizon, end));
        }
        out
    }
}

/// Stream convention for path `index` of a Monte Carlo run.
pub fn path_stream(seed: u64, index: usize) -> RandomStream {
    RandomStream::new(seed, index as u64)
}

/// Runs `n_paths` independent paths (path `i` uses stream `(seed, i)`) and
/// returns the extracted values in path order.
pub fn monte_carlo<T, F>(
    chars: &LocalCharacteristics,
    x0: &[f64],
    horizon: f64,
    n_paths: usize,
    seed: u64,
    extractor: F,
) -> Result<Vec<T>>
where
    F: Fn(&Trajectory<'_>) -> T,
{
    (0..n_paths)
        .map(|i| {
            let mut stream = path_stream(seed, i);
            chars
                .simulate(x0, horizon, &mut stream)
                .map(|tr| extractor(&tr))
                .map_err(|e| PdmpError::Path {
                    index: i,
                    source: Box::new(e),
                })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drift_one(rate: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> LocalCharacteristics {
        LocalCharacteristics::new(1, Flow::closed(|x, t| vec![x[0] + t]), rate, |x, _| {
            vec![x[0] / 2.0]
        })
    }

    fn unit_interval() -> LocalCharacteristics {
        drift_one(|_| 0.0).boundary(Boundary::Level {
            level: Box::new(|x| x[0].min(1.0 - x[0])),
            scan_step: 1e-2,
            scan_limit: 100.0,
        })
    }

    #[test]
    fn flow_examples() {
        let c = drift_one(|x| x[0]);
        assert_eq!(c.flow_at(&[1.0], 2.0).unwrap(), vec![3.0]);
        assert_eq!(c.flow_at(&[5.0], 0.0).unwrap(), vec![5.0]);
        assert!(matches!(c.flow_at(&[1.0], -1.0), Err(PdmpError::NegativeTime(_))));
        assert!(matches!(c.flow_at(&[f64::NAN], 1.0), Err(PdmpError::NonFinite(_))));
        assert!(matches!(c.flow_at(&[1.0], f64::INFINITY), Err(PdmpError::NonFinite(_))));
    }

    #[test]
    fn flow_rejects_times_past_boundary() {
        let c = unit_interval();
        assert!(c.flow_at(&[0.3], 0.5).is_ok());
        assert!(matches!(
            c.flow_at(&[0.3], 0.8),
            Err(PdmpError::BeyondBoundary { .. })
        ));
    }

    #[test]
    fn boundary_time_examples() {
        assert_eq!(drift_one(|x| x[0]).boundary_time(&[3.0]), f64::INFINITY);
        let tb = unit_interval().boundary_time(&[0.3]);
        assert!((tb - 0.7).abs() < 1e-10, "{tb}");
    }

    #[test]
    fn ode_boundary_time() {
        let c = LocalCharacteristics::new(1, Flow::ode(|_, d| d[0] = 1.0), |_| 0.0, |x, _| {
            vec![x[0] / 2.0]
        })
        .boundary(Boundary::Level {
            level: Box::new(|x| 1.0 - x[0]),
            scan_step: 0.05,
            scan_limit: 10.0,
        });
        assert!((c.boundary_time(&[0.3]) - 0.7).abs() < 1e-10);
    }

    #[test]
    fn cumulative_hazard_examples() {
        let c = drift_one(|x| x[0]);
        assert!((c.cumulative_hazard(&[1.0], 2.0).unwrap() - 4.0).abs() < 1e-10);
        let zero = drift_one(|_| 0.0);
        assert_eq!(zero.cumulative_hazard(&[1.0], 7.0).unwrap(), 0.0);
        let three = drift_one(|_| 3.0);
        assert!((three.cumulative_hazard(&[0.2], 2.0).unwrap() - 6.0).abs() < 1e-10);
    }

    #[test]
    fn cumulative_hazard_rejects_non_integrable() {
        let c = drift_one(|x| 1.0 / (x[0] - 1.0).abs());
        assert!(matches!(
            c.cumulative_hazard(&[0.0], 2.0),
            Err(PdmpError::Quadrature { .. })
        ));
    }

    #[test]
    fn numeric_inversion_examples() {
        let c = drift_one(|x| x[0]);
        let r = c.inter_jump_from_uniform(&[0.0], (-2.0f64).exp()).unwrap();
        assert!((r.time - 2.0).abs() < 1e-10);
        assert!(!r.hit_boundary);
        let one = drift_one(|_| 1.0);
        let r = one.inter_jump_from_uniform(&[4.0], (-1.0f64).exp()).unwrap();
        assert!((r.time - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_rate_never_jumps() {
        let c = drift_one(|_| 0.0);
        let mut s = RandomStream::new(1, 0);
        let r = c.sample_inter_jump(&[0.0], &mut s).unwrap();
        assert_eq!(r.time, f64::INFINITY);
        assert!(!r.hit_boundary);
        let tr = c.simulate(&[0.5], 20.0, &mut s).unwrap();
        assert_eq!(tr.n_jumps(), 0);
        assert_eq!(tr.state_at(20.0).unwrap(), vec![20.5]);
    }

    #[test]
    fn boundary_hit_forces_jump() {
        let c = unit_interval();
        let mut s = RandomStream::new(3, 0);
        let r = c.sample_inter_jump(&[0.3], &mut s).unwrap();
        assert!(r.hit_boundary);
        assert!((r.time - 0.7).abs() < 1e-10);
        let tr = c.simulate(&[0.3], 2.0, &mut s).unwrap();
        assert_eq!(tr.kinds()[0], EventKind::BoundaryJump);
        assert!((tr.post_jump_states()[0][0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn thinning_requires_bound() {
        let c = drift_one(|_| 1.0).sampler(JumpSampler::Thinning);
        let mut s = RandomStream::new(3, 0);
        assert_eq!(
            c.sample_inter_jump(&[0.0], &mut s),
            Err(PdmpError::MissingRateBound)
        );
    }

    #[test]
    fn thinning_detects_bound_violation() {
        let c = drift_one(|x| x[0]).sampler(JumpSampler::Thinning).rate_bound(0.5);
        let mut s = RandomStream::new(3, 0);
        let r = c.simulate(&[0.0], 50.0, &mut s);
        assert!(matches!(r, Err(PdmpError::RateBoundViolated { .. })));
    }

    #[test]
    fn explosion_cap() {
        let c = drift_one(|_| 100.0).max_jumps(10);
        let mut s = RandomStream::new(3, 0);
        assert_eq!(
            c.simulate(&[1.0], 10.0, &mut s).err(),
            Some(PdmpError::Explosion { cap: 10 })
        );
    }

    #[test]
    fn degenerate_kernel_rejected() {
        let c = LocalCharacteristics::new(1, Flow::closed(|x, t| vec![x[0] + t]), |_| 1.0, |x, _| {
            x.to_vec()
        });
        let mut s = RandomStream::new(3, 0);
        assert!(matches!(
            c.simulate(&[1.0], 10.0, &mut s),
            Err(PdmpError::DegenerateJump { .. })
        ));
    }

    #[test]
    fn guard_violation_is_reported() {
        let c = drift_one(|_| 0.0).state_guard(|x| x[0] < 1.0).max_jumps(5);
        let mut s = RandomStream::new(3, 0);
        assert!(c.simulate(&[2.0], 1.0, &mut s).is_err());
    }

    #[test]
    fn state_at_is_cadlag() {
        let c = drift_one(|x| x[0]);
        let mut s = RandomStream::new(11, 0);
        let tr = c.simulate(&[1.0], 10.0, &mut s).unwrap();
        assert!(tr.n_jumps() > 0);
        assert_eq!(tr.state_at(0.0).unwrap(), vec![1.0]);
        for (k, &t) in tr.jump_times().iter().enumerate() {
            assert_eq!(tr.state_at(t).unwrap(), tr.post_jump_states()[k]);
            let z = tr.post_jump_states()[k][0];
            let next = tr.jump_times().get(k + 1).copied().unwrap_or(10.0);
            if t + 0.5 < next {
                assert!((tr.state_at(t + 0.5).unwrap()[0] - (z + 0.5)).abs() < 1e-12);
            }
        }
        assert!(matches!(
            tr.state_at(10.5),
            Err(PdmpError::BeyondHorizon { .. })
        ));
    }

    #[test]
    fn monte_carlo_is_deterministic_and_ordered() {
        let c = drift_one(|x| x[0]);
        let empty = monte_carlo(&c, &[0.0], 5.0, 0, 1, |t| t.n_jumps()).unwrap();
        assert!(empty.is_empty());
        let a = monte_carlo(&c, &[0.0], 5.0, 50, 9, |t| t.jump_times().to_vec()).unwrap();
        let b = monte_carlo(&c, &[0.0], 5.0, 50, 9, |t| t.jump_times().to_vec()).unwrap();
        assert_eq!(a, b);
        let mut s = path_stream(9, 17);
        let single = c.simulate(&[0.0], 5.0, &mut s).unwrap();
        assert_eq!(a[17], single.jump_times());
    }

    #[test]
    fn monte_carlo_attaches_path_index() {
        let c = drift_one(|_| 50.0).max_jumps(3);
        match monte_carlo(&c, &[0.0], 5.0, 4, 1, |t| t.n_jumps()) {
            Err(PdmpError::Path { index, source }) => {
                assert_eq!(index, 0);
                assert_eq!(*source, PdmpError::Explosion { cap: 3 });
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ode_hazard_matches_closed_form() {
        let c = LocalCharacteristics::new(1, Flow::ode(|_, d| d[0] = 1.0), |x| x[0], |x, _| {
            vec![x[0] / 2.0]
        });
        let lam = c.cumulative_hazard(&[1.0], 2.0).unwrap();
        assert!((lam - 4.0).abs() < 1e-9);
        let r = c.inter_jump_from_uniform(&[0.0], (-2.0f64).exp()).unwrap();
        assert!((r.time - 2.0).abs() < 1e-9);
    }
}
