//! Couplings of two TCP window-size processes (linear jump rate) and the
//! distance estimators built on them.
//!
//! * [`simulate_pair`]: the dynamical coupling. Both coordinates drift at
//!   unit speed; they jump together at rate `min(x, y)` and the larger one
//!   jumps alone at rate `|x − y|`.
//! * [`sticking_attempt`]: one attempt to make the paths meet at the first
//!   jump of the higher one, by maximally coupling `T₁ˣ` with `T₁ʸ + (x − y)`.
//! * [`composite_tv_coupling`]: the dynamical coupling until the gap is
//!   small, then a sticking attempt, repeated until the horizon.

use alloc::vec;
use alloc::vec::Vec;


#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{PdmpError, Result};
use crate::models::{theoretical_rates, tcp_true_density};
use crate::rng::RandomStream;
use crate::stats::mean_stderr;

/// Time for the linear-rate hazard from `x` to accumulate `e`.
fn tcp_inverse_hazard(x: f64, e: f64) -> f64 {
    2.0 * e / (x + (x * x + 2.0 * e).sqrt())
}

fn tcp_first_jump(x: f64, stream: &mut RandomStream) -> f64 {
    tcp_inverse_hazard(x, stream.exp1())
}

/// Advances a single TCP path from `x` for `duration` with fresh clocks.
pub fn tcp_advance(mut x: f64, duration: f64, stream: &mut RandomStream) -> f64 {
    let mut left = duration;
    loop {
        let s = tcp_first_jump(x, stream);
        if s > left {
            return x + left;
        }
        x = 0.5 * (x + s);
        left -= s;
    }
}

/// States of a single TCP path from `x` at the (increasing) `grid` times.
pub fn tcp_on_grid(x: f64, grid: &[f64], stream: &mut RandomStream) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len());
    let mut now = 0.0;
    let mut state = x;
    let mut next_jump = tcp_first_jump(state, stream);
    for &t in grid {
        while now + next_jump <= t {
            now += next_jump;
            state = 0.5 * (state + next_jump);
            next_jump = tcp_first_jump(state, stream);
        }
        out.push(state + (t - now));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairEvent {
    Start,
    /// Both coordinates halve.
    Simultaneous,
    /// Only the larger coordinate halves.
    Solo,
    /// One coordinate jumps on its own clock inside a sticking round.
    Marginal,
    /// End of a failed sticking round: marginals evolved separately.
    Resync,
    /// Successful sticking: coordinates become equal.
    Stick,
}

/// A pair of TCP paths under a joint construction.
#[derive(Clone, Debug, PartialEq)]
pub struct CoupledPath {
    pub times: Vec<f64>,
    pub states: Vec<(f64, f64)>,
    pub events: Vec<PairEvent>,
    pub coalesced_at: Option<f64>,
    pub horizon: f64,
}

impl CoupledPath {
    fn start(x: f64, y: f64, horizon: f64) -> Self {
        Self {
            times: vec![0.0],
            states: vec![(x, y)],
            events: vec![PairEvent::Start],
            coalesced_at: (x == y).then_some(0.0),
            horizon,
        }
    }

    fn push(&mut self, t: f64, s: (f64, f64), e: PairEvent) {
        self.times.push(t);
        self.states.push(s);
        self.events.push(e);
        if self.coalesced_at.is_none() && s.0 == s.1 {
            self.coalesced_at = Some(t);
        }
    }

    /// Pair state at time `t` (càdlàg, unit drift between events).
    pub fn state_at(&self, t: f64) -> Result<(f64, f64)> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(PdmpError::BeyondHorizon {
                t,
                horizon: self.horizon,
            });
        }
        let k = self.times.partition_point(|&s| s <= t) - 1;
        let dt = t - self.times[k];
        let (x, y) = self.states[k];
        Ok((x + dt, y + dt))
    }

    pub fn gap_at(&self, t: f64) -> Result<f64> {
        self.state_at(t).map(|(x, y)| (x - y).abs())
    }
}

/// Runs the dynamical coupling from `(x, y)` at time `now` until `until`,
/// recording events into `path`. Returns the state at `until`.
fn run_dynamical(
    path: &mut CoupledPath,
    (mut x, mut y): (f64, f64),
    mut now: f64,
    until: f64,
    stream: &mut RandomStream,
) -> (f64, f64) {
    loop {
        let lo = x.min(y);
        let gap = (x - y).abs();
        let t_joint = tcp_inverse_hazard(lo, stream.exp1());
        let t_solo = stream.exponential(gap);
        let t = t_joint.min(t_solo);
        if now + t > until {
            let dt = until - now;
            return (x + dt, y + dt);
        }
        now += t;
        x += t;
        y += t;
        let event = if t_joint <= t_solo {
            x *= 0.5;
            y *= 0.5;
            PairEvent::Simultaneous
        } else {
            if x > y {
                x *= 0.5;
            } else {
                y *= 0.5;
            }
            PairEvent::Solo
        };
        path.push(now, (x, y), event);
    }
}

/// Dynamical (Wasserstein) coupling of two TCP paths on `[0, horizon]`.
/// Event times are exact: the joint clock inverts `m t + t²/2 = −ln U`
/// with `m` the smaller coordinate, the solo clock is exponential with rate
/// equal to the (constant between events) gap.
pub fn simulate_pair(x: f64, y: f64, horizon: f64, stream: &mut RandomStream) -> Result<CoupledPath> {
    check_start(x, y)?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(PdmpError::invalid("horizon must be positive and finite"));
    }
    let mut path = CoupledPath::start(x, y, horizon);
    run_dynamical(&mut path, (x, y), 0.0, horizon, stream);
    Ok(path)
}

/// Pair states of the dynamical coupling at the (increasing) `grid` times.
pub fn pair_on_grid(x: f64, y: f64, grid: &[f64], stream: &mut RandomStream) -> Result<Vec<(f64, f64)>> {
    let end = grid.last().copied().unwrap_or(0.0);
    if end <= 0.0 {
        return Ok(grid.iter().map(|_| (x, y)).collect());
    }
    let path = simulate_pair(x, y, end, stream)?;
    grid.iter().map(|&t| path.state_at(t)).collect()
}

fn check_start(x: f64, y: f64) -> Result<()> {
    if x >= 0.0 && y >= 0.0 && x.is_finite() && y.is_finite() {
        Ok(())
    } else {
        Err(PdmpError::invalid("starting points must be finite and non-negative"))
    }
}

/// Raw draws of one sticking round, relative to the round's start.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StickRound {
    /// Whether the maximal coupling realized `T_hi = T_lo + δ`.
    pub shifted: bool,
    pub t_hi: f64,
    pub t_lo: f64,
    /// Second inter-jump time of the lower path.
    pub s2_lo: f64,
    pub delta: f64,
}

impl StickRound {
    pub fn success(&self) -> bool {
        self.shifted && self.s2_lo > self.delta
    }
}

/// Draws `(T_hi, T_lo)` from the maximal coupling of the first-jump law
/// from `hi` and the `δ`-shifted first-jump law from `lo`, then the second
/// clock of the lower path.
///
/// The coupling is realized by rejection: propose `S ~ f_hi` and keep
/// `(S, S − δ)` with probability `min(f_hi, g)(S) / f_hi(S)`, where
/// `g(s) = f_lo(s − δ)`; otherwise draw the lower time from the normalized
/// positive part of `g − f_hi`.
pub fn stick_round(hi: f64, lo: f64, stream: &mut RandomStream) -> StickRound {
    debug_assert!(hi >= lo);
    let delta = hi - lo;
    let f_hi = |s: f64| tcp_true_density(hi, s).unwrap_or(0.0);
    let g = |s: f64| {
        if s >= delta {
            tcp_true_density(lo, s - delta).unwrap_or(0.0)
        } else {
            0.0
        }
    };
    let s = tcp_first_jump(hi, stream);
    let (shifted, t_lo) = if stream.uniform() * f_hi(s) <= g(s) {
        (true, s - delta)
    } else {
        loop {
            let cand = tcp_first_jump(lo, stream) + delta;
            if stream.uniform() * g(cand) > f_hi(cand) {
                break (false, cand - delta);
            }
        }
    };
    let z_lo = 0.5 * (lo + t_lo);
    let s2_lo = tcp_first_jump(z_lo, stream);
    StickRound {
        shifted,
        t_hi: s,
        t_lo,
        s2_lo,
        delta,
    }
}

/// One attempt to stick the paths from `x` and `y` at the first jump of the
/// higher one. Arguments may come in either order. Returns the success
/// flag and, on success, the coalescence time.
pub fn sticking_attempt(x: f64, y: f64, stream: &mut RandomStream) -> Result<(bool, Option<f64>)> {
    check_start(x, y)?;
    let round = stick_round(x.max(y), x.min(y), stream);
    Ok(if round.success() {
        (true, Some(round.t_hi))
    } else {
        (false, None)
    })
}

/// Tuning of the composite coupling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompositeConfig {
    /// Gap below which a sticking attempt is made.
    pub epsilon: f64,
    /// Contraction rate used to size the dynamical phase,
    /// `t₁ = ln(1/ε) / λ̃`.
    pub lambda_tilde: f64,
}

impl Default for CompositeConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.25,
            lambda_tilde: 0.9 * theoretical_rates().1,
        }
    }
}

impl CompositeConfig {
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::default()
        }
    }

    pub fn phase_one(&self) -> f64 {
        (1.0 / self.epsilon).ln() / self.lambda_tilde
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(PdmpError::invalid("epsilon must lie in (0, 1)"));
        }
        if !(self.lambda_tilde > 0.0 && self.lambda_tilde.is_finite()) {
            return Err(PdmpError::invalid("lambda_tilde must be positive"));
        }
        Ok(())
    }
}

/// Jumps `(time, post-jump state)` of one TCP coordinate from `x` on
/// `(0, end]`, given its first clock and optionally its second; later clocks
/// are fresh. Also returns the state at `end`.
fn marginal_jumps(
    x: f64,
    first: f64,
    second: Option<f64>,
    end: f64,
    stream: &mut RandomStream,
) -> (Vec<(f64, f64)>, f64) {
    let mut out = Vec::new();
    let (mut t, mut z, mut clock, mut pending) = (0.0, x, first, second);
    loop {
        if t + clock > end {
            return (out, z + (end - t));
        }
        t += clock;
        z = 0.5 * (z + clock);
        out.push((t, z));
        if t == end {
            return (out, z);
        }
        clock = match pending.take() {
            Some(c) => c,
            None => tcp_first_jump(z, stream),
        };
    }
}

fn value_at(x: f64, jumps: &[(f64, f64)], t: f64) -> f64 {
    match jumps.iter().rev().find(|j| j.0 <= t) {
        Some(&(s, z)) => z + (t - s),
        None => x + t,
    }
}

/// Composite total-variation coupling on `[0, horizon]`.
///
/// Each round runs the dynamical coupling for `t₁` (skipped when the gap is
/// already at most `ε`), then makes a sticking attempt if the gap is at most
/// `ε`. A failed attempt leaves both marginals evolved with their own fresh
/// clocks up to the later of the two first jumps, and the next round starts
/// there. After a stick the common path keeps jumping until `horizon`.
/// Returns the full pair path; `coalesced_at` is the first time the two
/// coordinates agree, if that happens by `horizon`.
pub fn composite_tv_path(
    x: f64,
    y: f64,
    horizon: f64,
    config: &CompositeConfig,
    stream: &mut RandomStream,
) -> Result<CoupledPath> {
    check_start(x, y)?;
    config.validate()?;
    if !(horizon >= 0.0) {
        return Err(PdmpError::invalid("horizon must be non-negative"));
    }
    let mut path = CoupledPath::start(x, y, horizon);
    let mut state = (x, y);
    let mut now = 0.0;
    let t1 = config.phase_one();
    while path.coalesced_at.is_none() && now < horizon {
        if (state.0 - state.1).abs() > config.epsilon {
            let until = (now + t1).min(horizon);
            state = run_dynamical(&mut path, state, now, until, stream);
            now = until;
            if now >= horizon || (state.0 - state.1).abs() > config.epsilon {
                continue;
            }
        }
        let hi_first = state.0 >= state.1;
        let orient = |h: f64, l: f64| if hi_first { (h, l) } else { (l, h) };
        let (hi, lo) = (state.0.max(state.1), state.0.min(state.1));
        let round = stick_round(hi, lo, stream);
        let left = horizon - now;
        if round.success() {
            let z_lo = 0.5 * (lo + round.t_lo);
            if round.t_lo <= left {
                path.push(now + round.t_lo, orient(hi + round.t_lo, z_lo), PairEvent::Marginal);
            }
            if round.t_hi > left {
                break;
            }
            now += round.t_hi;
            let meet = 0.5 * (hi + round.t_hi);
            path.push(now, (meet, meet), PairEvent::Stick);
            // the lower path's second clock, past δ, drives the common path
            let (jumps, _) = marginal_jumps(meet, round.s2_lo - round.delta, None, horizon - now, stream);
            for (t, z) in jumps {
                path.push(now + t, (z, z), PairEvent::Simultaneous);
            }
            break;
        }
        let tau = round.t_hi.max(round.t_lo);
        let end = tau.min(left);
        let (hi_jumps, hi_end) = marginal_jumps(hi, round.t_hi, None, end, stream);
        let (lo_jumps, lo_end) = marginal_jumps(lo, round.t_lo, Some(round.s2_lo), end, stream);
        let mut times: Vec<f64> = hi_jumps.iter().chain(&lo_jumps).map(|j| j.0).collect();
        times.sort_by(f64::total_cmp);
        for t in times {
            let kind = if t == tau { PairEvent::Resync } else { PairEvent::Marginal };
            let pair = orient(value_at(hi, &hi_jumps, t), value_at(lo, &lo_jumps, t));
            path.push(now + t, pair, kind);
        }
        if tau > left {
            break;
        }
        now += tau;
        state = orient(hi_end, lo_end);
    }
    Ok(path)
}

/// Composite coupling reporting only whether (and when) the pair coalesced
/// by `horizon`.
pub fn composite_tv_coupling(
    x: f64,
    y: f64,
    horizon: f64,
    config: &CompositeConfig,
    stream: &mut RandomStream,
) -> Result<(bool, Option<f64>)> {
    let path = composite_tv_path(x, y, horizon, config, stream)?;
    Ok((path.coalesced_at.is_some(), path.coalesced_at))
}

/// Point estimate with its Monte Carlo standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub n: usize,
}

/// Fraction of composite-coupled pairs not coalesced by each grid time, an
/// upper-bound estimator of `‖δ_x P_t − δ_y P_t‖_TV`. Pair `i` uses stream
/// `(seed, i)`.
pub fn tv_upper_curve(
    x: f64,
    y: f64,
    grid: &[f64],
    n_pairs: usize,
    seed: u64,
    config: &CompositeConfig,
) -> Result<Vec<Estimate>> {
    let horizon = grid.iter().copied().fold(0.0, f64::max);
    let times = (0..n_pairs)
        .map(|i| {
            let mut s = RandomStream::new(seed, i as u64);
            composite_tv_path(x, y, horizon, config, &mut s).map(|p| p.coalesced_at)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(not_coalesced_fractions(&times, grid))
}

/// Turns coalescence times into "not coalesced by t" fractions.
pub fn not_coalesced_fractions(times: &[Option<f64>], grid: &[f64]) -> Vec<Estimate> {
    grid.iter()
        .map(|&t| {
            let n = times.len();
            let open = times.iter().filter(|c| !matches!(c, Some(tc) if *tc <= t)).count();
            let p = if n > 0 { open as f64 / n as f64 } else { f64::NAN };
            Estimate {
                value: p,
                stderr: (p * (1.0 - p) / n as f64).sqrt(),
                n,
            }
        })
        .collect()
}

/// `estimate_tv_upper` at a single time.
pub fn estimate_tv_upper(
    x: f64,
    y: f64,
    t: f64,
    n_pairs: usize,
    seed: u64,
    config: &CompositeConfig,
) -> Result<Estimate> {
    if n_pairs == 0 {
        return Err(PdmpError::invalid("need at least one pair"));
    }
    Ok(tv_upper_curve(x, y, &[t], n_pairs, seed, config)?[0])
}

/// Exact `W_p` between two equal-size empirical measures on the line,
/// matching order statistics. For `p < 1` the mean of `|a − b|^p` is
/// returned without the outer root.
pub fn empirical_wasserstein(a: &[f64], b: &[f64], p: f64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(PdmpError::invalid("samples must have equal length"));
    }
    if a.is_empty() {
        return Err(PdmpError::invalid("samples must be non-empty"));
    }
    if !(p > 0.0 && p.is_finite()) {
        return Err(PdmpError::invalid("p must be positive"));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let mean = a
        .iter()
        .zip(&b)
        .map(|(u, v)| (u - v).abs().powf(p))
        .sum::<f64>()
        / a.len() as f64;
    Ok(mean.powf(1.0 / p.max(1.0)))
}

/// Mean and standard error of `|x − y|^p` across coupled pairs.
pub fn pathwise_moment(pairs: &[(f64, f64)], p: f64) -> Estimate {
    let v: Vec<f64> = pairs.iter().map(|(x, y)| (x - y).abs().powf(p)).collect();
    let (value, stderr) = mean_stderr(&v);
    Estimate {
        value,
        stderr,
        n: v.len(),
    }
}

/// Stationary TCP sample: one long path from `x0`, recorded every `spacing`
/// time units after `burn_in`.
pub fn tcp_stationary_sample(
    x0: f64,
    n: usize,
    burn_in: f64,
    spacing: f64,
    stream: &mut RandomStream,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut x = tcp_advance(x0, burn_in, stream);
    for _ in 0..n {
        out.push(x);
        x = tcp_advance(x, spacing, stream);
    }
    out
}

/// Log-linear fit `ln v ≈ intercept − rate · t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateFit {
    pub rate: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    pub residual_rms: f64,
}

/// Ordinary least squares of `ln(value)` on time over all points.
pub fn fit_rate(times: &[f64], values: &[f64]) -> Result<RateFit> {
    let lo = times.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    fit_rate_window(times, values, lo, hi)
}

/// [`fit_rate`] restricted to points with `t_min ≤ t ≤ t_max`.
pub fn fit_rate_window(times: &[f64], values: &[f64], t_min: f64, t_max: f64) -> Result<RateFit> {
    if times.len() != values.len() {
        return Err(PdmpError::invalid("times and values differ in length"));
    }
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= t_min && **t <= t_max)
        .map(|(&t, &v)| (t, v))
        .collect();
    if pts.len() < 3 {
        return Err(PdmpError::invalid("need at least three points in the window"));
    }
    if pts.iter().any(|&(_, v)| !(v > 0.0) || !v.is_finite()) {
        return Err(PdmpError::invalid("values in the fit window must be positive"));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1.ln() - ml)).sum();
    if sxx == 0.0 {
        return Err(PdmpError::invalid("fit window needs distinct times"));
    }
    let slope = sxy / sxx;
    let intercept = ml - slope * mt;
    let rss: f64 = pts
        .iter()
        .map(|p| {
            let r = p.1.ln() - (intercept + slope * p.0);
            r * r
        })
        .sum();
    Ok(RateFit {
        rate: -slope,
        intercept,
        window: (t_min, t_max),
        residual_rms: (rss / n).sqrt(),
    })
}
