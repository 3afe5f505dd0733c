//! Discrete chains extracted from trajectories, and the kernels `H`, `J`
//! of the observation chain for one-dimensional models.

use alloc::vec;
use alloc::vec::Vec;


#[allow(unused_imports)]
use num_traits::Float;

use crate::engine::{LocalCharacteristics, State, Trajectory};
use crate::error::{PdmpError, Result};
use crate::interval::IntervalSet;
use crate::numerics::{bisect_flip, integrate_pieces};
use crate::rng::RandomStream;

/// `(Zₙ, Sₙ)`: post-jump locations and inter-jump times, with `S₀ = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddedChain {
    pub entries: Vec<(State, f64)>,
}

impl EmbeddedChain {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of transitions `(Zᵢ, Zᵢ₊₁, Sᵢ₊₁)`.
    pub fn n_transitions(&self) -> usize {
        self.entries.len().saturating_sub(1)
    }

    /// Transitions as `(Zᵢ, Zᵢ₊₁, Sᵢ₊₁)`.
    pub fn transitions(&self) -> impl Iterator<Item = (&[f64], &[f64], f64)> + '_ {
        self.entries
            .windows(2)
            .map(|w| (w[0].0.as_slice(), w[1].0.as_slice(), w[1].1))
    }

    /// Jump times `Tₙ = S₁ + … + Sₙ`.
    pub fn jump_times(&self) -> Vec<f64> {
        let mut t = 0.0;
        self.entries
            .iter()
            .skip(1)
            .map(|(_, s)| {
                t += s;
                t
            })
            .collect()
    }
}

/// Embedded chain of a trajectory.
pub fn embedded_chain(traj: &Trajectory<'_>) -> EmbeddedChain {
    let mut entries = Vec::with_capacity(traj.n_jumps() + 1);
    entries.push((traj.initial_state().to_vec(), 0.0));
    for (s, z) in traj.holding_times().iter().zip(traj.post_jump_states()) {
        entries.push((z.clone(), *s));
    }
    EmbeddedChain { entries }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    /// The initial state or a jump of the process.
    Jump,
    /// A point of the independent unit-rate observation clock.
    Observation,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Jump => "jump",
            Origin::Observation => "observation",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObservationChain {
    pub entries: Vec<(State, f64, Origin)>,
}

impl ObservationChain {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn n_observations(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.2 == Origin::Observation)
            .count()
    }
}

/// Merges the jump skeleton with a unit-rate Poisson clock on
/// `[0, horizon]` drawn from `stream`.
pub fn observation_chain(traj: &Trajectory<'_>, stream: &mut RandomStream) -> Result<ObservationChain> {
    let horizon = traj.horizon();
    if !horizon.is_finite() {
        return Err(PdmpError::invalid("observation chain needs a finite horizon"));
    }
    let mut clock = Vec::new();
    let mut t = stream.exp1();
    while t <= horizon {
        clock.push(t);
        t += stream.exp1();
    }
    let mut entries = Vec::with_capacity(traj.n_jumps() + clock.len() + 1);
    entries.push((traj.initial_state().to_vec(), 0.0, Origin::Jump));
    let jumps = traj.jump_times();
    let states = traj.post_jump_states();
    let (mut i, mut k) = (0, 0);
    while i < jumps.len() || k < clock.len() {
        if k >= clock.len() || (i < jumps.len() && jumps[i] <= clock[k]) {
            if k < clock.len() && jumps[i] == clock[k] {
                k += 1;
            }
            entries.push((states[i].clone(), jumps[i], Origin::Jump));
            i += 1;
        } else {
            entries.push((traj.state_at(clock[k])?, clock[k], Origin::Observation));
            k += 1;
        }
    }
    Ok(ObservationChain { entries })
}

const KERNEL_TOL: f64 = 1e-8;
const TRUNCATION: f64 = 40.0;
const SCAN_POINTS: usize = 400;

fn require_1d(chars: &LocalCharacteristics) -> Result<()> {
    if chars.dim() == 1 {
        Ok(())
    } else {
        Err(PdmpError::invalid("kernel masses are only available for 1-D models"))
    }
}

/// Upper integration limit: `t*(x)` or the first `s` with
/// `s + Λ(x, s) ≥ 40`, whichever comes first.
fn upper_limit(chars: &LocalCharacteristics, x: &[f64]) -> Result<f64> {
    let tb = chars.boundary_time(x);
    let top = TRUNCATION.min(tb);
    let total = |s: f64| chars.cumulative_hazard(x, s).map(|l| s + l);
    if total(top)? < TRUNCATION {
        return Ok(top);
    }
    let mut err = None;
    let s = bisect_flip(
        |s| match total(s) {
            Ok(v) => v >= TRUNCATION,
            Err(e) => {
                err = Some(e);
                true
            }
        },
        0.0,
        top,
        1e-12,
    );
    match err {
        Some(e) => Err(e),
        None => Ok(s),
    }
}

/// Points in `(0, upper)` where the piecewise-constant `g` changes value.
fn breakpoints<G: Fn(f64) -> f64>(g: G, upper: f64) -> Vec<f64> {
    let h = upper / SCAN_POINTS as f64;
    let mut out = Vec::new();
    let mut prev = g(0.0);
    for k in 1..=SCAN_POINTS {
        let s = h * k as f64;
        let cur = g(s);
        if cur != prev {
            let lo = h * (k - 1) as f64;
            out.push(bisect_flip(|u| g(u) != prev, lo, s, 1e-13));
        }
        prev = cur;
    }
    out
}

fn survival_weight(chars: &LocalCharacteristics, x: &[f64], s: f64) -> f64 {
    match chars.cumulative_hazard(x, s) {
        Ok(l) => (-(s + l)).exp(),
        Err(_) => f64::NAN,
    }
}

fn flow1(chars: &LocalCharacteristics, x: &[f64], s: f64) -> State {
    chars.flow_at(x, s).unwrap_or_else(|_| vec![f64::NAN])
}

/// `H(x, A) = ∫₀^{t*} e^{−(s + Λ(x, s))} 1_A(φ(x, s)) ds`.
pub fn kernel_h_mass(chars: &LocalCharacteristics, x: &[f64], set: &IntervalSet) -> Result<f64> {
    require_1d(chars)?;
    if set.is_empty() {
        return Ok(0.0);
    }
    let upper = upper_limit(chars, x)?;
    let ind = |s: f64| {
        if set.contains(flow1(chars, x, s)[0]) {
            1.0
        } else {
            0.0
        }
    };
    let breaks = if set.is_full() {
        Vec::new()
    } else {
        breakpoints(ind, upper)
    };
    integrate_pieces(|s| survival_weight(chars, x, s) * ind(s), 0.0, upper, &breaks, KERNEL_TOL)
}

/// `J(x, A)`: the jump part of the observation-chain kernel, including the
/// forced jump at `t*(x)`.
pub fn kernel_j_mass(chars: &LocalCharacteristics, x: &[f64], set: &IntervalSet) -> Result<f64> {
    require_1d(chars)?;
    if set.is_empty() {
        return Ok(0.0);
    }
    let upper = upper_limit(chars, x)?;
    let q = |s: f64| {
        let z = flow1(chars, x, s);
        chars.transition_mass(&z, set).unwrap_or(f64::NAN)
    };
    // surfaces a missing measure as an error rather than a NaN
    chars.transition_mass(x, set)?;
    let breaks = if set.is_full() {
        Vec::new()
    } else {
        breakpoints(q, upper)
    };
    let integrand = |s: f64| {
        let qs = q(s);
        if qs == 0.0 {
            return 0.0;
        }
        chars.jump_rate(&flow1(chars, x, s)) * survival_weight(chars, x, s) * qs
    };
    let mut mass = integrate_pieces(integrand, 0.0, upper, &breaks, KERNEL_TOL)?;
    let tb = chars.boundary_time(x);
    if tb.is_finite() && upper >= tb {
        let w = survival_weight(chars, x, tb);
        if w > 0.0 {
            let z = chars.flow_at(x, tb)?;
            mass += w * chars.transition_mass(&z, set)?;
        }
    }
    Ok(mass)
}

/// `|H(x, ·) + J(x, ·) − 1|` over the whole state space.
pub fn check_markov_kernel(chars: &LocalCharacteristics, x: &[f64]) -> Result<f64> {
    let all = IntervalSet::full();
    let h = kernel_h_mass(chars, x, &all)?;
    let j = kernel_j_mass(chars, x, &all)?;
    Ok((h + j - 1.0).abs())
}
