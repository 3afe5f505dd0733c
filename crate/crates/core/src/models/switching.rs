use alloc::boxed::Box;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;


#[allow(unused_imports)]
use num_traits::Float;

use crate::engine::{Flow, JumpSampler, LocalCharacteristics, State, VectorFieldFn};
use crate::error::{PdmpError, Result};
use crate::rng::RandomStream;

const IRREDUCIBILITY_PROBES: usize = 100;
const BOX_TOL: f64 = 1e-9;

pub enum VectorField {
    /// `F(y) = A y + b` with `A` stored row-major.
    Affine { matrix: Vec<f64>, offset: Vec<f64> },
    Custom(VectorFieldFn),
}

impl VectorField {
    pub fn affine(matrix: Vec<f64>, offset: Vec<f64>) -> Self {
        VectorField::Affine { matrix, offset }
    }

    pub fn custom(f: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        VectorField::Custom(Box::new(f))
    }

    fn eval(&self, y: &[f64], out: &mut [f64]) {
        match self {
            VectorField::Affine { matrix, offset } => {
                let d = y.len();
                for (i, o) in out.iter_mut().enumerate().take(d) {
                    *o = offset[i] + (0..d).map(|j| matrix[i * d + j] * y[j]).sum::<f64>();
                }
            }
            VectorField::Custom(f) => f(y, out),
        }
    }

    /// Diagonal part if the field is affine with a diagonal matrix.
    fn diagonal(&self, d: usize) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            VectorField::Affine { matrix, offset } => {
                let off_diag = (0..d)
                    .flat_map(|i| (0..d).map(move |j| (i, j)))
                    .any(|(i, j)| i != j && matrix[i * d + j] != 0.0);
                (!off_diag).then(|| ((0..d).map(|i| matrix[i * d + i]).collect(), offset.clone()))
            }
            VectorField::Custom(_) => None,
        }
    }
}

pub enum SwitchingRates {
    /// `λ_ij` constant, `n × n` row-major.
    Constant(Vec<f64>),
    /// `λ_ij(y)` given as `(i, j, y) ↦ rate`.
    Custom(Box<dyn Fn(usize, usize, &[f64]) -> f64 + Send + Sync>),
}

/// Axis-aligned box `[lo, hi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxSet {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxSet {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, y: &[f64], tol: f64) -> bool {
        y.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(&v, (&a, &b))| v >= a - tol && v <= b + tol)
    }
}

/// Markov switching model: position `Y ∈ ℝᵈ` follows `F^{I}`, the mode `I`
/// jumps from `i` to `j` at rate `λ_ij(Y)`.
pub struct SwitchingModel {
    d: usize,
    n: usize,
    fields: Vec<VectorField>,
    rates: SwitchingRates,
    rate_bound: f64,
    compact: BoxSet,
}

impl SwitchingModel {
    /// Validates the model: dimensions, `λ_ii = 0`, non-negative rates whose
    /// row sums stay below `rate_bound`, and irreducibility of the rate
    /// pattern at the centre of `K` and at sampled points of `K`.
    pub fn new(
        d: usize,
        fields: Vec<VectorField>,
        rates: SwitchingRates,
        rate_bound: f64,
        compact: BoxSet,
    ) -> Result<Self> {
        let n = fields.len();
        if d == 0 || n == 0 {
            return Err(PdmpError::invalid("need d ≥ 1 and at least one vector field"));
        }
        for f in &fields {
            if let VectorField::Affine { matrix, offset } = f {
                if matrix.len() != d * d || offset.len() != d {
                    return Err(PdmpError::invalid("affine field has wrong dimensions"));
                }
            }
        }
        if let SwitchingRates::Constant(m) = &rates {
            if m.len() != n * n {
                return Err(PdmpError::invalid("rate matrix must be n × n"));
            }
        }
        if compact.lo.len() != d || compact.hi.len() != d {
            return Err(PdmpError::invalid("compact set has wrong dimension"));
        }
        if compact.lo.iter().zip(&compact.hi).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(PdmpError::invalid("compact set must be a non-degenerate finite box"));
        }
        if !(rate_bound > 0.0 && rate_bound.is_finite()) {
            return Err(PdmpError::invalid("rate bound must be positive"));
        }
        let model = Self {
            d,
            n,
            fields,
            rates,
            rate_bound,
            compact,
        };
        model.validate_rates()?;
        Ok(model)
    }

    fn validate_rates(&self) -> Result<()> {
        let mut probe = RandomStream::new(0x5eed_cafe, 0);
        let centre: Vec<f64> = (0..self.d)
            .map(|k| 0.5 * (self.compact.lo[k] + self.compact.hi[k]))
            .collect();
        let mut points = vec![centre];
        points.extend((0..IRREDUCIBILITY_PROBES).map(|_| {
            (0..self.d)
                .map(|k| probe.uniform_in(self.compact.lo[k], self.compact.hi[k]))
                .collect::<Vec<f64>>()
        }));
        for y in &points {
            for i in 0..self.n {
                let mut total = 0.0;
                for j in 0..self.n {
                    let r = self.rate(i, j, y);
                    if i == j && r != 0.0 {
                        return Err(PdmpError::Model(format!("λ_{i}{i} must vanish")));
                    }
                    if !(r >= 0.0 && r.is_finite()) {
                        return Err(PdmpError::Model(format!("λ_{i}{j} is negative or not finite")));
                    }
                    total += r;
                }
                if total > self.rate_bound {
                    return Err(PdmpError::RateBoundViolated {
                        rate: total,
                        bound: self.rate_bound,
                    });
                }
            }
            if !self.irreducible_at(y) {
                return Err(PdmpError::Model(format!("rate matrix is reducible at {y:?}")));
            }
        }
        Ok(())
    }

    /// Strong connectivity of the positive-rate graph at `y`.
    fn irreducible_at(&self, y: &[f64]) -> bool {
        let reach = |forward: bool| {
            let mut seen = vec![false; self.n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(i) = stack.pop() {
                for j in 0..self.n {
                    let r = if forward { self.rate(i, j, y) } else { self.rate(j, i, y) };
                    if r > 0.0 && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            seen.iter().all(|&s| s)
        };
        reach(true) && reach(false)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n_modes(&self) -> usize {
        self.n
    }

    pub fn rate_bound(&self) -> f64 {
        self.rate_bound
    }

    pub fn compact(&self) -> &BoxSet {
        &self.compact
    }

    pub fn rate(&self, i: usize, j: usize, y: &[f64]) -> f64 {
        match &self.rates {
            SwitchingRates::Constant(m) => m[i * self.n + j],
            SwitchingRates::Custom(f) => f(i, j, y),
        }
    }

    pub fn total_rate(&self, i: usize, y: &[f64]) -> f64 {
        (0..self.n).map(|j| self.rate(i, j, y)).sum()
    }

    pub fn field(&self, i: usize, y: &[f64], out: &mut [f64]) {
        self.fields[i].eval(y, out);
    }

    fn mode_of(&self, x: &[f64]) -> usize {
        x[self.d] as usize
    }

    /// Characteristics on the flat state `(y_0, …, y_{d−1}, mode)`.
    pub fn characteristics(self: &Arc<Self>) -> LocalCharacteristics {
        switching_characteristics(Arc::clone(self))
    }
}

/// The switching model as a PDMP: the mode is frozen along the flow, jumps
/// only change the mode, and jump times are drawn by thinning against the
/// model's rate bound.
pub fn switching_characteristics(model: Arc<SwitchingModel>) -> LocalCharacteristics {
    let d = model.d;
    let diagonals: Option<Vec<(Vec<f64>, Vec<f64>)>> =
        model.fields.iter().map(|f| f.diagonal(d)).collect();
    let flow = match diagonals {
        Some(diag) => {
            let m = Arc::clone(&model);
            Flow::closed(move |x, t| {
                let (a, b) = &diag[m.mode_of(x)];
                let mut out = x.to_vec();
                for k in 0..d {
                    let at = a[k] * t;
                    // y e^{at} + b (e^{at} − 1)/a, with the a → 0 limit y + b t
                    out[k] = if a[k] == 0.0 {
                        x[k] + b[k] * t
                    } else {
                        x[k] * at.exp() + b[k] * at.exp_m1() / a[k]
                    };
                }
                out
            })
        }
        None => {
            let m = Arc::clone(&model);
            Flow::ode(move |x, dx| {
                m.field(m.mode_of(x), &x[..d], &mut dx[..d]);
                dx[d] = 0.0;
            })
        }
    };
    let rate_model = Arc::clone(&model);
    let jump_model = Arc::clone(&model);
    let guard_model = Arc::clone(&model);
    LocalCharacteristics::new(
        d + 1,
        flow,
        move |x| rate_model.total_rate(rate_model.mode_of(x), &x[..d]),
        move |x, stream| switch_mode(&jump_model, x, stream),
    )
    .rate_bound(model.rate_bound)
    .sampler(JumpSampler::Thinning)
    .state_guard(move |x| {
        let mode = x[d];
        guard_model.compact.contains(&x[..d], BOX_TOL)
            && mode >= 0.0
            && mode.fract() == 0.0
            && (mode as usize) < guard_model.n
    })
}

fn switch_mode(model: &SwitchingModel, x: &[f64], stream: &mut RandomStream) -> State {
    let d = model.d;
    let i = model.mode_of(x);
    let y = &x[..d];
    let total = model.total_rate(i, y);
    let mut pick = stream.uniform() * total;
    let mut target = None;
    for j in 0..model.n {
        let r = model.rate(i, j, y);
        if r > 0.0 {
            target = Some(j);
            if pick < r {
                break;
            }
            pick -= r;
        }
    }
    let mut z = x.to_vec();
    z[d] = target.unwrap_or(i) as f64;
    z
}

/// Time-weighted occupation measure of `(Y_t, I_t)` on a regular grid over
/// `K`, normalized to total mass one. Mass falling outside the grid is kept
/// separately in `outside`.
#[derive(Clone, Debug, PartialEq)]
pub struct Occupancy {
    pub bins: Vec<usize>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// `per_mode[i]` is the flattened grid (first coordinate slowest).
    pub per_mode: Vec<Vec<f64>>,
    pub outside: f64,
}

impl Occupancy {
    pub fn bin_width(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / self.bins[axis] as f64
    }

    fn locate(&self, y: &[f64]) -> Option<usize> {
        let mut idx = 0;
        for (k, &v) in y.iter().enumerate() {
            let w = self.bin_width(k);
            let b = ((v - self.lo[k]) / w).floor();
            if !(b >= 0.0 && (b as usize) < self.bins[k]) {
                // the upper face belongs to the last bin
                if v == self.hi[k] {
                    idx = idx * self.bins[k] + self.bins[k] - 1;
                    continue;
                }
                return None;
            }
            idx = idx * self.bins[k] + b as usize;
        }
        Some(idx)
    }

    pub fn total_mass(&self) -> f64 {
        self.outside + self.per_mode.iter().flatten().sum::<f64>()
    }

    /// Mode marginal: mass per mode (grid plus nothing from `outside`).
    pub fn mode_masses(&self) -> Vec<f64> {
        self.per_mode.iter().map(|m| m.iter().sum()).collect()
    }

    /// For one-dimensional positions: mass of bins lying entirely outside
    /// `[lo, hi]`, plus off-grid mass.
    pub fn mass_outside_interval(&self, lo: f64, hi: f64) -> f64 {
        let w = self.bin_width(0);
        let mut mass = self.outside;
        for b in 0..self.bins[0] {
            let (a, c) = (self.lo[0] + b as f64 * w, self.lo[0] + (b + 1) as f64 * w);
            if c <= lo || a >= hi {
                mass += self.per_mode.iter().map(|m| m[b]).sum::<f64>();
            }
        }
        mass
    }

    /// L1 distance between two occupancies on the same grid.
    pub fn l1_distance(&self, other: &Occupancy) -> f64 {
        let grid: f64 = self
            .per_mode
            .iter()
            .flatten()
            .zip(other.per_mode.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .sum();
        grid + (self.outside - other.outside).abs()
    }
}

impl SwitchingModel {
    /// Simulates from `x0` and accumulates the time spent in each cell over
    /// `[burn_in, horizon]`, sampling every path segment at spacing at most
    /// `sample_step` (midpoint rule).
    #[allow(clippy::too_many_arguments)]
    pub fn occupancy_histogram(
        self: &Arc<Self>,
        x0: &[f64],
        horizon: f64,
        burn_in: f64,
        bins: &[usize],
        sample_step: f64,
        stream: &mut RandomStream,
    ) -> Result<Occupancy> {
        if bins.is_empty() || bins.len() != self.d || bins.iter().any(|&b| b == 0) {
            return Err(PdmpError::invalid("one positive bin count per position axis is required"));
        }
        if !(burn_in >= 0.0 && burn_in < horizon) {
            return Err(PdmpError::invalid("burn-in must lie in [0, horizon)"));
        }
        if !(sample_step > 0.0) {
            return Err(PdmpError::invalid("sample step must be positive"));
        }
        let chars = self.characteristics();
        let traj = chars.simulate(x0, horizon, stream)?;
        let cells: usize = bins.iter().product();
        let mut occ = Occupancy {
            bins: bins.to_vec(),
            lo: self.compact.lo.clone(),
            hi: self.compact.hi.clone(),
            per_mode: vec![vec![0.0; cells]; self.n],
            outside: 0.0,
        };
        let mut starts = vec![0.0];
        starts.extend_from_slice(traj.jump_times());
        let mut origins: Vec<&[f64]> = vec![traj.initial_state()];
        origins.extend(traj.post_jump_states().iter().map(|z| z.as_slice()));
        for (k, (&t0, z)) in starts.iter().zip(&origins).enumerate() {
            let t1 = starts.get(k + 1).copied().unwrap_or(horizon);
            let (a, b) = (t0.max(burn_in), t1.min(horizon));
            if b <= a {
                continue;
            }
            let m = ((b - a) / sample_step).ceil().max(1.0) as usize;
            let w = (b - a) / m as f64;
            let mode = self.mode_of(z);
            for s in 0..m {
                let t = a + (s as f64 + 0.5) * w;
                let x = chars.flow_at(z, t - t0)?;
                match occ.locate(&x[..self.d]) {
                    Some(c) => occ.per_mode[mode][c] += w,
                    None => occ.outside += w,
                }
            }
        }
        let total = horizon - burn_in;
        occ.per_mode.iter_mut().flatten().for_each(|v| *v /= total);
        occ.outside /= total;
        Ok(occ)
    }
}
