//! Nonparametric estimation of the inter-jump density `f(x, t)` from an
//! embedded chain, through `f ≈ Σₖ l(A, Bₖ, t) · H(A, Bₖ, t)`.
//!
//! Only the first state coordinate is used for `A` and the blocks `Bₖ`.
//!
//! `l̂ₖ` smooths the Nelson–Aalen increments of the transitions from `A`
//! into `Bₖ`, each divided by the number of those same transitions still at
//! risk. `Ĥₖ(t)` is the fraction of transitions from `A` landing in `Bₖ`
//! with holding time beyond `t`. Their product estimates the sub-density of
//! jumping at `t` into `Bₖ`, and the sum over blocks estimates `f`.
//!
//! The product can be formed after smoothing (`l̂ₖ(t) Ĥₖ(t)`) or inside
//! the smoother, weighting each increment of block `k` at time `s` by
//! `Ĥₖ(s−)`. When the destination block nearly determines the holding time,
//! `lₖ` has a sharp spike at the end of its support and the first form
//! carries a bias of order one at any fixed bandwidth. See
//! [`DensityMethod`].

use alloc::string::ToString;
use alloc::vec::Vec;


#[allow(unused_imports)]
use num_traits::Float;

use crate::chains::EmbeddedChain;
use crate::error::{PdmpError, Result};
use crate::interval::Interval;

const MIN_TRANSITIONS_IN_A: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum KernelShape {
    #[default]
    Epanechnikov,
    Triangular,
    Uniform,
}

impl KernelShape {
    /// Kernel on `[−1, 1]` with unit mass.
    pub fn eval(self, u: f64) -> f64 {
        if u.abs() > 1.0 {
            return 0.0;
        }
        match self {
            KernelShape::Epanechnikov => 0.75 * (1.0 - u * u),
            KernelShape::Triangular => 1.0 - u.abs(),
            KernelShape::Uniform => 0.5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelShape::Epanechnikov => "epanechnikov",
            KernelShape::Triangular => "triangular",
            KernelShape::Uniform => "uniform",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "epanechnikov" => Ok(KernelShape::Epanechnikov),
            "triangular" => Ok(KernelShape::Triangular),
            "uniform" => Ok(KernelShape::Uniform),
            other => Err(PdmpError::InvalidParameter(alloc::format!("unknown kernel shape '{other}'"))),
        }
    }
}

/// The set `A` around the query point and quantile blocks `Bₖ` of the
/// post-jump locations reached from `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    pub set_a: Interval,
    pub blocks: Vec<Interval>,
}

impl Partition {
    /// Block holding `z`: blocks are half-open `[lo, hi)` except the last.
    pub fn block_of(&self, z: f64) -> Option<usize> {
        let first = self.blocks.first()?;
        let last = self.blocks.last()?;
        if z < first.lo || z > last.hi {
            return None;
        }
        let k = self.blocks.partition_point(|b| b.hi <= z);
        Some(k.min(self.blocks.len() - 1))
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }
}

/// `A = [x − w/2, x + w/2]`, shrunk symmetrically so that it stays inside
/// the interior of `domain`; blocks are `k_blocks` empirical quantile
/// intervals of `{Zᵢ₊₁ : Zᵢ ∈ A}`.
pub fn build_partition(
    chain: &EmbeddedChain,
    x: f64,
    a_width: f64,
    k_blocks: usize,
    domain: Interval,
) -> Result<Partition> {
    if !(a_width > 0.0 && a_width.is_finite()) {
        return Err(PdmpError::invalid("width of A must be positive"));
    }
    if k_blocks == 0 {
        return Err(PdmpError::invalid("need at least one block"));
    }
    if !(x > domain.lo && x < domain.hi) {
        return Err(PdmpError::invalid("query point must lie inside the state space"));
    }
    if chain.n_transitions() < k_blocks {
        return Err(PdmpError::InsufficientData(alloc::format!(
            "chain has {} transitions, fewer than {k_blocks} blocks",
            chain.n_transitions()
        )));
    }
    let half = (0.5 * a_width).min(0.5 * (x - domain.lo)).min(0.5 * (domain.hi - x));
    let set_a = Interval::new(x - half, x + half);
    let mut next: Vec<f64> = chain
        .transitions()
        .filter(|(z, _, _)| set_a.contains(z[0]))
        .map(|(_, z1, _)| z1[0])
        .collect();
    if next.len() < MIN_TRANSITIONS_IN_A {
        return Err(PdmpError::InsufficientData(alloc::format!(
            "only {} transitions start in A = [{}, {}], need at least {MIN_TRANSITIONS_IN_A}",
            next.len(),
            set_a.lo,
            set_a.hi
        )));
    }
    if next.len() < k_blocks {
        return Err(PdmpError::InsufficientData(
            "fewer transitions from A than blocks".to_string(),
        ));
    }
    next.sort_by(f64::total_cmp);
    let n = next.len();
    let mut cuts: Vec<f64> = (0..k_blocks).map(|j| next[j * n / k_blocks]).collect();
    cuts.push(next[n - 1]);
    let blocks = cuts.windows(2).map(|w| Interval::new(w[0], w[1])).collect();
    Ok(Partition { set_a, blocks })
}

/// Transitions from `A`: holding times and destination blocks.
struct FromA {
    s: Vec<f64>,
    block: Vec<Option<usize>>,
}

impl FromA {
    fn collect(chain: &EmbeddedChain, partition: &Partition) -> Result<Self> {
        let mut s = Vec::new();
        let mut block = Vec::new();
        for (z, z1, si) in chain.transitions() {
            if partition.set_a.contains(z[0]) {
                s.push(si);
                block.push(partition.block_of(z1[0]));
            }
        }
        if s.is_empty() {
            return Err(PdmpError::EmptyA);
        }
        Ok(Self { s, block })
    }

    fn sorted_block(&self, k: usize) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .s
            .iter()
            .zip(&self.block)
            .filter(|(_, b)| **b == Some(k))
            .map(|(s, _)| *s)
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    fn h(&self, k: usize, t: f64) -> f64 {
        let hits = self
            .s
            .iter()
            .zip(&self.block)
            .filter(|(s, b)| **b == Some(k) && **s > t)
            .count();
        hits as f64 / self.s.len() as f64
    }
}

/// `Ĥ(A, Bₖ, t) = #{Zᵢ ∈ A, Zᵢ₊₁ ∈ Bₖ, Sᵢ₊₁ > t} / #{Zᵢ ∈ A}`.
pub fn estimate_h(chain: &EmbeddedChain, partition: &Partition, k: usize, t: f64) -> Result<f64> {
    check_block(partition, k)?;
    Ok(FromA::collect(chain, partition)?.h(k, t))
}

fn check_block(partition: &Partition, k: usize) -> Result<()> {
    if k < partition.n_blocks() {
        Ok(())
    } else {
        Err(PdmpError::invalid("block index out of range"))
    }
}

/// Kernel-smoothed jump rate into one block.
#[derive(Clone, Debug, PartialEq)]
pub struct HazardEstimate {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub bandwidth: f64,
    pub kernel_shape: KernelShape,
    /// Grid points where nobody was at risk; their value is set to 0.
    pub zero_at_risk: Vec<bool>,
}

/// `n^{−1/5}` times the sample standard deviation.
pub fn default_bandwidth(s: &[f64]) -> Result<f64> {
    let n = s.len();
    if n < 2 {
        return Err(PdmpError::InsufficientData("bandwidth rule needs two holding times".to_string()));
    }
    let mean = s.iter().sum::<f64>() / n as f64;
    let var = s.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    let b = (n as f64).powf(-0.2) * var.sqrt();
    if b > 0.0 {
        Ok(b)
    } else {
        Err(PdmpError::InsufficientData("holding times have zero spread".to_string()))
    }
}

fn smooth(sorted: &[f64], grid: &[f64], b: f64, shape: KernelShape) -> (Vec<f64>, Vec<bool>) {
    let n = sorted.len();
    let mut values = Vec::with_capacity(grid.len());
    let mut zero = Vec::with_capacity(grid.len());
    for &t in grid {
        let first = sorted.partition_point(|&s| s < t - b);
        let at_risk = n - sorted.partition_point(|&s| s < t);
        zero.push(at_risk == 0);
        let mut acc = 0.0;
        for &s in sorted[first..].iter().take_while(|&&s| s <= t + b) {
            let y = n - sorted.partition_point(|&v| v < s);
            acc += shape.eval((t - s) / b) / y as f64;
        }
        values.push(if at_risk == 0 { 0.0 } else { acc / b });
    }
    (values, zero)
}

/// Like [`smooth`], each increment at `s` weighted by `Ĥₖ(s−)`, the
/// fraction of all `n_a` transitions from `A` that are in the block and
/// still at risk at `s`.
fn smooth_weighted(sorted: &[f64], grid: &[f64], b: f64, shape: KernelShape, n_a: f64) -> (Vec<f64>, Vec<bool>) {
    let n = sorted.len();
    let mut values = Vec::with_capacity(grid.len());
    let mut zero = Vec::with_capacity(grid.len());
    for &t in grid {
        let first = sorted.partition_point(|&s| s < t - b);
        let mut acc = 0.0;
        for &s in sorted[first..].iter().take_while(|&&s| s <= t + b) {
            let y = (n - sorted.partition_point(|&v| v < s)) as f64;
            let h_before = y / n_a;
            acc += shape.eval((t - s) / b) * h_before / y;
        }
        zero.push(n - sorted.partition_point(|&s| s < t) == 0);
        values.push(acc / b);
    }
    (values, zero)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(PdmpError::invalid("time grid is empty"));
    }
    if grid.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
        return Err(PdmpError::invalid("grid times must be positive and finite"));
    }
    Ok(())
}

fn resolve_bandwidth(from_a: &FromA, bandwidth: Option<f64>) -> Result<f64> {
    match bandwidth {
        Some(b) if b > 0.0 && b.is_finite() => Ok(b),
        Some(_) => Err(PdmpError::invalid("bandwidth must be positive")),
        None => default_bandwidth(&from_a.s),
    }
}

/// `l̂(A, Bₖ, t)` on `grid`. With `bandwidth = None` the default rule is
/// applied to all holding times from `A`.
pub fn estimate_l(
    chain: &EmbeddedChain,
    partition: &Partition,
    k: usize,
    grid: &[f64],
    bandwidth: Option<f64>,
    shape: KernelShape,
) -> Result<HazardEstimate> {
    check_block(partition, k)?;
    check_grid(grid)?;
    let from_a = FromA::collect(chain, partition)?;
    let b = resolve_bandwidth(&from_a, bandwidth)?;
    if grid.iter().all(|&t| from_a.s.iter().all(|&s| s < t)) {
        return Err(PdmpError::EmptyAtRisk);
    }
    let (values, zero_at_risk) = smooth(&from_a.sorted_block(k), grid, b, shape);
    Ok(HazardEstimate {
        grid: grid.to_vec(),
        values,
        bandwidth: b,
        kernel_shape: shape,
        zero_at_risk,
    })
}

/// How `l̂ₖ` and `Ĥₖ` are combined in [`estimate_density`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DensityMethod {
    /// `Σₖ (1/b) Σ K((t − s)/b) Ĥₖ(s−) / Yₖ(s)` over jumps `s` of block `k`.
    #[default]
    SmoothedProduct,
    /// `Σₖ l̂ₖ(t) Ĥₖ(t)`.
    PointwiseProduct,
}

impl DensityMethod {
    pub fn name(self) -> &'static str {
        match self {
            DensityMethod::SmoothedProduct => "smoothed_product",
            DensityMethod::PointwiseProduct => "pointwise_product",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "smoothed_product" => Ok(DensityMethod::SmoothedProduct),
            "pointwise_product" => Ok(DensityMethod::PointwiseProduct),
            other => Err(PdmpError::InvalidParameter(alloc::format!("unknown density method '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityEstimate {
    pub x: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Transitions with `Zᵢ ∈ A`.
    pub n_used: usize,
    pub bandwidth: f64,
    /// Per grid point: some block had nobody at risk there.
    pub zero_at_risk: Vec<bool>,
}

/// `f̂(x, t)` on `grid` from the blocks of `partition`.
pub fn estimate_density(
    chain: &EmbeddedChain,
    x: f64,
    partition: &Partition,
    grid: &[f64],
    bandwidth: Option<f64>,
    shape: KernelShape,
    method: DensityMethod,
) -> Result<DensityEstimate> {
    check_grid(grid)?;
    let from_a = FromA::collect(chain, partition)?;
    let b = resolve_bandwidth(&from_a, bandwidth)?;
    if grid.iter().all(|&t| from_a.s.iter().all(|&s| s < t)) {
        return Err(PdmpError::EmptyAtRisk);
    }
    let mut values = alloc::vec![0.0; grid.len()];
    let mut zero_at_risk = alloc::vec![false; grid.len()];
    let n_a = from_a.s.len() as f64;
    for k in 0..partition.n_blocks() {
        let sorted = from_a.sorted_block(k);
        let (l, z) = match method {
            DensityMethod::PointwiseProduct => smooth(&sorted, grid, b, shape),
            DensityMethod::SmoothedProduct => smooth_weighted(&sorted, grid, b, shape, n_a),
        };
        for (j, &t) in grid.iter().enumerate() {
            values[j] += match method {
                DensityMethod::PointwiseProduct => {
                    let beyond = sorted.len() - sorted.partition_point(|&s| s <= t);
                    l[j] * beyond as f64 / n_a
                }
                DensityMethod::SmoothedProduct => l[j],
            };
            zero_at_risk[j] |= z[j] && method == DensityMethod::PointwiseProduct;
        }
    }
    if method == DensityMethod::SmoothedProduct {
        for (j, &t) in grid.iter().enumerate() {
            zero_at_risk[j] = from_a.s.iter().all(|&s| s < t);
        }
    }
    Ok(DensityEstimate {
        x,
        grid: grid.to_vec(),
        values,
        n_used: from_a.s.len(),
        bandwidth: b,
        zero_at_risk,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{tcp_characteristics, tcp_true_density, TcpModel};
    use crate::numerics::integrate;
    use crate::rng::RandomStream;
    use alloc::vec;

    fn chain_from(z: &[f64], s: &[f64]) -> EmbeddedChain {
        let mut entries = vec![(vec![z[0]], 0.0)];
        for (zi, si) in z[1..].iter().zip(s) {
            entries.push((vec![*zi], *si));
        }
        EmbeddedChain { entries }
    }

    fn whole() -> Interval {
        Interval::new(f64::NEG_INFINITY, f64::INFINITY)
    }

    /// Chain alternating between 0.5 (in A) and a destination, so every
    /// second transition starts in A.
    fn synthetic(dest: &[f64], s: &[f64]) -> EmbeddedChain {
        let mut z = vec![0.5];
        let mut hold = Vec::new();
        for (d, si) in dest.iter().zip(s) {
            z.push(*d);
            hold.push(*si);
            z.push(0.5);
            hold.push(1.0);
        }
        chain_from(&z, &hold)
    }

    #[test]
    fn kernel_mass_is_one() {
        for k in [KernelShape::Epanechnikov, KernelShape::Triangular, KernelShape::Uniform] {
            let m = integrate(|u| k.eval(u), -1.0, 1.0, 1e-12).unwrap();
            assert!((m - 1.0).abs() < 1e-10);
            assert_eq!(KernelShape::parse(k.name()).unwrap(), k);
        }
        assert!(KernelShape::parse("gaussian").is_err());
    }

    #[test]
    fn quantile_blocks_have_equal_counts() {
        let mut st = RandomStream::new(31, 0);
        let dest: Vec<f64> = (0..1001).map(|_| 10.0 + st.uniform()).collect();
        let s = vec![1.0; dest.len()];
        let ch = synthetic(&dest, &s);
        let p = build_partition(&ch, 0.5, 0.2, 4, whole()).unwrap();
        assert_eq!(p.set_a, Interval::new(0.4, 0.6));
        let mut counts = vec![0usize; 4];
        for d in &dest {
            counts[p.block_of(*d).unwrap()] += 1;
        }
        let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
        assert!(hi - lo <= 1, "{counts:?}");
        let one = build_partition(&ch, 0.5, 0.2, 1, whole()).unwrap();
        let min = dest.iter().copied().fold(f64::INFINITY, f64::min);
        let max = dest.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(one.blocks, vec![Interval::new(min, max)]);
    }

    #[test]
    fn partition_on_tcp_chain() {
        let c = tcp_characteristics(TcpModel::LinearRate).unwrap();
        let mut st = RandomStream::new(32, 0);
        let tr = c.simulate_jumps(&[1.0], 5000, &mut st).unwrap();
        let ch = crate::chains::embedded_chain(&tr);
        let p = build_partition(&ch, 0.5, 0.2, 8, Interval::new(0.0, f64::INFINITY)).unwrap();
        assert!((p.set_a.lo - 0.4).abs() < 1e-15 && (p.set_a.hi - 0.6).abs() < 1e-15);
        // shrinking near the boundary at 0
        let p = build_partition(&ch, 0.5, 2.0, 8, Interval::new(0.0, f64::INFINITY)).unwrap();
        assert!(p.set_a.lo > 0.0);
        assert!(build_partition(&ch.clone_prefix(10), 0.5, 0.2, 2, whole()).is_err());
    }

    impl EmbeddedChain {
        fn clone_prefix(&self, n: usize) -> EmbeddedChain {
            EmbeddedChain {
                entries: self.entries[..n].to_vec(),
            }
        }
    }

    #[test]
    fn h_counts() {
        let dest = vec![2.0; 40];
        let s: Vec<f64> = (0..40).map(|i| if i % 2 == 0 { 0.5 } else { 2.0 }).collect();
        let ch = synthetic(&dest, &s);
        let p = Partition {
            set_a: Interval::new(0.4, 0.6),
            blocks: vec![Interval::new(1.5, 2.5)],
        };
        assert_eq!(estimate_h(&ch, &p, 0, 0.1).unwrap(), 1.0);
        assert_eq!(estimate_h(&ch, &p, 0, 3.0).unwrap(), 0.0);
        assert_eq!(estimate_h(&ch, &p, 0, 1.0).unwrap(), 0.5);
        let away = Partition {
            set_a: Interval::new(5.0, 6.0),
            blocks: p.blocks.clone(),
        };
        assert_eq!(estimate_h(&ch, &away, 0, 1.0), Err(PdmpError::EmptyA));
    }

    #[test]
    fn h_is_monotone_and_sums_to_survival() {
        let mut st = RandomStream::new(33, 0);
        let dest: Vec<f64> = (0..500).map(|_| 1.0 + st.uniform()).collect();
        let s: Vec<f64> = (0..500).map(|_| st.exp1()).collect();
        let ch = synthetic(&dest, &s);
        let p = build_partition(&ch, 0.5, 0.01, 5, whole()).unwrap();
        assert!(p.blocks[0].lo >= 1.0);
        let grid: Vec<f64> = (0..60).map(|k| k as f64 * 0.1).collect();
        for k in 0..5 {
            let h: Vec<f64> = grid.iter().map(|&t| estimate_h(&ch, &p, k, t).unwrap()).collect();
            assert!(h.windows(2).all(|w| w[1] <= w[0]));
        }
        for &t in &grid {
            let sum: f64 = (0..5).map(|k| estimate_h(&ch, &p, k, t).unwrap()).sum();
            let frac = s.iter().filter(|&&v| v > t).count() as f64 / 500.0;
            assert!((sum - frac).abs() < 1e-12);
        }
        let at0: f64 = (0..5).map(|k| estimate_h(&ch, &p, k, 0.0).unwrap()).sum();
        assert!((at0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_hazard_recovered() {
        let r = 1.0;
        let mut st = RandomStream::new(34, 0);
        let s: Vec<f64> = (0..10_000).map(|_| st.exponential(r)).collect();
        let z = vec![0.5; s.len() + 1];
        let ch = chain_from(&z, &s);
        let p = build_partition(&ch, 0.5, 0.2, 1, whole()).unwrap();
        let grid: Vec<f64> = (0..=14).map(|k| 0.3 + 0.05 * k as f64).collect();
        let l = estimate_l(&ch, &p, 0, &grid, Some(0.2), KernelShape::Epanechnikov).unwrap();
        for v in &l.values {
            assert!((v - r).abs() < 0.1 * r, "{v}");
        }
        for m in [DensityMethod::SmoothedProduct, DensityMethod::PointwiseProduct] {
            let f = estimate_density(&ch, 0.5, &p, &grid, Some(0.2), KernelShape::Epanechnikov, m).unwrap();
            for (t, v) in grid.iter().zip(&f.values) {
                let want = r * (-r * t).exp();
                assert!((v - want).abs() < 0.1 * want, "{t} {v} {want}");
            }
            assert_eq!(f.n_used, 10_000);
        }
    }

    #[test]
    fn empty_block_gives_zero_rate() {
        let dest = vec![2.0; 40];
        let s = vec![1.0; 40];
        let ch = synthetic(&dest, &s);
        let p = Partition {
            set_a: Interval::new(0.4, 0.6),
            blocks: vec![Interval::new(1.5, 2.5), Interval::new(2.5, 3.0)],
        };
        let l = estimate_l(&ch, &p, 1, &[0.9, 1.0, 1.1], Some(0.2), KernelShape::Uniform).unwrap();
        assert_eq!(l.values, vec![0.0; 3]);
        assert!(estimate_l(&ch, &p, 0, &[5.0], Some(0.2), KernelShape::Uniform).is_err());
        assert!(estimate_l(&ch, &p, 0, &[], Some(0.2), KernelShape::Uniform).is_err());
        assert!(estimate_l(&ch, &p, 0, &[1.0], Some(-1.0), KernelShape::Uniform).is_err());
        let l = estimate_l(&ch, &p, 0, &[1.0, 1.5], Some(0.2), KernelShape::Uniform).unwrap();
        assert_eq!(l.zero_at_risk, vec![false, true]);
        assert_eq!(l.values[1], 0.0);
    }

    #[test]
    fn reordering_does_not_change_l() {
        let mut st = RandomStream::new(35, 0);
        let dest: Vec<f64> = (0..300).map(|_| st.uniform()).collect();
        let s: Vec<f64> = (0..300).map(|_| st.exp1()).collect();
        let ch = synthetic(&dest, &s);
        let rev_dest: Vec<f64> = dest.iter().rev().copied().collect();
        let rev_s: Vec<f64> = s.iter().rev().copied().collect();
        let rev = synthetic(&rev_dest, &rev_s);
        let p = build_partition(&ch, 0.5, 0.01, 3, whole()).unwrap();
        let grid = [0.3, 0.6, 0.9];
        for k in 0..3 {
            let a = estimate_l(&ch, &p, k, &grid, Some(0.25), KernelShape::Triangular).unwrap();
            let b = estimate_l(&rev, &p, k, &grid, Some(0.25), KernelShape::Triangular).unwrap();
            for (u, v) in a.values.iter().zip(&b.values) {
                assert!((u - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn default_bandwidth_rule() {
        let s = [1.0, 2.0, 3.0, 4.0];
        let b = default_bandwidth(&s).unwrap();
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((b - 4f64.powf(-0.2) * sd).abs() < 1e-12);
        assert!(default_bandwidth(&[1.0]).is_err());
        assert!(default_bandwidth(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn tcp_density_small_sample() {
        let c = tcp_characteristics(TcpModel::LinearRate).unwrap();
        let mut st = RandomStream::new(36, 0);
        let tr = c.simulate_jumps(&[1.0], 50_000, &mut st).unwrap();
        let ch = crate::chains::embedded_chain(&tr);
        let p = build_partition(&ch, 0.5, 0.2, 4, Interval::new(0.0, f64::INFINITY)).unwrap();
        let grid: Vec<f64> = (0..=13).map(|k| 0.2 + 0.1 * k as f64).collect();
        let f = estimate_density(&ch, 0.5, &p, &grid, Some(0.15), KernelShape::Epanechnikov, DensityMethod::default())
            .unwrap();
        for (t, v) in grid.iter().zip(&f.values) {
            let want = tcp_true_density(0.5, *t).unwrap();
            assert!((v - want).abs() < 0.1, "{t} {v} {want}");
        }
        assert_eq!(DensityMethod::parse("pointwise_product").unwrap(), DensityMethod::PointwiseProduct);
        assert!(DensityMethod::parse("other").is_err());
    }
}
