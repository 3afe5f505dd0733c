use std::sync::Arc;

use proptest::prelude::*;

use pdmp::chains::{check_markov_kernel, embedded_chain, EmbeddedChain};
use pdmp::coupling::{empirical_wasserstein, fit_rate, simulate_pair, PairEvent};
use pdmp::estimation::{build_partition, estimate_h, estimate_l, KernelShape};
use pdmp::models::{tcp_characteristics, BoxSet, SwitchingModel, SwitchingRates, TcpModel, VectorField};
use pdmp::{Flow, Interval, LocalCharacteristics, RandomStream};

fn damped_rotation() -> LocalCharacteristics {
    LocalCharacteristics::new(
        2,
        Flow::ode(|y, dy| {
            dy[0] = -y[1] - 0.1 * y[0];
            dy[1] = y[0] - 0.1 * y[1];
        }),
        |_| 1.0,
        |x, _| vec![0.5 * x[0], x[1]],
    )
}

fn drift_linear_rate() -> LocalCharacteristics {
    // TCP without the registered closed forms: forces quadrature + root finding
    LocalCharacteristics::new(1, Flow::closed(|x, t| vec![x[0] + t]), |x| x[0], |x, _| vec![0.5 * x[0]])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn semigroup_closed_form(x in 0.0..20.0f64, s in 0.0..10.0f64, t in 0.0..10.0f64) {
        let c = tcp_characteristics(TcpModel::LinearRate).unwrap();
        let whole = c.flow_at(&[x], s + t).unwrap();
        let split = c.flow_at(&c.flow_at(&[x], s).unwrap(), t).unwrap();
        prop_assert!((whole[0] - split[0]).abs() < 1e-9);
    }

    #[test]
    fn inversion_consistency(x in 0.0..10.0f64, u in 1e-9..1.0f64) {
        let exact = tcp_characteristics(TcpModel::LinearRate).unwrap();
        let numeric = drift_linear_rate();
        let a = exact.inter_jump_from_uniform(&[x], u).unwrap().time;
        let b = numeric.inter_jump_from_uniform(&[x], u).unwrap().time;
        prop_assert!((a - b).abs() < 1e-8, "x={} u={} {} {}", x, u, a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn semigroup_ode(y0 in -2.0..2.0f64, y1 in -2.0..2.0f64, s in 0.0..1.0f64, t in 0.0..1.0f64) {
        let c = damped_rotation();
        let whole = c.flow_at(&[y0, y1], s + t).unwrap();
        let split = c.flow_at(&c.flow_at(&[y0, y1], s).unwrap(), t).unwrap();
        prop_assert!((whole[0] - split[0]).abs() < 1e-6 && (whole[1] - split[1]).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tcp_halving_identity(x0 in 0.0..10.0f64, seed in any::<u64>()) {
        let c = tcp_characteristics(TcpModel::LinearRate).unwrap();
        let mut s = RandomStream::new(seed, 0);
        let tr = c.simulate(&[x0], 200.0, &mut s).unwrap();
        let chain = embedded_chain(&tr);
        for w in chain.entries.windows(2) {
            prop_assert_eq!(w[1].0[0], 0.5 * (w[0].0[0] + w[1].1));
        }
    }

    #[test]
    fn determinism(x0 in 0.0..5.0f64, seed in any::<u64>(), index in any::<u64>()) {
        let c = tcp_characteristics(TcpModel::LinearRate).unwrap();
        let run = || {
            let mut s = RandomStream::new(seed, index);
            let tr = c.simulate(&[x0], 50.0, &mut s).unwrap();
            tr.events().iter().flat_map(|(t, _, z)| [t.to_bits(), z[0].to_bits()]).collect::<Vec<_>>()
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn bounded_horizon_has_finite_jumps(x0 in 0.0..50.0f64, seed in any::<u64>()) {
        let c = tcp_characteristics(TcpModel::LinearRate).unwrap();
        let mut s = RandomStream::new(seed, 1);
        let tr = c.simulate(&[x0], 100.0, &mut s).unwrap();
        prop_assert!(tr.n_jumps() < 10_000);
        prop_assert!(tr.jump_times().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn switching_jumps_only_change_mode(seed in any::<u64>(), rate in 0.2..3.0f64) {
        let fields = vec![
            VectorField::affine(vec![-1.0], vec![1.0]),
            VectorField::affine(vec![-1.0], vec![-1.0]),
        ];
        let model = Arc::new(
            SwitchingModel::new(
                1,
                fields,
                SwitchingRates::Constant(vec![0.0, rate, rate, 0.0]),
                rate,
                BoxSet::new(vec![-2.0], vec![2.0]),
            )
            .unwrap(),
        );
        let c = model.characteristics();
        let mut s = RandomStream::new(seed, 0);
        let tr = c.simulate(&[0.3, 0.0], 30.0, &mut s).unwrap();
        for k in 1..=tr.n_jumps() {
            let pre = tr.pre_jump_state(k);
            let post = &tr.post_jump_states()[k - 1];
            prop_assert!((pre[0] - post[0]).abs() < 1e-9);
            prop_assert!(pre[1] != post[1]);
        }
    }

    #[test]
    fn gap_constant_between_events(x in 0.0..6.0f64, y in 0.0..6.0f64, seed in any::<u64>()) {
        let mut s = RandomStream::new(seed, 0);
        let p = simulate_pair(x, y, 20.0, &mut s).unwrap();
        for k in 1..p.times.len() {
            let (a, b) = p.states[k - 1];
            let dt = p.times[k] - p.times[k - 1];
            let (pa, pb) = (a + dt, b + dt);
            prop_assert!(((pa - pb).abs() - (a - b).abs()).abs() < 1e-12);
            let (na, nb) = p.states[k];
            if p.events[k] == PairEvent::Simultaneous {
                prop_assert!(((na - nb).abs() - 0.5 * (pa - pb).abs()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn markov_kernel_is_stochastic(x in 0.0..8.0f64) {
        let c = tcp_characteristics(TcpModel::LinearRate).unwrap();
        prop_assert!(check_markov_kernel(&c, &[x]).unwrap() < 1e-6);
    }

    #[test]
    fn wasserstein_permutation_invariant(
        mut a in prop::collection::vec(-5.0..5.0f64, 1..60),
        seed in any::<u64>(),
    ) {
        let mut s = RandomStream::new(seed, 0);
        let b: Vec<f64> = a.iter().map(|v| v + s.uniform() - 0.5).collect();
        let w = empirical_wasserstein(&a, &b, 1.0).unwrap();
        prop_assert!((w - empirical_wasserstein(&b, &a, 1.0).unwrap()).abs() < 1e-12);
        a.reverse();
        prop_assert!((w - empirical_wasserstein(&a, &b, 1.0).unwrap()).abs() < 1e-12);
        let mean_gap = (a.iter().sum::<f64>() - b.iter().sum::<f64>()).abs() / a.len() as f64;
        prop_assert!(w + 1e-12 >= mean_gap);
        prop_assert!(empirical_wasserstein(&a, &b, 2.0).unwrap() + 1e-12 >= w);
    }

    #[test]
    fn fit_rate_recovers_exponentials(rate in -2.0..2.0f64, c in 0.1..10.0f64) {
        let t: Vec<f64> = (0..10).map(|k| k as f64 * 0.5).collect();
        let v: Vec<f64> = t.iter().map(|t| c * (-rate * t).exp()).collect();
        let f = fit_rate(&t, &v).unwrap();
        prop_assert!((f.rate - rate).abs() < 1e-9);
        prop_assert!((f.intercept - c.ln()).abs() < 1e-9);
    }
}

fn synthetic_chain(seed: u64, n: usize) -> EmbeddedChain {
    let mut s = RandomStream::new(seed, 0);
    let mut entries = vec![(vec![0.5], 0.0)];
    for _ in 0..n {
        entries.push((vec![s.uniform()], s.exp1()));
    }
    EmbeddedChain { entries }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn h_monotone_and_additive(seed in any::<u64>(), k_blocks in 1usize..6, width in 0.2..0.6f64) {
        let chain = synthetic_chain(seed, 800);
        let p = build_partition(&chain, 0.5, width, k_blocks, Interval::new(0.0, 1.0)).unwrap();
        let n_a = chain.transitions().filter(|(z, _, _)| p.set_a.contains(z[0])).count() as f64;
        let mut prev = vec![f64::INFINITY; k_blocks];
        for j in 0..40 {
            let t = j as f64 * 0.1;
            let mut total = 0.0;
            for (k, last) in prev.iter_mut().enumerate() {
                let h = estimate_h(&chain, &p, k, t).unwrap();
                prop_assert!(h <= *last);
                *last = h;
                total += h;
            }
            let beyond = chain
                .transitions()
                .filter(|(z, _, s)| p.set_a.contains(z[0]) && *s > t)
                .count() as f64;
            prop_assert!((total - beyond / n_a).abs() < 1e-12);
        }
    }

    #[test]
    fn hazard_estimate_ignores_order(seed in any::<u64>()) {
        let mut s = RandomStream::new(seed, 0);
        let mut moves: Vec<(f64, f64)> = (0..600).map(|_| (1.0 + s.uniform(), s.exp1())).collect();
        let forward = out_and_back(&moves);
        moves.reverse();
        let backward = out_and_back(&moves);
        let p = build_partition(&forward, 0.5, 0.1, 3, Interval::new(0.0, 2.0)).unwrap();
        let grid = [0.4, 0.8, 1.2];
        for k in 0..3 {
            let a = estimate_l(&forward, &p, k, &grid, Some(0.3), KernelShape::Epanechnikov).unwrap();
            let b = estimate_l(&backward, &p, k, &grid, Some(0.3), KernelShape::Epanechnikov).unwrap();
            for (u, v) in a.values.iter().zip(&b.values) {
                prop_assert!((u - v).abs() < 1e-12);
            }
        }
    }
}

/// Chain that leaves 0.5 for each `(destination, holding time)` and then
/// returns to 0.5 after one time unit.
fn out_and_back(moves: &[(f64, f64)]) -> EmbeddedChain {
    let mut entries = vec![(vec![0.5], 0.0)];
    for &(z, s) in moves {
        entries.push((vec![z], s));
        entries.push((vec![0.5], 1.0));
    }
    EmbeddedChain { entries }
}
