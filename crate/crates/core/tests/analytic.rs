mod common;

use common::*;
use dynalloc::analytic::*;
use dynalloc::{Error, HoldTimer, Metrics, PolicySpec, SystemParams};

fn params(lambda: f64, delta: f64) -> SystemParams {
    SystemParams::new(lambda, 1.0, delta, 1.0).unwrap()
}

fn assert_metrics(got: Metrics, want: Metrics, tol: f64) {
    assert_close(got.r, want.r, tol);
    assert_close(got.c, want.c, tol);
}

#[test]
fn objective_examples() {
    let p = params(0.5, 2.0);
    assert_eq!(Metrics::new(2.0, 1.0).objective(&p), 2.0);
    assert_eq!(Metrics::new(3.0, 0.875).objective(&p), 2.375);
    let p0 = SystemParams { omega: 0.0, ..p };
    assert_eq!(Metrics::new(123.0, 0.4).objective(&p0), 0.4);
}

#[test]
fn mmk_examples() {
    let m = mmk_baseline(&params(0.5, 2.0), 1).unwrap();
    assert_close(m.r, 2.0, 1e-14);
    assert_eq!(m.c, 1.0);
    assert_eq!(mmk_baseline(&params(0.5, 2.0), 2).unwrap().c, 2.0);
    assert!(matches!(mmk_baseline(&params(1.0, 2.0), 1), Err(Error::Unstable(_))));
    // M/M/2 at rho = 0.85: R = 1/mu + C(2,a)/(2mu - lambda)
    let m = mmk_baseline(&params(1.7, 2.0), 2).unwrap();
    let a: f64 = 1.7;
    let erlang_c = (a * a / 2.0 / (1.0 - a / 2.0)) / (1.0 + a + a * a / 2.0 / (1.0 - a / 2.0));
    assert_close(m.r, 1.0 + erlang_c / (2.0 - 1.7), 1e-13);
}

#[test]
fn hold_on_examples() {
    let m = single_hold_on(&params(0.5, 2.0), HoldTimer::Erlang(1), 4.0).unwrap();
    assert_close(m.r, 3.0, 1e-14);
    assert_close(m.c, 0.875, 1e-14);
    for d in [0.5, 2.0, 7.0] {
        let m = single_hold_on(&params(0.5, d), HoldTimer::Deterministic, f64::INFINITY).unwrap();
        assert_close(m.r, 2.0, 1e-14);
        assert_close(m.c, 1.0, 1e-14);
    }
    let p = SystemParams { delta: 0.0, ..params(0.5, 1.0) };
    let m = single_hold_on(&p, HoldTimer::Erlang(1), 0.0).unwrap();
    assert_close(m.r, 2.0, 1e-14);
    assert_close(m.c, 0.5, 1e-14);
}

#[test]
fn hold_on_matches_reference_chain() {
    for &(lambda, delta, k, t) in &[(0.3, 2.0, 1, 4.0), (0.7, 0.5, 3, 1.5), (0.9, 4.0, 2, 0.7), (0.5, 1.0, 1, 0.0)] {
        let p = params(lambda, delta);
        let got = single_hold_on(&p, HoldTimer::Erlang(k), t).unwrap();
        let chain = single_chain(lambda, delta, &[1.0], 1, k, t, 400);
        assert_metrics(got, single_metrics(&chain, lambda, 1.0), 1e-9);
    }
}

#[test]
fn deterministic_hold_is_erlang_limit() {
    let p = params(0.6, 2.0);
    let det = single_hold_on(&p, HoldTimer::Deterministic, 3.0).unwrap();
    let big = single_hold_on(&p, HoldTimer::Erlang(1_000_000), 3.0).unwrap();
    assert_metrics(big, det, 1e-5);
}

#[test]
fn batching_examples() {
    let m = single_batching(&params(0.5, 2.0), 1).unwrap();
    assert_close(m.r, 4.0, 1e-14);
    assert_close(m.c, 0.75, 1e-14);
    let m = single_batching(&params(0.5, 2.0), 2).unwrap();
    assert_close(m.r, 4.0 + 2.0 / 3.0, 1e-14);
    assert_close(m.c, 2.0 / 3.0, 1e-14);
    let p = SystemParams { delta: 0.0, ..params(0.4, 1.0) };
    let m = single_batching(&p, 1).unwrap();
    assert_close(m.r, 1.0 / 0.6, 1e-14);
    assert_close(m.c, 0.4, 1e-14);
}

#[test]
fn batching_matches_reference_chain() {
    for &(lambda, delta, b) in &[(0.5, 2.0, 2), (0.8, 0.5, 4), (0.2, 1.0, 3)] {
        let got = single_batching(&params(lambda, delta), b).unwrap();
        let chain = single_chain(lambda, delta, &[1.0], b, 1, 0.0, 500);
        assert_metrics(got, single_metrics(&chain, lambda, 1.0), 1e-9);
    }
}

#[test]
fn optimal_single_examples() {
    let opt = single_optimal_objective(&params(0.5, 2.0)).unwrap();
    assert_eq!(opt.best_batch, 1);
    // keeping the server on wins past the crossover
    assert_eq!(opt.best, SingleChoice::AlwaysOn);
    assert_close(opt.value, 2.0, 1e-14);
    // at the crossover both candidates tie
    let p = params(0.25, 2.0);
    let never = mmk_baseline(&p, 1).unwrap().objective(&p);
    let immediate = single_batching(&p, 1).unwrap().objective(&p);
    assert_close(never, immediate, 1e-14);
    assert_close(single_optimal_objective(&p).unwrap().value, never, 1e-14);
    let below = params(0.2, 2.0);
    assert_eq!(single_optimal_objective(&below).unwrap().best, SingleChoice::Batching(1));
    let heavy = SystemParams { omega: 1e6, ..params(0.05, 2.0) };
    assert_eq!(single_optimal_objective(&heavy).unwrap().best, SingleChoice::AlwaysOn);
}

#[test]
fn optimal_single_prefers_batches_when_delay_is_cheap() {
    let p = SystemParams { omega: 0.01, ..params(0.3, 2.0) };
    let opt = single_optimal_objective(&p).unwrap();
    let SingleChoice::Batching(b) = opt.best else { panic!("expected batching, got {:?}", opt.best) };
    assert!(b > 1);
    let direct = (1..200).map(|b| single_batching(&p, b).unwrap().objective(&p)).fold(f64::INFINITY, f64::min);
    assert_close(opt.value, direct, 1e-12);
}

#[test]
fn statedep_examples() {
    let p = params(0.6, 1.5);
    for k in [HoldTimer::Erlang(1), HoldTimer::Erlang(3), HoldTimer::Deterministic] {
        let a = single_statedep_rates(&p, &[1.0], k, 2.0).unwrap();
        let b = single_hold_on(&p, k, 2.0).unwrap();
        assert_metrics(a, b, 1e-12);
    }
    let p = params(0.8, 2.0);
    let got = single_statedep_rates(&p, &[1.0, 2.0], HoldTimer::Erlang(1), 0.0).unwrap();
    let chain = single_chain(0.8, 2.0, &[1.0, 2.0], 1, 1, 0.0, 300);
    assert_metrics(got, single_metrics(&chain, 0.8, 2.0), 1e-9);
    let tiny = single_statedep_rates(&params(1e-7, 2.0), &[1.0, 2.0], HoldTimer::Erlang(1), 0.0).unwrap();
    assert!(tiny.c < 1e-5);
}

#[test]
fn statedep_matches_reference_chain_with_hold() {
    for &(lambda, rates, k, t) in &[
        (1.5, &[1.0, 2.0][..], 2u32, 3.0),
        (0.5, &[0.7, 1.2, 1.4][..], 1, 1.0),
        (2.5, &[1.0, 2.0, 3.0][..], 4, 0.5),
    ] {
        let p = params(lambda, 1.3);
        let got = single_statedep_rates(&p, rates, HoldTimer::Erlang(k), t).unwrap();
        let top = *rates.last().unwrap();
        let chain = single_chain(lambda, 1.3, rates, 1, k, t, 400);
        assert_metrics(got, single_metrics(&chain, lambda, top), 1e-9);
    }
}

#[test]
fn char_roots_examples() {
    let r = char_roots(0.5, 1.0, 2.0);
    assert_close(r.r1, 1.0 - 0.5f64.sqrt(), 1e-14);
    assert_close(r.r2, 1.0 + 0.5f64.sqrt(), 1e-14);
    let r = char_roots(0.3, 2.0, 1e6);
    assert_close(r.r1 * r.r2, 0.15, 1e-14);
    assert!(r.r1 < 0.15 && r.r2 > 1.0);
}

#[test]
fn one_always_matches_reference_chain() {
    for &(lambda, delta, mu1, mu2, l, h) in &[
        (1.2, 4.0, 1.0, 2.0, 2, 3),
        (0.9, 2.0, 1.0, 2.0, 2, 2),
        (1.5, 0.5, 1.0, 2.0, 1, 4),
        (0.6, 1.0, 0.8, 1.5, 3, 5),
        (1.0, 2.0, 1.0, 2.0, 1, 1),
    ] {
        let p = params(lambda, delta);
        let got = dual_one_always(&p, mu1, mu2, l, h).unwrap();
        let chain = one_always_chain(lambda, delta, mu1, mu2, l, h, 400);
        assert_metrics(got, one_always_metrics(&chain, lambda, mu1, mu2), 1e-9);
    }
}

#[test]
fn one_always_equal_thresholds_agree() {
    for &(lambda, delta, h) in &[(0.9, 2.0, 2), (1.3, 0.5, 3), (0.4, 4.0, 5), (1.0, 1.0, 2)] {
        let p = params(lambda, delta);
        let general = dual_one_always(&p, 1.0, 2.0, h, h).unwrap();
        let special = dual_one_always_equal(&p, 1.0, 2.0, h).unwrap();
        assert_metrics(general, special, 1e-10);
    }
}

#[test]
fn one_always_is_continuous_at_mu1_equal_lambda() {
    let at = dual_one_always(&params(1.0, 2.0), 1.0, 2.0, 2, 3).unwrap();
    let lo = dual_one_always(&params(1.0 - 1e-6, 2.0), 1.0, 2.0, 2, 3).unwrap();
    let hi = dual_one_always(&params(1.0 + 1e-6, 2.0), 1.0, 2.0, 2, 3).unwrap();
    assert!(at.r.is_finite() && at.c.is_finite());
    assert_close(at.r, 0.5 * (lo.r + hi.r), 1e-8);
    assert_close(at.c, 0.5 * (lo.c + hi.c), 1e-8);
}

#[test]
fn both_dynamic_matches_reference_chain() {
    for &(lambda, delta) in &[(0.9, 2.0), (1.7, 4.0), (0.3, 0.5), (1.0, 2.0), (1.9, 1.0)] {
        let got = dual_both_dynamic(&params(lambda, delta)).unwrap();
        let chain = both_dynamic_chain(lambda, 1.0, delta, 600);
        assert_metrics(got, both_dynamic_metrics(&chain, lambda, 1.0), 1e-9);
    }
}

#[test]
fn both_dynamic_degenerate_branch_is_continuous() {
    // mu = lambda/2 + 1/delta at lambda = 1, delta = 2
    let at = dual_both_dynamic(&params(1.0, 2.0)).unwrap();
    let lo = dual_both_dynamic(&params(1.0 - 1e-4, 2.0)).unwrap();
    let hi = dual_both_dynamic(&params(1.0 + 1e-4, 2.0)).unwrap();
    assert_close(at.r, 0.5 * (lo.r + hi.r), 1e-7);
    assert_close(at.c, 0.5 * (lo.c + hi.c), 1e-7);
    let fast = dual_both_dynamic(&params(0.8, 1e-9)).unwrap();
    assert_close(fast.c, 0.8, 1e-6);
}

#[test]
fn per_request_examples() {
    let m = server_per_request(&params(0.5, 2.0)).unwrap();
    assert_close(m.r, 3.0, 1e-15);
    assert_close(m.c, 1.5, 1e-15);
    let m = server_per_request(&SystemParams::new(2.0, 1.0, 1.0, 1.0).unwrap()).unwrap();
    assert_close(m.r, 2.0, 1e-15);
    assert_close(m.c, 4.0, 1e-15);
}

#[test]
fn reactive_examples() {
    let m = reactive_unlimited(&params(0.5, 2.0), 1).unwrap();
    assert_close(m.r, 3.0, 1e-14);
    assert_close(m.c, 1.0, 1e-14);
    for &(lambda, delta) in &[(0.1, 0.5), (2.0, 3.0), (7.0, 0.2)] {
        let p = params(lambda, delta);
        let a = reactive_unlimited(&p, 1).unwrap();
        let b = server_per_request(&p).unwrap();
        assert_close(a.r, b.r, 1e-13);
        assert!(a.c < b.c);
    }
}

#[test]
fn reactive_matches_reference_chain() {
    for &(lambda, delta, s) in &[(2.0, 2.0, 4), (0.5, 2.0, 1), (1.2, 0.7, 2)] {
        let got = reactive_unlimited(&params(lambda, delta), s).unwrap();
        let chain = reactive_chain(lambda, 1.0, delta, s, 45, 22);
        assert_metrics(got, reactive_metrics(&chain, lambda, 1.0, s), 1e-8);
    }
}

#[test]
fn proactive_examples() {
    let m = proactive_unlimited(&params(0.5, 2.0)).unwrap();
    let r = 1.0 - 0.5f64.sqrt();
    assert_close(m.r, 3.0 * r / (1.0 - r), 1e-13);
    assert_close(m.r, 1.24264, 1e-5);
    assert_close(m.c, 1.5, 1e-13);
    let tiny = proactive_unlimited(&params(1e-9, 2.0)).unwrap();
    assert_close(tiny.c, 1.0, 1e-8);
}

#[test]
fn proactive_matches_reference_chain() {
    for &(lambda, delta, cap_i, cap_k) in &[(0.5, 2.0, 45, 22), (2.0, 1.0, 60, 22), (0.9, 100.0, 200, 8)] {
        let got = proactive_unlimited(&params(lambda, delta)).unwrap();
        let chain = proactive_chain(lambda, 1.0, delta, cap_i, cap_k);
        assert_metrics(got, proactive_metrics(&chain, lambda, 1.0), 1e-8);
    }
}

#[test]
fn evaluate_dispatches_and_reports_instability() {
    let p = params(0.5, 2.0);
    let m = evaluate(&PolicySpec::HoldOn { k: HoldTimer::Erlang(1), t: 4.0 }, &p).unwrap();
    assert_close(m.r, 3.0, 1e-14);
    let heavy = params(1.2, 2.0);
    assert!(matches!(evaluate(&PolicySpec::Batching { b: 2 }, &heavy), Err(Error::Unstable(_))));
    assert!(evaluate(&PolicySpec::dual_identical(2, 3, 1.0), &heavy).is_ok());
    assert!(matches!(evaluate(&PolicySpec::Batching { b: 0 }, &p), Err(Error::Invalid(_))));
}

fn residual_for(policy: &PolicySpec, p: &SystemParams, chain: &Chain<StateLabel>, cap: u32) -> (f64, f64) {
    let probs = state_probabilities(policy, p, 1e-12).unwrap();
    let map = probs.to_map();
    let res = chain.balance_residual(&map, |s| level(s) < cap);
    (probs.total(), res)
}

#[test]
fn state_probabilities_satisfy_balance() {
    let p = params(0.7, 2.0);
    let cases: Vec<(PolicySpec, SystemParams, Chain<StateLabel>)> = vec![
        (PolicySpec::HoldOn { k: HoldTimer::Erlang(3), t: 2.0 }, p, single_chain(0.7, 2.0, &[1.0], 1, 3, 2.0, 200)),
        (PolicySpec::Batching { b: 3 }, p, single_chain(0.7, 2.0, &[1.0], 3, 1, 0.0, 200)),
        (
            PolicySpec::StateDepRates { c: 2, rates: vec![1.0, 2.0], k: HoldTimer::Erlang(2), t: 1.0 },
            params(1.4, 2.0),
            single_chain(1.4, 2.0, &[1.0, 2.0], 1, 2, 1.0, 200),
        ),
        (PolicySpec::dual_identical(2, 3, 1.0), params(1.2, 4.0), one_always_chain(1.2, 4.0, 1.0, 2.0, 2, 3, 200)),
        (PolicySpec::DualBothDynamic, params(1.2, 2.0), both_dynamic_chain(1.2, 1.0, 2.0, 200)),
        (PolicySpec::ReactiveUnlimited { s: 3 }, params(1.5, 2.0), reactive_chain(1.5, 1.0, 2.0, 3, 60, 30)),
        (PolicySpec::ProactiveUnlimited, params(1.5, 2.0), proactive_chain(1.5, 1.0, 2.0, 60, 30)),
    ];
    for (policy, p, chain) in cases {
        let cap = match policy {
            PolicySpec::ReactiveUnlimited { .. } | PolicySpec::ProactiveUnlimited => 29,
            _ => 199,
        };
        let (total, res) = residual_for(&policy, &p, &chain, cap);
        assert!(total > 1.0 - 1e-9 && total <= 1.0 + 1e-12, "{policy:?}: mass {total}");
        assert!(res < 1e-10, "{policy:?}: residual {res}");
    }
}
